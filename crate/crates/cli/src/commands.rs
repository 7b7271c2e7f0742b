//! Subcommand implementations. Per-alpha work runs in parallel; file writes
//! and summation orders are fixed, so identical configs give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde_json::json;

use bidisk_clark::clark::{disintegration_residual, ClarkMeasureQuad, MeasureJson};
use bidisk_clark::error::ClarkError;
use bidisk_clark::koszul::{cell_radius, taylor_spectrum_on_torus};
use bidisk_clark::modelspace::{
    active_nodes, clark_unitary, commutation_residual, embedding_j, intertwining_residual,
    p_phi_necessity, unitarity_residual, Axis, KphiBasis, OperatorJson, TruncatedHardy,
};
use bidisk_clark::profiles::{linear_fit, EPSILON_LADDER};
use bidisk_clark::rif::RifJson;
use bidisk_clark::{wrap_angle, C64};

use crate::config::{ConfigError, OutputFormat, RunConfig, TOOL_VERSION};

/// Verification failure: maps to exit code 1, naming the first failed check.
#[derive(Debug)]
pub struct VerifyFailure(pub String);

pub enum CommandError {
    Config(ConfigError),
    Verify(VerifyFailure),
    /// every sampled alpha value was exceptional: exit code 3
    Exceptional,
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<ClarkError> for CommandError {
    fn from(e: ClarkError) -> Self {
        CommandError::Config(ConfigError(e.to_string()))
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Config(ConfigError(format!("io error: {e}")))
    }
}

fn stamp_csv(config: &RunConfig) -> String {
    format!("# tool=bidisk-clark version={TOOL_VERSION} config={:016x}\n", config.hash)
}

fn stamp_json(value: serde_json::Value, config: &RunConfig) -> serde_json::Value {
    let mut object = value;
    if let Some(map) = object.as_object_mut() {
        map.insert("toolVersion".into(), json!(TOOL_VERSION));
        map.insert("configHash".into(), json!(format!("{:016x}", config.hash)));
    }
    object
}

fn write_out(path: &Path, contents: &str) -> Result<(), CommandError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// `levelset`: point cloud per alpha (CSV columns or the JSON mirror of
/// them) plus a metadata JSON. Exceptional values are reported and skipped;
/// all-exceptional is exit code 3.
pub fn cmd_levelset(config: &RunConfig) -> Result<(), CommandError> {
    let results: Vec<Option<String>> = config
        .alphas
        .par_iter()
        .map(|&alpha| {
            match config.rif.level_set_branches(alpha, config.nodes) {
                Ok(branches) => Some(match config.format {
                    OutputFormat::Csv => {
                        let mut csv = stamp_csv(config);
                        csv.push_str("theta1,theta2,branch,alpha_re,alpha_im\n");
                        for (t1, t2, branch) in branches.points() {
                            let _ = writeln!(
                                csv,
                                "{t1:.15e},{t2:.15e},{branch},{:.15e},{:.15e}",
                                alpha.re, alpha.im
                            );
                        }
                        csv
                    }
                    OutputFormat::Json => {
                        let points: Vec<serde_json::Value> = branches
                            .points()
                            .iter()
                            .map(|&(t1, t2, branch)| {
                                json!({"theta1": t1, "theta2": t2, "branch": branch})
                            })
                            .collect();
                        let value = stamp_json(
                            json!({
                                "alpha": [alpha.re, alpha.im],
                                "points": points,
                            }),
                            config,
                        );
                        serde_json::to_string_pretty(&value).unwrap()
                    }
                }),
                Err(ClarkError::ExceptionalAlpha { .. }) => None,
                Err(ClarkError::NonUnimodularRoot { .. }) => None,
                Err(_) => None,
            }
        })
        .collect();

    let extension = match config.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for (i, result) in results.into_iter().enumerate() {
        match result {
            Some(contents) => {
                let path = config.out.join(format!("levelset_{i:02}.{extension}"));
                write_out(&path, &contents)?;
                kept.push(i);
            }
            None => {
                eprintln!(
                    "warning: alpha angle {:.6} is exceptional (or near-exceptional); skipped",
                    config.alpha_angles[i]
                );
                skipped.push(i);
            }
        }
    }
    let meta = stamp_json(
        json!({
            "alphasUsed": kept.iter().map(|&i| config.alpha_angles[i]).collect::<Vec<_>>(),
            "alphasSkipped": skipped.iter().map(|&i| config.alpha_angles[i]).collect::<Vec<_>>(),
            "nodes": config.nodes,
        }),
        config,
    );
    write_out(
        &config.out.join("levelset_meta.json"),
        &serde_json::to_string_pretty(&meta).unwrap(),
    )?;
    if kept.is_empty() {
        return Err(CommandError::Exceptional);
    }
    Ok(())
}

/// `measure`: Clark measure quadrature export per alpha.
pub fn cmd_measure(config: &RunConfig) -> Result<(), CommandError> {
    let results: Vec<Option<MeasureJson>> = config
        .alphas
        .par_iter()
        .map(|&alpha| ClarkMeasureQuad::build(&config.rif, alpha, config.nodes).ok().map(|mu| MeasureJson::from(&mu)))
        .collect();
    let mut any = false;
    for (i, result) in results.into_iter().enumerate() {
        match result {
            Some(measure) => {
                let value = stamp_json(serde_json::to_value(&measure).unwrap(), config);
                write_out(
                    &config.out.join(format!("measure_{i:02}.json")),
                    &serde_json::to_string_pretty(&value).unwrap(),
                )?;
                any = true;
            }
            None => eprintln!(
                "warning: no measure for alpha angle {:.6} (exceptional)",
                config.alpha_angles[i]
            ),
        }
    }
    if !any {
        return Err(CommandError::Exceptional);
    }
    Ok(())
}

/// `unitary`: the pair of Clark unitaries for the first generic alpha, with
/// unitarity / commutation / intertwining residuals in the export.
pub fn cmd_unitary(config: &RunConfig) -> Result<(), CommandError> {
    let space = TruncatedHardy::new(config.degree, config.grid)
        .map_err(|e| ConfigError(e.to_string()))?;
    let basis = KphiBasis::build(&config.rif, &space);
    let interior = basis.interior_columns(config.profile.interior_threshold);
    for (i, &alpha) in config.alphas.iter().enumerate() {
        let u1 = match clark_unitary(&config.rif, alpha, Axis::Z1, &basis, &space) {
            Ok(u) => u,
            Err(ClarkError::ExceptionalAlpha { .. }) => {
                eprintln!(
                    "warning: alpha angle {:.6} is exceptional; skipped",
                    config.alpha_angles[i]
                );
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let u2 = clark_unitary(&config.rif, alpha, Axis::Z2, &basis, &space)?;
        let mu = ClarkMeasureQuad::build(&config.rif, alpha, config.nodes)?;
        let comm = commutation_residual(&u1, &u2, &interior)?;
        let intw =
            intertwining_residual(&config.rif, alpha, Axis::Z1, &basis, &space, &mu, &u1, &interior)?;
        for (axis_name, op) in [("u1", &u1), ("u2", &u2)] {
            let mut export = OperatorJson::from(op);
            let (unit_fwd, unit_bwd) = unitarity_residual(op, &interior);
            export.residuals.insert("unitarity".into(), unit_fwd.max(unit_bwd));
            export.residuals.insert("commutation".into(), comm);
            export.residuals.insert("intertwining".into(), intw.u_form);
            let value = stamp_json(serde_json::to_value(&export).unwrap(), config);
            write_out(
                &config.out.join(format!("unitary_{i:02}_{axis_name}.json")),
                &serde_json::to_string_pretty(&value).unwrap(),
            )?;
        }
        return Ok(()); // first generic alpha only
    }
    Err(CommandError::Exceptional)
}

/// `spectrum`: joint-spectrum scan of the unitary pair in its node-basis
/// representation, overlay of the level-set nodes, reported Hausdorff
/// distance.
pub fn cmd_spectrum(config: &RunConfig) -> Result<(), CommandError> {
    let space = TruncatedHardy::new(config.degree, config.grid)
        .map_err(|e| ConfigError(e.to_string()))?;
    let basis = KphiBasis::build(&config.rif, &space);
    let interior = basis.interior_columns(config.profile.interior_threshold);
    let alpha = config.alphas[0];
    config.rif.require_generic(alpha).map_err(|e| match e {
        ClarkError::ExceptionalAlpha { .. } => CommandError::Exceptional,
        other => CommandError::from(other),
    })?;

    let u1 = clark_unitary(&config.rif, alpha, Axis::Z1, &basis, &space)?;
    let mu = ClarkMeasureQuad::build(&config.rif, alpha, config.nodes)?;
    let residual =
        intertwining_residual(&config.rif, alpha, Axis::Z1, &basis, &space, &mu, &u1, &interior)?
            .u_form;

    let nodes = active_nodes(&mu);
    let m1 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
        nodes.len(),
        nodes.iter().map(|&(z1, _, _)| z1),
    ));
    let m2 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
        nodes.len(),
        nodes.iter().map(|&(_, z2, _)| z2),
    ));
    let tau = cell_radius(config.scan) + 10.0 * residual;
    let scan = taylor_spectrum_on_torus(&m1, &m2, config.scan, tau)?;

    let mut mask_csv = stamp_csv(config);
    mask_csv.push_str("theta1,theta2,inSpectrum\n");
    for i in 0..scan.grid_n {
        for j in 0..scan.grid_n {
            let _ = writeln!(
                mask_csv,
                "{:.15e},{:.15e},{}",
                scan.angles[i],
                scan.angles[j],
                u8::from(scan.mask[i * scan.grid_n + j])
            );
        }
    }
    write_out(&config.out.join("spectrum_mask.csv"), &mask_csv)?;

    let mut overlay = stamp_csv(config);
    overlay.push_str("theta1,theta2\n");
    let reference: Vec<(f64, f64)> = nodes
        .iter()
        .map(|&(z1, z2, _)| (wrap_angle(z1.arg()), wrap_angle(z2.arg())))
        .collect();
    for &(t1, t2) in &reference {
        let _ = writeln!(overlay, "{t1:.15e},{t2:.15e}");
    }
    write_out(&config.out.join("spectrum_levelset.csv"), &overlay)?;

    let distance = scan.hausdorff_to(&reference);
    let meta = stamp_json(
        json!({
            "gridN": scan.grid_n,
            "tol": scan.tolerance,
            "matricesHash": format!("{:016x}", scan.matrices_hash),
            "intertwiningResidual": residual,
            "hausdorff": distance,
        }),
        config,
    );
    write_out(
        &config.out.join("spectrum_meta.json"),
        &serde_json::to_string_pretty(&meta).unwrap(),
    )?;
    println!("hausdorff distance: {distance:.6}");
    Ok(())
}

/// `example`: prints the requested bundled function as interchange JSON.
pub fn cmd_example(name: &str) -> Result<(), CommandError> {
    let rif = bidisk_clark::bundled::by_name(name)
        .ok_or_else(|| ConfigError(format!("no bundled function named {name}")))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&RifJson::from(&rif)).unwrap()
    );
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    pass: bool,
}

impl Check {
    fn upper(name: &'static str, value: f64, threshold: f64) -> Check {
        Check {
            name,
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn lower(name: &'static str, value: f64, threshold: f64) -> Check {
        Check {
            name,
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

/// `verify`: the end-to-end identity pipeline at the configured tolerance
/// profile. Writes a machine-readable report; exits nonzero naming the first
/// failing check.
pub fn cmd_verify(config: &RunConfig) -> Result<(), CommandError> {
    let profile = config.profile;
    let phi = &config.rif;
    let mut checks: Vec<Check> = Vec::new();

    // pick the generic alphas from the configured list
    let generic: Vec<C64> = config
        .alphas
        .iter()
        .copied()
        .filter(|&a| matches!(phi.require_generic(a), Ok(())))
        .collect();
    if generic.is_empty() {
        return Err(CommandError::Exceptional);
    }
    let alpha = generic[0];

    // mass identity
    let mut mass_gap = 0.0f64;
    for &a in &generic {
        let mu = ClarkMeasureQuad::build(phi, a, profile.mass_nodes)?;
        mass_gap = mass_gap.max((mu.total_mass() - ClarkMeasureQuad::expected_mass(phi, a)).abs());
    }
    checks.push(Check::upper("mass_identity", mass_gap, profile.mass_tol));

    // Poisson identity at five interior points
    let points = [
        (C64::new(0.3, 0.0), C64::new(0.0, 0.2)),
        (C64::new(0.5, 0.1), C64::new(-0.4, 0.0)),
        (C64::new(-0.2, -0.3), C64::new(0.1, 0.5)),
        (C64::new(0.0, 0.6), C64::new(0.3, -0.3)),
        (C64::new(0.45, 0.45), C64::new(-0.5, -0.2)),
    ];
    let mu_poisson = ClarkMeasureQuad::build(phi, alpha, profile.poisson_nodes)?;
    let mut poisson = 0.0f64;
    for &z in &points {
        poisson = poisson.max(mu_poisson.poisson_residual(phi, z)?);
    }
    checks.push(Check::upper("poisson_identity", poisson, profile.poisson_tol));

    // disintegration over a small alpha panel
    let disintegration = disintegration_residual(
        phi,
        |z1, z2| C64::new((z1 + z2).norm_sqr(), 0.0),
        16,
        1024,
    )?;
    checks.push(Check::upper(
        "disintegration",
        disintegration,
        profile.disintegration_tol,
    ));

    // operator block
    let space = TruncatedHardy::new(config.degree, config.grid)
        .map_err(|e| ConfigError(e.to_string()))?;
    let basis = KphiBasis::build(phi, &space);
    let interior = basis.interior_columns(profile.interior_threshold);
    if interior.is_empty() {
        return Err(CommandError::Config(ConfigError(
            "no truncation-interior basis directions at this degree; raise --degree".into(),
        )));
    }
    let u1 = clark_unitary(phi, alpha, Axis::Z1, &basis, &space)?;
    let u2 = clark_unitary(phi, alpha, Axis::Z2, &basis, &space)?;
    let (unit_fwd, unit_bwd) = unitarity_residual(&u1, &interior);
    checks.push(Check::upper(
        "unitarity",
        unit_fwd.max(unit_bwd),
        profile.residual_final,
    ));
    checks.push(Check::upper(
        "commutation",
        commutation_residual(&u1, &u2, &interior)?,
        profile.residual_final,
    ));

    let mu_op = ClarkMeasureQuad::build(phi, alpha, profile.operator_nodes)?;
    let intw = intertwining_residual(phi, alpha, Axis::Z1, &basis, &space, &mu_op, &u1, &interior)?;
    checks.push(Check::upper(
        "intertwining",
        intw.u_form.max(intw.v_form),
        profile.intertwining_final,
    ));

    // embedding isometry band on interior directions
    let mu_iso = ClarkMeasureQuad::build(phi, alpha, profile.isometry_nodes)?;
    let j = embedding_j(&basis, &space, &mu_iso);
    let restricted = DMatrix::<C64>::from_fn(j.nrows(), interior.len(), |r, c| j[(r, interior[c])]);
    let sv = restricted.svd(false, false).singular_values;
    let band = (sv[0] - 1.0).abs().max((sv[sv.len() - 1] - 1.0).abs());
    checks.push(Check::upper("isometry_band", band, profile.isometry_band));

    // necessity of the model-space projection
    let necessity = p_phi_necessity(phi, alpha, &basis, &space)?;
    let q0 = phi.numerator().slice(1, C64::new(0.0, 0.0));
    if q0.is_zero() {
        checks.push(Check::upper("projection_necessity_cross", necessity, 1e-10));
    } else {
        checks.push(Check::lower("projection_necessity", necessity, 1e-3));
    }

    // box-mass growth along the level set
    let mu_mass = ClarkMeasureQuad::build(phi, alpha, profile.isometry_nodes)?;
    let branch = &mu_mass.branches.branches[0];
    let singular = phi.singular_points();
    let mut worst_r2 = 1.0f64;
    let mut worst_slope = f64::INFINITY;
    let count = branch.len();
    for sample in 0..10 {
        let i = (count / 20 + sample * count / 10) % count;
        let lambda = (mu_mass.branches.nodes[i], branch[i]);
        let near_singular = singular.points.iter().any(|&(s1, s2)| {
            bidisk_clark::torus_distance(
                (lambda.0.arg(), lambda.1.arg()),
                (s1.arg(), s2.arg()),
            ) < 0.3
        });
        if near_singular {
            continue;
        }
        let masses: Vec<f64> = EPSILON_LADDER
            .iter()
            .map(|&eps| mu_mass.epsilon_box_mass(lambda, eps))
            .collect();
        let (slope, _, r2) = linear_fit(&EPSILON_LADDER, &masses);
        worst_r2 = worst_r2.min(r2);
        worst_slope = worst_slope.min(slope);
    }
    checks.push(Check::lower("box_mass_slope", worst_slope, f64::MIN_POSITIVE));
    checks.push(Check::lower("box_mass_fit_r2", worst_r2, 0.95));

    // joint-spectrum scan against the level set
    let nodes = active_nodes(&mu_op);
    let m1 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
        nodes.len(),
        nodes.iter().map(|&(z1, _, _)| z1),
    ));
    let m2 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
        nodes.len(),
        nodes.iter().map(|&(_, z2, _)| z2),
    ));
    let tau = cell_radius(config.scan) + 10.0 * intw.u_form;
    let scan = taylor_spectrum_on_torus(&m1, &m2, config.scan, tau)?;
    let reference: Vec<(f64, f64)> = nodes
        .iter()
        .map(|&(z1, z2, _)| (wrap_angle(z1.arg()), wrap_angle(z2.arg())))
        .collect();
    let hausdorff = scan.hausdorff_to(&reference);
    let budget = 2.0 * std::f64::consts::TAU / config.scan as f64 + 10.0 * intw.u_form;
    checks.push(Check::upper("taylor_scan_hausdorff", hausdorff, budget));

    // report
    let report = stamp_json(
        json!({
            "profile": profile.name,
            "function": config.rif_source,
            "alphaAngles": config.alpha_angles,
            "checks": checks.iter().map(|c| json!({
                "name": c.name,
                "value": c.value,
                "threshold": c.threshold,
                "pass": c.pass,
            })).collect::<Vec<_>>(),
            "allPass": checks.iter().all(|c| c.pass),
        }),
        config,
    );
    write_out(
        &config.out.join("verify_report.json"),
        &serde_json::to_string_pretty(&report).unwrap(),
    )?;

    for check in &checks {
        println!(
            "[{}] {}: {:.3e} vs {:.3e}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.value,
            check.threshold
        );
    }
    if let Some(failed) = checks.iter().find(|c| !c.pass) {
        return Err(CommandError::Verify(VerifyFailure(failed.name.to_string())));
    }
    Ok(())
}
