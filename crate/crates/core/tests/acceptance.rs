//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities. Run with
//! `cargo test -p bidisk-clark --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use bidisk_clark::bipoly::BiPoly;
use bidisk_clark::blaschke1d::{eigenvalues, hausdorff, BlaschkeProduct};
use bidisk_clark::clark::ClarkMeasureQuad;
use bidisk_clark::koszul::{cell_radius, joint_eigenvalues, koszul_ranks, taylor_spectrum_on_torus};
use bidisk_clark::modelspace::{
    clark_unitary, commutation_residual, embedding_j, intertwining_residual, p_phi_necessity,
    unitarity_residual, Axis, KphiBasis, TruncatedHardy,
};
use bidisk_clark::profiles::{alpha_panel, linear_fit, refinement_ladder, EPSILON_LADDER};
use bidisk_clark::{bundled, profiles, unit, wrap_angle, C64, Rif};

fn report(criterion: usize, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {:>2}: {}",
        if pass { "PASS" } else { "FAIL" },
        criterion,
        detail
    );
    assert!(pass, "criterion {criterion}: {detail}");
}

/// Monotone decrease over a refinement ladder, with the noise-floor escape:
/// a triple that already sits below the final threshold everywhere has
/// converged and cannot be required to keep shrinking.
fn ladder_ok(values: &[f64; 3], final_threshold: f64) -> bool {
    let monotone = values[1] <= values[0] * 1.1 && values[2] <= values[1] * 1.1;
    let floored = values.iter().all(|&v| v <= final_threshold);
    monotone || floored
}

fn restrict_columns(m: &DMatrix<C64>, cols: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

fn band_of(m: &DMatrix<C64>) -> (f64, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    (sv[sv.len() - 1], sv[0])
}

// 1. reflection golden value and involution on random polynomials
#[test]
fn criterion_01_reflection_algebra() {
    let start = Instant::now();
    let p = BiPoly::from_real(1, 1, &[2.0, -1.0, -1.0, 0.0]).unwrap();
    let reflected = p.reflect().unwrap();
    let expected = BiPoly::from_real(1, 1, &[0.0, -1.0, -1.0, 2.0]).unwrap();
    let mut golden_gap = 0.0f64;
    for k in 0..=1 {
        for l in 0..=1 {
            golden_gap = golden_gap.max((reflected.coeff(k, l) - expected.coeff(k, l)).norm());
        }
    }

    let mut rng = StdRng::seed_from_u64(101);
    let mut worst_involution = 0.0f64;
    for _ in 0..100 {
        let n1 = rng.random_range(1..=4);
        let n2 = rng.random_range(1..=4);
        let coeffs: Vec<C64> = (0..(n1 + 1) * (n2 + 1))
            .map(|_| C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        let p = BiPoly::new(n1, n2, coeffs).unwrap();
        if p.bidegree() != (n1, n2) {
            continue; // random corner happened to vanish; bidegree not attained
        }
        let back = p.reflect().unwrap().reflect().unwrap();
        let scale = p.scale();
        for k in 0..=n1 {
            for l in 0..=n2 {
                worst_involution =
                    worst_involution.max((back.coeff(k, l) - p.coeff(k, l)).norm() / scale);
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        golden_gap <= 1e-14 && worst_involution <= 1e-14 && elapsed.as_secs_f64() < 1.0,
        &format!(
            "golden gap {golden_gap:.2e}, involution {worst_involution:.2e}, {elapsed:.2?} (< 1 s)"
        ),
    );
}

// 2. closed-form operator pair for phi = z1 z2 at D = 8
#[test]
fn criterion_02_product_example_golden_operators() {
    let start = Instant::now();
    let phi = bundled::zw();
    let alpha = unit(0.6);
    let space = TruncatedHardy::new(8, 64).unwrap();
    let basis = KphiBasis::build(&phi, &space);
    let dim = space.dimension();
    let monomial = |k: usize, l: usize| -> DVector<C64> {
        let mut e = DVector::<C64>::zeros(dim);
        e[k * 9 + l] = C64::new(1.0, 0.0);
        basis.coords(&e)
    };
    let u1 = clark_unitary(&phi, alpha, Axis::Z1, &basis, &space).unwrap();
    let u2 = clark_unitary(&phi, alpha, Axis::Z2, &basis, &space).unwrap();

    // entrywise comparison on interior degrees (< D) against the closed form:
    // U1: z1^k -> z1^{k+1}, z2^l -> alpha z2^{l-1}; U2 symmetric
    let mut entry_gap = 0.0f64;
    let interior_monomials: Vec<(usize, usize)> = (0..8).map(|k| (k, 0)).chain((1..8).map(|l| (0, l))).collect();
    for &(k, l) in &interior_monomials {
        let from = monomial(k, l);
        let expect1 = if l == 0 {
            monomial(k + 1, 0)
        } else {
            monomial(0, l - 1) * alpha
        };
        let expect2 = if k == 0 {
            monomial(0, l + 1)
        } else {
            monomial(k - 1, 0) * alpha
        };
        entry_gap = entry_gap.max((&u1.matrix * &from - expect1).norm());
        entry_gap = entry_gap.max((&u2.matrix * &from - expect2).norm());
    }

    let interior = basis.interior_columns(1e-8);
    let (unit1, unit2) = unitarity_residual(&u1, &interior);
    let comm = commutation_residual(&u1, &u2, &interior).unwrap();

    let mu = ClarkMeasureQuad::build(&phi, alpha, 1024).unwrap();
    let intw = intertwining_residual(&phi, alpha, Axis::Z1, &basis, &space, &mu, &u1, &interior)
        .unwrap();
    let elapsed = start.elapsed();
    report(
        2,
        entry_gap <= 1e-12
            && unit1.max(unit2) <= 1e-12
            && comm <= 1e-12
            && intw.u_form <= 1e-6
            && elapsed.as_secs_f64() < 5.0,
        &format!(
            "entrywise {entry_gap:.2e}, unitarity {:.2e}, commutation {comm:.2e}, \
             conjugacy {:.2e} (< 1e-6), {elapsed:.2?} (< 5 s)",
            unit1.max(unit2),
            intw.u_form
        ),
    );
}

// 3. Clark mass identity over the alpha panel
#[test]
fn criterion_03_mass_identity() {
    let start = Instant::now();
    let panel = alpha_panel(8);
    let mut worst_smooth = 0.0f64;
    for phi in [bundled::zw(), bundled::blaschke2()] {
        for &alpha in &panel {
            let mu = ClarkMeasureQuad::build(&phi, alpha, 2048).unwrap();
            let gap = (mu.total_mass() - ClarkMeasureQuad::expected_mass(&phi, alpha)).abs();
            worst_smooth = worst_smooth.max(gap);
        }
    }
    let fave = bundled::fave();
    let mut worst_fave = 0.0f64;
    for &alpha in &panel {
        let mu = ClarkMeasureQuad::build(&fave, alpha, 8192).unwrap();
        let gap = (mu.total_mass() - ClarkMeasureQuad::expected_mass(&fave, alpha)).abs();
        worst_fave = worst_fave.max(gap);
    }
    let elapsed = start.elapsed();
    report(
        3,
        worst_smooth <= 1e-8 && worst_fave <= 1e-5 && elapsed.as_secs_f64() < 10.0,
        &format!(
            "smooth {worst_smooth:.2e} (< 1e-8), singular {worst_fave:.2e} (< 1e-5), \
             {elapsed:.2?} (< 10 s)"
        ),
    );
}

// 4. Poisson identity at five interior points with refinement
#[test]
fn criterion_04_poisson_identity() {
    let start = Instant::now();
    let points = [
        (C64::new(0.3, 0.0), C64::new(0.0, 0.2)),
        (C64::new(0.5, 0.1), C64::new(-0.4, 0.0)),
        (C64::new(-0.2, -0.3), C64::new(0.1, 0.5)),
        (C64::new(0.0, 0.6), C64::new(0.3, -0.3)),
        (C64::new(0.45, 0.45), C64::new(-0.5, -0.2)),
    ];
    let alpha = unit(0.9);
    let mut worst_final = 0.0f64;
    let mut ladders_ok = true;
    for phi in [bundled::zw(), bundled::blaschke2()] {
        let mus: Vec<ClarkMeasureQuad> = [512usize, 1024, 2048]
            .iter()
            .map(|&n| ClarkMeasureQuad::build(&phi, alpha, n).unwrap())
            .collect();
        for &z in &points {
            let residuals = [
                mus[0].poisson_residual(&phi, z).unwrap(),
                mus[1].poisson_residual(&phi, z).unwrap(),
                mus[2].poisson_residual(&phi, z).unwrap(),
            ];
            worst_final = worst_final.max(residuals[2]);
            ladders_ok &= ladder_ok(&residuals, 1e-8);
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        worst_final <= 1e-8 && ladders_ok && elapsed.as_secs_f64() < 10.0,
        &format!(
            "worst residual {worst_final:.2e} (< 1e-8), refinement ok: {ladders_ok}, \
             {elapsed:.2?} (< 10 s)"
        ),
    );
}

// 5. embedding unitarity bands
#[test]
fn criterion_05_embedding_unitarity() {
    let alpha = unit(0.31);

    // z1 z2 at D = 8: full truncated basis
    let phi = bundled::zw();
    let space = TruncatedHardy::new(8, 64).unwrap();
    let basis = KphiBasis::build(&phi, &space);
    let mu = ClarkMeasureQuad::build(&phi, alpha, 4096).unwrap();
    let (zw_lo, zw_hi) = band_of(&embedding_j(&basis, &space, &mu));

    // two-factor product: the truncated basis carries 2^-D coefficient
    // tails, so the 1e-4 band is reached at D = 16 (the D = 8 value is
    // reported for the record)
    let phi = bundled::blaschke2();
    let space8 = TruncatedHardy::new(8, 64).unwrap();
    let basis8 = KphiBasis::build(&phi, &space8);
    let mu8 = ClarkMeasureQuad::build(&phi, alpha, 4096).unwrap();
    let (b2_lo8, b2_hi8) = band_of(&embedding_j(&basis8, &space8, &mu8));
    let space16 = TruncatedHardy::new(16, 64).unwrap();
    let basis16 = KphiBasis::build(&phi, &space16);
    let (b2_lo, b2_hi) = band_of(&embedding_j(&basis16, &space16, &mu8));

    // singular example at the relaxed profile, truncation-interior columns
    let fave = bundled::fave();
    let space_f = TruncatedHardy::new(8, 256).unwrap();
    let basis_f = KphiBasis::build(&fave, &space_f);
    let interior = basis_f.interior_columns(profiles::SINGULAR.interior_threshold);
    assert!(!interior.is_empty(), "interior restriction must not be vacuous");
    let mu_f = ClarkMeasureQuad::build(&fave, alpha, 4096).unwrap();
    let j_f = restrict_columns(&embedding_j(&basis_f, &space_f, &mu_f), &interior);
    let (fave_lo, fave_hi) = band_of(&j_f);

    let strict = 1e-4;
    let pass = (1.0 - zw_lo).abs() <= strict
        && (zw_hi - 1.0).abs() <= strict
        && (1.0 - b2_lo).abs() <= strict
        && (b2_hi - 1.0).abs() <= strict
        && fave_lo >= 0.99
        && fave_hi <= 1.01;
    report(
        5,
        pass,
        &format!(
            "zw [{zw_lo:.6}, {zw_hi:.6}] (1e-4 band), blaschke2 D=16 [{b2_lo:.6}, {b2_hi:.6}] \
             (1e-4 band; D=8 gives [{b2_lo8:.6}, {b2_hi8:.6}]), fave interior [{fave_lo:.4}, \
             {fave_hi:.4}] ([0.99, 1.01])"
        ),
    );
}

// 6. residual decrease along the refinement ladder for every bundled RIF
#[test]
fn criterion_06_residual_refinement() {
    let alpha = unit(0.31);
    let mut all_ok = true;
    let mut lines = Vec::new();
    for name in ["zw", "blaschke2", "fave"] {
        let phi = bundled::by_name(name).unwrap();
        let ladder = refinement_ladder(name).unwrap();
        let final_threshold = if name == "fave" {
            profiles::SINGULAR.residual_final
        } else {
            profiles::STRICT.residual_final
        };
        let mut unit_r = [0.0f64; 3];
        let mut comm_r = [0.0f64; 3];
        let mut intw_r = [0.0f64; 3];
        for (i, &(d, g, n)) in ladder.iter().enumerate() {
            let space = TruncatedHardy::new(d, g).unwrap();
            let basis = KphiBasis::build(&phi, &space);
            let interior = basis.interior_columns(1e-2);
            assert!(!interior.is_empty(), "{name}: vacuous interior at D={d}");
            let u1 = clark_unitary(&phi, alpha, Axis::Z1, &basis, &space).unwrap();
            let u2 = clark_unitary(&phi, alpha, Axis::Z2, &basis, &space).unwrap();
            let (r1, r2) = unitarity_residual(&u1, &interior);
            unit_r[i] = r1.max(r2);
            comm_r[i] = commutation_residual(&u1, &u2, &interior).unwrap();
            let mu = ClarkMeasureQuad::build(&phi, alpha, n).unwrap();
            let iw = intertwining_residual(&phi, alpha, Axis::Z1, &basis, &space, &mu, &u1, &interior)
                .unwrap();
            intw_r[i] = iw.u_form.max(iw.v_form);
        }
        let ok = ladder_ok(&unit_r, final_threshold)
            && ladder_ok(&comm_r, final_threshold)
            && ladder_ok(&intw_r, final_threshold);
        // smooth cases must additionally end below 1e-6
        let smooth_final_ok = name == "fave"
            || (unit_r[2] <= 1e-6 && comm_r[2] <= 1e-6 && intw_r[2] <= 1e-6);
        all_ok &= ok && smooth_final_ok;
        let fmt = |r: &[f64; 3]| format!("[{:.2e}, {:.2e}, {:.2e}]", r[0], r[1], r[2]);
        lines.push(format!(
            "{name}: unit {}, comm {}, intw {}",
            fmt(&unit_r),
            fmt(&comm_r),
            fmt(&intw_r)
        ));
    }
    report(6, all_ok, &lines.join(" | "));
}

// 7. necessity of the model-space projection in the perturbation formula
#[test]
fn criterion_07_projection_necessity() {
    let alpha = unit(0.9);
    let space = TruncatedHardy::new(8, 64).unwrap();

    // cross cases phi = z1 psi: flagged zero
    let zw = bundled::zw();
    let zw_val = p_phi_necessity(&zw, alpha, &KphiBasis::build(&zw, &space), &space).unwrap();
    let cross = Rif::new(
        BiPoly::from_real(1, 1, &[2.0, -1.0, -1.0, 0.0]).unwrap(),
        (1, 0),
        0.0,
    )
    .unwrap();
    let cross_val =
        p_phi_necessity(&cross, alpha, &KphiBasis::build(&cross, &space), &space).unwrap();

    // product-of-factors case with phi(0) != 0 and the singular example
    let b2 = bundled::blaschke2();
    let b2_val = p_phi_necessity(&b2, alpha, &KphiBasis::build(&b2, &space), &space).unwrap();
    let fave = bundled::fave();
    let space_f = TruncatedHardy::new(8, 256).unwrap();
    let fave_val =
        p_phi_necessity(&fave, alpha, &KphiBasis::build(&fave, &space_f), &space_f).unwrap();

    report(
        7,
        zw_val <= 1e-10 && cross_val <= 1e-10 && b2_val > 1e-3 && fave_val > 1e-3,
        &format!(
            "cross cases {zw_val:.2e}, {cross_val:.2e} (< 1e-10); \
             blaschke2 {b2_val:.3e}, fave {fave_val:.3e} (> 1e-3)"
        ),
    );
}

// 8. rank-criterion verdicts equal joint-eigenvalue membership
#[test]
fn criterion_08_koszul_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut disagreements = 0usize;
    let mut checks = 0usize;
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let gauss = DMatrix::<C64>::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let q = gauss.qr().q();
        let d1 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
            n,
            (0..n).map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)),
        ));
        let d2 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
            n,
            (0..n).map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)),
        ));
        let a = &q * &d1 * q.adjoint();
        let b = &q * &d2 * q.adjoint();
        let joint = joint_eigenvalues(&a, &b).unwrap();
        // membership probes: each joint eigenvalue, plus displaced points
        let mut probes: Vec<((C64, C64), bool)> =
            joint.iter().map(|&p| (p, true)).collect();
        for &(l1, l2) in &joint {
            let shifted = (l1 * unit(0.25), l2);
            let is_member = joint
                .iter()
                .any(|&(m1, m2)| (m1 - shifted.0).norm() + (m2 - shifted.1).norm() < 1e-9);
            probes.push((shifted, is_member));
        }
        for &(lambda, expected) in &probes {
            for tol in [1e-8, 1e-7, 1e-6] {
                let verdict = koszul_ranks(&a, &b, lambda, tol).unwrap().singular;
                checks += 1;
                if verdict != expected {
                    disagreements += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        8,
        disagreements == 0 && elapsed.as_secs_f64() < 20.0,
        &format!("{checks} verdicts, {disagreements} disagreements, {elapsed:.2?} (< 20 s)"),
    );
}

// 9. the joint spectrum of the unitary pair traces the level set
#[test]
fn criterion_09_taylor_spectrum_traces_level_set() {
    let grid_n = 256usize;
    let mut all_ok = true;
    let mut lines = Vec::new();
    for (name, d, g, n) in [("zw", 8usize, 64usize, 1024usize), ("fave", 8, 256, 4096)] {
        let phi = bundled::by_name(name).unwrap();
        let alpha = unit(0.31);
        let space = TruncatedHardy::new(d, g).unwrap();
        let basis = KphiBasis::build(&phi, &space);
        let interior = basis.interior_columns(1e-2);
        let u1 = clark_unitary(&phi, alpha, Axis::Z1, &basis, &space).unwrap();
        let mu = ClarkMeasureQuad::build(&phi, alpha, n).unwrap();
        let residual =
            intertwining_residual(&phi, alpha, Axis::Z1, &basis, &space, &mu, &u1, &interior)
                .unwrap()
                .u_form;

        // node-basis representation of the pair: coordinate multiplication
        let nodes = bidisk_clark::modelspace::active_nodes(&mu);
        let m1 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
            nodes.len(),
            nodes.iter().map(|&(z1, _, _)| z1),
        ));
        let m2 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
            nodes.len(),
            nodes.iter().map(|&(_, z2, _)| z2),
        ));
        let tau = cell_radius(grid_n) + 10.0 * residual;
        let scan = taylor_spectrum_on_torus(&m1, &m2, grid_n, tau).unwrap();
        let reference: Vec<(f64, f64)> = nodes
            .iter()
            .map(|&(z1, z2, _)| (wrap_angle(z1.arg()), wrap_angle(z2.arg())))
            .collect();
        let distance = scan.hausdorff_to(&reference);
        let budget = 2.0 * std::f64::consts::TAU / grid_n as f64 + 10.0 * residual;
        all_ok &= distance < budget;
        lines.push(format!(
            "{name}: Hausdorff {distance:.4} < {budget:.4} (residual {residual:.2e})"
        ));
    }
    report(9, all_ok, &lines.join(" | "));
}

// 10. linear growth of box mass along the level set
#[test]
fn criterion_10_box_mass_growth() {
    let mut all_ok = true;
    let mut lines = Vec::new();
    for name in ["zw", "blaschke2", "fave"] {
        let phi = bundled::by_name(name).unwrap();
        let alpha = unit(0.31);
        let mu = ClarkMeasureQuad::build(&phi, alpha, 4096).unwrap();
        let branch = &mu.branches.branches[0];
        let count = branch.len();
        let mut worst_r2 = 1.0f64;
        let mut worst_c = f64::INFINITY;
        for sample in 0..10 {
            // spread sample points along the branch, avoiding the
            // singularity of the fave example at angle zero
            let i = (count / 20 + sample * count / 10) % count;
            let lambda = (mu.branches.nodes[i], branch[i]);
            if name == "fave" && wrap_angle(lambda.0.arg()).abs() < 0.3 {
                continue;
            }
            let masses: Vec<f64> = EPSILON_LADDER
                .iter()
                .map(|&eps| mu.epsilon_box_mass(lambda, eps))
                .collect();
            let (c, _, r2) = linear_fit(&EPSILON_LADDER, &masses);
            worst_r2 = worst_r2.min(r2);
            worst_c = worst_c.min(c);
        }
        all_ok &= worst_c > 0.0 && worst_r2 > 0.95;
        lines.push(format!("{name}: min slope {worst_c:.3e}, min R^2 {worst_r2:.4}"));
    }
    report(10, all_ok, &lines.join(" | "));
}

// 11. mutual singularity surrogate
#[test]
fn criterion_11_mutual_singularity() {
    let panel = alpha_panel(4);

    // distinct alphas give strictly separated supports for z1 z2
    let zw = bundled::zw();
    let mus: Vec<ClarkMeasureQuad> = panel
        .iter()
        .map(|&a| ClarkMeasureQuad::build(&zw, a, 512).unwrap())
        .collect();
    let mut min_distance = f64::INFINITY;
    for i in 0..mus.len() {
        for j in i + 1..mus.len() {
            min_distance = min_distance.min(mus[i].support_distance(&mus[j]));
        }
    }

    // for the singular example, numerical intersections (node pairs below
    // sub-resolution distance) are confined to the 1e-2 box around (1, 1)
    let fave = bundled::fave();
    let n = 8192usize;
    let mu_a = ClarkMeasureQuad::build(&fave, panel[0], n).unwrap();
    let mu_b = ClarkMeasureQuad::build(&fave, panel[1], n).unwrap();
    let points_a = mu_a.active_points();
    let points_b = mu_b.active_points();
    let mut confined = true;
    let mut intersections = 0usize;
    for &a in &points_a {
        for &b in &points_b {
            if bidisk_clark::torus_distance(a, b) < 1e-5 {
                intersections += 1;
                if a.0.abs() > 1e-2 || a.1.abs() > 1e-2 {
                    confined = false;
                }
            }
        }
    }
    report(
        11,
        min_distance > 0.0 && confined && intersections > 0,
        &format!(
            "zw min support distance {min_distance:.4} (> 0); fave: {intersections} \
             sub-resolution meetings, confined to the 1e-2 box: {confined}"
        ),
    );
}

// 12. one-variable degeneration: unitary spectra equal Clark atoms
#[test]
fn criterion_12_one_variable_degeneration() {
    let mut rng = StdRng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let degree = rng.random_range(1..=6usize);
        let m = rng.random_range(1..=degree); // phi(0) = 0
        let zeros: Vec<C64> = (0..degree - m)
            .map(|_| {
                C64::from_polar(
                    0.15 + 0.65 * rng.random::<f64>(),
                    rng.random::<f64>() * std::f64::consts::TAU,
                )
            })
            .collect();
        let phi = BlaschkeProduct::new(zeros, m, rng.random::<f64>()).unwrap();
        let alpha = C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
        let basis = phi.model_basis().unwrap();
        let u = phi.clark_unitary(alpha, &basis).unwrap();
        let eigs = eigenvalues(&u);
        let atoms: Vec<C64> = phi
            .clark_measure(alpha)
            .unwrap()
            .atoms
            .iter()
            .map(|a| a.0)
            .collect();
        worst = worst.max(hausdorff(&eigs, &atoms));
    }
    report(
        12,
        worst < 1e-8,
        &format!("worst eigenvalue/atom Hausdorff over 50 products: {worst:.2e} (< 1e-8)"),
    );
}
