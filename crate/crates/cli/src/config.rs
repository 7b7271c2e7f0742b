//! Run configuration: defaults, TOML config file, command-line overrides.
//! Flags override the file; everything is validated against the module
//! preconditions before any computation starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use bidisk_clark::profiles::{self, TolProfile};
use bidisk_clark::rif::RifJson;
use bidisk_clark::{unit, Rif, C64};

/// Raw option set shared by the TOML file and the flag layer; `None` means
/// "not specified here".
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Options {
    /// inline JSON (starts with `{`), a file path, or a bundled name
    pub rif: Option<String>,
    /// comma list of angles in radians; alpha_k = e^{i angle_k}
    pub alpha: Option<String>,
    pub nodes: Option<usize>,
    pub degree: Option<usize>,
    pub grid: Option<usize>,
    pub scan: Option<usize>,
    #[serde(rename = "tol-profile")]
    pub tol_profile: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl Options {
    /// `other` wins wherever it specifies a value.
    pub fn overridden_by(self, other: Options) -> Options {
        Options {
            rif: other.rif.or(self.rif),
            alpha: other.alpha.or(self.alpha),
            nodes: other.nodes.or(self.nodes),
            degree: other.degree.or(self.degree),
            grid: other.grid.or(self.grid),
            scan: other.scan.or(self.scan),
            tol_profile: other.tol_profile.or(self.tol_profile),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
        }
    }
}

/// Fully resolved configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub rif: Rif,
    pub rif_source: String,
    pub alphas: Vec<C64>,
    pub alpha_angles: Vec<f64>,
    pub nodes: usize,
    pub degree: usize,
    pub grid: usize,
    pub scan: usize,
    pub profile: &'static TolProfile,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub hash: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Configuration / usage error: maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn load_file(path: &Path) -> Result<Options, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("invalid config file: {e}")))
}

impl RunConfig {
    pub fn resolve(options: Options) -> Result<RunConfig, ConfigError> {
        let profile_name = options.tol_profile.as_deref().unwrap_or("strict");
        let profile = profiles::by_name(profile_name)
            .ok_or_else(|| ConfigError(format!("unknown tolerance profile {profile_name}")))?;

        let rif_source = options
            .rif
            .clone()
            .ok_or_else(|| ConfigError("no function given: use --rif <path|inline|name>".into()))?;
        let rif = parse_rif(&rif_source)?;

        let alpha_angles: Vec<f64> = match &options.alpha {
            Some(list) => list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| ConfigError(format!("bad alpha angle {s:?}: {e}")))
                })
                .collect::<Result<_, _>>()?,
            None => profiles::alpha_panel(4).iter().map(|a| a.arg()).collect(),
        };
        if alpha_angles.is_empty() {
            return Err(ConfigError("empty alpha list".into()));
        }
        let alphas = alpha_angles.iter().map(|&t| unit(t)).collect();

        let nodes = options.nodes.unwrap_or(profile.mass_nodes);
        if nodes < 64 || !nodes.is_power_of_two() {
            return Err(ConfigError(format!(
                "--nodes must be a power of two >= 64, got {nodes}"
            )));
        }
        let degree = options.degree.unwrap_or(profile.degree);
        if degree == 0 || degree > 40 {
            return Err(ConfigError(format!("--degree out of range: {degree}")));
        }
        let grid = match options.grid {
            Some(g) => {
                if !g.is_power_of_two() || g < 2 * degree + 2 {
                    return Err(ConfigError(format!(
                        "--grid must be a power of two >= 2 D + 2 = {}, got {g}",
                        2 * degree + 2
                    )));
                }
                g
            }
            None => {
                use bidisk_clark::modelspace::TruncatedHardy;
                TruncatedHardy::for_rif(&rif, degree).grid()
            }
        };
        let scan = options.scan.unwrap_or(profile.scan_grid);
        if scan < 16 {
            return Err(ConfigError(format!("--scan too coarse: {scan}")));
        }
        let format = match options.format.as_deref().unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => return Err(ConfigError(format!("unknown format {other}"))),
        };
        let out = options.out.clone().unwrap_or_else(|| PathBuf::from("out"));

        let hash = config_hash(&options, profile.name);
        Ok(RunConfig {
            rif,
            rif_source,
            alphas,
            alpha_angles,
            nodes,
            degree,
            grid,
            scan,
            profile,
            out,
            format,
            hash,
        })
    }
}

fn parse_rif(source: &str) -> Result<Rif, ConfigError> {
    if let Some(bundled) = bidisk_clark::bundled::by_name(source) {
        return Ok(bundled);
    }
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(source)
            .map_err(|e| ConfigError(format!("cannot read {source}: {e}")))?
    };
    let json: RifJson = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("malformed function JSON: {e}")))?;
    Rif::try_from(json).map_err(|e| ConfigError(format!("invalid function: {e}")))
}

/// FNV-1a over the canonical serialization of the resolved options; embedded
/// in every output file so reruns are attributable. The output directory is
/// excluded: it does not affect any computed value, and excluding it keeps
/// runs into different directories byte-comparable.
fn config_hash(options: &Options, profile: &str) -> u64 {
    let mut hashed = options.clone();
    hashed.out = None;
    let canonical = format!(
        "{}|{}",
        serde_json::to_string(&hashed).unwrap_or_default(),
        profile
    );
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in canonical.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
