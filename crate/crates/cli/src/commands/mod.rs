//! Shared command plumbing: parameter resolution, run directories,
//! manifests and deterministic number formatting.

pub mod atlas;
pub mod dispersion;
pub mod simulate;
pub mod verify_cmd;

use crate::config::{ConfigError, ConfigFile};
use abcdlab::atlas::{from_nu_b, normalize, validate_physical, NormalizedParameters, NuB};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Instability(String),
    PropertyFailure,
    Inconclusive,
    Io(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Instability(_) | CmdError::Inconclusive => 3,
            CmdError::PropertyFailure => 4,
            CmdError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Config(msg) => write!(f, "{msg}"),
            CmdError::Instability(msg) => write!(f, "{msg}"),
            CmdError::PropertyFailure => write!(f, "property suite reported failures"),
            CmdError::Inconclusive => write!(f, "property suite inconclusive (instability detected)"),
            CmdError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> CmdError {
        CmdError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> CmdError {
        CmdError::Io(e.to_string())
    }
}

/// 17-significant-digit float formatting shared by every CSV writer.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Resolved inputs common to all subcommands.
pub struct Invocation {
    pub config: ConfigFile,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
}

impl Invocation {
    pub fn load(
        subcommand: &str,
        config_path: Option<PathBuf>,
        out: Option<PathBuf>,
        seed: Option<u64>,
    ) -> Result<Invocation, CmdError> {
        let config = match &config_path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CmdError::Config(format!("cannot read {}: {e}", path.display())))?;
                ConfigFile::parse(&text)?
            }
            None => ConfigFile::empty(),
        };
        let out = out.unwrap_or_else(|| default_out_root().join(subcommand));
        let seed = match seed {
            Some(s) => s,
            None => config.get_u64("run", "seed")?.unwrap_or(42),
        };
        Ok(Invocation { config, config_path, out, seed })
    }
}

fn default_out_root() -> PathBuf {
    std::env::var_os("ABCDLAB_OUT_ROOT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Creates the run directory. Creation is atomic (`create_dir`); an
/// existing directory is rejected so a run never mingles with stale output.
pub fn create_run_dir(path: &Path) -> Result<(), CmdError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::create_dir(path).map_err(|e| {
        CmdError::Config(format!("cannot create output directory {}: {e}", path.display()))
    })
}

/// Writes the manifest (before any compute) and a verbatim copy of the
/// configuration, making the run directory self-describing.
pub fn write_manifest(
    inv: &Invocation,
    subcommand: &str,
    resolved: &[(String, String)],
) -> Result<(), CmdError> {
    let mut text = String::new();
    text.push_str(&format!("subcommand = {subcommand}\n"));
    text.push_str(&format!(
        "config = {}\n",
        inv.config_path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "builtin-defaults".into())
    ));
    text.push_str(&format!("seed = {}\n", inv.seed));
    for (k, v) in resolved {
        text.push_str(&format!("{k} = {v}\n"));
    }
    std::fs::write(inv.out.join("manifest.txt"), text)?;
    let mut copy = std::fs::File::create(inv.out.join("config.ini"))?;
    copy.write_all(inv.config.raw().as_bytes())?;
    Ok(())
}

pub struct ResolvedParams {
    pub normalized: NormalizedParameters,
    /// The chart b when the input came through (nu, b), else the derived
    /// b_origin.
    pub b: f64,
    pub source: String,
}

/// Reads [parameters] as either the (nu, b) chart or a direct normalized
/// (a, c) pair; defaults to a = c = -1.
pub fn resolve_params(cfg: &ConfigFile) -> Result<ResolvedParams, CmdError> {
    let nu = cfg.get_f64("parameters", "nu")?;
    let b = cfg.get_f64("parameters", "b")?;
    let a = cfg.get_f64("parameters", "a")?;
    let c = cfg.get_f64("parameters", "c")?;
    match (nu, b, a, c) {
        (Some(nu), Some(b), None, None) => {
            let p = from_nu_b(NuB { nu, b });
            let report = validate_physical(&p);
            if !report.is_admissible() {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|ch| !ch.pass)
                    .map(|ch| ch.name)
                    .collect();
                return Err(CmdError::Config(format!(
                    "(nu={nu}, b={b}) is not admissible; failing checks: {}",
                    failed.join(", ")
                )));
            }
            let normalized = normalize(&p).expect("validated");
            Ok(ResolvedParams { normalized, b, source: format!("nu={nu}, b={b}") })
        }
        (None, None, Some(a), Some(c)) => {
            let normalized = NormalizedParameters::from_ac(a, c)
                .map_err(|e| CmdError::Config(e.to_string()))?;
            Ok(ResolvedParams {
                normalized,
                b: normalized.b_origin,
                source: format!("a={a}, c={c}"),
            })
        }
        (None, None, None, None) => {
            let normalized = NormalizedParameters::from_ac(-1.0, -1.0).expect("valid");
            Ok(ResolvedParams { normalized, b: normalized.b_origin, source: "defaults".into() })
        }
        _ => Err(CmdError::Config(
            "specify either `nu` and `b` or `a` and `c` in [parameters], not a mixture".into(),
        )),
    }
}
