use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use aoii_core::PolicySpec;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::output::Format;

/// Everything that determines the produced data. Output routing (format,
/// destination) is resolved alongside but excluded from the config hash.
#[derive(Debug, Clone)]
pub struct Settings {
    pub n_states: u32,
    pub p_remain: f64,
    pub p_success: f64,
    pub alpha: f64,
    pub horizon_slots: u64,
    pub burn_in_slots: u64,
    pub seed: u64,
    pub policy: Option<String>,
    pub which: Option<String>,
    pub p_remain_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            n_states: 8,
            p_remain: 0.8,
            p_success: 0.8,
            alpha: 0.1,
            horizon_slots: 1_000_000,
            burn_in_slots: 10_000,
            seed: 12345,
            policy: None,
            which: None,
            p_remain_grid: vec![0.2, 0.4, 0.6, 0.8],
            alpha_grid: vec![0.05, 0.1, 0.2, 0.4, 0.7, 1.0],
        }
    }
}

/// Partial settings from one source (file or flags); later sources win.
#[derive(Debug, Default, Clone)]
pub struct Overlay {
    pub n_states: Option<u32>,
    pub p_remain: Option<f64>,
    pub p_success: Option<f64>,
    pub alpha: Option<f64>,
    pub horizon_slots: Option<u64>,
    pub burn_in_slots: Option<u64>,
    pub seed: Option<u64>,
    pub policy: Option<String>,
    pub which: Option<String>,
    pub p_remain_grid: Option<Vec<f64>>,
    pub alpha_grid: Option<Vec<f64>>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn apply(&mut self, o: &Overlay) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            };
        }
        take!(n_states);
        take!(p_remain);
        take!(p_success);
        take!(alpha);
        take!(horizon_slots);
        take!(burn_in_slots);
        take!(seed);
        if o.policy.is_some() {
            self.policy = o.policy.clone();
        }
        if o.which.is_some() {
            self.which = o.which.clone();
        }
        take!(p_remain_grid);
        take!(alpha_grid);
    }

    /// Stable key=value rendering of the resolved settings, hashed into
    /// every emitted document so outputs are traceable to their inputs.
    pub fn canonical(&self, command: &str) -> String {
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut s = String::new();
        let _ = writeln!(s, "alpha={}", self.alpha);
        let _ = writeln!(s, "alpha_grid={}", join(&self.alpha_grid));
        let _ = writeln!(s, "burn_in_slots={}", self.burn_in_slots);
        let _ = writeln!(s, "command={command}");
        let _ = writeln!(s, "horizon_slots={}", self.horizon_slots);
        let _ = writeln!(s, "n_states={}", self.n_states);
        let _ = writeln!(s, "p_remain={}", self.p_remain);
        let _ = writeln!(s, "p_remain_grid={}", join(&self.p_remain_grid));
        let _ = writeln!(s, "p_success={}", self.p_success);
        let _ = writeln!(s, "policy={}", self.policy.as_deref().unwrap_or(""));
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "which={}", self.which.as_deref().unwrap_or(""));
        s
    }

    pub fn sha256(&self, command: &str) -> String {
        let digest = Sha256::digest(self.canonical(command).as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }
}

fn bad<T>(msg: String) -> Result<T, CliError> {
    Err(CliError::Config(msg))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("key '{key}': cannot parse '{v}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let xs: Result<Vec<f64>, _> = v.split(',').map(|t| parse_num(key, t.trim())).collect();
    let xs = xs?;
    if xs.is_empty() {
        return bad(format!("key '{key}': empty list"));
    }
    Ok(xs)
}

/// Flat key=value settings file. '#' starts a comment, blank lines are
/// skipped, unknown keys are rejected outright.
pub fn parse_file(path: &Path) -> Result<Overlay, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut o = Overlay::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return bad(format!("line {}: expected key=value", idx + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n_states" => o.n_states = Some(parse_num(key, value)?),
            "p_remain" => o.p_remain = Some(parse_num(key, value)?),
            "p_success" => o.p_success = Some(parse_num(key, value)?),
            "alpha" => o.alpha = Some(parse_num(key, value)?),
            "horizon_slots" => o.horizon_slots = Some(parse_num(key, value)?),
            "burn_in_slots" => o.burn_in_slots = Some(parse_num(key, value)?),
            "seed" => o.seed = Some(parse_num(key, value)?),
            "policy" => o.policy = Some(value.to_string()),
            "which" => o.which = Some(value.to_string()),
            "p_remain_grid" => o.p_remain_grid = Some(parse_list(key, value)?),
            "alpha_grid" => o.alpha_grid = Some(parse_list(key, value)?),
            "format" => {
                o.format = Some(match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    other => return bad(format!("key 'format': unknown value '{other}'")),
                })
            }
            "out" => o.out = Some(PathBuf::from(value)),
            other => return bad(format!("unknown key '{other}'")),
        }
    }
    Ok(o)
}

/// Compact policy notation: `always`, `never`, `threshold:7`,
/// `mixture:7:0.25`, `mixture-per-state:7:0.25`, `aoi-threshold:4`,
/// `aoi-mixture:4:0.5`.
pub fn parse_policy(s: &str) -> Result<PolicySpec, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let spec = match parts.as_slice() {
        ["always"] => PolicySpec::AlwaysUpdate,
        ["never"] => PolicySpec::NeverUpdate,
        ["threshold", n] => PolicySpec::Threshold(parse_num("policy", n)?),
        ["mixture", n, r] => PolicySpec::Mixture {
            n0: parse_num("policy", n)?,
            rho: parse_num("policy", r)?,
        },
        ["mixture-per-state", n, r] => PolicySpec::MixturePerState {
            n0: parse_num("policy", n)?,
            rho: parse_num("policy", r)?,
        },
        ["aoi-threshold", m] => PolicySpec::AoiThreshold(parse_num("policy", m)?),
        ["aoi-mixture", m, r] => PolicySpec::AoiMixture {
            m0: parse_num("policy", m)?,
            rho: parse_num("policy", r)?,
        },
        _ => return bad(format!("unrecognized policy '{s}'")),
    };
    Ok(spec)
}

/// Round-trippable tag for a policy, used in CSV rows and labels.
pub fn policy_tag(spec: &PolicySpec) -> String {
    match spec {
        PolicySpec::AlwaysUpdate => "always".into(),
        PolicySpec::NeverUpdate => "never".into(),
        PolicySpec::Threshold(n) => format!("threshold:{n}"),
        PolicySpec::Mixture { n0, rho } => format!("mixture:{n0}:{rho}"),
        PolicySpec::MixturePerState { n0, rho } => format!("mixture-per-state:{n0}:{rho}"),
        PolicySpec::AoiThreshold(m) => format!("aoi-threshold:{m}"),
        PolicySpec::AoiMixture { m0, rho } => format!("aoi-mixture:{m0}:{rho}"),
    }
}
