use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use steer_core::algebra::{mapping_set, parse_operator_set};
use steer_core::protocol::ProtocolConfig;
use steer_core::{InitialState, MappingKind, MappingOperatorSet};

use crate::rational::PiMultiple;

/// Resolved run configuration (`key = value` file plus flag overrides).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub ls: usize,
    pub dt: PiMultiple,
    pub periods: usize,
    pub eps: f64,
    /// Noise slice length in units of π; `None` means δt/20.
    pub slice: Option<PiMultiple>,
    pub twait_periods: Option<usize>,
    pub traj: usize,
    pub seed: u64,
    pub kind: String,
    pub alpha: f64,
    pub operators_file: Option<PathBuf>,
    pub initial: String,
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ls: 4,
            dt: PiMultiple::new(1, 2).unwrap(),
            periods: 40,
            eps: 0.0,
            slice: None,
            twait_periods: None,
            traj: 128,
            seed: 1,
            kind: "M1".into(),
            alpha: 0.404,
            operators_file: None,
            initial: "up".into(),
            tol: 1e-10,
        }
    }
}

/// Every accepted key; anything else is rejected by name.
pub const KEYS: &[&str] = &[
    "chain.Ls",
    "protocol.dt_pi",
    "protocol.periods",
    "protocol.initial",
    "noise.eps",
    "noise.slice",
    "stop.twait_periods",
    "ensemble.traj",
    "ensemble.seed",
    "operators.kind",
    "operators.alpha",
    "operators.file",
    "engine.tol",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("invalid value '{value}' for {key}: {e}"))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "chain.Ls" => self.ls = parse(key, v)?,
            "protocol.dt_pi" => self.dt = parse(key, v)?,
            "protocol.periods" => self.periods = parse(key, v)?,
            "protocol.initial" => {
                parse_initial(v)?;
                self.initial = v.to_string();
            }
            "noise.eps" => self.eps = parse(key, v)?,
            "noise.slice" => self.slice = if v == "auto" { None } else { Some(parse(key, v)?) },
            "stop.twait_periods" => self.twait_periods = if v == "off" { None } else { Some(parse(key, v)?) },
            "ensemble.traj" => self.traj = parse(key, v)?,
            "ensemble.seed" => self.seed = parse(key, v)?,
            "operators.kind" => self.kind = v.to_string(),
            "operators.alpha" => self.alpha = parse(key, v)?,
            "operators.file" => self.operators_file = Some(PathBuf::from(v)),
            "engine.tol" => self.tol = parse(key, v)?,
            _ => bail!("unknown configuration key '{key}' (accepted: {})", KEYS.join(", ")),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("{}:{}: expected 'key = value'", path.display(), i + 1);
            };
            cfg.set(k.trim(), v).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        }
        Ok(cfg)
    }

    /// Canonical file form; loading it reproduces this configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "chain.Ls = {}", self.ls);
        let _ = writeln!(s, "protocol.dt_pi = {}", self.dt);
        let _ = writeln!(s, "protocol.periods = {}", self.periods);
        let _ = writeln!(s, "protocol.initial = {}", self.initial);
        let _ = writeln!(s, "noise.eps = {:?}", self.eps);
        let _ = writeln!(s, "noise.slice = {}", self.slice.map_or("auto".into(), |p| p.to_string()));
        let _ = writeln!(
            s,
            "stop.twait_periods = {}",
            self.twait_periods.map_or("off".into(), |w| w.to_string())
        );
        let _ = writeln!(s, "ensemble.traj = {}", self.traj);
        let _ = writeln!(s, "ensemble.seed = {}", self.seed);
        let _ = writeln!(s, "operators.kind = {}", self.kind);
        let _ = writeln!(s, "operators.alpha = {:?}", self.alpha);
        if let Some(f) = &self.operators_file {
            let _ = writeln!(s, "operators.file = {}", f.display());
        }
        let _ = writeln!(s, "engine.tol = {:?}", self.tol);
        s
    }

    pub fn operator_set(&self) -> Result<MappingOperatorSet> {
        if let Some(path) = &self.operators_file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(parse_operator_set(&text, false)?);
        }
        Ok(mapping_set(parse_kind(&self.kind, self.alpha)?)?)
    }

    pub fn protocol(&self) -> Result<ProtocolConfig> {
        Ok(ProtocolConfig {
            dt: self.dt.value(),
            periods: self.periods,
            eps: self.eps,
            slice: self.slice.map(|s| s.value()),
            stop_window: self.twait_periods,
            initial: parse_initial(&self.initial)?,
            seed: self.seed,
            trajectories: self.traj,
            tol: self.tol,
            entropy_bond: None,
            track_entropy: true,
        })
    }
}

pub fn parse_kind(kind: &str, alpha: f64) -> Result<MappingKind> {
    Ok(match kind.to_ascii_uppercase().as_str() {
        "M1" => MappingKind::M1,
        "M2" => MappingKind::M2(alpha),
        "M3" => MappingKind::M3,
        _ => bail!("unknown operator kind '{kind}' (expected M1, M2 or M3)"),
    })
}

/// `up`, `zero`, `alternating`, `random-product:SEED`, `random:SEED`.
pub fn parse_initial(s: &str) -> Result<InitialState> {
    let (name, arg) = s.split_once(':').unwrap_or((s, ""));
    let seed = || -> Result<u64> { parse("protocol.initial", if arg.is_empty() { "0" } else { arg }) };
    Ok(match name {
        "up" | "all_up" => InitialState::AllUp,
        "zero" | "all_zero" => InitialState::AllZero,
        "alternating" => InitialState::Alternating,
        "random-product" => InitialState::RandomProduct(seed()?),
        "random" => InitialState::RandomState(seed()?),
        _ => bail!("unknown initial state '{s}'"),
    })
}
