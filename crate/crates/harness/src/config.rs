//! Run configuration: `key = value` files with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Kepler,
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorKind {
    EulerB,
    Htvi4,
    EulerBFixed,
    StormerVerlet,
}

impl IntegratorKind {
    pub fn is_fixed(self) -> bool {
        matches!(self, IntegratorKind::EulerBFixed | IntegratorKind::StormerVerlet)
    }

    pub fn label(self) -> &'static str {
        match self {
            IntegratorKind::EulerB => "euler-b",
            IntegratorKind::Htvi4 => "htvi4",
            IntegratorKind::EulerBFixed => "euler-b-fixed",
            IntegratorKind::StormerVerlet => "stormer-verlet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorKind {
    None,
    Trunc,
    Arclength,
    Power,
    Energy,
}

impl MonitorKind {
    pub fn label(self) -> &'static str {
        match self {
            MonitorKind::None => "none",
            MonitorKind::Trunc => "trunc",
            MonitorKind::Arclength => "arclength",
            MonitorKind::Power => "power",
            MonitorKind::Energy => "energy",
        }
    }
}

fn parse_choice<T: Copy>(key: &str, value: &str, choices: &[(&str, T)]) -> Result<T> {
    choices
        .iter()
        .find(|(name, _)| name.eq_ignore_ascii_case(value))
        .map(|&(_, v)| v)
        .ok_or_else(|| {
            let names: Vec<&str> = choices.iter().map(|(n, _)| *n).collect();
            HarnessError::config(format!("{key}: unknown value {value:?}, expected one of {}", names.join(", ")))
        })
}

impl FromStr for ProblemKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        parse_choice("problem", s, &[("kepler", ProblemKind::Kepler), ("harmonic", ProblemKind::Harmonic)])
    }
}

impl FromStr for IntegratorKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        parse_choice(
            "integrator",
            s,
            &[
                ("euler-b", IntegratorKind::EulerB),
                ("htvi4", IntegratorKind::Htvi4),
                ("euler-b-fixed", IntegratorKind::EulerBFixed),
                ("stormer-verlet", IntegratorKind::StormerVerlet),
            ],
        )
    }
}

impl FromStr for MonitorKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        parse_choice(
            "monitor",
            s,
            &[
                ("none", MonitorKind::None),
                ("trunc", MonitorKind::Trunc),
                ("arclength", MonitorKind::Arclength),
                ("power", MonitorKind::Power),
                ("energy", MonitorKind::Energy),
            ],
        )
    }
}

impl fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl fmt::Display for MonitorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Default `g` bounds per monitor for moderate (`e < 0.95`) and high
/// eccentricity.
pub fn default_g_bounds(monitor: MonitorKind, ecc: f64) -> Option<(f64, f64)> {
    let high = ecc >= 0.95;
    match (monitor, high) {
        (MonitorKind::Power, false) => Some((0.01, 8.0)),
        (MonitorKind::Power, true) => Some((5e-4, 8.0)),
        (MonitorKind::Energy, false) => Some((1e-4, 2.0)),
        (MonitorKind::Energy, true) => Some((1e-6, 5.0)),
        (MonitorKind::Arclength, false) => Some((0.003, 0.3)),
        (MonitorKind::Arclength, true) => Some((8e-4, 10.0)),
        _ => None,
    }
}

/// A fully specified experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub ecc: f64,
    /// Degrees of freedom of the harmonic oscillator.
    pub dim: usize,
    pub integrator: IntegratorKind,
    /// `None` picks the integrator's default monitor.
    pub monitor: Option<MonitorKind>,
    pub tol: f64,
    pub gamma: f64,
    pub g_min: Option<f64>,
    pub g_max: Option<f64>,
    /// Disables the default `g` bounds.
    pub unbounded: bool,
    /// Truncation monitor in its fourth-root form.
    pub fourth_root: bool,
    pub h: f64,
    pub t_end: f64,
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Kepler,
            ecc: 0.9,
            dim: 1,
            integrator: IntegratorKind::EulerB,
            monitor: None,
            tol: 1e-5,
            gamma: 1.0,
            g_min: None,
            g_max: None,
            unbounded: false,
            fourth_root: false,
            h: 0.1,
            t_end: 100.0,
            csv: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::config(format!("{key}: cannot parse {value:?} as a number")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(HarnessError::config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl RunConfig {
    /// Sets one key. Hyphens and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "problem" => self.problem = value.parse()?,
            "ecc" | "eccentricity" => self.ecc = parse_num(key, value)?,
            "dim" => self.dim = parse_num(key, value)?,
            "integrator" => self.integrator = value.parse()?,
            "monitor" => self.monitor = Some(value.parse()?),
            "tol" => self.tol = parse_num(key, value)?,
            "gamma" => self.gamma = parse_num(key, value)?,
            "g_min" => self.g_min = Some(parse_num(key, value)?),
            "g_max" => self.g_max = Some(parse_num(key, value)?),
            "unbounded" => self.unbounded = parse_bool(key, value)?,
            "fourth_root" => self.fourth_root = parse_bool(key, value)?,
            "h" => self.h = parse_num(key, value)?,
            "t_end" => self.t_end = parse_num(key, value)?,
            "csv" => self.csv = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            other => return Err(HarnessError::config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::config(format!("line {}: expected key = value, got {raw:?}", lineno + 1)))?;
            self.set(key, value)
                .map_err(|e| HarnessError::config(format!("line {}: {}", lineno + 1, strip_prefix(&e))))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// The monitor after integrator defaults.
    pub fn monitor_kind(&self) -> MonitorKind {
        self.monitor.unwrap_or(match self.integrator {
            IntegratorKind::EulerB => MonitorKind::Trunc,
            IntegratorKind::Htvi4 => MonitorKind::Energy,
            IntegratorKind::EulerBFixed | IntegratorKind::StormerVerlet => MonitorKind::None,
        })
    }

    /// Bounds on `g` after defaults, `None` when unbounded.
    pub fn g_bounds(&self) -> Option<(f64, f64)> {
        let monitor = self.monitor_kind();
        let default = if self.unbounded { None } else { default_g_bounds(monitor, self.ecc) };
        match (self.g_min, self.g_max, default) {
            (Some(a), Some(b), _) => Some((a, b)),
            (Some(a), None, Some((_, b))) | (None, Some(b), Some((a, _))) => Some((a, b)),
            (None, None, d) => d,
            _ => None,
        }
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let monitor = self.monitor_kind();
        if !(self.h > 0.0) || !self.h.is_finite() {
            problems.push(format!("h must be positive and finite, got {}", self.h));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            problems.push(format!("t_end must be positive and finite, got {}", self.t_end));
        }
        match self.problem {
            ProblemKind::Kepler => {
                if !(0.0..1.0).contains(&self.ecc) {
                    problems.push(format!("ecc must lie in [0, 1), got {}", self.ecc));
                }
            }
            ProblemKind::Harmonic => {
                if self.dim == 0 {
                    problems.push("dim must be at least 1".to_string());
                }
            }
        }
        if self.integrator.is_fixed() && monitor != MonitorKind::None {
            problems.push(format!(
                "integrator {} is a fixed-step method and takes no monitor, got {monitor}",
                self.integrator
            ));
        }
        if monitor == MonitorKind::Trunc && (!(self.tol > 0.0) || !self.tol.is_finite()) {
            problems.push(format!("tol must be positive and finite, got {}", self.tol));
        }
        if monitor == MonitorKind::Power && !self.gamma.is_finite() {
            problems.push(format!("gamma must be finite, got {}", self.gamma));
        }
        let explicit = self.g_min.is_some() || self.g_max.is_some();
        if monitor == MonitorKind::None && explicit {
            problems.push("g_min/g_max need a monitor".to_string());
        } else if explicit && self.unbounded {
            problems.push("g_min/g_max contradict unbounded".to_string());
        } else if explicit {
            match self.g_bounds() {
                Some((a, b)) if !(a > 0.0 && a < b && b.is_finite()) => {
                    problems.push(format!("g bounds need 0 < g_min < g_max < inf, got [{a}, {b}]"));
                }
                None => problems.push("both g_min and g_max are needed for this monitor".to_string()),
                _ => {}
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Config(problems.join("; ")))
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        let problem = match self.problem {
            ProblemKind::Kepler => format!("kepler e={}", self.ecc),
            ProblemKind::Harmonic => format!("harmonic n={}", self.dim),
        };
        let mut s = format!("{problem} {} h={} t_end={}", self.integrator, self.h, self.t_end);
        let monitor = self.monitor_kind();
        if monitor != MonitorKind::None {
            s.push_str(&format!(" monitor={monitor}"));
            match monitor {
                MonitorKind::Trunc => s.push_str(&format!(" tol={}", self.tol)),
                MonitorKind::Power => s.push_str(&format!(" gamma={}", self.gamma)),
                _ => {}
            }
            if let Some((a, b)) = self.g_bounds() {
                s.push_str(&format!(" g=[{a}, {b}]"));
            }
        }
        s
    }
}

fn strip_prefix(e: &HarnessError) -> String {
    match e {
        HarnessError::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let cfg = RunConfig::from_text(
            "# figure\nintegrator = htvi4\nmonitor=power # gamma\n gamma = 1\nh=0.1\nt-end = 10\n\ng_min=0.01\ng_max=8\n",
        )
        .unwrap();
        assert_eq!(cfg.integrator, IntegratorKind::Htvi4);
        assert_eq!(cfg.monitor_kind(), MonitorKind::Power);
        assert_eq!(cfg.t_end, 10.0);
        assert_eq!(cfg.g_bounds(), Some((0.01, 8.0)));
        cfg.validate().unwrap();
    }

    #[test]
    fn later_values_override() {
        let mut cfg = RunConfig::from_text("h = 0.1").unwrap();
        cfg.set("h", "0.05").unwrap();
        assert_eq!(cfg.h, 0.05);
    }

    #[test]
    fn defaults_per_integrator_and_eccentricity() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.monitor_kind(), MonitorKind::Trunc);
        assert_eq!(cfg.g_bounds(), None);
        cfg.integrator = IntegratorKind::Htvi4;
        assert_eq!(cfg.g_bounds(), Some((1e-4, 2.0)));
        cfg.ecc = 0.99;
        assert_eq!(cfg.g_bounds(), Some((1e-6, 5.0)));
        cfg.unbounded = true;
        assert_eq!(cfg.g_bounds(), None);
        cfg.integrator = IntegratorKind::StormerVerlet;
        assert_eq!(cfg.monitor_kind(), MonitorKind::None);
    }

    #[test]
    fn one_sided_bound_uses_default_for_the_other() {
        let mut cfg = RunConfig { monitor: Some(MonitorKind::Power), ..RunConfig::default() };
        cfg.g_min = Some(0.001);
        assert_eq!(cfg.g_bounds(), Some((0.001, 8.0)));
        cfg.monitor = Some(MonitorKind::Trunc);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn invalid_combinations_are_all_reported() {
        let cfg = RunConfig {
            integrator: IntegratorKind::StormerVerlet,
            monitor: Some(MonitorKind::Power),
            h: -1.0,
            ecc: 1.0,
            ..RunConfig::default()
        };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("h must be positive"));
        assert!(msg.contains("ecc"));
        assert!(msg.contains("fixed-step"));
    }

    #[test]
    fn bad_input_is_a_config_error() {
        for text in ["nonsense", "h = abc", "colour = red", "integrator = rk4", "unbounded = maybe"] {
            let err = RunConfig::from_text(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
        let err = RunConfig::from_text("h=1\nmonitor = bogus").unwrap_err().to_string();
        assert!(err.contains("line 2"));
        assert!(err.contains("power"));
    }

    #[test]
    fn inverted_bounds_rejected() {
        let cfg = RunConfig {
            monitor: Some(MonitorKind::Energy),
            g_min: Some(2.0),
            g_max: Some(1.0),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
