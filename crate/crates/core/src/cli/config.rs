//! Flat `key = value` scenario files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::fock::{choose_truncation, ModelParams, NonlinearityFn, DEFAULT_TAIL_TOL};

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observable {
    Inversion,
    Entropy,
    Squeezing1,
    Squeezing2,
    Mandel,
    Wigner,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::Inversion,
        Observable::Entropy,
        Observable::Squeezing1,
        Observable::Squeezing2,
        Observable::Mandel,
        Observable::Wigner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Inversion => "inversion",
            Observable::Entropy => "entropy",
            Observable::Squeezing1 => "squeezing1",
            Observable::Squeezing2 => "squeezing2",
            Observable::Mandel => "mandel",
            Observable::Wigner => "wigner",
        }
    }
}

impl FromStr for Observable {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown observable `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nonlinearity {
    One,
    Sqrt,
}

impl Nonlinearity {
    pub fn name(self) -> &'static str {
        match self {
            Nonlinearity::One => "one",
            Nonlinearity::Sqrt => "sqrt",
        }
    }

    pub fn function(self) -> NonlinearityFn {
        match self {
            Nonlinearity::One => NonlinearityFn::ConstantOne,
            Nonlinearity::Sqrt => NonlinearityFn::SquareRoot,
        }
    }
}

/// Keys accepted in scenario files and `--set` overrides, in manifest order.
pub const KEYS: [&str; 17] = [
    "lambda1",
    "delta1",
    "delta2",
    "nonlinearity",
    "alpha_sq",
    "tau1",
    "tau2_max",
    "tau2_step",
    "observables",
    "wigner_halfwidth",
    "wigner_resolution",
    "wigner_tau2",
    "tau1_scan_max",
    "tau1_scan_step",
    "out_dir",
    "tail_tol",
    "projection_floor",
];

/// A scenario in scaled units (`lambda2 = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub lambda1: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub nonlinearity: Nonlinearity,
    pub alpha_sq: f64,
    pub tau1: Option<f64>,
    pub tau2_max: f64,
    pub tau2_step: f64,
    pub observables: BTreeSet<Observable>,
    pub wigner_halfwidth: f64,
    pub wigner_resolution: usize,
    /// Second-passage time of the Wigner snapshot.
    pub wigner_tau2: Option<f64>,
    pub tau1_scan_max: f64,
    pub tau1_scan_step: f64,
    pub out_dir: PathBuf,
    pub tail_tol: f64,
    pub projection_floor: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            lambda1: 0.9,
            delta1: 0.0,
            delta2: 0.0,
            nonlinearity: Nonlinearity::One,
            alpha_sq: 25.0,
            tau1: None,
            tau2_max: 25.0,
            tau2_step: 0.05,
            observables: BTreeSet::from([Observable::Inversion]),
            wigner_halfwidth: 4.0,
            wigner_resolution: 101,
            wigner_tau2: None,
            tau1_scan_max: 10.0,
            tau1_scan_step: 0.01,
            out_dir: PathBuf::from("out"),
            tail_tol: DEFAULT_TAIL_TOL,
            projection_floor: crate::analytic::DEFAULT_PROJECTION_FLOOR,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, CliError> {
    let v: f64 = value
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}`: `{value}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("`{key}` must be finite")));
    }
    Ok(v)
}

fn fmt_f64(v: f64) -> String {
    // shortest representation that parses back to the same value
    format!("{v:?}")
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{spec}` is not `key=value`")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "lambda1" => self.lambda1 = parse_f64(key, value)?,
            "delta1" => self.delta1 = parse_f64(key, value)?,
            "delta2" => self.delta2 = parse_f64(key, value)?,
            "nonlinearity" => {
                self.nonlinearity = match value {
                    "one" => Nonlinearity::One,
                    "sqrt" => Nonlinearity::Sqrt,
                    _ => return Err(CliError::Config(format!("nonlinearity must be `one` or `sqrt`, got `{value}`"))),
                }
            }
            "alpha_sq" => self.alpha_sq = parse_f64(key, value)?,
            "tau1" => {
                self.tau1 = if value.is_empty() { None } else { Some(parse_f64(key, value)?) };
            }
            "tau2_max" => self.tau2_max = parse_f64(key, value)?,
            "tau2_step" => self.tau2_step = parse_f64(key, value)?,
            "observables" => {
                self.observables = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_, _>>()?;
            }
            "wigner_halfwidth" => self.wigner_halfwidth = parse_f64(key, value)?,
            "wigner_resolution" => {
                self.wigner_resolution = value
                    .parse()
                    .map_err(|_| CliError::Config(format!("`wigner_resolution`: `{value}` is not a count")))?;
            }
            "wigner_tau2" => {
                self.wigner_tau2 = if value.is_empty() { None } else { Some(parse_f64(key, value)?) };
            }
            "tau1_scan_max" => self.tau1_scan_max = parse_f64(key, value)?,
            "tau1_scan_step" => self.tau1_scan_step = parse_f64(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "tail_tol" => self.tail_tol = parse_f64(key, value)?,
            "projection_floor" => self.projection_floor = parse_f64(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Checks everything common to all commands.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.lambda1 > 0.0) {
            return bad(format!("lambda1 = {} must be positive", self.lambda1));
        }
        if !(self.alpha_sq >= 0.0) {
            return bad(format!("alpha_sq = {} must be non-negative", self.alpha_sq));
        }
        if !(self.tau2_step > 0.0) {
            return bad(format!("tau2_step = {} must be positive", self.tau2_step));
        }
        if !(self.tau2_max >= self.tau2_step) {
            return bad(format!("tau2_max = {} must be at least tau2_step", self.tau2_max));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return bad(format!("tail_tol = {} must lie in (0, 1)", self.tail_tol));
        }
        if !(self.projection_floor > 0.0 && self.projection_floor < 1.0) {
            return bad(format!("projection_floor = {} must lie in (0, 1)", self.projection_floor));
        }
        if !(self.tau1_scan_max > 0.0) {
            return bad(format!("tau1_scan_max = {} must be positive", self.tau1_scan_max));
        }
        if !(self.tau1_scan_step > 0.0 && self.tau1_scan_step < self.tau1_scan_max) {
            return bad(format!("tau1_scan_step = {} must be positive and below tau1_scan_max", self.tau1_scan_step));
        }
        if let Some(t) = self.tau1 {
            if !(t > 0.0) {
                return bad(format!("tau1 = {t} must be positive"));
            }
        }
        if self.observables.contains(&Observable::Wigner) {
            if !(self.wigner_halfwidth > 0.0) {
                return bad(format!("wigner_halfwidth = {} must be positive", self.wigner_halfwidth));
            }
            if self.wigner_resolution < 2 {
                return bad("wigner_resolution must be at least 2".into());
            }
            match self.wigner_tau2 {
                None => return bad("wigner requested but wigner_tau2 is not set".into()),
                Some(t) if !(t >= 0.0) => return bad(format!("wigner_tau2 = {t} must be non-negative")),
                _ => {}
            }
        }
        Ok(())
    }

    /// Number of second-passage samples, `1 + floor(tau2_max / tau2_step)`.
    ///
    /// The quotient gets a `1e-9` relative allowance so that e.g. `25 / 0.05`
    /// counts 501 samples despite binary rounding.
    pub fn tau2_rows(&self) -> usize {
        1 + (self.tau2_max / self.tau2_step * (1.0 + 1e-9)).floor() as usize
    }

    pub fn tau2_grid(&self) -> Vec<f64> {
        (0..self.tau2_rows()).map(|k| k as f64 * self.tau2_step).collect()
    }

    pub fn n_max(&self) -> Result<usize, CliError> {
        Ok(choose_truncation(self.alpha_sq, self.tail_tol)?)
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let p = ModelParams {
            lambda1: self.lambda1,
            lambda2: 1.0,
            delta1: self.delta1,
            delta2: self.delta2,
            nonlinearity: self.nonlinearity.function(),
            n_max: self.n_max()?,
        };
        p.validate()?;
        Ok(p)
    }

    fn value_of(&self, key: &str) -> String {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        match key {
            "lambda1" => fmt_f64(self.lambda1),
            "delta1" => fmt_f64(self.delta1),
            "delta2" => fmt_f64(self.delta2),
            "nonlinearity" => self.nonlinearity.name().to_string(),
            "alpha_sq" => fmt_f64(self.alpha_sq),
            "tau1" => opt(self.tau1),
            "tau2_max" => fmt_f64(self.tau2_max),
            "tau2_step" => fmt_f64(self.tau2_step),
            "observables" => self.observables.iter().map(|o| o.name()).collect::<Vec<_>>().join(","),
            "wigner_halfwidth" => fmt_f64(self.wigner_halfwidth),
            "wigner_resolution" => self.wigner_resolution.to_string(),
            "wigner_tau2" => opt(self.wigner_tau2),
            "tau1_scan_max" => fmt_f64(self.tau1_scan_max),
            "tau1_scan_step" => fmt_f64(self.tau1_scan_step),
            "out_dir" => self.out_dir.display().to_string(),
            "tail_tol" => fmt_f64(self.tail_tol),
            "projection_floor" => fmt_f64(self.projection_floor),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Canonical `key = value` text; parses back to an equal config.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.value_of(key));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_round_trip() {
        let text = "\
# Fig-3 style detuned run
lambda1 = 0.9
delta1 = 7
delta2 = 15
nonlinearity = sqrt
alpha_sq = 25
tau1 = 1.3   # first minimum
tau2_max = 10
tau2_step = 0.1
observables = inversion, entropy,wigner
wigner_tau2 = 2.5
out_dir = runs/a
";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.delta2, 15.0);
        assert_eq!(cfg.nonlinearity, Nonlinearity::Sqrt);
        assert_eq!(cfg.tau1, Some(1.3));
        assert_eq!(cfg.observables.len(), 3);
        cfg.validate().unwrap();
        let again = ScenarioConfig::parse(&cfg.render()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ScenarioConfig::parse("bogus = 1").is_err());
        assert!(ScenarioConfig::parse("delta1 = abc").is_err());
        assert!(ScenarioConfig::parse("delta1").is_err());
        assert!(ScenarioConfig::parse("delta1 = 1\ndelta1 = 2").is_err());
        assert!(ScenarioConfig::parse("nonlinearity = cube").is_err());
        assert!(ScenarioConfig::parse("observables = inversion,foo").is_err());
        for text in [
            "tau2_step = 0",
            "tau2_max = 0.01",
            "alpha_sq = -1",
            "tau1_scan_max = -2",
            "observables = wigner",
            "tail_tol = 0",
        ] {
            let cfg = ScenarioConfig::parse(text).unwrap();
            assert!(matches!(cfg.validate(), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn overrides() {
        let mut cfg = ScenarioConfig::default();
        cfg.apply_override("delta1=7").unwrap();
        cfg.apply_override(" observables = mandel ").unwrap();
        assert_eq!(cfg.delta1, 7.0);
        assert_eq!(cfg.observables, BTreeSet::from([Observable::Mandel]));
        assert!(cfg.apply_override("delta1").is_err());
    }

    #[test]
    fn row_count() {
        let mut cfg = ScenarioConfig::default();
        cfg.tau2_max = 25.0;
        cfg.tau2_step = 0.05;
        assert_eq!(cfg.tau2_rows(), 501);
        cfg.tau2_max = 1.0;
        cfg.tau2_step = 0.3;
        assert_eq!(cfg.tau2_rows(), 4);
        assert_eq!(cfg.tau2_grid().len(), 4);
    }

    #[test]
    fn truncation_grows_with_alpha() {
        let mut cfg = ScenarioConfig::default();
        cfg.alpha_sq = 4.0;
        let small = cfg.n_max().unwrap();
        cfg.alpha_sq = 25.0;
        assert!(cfg.n_max().unwrap() > small);
    }
}
