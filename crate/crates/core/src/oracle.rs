//! Brute-force RK4 integration of the interaction-picture amplitude equations
//!
//! ```text
//! i dA/dt = l1 g e^{ i D1 t} C
//! i dB/dt = l2 g e^{ i D2 t} C
//! i dC/dt = l1 g e^{-i D1 t} A + l2 g e^{-i D2 t} B
//! ```
//!
//! with the oscillating phases kept explicit. Nothing here touches the cubic or
//! the closed-form amplitudes; it exists to check them.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{FieldCoeffs, ModelParams, PassageState};

/// Per-level norm drift that triggers [`Error::StepSize`].
pub const MAX_NORM_DRIFT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub method: Method,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            method: Method::Rk4,
        }
    }
}

impl IntegratorConfig {
    pub fn with_dt(dt: f64) -> Self {
        IntegratorConfig { dt, ..Default::default() }
    }

    /// Step size whose estimated RK4 phase error stays below `target` (absolute
    /// amplitude) up to `tau`, capped at the default step.
    ///
    /// Per step a mode of frequency `w` picks up a phase error of `(w dt)^5 / 120`,
    /// so level `n` accumulates about `|c_n| (w_n dt)^4 w_n tau / 120`.
    pub fn resolving(field: &FieldCoeffs, params: &ModelParams, tau: f64, target: f64) -> Result<Self> {
        let lam = (params.lambda1 * params.lambda1 + params.lambda2 * params.lambda2).sqrt();
        let detune = params.delta1.abs() + params.delta2.abs();
        let mut worst: f64 = 0.0;
        for (n, c) in field.as_slice().iter().enumerate() {
            let g = level_coupling(params, n)?;
            let w = detune + lam * g.abs();
            worst = worst.max(c.norm() * w.powi(5));
        }
        let default = IntegratorConfig::default();
        if worst == 0.0 || tau <= 0.0 {
            return Ok(default);
        }
        let dt = (target * 120.0 / (worst * tau)).powf(0.25);
        Ok(IntegratorConfig::with_dt(dt.min(default.dt)))
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameters(format!("integrator dt = {} must be positive", self.dt)));
        }
        Ok(())
    }
}

fn level_coupling(params: &ModelParams, n: usize) -> Result<f64> {
    let f = params.nonlinearity.eval(n + 1)?;
    Ok(((n + 1) as f64).sqrt() * f)
}

type Block = [Complex64; 3];

struct LevelRhs {
    g1: f64,
    g2: f64,
    d1: f64,
    d2: f64,
}

impl LevelRhs {
    fn eval(&self, t: f64, y: &Block) -> Block {
        let p1 = Complex64::cis(self.d1 * t);
        let p2 = Complex64::cis(self.d2 * t);
        let minus_i = Complex64::new(0.0, -1.0);
        [
            minus_i * self.g1 * p1 * y[2],
            minus_i * self.g2 * p2 * y[2],
            minus_i * (self.g1 * p1.conj() * y[0] + self.g2 * p2.conj() * y[1]),
        ]
    }

    fn step(&self, t: f64, y: &Block, h: f64) -> Block {
        let axpy = |y: &Block, k: &Block, s: f64| -> Block { [y[0] + k[0] * s, y[1] + k[1] * s, y[2] + k[2] * s] };
        let k1 = self.eval(t, y);
        let k2 = self.eval(t + 0.5 * h, &axpy(y, &k1, 0.5 * h));
        let k3 = self.eval(t + 0.5 * h, &axpy(y, &k2, 0.5 * h));
        let k4 = self.eval(t + h, &axpy(y, &k3, h));
        let w = h / 6.0;
        [
            y[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * w,
            y[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * w,
            y[2] + (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]) * w,
        ]
    }
}

/// Integrates one block from `(c_n/sqrt2, c_n/sqrt2, 0)` and records it at each
/// of the ascending `taus`.
fn integrate_level(rhs: &LevelRhs, cn: Complex64, taus: &[f64], dt: f64) -> Vec<Block> {
    let half = cn / std::f64::consts::SQRT_2;
    let mut y = [half, half, Complex64::new(0.0, 0.0)];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(taus.len());
    for &target in taus {
        // full steps, then one shortened step landing exactly on the target
        let full = ((target - t) / dt).floor().max(0.0) as u64;
        let start = t;
        for k in 0..full {
            let tk = start + k as f64 * dt;
            y = rhs.step(tk, &y, dt);
        }
        t = start + full as f64 * dt;
        let rest = target - t;
        if rest > 0.0 {
            y = rhs.step(t, &y, rest);
        }
        t = target;
        out.push(y);
    }
    out
}

/// RK4 propagation of a whole passage, sampled at the ascending, non-negative `taus`.
pub fn integrate_passage_samples(
    field: &FieldCoeffs,
    params: &ModelParams,
    taus: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<PassageState>> {
    params.validate_couplings()?;
    cfg.validate()?;
    if taus.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameters("sample times must be finite, non-negative and ascending".into()));
    }
    let per_level: Vec<Result<Vec<Block>>> = field
        .as_slice()
        .par_iter()
        .enumerate()
        .map(|(n, &cn)| {
            if cn == Complex64::new(0.0, 0.0) {
                return Ok(vec![[cn; 3]; taus.len()]);
            }
            let g = level_coupling(params, n)?;
            let rhs = LevelRhs {
                g1: params.lambda1 * g,
                g2: params.lambda2 * g,
                d1: params.delta1,
                d2: params.delta2,
            };
            let samples = integrate_level(&rhs, cn, taus, cfg.dt);
            let target = cn.norm_sqr();
            for y in &samples {
                let drift = (y.iter().map(|z| z.norm_sqr()).sum::<f64>() - target).abs();
                if !(drift <= MAX_NORM_DRIFT) {
                    return Err(Error::StepSize { level: n, drift });
                }
            }
            Ok(samples)
        })
        .collect();
    let mut states: Vec<PassageState> = taus.iter().map(|&t| PassageState::zeros(field.as_slice().len(), t)).collect();
    for (n, r) in per_level.into_iter().enumerate() {
        for (state, y) in states.iter_mut().zip(r?) {
            state.a[n] = y[0];
            state.b[n] = y[1];
            state.c[n] = y[2];
        }
    }
    Ok(states)
}

/// RK4 propagation of a whole passage up to `tau`.
pub fn integrate_passage(field: &FieldCoeffs, params: &ModelParams, tau: f64, cfg: &IntegratorConfig) -> Result<PassageState> {
    Ok(integrate_passage_samples(field, params, &[tau], cfg)?.remove(0))
}
