//! Wigner function of the field's reduced state.
//!
//! The reduced field state is the rank-3 mixture of the conditional vectors
//! `psi_e = (A_n)`, `psi_i = (B_n)`, `psi_g = (C_{n+1})`, so `W = W_e + W_i + W_g`
//! with each unnormalized term evaluated as a displaced parity,
//!
//! ```text
//! W_psi(alpha) = (2/pi) sum_m (-1)^m |<m| D(-alpha) |psi>|^2,
//! <m|D(b)|n>   = sqrt(n!/m!) b^(m-n) e^(-|b|^2/2) L_n^(m-n)(|b|^2),   m >= n,
//! ```
//!
//! and the transpose relation `<m|D(b)|n> = sqrt(m!/n!) (-b*)^(n-m) e^(-|b|^2/2) L_m^(n-m)(|b|^2)`
//! for `m < n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::PassageState;

/// Largest displaced-basis cutoff tried before giving up.
const MAX_DISPLACED_CUTOFF: usize = 8192;
/// Relative norm the displaced vectors must retain.
const DISPLACED_NORM_TOL: f64 = 1e-13;
/// Boundary-to-peak ratio above which the grid is flagged as too small.
const COVERAGE_RATIO: f64 = 1e-6;
/// Below this |alpha| the factorized prefactors are skipped.
const SMALL_DISPLACEMENT: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerSpec {
    /// Grid spans `center +- half_width` on both axes.
    pub half_width: f64,
    /// Points per axis.
    pub resolution: usize,
    pub center: Complex64,
}

impl WignerSpec {
    pub fn new(half_width: f64, resolution: usize) -> Self {
        WignerSpec {
            half_width,
            resolution,
            center: Complex64::new(0.0, 0.0),
        }
    }

    pub fn centered(mut self, center: Complex64) -> Self {
        self.center = center;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidParameters(format!("Wigner half-width {} must be positive", self.half_width)));
        }
        if self.resolution < 2 {
            return Err(Error::InvalidParameters("Wigner resolution must be at least 2".into()));
        }
        Ok(())
    }

    fn axis(&self, center: f64) -> Vec<f64> {
        let n = self.resolution;
        let step = 2.0 * self.half_width / (n - 1) as f64;
        (0..n).map(|k| center - self.half_width + k as f64 * step).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    /// Row-major over `im_axis`: `values[j * re_axis.len() + i]` is `W(re[i] + i im[j])`.
    pub values: Vec<f64>,
    pub cell_area: f64,
}

impl WignerGrid {
    pub fn at(&self, i_re: usize, j_im: usize) -> f64 {
        self.values[j_im * self.re_axis.len() + i_re]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum W * cell_area`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area
    }

    /// Largest boundary `|W|` relative to the largest `|W|` anywhere.
    pub fn boundary_ratio(&self) -> f64 {
        let (nr, ni) = (self.re_axis.len(), self.im_axis.len());
        let peak = self.values.iter().fold(0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge: f64 = 0.0;
        for i in 0..nr {
            edge = edge.max(self.at(i, 0).abs()).max(self.at(i, ni - 1).abs());
        }
        for j in 0..ni {
            edge = edge.max(self.at(0, j).abs()).max(self.at(nr - 1, j).abs());
        }
        edge / peak
    }

    /// True when the boundary still carries more than `1e-6` of the peak.
    pub fn coverage_warning(&self) -> bool {
        self.boundary_ratio() > COVERAGE_RATIO
    }
}

/// Prefactor `sqrt(n!/m!) r^(m-n) e^(-r^2/2)` for `m >= n`, evaluated either
/// directly or, away from the origin, as `s_m t_n` with
/// `s_m = e^(-lnm!/2 + m ln r - r^2/4)`, `t_n = e^(ln n!/2 - n ln r - r^2/4)`.
struct Prefactors {
    s: Vec<f64>,
    t: Vec<f64>,
    direct: Option<(f64, f64)>,
}

impl Prefactors {
    fn new(r: f64, cutoff: usize, lnfact: &[f64]) -> Self {
        let x = r * r;
        if r < SMALL_DISPLACEMENT {
            return Prefactors {
                s: Vec::new(),
                t: Vec::new(),
                direct: Some((r.ln(), x)),
            };
        }
        let lr = r.ln();
        let s = (0..=cutoff).map(|m| (-0.5 * lnfact[m] + m as f64 * lr - 0.25 * x).exp()).collect();
        let t = (0..=cutoff).map(|n| (0.5 * lnfact[n] - n as f64 * lr - 0.25 * x).exp()).collect();
        Prefactors { s, t, direct: None }
    }

    /// `hi >= lo`.
    #[inline]
    fn get(&self, hi: usize, lo: usize, lnfact: &[f64]) -> f64 {
        match self.direct {
            Some((lr, x)) => (0.5 * (lnfact[lo] - lnfact[hi]) + (hi - lo) as f64 * lr - 0.5 * x).exp(),
            None => self.s[hi] * self.t[lo],
        }
    }
}

/// `L_k^(d)(x)` for `d` in `0..=max_d`, `k` in `0..=max_k`, row-major over `d`.
fn laguerre_table(x: f64, max_d: usize, max_k: usize) -> Vec<f64> {
    let w = max_k + 1;
    let mut table = vec![0.0; (max_d + 1) * w];
    for d in 0..=max_d {
        let row = &mut table[d * w..(d + 1) * w];
        let df = d as f64;
        row[0] = 1.0;
        if max_k >= 1 {
            row[1] = 1.0 + df - x;
        }
        for k in 1..max_k {
            let kf = k as f64;
            row[k + 1] = ((2.0 * kf + 1.0 + df - x) * row[k] - (kf + df) * row[k - 1]) / (kf + 1.0);
        }
    }
    table
}

/// Displaced-parity Wigner value of a sum of unnormalized pure components.
fn displaced_parity(psis: &[&[Complex64]], alpha: Complex64, lnfact: &[f64]) -> Result<f64> {
    let n_top = psis.iter().map(|p| p.len()).max().unwrap_or(0);
    if n_top == 0 {
        return Ok(0.0);
    }
    let n_max = n_top - 1;
    let norms: Vec<f64> = psis.iter().map(|p| p.iter().map(|z| z.norm_sqr()).sum()).collect();
    let beta = -alpha;
    let r = beta.norm();
    if r == 0.0 {
        let mut w = 0.0;
        for psi in psis {
            for (m, z) in psi.iter().enumerate() {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                w += sign * z.norm_sqr();
            }
        }
        return Ok(2.0 / PI * w);
    }
    let x = r * r;
    let unit = beta / r;
    let mut cutoff = ((n_max as f64).sqrt() + r + 4.0).powi(2).ceil() as usize;
    cutoff = cutoff.max(n_max + 8);
    loop {
        if cutoff > MAX_DISPLACED_CUTOFF || cutoff + 1 > lnfact.len() {
            return Err(Error::Numerical(format!("displaced basis cutoff exceeded at alpha = {alpha}")));
        }
        let max_k = n_max.min(cutoff);
        let lag = laguerre_table(x, cutoff, max_k);
        let w = max_k + 1;
        let pref = Prefactors::new(r, cutoff, lnfact);
        let mut up = Vec::with_capacity(cutoff + 1);
        let mut down = Vec::with_capacity(cutoff + 1);
        let (mut pu, mut pd) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let minus_conj = -unit.conj();
        for _ in 0..=cutoff {
            up.push(pu);
            down.push(pd);
            pu *= unit;
            pd *= minus_conj;
        }
        let mut value = 0.0;
        let mut kept = vec![0.0; psis.len()];
        for m in 0..=cutoff {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for (k, psi) in psis.iter().enumerate() {
                let mut amp = Complex64::new(0.0, 0.0);
                for (n, &c) in psi.iter().enumerate() {
                    if c == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let elem = if m >= n {
                        let d = m - n;
                        up[d] * (pref.get(m, n, lnfact) * lag[d * w + n])
                    } else {
                        let d = n - m;
                        down[d] * (pref.get(n, m, lnfact) * lag[d * w + m])
                    };
                    amp += elem * c;
                }
                let p = amp.norm_sqr();
                kept[k] += p;
                value += sign * p;
            }
        }
        let converged = kept
            .iter()
            .zip(&norms)
            .all(|(got, want)| (want - got).abs() <= DISPLACED_NORM_TOL * want.max(1e-300));
        if converged {
            return Ok(2.0 / PI * value);
        }
        cutoff = cutoff * 3 / 2 + 1;
    }
}

fn lnfact_table(len: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(len);
    let mut acc = 0.0;
    for k in 0..len {
        if k > 1 {
            acc += (k as f64).ln();
        }
        t.push(acc);
    }
    t
}

/// Wigner value of a single (possibly unnormalized) field vector.
pub fn wigner_pure_at(psi: &[Complex64], alpha: Complex64) -> Result<f64> {
    let lnfact = lnfact_table(MAX_DISPLACED_CUTOFF + 2);
    displaced_parity(&[psi], alpha, &lnfact)
}

/// Wigner value of the reduced field state at one phase-space point.
pub fn wigner_at(state: &PassageState, alpha: Complex64) -> Result<f64> {
    let comps = state.field_components();
    let refs: Vec<&[Complex64]> = comps.iter().map(|v| v.as_slice()).collect();
    let lnfact = lnfact_table(MAX_DISPLACED_CUTOFF + 2);
    displaced_parity(&refs, alpha, &lnfact)
}

/// Wigner function of the reduced field state on a square grid, `alpha = re + i im`.
pub fn wigner(state: &PassageState, spec: &WignerSpec) -> Result<WignerGrid> {
    spec.validate()?;
    let re_axis = spec.axis(spec.center.re);
    let im_axis = spec.axis(spec.center.im);
    let comps = state.field_components();
    // components with no weight do not contribute
    let refs: Vec<&[Complex64]> = comps
        .iter()
        .filter(|v| v.iter().any(|z| z.norm_sqr() > 0.0))
        .map(|v| v.as_slice())
        .collect();
    let lnfact = lnfact_table(MAX_DISPLACED_CUTOFF + 2);
    let nr = re_axis.len();
    let values: Result<Vec<f64>> = (0..nr * im_axis.len())
        .into_par_iter()
        .map(|idx| {
            let alpha = Complex64::new(re_axis[idx % nr], im_axis[idx / nr]);
            displaced_parity(&refs, alpha, &lnfact)
        })
        .collect();
    let step = 2.0 * spec.half_width / (spec.resolution - 1) as f64;
    Ok(WignerGrid {
        re_axis,
        im_axis,
        values: values?,
        cell_area: step * step,
    })
}
