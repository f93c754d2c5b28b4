use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::PassageState;

/// Number of top Fock levels that must be (nearly) empty for `<a^4>` to be trusted.
pub const TRUNCATION_MARGIN_LEVELS: usize = 4;
/// Probability mass allowed in those levels.
pub const TRUNCATION_MARGIN_MASS: f64 = 1e-8;

/// Field moments of the joint state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldMoments {
    /// `<a^dag a>`
    pub mean_n: f64,
    /// `<(a^dag a)^2>`
    pub mean_n2: f64,
    pub a1: Complex64,
    pub a2: Complex64,
    pub a4: Complex64,
}

/// `<a^r> = sum_n sqrt((n+r)!/n!) [A(n+r) A*(n) + B(n+r) B*(n)
///          + sqrt((n+r+1)/(n+1)) C(n+r+1) C*(n+1)]`.
fn lowering_power(state: &PassageState, r: usize) -> Complex64 {
    let levels = state.levels();
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..levels.saturating_sub(r) {
        let ratio: f64 = ((n + 1)..=(n + r)).map(|k| k as f64).product();
        let w = ratio.sqrt();
        let wc = (((n + r + 1) as f64) / ((n + 1) as f64)).sqrt();
        acc += (state.a[n + r] * state.a[n].conj() + state.b[n + r] * state.b[n].conj()) * w
            + state.c[n + r] * state.c[n].conj() * (w * wc);
    }
    acc
}

/// Moments without the truncation-margin check.
pub fn moments_unchecked(state: &PassageState) -> FieldMoments {
    let mut mean_n = 0.0;
    let mut mean_n2 = 0.0;
    for n in 0..state.levels() {
        let excited = state.a[n].norm_sqr() + state.b[n].norm_sqr();
        let ground = state.c[n].norm_sqr();
        let (nf, n1) = (n as f64, (n + 1) as f64);
        mean_n += nf * excited + n1 * ground;
        mean_n2 += nf * nf * excited + n1 * n1 * ground;
    }
    FieldMoments {
        mean_n,
        mean_n2,
        a1: lowering_power(state, 1),
        a2: lowering_power(state, 2),
        a4: lowering_power(state, 4),
    }
}

/// Field moments; fails if the top [`TRUNCATION_MARGIN_LEVELS`] Fock levels carry
/// more than [`TRUNCATION_MARGIN_MASS`].
pub fn moments(state: &PassageState) -> Result<FieldMoments> {
    let dim = state.field_dim();
    let start = dim.saturating_sub(TRUNCATION_MARGIN_LEVELS);
    let [e, i, g] = state.field_components();
    let mass: f64 = (start..dim).map(|m| e[m].norm_sqr() + i[m].norm_sqr() + g[m].norm_sqr()).sum();
    if mass > TRUNCATION_MARGIN_MASS {
        return Err(Error::Truncation(format!(
            "mass {mass:e} in the top {TRUNCATION_MARGIN_LEVELS} Fock levels (of {dim}); raise n_max"
        )));
    }
    Ok(moments_unchecked(state))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezingPair {
    pub s_x: f64,
    pub s_p: f64,
    pub order: u8,
}

impl SqueezingPair {
    pub fn squeezed(&self) -> bool {
        self.s_x < 0.0 || self.s_p < 0.0
    }
}

impl FieldMoments {
    /// Normal (first-order) quadrature squeezing.
    pub fn squeezing_first(&self) -> SqueezingPair {
        let a2 = self.a2 + self.a2.conj();
        let a1 = self.a1;
        let cross = 2.0 * (a1 * a1.conj()).re;
        let sq = a1 * a1 + a1.conj() * a1.conj();
        SqueezingPair {
            s_x: a2.re + 2.0 * self.mean_n - cross - sq.re,
            s_p: -a2.re + 2.0 * self.mean_n - cross + sq.re,
            order: 1,
        }
    }

    /// Amplitude-squared (second-order) squeezing.
    pub fn squeezing_second(&self) -> SqueezingPair {
        let denom = 4.0 * self.mean_n + 2.0;
        let a4 = (self.a4 + self.a4.conj()).re;
        let sum2 = self.a2 + self.a2.conj();
        let diff2 = self.a2.conj() - self.a2;
        let fluct = 2.0 * self.mean_n2 - 2.0 * self.mean_n;
        SqueezingPair {
            s_x: (a4 + fluct - (sum2 * sum2).re) / denom,
            s_p: (fluct - a4 + (diff2 * diff2).re) / denom,
            order: 2,
        }
    }

    pub fn mandel_q(&self) -> Result<f64> {
        if !(self.mean_n > 0.0) {
            return Err(Error::UndefinedMandel);
        }
        Ok((self.mean_n2 - self.mean_n * self.mean_n) / self.mean_n - 1.0)
    }
}

pub fn squeezing_first(state: &PassageState) -> Result<SqueezingPair> {
    Ok(moments(state)?.squeezing_first())
}

pub fn squeezing_second(state: &PassageState) -> Result<SqueezingPair> {
    Ok(moments(state)?.squeezing_second())
}

pub fn mandel_q(state: &PassageState) -> Result<f64> {
    moments(state)?.mandel_q()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhotonStatistics {
    SubPoissonian,
    Poissonian,
    SuperPoissonian,
}

impl PhotonStatistics {
    pub fn classify(q: f64, tol: f64) -> Self {
        if q < -tol {
            PhotonStatistics::SubPoissonian
        } else if q > tol {
            PhotonStatistics::SuperPoissonian
        } else {
            PhotonStatistics::Poissonian
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PhotonStatistics::SubPoissonian => "sub-Poissonian (nonclassical)",
            PhotonStatistics::Poissonian => "Poissonian",
            PhotonStatistics::SuperPoissonian => "super-Poissonian (classical)",
        }
    }
}
