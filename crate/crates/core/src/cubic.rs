//! Real roots of a monic cubic `mu^3 + x1 mu^2 + x2 mu + x3 = 0` with three real
//! roots, by the trigonometric (Viete) form.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative gap below which two roots are treated as coincident.
pub const DEGENERACY_TOL: f64 = 1e-7;

/// Allowed overshoot of the arccos argument past +-1 before it counts as complex roots.
pub const ACOS_CLIP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicCoeffs {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl CubicCoeffs {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        CubicCoeffs { x1, x2, x3 }
    }

    /// `max(1, |x1|, |x2|, |x3|)`, the scale residuals are measured against.
    pub fn scale(&self) -> f64 {
        1f64.max(self.x1.abs()).max(self.x2.abs()).max(self.x3.abs())
    }

    pub fn eval(&self, mu: f64) -> f64 {
        ((mu + self.x1) * mu + self.x2) * mu + self.x3
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicRoots {
    /// Sorted ascending.
    pub mu: [f64; 3],
    pub degenerate: bool,
}

impl CubicRoots {
    pub fn min_gap(&self) -> f64 {
        (self.mu[1] - self.mu[0]).min(self.mu[2] - self.mu[1])
    }
}

/// Solves the cubic through
/// `mu_r = -x1/3 + (2/3) sqrt(x1^2 - 3 x2) cos(theta + 2 pi (r-1)/3)`.
pub fn trig_cubic_roots(c: CubicCoeffs) -> Result<CubicRoots> {
    let CubicCoeffs { x1, x2, x3 } = c;
    if !(x1.is_finite() && x2.is_finite() && x3.is_finite()) {
        return Err(Error::InvalidParameters("non-finite cubic coefficients".into()));
    }
    let p = x1 * x1 - 3.0 * x2;
    let p_scale = (x1 * x1).max((3.0 * x2).abs()).max(f64::MIN_POSITIVE);
    if p < -64.0 * f64::EPSILON * p_scale {
        return Err(Error::InvalidParameters(format!(
            "cubic has complex roots (x1^2 - 3 x2 = {p:e})"
        )));
    }
    let shift = -x1 / 3.0;
    if p <= 64.0 * f64::EPSILON * p_scale {
        // triple root, unless the depressed constant term says otherwise
        let root = shift;
        if c.eval(root).abs() > 1e-9 * c.scale() {
            return Err(Error::InvalidParameters(
                "cubic has complex roots (one real root with x1^2 = 3 x2)".into(),
            ));
        }
        return Ok(CubicRoots {
            mu: [root; 3],
            degenerate: true,
        });
    }
    let num = 9.0 * x1 * x2 - 2.0 * x1 * x1 * x1 - 27.0 * x3;
    let den = 2.0 * p.powf(1.5);
    let mut arg = num / den;
    // rounding in the numerator is amplified by a small denominator
    let num_scale = (9.0 * x1 * x2).abs() + (2.0 * x1 * x1 * x1).abs() + (27.0 * x3).abs();
    let slack = ACOS_CLIP_TOL.max(8.0 * f64::EPSILON * num_scale / den);
    if arg.abs() > 1.0 {
        if arg.abs() - 1.0 > slack {
            return Err(Error::InvalidParameters(format!(
                "cubic has complex roots (arccos argument {arg})"
            )));
        }
        arg = arg.clamp(-1.0, 1.0);
    }
    let theta = arg.acos() / 3.0;
    let amp = 2.0 / 3.0 * p.sqrt();
    let mut mu = [
        shift + amp * theta.cos(),
        shift + amp * (theta + 2.0 * PI / 3.0).cos(),
        shift + amp * (theta + 4.0 * PI / 3.0).cos(),
    ];
    mu.sort_by(|a, b| a.total_cmp(b));
    let mag = mu.iter().fold(1f64, |m, r| m.max(r.abs()));
    let gap = (mu[1] - mu[0]).min(mu[2] - mu[1]);
    Ok(CubicRoots {
        mu,
        degenerate: gap < DEGENERACY_TOL * mag,
    })
}
