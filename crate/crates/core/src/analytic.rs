//! Closed-form propagation of one atomic passage.
//!
//! Each photon block `n` spans `{|e,n>, |i,n>, |g,n+1>}` and evolves on its own.
//! With `B = e^{i mu tau}` the block's amplitude equations reduce to the cubic
//! `mu^3 + x1 mu^2 + x2 mu + x3 = 0`, and
//!
//! ```text
//! A(n,tau)   = sum_j k_j e^{i(mu_j - D2 + D1) tau} (mu_j^2 - D2 mu_j - l2^2 G) / (l1 l2 G)
//! B(n,tau)   = sum_j k_j e^{i mu_j tau}
//! C(n+1,tau) = sum_j -k_j mu_j e^{i(mu_j - D2) tau} / (l2 g)
//! k_j        = c_n / sqrt(2) (mu_k mu_l + (l2^2 + l1 l2) G) / (mu_jk mu_jl)
//! ```
//!
//! where `g = sqrt(n+1) f(n+1)`, `G = g^2` and `c_n` is the incoming field
//! amplitude. The same engine runs both passages; only the field differs.
//! Levels whose roots nearly coincide use the exact 3x3 exponential instead.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cubic::{trig_cubic_roots, CubicCoeffs, CubicRoots};
use crate::error::{Error, Result};
use crate::fock::{coherent_coeffs, FieldCoeffs, ModelParams, PassageState, DEFAULT_TAIL_TOL, NORM_TOL};

/// Default lower bound on the ground-state detection probability.
pub const DEFAULT_PROJECTION_FLOOR: f64 = 1e-8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Cubic coefficients of block `n`.
pub fn cubic_coeffs(params: &ModelParams, n: usize) -> Result<CubicCoeffs> {
    let g2 = params.photon_factor(n)?;
    let (l1, l2, d1, d2) = (params.lambda1, params.lambda2, params.delta1, params.delta2);
    Ok(CubicCoeffs {
        x1: d1 - 2.0 * d2,
        x2: d2 * d2 - d2 * d1 - (l1 * l1 + l2 * l2) * g2,
        x3: l2 * l2 * (d2 - d1) * g2,
    })
}

/// How a block is propagated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Propagator {
    /// Closed form, with degenerate levels rerouted to the matrix exponential.
    #[default]
    ClosedForm,
    /// Matrix exponential for every level.
    MatrixExp,
}

/// Spectral form of one block: every amplitude is
/// `phase(tau) * sum_j w_j e^{i mu_j tau}` with phases `e^{i(D1-D2)tau}`, `1`,
/// `e^{-i D2 tau}` for A, B, C respectively.
#[derive(Clone, Copy, Debug)]
struct LevelModes {
    mu: [f64; 3],
    a: [Complex64; 3],
    b: [Complex64; 3],
    c: [Complex64; 3],
}

impl LevelModes {
    const EMPTY: LevelModes = LevelModes {
        mu: [0.0; 3],
        a: [ZERO; 3],
        b: [ZERO; 3],
        c: [ZERO; 3],
    };

    fn closed_form(cn: Complex64, params: &ModelParams, n: usize, roots: &CubicRoots) -> Result<Self> {
        let g2 = params.photon_factor(n)?;
        let g = params.coupling(n)?;
        if g2 == 0.0 {
            return Err(Error::SingularFormula { level: n });
        }
        let (l1, l2, d2) = (params.lambda1, params.lambda2, params.delta2);
        let mu = roots.mu;
        let c0 = cn / std::f64::consts::SQRT_2;
        let mut modes = LevelModes {
            mu,
            ..LevelModes::EMPTY
        };
        for j in 0..3 {
            let k = (j + 1) % 3;
            let l = (j + 2) % 3;
            let kj = c0 * (mu[k] * mu[l] + (l2 * l2 + l1 * l2) * g2) / ((mu[j] - mu[k]) * (mu[j] - mu[l]));
            modes.b[j] = kj;
            modes.a[j] = kj * (mu[j] * mu[j] - d2 * mu[j] - l2 * l2 * g2) / (l1 * l2 * g2);
            modes.c[j] = -kj * mu[j] / (l2 * g);
        }
        Ok(modes)
    }

    fn matrix_exp(cn: Complex64, params: &ModelParams, n: usize) -> Result<Self> {
        let (h, _) = rotating_generator(params, n)?;
        let eig = SymmetricEigen::new(h);
        let v = eig.eigenvectors;
        let c0 = cn / std::f64::consts::SQRT_2;
        // initial rotating-frame vector (c0, c0, 0) projected on the eigenbasis
        let mut modes = LevelModes::EMPTY;
        for j in 0..3 {
            let w = c0 * (v[(0, j)] + v[(1, j)]);
            modes.mu[j] = params.delta2 - eig.eigenvalues[j];
            modes.a[j] = w * v[(0, j)];
            modes.b[j] = w * v[(1, j)];
            modes.c[j] = w * v[(2, j)];
        }
        Ok(modes)
    }

    fn eval(&self, tau: f64, phase_a: Complex64, phase_c: Complex64) -> (Complex64, Complex64, Complex64) {
        let mut a = ZERO;
        let mut b = ZERO;
        let mut c = ZERO;
        for j in 0..3 {
            let e = Complex64::cis(self.mu[j] * tau);
            a += self.a[j] * e;
            b += self.b[j] * e;
            c += self.c[j] * e;
        }
        (a * phase_a, b, c * phase_c)
    }
}

/// Time-independent block generator in the frame `a = A e^{-i D1 t}`,
/// `b = B e^{-i D2 t}`, `c = C`. Returns the matrix and the coupling `g`.
fn rotating_generator(params: &ModelParams, n: usize) -> Result<(Matrix3<f64>, f64)> {
    let g = params.coupling(n)?;
    let (l1, l2) = (params.lambda1 * g, params.lambda2 * g);
    #[rustfmt::skip]
    let h = Matrix3::new(
        params.delta1, 0.0,           l1,
        0.0,           params.delta2, l2,
        l1,            l2,            0.0,
    );
    Ok((h, g))
}

/// Exact propagation of one block from `(c_n/sqrt2, c_n/sqrt2, 0)` by
/// diagonalizing its generator. Returns `(A_n, B_n, C_{n+1})` at `tau`.
pub fn matrix_exp_level(cn: Complex64, params: &ModelParams, n: usize, tau: f64) -> Result<(Complex64, Complex64, Complex64)> {
    let (h, _) = rotating_generator(params, n)?;
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let c0 = cn / std::f64::consts::SQRT_2;
    let init = Vector3::new(c0, c0, ZERO);
    let mut out = [ZERO; 3];
    for j in 0..3 {
        let overlap = init[0] * v[(0, j)] + init[1] * v[(1, j)];
        let e = Complex64::cis(-eig.eigenvalues[j] * tau) * overlap;
        for (row, slot) in out.iter_mut().enumerate() {
            *slot += e * v[(row, j)];
        }
    }
    Ok((
        out[0] * Complex64::cis(params.delta1 * tau),
        out[1] * Complex64::cis(params.delta2 * tau),
        out[2],
    ))
}

/// Precomputed per-level modes for one passage with a fixed incoming field.
#[derive(Clone, Debug)]
pub struct PassageEngine {
    delta1: f64,
    delta2: f64,
    levels: Vec<LevelModes>,
    fallback_levels: Vec<usize>,
}

impl PassageEngine {
    pub fn new(field: &FieldCoeffs, params: &ModelParams) -> Result<Self> {
        Self::with_propagator(field, params, Propagator::ClosedForm)
    }

    pub fn with_propagator(field: &FieldCoeffs, params: &ModelParams, propagator: Propagator) -> Result<Self> {
        params.validate_couplings()?;
        let built: Vec<Result<(LevelModes, bool)>> = field
            .as_slice()
            .par_iter()
            .enumerate()
            .map(|(n, &cn)| {
                if cn == ZERO {
                    return Ok((LevelModes::EMPTY, false));
                }
                match propagator {
                    Propagator::MatrixExp => Ok((LevelModes::matrix_exp(cn, params, n)?, false)),
                    Propagator::ClosedForm => {
                        if params.photon_factor(n)? == 0.0 {
                            return Err(Error::SingularFormula { level: n });
                        }
                        let roots = trig_cubic_roots(cubic_coeffs(params, n)?)?;
                        if roots.degenerate {
                            Ok((LevelModes::matrix_exp(cn, params, n)?, true))
                        } else {
                            Ok((LevelModes::closed_form(cn, params, n, &roots)?, false))
                        }
                    }
                }
            })
            .collect();
        let mut levels = Vec::with_capacity(built.len());
        let mut fallback_levels = Vec::new();
        for (n, r) in built.into_iter().enumerate() {
            let (modes, fell_back) = r?;
            if fell_back {
                fallback_levels.push(n);
            }
            levels.push(modes);
        }
        Ok(PassageEngine {
            delta1: params.delta1,
            delta2: params.delta2,
            levels,
            fallback_levels,
        })
    }

    /// Levels that were rerouted to the matrix exponential.
    pub fn fallback_levels(&self) -> &[usize] {
        &self.fallback_levels
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn state_at(&self, tau: f64) -> PassageState {
        let phase_a = Complex64::cis((self.delta1 - self.delta2) * tau);
        let phase_c = Complex64::cis(-self.delta2 * tau);
        let mut state = PassageState::zeros(self.levels.len(), tau);
        for (n, modes) in self.levels.iter().enumerate() {
            let (a, b, c) = modes.eval(tau, phase_a, phase_c);
            state.a[n] = a;
            state.b[n] = b;
            state.c[n] = c;
        }
        state
    }

    /// States on a time grid, evaluated in parallel. Order follows `taus`.
    pub fn states_at(&self, taus: &[f64]) -> Vec<PassageState> {
        taus.par_iter().map(|&t| self.state_at(t)).collect()
    }
}

/// Amplitudes of the passage of one atom prepared in `(|e> + |i>)/sqrt2` through
/// the field `field`, at scaled time `tau`.
pub fn passage_amplitudes(field: &FieldCoeffs, params: &ModelParams, tau: f64) -> Result<PassageState> {
    Ok(PassageEngine::new(field, params)?.state_at(tau))
}

/// Field left behind when the outgoing atom is found in `|g>`.
#[derive(Clone, Debug)]
pub struct ProjectionResult {
    /// Normalized, with zero vacuum amplitude.
    pub field: FieldCoeffs,
    /// Probability of detecting the atom in `|g>`.
    pub probability: f64,
}

pub fn project_ground(state: &PassageState) -> Result<ProjectionResult> {
    project_ground_with_floor(state, DEFAULT_PROJECTION_FLOOR)
}

pub fn project_ground_with_floor(state: &PassageState, floor: f64) -> Result<ProjectionResult> {
    let probability: f64 = state.c.iter().map(|c| c.norm_sqr()).sum();
    if !(probability >= floor) {
        return Err(Error::UnmeasurableOutcome { probability, floor });
    }
    let scale = probability.sqrt();
    let mut coeffs = Vec::with_capacity(state.levels() + 1);
    coeffs.push(ZERO);
    coeffs.extend(state.c.iter().map(|c| c / scale));
    let field = FieldCoeffs::new(coeffs)?;
    Ok(ProjectionResult { field, probability })
}

#[derive(Clone, Copy, Debug)]
pub struct CascadeOptions {
    pub tail_tol: f64,
    pub projection_floor: f64,
    pub propagator: Propagator,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        CascadeOptions {
            tail_tol: DEFAULT_TAIL_TOL,
            projection_floor: DEFAULT_PROJECTION_FLOOR,
            propagator: Propagator::ClosedForm,
        }
    }
}

/// Output of the two-atom sequence.
#[derive(Clone, Debug)]
pub struct Cascade {
    pub initial_field: FieldCoeffs,
    pub first_passage: PassageState,
    pub projection: ProjectionResult,
    /// Second-passage states, one per requested `tau2`.
    pub states: Vec<PassageState>,
}

/// Coherent field, first atom for `tau1`, detection in `|g>`, then the second
/// atom sampled at every `tau2` in `tau2_grid`.
pub fn run_cascade(params: &ModelParams, alpha: Complex64, tau1: f64, tau2_grid: &[f64]) -> Result<Cascade> {
    run_cascade_with(params, alpha, tau1, tau2_grid, &CascadeOptions::default())
}

pub fn run_cascade_with(
    params: &ModelParams,
    alpha: Complex64,
    tau1: f64,
    tau2_grid: &[f64],
    opts: &CascadeOptions,
) -> Result<Cascade> {
    if !(tau1 > 0.0 && tau1.is_finite()) {
        return Err(Error::InvalidParameters(format!("tau1 = {tau1} must be positive")));
    }
    params.validate()?;
    let initial_field = coherent_coeffs(alpha, params.n_max, opts.tail_tol)?;
    let first = PassageEngine::with_propagator(&initial_field, params, opts.propagator)?;
    let first_passage = first.state_at(tau1);
    first_passage.check_normalized(NORM_TOL)?;
    let projection = project_ground_with_floor(&first_passage, opts.projection_floor)?;
    let second = PassageEngine::with_propagator(&projection.field, params, opts.propagator)?;
    let states = second.states_at(tau2_grid);
    for s in &states {
        s.check_normalized(NORM_TOL)?;
    }
    Ok(Cascade {
        initial_field,
        first_passage,
        projection,
        states,
    })
}
