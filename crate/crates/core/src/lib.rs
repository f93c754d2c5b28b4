//! Sequential passage of two V-type three-level atoms through a single-mode
//! cavity with intensity-dependent coupling and detuning.
//!
//! The first atom interacts with a coherent field for `tau1`, is detected in its
//! ground state, and the conditioned field is then probed by a second atom. The
//! joint state is propagated block by block in closed form ([`analytic`]) and
//! cross-checked against a brute-force RK4 integrator ([`oracle`]). [`observables`]
//! turns states into inversion, entropy, squeezing, Mandel Q and Wigner data,
//! and [`cli`] exports them as CSV.

pub mod analytic;
pub mod cli;
pub mod cubic;
pub mod error;
pub mod fock;
pub mod observables;
pub mod oracle;

pub use analytic::{
    cubic_coeffs, matrix_exp_level, passage_amplitudes, project_ground, run_cascade, run_cascade_with, Cascade,
    CascadeOptions, PassageEngine, ProjectionResult, Propagator,
};
pub use cubic::{trig_cubic_roots, CubicCoeffs, CubicRoots};
pub use error::{Error, Result};
pub use fock::{
    choose_truncation, coherent_coeffs, nonlinearity_eval, FieldCoeffs, ModelParams, NonlinearityFn, PassageState,
};

/// Engine version recorded in run manifests.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
