//! Physical quantities extracted from a [`PassageState`].

mod density;
mod moments;
mod wigner;

pub use density::{entropy_cubic, entropy_field, inversion, reduced_rho, shannon_of_spectrum, AtomDensityMatrix};
pub use moments::{
    mandel_q, moments, moments_unchecked, squeezing_first, squeezing_second, FieldMoments, PhotonStatistics,
    SqueezingPair, TRUNCATION_MARGIN_LEVELS, TRUNCATION_MARGIN_MASS,
};
pub use wigner::{wigner, wigner_at, wigner_pure_at, WignerGrid, WignerSpec};
