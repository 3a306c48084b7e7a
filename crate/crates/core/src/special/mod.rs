//! Families with closed-form structure: Cayley graphs of binary linear codes,
//! the `Z_p^n` approximation through a scaled generator set, and Fourier
//! profiles of arcs on the cycle.

mod codes;
mod cycle;
mod zpn;

pub use codes::{
    code_spectrum_check, code_to_cayley, min_weight_census, BinaryLinearCode, CodeSpectrumReport,
    MAX_CENSUS_DIMENSION, MAX_CODE_GRAPH_DIMENSION, MAX_SPECTRUM_DIMENSION,
};
pub use cycle::{cycle_fourier_profile, FourierProfile, TailMass};
pub use zpn::{is_prime, scaled_generators, zpn_approx, ScaledBound, ZpnReport, MAX_ORACLE_ORDER};
