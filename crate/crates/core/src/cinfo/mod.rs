//! Classical probability and information theory on small alphabets.
//!
//! All logarithms are binary and `0 log 0 = 0`.

mod cond;
mod dist;
mod entropy;
mod smooth;
mod typical;

pub use cond::{smooth_min_entropy_cond, EXACT_ALPHABET_CAP};
pub use dist::{
    frequency_distribution, frequency_of_indices, maximal_coupling, non_uniformity, variational_distance,
    CondChannel, JointDist, ProbDist, SmoothingParam, SIMPLEX_TOL,
};
pub use entropy::{
    binary_entropy, conditional_entropy, majorizes, min_entropy_cond, mutual_information, renyi_entropy,
    shannon, Order, MAJORIZATION_TOL,
};
pub use smooth::{max_entropy_in_ball, smooth_renyi};
pub use typical::{typical_set, typical_set_bound, typical_set_exact, TypicalSet, ENUMERATION_CAP};

pub(crate) use dist::l1_half;
pub(crate) use entropy::{h2, renyi_of_weights};
pub(crate) use smooth::{flattest_in_ball, smooth_h0_weights, smooth_hinf_weights};
