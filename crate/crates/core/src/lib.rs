//! Projection lengths and Favard lengths of planar self-similar sets.
//!
//! Generations `A_{n+1} = U r_i A_n + beta_i` of a homothety IFS are
//! projected onto lines with rational (sheared) slopes, where every endpoint
//! stays rational, so projection lengths can be compared exactly. A float
//! backend covers quadrature over all angles.
//!
//! Module map:
//! - [`exact`]: rationals and canonical interval sets.
//! - [`ifs`]: systems, presets and the config format.
//! - [`projection`]: directions and projected generation sets.
//! - [`analysis`]: alpha sequences, convexity, Favard quadrature, certificates.
//! - [`decay`]: neighborhood decay, cover statistics, exponent fits.
//! - [`needle`]: independent Monte-Carlo estimate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod decay;
pub mod error;
pub mod exact;
pub mod ifs;
pub mod needle;
pub mod projection;

pub use analysis::{
    alpha_sequence, check_convexity, favard, lipschitz_scan, lower_bound_certificate, special_slope_check,
    AlphaSequence, Certificate, ConvexityReport, FavardEstimate, LipschitzScan, QuadConfig, QuadStatus,
};
pub use decay::{
    cover_stats, decay_series, exponent_fit, neighborhood_sequence, seesaw_builder, CoverStatistic, DecayConfig,
    DecayRecord, ExponentFit, LatticeStage,
};
pub use error::{Error, Result};
pub use exact::{Interval, IntervalSet, Rational};
pub use ifs::{Ifs2D, Rect, Similitude2D, Symmetry, ValidationReport};
pub use needle::{estimate_favard_mc, NeedleConfig, NeedleEstimate};
pub use projection::{alpha, alpha_exact, generation, project_ifs, Chart, Direction, GenerationSet, ProjectedIfs1D};

/// Slope of the four-corner special direction, `theta* = arctan(1/2)`.
pub fn four_corner_special_direction() -> Direction {
    Direction::x(Rational::frac(1, 2)).expect("slope within chart")
}
