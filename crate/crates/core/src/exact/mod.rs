//! Exact scalars and one-dimensional interval-set geometry.

mod interval;
mod rational;

pub(crate) use interval::SCALED_BITS_LIMIT;
pub use interval::{Endpoint, FieldEndpoint, Interval, IntervalSet, ScaledIntervalSet, MERGE_EPSILON};
pub(crate) use rational::lcm_all;
pub use rational::Rational;
