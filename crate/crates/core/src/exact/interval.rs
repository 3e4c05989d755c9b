use std::cmp::Ordering;
use std::fmt;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::rational::{lcm_all, Rational};
use crate::error::Error;

/// Absolute gap below which two float intervals are treated as touching.
pub const MERGE_EPSILON: f64 = 1e-12;

/// Scalar type usable as an interval endpoint.
///
/// Implemented for [`Rational`] (exact), `i128` (scaled integers sharing an
/// implicit common denominator) and `f64` (float backend).
pub trait Endpoint: Clone + PartialOrd + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// Whether an interval starting at `next_lo` joins one ending at `prev_hi`.
    fn joins(prev_hi: &Self, next_lo: &Self) -> bool {
        next_lo <= prev_hi
    }

    fn is_valid(&self) -> bool {
        true
    }

    /// Float rendering used by statistics and CSV.
    fn approx(&self) -> f64;
}

impl Endpoint for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn approx(&self) -> f64 {
        self.to_f64()
    }
}

impl Endpoint for i128 {
    fn zero() -> Self {
        0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn approx(&self) -> f64 {
        *self as f64
    }
}

impl Endpoint for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
    fn joins(prev_hi: &Self, next_lo: &Self) -> bool {
        next_lo - prev_hi < MERGE_EPSILON
    }
    fn is_valid(&self) -> bool {
        self.is_finite()
    }
    fn approx(&self) -> f64 {
        *self
    }
}

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Endpoint> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self, Error> {
        if !lo.is_valid() || !hi.is_valid() {
            return Err(Error::MalformedInterval(format!(
                "non-finite endpoint in [{lo:?}, {hi:?}]"
            )));
        }
        if lo > hi {
            return Err(Error::MalformedInterval(format!("lo > hi in [{lo:?}, {hi:?}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[x, x]`.
    pub fn point(x: T) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &T {
        &self.lo
    }

    pub fn hi(&self) -> &T {
        &self.hi
    }

    pub fn length(&self) -> T {
        self.hi.sub(&self.lo)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo.total_cmp(&self.hi) == Ordering::Equal
    }

    pub fn contains_interval(&self, other: &Interval<T>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub(crate) fn from_parts_unchecked(lo: T, hi: T) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }
}

impl<T: fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl<T: fmt::Debug> fmt::Debug for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

/// Canonical union of closed intervals: sorted, pairwise disjoint, with
/// strictly positive gaps between consecutive members.
#[derive(Clone, PartialEq, Eq)]
pub struct IntervalSet<T> {
    intervals: Vec<Interval<T>>,
}

impl<T> Default for IntervalSet<T> {
    fn default() -> Self {
        IntervalSet { intervals: Vec::new() }
    }
}

impl<T: fmt::Debug> fmt::Debug for IntervalSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.intervals.iter()).finish()
    }
}

impl<T: Endpoint> IntervalSet<T> {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Canonicalize an arbitrary list of intervals (sort, then sweep-merge).
    ///
    /// Touching intervals merge. Degenerate members that stay degenerate after
    /// merging are dropped.
    pub fn normalize(raw: Vec<Interval<T>>) -> Self {
        Self::normalize_inner(raw, false)
    }

    /// Like [`normalize`](Self::normalize) but keeps isolated points; used for
    /// point sets that are about to be expanded.
    pub fn normalize_keep_points(raw: Vec<Interval<T>>) -> Self {
        Self::normalize_inner(raw, true)
    }

    /// Validating form of [`normalize`](Self::normalize) for raw `(lo, hi)` pairs.
    pub fn from_pairs(raw: impl IntoIterator<Item = (T, T)>) -> Result<Self, Error> {
        let raw = raw
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::normalize(raw))
    }

    fn normalize_inner(mut raw: Vec<Interval<T>>, keep_points: bool) -> Self {
        // Stable sort picks up presorted runs, which is the common case when
        // the input is a concatenation of affine images of a canonical set.
        raw.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval<T>> = Vec::with_capacity(raw.len());
        for iv in raw {
            match merged.last_mut() {
                Some(last) if T::joins(&last.hi, &iv.lo) => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        if !keep_points {
            merged.retain(|iv| !iv.is_degenerate());
        }
        IntervalSet { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn into_intervals(self) -> Vec<Interval<T>> {
        self.intervals
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total length, summed in ascending order of `lo`.
    pub fn measure(&self) -> T {
        self.intervals.iter().fold(T::zero(), |acc, iv| acc.add(&iv.length()))
    }

    /// Closed `r`-neighborhood: every `[a, b]` becomes `[a - r, b + r]`.
    pub fn expand(&self, r: &T) -> Result<Self, Error> {
        if !(r > &T::zero()) {
            return Err(Error::NonPositiveRadius(format!("{r:?}")));
        }
        let grown = self
            .intervals
            .iter()
            .map(|iv| Interval::from_parts_unchecked(iv.lo.sub(r), iv.hi.add(r)))
            .collect();
        Ok(Self::normalize(grown))
    }

    pub fn hull(&self) -> Option<Interval<T>> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(Interval::from_parts_unchecked(first.lo.clone(), last.hi.clone()))
    }

    pub fn min_length(&self) -> Option<T> {
        self.intervals
            .iter()
            .map(Interval::length)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Whether every interval of `other` lies inside some interval of `self`.
    pub fn contains_set(&self, other: &IntervalSet<T>) -> bool {
        let mut i = 0;
        for iv in &other.intervals {
            while i < self.intervals.len() && self.intervals[i].hi < iv.lo {
                i += 1;
            }
            match self.intervals.get(i) {
                Some(outer) if outer.contains_interval(iv) => {}
                _ => return false,
            }
        }
        true
    }

    /// Write CSV rows `lo,hi` (no header).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()>
    where
        T: fmt::Display,
    {
        for iv in &self.intervals {
            writeln!(out, "{},{}", iv.lo, iv.hi)?;
        }
        Ok(())
    }
}

/// Operations that need multiplication as well (exact and float backends).
pub trait FieldEndpoint: Endpoint {
    fn mul(&self, other: &Self) -> Self;
}

impl FieldEndpoint for Rational {
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl FieldEndpoint for f64 {
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl<T: FieldEndpoint> IntervalSet<T> {
    /// Image under `x -> scale * x + shift` for `scale > 0`.
    pub fn affine_image(&self, scale: &T, shift: &T) -> Self {
        assert!(scale > &T::zero(), "affine_image requires a positive scale");
        IntervalSet {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval::from_parts_unchecked(iv.lo.mul(scale).add(shift), iv.hi.mul(scale).add(shift)))
                .collect(),
        }
    }
}

impl IntervalSet<Rational> {
    /// Float copy of an exact set (rounded to nearest).
    pub fn to_f64(&self) -> IntervalSet<f64> {
        IntervalSet {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval::from_parts_unchecked(iv.lo.to_f64(), iv.hi.to_f64()))
                .collect(),
        }
    }

    /// Fast-path representation over the least common denominator, if all
    /// scaled endpoints fit comfortably in an `i128`.
    pub fn to_scaled(&self) -> Option<ScaledIntervalSet> {
        let denom = lcm_all(self.intervals.iter().flat_map(|iv| [iv.lo.denom(), iv.hi.denom()]));
        ScaledIntervalSet::from_rational_with_denom(self, &denom)
    }
}

/// Interval set whose endpoints are `value / denom` for a shared positive
/// integer `denom`; merging is plain integer comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledIntervalSet {
    denom: BigInt,
    set: IntervalSet<i128>,
}

/// Headroom kept below `i128::MAX` so that affine steps cannot overflow.
pub(crate) const SCALED_BITS_LIMIT: u64 = 100;

impl ScaledIntervalSet {
    pub fn new(denom: BigInt, set: IntervalSet<i128>) -> Self {
        assert!(denom > BigInt::zero());
        ScaledIntervalSet { denom, set }
    }

    pub fn from_rational_with_denom(src: &IntervalSet<Rational>, denom: &BigInt) -> Option<Self> {
        let scale = |x: &Rational| -> Option<i128> {
            let q = x.numer() * denom;
            if !(&q % x.denom()).is_zero() {
                return None;
            }
            let v = q / x.denom();
            if v.bits() > SCALED_BITS_LIMIT {
                return None;
            }
            v.to_i128()
        };
        let intervals = src
            .intervals
            .iter()
            .map(|iv| Some(Interval::from_parts_unchecked(scale(&iv.lo)?, scale(&iv.hi)?)))
            .collect::<Option<Vec<_>>>()?;
        Some(ScaledIntervalSet {
            denom: denom.clone(),
            set: IntervalSet { intervals },
        })
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn scaled(&self) -> &IntervalSet<i128> {
        &self.set
    }

    pub fn measure(&self) -> Rational {
        Rational::new(BigInt::from(self.set.measure()), self.denom.clone()).expect("positive denom")
    }

    pub fn to_rational(&self) -> IntervalSet<Rational> {
        let conv = |v: i128| Rational::new(BigInt::from(v), self.denom.clone()).expect("positive denom");
        IntervalSet {
            intervals: self
                .set
                .intervals
                .iter()
                .map(|iv| Interval::from_parts_unchecked(conv(iv.lo), conv(iv.hi)))
                .collect(),
        }
    }
}
