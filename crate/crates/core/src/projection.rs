//! Directions, projected one-dimensional systems, and generation sets.
//!
//! Exact work happens on a *sheared* line: for chart `X` with slope `t` the
//! functional is `p(x, y) = x + t y`, for chart `Y` with slope `u` it is
//! `p(x, y) = y + u x`. Both are the orthogonal projection up to the factor
//! `1 / sqrt(1 + slope^2)`, so lengths stay rational.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{lcm_all, FieldEndpoint, Interval, IntervalSet, Rational, ScaledIntervalSet, SCALED_BITS_LIMIT};
use crate::ifs::Ifs2D;

/// Default cap on the merged interval count of a generation set.
pub const DEFAULT_SIZE_CAP: usize = 50_000_000;

/// Default denominator bound when snapping angles to rational slopes.
pub const DEFAULT_MAX_DENOM: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    X,
    Y,
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chart::X => "x",
            Chart::Y => "y",
        })
    }
}

impl std::str::FromStr for Chart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Chart::X),
            "y" => Ok(Chart::Y),
            other => Err(Error::Parse(format!("unknown chart {other:?} (expected x or y)"))),
        }
    }
}

/// A projection direction given by a chart and an exact slope in `[-1, 1]`.
///
/// Chart `X` covers angles in `[-pi/4, pi/4]`, chart `Y` covers `[pi/4, 3pi/4]`;
/// projection length has period `pi`, so together they cover every direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Direction {
    chart: Chart,
    slope: Rational,
    angle: f64,
}

impl Direction {
    pub fn new(chart: Chart, slope: Rational) -> Result<Self> {
        if slope.abs() > 1 {
            return Err(Error::InvalidDirection(format!("|slope| must be <= 1, got {slope}")));
        }
        let s = slope.to_f64();
        let angle = match chart {
            Chart::X => s.atan(),
            Chart::Y => FRAC_PI_2 - s.atan(),
        };
        Ok(Direction { chart, slope, angle })
    }

    pub fn x(slope: Rational) -> Result<Self> {
        Self::new(Chart::X, slope)
    }

    /// Snap an angle (radians) to the nearest chart/rational-slope direction
    /// with slope denominator at most `max_denom`.
    pub fn from_angle(theta: f64, max_denom: u64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidDirection(format!("non-finite angle {theta}")));
        }
        let mut t = theta.rem_euclid(PI);
        if t >= 3.0 * FRAC_PI_4 {
            t -= PI;
        }
        let (chart, raw) = if t <= FRAC_PI_4 {
            (Chart::X, t.tan())
        } else {
            (Chart::Y, (FRAC_PI_2 - t).tan())
        };
        let raw = raw.clamp(-1.0, 1.0);
        let slope = Rational::approximate(raw, max_denom)
            .ok_or_else(|| Error::InvalidDirection(format!("cannot snap angle {theta}")))?;
        Self::new(chart, slope)
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn slope(&self) -> &Rational {
        &self.slope
    }

    /// Angle in radians, in `[-pi/4, 3pi/4]`.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// True projected length = `scale() *` sheared length.
    pub fn scale(&self) -> f64 {
        let s = self.slope.to_f64();
        1.0 / (1.0 + s * s).sqrt()
    }

    /// `1 + slope^2`; the exact square of the reciprocal scale.
    pub fn scale_denominator_sq(&self) -> Rational {
        Rational::one() + &self.slope * &self.slope
    }

    /// Sheared functional evaluated at a point.
    pub fn functional(&self, x: &Rational, y: &Rational) -> Rational {
        match self.chart {
            Chart::X => x + &self.slope * y,
            Chart::Y => y + &self.slope * x,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chart, self.slope)
    }
}

/// One-dimensional map `x -> ratio * x + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap1D<T> {
    ratio: T,
    offset: T,
}

impl<T> AffineMap1D<T> {
    pub fn ratio(&self) -> &T {
        &self.ratio
    }

    pub fn offset(&self) -> &T {
        &self.offset
    }
}

/// The system `T_i : x -> r_i x + p(beta_i)` induced on a projection line.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedIfs1D<T> {
    maps: Vec<AffineMap1D<T>>,
    base: Interval<T>,
}

impl<T: FieldEndpoint> ProjectedIfs1D<T> {
    pub fn new(maps: Vec<(T, T)>, base: Interval<T>) -> Self {
        ProjectedIfs1D {
            maps: maps
                .into_iter()
                .map(|(ratio, offset)| AffineMap1D { ratio, offset })
                .collect(),
            base,
        }
    }

    pub fn maps(&self) -> &[AffineMap1D<T>] {
        &self.maps
    }

    pub fn base(&self) -> &Interval<T> {
        &self.base
    }

    fn step(&self, current: &IntervalSet<T>) -> IntervalSet<T> {
        let mut raw = Vec::with_capacity(current.count() * self.maps.len());
        for m in &self.maps {
            raw.extend(current.affine_image(&m.ratio, &m.offset).into_intervals());
        }
        IntervalSet::normalize(raw)
    }

    /// Generation `n` by direct iteration in the scalar type `T`.
    pub fn generation_direct(&self, n: usize, cap: usize) -> Result<IntervalSet<T>> {
        let mut set = IntervalSet::normalize(vec![self.base.clone()]);
        for _ in 0..n {
            set = self.step(&set);
            check_cap(set.count(), cap)?;
        }
        Ok(set)
    }
}

fn check_cap(count: usize, cap: usize) -> Result<()> {
    if count > cap {
        Err(Error::SizeCap { count, cap })
    } else {
        Ok(())
    }
}

/// Exact projected system on the sheared line of `d`.
pub fn project_ifs(ifs: &Ifs2D, d: &Direction) -> ProjectedIfs1D<Rational> {
    let maps = ifs
        .maps()
        .iter()
        .map(|m| {
            let (bx, by) = m.translation();
            (m.ratio().clone(), d.functional(bx, by))
        })
        .collect();
    let values: Vec<Rational> = ifs.base().corners().iter().map(|(x, y)| d.functional(x, y)).collect();
    let lo = values.iter().min().expect("four corners").clone();
    let hi = values.iter().max().expect("four corners").clone();
    ProjectedIfs1D::new(maps, Interval::new(lo, hi).expect("min <= max"))
}

/// Float projected system for the true orthogonal projection at angle `theta`
/// (functional `x cos(theta) + y sin(theta)`); lengths are true lengths.
pub fn project_ifs_float(ifs: &Ifs2D, theta: f64) -> ProjectedIfs1D<f64> {
    let (s, c) = theta.sin_cos();
    let p = |x: &Rational, y: &Rational| c * x.to_f64() + s * y.to_f64();
    let maps = ifs
        .maps()
        .iter()
        .map(|m| {
            let (bx, by) = m.translation();
            (m.ratio().to_f64(), p(bx, by))
        })
        .collect();
    let values: Vec<f64> = ifs.base().corners().iter().map(|(x, y)| p(x, y)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ProjectedIfs1D::new(maps, Interval::new(lo, hi).expect("finite corners"))
}

/// An exact generation set, stored on the scaled-integer fast path when possible.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactSet {
    Scaled(ScaledIntervalSet),
    Rational(IntervalSet<Rational>),
}

impl ExactSet {
    pub fn measure(&self) -> Rational {
        match self {
            ExactSet::Scaled(s) => s.measure(),
            ExactSet::Rational(s) => s.measure(),
        }
    }

    pub fn count(&self) -> usize {
        match self {
            ExactSet::Scaled(s) => s.scaled().count(),
            ExactSet::Rational(s) => s.count(),
        }
    }

    pub fn to_interval_set(&self) -> IntervalSet<Rational> {
        match self {
            ExactSet::Scaled(s) => s.to_rational(),
            ExactSet::Rational(s) => s.clone(),
        }
    }

    pub fn is_fast_path(&self) -> bool {
        matches!(self, ExactSet::Scaled(_))
    }
}

struct ScaledMap {
    numer: i128,
    denom: i128,
    offset: i128,
}

enum Engine {
    Scaled {
        maps: Vec<ScaledMap>,
        denom: BigInt,
        current: IntervalSet<i128>,
    },
    Exact {
        current: IntervalSet<Rational>,
    },
}

/// Iterator over exact generation sets `E_0, E_1, ..., E_{n_max}`.
///
/// Each step maps the current merged set through every `T_i` and merges
/// again, so memory follows the merged count rather than `N^n`.
pub struct Generations<'a> {
    projected: &'a ProjectedIfs1D<Rational>,
    engine: Engine,
    next: usize,
    n_max: usize,
    cap: usize,
    failed: bool,
}

impl<'a> Generations<'a> {
    pub fn new(projected: &'a ProjectedIfs1D<Rational>, n_max: usize, cap: usize) -> Self {
        let base = IntervalSet::normalize(vec![projected.base.clone()]);
        let engine = scaled_engine(projected, n_max, &base).unwrap_or(Engine::Exact { current: base });
        Generations {
            projected,
            engine,
            next: 0,
            n_max,
            cap,
            failed: false,
        }
    }

    fn current(&self) -> ExactSet {
        match &self.engine {
            Engine::Scaled { denom, current, .. } => {
                ExactSet::Scaled(ScaledIntervalSet::new(denom.clone(), current.clone()))
            }
            Engine::Exact { current } => ExactSet::Rational(current.clone()),
        }
    }

    fn advance(&mut self) {
        let fallback = match &mut self.engine {
            Engine::Scaled { maps, denom, current } => match scaled_step(maps, current) {
                Some(next) => {
                    *current = next;
                    None
                }
                None => Some(ScaledIntervalSet::new(denom.clone(), std::mem::take(current)).to_rational()),
            },
            Engine::Exact { current } => {
                *current = self.projected.step(current);
                None
            }
        };
        if let Some(rational) = fallback {
            self.engine = Engine::Exact {
                current: self.projected.step(&rational),
            };
        }
    }

    fn merged_count(&self) -> usize {
        match &self.engine {
            Engine::Scaled { current, .. } => current.count(),
            Engine::Exact { current } => current.count(),
        }
    }
}

impl Iterator for Generations<'_> {
    type Item = Result<ExactSet>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next > self.n_max {
            return None;
        }
        if self.next > 0 {
            self.advance();
            if let Err(e) = check_cap(self.merged_count(), self.cap) {
                self.failed = true;
                return Some(Err(e));
            }
        }
        self.next += 1;
        Some(Ok(self.current()))
    }
}

fn scaled_engine(p: &ProjectedIfs1D<Rational>, n_max: usize, base: &IntervalSet<Rational>) -> Option<Engine> {
    let offset_denoms = lcm_all(
        p.maps
            .iter()
            .map(|m| m.offset.denom())
            .chain([p.base.lo().denom(), p.base.hi().denom()]),
    );
    let ratio_denoms = lcm_all(p.maps.iter().map(|m| m.ratio.denom()));
    if ratio_denoms.bits() as usize * n_max + offset_denoms.bits() as usize > SCALED_BITS_LIMIT as usize {
        return None;
    }
    let denom = offset_denoms * num_traits::pow(ratio_denoms, n_max);
    let scaled = |x: &Rational| -> Option<i128> {
        let v = x.numer() * &denom;
        let (q, r) = v.div_rem(x.denom());
        if !r.is_zero() || q.bits() > SCALED_BITS_LIMIT {
            return None;
        }
        q.to_i128()
    };
    let maps = p
        .maps
        .iter()
        .map(|m| {
            Some(ScaledMap {
                numer: m.ratio.numer().to_i128()?,
                denom: m.ratio.denom().to_i128()?,
                offset: scaled(&m.offset)?,
            })
        })
        .collect::<Option<Vec<_>>>()?;
    let current = ScaledIntervalSet::from_rational_with_denom(base, &denom)?
        .scaled()
        .clone();
    Some(Engine::Scaled { maps, denom, current })
}

fn scaled_step(maps: &[ScaledMap], current: &IntervalSet<i128>) -> Option<IntervalSet<i128>> {
    let limit = 1i128 << SCALED_BITS_LIMIT;
    let image = |m: &ScaledMap, x: i128| -> Option<i128> {
        let prod = m.numer.checked_mul(x)?;
        if prod % m.denom != 0 {
            return None;
        }
        let y = (prod / m.denom).checked_add(m.offset)?;
        (y.abs() < limit).then_some(y)
    };
    let mut raw = Vec::with_capacity(current.count() * maps.len());
    for m in maps {
        for iv in current.intervals() {
            raw.push(Interval::from_parts_unchecked(image(m, *iv.lo())?, image(m, *iv.hi())?));
        }
    }
    Some(IntervalSet::normalize(raw))
}

/// Generation `n` of a projected system together with its direction.
#[derive(Clone, Debug)]
pub struct GenerationSet {
    pub n: usize,
    pub direction: Direction,
    pub set: IntervalSet<Rational>,
}

impl GenerationSet {
    /// CSV rows `n,chart,slope,lo,hi` (no header).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for iv in self.set.intervals() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.n,
                self.direction.chart(),
                self.direction.slope(),
                iv.lo(),
                iv.hi()
            )?;
        }
        Ok(())
    }
}

pub const GENERATION_CSV_HEADER: &str = "n,chart,slope,lo,hi";

pub fn generation(ifs: &Ifs2D, d: &Direction, n: usize, cap: usize) -> Result<GenerationSet> {
    let p = project_ifs(ifs, d);
    let last = Generations::new(&p, n, cap).last().expect("at least generation 0")?;
    Ok(GenerationSet {
        n,
        direction: d.clone(),
        set: last.to_interval_set(),
    })
}

/// Exact sheared length of `E_n` and the scale factor to true length.
pub fn alpha_exact(ifs: &Ifs2D, d: &Direction, n: usize, cap: usize) -> Result<(Rational, f64)> {
    let p = project_ifs(ifs, d);
    let last = Generations::new(&p, n, cap).last().expect("at least generation 0")?;
    Ok((last.measure(), d.scale()))
}

/// True projected length `alpha_n(theta)` for a rational direction.
pub fn alpha(ifs: &Ifs2D, d: &Direction, n: usize, cap: usize) -> Result<f64> {
    let (sheared, scale) = alpha_exact(ifs, d, n, cap)?;
    Ok(scale * sheared.to_f64())
}

/// True projected length at an arbitrary angle, float backend.
pub fn alpha_float(ifs: &Ifs2D, theta: f64, n: usize, cap: usize) -> Result<f64> {
    Ok(project_ifs_float(ifs, theta).generation_direct(n, cap)?.measure())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn four_corner() -> Ifs2D {
        Ifs2D::preset("four-corner").unwrap()
    }

    #[test]
    fn direction_angles_and_scale() {
        let d = Direction::x(q(1, 2)).unwrap();
        assert!((d.angle() - 0.5f64.atan()).abs() < 1e-15);
        assert!((d.scale() - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        let y = Direction::new(Chart::Y, q(0, 1)).unwrap();
        assert!((y.angle() - FRAC_PI_2).abs() < 1e-15);
        assert!(Direction::x(q(3, 2)).is_err());
    }

    #[test]
    fn snapping_covers_half_period() {
        let d = Direction::from_angle(0.5f64.atan(), 1000).unwrap();
        assert_eq!((d.chart(), d.slope().clone()), (Chart::X, q(1, 2)));
        let d = Direction::from_angle(FRAC_PI_2 + 0.1, DEFAULT_MAX_DENOM).unwrap();
        assert_eq!(d.chart(), Chart::Y);
        assert!((d.angle() - (FRAC_PI_2 + 0.1)).abs() < 1e-9);
        // angles near pi wrap to a negative X slope
        let d = Direction::from_angle(PI - 0.2, DEFAULT_MAX_DENOM).unwrap();
        assert_eq!(d.chart(), Chart::X);
        assert!((d.angle() + 0.2).abs() < 1e-9);
        let d = Direction::from_angle(-3.0 * PI + 0.3, DEFAULT_MAX_DENOM).unwrap();
        assert!((d.angle() - 0.3).abs() < 1e-9);
        assert!(Direction::from_angle(f64::NAN, 10).is_err());
    }

    #[test]
    fn project_four_corner_half_slope() {
        let p = project_ifs(&four_corner(), &Direction::x(q(1, 2)).unwrap());
        let offsets: Vec<_> = p.maps().iter().map(|m| m.offset().clone()).collect();
        assert_eq!(offsets, vec![q(0, 1), q(3, 8), q(3, 4), q(9, 8)]);
        assert!(p.maps().iter().all(|m| m.ratio() == &q(1, 4)));
        assert_eq!(p.base(), &Interval::new(q(0, 1), q(3, 2)).unwrap());
    }

    #[test]
    fn project_four_corner_axis() {
        let p = project_ifs(&four_corner(), &Direction::x(q(0, 1)).unwrap());
        let offsets: Vec<_> = p.maps().iter().map(|m| m.offset().clone()).collect();
        assert_eq!(offsets, vec![q(0, 1), q(0, 1), q(3, 4), q(3, 4)]);
        assert_eq!(p.base(), &Interval::new(q(0, 1), q(1, 1)).unwrap());
        let g = Ifs2D::preset("sierpinski-gasket").unwrap();
        assert_eq!(
            project_ifs(&g, &Direction::x(q(0, 1)).unwrap()).base(),
            &Interval::new(q(0, 1), q(1, 1)).unwrap()
        );
    }

    #[test]
    fn generation_axis_one() {
        let g = generation(&four_corner(), &Direction::x(q(0, 1)).unwrap(), 1, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(
            g.set,
            IntervalSet::from_pairs([(q(0, 1), q(1, 4)), (q(3, 4), q(1, 1))]).unwrap()
        );
        assert_eq!(g.set.measure(), q(1, 2));
    }

    #[test]
    fn generation_special_slope_is_stable() {
        let d = Direction::x(q(1, 2)).unwrap();
        for n in [1, 7] {
            let g = generation(&four_corner(), &d, n, DEFAULT_SIZE_CAP).unwrap();
            assert_eq!(g.set.intervals(), &[Interval::new(q(0, 1), q(3, 2)).unwrap()]);
        }
    }

    #[test]
    fn alpha_axis_closed_form() {
        let d = Direction::x(q(0, 1)).unwrap();
        for n in 0..6 {
            let (sheared, scale) = alpha_exact(&four_corner(), &d, n, DEFAULT_SIZE_CAP).unwrap();
            assert_eq!(sheared, q(1, 1 << n));
            assert_eq!(scale, 1.0);
        }
    }

    #[test]
    fn alpha_special_slope_true_length() {
        let d = Direction::x(q(1, 2)).unwrap();
        let a = alpha(&four_corner(), &d, 3, DEFAULT_SIZE_CAP).unwrap();
        assert!((a - 3.0 / 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn alpha_base_is_unit_square_shadow() {
        for t in [q(0, 1), q(1, 3), q(7, 10), q(1, 1)] {
            let d = Direction::x(t.clone()).unwrap();
            let (sheared, _) = alpha_exact(&four_corner(), &d, 0, DEFAULT_SIZE_CAP).unwrap();
            assert_eq!(sheared, Rational::one() + &t);
            let a = alpha(&four_corner(), &d, 0, DEFAULT_SIZE_CAP).unwrap();
            let th = d.angle();
            assert!((a - (th.cos() + th.sin())).abs() < 1e-14);
        }
    }

    #[test]
    fn charts_agree_on_diagonal() {
        let k = four_corner();
        let dx = Direction::x(q(1, 1)).unwrap();
        let dy = Direction::new(Chart::Y, q(1, 1)).unwrap();
        for n in 0..5 {
            assert_eq!(
                alpha_exact(&k, &dx, n, DEFAULT_SIZE_CAP).unwrap().0,
                alpha_exact(&k, &dy, n, DEFAULT_SIZE_CAP).unwrap().0
            );
        }
    }

    #[test]
    fn fast_path_matches_rational_path() {
        let k = four_corner();
        for t in [q(2, 7), q(-13, 29), q(5, 6)] {
            let p = project_ifs(&k, &Direction::x(t).unwrap());
            let fast: Vec<_> = Generations::new(&p, 5, DEFAULT_SIZE_CAP).map(|g| g.unwrap()).collect();
            assert!(fast.iter().all(ExactSet::is_fast_path));
            for (n, g) in fast.iter().enumerate() {
                let direct = p.generation_direct(n, DEFAULT_SIZE_CAP).unwrap();
                assert_eq!(g.to_interval_set(), direct);
            }
        }
    }

    #[test]
    fn huge_denominators_use_rational_engine() {
        let k = Ifs2D::preset("sparse-corner-1000003").unwrap();
        let p = project_ifs(&k, &Direction::x(q(1, 999_983)).unwrap());
        let gens: Vec<_> = Generations::new(&p, 6, DEFAULT_SIZE_CAP).map(|g| g.unwrap()).collect();
        assert!(!gens.last().unwrap().is_fast_path());
        assert_eq!(gens[2].count(), 16);
    }

    #[test]
    fn size_cap_aborts() {
        let p = project_ifs(&four_corner(), &Direction::x(q(1, 7)).unwrap());
        let res: Result<Vec<_>> = Generations::new(&p, 6, 100).collect();
        assert!(matches!(res, Err(Error::SizeCap { cap: 100, .. })));
    }

    #[test]
    fn float_matches_exact() {
        let k = four_corner();
        let d = Direction::x(q(2, 9)).unwrap();
        for n in 0..6 {
            let exact = alpha(&k, &d, n, DEFAULT_SIZE_CAP).unwrap();
            let float = alpha_float(&k, d.angle(), n, DEFAULT_SIZE_CAP).unwrap();
            assert!((exact - float).abs() < 1e-12, "n={n}: {exact} vs {float}");
        }
    }

    #[test]
    fn generation_csv() {
        let g = generation(&four_corner(), &Direction::x(q(0, 1)).unwrap(), 1, DEFAULT_SIZE_CAP).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1,x,0/1,0/1,1/4\n1,x,0/1,3/4,1/1\n");
    }
}
