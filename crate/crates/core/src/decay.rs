//! Neighborhood-decay experiments: projected measures of `E(r)` across
//! scales, cover statistics with Hölder sums, power-law fits, and 1D
//! neighborhood sequences (including the lattice counterexample to convexity
//! without self-similarity).

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::{self, Write};

use serde::Serialize;

use crate::analysis::quadrature::GaussLegendre;
use crate::analysis::{check_convexity, ConvexityReport};
use crate::error::{Error, Result};
use crate::exact::{Interval, IntervalSet, Rational};
use crate::ifs::{Ifs2D, Symmetry};
use crate::projection::{project_ifs, project_ifs_float, Direction, Generations, DEFAULT_SIZE_CAP};

/// Angular window `[lo, hi)` in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngularWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for AngularWindow {
    /// The full half-period `[0, pi)`.
    fn default() -> Self {
        AngularWindow { lo: 0.0, hi: PI }
    }
}

impl AngularWindow {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    fn is_full_half_period(&self) -> bool {
        self.lo == 0.0 && self.hi == PI
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayConfig {
    pub window: AngularWindow,
    pub order: usize,
    pub panels: usize,
    /// Also evaluate generations one coarser and one finer than the matched depth.
    pub sensitivity: bool,
    pub size_cap: usize,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            window: AngularWindow::default(),
            order: 4,
            panels: 256,
            sensitivity: true,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRecord {
    pub r: Rational,
    pub generation: usize,
    /// `int_A |pi_theta(E_n(r))| dtheta`.
    pub total: f64,
    pub total_coarser: Option<f64>,
    pub total_finer: Option<f64>,
}

impl DecayRecord {
    pub fn r_f64(&self) -> f64 {
        self.r.to_f64()
    }
}

/// Smallest `n` with `max_ratio^n <= r`, so every depth-`n` cylinder has side at most `r`
/// relative to the base.
pub fn matched_generation(ifs: &Ifs2D, r: &Rational) -> Result<usize> {
    if !r.is_positive() {
        return Err(Error::NonPositiveRadius(r.to_string()));
    }
    let rho = ifs.max_ratio();
    let mut n = 0;
    let mut side = Rational::one();
    while &side > r {
        side = &side * rho;
        n += 1;
    }
    Ok(n)
}

fn window_integral(ifs: &Ifs2D, n: usize, r: f64, cfg: &DecayConfig) -> Result<f64> {
    let rule = GaussLegendre::new(cfg.order);
    let f = |theta: f64| -> Result<f64> {
        let set = project_ifs_float(ifs, theta).generation_direct(n, cfg.size_cap)?;
        Ok(set.expand(&r)?.measure())
    };
    if ifs.symmetry() == Symmetry::Dihedral4 && cfg.window.is_full_half_period() {
        let quarter = (cfg.panels / 4).max(1);
        return Ok(4.0 * rule.integrate(f, 0.0, FRAC_PI_4, quarter)?);
    }
    rule.integrate(f, cfg.window.lo, cfg.window.hi, cfg.panels)
}

/// Neighborhood measures of the projections over the window, one record per scale.
///
/// `E(r)` is realized on the projection side: the matched generation is
/// projected and then expanded by `r`.
pub fn decay_series(ifs: &Ifs2D, scales: &[Rational], cfg: &DecayConfig) -> Result<Vec<DecayRecord>> {
    if !(cfg.window.length() > 0.0) {
        return Err(Error::Precondition("empty angular window".into()));
    }
    if scales.iter().any(|r| !r.is_positive()) {
        return Err(Error::Precondition("scales must be positive".into()));
    }
    if scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("scales must be strictly decreasing".into()));
    }
    scales
        .iter()
        .map(|r| {
            let n = matched_generation(ifs, r)?;
            let rf = r.to_f64();
            let total = window_integral(ifs, n, rf, cfg)?;
            let (coarser, finer) = if cfg.sensitivity {
                let c = n.checked_sub(1).map(|m| window_integral(ifs, m, rf, cfg)).transpose()?;
                (c, Some(window_integral(ifs, n + 1, rf, cfg)?))
            } else {
                (None, None)
            };
            Ok(DecayRecord {
                r: r.clone(),
                generation: n,
                total,
                total_coarser: coarser,
                total_finer: finer,
            })
        })
        .collect()
}

/// CSV rows `r,total,slope_so_far` (no header); the running slope is the fit
/// over the records up to that row, blank until three records exist.
pub fn write_decay_csv<W: Write>(records: &[DecayRecord], mut out: W) -> io::Result<()> {
    for (i, rec) in records.iter().enumerate() {
        let slope = exponent_fit(&records[..=i])
            .map(|f| f.s.to_string())
            .unwrap_or_default();
        writeln!(out, "{},{},{}", rec.r, rec.total, slope)?;
    }
    Ok(())
}

pub const DECAY_CSV_HEADER: &str = "r,total,slope_so_far";

#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    /// Fitted exponent in `total ~ C r^s`.
    pub s: f64,
    pub c: f64,
    /// Largest absolute residual in log space.
    pub residual: f64,
    /// `1 - s`.
    pub dimension_bound: f64,
    pub points: usize,
}

/// Ordinary least squares of `log total` against `log r`.
pub fn exponent_fit(records: &[DecayRecord]) -> Result<ExponentFit> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.r_f64(), r.total)).collect();
    fit_power_law(&points)
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(r, t)| !(r > 0.0) || !(t > 0.0)) {
        return Err(Error::DegenerateFit("scales and totals must be positive".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(r, t)| (r.ln(), t.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) {
        return Err(Error::DegenerateFit("zero variance in log r".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let s = sxy / sxx;
    let intercept = my - s * mx;
    let residual = logs
        .iter()
        .map(|p| (p.1 - (intercept + s * p.0)).abs())
        .fold(0.0, f64::max);
    Ok(ExponentFit {
        s,
        c: intercept.exp(),
        residual,
        dimension_bound: 1.0 - s,
        points: points.len(),
    })
}

/// The cover of the projection by the components of its `r`-neighborhood.
#[derive(Clone, Debug)]
pub enum Cover {
    /// Axis-aligned directions: true and sheared coordinates coincide.
    Exact(IntervalSet<Rational>),
    Float(IntervalSet<f64>),
}

impl Cover {
    fn lengths(&self) -> Vec<f64> {
        match self {
            Cover::Exact(s) => s.intervals().iter().map(|iv| iv.length().to_f64()).collect(),
            Cover::Float(s) => s.intervals().iter().map(Interval::length).collect(),
        }
    }

    pub fn count(&self) -> usize {
        match self {
            Cover::Exact(s) => s.count(),
            Cover::Float(s) => s.count(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderSum {
    pub p: f64,
    /// Conjugate exponent with `1/p - 1/q = 1`.
    pub q: f64,
    pub sum: f64,
    /// `sum <= measure^p * count^(1-p)`, the rearranged reverse Hölder bound.
    pub holder_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverStatistic {
    pub r: Rational,
    pub direction: Direction,
    pub generation: usize,
    pub count: usize,
    pub measure: f64,
    pub min_length: f64,
    /// Exact values when the cover is exact.
    pub measure_exact: Option<Rational>,
    pub min_length_exact: Option<Rational>,
    /// `min_length >= 2r` (exact comparison on the exact path).
    pub min_length_ok: bool,
    /// `count <= measure / (2r)`.
    pub count_ceiling_ok: bool,
    pub holder_sums: Vec<HolderSum>,
    #[serde(skip)]
    pub cover: Cover,
}

impl CoverStatistic {
    /// CSV rows `r,count,min_length,p,holder_sum` (no header), one per exponent.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for h in &self.holder_sums {
            writeln!(out, "{},{},{},{},{}", self.r, self.count, self.min_length, h.p, h.sum)?;
        }
        Ok(())
    }
}

pub const COVER_CSV_HEADER: &str = "r,count,min_length,p,holder_sum";

/// Cover statistics at the matched generation for scale `r`.
pub fn cover_stats(ifs: &Ifs2D, d: &Direction, r: &Rational, exponents: &[f64]) -> Result<CoverStatistic> {
    let n = matched_generation(ifs, r)?;
    cover_stats_at(ifs, d, r, exponents, n)
}

pub fn cover_stats_at(
    ifs: &Ifs2D,
    d: &Direction,
    r: &Rational,
    exponents: &[f64],
    generation: usize,
) -> Result<CoverStatistic> {
    if !r.is_positive() {
        return Err(Error::NonPositiveRadius(r.to_string()));
    }
    if let Some(p) = exponents.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::Precondition(format!("Hölder exponent {p} not in (0, 1)")));
    }
    let two_r = Rational::integer(2) * r;
    let (cover, measure_exact, min_length_exact) = if d.slope().is_zero() {
        let p = project_ifs(ifs, d);
        let set = Generations::new(&p, generation, DEFAULT_SIZE_CAP)
            .last()
            .expect("generation 0")?;
        let cover = set.to_interval_set().expand(r)?;
        let measure = cover.measure();
        let min_len = cover.min_length();
        (Cover::Exact(cover), Some(measure), min_len)
    } else {
        let set = project_ifs_float(ifs, d.angle()).generation_direct(generation, DEFAULT_SIZE_CAP)?;
        (Cover::Float(set.expand(&r.to_f64())?), None, None)
    };
    let lengths = cover.lengths();
    let count = lengths.len();
    let measure = measure_exact
        .as_ref()
        .map_or_else(|| lengths.iter().sum(), Rational::to_f64);
    let min_length = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let rf = r.to_f64();
    let (min_length_ok, count_ceiling_ok) = match (&measure_exact, &min_length_exact) {
        (Some(m), Some(min)) => (min >= &two_r, Rational::integer(count as i64) * &two_r <= *m),
        _ => {
            let slack = 1e-12 * (1.0 + measure);
            (
                min_length >= 2.0 * rf - slack,
                count as f64 * 2.0 * rf <= measure + slack,
            )
        }
    };
    let holder_sums = exponents
        .iter()
        .map(|&p| {
            let sum: f64 = lengths.iter().map(|l| l.powf(p)).sum();
            let bound = measure.powf(p) * (count as f64).powf(1.0 - p);
            HolderSum {
                p,
                q: p / (1.0 - p),
                sum,
                holder_ok: sum <= bound * (1.0 + 1e-12),
            }
        })
        .collect();
    Ok(CoverStatistic {
        r: r.clone(),
        direction: d.clone(),
        generation,
        count,
        measure,
        min_length,
        measure_exact,
        min_length_exact,
        min_length_ok,
        count_ceiling_ok,
        holder_sums,
        cover,
    })
}

/// Exact measures `|E(b^-n)|` for `n = 0..=n_max`.
pub fn neighborhood_sequence(
    set: &IntervalSet<Rational>,
    base: &Rational,
    n_max: usize,
) -> Result<Vec<(usize, Rational)>> {
    if *base <= 1 {
        return Err(Error::Precondition(format!("base must exceed 1, got {base}")));
    }
    let inv = base.recip();
    let mut r = Rational::one();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        out.push((n, set.expand(&r)?.measure()));
        r = &r * &inv;
    }
    Ok(out)
}

/// CSV rows `n,measure` (no header).
pub fn write_neighborhood_csv<W: Write>(seq: &[(usize, Rational)], mut out: W) -> io::Result<()> {
    for (n, m) in seq {
        writeln!(out, "{n},{m}")?;
    }
    Ok(())
}

pub const NEIGHBORHOOD_CSV_HEADER: &str = "n,measure";

/// Point set (as degenerate intervals) from text: one rational per line,
/// blank lines and `#` comments ignored.
pub fn parse_point_set(text: &str) -> Result<IntervalSet<Rational>> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let x: Rational = line.parse().map_err(|e: Error| Error::Config {
            line: i + 1,
            msg: e.to_string(),
        })?;
        points.push(Interval::point(x));
    }
    Ok(IntervalSet::normalize_keep_points(points))
}

/// Finite lattice `{center + k * spacing : |k * spacing| <= extent}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeStage {
    pub center: Rational,
    pub spacing: Rational,
    pub extent: Rational,
}

impl LatticeStage {
    pub fn new(center: Rational, spacing: Rational, extent: Rational) -> Result<Self> {
        if !spacing.is_positive() || extent.is_negative() {
            return Err(Error::Precondition(
                "lattice needs positive spacing and nonnegative extent".into(),
            ));
        }
        Ok(LatticeStage {
            center,
            spacing,
            extent,
        })
    }

    pub fn points(&self) -> Vec<Rational> {
        let ratio = &self.extent / &self.spacing;
        // floor of a nonnegative rational
        let k_max: i64 =
            num_traits::ToPrimitive::to_i64(&(ratio.numer() / ratio.denom())).expect("lattice size fits i64");
        (-k_max..=k_max)
            .map(|k| &self.center + Rational::integer(k) * &self.spacing)
            .collect()
    }

    fn range(&self) -> (Rational, Rational) {
        (&self.center - &self.extent, &self.center + &self.extent)
    }
}

/// The lattice `{0, 1/4, 1/2, ..., 100}`.
pub fn quarter_lattice() -> LatticeStage {
    LatticeStage::new(Rational::integer(50), Rational::frac(1, 4), Rational::integer(50)).expect("valid lattice")
}

#[derive(Clone, Debug, Serialize)]
pub struct SeesawResult {
    pub point_count: usize,
    pub sequence: Vec<(usize, Rational)>,
    /// Present when the sequence has at least three terms.
    pub convexity: Option<ConvexityReport>,
    /// Sign changes among the nonzero second differences.
    pub sign_changes: usize,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub points: IntervalSet<Rational>,
}

/// Union of lattice stages and its neighborhood sequence in base `base`.
pub fn seesaw_builder(stages: &[LatticeStage], base: &Rational, n_max: usize) -> Result<SeesawResult> {
    let mut warnings = Vec::new();
    for (i, a) in stages.iter().enumerate() {
        for (j, b) in stages.iter().enumerate().skip(i + 1) {
            let (alo, ahi) = a.range();
            let (blo, bhi) = b.range();
            if alo <= bhi && blo <= ahi {
                warnings.push(format!("stages {i} and {j} overlap"));
            }
        }
    }
    let points: Vec<Interval<Rational>> = stages.iter().flat_map(|s| s.points()).map(Interval::point).collect();
    let mut res = point_set_sequence(IntervalSet::normalize_keep_points(points), base, n_max)?;
    res.warnings = warnings;
    Ok(res)
}

/// Neighborhood sequence, convexity report and sign changes of a point set.
pub fn point_set_sequence(points: IntervalSet<Rational>, base: &Rational, n_max: usize) -> Result<SeesawResult> {
    let sequence = neighborhood_sequence(&points, base, n_max)?;
    let values: Vec<Rational> = sequence.iter().map(|(_, m)| m.clone()).collect();
    let convexity = if values.len() >= 3 {
        Some(check_convexity(&values)?)
    } else {
        None
    };
    let sign_changes = convexity.as_ref().map_or(0, |c| {
        let signs: Vec<bool> = c
            .margins
            .iter()
            .filter(|m| !m.margin.is_zero())
            .map(|m| m.margin.is_positive())
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    });
    Ok(SeesawResult {
        point_count: points.count(),
        sequence,
        convexity,
        sign_changes,
        warnings: Vec::new(),
        points,
    })
}
