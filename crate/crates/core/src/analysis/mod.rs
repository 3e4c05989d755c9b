//! Alpha sequences, convexity reports, Favard-length quadrature and the
//! four-corner lower-bound certificate.

mod certificate;
pub mod quadrature;

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::ifs::{Ifs2D, Symmetry};
use crate::projection::{alpha_float, project_ifs, Direction, Generations, DEFAULT_SIZE_CAP};

pub use certificate::{
    lower_bound_certificate, Certificate, CertificateEntry, CertificateStatus, CERTIFICATE_CSV_HEADER,
};
use quadrature::GaussLegendre;

/// Exact sheared lengths `|E_0|, ..., |E_N|` in one direction.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaSequence {
    pub direction: Direction,
    pub values: Vec<Rational>,
    pub scale: f64,
    pub convexity_applies: bool,
}

impl AlphaSequence {
    pub fn true_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| self.scale * v.to_f64()).collect()
    }

    pub fn convexity(&self) -> Result<ConvexityReport> {
        check_convexity(&self.values)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// CSV rows `n,slope,sheared,true` (no header).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (n, (v, t)) in self.values.iter().zip(self.true_values()).enumerate() {
            writeln!(out, "{n},{},{v},{t}", self.direction.slope())?;
        }
        Ok(())
    }
}

pub const ALPHA_CSV_HEADER: &str = "n,slope,sheared,true";

pub fn alpha_sequence(ifs: &Ifs2D, d: &Direction, n_max: usize) -> Result<AlphaSequence> {
    alpha_sequence_capped(ifs, d, n_max, DEFAULT_SIZE_CAP)
}

pub fn alpha_sequence_capped(ifs: &Ifs2D, d: &Direction, n_max: usize, cap: usize) -> Result<AlphaSequence> {
    let p = project_ifs(ifs, d);
    let values = Generations::new(&p, n_max, cap)
        .map(|g| g.map(|set| set.measure()))
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaSequence {
        direction: d.clone(),
        values,
        scale: d.scale(),
        convexity_applies: ifs.convexity_applies(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Margin {
    pub k: usize,
    /// `(a_{k-1} + a_{k+1}) - 2 a_k`; nonnegative for a convex sequence.
    pub margin: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub margins: Vec<Margin>,
    /// `d_k = a_{k-1} - a_k` for `k = 1..`.
    pub differences: Vec<Rational>,
    pub convex: bool,
    pub differences_nonincreasing: bool,
    pub first_violation: Option<usize>,
}

impl ConvexityReport {
    /// CSV rows `k,margin` (no header).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for m in &self.margins {
            writeln!(out, "{},{}", m.k, m.margin)?;
        }
        Ok(())
    }
}

pub const CONVEXITY_CSV_HEADER: &str = "k,margin";

/// Exact second-difference test of a sequence of length at least three.
pub fn check_convexity(values: &[Rational]) -> Result<ConvexityReport> {
    if values.len() < 3 {
        return Err(Error::Precondition(format!(
            "convexity needs at least 3 values, got {}",
            values.len()
        )));
    }
    let margins: Vec<Margin> = values
        .windows(3)
        .enumerate()
        .map(|(i, w)| Margin {
            k: i + 1,
            margin: &w[0] + &w[2] - &w[1] - &w[1],
        })
        .collect();
    let differences: Vec<Rational> = values.windows(2).map(|w| &w[0] - &w[1]).collect();
    let first_violation = margins.iter().find(|m| m.margin.is_negative()).map(|m| m.k);
    Ok(ConvexityReport {
        convex: first_violation.is_none(),
        differences_nonincreasing: differences.windows(2).all(|w| w[1] <= w[0]),
        margins,
        differences,
        first_violation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadConfig {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    pub initial_panels: usize,
    /// Maximum number of panel doublings.
    pub max_refinements: usize,
    pub tol: f64,
    pub size_cap: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            order: 8,
            initial_panels: 4,
            max_refinements: 10,
            tol: 1e-6,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadStatus {
    Converged,
    Unconverged,
}

#[derive(Clone, Debug, Serialize)]
pub struct FavardEstimate {
    pub n: usize,
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error_bar: f64,
    pub status: QuadStatus,
    pub panels: usize,
    pub evaluations: usize,
    pub symmetry: Symmetry,
}

/// Favard length `int_0^{2pi} alpha_n(theta) dtheta` of generation `n`.
///
/// Integrates over `[0, pi]` and doubles (period `pi`); with dihedral symmetry
/// integrates over `[0, pi/4]` and multiplies by 8.
pub fn favard(ifs: &Ifs2D, n: usize, quad: &QuadConfig) -> Result<FavardEstimate> {
    let (upper, factor) = match ifs.symmetry() {
        Symmetry::Dihedral4 => (FRAC_PI_4, 8.0),
        Symmetry::None => (PI, 2.0),
    };
    // tolerance refers to the reported value, not the reduced integral
    let reduced = QuadConfig {
        tol: quad.tol / factor,
        ..quad.clone()
    };
    let integrand = |theta: f64| alpha_float(ifs, theta, n, quad.size_cap);
    integrate_refining(integrand, 0.0, upper, &reduced).map(|(value, error_bar, status, panels, evaluations)| {
        FavardEstimate {
            n,
            value: factor * value,
            error_bar: factor * error_bar,
            status,
            panels,
            evaluations,
            symmetry: ifs.symmetry(),
        }
    })
}

pub(crate) fn integrate_refining<F>(
    f: F,
    a: f64,
    b: f64,
    quad: &QuadConfig,
) -> Result<(f64, f64, QuadStatus, usize, usize)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let rule = GaussLegendre::new(quad.order);
    let mut panels = quad.initial_panels.max(1);
    let mut evaluations = panels * rule.order();
    let mut previous = rule.integrate(&f, a, b, panels)?;
    let mut delta = f64::INFINITY;
    for _ in 0..quad.max_refinements {
        panels *= 2;
        evaluations += panels * rule.order();
        let current = rule.integrate(&f, a, b, panels)?;
        delta = (current - previous).abs();
        previous = current;
        if delta < quad.tol {
            return Ok((previous, delta, QuadStatus::Converged, panels, evaluations));
        }
    }
    Ok((previous, delta, QuadStatus::Unconverged, panels, evaluations))
}

/// Exact check that the first-generation images tile the base projection.
#[derive(Clone, Debug, Serialize)]
pub struct SpecialSlopeVerdict {
    pub direction: Direction,
    pub alpha0: Rational,
    pub alpha1: Rational,
    pub generation1_count: usize,
    /// `alpha0 - alpha1` (sheared).
    pub defect: Rational,
    pub pass: bool,
}

pub fn special_slope_check(ifs: &Ifs2D, d: &Direction) -> Result<SpecialSlopeVerdict> {
    let p = project_ifs(ifs, d);
    let gens = Generations::new(&p, 1, DEFAULT_SIZE_CAP).collect::<Result<Vec<_>>>()?;
    let alpha0 = gens[0].measure();
    let alpha1 = gens[1].measure();
    let count = gens[1].count();
    let defect = &alpha0 - &alpha1;
    Ok(SpecialSlopeVerdict {
        direction: d.clone(),
        pass: count == 1 && defect.is_zero(),
        generation1_count: count,
        defect,
        alpha0,
        alpha1,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzScan {
    pub nodes: usize,
    pub step: f64,
    /// Largest `|g(theta_{j+1}) - g(theta_j)| / step` over adjacent nodes.
    pub sup_slope: f64,
    pub sup_at: f64,
    pub min_value: f64,
    pub argmin: f64,
    /// Local minima whose value is small enough (`<= sup_slope * step`) to
    /// be consistent with a zero of `g` within one grid step.
    pub zeros: Vec<(f64, f64)>,
    /// `(theta, g(theta))` on the grid.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

impl LipschitzScan {
    /// Candidate zero closest to `target`, with its distance.
    pub fn zero_near(&self, target: f64) -> Option<(f64, f64)> {
        self.zeros
            .iter()
            .map(|(t, _)| (*t, (t - target).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Samples `g(theta) = alpha_0(theta) - alpha_1(theta)` (true lengths) on
/// `nodes` equally spaced angles over the half-period `[0, pi)`.
pub fn lipschitz_scan(ifs: &Ifs2D, nodes: usize) -> Result<LipschitzScan> {
    if nodes < 3 {
        return Err(Error::Precondition(format!(
            "lipschitz scan needs at least 3 nodes, got {nodes}"
        )));
    }
    let step = PI / nodes as f64;
    let samples = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let theta = j as f64 * step;
            let a0 = alpha_float(ifs, theta, 0, DEFAULT_SIZE_CAP)?;
            let a1 = alpha_float(ifs, theta, 1, DEFAULT_SIZE_CAP)?;
            Ok((theta, a0 - a1))
        })
        .collect::<Result<Vec<_>>>()?;
    let g = |j: usize| samples[j % nodes].1;
    let (mut sup_slope, mut sup_at) = (0.0f64, 0.0);
    for (j, &(theta, v)) in samples.iter().enumerate() {
        // wraps around: g has period pi
        let s = (g(j + 1) - v).abs() / step;
        if s > sup_slope {
            sup_slope = s;
            sup_at = theta + 0.5 * step;
        }
    }
    let (argmin, min_value) = samples
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    let threshold = sup_slope * step;
    let zeros = (0..nodes)
        .filter(|&j| {
            let prev = g(j + nodes - 1);
            let next = g(j + 1);
            let v = g(j);
            v <= prev && v <= next && v <= threshold
        })
        .map(|j| samples[j])
        .collect();
    Ok(LipschitzScan {
        nodes,
        step,
        sup_slope,
        sup_at,
        min_value,
        argmin,
        zeros,
        samples,
    })
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
    fn sequence_axis() {
        let s = alpha_sequence(&four_corner(), &Direction::x(q(0, 1)).unwrap(), 3).unwrap();
        assert_eq!(s.values, vec![q(1, 1), q(1, 2), q(1, 4), q(1, 8)]);
        assert!(s.is_nonincreasing());
    }

    #[test]
    fn sequence_special() {
        let s = alpha_sequence(&four_corner(), &Direction::x(q(1, 2)).unwrap(), 3).unwrap();
        assert_eq!(s.values, vec![q(3, 2); 4]);
    }

    #[test]
    fn sequence_gasket_axis() {
        let g = Ifs2D::preset("sierpinski-gasket").unwrap();
        let s = alpha_sequence(&g, &Direction::x(q(0, 1)).unwrap(), 2).unwrap();
        assert_eq!(s.values, vec![q(1, 1); 3]);
        assert!(!s.convexity_applies);
    }

    #[test]
    fn convexity_examples() {
        let r = check_convexity(&[q(1, 1), q(1, 2), q(1, 4)]).unwrap();
        assert!(r.convex);
        assert_eq!(r.margins[0].margin, q(1, 4));
        assert_eq!(r.differences, vec![q(1, 2), q(1, 4)]);
        assert!(r.differences_nonincreasing);

        let r = check_convexity(&vec![q(3, 2); 3]).unwrap();
        assert!(r.convex);
        assert!(r.margins.iter().all(|m| m.margin.is_zero()));

        let r = check_convexity(&[q(102, 1), q(201, 2), q(401, 8)]).unwrap();
        assert!(!r.convex);
        assert_eq!(r.first_violation, Some(1));
        assert_eq!(r.margins[0].margin, q(-391, 8));
        assert!(!r.differences_nonincreasing);

        assert!(check_convexity(&[q(1, 1), q(0, 1)]).is_err());
    }

    #[test]
    fn convexity_csv() {
        let r = check_convexity(&[q(1, 1), q(1, 2), q(1, 4)]).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1,1/4\n");
    }

    #[test]
    fn favard_unit_square() {
        let est = favard(&four_corner(), 0, &QuadConfig::default()).unwrap();
        assert_eq!(est.status, QuadStatus::Converged);
        assert!((est.value - 8.0).abs() < 1e-9, "{est:?}");
        // same value without exploiting symmetry
        let plain = Ifs2D::new("k", four_corner().maps().to_vec(), four_corner().base().clone()).unwrap();
        let est = favard(&plain, 0, &QuadConfig::default()).unwrap();
        assert!((est.value - 8.0).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn favard_decreases() {
        let cfg = QuadConfig {
            tol: 1e-4,
            ..QuadConfig::default()
        };
        let f0 = favard(&four_corner(), 0, &cfg).unwrap().value;
        let f1 = favard(&four_corner(), 1, &cfg).unwrap().value;
        assert!(0.0 < f1 && f1 < f0);
    }

    #[test]
    fn favard_reports_unconverged() {
        let cfg = QuadConfig {
            tol: 0.0,
            max_refinements: 1,
            ..QuadConfig::default()
        };
        let est = favard(&four_corner(), 2, &cfg).unwrap();
        assert_eq!(est.status, QuadStatus::Unconverged);
        assert!(est.error_bar.is_finite());
    }

    #[test]
    fn special_slope_examples() {
        let k = four_corner();
        let v = special_slope_check(&k, &Direction::x(q(1, 2)).unwrap()).unwrap();
        assert!(v.pass);
        assert!(v.defect.is_zero());
        let v = special_slope_check(&k, &Direction::x(q(0, 1)).unwrap()).unwrap();
        assert!(!v.pass);
        assert_eq!(v.defect, q(1, 2));
        let v = special_slope_check(&k, &Direction::x(q(1, 1)).unwrap()).unwrap();
        assert!(!v.pass);
        assert_eq!(v.defect, q(1, 2));
    }

    #[test]
    fn lipschitz_small_grid() {
        let scan = lipschitz_scan(&four_corner(), 1000).unwrap();
        assert!(scan.samples.iter().all(|(_, g)| *g >= -1e-12));
        let (theta, dist) = scan.zero_near(0.5f64.atan()).unwrap();
        assert!(dist < 2.0 * scan.step, "{theta}");
        assert!(lipschitz_scan(&four_corner(), 2).is_err());
    }
}
