use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::ifs::Ifs2D;
use crate::projection::{project_ifs, Direction, Generations, DEFAULT_MAX_DENOM, DEFAULT_SIZE_CAP};

#[derive(Clone, Debug, Serialize)]
pub struct CertificateEntry {
    pub direction: Direction,
    pub alpha0: Rational,
    pub alpha1: Rational,
    /// `alpha0 - alpha1` (sheared).
    pub defect: Rational,
    /// Iterated-convexity lower bound `alpha0 - n * defect` on the sheared `alpha_n`.
    pub lower: Rational,
    /// `lower * scale`, the bound on the true projected length.
    pub lower_true: f64,
    /// Exact comparison `lower * scale >= 1/2`.
    pub pass: bool,
    /// Computed sheared `alpha_n`, when soundness checking was requested.
    pub alpha_n: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CertificateStatus {
    Pass,
    Fail { witness: Direction },
}

/// Grid certificate for `Fav(K_n) >= 1/(40 n)`.
///
/// Certified at grid resolution: each grid direction is checked exactly,
/// directions between grid points are covered only by the separate
/// Lipschitz evidence.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub special: Direction,
    pub center: f64,
    pub half_width: f64,
    pub grid: Vec<CertificateEntry>,
    /// `window length * 1/2 = 1/(40 n)`.
    pub claimed_bound: f64,
    pub claimed_bound_exact: Rational,
    pub status: CertificateStatus,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.status == CertificateStatus::Pass
    }

    /// CSV rows `slope,alpha0,alpha1,lower,pass` (no header).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.grid {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.direction.slope(),
                e.alpha0,
                e.alpha1,
                e.lower,
                e.pass
            )?;
        }
        Ok(())
    }
}

pub const CERTIFICATE_CSV_HEADER: &str = "slope,alpha0,alpha1,lower,pass";

/// Checks, on `grid_count` directions spanning the angular window of length
/// `1/(20 n)` centred on `special`, that iterated convexity forces
/// `alpha_n >= 1/2`.
///
/// Convexity makes the differences `alpha_{k-1} - alpha_k` nonincreasing, so
/// `alpha_n >= alpha_0 - n (alpha_0 - alpha_1)`. The comparison with `1/2`
/// is done exactly as `lower >= 0 && 4 lower^2 >= 1 + slope^2`.
pub fn lower_bound_certificate(
    ifs: &Ifs2D,
    special: &Direction,
    n: usize,
    grid_count: usize,
    verify_soundness: bool,
) -> Result<Certificate> {
    if !ifs.convexity_applies() {
        return Err(Error::Precondition(format!(
            "ratio sum is {}, convexity does not apply",
            ifs.ratio_sum()
        )));
    }
    if !ifs.nesting_passes() {
        return Err(Error::Precondition("nesting check failed".into()));
    }
    if n == 0 {
        return Err(Error::Precondition("certificate needs n >= 1".into()));
    }
    if grid_count == 0 {
        return Err(Error::Precondition("certificate needs a nonempty grid".into()));
    }
    let center = special.angle();
    let half_width = 1.0 / (40.0 * n as f64);
    let angles: Vec<f64> = if grid_count == 1 {
        vec![center]
    } else {
        (0..grid_count)
            .map(|j| center - half_width + 2.0 * half_width * j as f64 / (grid_count - 1) as f64)
            .collect()
    };
    let half = Rational::frac(1, 2);
    let grid = angles
        .par_iter()
        .map(|&theta| {
            // the special direction itself is kept exact rather than re-snapped
            let d = if (theta - center).abs() == 0.0 {
                special.clone()
            } else {
                Direction::from_angle(theta, DEFAULT_MAX_DENOM)?
            };
            let depth = if verify_soundness { n } else { 1 };
            let p = project_ifs(ifs, &d);
            let measures = Generations::new(&p, depth, DEFAULT_SIZE_CAP)
                .map(|g| g.map(|s| s.measure()))
                .collect::<Result<Vec<_>>>()?;
            let alpha0 = measures[0].clone();
            let alpha1 = measures[1].clone();
            let defect = &alpha0 - &alpha1;
            let lower = &alpha0 - Rational::integer(n as i64) * &defect;
            let pass = !lower.is_negative() && Rational::integer(4) * &lower * &lower >= d.scale_denominator_sq();
            let lower_true = lower.to_f64() * d.scale();
            let alpha_n = verify_soundness.then(|| measures[n].clone());
            Ok(CertificateEntry {
                direction: d,
                alpha0,
                alpha1,
                defect,
                lower,
                lower_true,
                pass,
                alpha_n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let status = match grid.iter().find(|e| !e.pass) {
        Some(e) => CertificateStatus::Fail {
            witness: e.direction.clone(),
        },
        None => CertificateStatus::Pass,
    };
    let claimed_bound_exact = Rational::frac(1, 20 * n as i64) * half;
    Ok(Certificate {
        n,
        special: special.clone(),
        center,
        half_width,
        grid,
        claimed_bound: claimed_bound_exact.to_f64(),
        claimed_bound_exact,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn special() -> Direction {
        Direction::x(Rational::frac(1, 2)).unwrap()
    }

    #[test]
    fn four_corner_n5() {
        let k = Ifs2D::preset("four-corner").unwrap();
        let c = lower_bound_certificate(&k, &special(), 5, 64, true).unwrap();
        assert!(c.passed());
        assert_eq!(c.claimed_bound_exact, Rational::frac(1, 200));
        assert_eq!(c.grid.len(), 64);
        for e in &c.grid {
            assert!(e.alpha_n.as_ref().unwrap() >= &e.lower);
            assert!((e.direction.angle() - c.center).abs() <= c.half_width + 1e-9);
        }
    }

    #[test]
    fn four_corner_n1() {
        let k = Ifs2D::preset("four-corner").unwrap();
        let c = lower_bound_certificate(&k, &special(), 1, 16, false).unwrap();
        assert!(c.passed());
        assert_eq!(c.claimed_bound_exact, Rational::frac(1, 40));
    }

    #[test]
    fn gasket_rejected() {
        let g = Ifs2D::preset("sierpinski-gasket").unwrap();
        assert!(matches!(
            lower_bound_certificate(&g, &special(), 3, 8, false),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn wrong_center_fails_with_witness() {
        // axis direction: alpha0 - alpha1 = 1/2, so at n = 4 the bound is negative
        let k = Ifs2D::preset("four-corner").unwrap();
        let axis = Direction::x(Rational::zero()).unwrap();
        let c = lower_bound_certificate(&k, &axis, 4, 5, false).unwrap();
        assert!(matches!(c.status, CertificateStatus::Fail { .. }));
    }

    #[test]
    fn csv_has_one_row_per_grid_point() {
        let k = Ifs2D::preset("four-corner").unwrap();
        let c = lower_bound_certificate(&k, &special(), 2, 3, false).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
