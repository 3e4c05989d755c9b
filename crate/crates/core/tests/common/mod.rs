//! Independent oracles shared by the integration tests. Nothing here goes
//! through `IntervalSet` or the generation engine.

#![allow(dead_code)]

use favard_core::{Direction, Ifs2D, Rational};

/// Sheared projection length of generation `n` by enumerating all `N^n`
/// cylinders and taking the union with a plain sweep.
pub fn brute_force_alpha(ifs: &Ifs2D, d: &Direction, n: usize) -> Rational {
    let corners = ifs.base().corners();
    let base: Vec<Rational> = corners.iter().map(|(x, y)| d.functional(x, y)).collect();
    let lo = base.iter().min().unwrap().clone();
    let hi = base.iter().max().unwrap().clone();
    // cylinders as (scale, shift) on the sheared line
    let mut cylinders = vec![(Rational::one(), Rational::zero())];
    for _ in 0..n {
        let mut next = Vec::with_capacity(cylinders.len() * ifs.len());
        for (s, c) in &cylinders {
            for m in ifs.maps() {
                let (bx, by) = m.translation();
                next.push((s * m.ratio(), s * d.functional(bx, by) + c));
            }
        }
        cylinders = next;
    }
    let mut intervals: Vec<(Rational, Rational)> = cylinders.iter().map(|(s, c)| (s * &lo + c, s * &hi + c)).collect();
    union_length(&mut intervals)
}

pub fn union_length(intervals: &mut [(Rational, Rational)]) -> Rational {
    intervals.sort();
    let mut total = Rational::zero();
    let mut current: Option<(Rational, Rational)> = None;
    for (a, b) in intervals.iter() {
        current = match current.take() {
            None => Some((a.clone(), b.clone())),
            Some((ca, cb)) if a <= &cb => Some((ca, if b > &cb { b.clone() } else { cb })),
            Some((ca, cb)) => {
                total = total + (cb - ca);
                Some((a.clone(), b.clone()))
            }
        };
    }
    if let Some((ca, cb)) = current {
        total = total + (cb - ca);
    }
    total
}

/// `|E(r)|` for a finite point set: `2r + sum_i min(gap_i, 2r)`.
pub fn gap_formula(points: &[Rational], r: &Rational) -> Rational {
    if points.is_empty() {
        return Rational::zero();
    }
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    let two_r = Rational::integer(2) * r;
    let gaps: Rational = pts.windows(2).map(|w| (&w[1] - &w[0]).min(two_r.clone())).sum();
    two_r + gaps
}

pub fn lattice(center: &Rational, spacing: &Rational, extent: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut k = Rational::zero();
    while &(&k * spacing) <= extent {
        out.push(center + &k * spacing);
        if !k.is_zero() {
            out.push(center - &k * spacing);
        }
        k = k + Rational::one();
    }
    out
}
