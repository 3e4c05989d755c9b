//! Property tests for the exact interval engine and the alpha sequences.

mod common;

use favard_core::decay::cover_stats_at;
use favard_core::exact::Endpoint;
use favard_core::{alpha_sequence, Chart, Direction, Ifs2D, Interval, IntervalSet, Rational};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-64i64..=64, 1i64..=16).prop_map(|(n, d)| Rational::frac(n, d))
}

fn interval() -> impl Strategy<Value = Interval<Rational>> {
    (rational(), 0i64..=32, 1i64..=16)
        .prop_map(|(lo, len, d)| Interval::new(lo.clone(), lo + Rational::frac(len, d)).unwrap())
}

fn raw_list() -> impl Strategy<Value = Vec<Interval<Rational>>> {
    prop::collection::vec(interval(), 0..24)
}

fn direction() -> impl Strategy<Value = Direction> {
    (any::<bool>(), 1i64..=50)
        .prop_flat_map(|(y, q)| (Just(y), -q..=q, Just(q)))
        .prop_map(|(y, p, q)| Direction::new(if y { Chart::Y } else { Chart::X }, Rational::frac(p, q)).unwrap())
}

fn point_in(set: &IntervalSet<Rational>, x: &Rational) -> bool {
    set.intervals().iter().any(|iv| iv.lo() <= x && x <= iv.hi())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn normalize_is_canonical_and_idempotent(raw in raw_list()) {
        let s = IntervalSet::normalize(raw.clone());
        for w in s.intervals().windows(2) {
            prop_assert!(w[0].hi() < w[1].lo());
        }
        prop_assert!(s.intervals().iter().all(|iv| iv.lo() < iv.hi()));
        prop_assert_eq!(IntervalSet::normalize(s.intervals().to_vec()), s.clone());
        // same point set: every raw endpoint of a nondegenerate raw interval is covered
        for iv in raw.iter().filter(|iv| !iv.is_degenerate()) {
            prop_assert!(point_in(&s, iv.lo()) && point_in(&s, iv.hi()));
        }
    }

    #[test]
    fn measure_ignores_order(raw in raw_list(), seed in any::<u64>()) {
        let mut shuffled = raw.clone();
        let n = shuffled.len();
        if n > 1 {
            for i in 0..n {
                let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) % n as u64) as usize;
                shuffled.swap(i, j);
            }
        }
        prop_assert_eq!(IntervalSet::normalize(raw).measure(), IntervalSet::normalize(shuffled).measure());
    }

    #[test]
    fn measure_monotone_under_inclusion(raw in raw_list(), extra in raw_list()) {
        let small = IntervalSet::normalize(raw.clone());
        let mut all = raw;
        all.extend(extra);
        let big = IntervalSet::normalize(all);
        prop_assert!(small.measure() <= big.measure());
        prop_assert!(big.contains_set(&small));
    }

    #[test]
    fn expansion_bounds(raw in raw_list(), r in (1i64..=8, 1i64..=16).prop_map(|(n, d)| Rational::frac(n, d))) {
        let s = IntervalSet::normalize(raw);
        let e = s.expand(&r).unwrap();
        let ceiling = s.measure() + Rational::integer(2) * &r * Rational::integer(s.count() as i64);
        prop_assert!(e.measure() >= s.measure());
        prop_assert!(e.count() <= s.count());
        prop_assert!(e.measure() <= ceiling.clone());
        // equality exactly when no two neighbourhoods overlap (touching is fine)
        let two_r = Rational::integer(2) * &r;
        let separated = s.intervals().windows(2).all(|w| w[1].lo() - w[0].hi() >= two_r);
        prop_assert_eq!(e.measure() == ceiling, separated);
        if s.intervals().windows(2).all(|w| w[1].lo() - w[0].hi() > two_r) {
            prop_assert_eq!(e.count(), s.count());
        }
    }

    #[test]
    fn affine_equivariance(raw in raw_list(), c in (1i64..=9, 1i64..=9), d in rational()) {
        let c = Rational::frac(c.0, c.1);
        let s = IntervalSet::normalize(raw);
        let image = IntervalSet::normalize(s.affine_image(&c, &d).into_intervals());
        prop_assert_eq!(image.measure(), &c * s.measure());
    }

    #[test]
    fn float_backend_tracks_exact(raw in raw_list()) {
        let exact = IntervalSet::normalize(raw.clone());
        let float = IntervalSet::normalize(
            raw.iter().map(|iv| Interval::new(iv.lo().to_f64(), iv.hi().to_f64()).unwrap()).collect(),
        );
        prop_assert!((exact.measure().to_f64() - float.measure()).abs() < 1e-9);
        prop_assert_eq!(exact.count(), float.count());
        prop_assert!(float.measure().approx() >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn four_corner_sequences_are_convex(d in direction(), depth in 2usize..=8) {
        let k = Ifs2D::preset("four-corner").unwrap();
        let seq = alpha_sequence(&k, &d, depth).unwrap();
        prop_assert!(seq.is_nonincreasing());
        let report = seq.convexity().unwrap();
        prop_assert!(report.convex, "{} {:?}", d, report.first_violation);
        prop_assert!(report.differences_nonincreasing);
        // iterated bound: alpha_n >= alpha_0 - n * (alpha_0 - alpha_1)
        let d1 = &seq.values[0] - &seq.values[1];
        for (n, v) in seq.values.iter().enumerate() {
            prop_assert!(v >= &(&seq.values[0] - Rational::integer(n as i64) * &d1));
        }
    }

    #[test]
    fn equal_ratio_sum_one_systems_are_convex(
        d in direction(),
        offsets in prop::collection::vec((0i64..=4, 0i64..=4), 3),
    ) {
        // three maps of ratio 1/3 with translations on a 1/6 grid inside the unit square
        let mut text = String::from("name = \"thirds\"\n");
        for (x, y) in offsets {
            text.push_str(&format!("map {{ ratio = \"1/3\", translate = [\"{x}/6\", \"{y}/6\"] }}\n"));
        }
        let ifs = Ifs2D::from_config_str(&text).unwrap();
        prop_assume!(ifs.nesting_passes());
        let seq = alpha_sequence(&ifs, &d, 6).unwrap();
        prop_assert!(seq.is_nonincreasing());
        prop_assert!(seq.convexity().unwrap().convex);
    }

    #[test]
    fn gasket_sequences_nonincreasing(d in direction()) {
        let g = Ifs2D::preset("sierpinski-gasket").unwrap();
        prop_assert!(alpha_sequence(&g, &d, 6).unwrap().is_nonincreasing());
    }

    #[test]
    fn holder_ladder_and_cover_floor(d in direction(), n in 1usize..=5) {
        let k = Ifs2D::preset("sparse-corner-8").unwrap();
        let r = Rational::frac(1, 2 * 8i64.pow(n as u32));
        let c = cover_stats_at(&k, &d, &r, &[0.2, 0.4, 0.6, 0.8], n).unwrap();
        prop_assert!(c.min_length_ok && c.count_ceiling_ok);
        prop_assert!(c.holder_sums.iter().all(|h| h.holder_ok));
        // lengths are at most 1 here, so the sums decrease in p
        for w in c.holder_sums.windows(2) {
            prop_assert!(w[1].sum <= w[0].sum * (1.0 + 1e-12));
        }
        // larger radius never adds components
        let c2 = cover_stats_at(&k, &d, &(Rational::integer(2) * &r), &[0.5], n).unwrap();
        prop_assert!(c2.count <= c.count);
        prop_assert!(c2.measure >= c.measure);
    }
}

#[test]
fn brute_force_agrees_on_random_directions() {
    let k = Ifs2D::preset("four-corner").unwrap();
    for (p, qd) in [(1, 7), (-3, 11), (5, 13)] {
        let d = Direction::x(Rational::frac(p, qd)).unwrap();
        let seq = alpha_sequence(&k, &d, 4).unwrap();
        assert_eq!(seq.values[4], common::brute_force_alpha(&k, &d, 4));
    }
}
