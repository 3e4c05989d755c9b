//! Monte-Carlo Buffon-needle estimate of Favard length.
//!
//! Random lines `{x cos(theta) + y sin(theta) = c}` are drawn with `theta`
//! uniform on `[0, 2pi)` and `c` uniform on a strip of half-width `W` about
//! the center of the base; each line is tested against the generation
//! rectangles directly. Nothing here uses the interval engine.
//!
//! Generator: `rand_chacha::ChaCha8Rng` (rand_chacha 0.3), one stream per
//! batch of [`BATCH_SIZE`] trials, so results do not depend on thread count.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::Ifs2D;

pub const BATCH_SIZE: u64 = 1 << 16;

/// Largest generation the enumerating hit test accepts.
pub const MAX_GENERATION: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct NeedleConfig {
    pub trials: u64,
    pub seed: u64,
    /// Half-range `W` of the offset `c`; must cover the base's circumradius.
    pub strip_halfwidth: f64,
    pub generation: usize,
}

impl NeedleConfig {
    /// Config with the smallest admissible strip for `ifs`.
    pub fn for_ifs(ifs: &Ifs2D, generation: usize, trials: u64, seed: u64) -> Self {
        NeedleConfig {
            trials,
            seed,
            strip_halfwidth: ifs.base().circumradius(),
            generation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeedleEstimate {
    pub estimate: f64,
    pub se: f64,
    pub hits: u64,
    pub trials: u64,
    pub seed: u64,
}

struct Cylinders {
    maps: Vec<(f64, f64, f64)>,
    corners: [(f64, f64); 4],
    depth: usize,
    prune: bool,
}

impl Cylinders {
    fn new(ifs: &Ifs2D, depth: usize) -> Self {
        let maps = ifs
            .maps()
            .iter()
            .map(|m| {
                (
                    m.ratio().to_f64(),
                    m.translation().0.to_f64(),
                    m.translation().1.to_f64(),
                )
            })
            .collect();
        let corners = ifs.base().corners().map(|(x, y)| (x.to_f64(), y.to_f64()));
        // Children lie inside their parent only when the system is nested.
        Cylinders {
            maps,
            corners,
            depth,
            prune: ifs.nesting_passes(),
        }
    }

    fn rect_hit(&self, scale: f64, ox: f64, oy: f64, cos: f64, sin: f64, c: f64) -> bool {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(x, y) in &self.corners {
            let p = (scale * x + ox) * cos + (scale * y + oy) * sin;
            lo = lo.min(p);
            hi = hi.max(p);
        }
        lo <= c && c <= hi
    }

    #[allow(clippy::too_many_arguments)]
    fn hit(&self, level: usize, scale: f64, ox: f64, oy: f64, cos: f64, sin: f64, c: f64) -> bool {
        if level == self.depth {
            return self.rect_hit(scale, ox, oy, cos, sin, c);
        }
        if self.prune && !self.rect_hit(scale, ox, oy, cos, sin, c) {
            return false;
        }
        self.maps
            .iter()
            .any(|&(r, bx, by)| self.hit(level + 1, scale * r, scale * bx + ox, scale * by + oy, cos, sin, c))
    }
}

pub fn estimate_favard_mc(ifs: &Ifs2D, cfg: &NeedleConfig) -> Result<NeedleEstimate> {
    if cfg.trials == 0 {
        return Err(Error::Precondition("needle estimate needs at least one trial".into()));
    }
    let radius = ifs.base().circumradius();
    if !(cfg.strip_halfwidth >= radius * (1.0 - 1e-12)) {
        return Err(Error::Precondition(format!(
            "strip half-width {} is below the base circumradius {radius}",
            cfg.strip_halfwidth
        )));
    }
    if cfg.generation > MAX_GENERATION {
        return Err(Error::Precondition(format!(
            "generation {} exceeds {MAX_GENERATION}",
            cfg.generation
        )));
    }
    let cylinders = Cylinders::new(ifs, cfg.generation);
    let (cx, cy) = ifs.base().center_f64();
    let w = cfg.strip_halfwidth;
    let batches = cfg.trials.div_ceil(BATCH_SIZE);
    let tallies: Vec<u64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b);
            let count = BATCH_SIZE.min(cfg.trials - b * BATCH_SIZE);
            let mut hits = 0u64;
            for _ in 0..count {
                let theta: f64 = rng.gen::<f64>() * TAU;
                let offset: f64 = (2.0 * rng.gen::<f64>() - 1.0) * w;
                let (sin, cos) = theta.sin_cos();
                let c = offset + cx * cos + cy * sin;
                if cylinders.hit(0, 1.0, 0.0, 0.0, cos, sin, c) {
                    hits += 1;
                }
            }
            hits
        })
        .collect();
    let hits: u64 = tallies.iter().sum();
    let area = TAU * 2.0 * w;
    let p = hits as f64 / cfg.trials as f64;
    Ok(NeedleEstimate {
        estimate: area * p,
        se: area * (p * (1.0 - p) / cfg.trials as f64).sqrt(),
        hits,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}
