//! `favard-lab`: command-line front end for favard-core.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use favard_core::{Chart, Rational};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "favard-lab",
    version,
    about = "Projection and Favard lengths of planar self-similar sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "FAVARD_LAB_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SystemArgs {
    /// Built-in system: four-corner, sparse-corner-<k>, sierpinski-gasket.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,

    /// System config file.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Directory for CSV/JSON output and manifest.json.
    #[arg(long, default_value = "favard-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DirectionArgs {
    /// Rational slope "p/q" in the chosen chart, |slope| <= 1.
    #[arg(long, conflicts_with = "angle", allow_hyphen_values = true)]
    pub slope: Option<Rational>,

    /// Chart for --slope: x (p = x + t y) or y (p = y + u x).
    #[arg(long, default_value = "x")]
    pub chart: Chart,

    /// Angle in radians, snapped to a rational slope.
    #[arg(long, allow_negative_numbers = true)]
    pub angle: Option<f64>,

    /// Largest slope denominator when snapping --angle.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_denom: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact projected lengths alpha_0..alpha_N in one direction.
    Alpha {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        dir: DirectionArgs,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Also write every generation's intervals.
        #[arg(long)]
        generations: bool,
    },
    /// Exact second-difference test of the alpha sequence.
    Convexity {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        dir: DirectionArgs,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Favard length of generation n by quadrature over all angles.
    Favard {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Gauss-Legendre points per panel.
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, default_value_t = 4)]
        panels: usize,
        #[arg(long, default_value_t = 10)]
        max_refinements: usize,
    },
    /// Lower-bound certificate near the special direction.
    Certificate {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        dir: DirectionArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Cross-check each grid point against its exact generation-n length.
        #[arg(long)]
        verify: bool,
    },
    /// Check that the first-generation pieces tile an interval.
    SpecialAngle {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        dir: DirectionArgs,
        /// Generations to list.
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Sampled slope of alpha_0 - alpha_1 over all angles.
    Lipschitz {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 10_000)]
        nodes: usize,
        /// Report the zero nearest this angle (default atan(1/2)).
        #[arg(long)]
        target: Option<f64>,
    },
    /// Neighborhood decay series and exponent fit.
    Dimension {
        #[command(flatten)]
        sys: SystemArgs,
        /// Explicit scales, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to"])]
        scales: Vec<Rational>,
        /// Scales max_ratio^j for j = from..=to.
        #[arg(long, default_value_t = 3)]
        from: u32,
        #[arg(long, default_value_t = 6)]
        to: u32,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 256)]
        panels: usize,
        #[arg(long, allow_negative_numbers = true)]
        window_lo: Option<f64>,
        #[arg(long)]
        window_hi: Option<f64>,
        /// Skip the neighbouring-generation totals.
        #[arg(long)]
        no_sensitivity: bool,
    },
    /// Interval cover of the r-neighborhood of a projection.
    Cover {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        dir: DirectionArgs,
        #[arg(long)]
        r: Rational,
        /// Hölder exponents in (0, 1), comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        exponents: Vec<f64>,
        /// Generation to use instead of the matched one.
        #[arg(long)]
        generation: Option<usize>,
    },
    /// Neighborhood sequence of a finite point set.
    Counterexample {
        /// Point file, one rational per line.
        #[arg(long, conflicts_with = "stage")]
        points: Option<PathBuf>,
        /// Lattice stage "center,spacing,extent"; repeatable.
        #[arg(long)]
        stage: Vec<String>,
        #[arg(long, default_value = "4")]
        base: Rational,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value = "favard-out")]
        out: PathBuf,
    },
    /// Monte-Carlo needle estimate of the Favard length.
    Needle {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        strip_halfwidth: Option<f64>,
        /// Also run quadrature and report the deviation in standard errors.
        #[arg(long)]
        compare: bool,
    },
    /// Ratio sum, nesting and cylinder counts.
    Validate {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 4)]
        display_depth: usize,
    },
    /// List presets, or print one in config format.
    Presets {
        #[arg(long, value_name = "NAME")]
        dump: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(1);
    }
    match commands::run(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
