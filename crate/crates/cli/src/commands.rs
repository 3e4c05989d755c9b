use std::fs;
use std::io;

use favard_core::analysis::{CertificateStatus, ALPHA_CSV_HEADER, CERTIFICATE_CSV_HEADER, CONVEXITY_CSV_HEADER};
use favard_core::decay::{
    cover_stats_at, matched_generation, parse_point_set, point_set_sequence, quarter_lattice, write_decay_csv,
    write_neighborhood_csv, AngularWindow, Cover, COVER_CSV_HEADER, DECAY_CSV_HEADER, NEIGHBORHOOD_CSV_HEADER,
};
use favard_core::ifs::PRESET_NAMES;
use favard_core::projection::{GenerationSet, DEFAULT_SIZE_CAP, GENERATION_CSV_HEADER};
use favard_core::{
    alpha_sequence, decay_series, estimate_favard_mc, exponent_fit, favard, generation, lipschitz_scan,
    lower_bound_certificate, seesaw_builder, special_slope_check, Chart, DecayConfig, Direction, Error, Ifs2D,
    LatticeStage, NeedleConfig, QuadConfig, QuadStatus, Rational,
};
use serde_json::json;

use crate::output::Run;
use crate::{Command, DirectionArgs, SystemArgs};

pub struct Outcome {
    pub summary: String,
    pub code: u8,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Outcome { summary, code: 0 }
    }

    fn gated(summary: String, pass: bool) -> Self {
        Outcome {
            summary,
            code: if pass { 0 } else { 3 },
        }
    }
}

pub struct Failure {
    pub message: String,
    pub code: u8,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            code: 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SizeCap { .. } | Error::DegenerateFit(_) => 1,
            _ => 2,
        };
        Failure {
            message: e.to_string(),
            code,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            message: format!("i/o: {e}"),
            code: 1,
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn load_system(sys: &SystemArgs) -> Result<Ifs2D> {
    match (&sys.preset, &sys.config) {
        (_, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            Ok(Ifs2D::from_config_str(&text)?)
        }
        (Some(name), None) => Ok(Ifs2D::preset(name)?),
        (None, None) => Ok(Ifs2D::preset("four-corner")?),
    }
}

/// Direction from --slope/--angle, or `default` when neither is given.
fn resolve_direction(args: &DirectionArgs, default: Option<Direction>, run: &mut Run) -> Result<Direction> {
    if let Some(theta) = args.angle {
        let d = Direction::from_angle(theta, args.max_denom)?;
        run.note(
            "snapped_direction",
            json!({ "angle": theta, "chart": d.chart(), "slope": d.slope(), "snapped_angle": d.angle() }),
        );
        return Ok(d);
    }
    match (&args.slope, default) {
        (Some(s), _) => Ok(Direction::new(args.chart, s.clone())?),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(Failure::usage("one of --slope or --angle is required")),
    }
}

fn start(
    sys: &SystemArgs,
    name: &'static str,
    params: serde_json::Value,
    backend: &'static str,
) -> Result<(Ifs2D, Run)> {
    let ifs = load_system(sys)?;
    let mut run = Run::new(&sys.out, name, params, backend)?;
    run.note("system", ifs.name());
    Ok((ifs, run))
}

fn params(value: serde_json::Value, sys: &SystemArgs) -> serde_json::Value {
    let mut v = value;
    if let serde_json::Value::Object(m) = &mut v {
        m.insert("system".into(), serde_json::to_value(sys).unwrap_or_default());
    }
    v
}

fn special_default() -> Direction {
    favard_core::four_corner_special_direction()
}

pub fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Alpha {
            sys,
            dir,
            depth,
            generations,
        } => {
            let p = params(
                json!({ "direction": &dir, "depth": depth, "generations": generations }),
                &sys,
            );
            let (ifs, mut run) = start(&sys, "alpha", p, "exact")?;
            let d = resolve_direction(&dir, None, &mut run)?;
            let seq = alpha_sequence(&ifs, &d, depth)?;
            run.csv("alpha.csv", ALPHA_CSV_HEADER, |w| seq.write_csv(w))?;
            if generations {
                let sets = (0..=depth)
                    .map(|n| generation(&ifs, &d, n, DEFAULT_SIZE_CAP))
                    .collect::<favard_core::Result<Vec<GenerationSet>>>()?;
                run.csv("generations.csv", GENERATION_CSV_HEADER, |w| {
                    sets.iter().try_for_each(|g| g.write_csv(&mut *w))
                })?;
            }
            run.finish()?;
            let last = seq.values.last().expect("generation 0");
            Ok(Outcome::ok(format!(
                "alpha {} {d}: alpha_0 = {} alpha_{depth} = {} (true {:.9})",
                ifs.name(),
                seq.values[0],
                last,
                seq.true_values().last().copied().unwrap_or(0.0)
            )))
        }
        Command::Convexity { sys, dir, depth } => {
            if depth < 2 {
                return Err(Failure::usage("--depth must be at least 2"));
            }
            let p = params(json!({ "direction": &dir, "depth": depth }), &sys);
            let (ifs, mut run) = start(&sys, "convexity", p, "exact")?;
            let d = resolve_direction(&dir, None, &mut run)?;
            let seq = alpha_sequence(&ifs, &d, depth)?;
            let report = seq.convexity()?;
            run.csv("alpha.csv", ALPHA_CSV_HEADER, |w| seq.write_csv(w))?;
            run.csv("convexity.csv", CONVEXITY_CSV_HEADER, |w| report.write_csv(w))?;
            let applies = ifs.convexity_applies();
            run.json(
                "convexity.json",
                &json!({ "convexity_applies": applies, "report": &report }),
            )?;
            run.finish()?;
            let verdict = if report.convex { "PASS" } else { "FAIL" };
            let mode = if applies { "" } else { " (exploratory: ratio sum != 1)" };
            let summary = format!(
                "convexity {} {d} depth {depth}: {verdict}, {} margins, first violation {:?}{mode}",
                ifs.name(),
                report.margins.len(),
                report.first_violation
            );
            Ok(Outcome::gated(summary, report.convex || !applies))
        }
        Command::Favard {
            sys,
            n,
            tol,
            order,
            panels,
            max_refinements,
        } => {
            let p = params(
                json!({ "n": n, "tol": tol, "order": order, "panels": panels, "max_refinements": max_refinements }),
                &sys,
            );
            let (ifs, mut run) = start(&sys, "favard", p, "float")?;
            let cfg = QuadConfig {
                order,
                initial_panels: panels,
                max_refinements,
                tol,
                ..QuadConfig::default()
            };
            let est = favard(&ifs, n, &cfg)?;
            run.json("favard.json", &est)?;
            run.finish()?;
            let summary = format!(
                "favard {} n={n}: {:.10} +- {:.2e} ({:?}, {} panels)",
                ifs.name(),
                est.value,
                est.error_bar,
                est.status,
                est.panels
            );
            Ok(Outcome {
                summary,
                code: if est.status == QuadStatus::Converged { 0 } else { 1 },
            })
        }
        Command::Certificate {
            sys,
            dir,
            n,
            grid,
            verify,
        } => {
            let p = params(
                json!({ "direction": &dir, "n": n, "grid": grid, "verify": verify }),
                &sys,
            );
            let (ifs, mut run) = start(&sys, "certificate", p, "exact")?;
            let special = resolve_direction(&dir, Some(special_default()), &mut run)?;
            let cert = lower_bound_certificate(&ifs, &special, n, grid, verify)?;
            run.csv("certificate.csv", CERTIFICATE_CSV_HEADER, |w| cert.write_csv(w))?;
            run.json("certificate.json", &cert)?;
            run.finish()?;
            let verdict = match &cert.status {
                CertificateStatus::Pass => "PASS".to_string(),
                CertificateStatus::Fail { .. } => "FAIL".to_string(),
            };
            let summary = format!(
                "certificate {} n={n} grid={grid}: {verdict}, claimed_bound {} = {}",
                ifs.name(),
                cert.claimed_bound_exact,
                cert.claimed_bound
            );
            Ok(Outcome::gated(summary, cert.passed()))
        }
        Command::SpecialAngle { sys, dir, depth } => {
            let p = params(json!({ "direction": &dir, "depth": depth }), &sys);
            let (ifs, mut run) = start(&sys, "special-angle", p, "exact")?;
            let d = resolve_direction(&dir, Some(special_default()), &mut run)?;
            let verdict = special_slope_check(&ifs, &d)?;
            let sets = (0..=depth)
                .map(|n| generation(&ifs, &d, n, DEFAULT_SIZE_CAP))
                .collect::<favard_core::Result<Vec<GenerationSet>>>()?;
            run.csv("generations.csv", GENERATION_CSV_HEADER, |w| {
                sets.iter().try_for_each(|g| g.write_csv(&mut *w))
            })?;
            run.json("special_angle.json", &verdict)?;
            run.finish()?;
            let summary = format!(
                "special-angle {} {d}: {}, defect {}",
                ifs.name(),
                if verdict.pass { "PASS" } else { "FAIL" },
                verdict.defect
            );
            Ok(Outcome::gated(summary, verdict.pass))
        }
        Command::Lipschitz { sys, nodes, target } => {
            let target = target.unwrap_or_else(|| 0.5f64.atan());
            let p = params(json!({ "nodes": nodes, "target": target }), &sys);
            let (ifs, mut run) = start(&sys, "lipschitz", p, "float")?;
            let scan = lipschitz_scan(&ifs, nodes)?;
            run.csv("lipschitz.csv", "theta,difference", |w| {
                scan.samples.iter().try_for_each(|(t, v)| writeln!(w, "{t},{v}"))
            })?;
            let near = scan.zero_near(target);
            run.json(
                "lipschitz.json",
                &json!({
                    "nodes": scan.nodes,
                    "step": scan.step,
                    "sup_slope": scan.sup_slope,
                    "sup_at": scan.sup_at,
                    "min_value": scan.min_value,
                    "argmin": scan.argmin,
                    "zeros": scan.zeros,
                    "zero_near_target": near,
                }),
            )?;
            run.finish()?;
            let near = near.map_or("none".to_string(), |(z, _)| {
                format!("{z:.6} (off by {:.2e})", (z - target).abs())
            });
            Ok(Outcome::ok(format!(
                "lipschitz {} nodes={nodes}: sup slope {:.6} at {:.6}, zero near target {near}",
                ifs.name(),
                scan.sup_slope,
                scan.sup_at
            )))
        }
        Command::Dimension {
            sys,
            scales,
            from,
            to,
            order,
            panels,
            window_lo,
            window_hi,
            no_sensitivity,
        } => {
            let p = params(
                json!({
                    "scales": &scales, "from": from, "to": to, "order": order, "panels": panels,
                    "window_lo": window_lo, "window_hi": window_hi, "sensitivity": !no_sensitivity,
                }),
                &sys,
            );
            let (ifs, mut run) = start(&sys, "dimension", p, "float")?;
            let scales = if scales.is_empty() {
                if from > to {
                    return Err(Failure::usage("--from must not exceed --to"));
                }
                (from..=to).map(|j| ifs.max_ratio().pow(j as i32)).collect()
            } else {
                scales
            };
            let default_window = AngularWindow::default();
            let window = AngularWindow {
                lo: window_lo.unwrap_or(default_window.lo),
                hi: window_hi.unwrap_or(default_window.hi),
            };
            if !(window.lo < window.hi) {
                return Err(Failure::usage("empty angular window"));
            }
            let cfg = DecayConfig {
                window,
                order,
                panels,
                sensitivity: !no_sensitivity,
                ..DecayConfig::default()
            };
            let records = decay_series(&ifs, &scales, &cfg)?;
            run.csv("decay.csv", DECAY_CSV_HEADER, |w| write_decay_csv(&records, w))?;
            let fit = exponent_fit(&records)?;
            let dim = ifs.similarity_dimension();
            run.json(
                "dimension.json",
                &json!({ "fit": &fit, "records": &records, "similarity_dimension": dim }),
            )?;
            run.finish()?;
            Ok(Outcome::ok(format!(
                "dimension {}: s = {:.6}, bound 1 - s = {:.6} (similarity dimension {dim:.6}), residual {:.2e}",
                ifs.name(),
                fit.s,
                fit.dimension_bound,
                fit.residual
            )))
        }
        Command::Cover {
            sys,
            dir,
            r,
            exponents,
            generation,
        } => {
            let p = params(
                json!({ "direction": &dir, "r": &r, "exponents": &exponents, "generation": generation }),
                &sys,
            );
            let horizontal = Direction::new(Chart::X, Rational::zero())?;
            let backend = if dir.slope.as_ref().map_or(dir.angle.is_none(), Rational::is_zero) {
                "exact"
            } else {
                "float"
            };
            let (ifs, mut run) = start(&sys, "cover", p, backend)?;
            let d = resolve_direction(&dir, Some(horizontal), &mut run)?;
            let n = match generation {
                Some(n) => n,
                None => matched_generation(&ifs, &r)?,
            };
            let stats = cover_stats_at(&ifs, &d, &r, &exponents, n)?;
            run.csv("cover.csv", COVER_CSV_HEADER, |w| stats.write_csv(w))?;
            match &stats.cover {
                Cover::Exact(s) => run.csv("cover_intervals.csv", "lo,hi", |w| s.write_csv(w))?,
                Cover::Float(s) => run.csv("cover_intervals.csv", "lo,hi", |w| s.write_csv(w))?,
            }
            run.json("cover.json", &stats)?;
            run.finish()?;
            let sums: Vec<String> = stats
                .holder_sums
                .iter()
                .map(|h| format!("p={}: {:.12}", h.p, h.sum))
                .collect();
            Ok(Outcome::ok(format!(
                "cover {} {d} r={r} generation {n}: {} intervals, min length {}, {}",
                ifs.name(),
                stats.count,
                stats
                    .min_length_exact
                    .as_ref()
                    .map_or(stats.min_length.to_string(), |m| m.to_string()),
                sums.join(", ")
            )))
        }
        Command::Counterexample {
            points,
            stage,
            base,
            depth,
            out,
        } => {
            let p = json!({ "points": &points, "stage": &stage, "base": &base, "depth": depth, "out": &out });
            let mut run = Run::new(&out, "counterexample", p, "exact")?;
            let result = if let Some(path) = &points {
                let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                point_set_sequence(parse_point_set(&text)?, &base, depth)?
            } else {
                let stages = if stage.is_empty() {
                    vec![quarter_lattice()]
                } else {
                    stage.iter().map(|s| parse_stage(s)).collect::<Result<Vec<_>>>()?
                };
                run.note("stages", &stages);
                seesaw_builder(&stages, &base, depth)?
            };
            run.csv("neighborhood.csv", NEIGHBORHOOD_CSV_HEADER, |w| {
                write_neighborhood_csv(&result.sequence, w)
            })?;
            if let Some(c) = &result.convexity {
                run.csv("convexity.csv", CONVEXITY_CSV_HEADER, |w| c.write_csv(w))?;
            }
            run.json("counterexample.json", &result)?;
            run.finish()?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            let seq: Vec<String> = result.sequence.iter().map(|(_, m)| m.to_string()).collect();
            let verdict = match &result.convexity {
                Some(c) => match c.first_violation {
                    Some(k) => format!("not convex at k={k} (margin {})", c.margins[k - 1].margin),
                    None => "convex".to_string(),
                },
                None => "too short for convexity".to_string(),
            };
            Ok(Outcome::ok(format!(
                "counterexample {} points: [{}], {verdict}, {} sign changes",
                result.point_count,
                seq.join(", "),
                result.sign_changes
            )))
        }
        Command::Needle {
            sys,
            n,
            trials,
            seed,
            strip_halfwidth,
            compare,
        } => {
            let p = params(
                json!({ "n": n, "trials": trials, "seed": seed, "strip_halfwidth": strip_halfwidth, "compare": compare }),
                &sys,
            );
            let (ifs, mut run) = start(&sys, "needle", p, "float")?;
            let mut cfg = NeedleConfig::for_ifs(&ifs, n, trials, seed);
            if let Some(w) = strip_halfwidth {
                cfg.strip_halfwidth = w;
            }
            let est = estimate_favard_mc(&ifs, &cfg)?;
            let quad = if compare {
                Some(favard(
                    &ifs,
                    n,
                    &QuadConfig {
                        tol: 1e-5,
                        ..QuadConfig::default()
                    },
                )?)
            } else {
                None
            };
            let z = quad.as_ref().map(|q| (est.estimate - q.value) / est.se);
            run.json(
                "needle.json",
                &json!({ "config": &cfg, "estimate": &est, "quadrature": &quad, "z": z }),
            )?;
            run.finish()?;
            let cmp = match (&quad, z) {
                (Some(q), Some(z)) => format!(", quadrature {:.6} ({z:+.2} se)", q.value),
                _ => String::new(),
            };
            Ok(Outcome::ok(format!(
                "needle {} n={n}: {:.6} +- {:.6} ({} hits / {} trials){cmp}",
                ifs.name(),
                est.estimate,
                est.se,
                est.hits,
                est.trials
            )))
        }
        Command::Validate { sys, display_depth } => {
            let p = params(json!({ "display_depth": display_depth }), &sys);
            let (ifs, mut run) = start(&sys, "validate", p, "exact")?;
            let report = ifs.validate(display_depth);
            run.json("validation.json", &report)?;
            run.finish()?;
            Ok(Outcome::ok(format!(
                "validate {}: {} maps, ratio_sum {}, convexity_applies {}, nesting {}",
                report.name,
                report.maps,
                report.ratio_sum,
                report.convexity_applies,
                if report.nesting_pass { "pass" } else { "fail" }
            )))
        }
        Command::Presets { dump } => match dump {
            Some(name) => {
                let ifs = Ifs2D::preset(&name)?;
                Ok(Outcome::ok(ifs.to_config_string().trim_end().to_string()))
            }
            None => Ok(Outcome::ok(PRESET_NAMES.join("\n"))),
        },
    }
}

fn parse_stage(s: &str) -> Result<LatticeStage> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Failure::usage(format!("stage {s:?}: expected center,spacing,extent")));
    }
    let v = parts
        .iter()
        .map(|p| p.parse::<Rational>())
        .collect::<favard_core::Result<Vec<_>>>()?;
    Ok(LatticeStage::new(v[0].clone(), v[1].clone(), v[2].clone())?)
}
