//! One function per subcommand. Each returns the serialized artifact and a
//! summary table.

use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{bail, Result};
use nalgebra::Complex;
use serde::Serialize;
use serde_json::json;

use levylab_core::dynamics::{
    essential_element_scan, f2_experiment, leader_experiment, lift_cover, lift_margin,
};
use levylab_core::folner::{
    almost_invariant_vector, folner_subset_search, levy_sequence_experiment, Strategy,
};
use levylab_core::group::{
    adjacent_swap_pair, ball_enumerate, haar_orthogonal, hamming, phi, regular_action_on, Ball,
    Letter,
};
use levylab_core::sphere::{levy_bound, ConcentrationCurve};
use levylab_core::subspace::{
    constant_angle_pair, isometry_check, principal_angles, proximity_mass,
};
use levylab_core::{
    rng, Cover, Error, Field, Frame, ReducedWord, SphericalSet, UnitaryAction, Verdict,
};

use crate::config::{Experiment, ExperimentConfig, Format, Params};
use crate::table::{short, Table};

/// Serialized output of one run.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub body: String,
    pub format: Option<Format>,
    pub summary: Table,
}

pub fn run(config: &ExperimentConfig) -> Result<Artifact> {
    let p = &config.params;
    match config.experiment {
        Experiment::AlphaExact => alpha_exact(p),
        Experiment::AlphaMc => alpha_mc(p),
        Experiment::LevyBound => levy_bound_cmd(p),
        Experiment::Angles => angles(p),
        Experiment::IsometryCheck => isometry(p),
        Experiment::Proximity => proximity(p),
        Experiment::Leader => leader(p),
        Experiment::F2 => f2(p),
        Experiment::LiftCover => lift(p),
        Experiment::Scan => scan(p),
        Experiment::AlmostInvariant => almost_invariant(p),
        Experiment::Folner => folner(p),
        Experiment::LevySequence => levy_sequence(p),
        Experiment::Hamming => hamming_cmd(p),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

fn allow(p: &Params, keys: &[&str]) -> Result<()> {
    if let Some(bad) = p.set_keys().into_iter().find(|k| !keys.contains(k)) {
        bail!(usage(format!(
            "flag `{bad}` does not apply here (accepted: {})",
            keys.join(", ")
        )));
    }
    Ok(())
}

fn json_only(p: &Params) -> Result<()> {
    if p.format == Some(Format::Csv) {
        bail!(usage("this subcommand only writes json"));
    }
    Ok(())
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    s
}

fn grid(eps: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        bail!(usage("steps must be positive"));
    }
    if steps == 1 {
        return Ok(vec![eps]);
    }
    Ok((0..steps)
        .map(|i| eps * i as f64 / (steps - 1) as f64)
        .collect())
}

fn curve_artifact(curve: &ConcentrationCurve, format: Option<Format>) -> Artifact {
    let format = format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Csv => curve.to_csv(),
        Format::Json => curve.to_json() + "\n",
    };
    let mut summary = Table::new(["epsilon", "alpha"]);
    for (e, a) in curve.epsilon.iter().zip(&curve.alpha) {
        summary.row([short(*e), short(*a)]);
    }
    Artifact {
        body,
        format: Some(format),
        summary,
    }
}

/// `--n` sphere dimension of `S^n`, grid of `--steps` points on `[0, --eps]`.
fn alpha_exact(p: &Params) -> Result<Artifact> {
    allow(p, &["n", "eps", "steps"])?;
    let curve = ConcentrationCurve::exact(
        p.n.unwrap_or(2),
        &grid(p.eps.unwrap_or(1.5), p.steps.unwrap_or(31))?,
    )?;
    Ok(curve_artifact(&curve, p.format))
}

/// Hemisphere of `S^{d-1}` sampled `--m` times.
fn alpha_mc(p: &Params) -> Result<Artifact> {
    allow(p, &["d", "eps", "steps", "m"])?;
    let d = p.d.unwrap_or(3);
    let set = SphericalSet::hemisphere(d, 0)?;
    let g = grid(p.eps.unwrap_or(1.5), p.steps.unwrap_or(31))?;
    let curve = ConcentrationCurve::empirical(&set, d, &g, p.m.unwrap_or(100_000), p.seed)?;
    Ok(curve_artifact(&curve, p.format))
}

/// A single value unless `--steps` asks for a curve.
fn levy_bound_cmd(p: &Params) -> Result<Artifact> {
    allow(p, &["n", "eps", "steps"])?;
    let n = p.n.unwrap_or(2);
    let eps = p.eps.unwrap_or(0.0);
    if let Some(steps) = p.steps {
        let curve = ConcentrationCurve::levy(n, &grid(eps, steps)?)?;
        return Ok(curve_artifact(&curve, p.format));
    }
    let value = levy_bound(n, eps)?;
    let body = match p.format {
        None => format!("{value}\n"),
        Some(Format::Csv) => format!("n,epsilon,bound\n{n},{eps},{value}\n"),
        Some(Format::Json) => pretty(&json!({ "n": n, "epsilon": eps, "bound": value })),
    };
    Ok(Artifact {
        body,
        format: p.format,
        summary: Table::pairs([
            ("n", n.to_string()),
            ("epsilon", short(eps)),
            ("bound", short(value)),
        ]),
    })
}

/// Random rank-`n` frames in dimension `d`, or a constant-angle pair when
/// `--theta` is given. `index` selects an independent pair.
fn frame_pair(p: &Params, index: usize) -> Result<(Frame, Frame)> {
    let d = p.d.unwrap_or(10);
    let n = p.n.unwrap_or(3);
    if let Some(theta) = p.theta {
        return Ok(constant_angle_pair(d, n, theta)?);
    }
    let mut rng = rng::sample_rng(p.seed, 0, index);
    let f1 = Frame::random(&mut rng, d, n, Field::Real)?;
    let f2 = Frame::random(&mut rng, d, n, Field::Real)?;
    Ok((f1, f2))
}

fn angles(p: &Params) -> Result<Artifact> {
    allow(p, &["d", "n", "theta"])?;
    let (f1, f2) = frame_pair(p, 0)?;
    let pad = principal_angles(&f1, &f2)?;
    let format = p.format.unwrap_or(Format::Json);
    let body = match format {
        Format::Json => pad.to_json(&f1, &f2)? + "\n",
        Format::Csv => {
            let mut s = String::from("index,angle,cosine\n");
            for (i, (a, c)) in pad.angles.iter().zip(&pad.cosines).enumerate() {
                let _ = writeln!(s, "{i},{a},{c}");
            }
            s
        }
    };
    let mut summary = Table::new(["index", "angle", "cosine"]);
    for (i, (a, c)) in pad.angles.iter().zip(&pad.cosines).enumerate() {
        summary.row([i.to_string(), short(*a), short(*c)]);
    }
    Ok(Artifact {
        body,
        format: Some(format),
        summary,
    })
}

/// `--k` independent frame pairs, `--m` samples each.
fn isometry(p: &Params) -> Result<Artifact> {
    allow(p, &["d", "n", "k", "m", "theta"])?;
    let pairs = p.k.unwrap_or(1);
    let m = p.m.unwrap_or(1000);
    let checks = (0..pairs)
        .map(|i| {
            let (f1, f2) = frame_pair(p, i)?;
            Ok(isometry_check(&f1, &f2, m, p.seed.wrapping_add(i as u64))?)
        })
        .collect::<Result<Vec<_>>>()?;
    let format = p.format.unwrap_or(Format::Json);
    let body = match format {
        Format::Json => pretty(&checks),
        Format::Csv => {
            let mut s = String::from("pair,rank,samples,violations,sphere_violations,worst_ratio,unitarity_residual,seed\n");
            for (i, c) in checks.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{i},{},{},{},{},{},{},{}",
                    c.rank,
                    c.samples,
                    c.violations,
                    c.sphere_violations,
                    c.worst_ratio,
                    c.unitarity_residual,
                    c.seed
                );
            }
            s
        }
    };
    let mut summary = Table::new(["pair", "rank", "violations", "worst ratio", "unitarity"]);
    for (i, c) in checks.iter().enumerate() {
        summary.row([
            i.to_string(),
            c.rank.to_string(),
            c.violations.to_string(),
            short(c.worst_ratio),
            short(c.unitarity_residual),
        ]);
    }
    Ok(Artifact {
        body,
        format: Some(format),
        summary,
    })
}

fn proximity(p: &Params) -> Result<Artifact> {
    allow(p, &["d", "n", "eps", "m", "theta"])?;
    let (f1, f2) = frame_pair(p, 0)?;
    let r = proximity_mass(
        &f1,
        &f2,
        p.eps.unwrap_or(0.5),
        p.m.unwrap_or(10_000),
        p.seed,
    )?;
    let format = p.format.unwrap_or(Format::Json);
    let body = match format {
        Format::Json => pretty(&r),
        Format::Csv => format!(
            "rank,epsilon,estimate,stderr,reference_bound,trace_condition_met,side_condition_met,samples,seed\n\
             {},{},{},{},{},{},{},{},{}\n",
            r.rank,
            r.epsilon,
            r.estimate,
            r.stderr,
            r.reference_bound,
            r.trace_condition_met,
            r.side_condition_met,
            r.samples,
            r.seed
        ),
    };
    Ok(Artifact {
        body,
        format: Some(format),
        summary: Table::pairs([
            ("rank", r.rank.to_string()),
            ("estimate", short(r.estimate)),
            ("stderr", short(r.stderr)),
            ("reference bound", short(r.reference_bound)),
            ("trace condition", r.trace_condition_met.to_string()),
            ("side condition", r.side_condition_met.to_string()),
        ]),
    })
}

fn verdict_table<'a>(
    reports: impl IntoIterator<Item = &'a levylab_core::EssentialityReport>,
) -> Table {
    let mut t = Table::new(["set", "verdict", "samples", "witness"]);
    for r in reports {
        t.row([
            r.label.clone(),
            r.verdict.as_str().to_string(),
            r.samples.to_string(),
            (r.verdict == Verdict::WitnessFound).to_string(),
        ]);
    }
    t
}

fn leader(p: &Params) -> Result<Artifact> {
    allow(p, &["d", "eps", "budget"])?;
    json_only(p)?;
    let r = leader_experiment(
        p.d.unwrap_or(300),
        p.eps.unwrap_or(0.05),
        p.budget.unwrap_or(100_000),
        p.seed,
    )?;
    Ok(Artifact {
        body: r.to_json() + "\n",
        format: Some(Format::Json),
        summary: verdict_table([&r.a, &r.b]),
    })
}

fn f2(p: &Params) -> Result<Artifact> {
    allow(p, &["R", "eps", "k", "m", "budget"])?;
    json_only(p)?;
    let r = f2_experiment(
        p.r.unwrap_or(6),
        p.eps.unwrap_or(0.04),
        p.k.unwrap_or(16),
        p.m.unwrap_or(10_000),
        p.budget.unwrap_or(10_000),
        p.seed,
    )?;
    let mut summary = verdict_table([&r.a1, &r.a2]);
    summary.row([
        "A1 margin".to_string(),
        format!("{} violations", r.a1_check.violations),
        r.a1_check.samples.to_string(),
        format!("min mass {}", short(r.a1_check.min_mass)),
    ]);
    Ok(Artifact {
        body: r.to_json() + "\n",
        format: Some(Format::Json),
        summary,
    })
}

fn halves(d: usize) -> Result<Cover> {
    Ok(Cover::new(vec![
        SphericalSet::hemisphere(d, 0)?,
        SphericalSet::lower_hemisphere(d, 0)?,
    ]))
}

/// Hemisphere covers of `S^{d-1}` (`--d`) and `S^{n-1}` (`--n`) lifted to
/// the sphere of the direct sum.
fn lift(p: &Params) -> Result<Artifact> {
    allow(p, &["d", "n", "m", "eps"])?;
    json_only(p)?;
    let (d1, d2) = (p.d.unwrap_or(2), p.n.unwrap_or(2));
    let cover = lift_cover(&halves(d1)?, Some(&halves(d2)?), d1, d2)?;
    let coverage = cover.coverage_check(d1 + d2, p.m.unwrap_or(100_000), p.seed)?;
    let sets: Vec<&str> = cover.sets.iter().map(|s| s.label()).collect();
    let delta = p.eps.map(|e| 0.99 * lift_margin(e));
    let body = pretty(&json!({
        "d1": d1,
        "d2": d2,
        "sets": sets,
        "coverage": coverage,
        "epsilon": p.eps,
        "delta": delta,
    }));
    let mut pairs = vec![
        ("sets", sets.len().to_string()),
        ("samples", coverage.samples.to_string()),
        ("uncovered", coverage.uncovered.to_string()),
    ];
    if let Some(delta) = delta {
        pairs.push(("delta", short(delta)));
    }
    Ok(Artifact {
        body,
        format: Some(Format::Json),
        summary: Table::pairs(pairs),
    })
}

/// Hemisphere cover of `S^{d-1}` against `--group`: `z2` (`{1, -1}`),
/// `cyclic` (all coordinate rotations) or `haar` (identity plus `--k`
/// Haar-random orthogonal maps).
fn scan(p: &Params) -> Result<Artifact> {
    allow(p, &["d", "eps", "budget", "group", "k"])?;
    let d = p.d.unwrap_or(3);
    let group = p.group.as_deref().unwrap_or("z2");
    if group != "haar" && p.k.is_some() {
        bail!(usage("--k only applies to --group haar"));
    }
    let transforms = match group {
        "z2" => vec![
            UnitaryAction::identity(d, Field::Real),
            UnitaryAction::scalar("-1", d, Field::Real, Complex::new(-1.0, 0.0))?,
        ],
        "cyclic" => {
            let shift = UnitaryAction::cyclic_shift(d, Field::Real)?;
            let mut dense = UnitaryAction::identity(d, Field::Real).to_dense();
            let step = shift.to_dense();
            (0..d)
                .map(|i| {
                    let g = UnitaryAction::dense(format!("shift^{i}"), dense.clone(), Field::Real);
                    dense = &step * &dense;
                    g
                })
                .collect::<levylab_core::Result<Vec<_>>>()?
        }
        "haar" => {
            let mut gs = vec![UnitaryAction::identity(d, Field::Real)];
            for i in 0..p.k.unwrap_or(3) {
                let mut r = rng::sample_rng(p.seed, 9, i);
                gs.push(UnitaryAction::dense(
                    format!("u{}", i + 1),
                    haar_orthogonal(&mut r, d),
                    Field::Real,
                )?);
            }
            gs
        }
        other => bail!(usage(format!("unknown group `{other}` (z2, cyclic, haar)"))),
    };
    let entries = essential_element_scan(
        &halves(d)?,
        &transforms,
        p.eps.unwrap_or(0.1),
        p.budget.unwrap_or(10_000),
        p.seed,
    )?;
    let format = p.format.unwrap_or(Format::Json);
    let body = match format {
        Format::Json => pretty(&entries),
        Format::Csv => {
            let mut s = String::from("set,essential,verdict,samples,seed\n");
            for e in &entries {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    e.set,
                    e.essential,
                    e.report.verdict.as_str(),
                    e.report.samples,
                    e.report.seed
                );
            }
            s
        }
    };
    Ok(Artifact {
        body,
        format: Some(format),
        summary: verdict_table(entries.iter().map(|e| &e.report)),
    })
}

fn free_generators(ball: &Arc<Ball>) -> Vec<UnitaryAction> {
    [Letter::A, Letter::B]
        .into_iter()
        .map(|l| regular_action_on(&ReducedWord::letter(l), ball.clone()))
        .collect()
}

/// `--group cyclic` (shift on `C^d`), `z2` (`{1, -1}` on `R^d`) or `f2`
/// (`a, b` on `l_2(B_R)`, vectors supported on `B_{R-1}`).
fn almost_invariant(p: &Params) -> Result<Artifact> {
    json_only(p)?;
    let group = p.group.as_deref().unwrap_or("cyclic");
    let (actions, support) = match group {
        "cyclic" | "z2" => {
            allow(p, &["group", "d"])?;
            let d = p.d.unwrap_or(12);
            if group == "cyclic" {
                (vec![UnitaryAction::cyclic_shift(d, Field::Complex)?], None)
            } else {
                let minus = UnitaryAction::scalar("-1", d, Field::Real, Complex::new(-1.0, 0.0))?;
                (vec![UnitaryAction::identity(d, Field::Real), minus], None)
            }
        }
        "f2" => {
            allow(p, &["group", "R"])?;
            let radius = p.r.unwrap_or(5);
            if radius == 0 {
                bail!(usage("radius must be positive"));
            }
            let ball = Arc::new(ball_enumerate(radius)?);
            let support: Vec<usize> = (0..Ball::prefix_len(radius - 1)).collect();
            (free_generators(&ball), Some(support))
        }
        other => bail!(usage(format!("unknown group `{other}` (cyclic, z2, f2)"))),
    };
    let r = almost_invariant_vector(&actions, support.as_deref(), p.seed)?;
    let mut summary = Table::new(["action", "residual"]);
    for (g, res) in actions.iter().zip(&r.residuals) {
        summary.row([g.label().to_string(), short(*res)]);
    }
    summary.row(["max".to_string(), short(r.residual)]);
    summary.row(["rayleigh".to_string(), short(r.rayleigh)]);
    Ok(Artifact {
        body: pretty(&r),
        format: Some(Format::Json),
        summary,
    })
}

/// `--group shift` (cyclic shift of `--d` points, rank `--n`) or `f2`
/// (`a, b` on `B_R`, subsets of `B_{R-1}`).
fn folner(p: &Params) -> Result<Artifact> {
    let group = p.group.as_deref().unwrap_or("shift");
    let strategy: Strategy = p.strategy.as_deref().unwrap_or("greedy-swap").parse()?;
    let (actions, candidates, n) = match group {
        "shift" => {
            allow(p, &["group", "d", "n", "strategy"])?;
            let d = p.d.unwrap_or(100);
            (
                vec![UnitaryAction::cyclic_shift(d, Field::Real)?],
                None,
                p.n.unwrap_or(20),
            )
        }
        "f2" => {
            allow(p, &["group", "R", "n", "strategy"])?;
            let radius = p.r.unwrap_or(3);
            if radius == 0 {
                bail!(usage("radius must be positive"));
            }
            let ball = Arc::new(ball_enumerate(radius)?);
            let pool: Vec<usize> = (0..Ball::prefix_len(radius - 1)).collect();
            (free_generators(&ball), Some(pool), p.n.unwrap_or(4))
        }
        other => bail!(usage(format!("unknown group `{other}` (shift, f2)"))),
    };
    let r = folner_subset_search(&actions, candidates.as_deref(), n, strategy, p.seed)?;
    let format = p.format.unwrap_or(Format::Json);
    let body = match format {
        Format::Json => r.to_json() + "\n",
        Format::Csv => {
            let mut s = String::from("generator,count,ratio\n");
            for ((g, c), q) in r.generators.iter().zip(&r.counts).zip(&r.ratios) {
                let _ = writeln!(s, "{g},{c},{q}");
            }
            s
        }
    };
    let mut summary = Table::new(["generator", "count", "ratio"]);
    for ((g, c), q) in r.generators.iter().zip(&r.counts).zip(&r.ratios) {
        summary.row([g.clone(), c.to_string(), short(*q)]);
    }
    Ok(Artifact {
        body,
        format: Some(format),
        summary,
    })
}

/// Coordinate frames of rank `d/8, d/4, d/2, d` in `R^d` under `--group z2`
/// or `shift`, with the hemisphere cover.
fn levy_sequence(p: &Params) -> Result<Artifact> {
    allow(p, &["d", "eps", "m", "budget", "group"])?;
    json_only(p)?;
    let d = p.d.unwrap_or(40);
    let mut ranks: Vec<usize> = [d / 8, d / 4, d / 2, d]
        .into_iter()
        .filter(|&n| n > 0)
        .collect();
    ranks.dedup();
    let frames = ranks
        .iter()
        .map(|&n| Frame::coordinate(d, &(0..n).collect::<Vec<_>>(), Field::Real))
        .collect::<levylab_core::Result<Vec<_>>>()?;
    let actions = match p.group.as_deref().unwrap_or("z2") {
        "z2" => vec![
            UnitaryAction::identity(d, Field::Real),
            UnitaryAction::scalar("-1", d, Field::Real, Complex::new(-1.0, 0.0))?,
        ],
        "shift" => vec![UnitaryAction::cyclic_shift(d, Field::Real)?],
        other => bail!(usage(format!("unknown group `{other}` (z2, shift)"))),
    };
    let r = levy_sequence_experiment(
        &frames,
        &actions,
        &halves(d)?,
        p.eps.unwrap_or(0.1),
        p.m.unwrap_or(4000),
        p.budget.unwrap_or(4000),
        p.seed,
    )?;
    let mut summary = Table::new(["rank", "max ratio", "measures"]);
    for l in &r.levels {
        let max = l.ratios.iter().copied().fold(0.0, f64::max);
        let measures: Vec<String> = l.measures.iter().map(|m| short(*m)).collect();
        summary.row([l.rank.to_string(), short(max), measures.join(" ")]);
    }
    Ok(Artifact {
        body: r.to_json() + "\n",
        format: Some(Format::Json),
        summary,
    })
}

/// The adjacent-transposition pair `sigma, eta` on `--n` points.
fn hamming_cmd(p: &Params) -> Result<Artifact> {
    allow(p, &["n"])?;
    let n = p.n.unwrap_or(10);
    let (sigma, eta) = adjacent_swap_pair(n)?;
    let h = hamming(&sigma, &eta)?;
    let first = phi(&sigma, &eta)?;
    let second = phi(&sigma.compose(&eta)?, &eta.compose(&eta)?)?;
    let body = match p.format {
        None => format!("φ(σ,η) = {first}\nφ(ση,η²) = {second}\n"),
        Some(Format::Csv) => format!("n,hamming,phi,phi_product\n{n},{h},{first},{second}\n"),
        Some(Format::Json) => pretty(&json!({
            "n": n,
            "hamming": h,
            "phi": first.to_string(),
            "phi_product": second.to_string(),
        })),
    };
    Ok(Artifact {
        body,
        format: p.format,
        summary: Table::pairs([
            ("n", n.to_string()),
            ("hamming", h.to_string()),
            ("φ(σ,η)", first.to_string()),
            ("φ(ση,η²)", second.to_string()),
        ]),
    })
}
