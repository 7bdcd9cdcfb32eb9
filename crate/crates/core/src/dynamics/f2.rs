//! Sets built from the prefix classes `W_n` in the regular representation
//! of the free group on `a, b`, truncated to a Cayley ball.
//!
//! Translated sets are kept symbolic: `g {||chi_M f|| <= t} = {||chi_{gM} f|| <= t}`
//! and the distance formulas for mask-norm sets are those of the full
//! `l_2(F_2)`, where every mask used here and its complement are infinite.
//! Candidate points are supported on `B_{R-1}`.

use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use super::{witness_search_targets, EssentialityReport, Metric, SampleDomain, SphericalSet};
use crate::error::{invalid, Result};
use crate::group::{ball_enumerate, regular_action_on, Ball, Letter, ReducedWord};
use crate::rng;
use crate::sphere::{random_unit, Field, UnitVector};

/// Norm threshold `1/3` defining `A_1` and `A_2`.
pub const F2_A1_THRESHOLD: f64 = 1.0 / 3.0;

/// Indices of `ball` words `w` with `g^-1 w` in `W_n`, i.e. the mask of `g W_n`.
fn translated_class(ball: &Ball, g: &ReducedWord, n: i64) -> Vec<usize> {
    let ginv = g.inverse();
    ball.words()
        .iter()
        .enumerate()
        .filter(|(_, w)| ginv.multiply(w).prefix_class() == n)
        .map(|(i, _)| i)
        .collect()
}

/// `2 sqrt(2)/3 - 1/3`: lower bound on `dist(A_1, b A_1)`.
pub fn f2_a1_margin() -> f64 {
    2.0 * 2f64.sqrt() / 3.0 - 1.0 / 3.0
}

#[derive(Debug, Clone, Serialize)]
pub struct A1Check {
    pub samples: usize,
    /// Samples with `||chi_{W_0} b f|| < 2/3`.
    pub violations: usize,
    pub min_mass: f64,
    /// Smallest `dist(b f, A_1)` observed.
    pub min_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BalancedProbe {
    /// `max_i dist(x, a^i A_2)` for `x` with equal mass on one word of each of
    /// `W_0, ..., W_k`.
    pub distance: f64,
    pub within_epsilon: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct F2Report {
    pub radius: usize,
    pub shifts: usize,
    pub epsilon: f64,
    pub a1: EssentialityReport,
    pub a2: EssentialityReport,
    pub a1_check: A1Check,
    /// Best `max_i dist(x, a^i A_2) - eps` seen by the search; negative
    /// values mean a witness.
    pub a2_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a2_probe: Option<BalancedProbe>,
}

impl F2Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs both halves of the cover `A_1 = {||chi_{W_0} f|| <= 1/3}`,
/// `A_2 = {||chi_{W_0} f|| >= 1/3}`.
///
/// `A_1` is tested against `b A_1`. `A_2` is tested against `a^i A_2`,
/// `i = 1..=k`. `m` sampled members of `A_1` are pushed through the
/// regular action of `b` on `B_R` to check the margin, and each witness
/// search gets `budget` samples.
pub fn f2_experiment(
    radius: usize,
    eps: f64,
    k: usize,
    m: usize,
    budget: usize,
    seed: u64,
) -> Result<F2Report> {
    if radius < 3 {
        return invalid(format!("ball radius must be at least 3 (got {radius})"));
    }
    if k == 0 {
        return invalid("shift count must be positive");
    }
    if (eps.is_nan() || eps < 0.0) || m == 0 {
        return invalid("need eps >= 0 and m >= 1");
    }
    let universe = Arc::new(ball_enumerate(radius)?);
    let support = ball_enumerate(radius - 1)?;
    let dim = support.len();
    let a = ReducedWord::letter(Letter::A);
    let b = ReducedWord::letter(Letter::B);
    let e = ReducedWord::identity();
    let domain = SampleDomain::full(dim);
    let t = F2_A1_THRESHOLD;

    // A_1 against b A_1
    let w0 = translated_class(&support, &e, 0);
    let targets = vec![
        SphericalSet::mask_norm_at_most("A1", w0.clone(), t).with_dim(dim),
        SphericalSet::mask_norm_at_most("b(A1)", translated_class(&support, &b, 0), t)
            .with_dim(dim),
    ];
    let mut a1 =
        witness_search_targets("A1", &targets, eps, Metric::Chordal, &domain, budget, seed)?;
    if 2.0 * eps <= f2_a1_margin() {
        a1 = a1.certify_empty(format!(
            "every f in A1 has ||chi_W0 b f|| >= ||chi_(F2 - W0) f|| >= 2 sqrt(2)/3, so dist(A1, b A1) >= \
             2 sqrt(2)/3 - 1/3 >= 2 eps = {}",
            2.0 * eps
        ))?;
    }

    // A_2 against a^i A_2; a^i W_0 = W_i
    let mut targets = vec![SphericalSet::mask_norm_at_least("A2", w0.clone(), t).with_dim(dim)];
    for i in 1..=k {
        let ai = a.pow(i as i64);
        targets.push(
            SphericalSet::mask_norm_at_least(
                format!("a^{i}(A2)"),
                translated_class(&support, &ai, 0),
                t,
            )
            .with_dim(dim),
        );
    }
    let mut a2 = witness_search_targets(
        "A2",
        &targets,
        eps,
        Metric::Chordal,
        &domain,
        budget,
        seed.wrapping_add(1),
    )?;
    let a2_margin = a2.best_distance - eps;
    let gap = t - 2.0 * eps;
    if gap > 0.0 && 1.0 / (k as f64).sqrt() < gap {
        a2 = a2.certify_empty(format!(
            "a point of every O_eps(a^i A2), i = 0..{k}, has ||chi_W_i x|| > 1/3 - eps on {} disjoint classes, \
             total mass > {} * (1/3 - eps)^2 >= 1 since 1/sqrt({k}) < 1/3 - 2 eps",
            k + 1,
            k + 1
        ))?;
    }
    let a2_probe = balanced_probe(&support, k).map(|x| {
        let distance = targets
            .iter()
            .map(|s| s.distance(&x).expect("exact"))
            .fold(0.0, f64::max);
        BalancedProbe {
            distance,
            within_epsilon: distance < eps,
        }
    });

    let a1_check = a1_margin_check(&universe, &w0, m, seed)?;
    Ok(F2Report {
        radius,
        shifts: k,
        epsilon: eps,
        a1,
        a2,
        a1_check,
        a2_margin,
        a2_probe,
    })
}

/// Unit vector with mass `1/(k+1)` on the shortest word of each `W_i`,
/// `i = 0..=k`, when all of them lie in the support.
fn balanced_probe(support: &Ball, k: usize) -> Option<UnitVector> {
    let mut x = DVector::zeros(support.len());
    let a = ReducedWord::letter(Letter::A);
    for i in 0..=k {
        let idx = support.index_of(&a.pow(i as i64))?;
        x[idx] = 1.0;
    }
    UnitVector::normalized(x, Field::Real).ok()
}

/// Samples `f = t u + sqrt(1 - t^2) v` with `t` uniform on `[0, 1/3]`, `u`
/// uniform on the `W_0` coordinates of `B_{R-1}` and `v` uniform on the rest,
/// applies the regular action of `b` on `B_R` and records
/// `||chi_{W_0} b f||` and `dist(b f, A_1)`.
fn a1_margin_check(
    universe: &Arc<Ball>,
    w0_support: &[usize],
    m: usize,
    seed: u64,
) -> Result<A1Check> {
    let inner = Ball::prefix_len(universe.radius() - 1);
    let rest: Vec<usize> = (0..inner)
        .filter(|i| w0_support.binary_search(i).is_err())
        .collect();
    let b_action = regular_action_on(&ReducedWord::letter(Letter::B), universe.clone());
    let w0_universe = translated_class(universe, &ReducedWord::identity(), 0);
    let a1 = SphericalSet::mask_norm_at_most("A1", w0_universe.clone(), F2_A1_THRESHOLD);
    let n = universe.len();
    let results = rng::par_samples(m, seed, 2, |r, _| {
        let t = F2_A1_THRESHOLD * rand::Rng::random::<f64>(r);
        let u = random_unit(r, w0_support.len());
        let v = random_unit(r, rest.len());
        let mut f = DVector::zeros(n);
        for (k, &i) in w0_support.iter().enumerate() {
            f[i] = t * u[k];
        }
        let s = (1.0 - t * t).sqrt();
        for (k, &i) in rest.iter().enumerate() {
            f[i] = s * v[k];
        }
        let bf = b_action.apply_coords(&f)?;
        let mass = w0_universe
            .iter()
            .map(|&i| bf[i] * bf[i])
            .sum::<f64>()
            .sqrt();
        let dist = a1
            .distance(&UnitVector::from_unit_unchecked(bf, Field::Real))
            .expect("exact");
        Ok((mass, dist))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(A1Check {
        samples: m,
        violations: results.iter().filter(|r| r.0 < 2.0 / 3.0).count(),
        min_mass: results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
        min_distance: results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
    })
}
