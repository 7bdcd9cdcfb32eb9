//! The three-disjoint-masks counterexample on `S^{d-1}`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use super::{witness_search_targets, EssentialityReport, Metric, SampleDomain, SphericalSet};
use crate::error::{invalid, Result};
use crate::group::leader_projection_mass;
use crate::rng;
use crate::sphere::{random_unit, Field, UnitVector};

/// `sqrt(2)/2 - sqrt(3)/3`: below this radius the certificate applies.
pub fn leader_threshold() -> f64 {
    FRAC_1_SQRT_2 - 3f64.sqrt() / 3.0
}

/// Pigeonhole tally for `min_i ||p_{E_i} x||^2 <= 1/3`.
#[derive(Debug, Clone, Serialize)]
pub struct PigeonholeCheck {
    pub samples: usize,
    pub violations: usize,
    /// Largest observed `min_i ||p_{E_i} x||^2`.
    pub max_min_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeaderReport {
    pub d: usize,
    pub threshold: f64,
    pub a: EssentialityReport,
    pub b: EssentialityReport,
    pub pigeonhole: PigeonholeCheck,
}

impl LeaderReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Residue classes mod 3 of `0..d`.
pub fn residue_masks(d: usize) -> [Vec<usize>; 3] {
    [0, 1, 2].map(|r| (r..d).step_by(3).collect())
}

/// Runs both halves of the cover `A = {||p_E x|| >= sqrt(2)/2}`,
/// `B = {||p_E x|| <= sqrt(2)/2}` through a witness search with `budget`
/// samples each and attaches the pigeonhole certificate when `eps` is below
/// [`leader_threshold`].
///
/// The bijections carrying `E` (for `A`) or its complement (for `B`) onto
/// `E_i` have no finite-dimensional unitary realization, so the transformed
/// sets are built directly: both `g_i(A)` and `h_i(B)` equal
/// `{||p_{E_i} x|| >= sqrt(2)/2}` with `E_i` the residues mod 3.
pub fn leader_experiment(d: usize, eps: f64, budget: usize, seed: u64) -> Result<LeaderReport> {
    if d == 0 || !d.is_multiple_of(3) {
        return invalid(format!(
            "dimension must be a positive multiple of 3 (got {d})"
        ));
    }
    if eps.is_nan() || eps < 0.0 {
        return invalid(format!("epsilon must be nonnegative (got {eps})"));
    }
    let masks = residue_masks(d);
    let targets = |name: &str| -> Vec<SphericalSet> {
        masks
            .iter()
            .enumerate()
            .map(|(i, m)| {
                SphericalSet::mask_norm_at_least(
                    format!("{name}{}({})", i + 1, name_of(name)),
                    m.clone(),
                    FRAC_1_SQRT_2,
                )
                .with_dim(d)
            })
            .collect()
    };
    let domain = SampleDomain::full(d);
    let threshold = leader_threshold();
    let certificate = format!(
        "O_eps(E_i-set) lies in {{||p_E_i x|| > sqrt(2)/2 - eps}} and sqrt(2)/2 - {eps} > sqrt(3)/3, \
         but disjoint E_1, E_2, E_3 force min_i ||p_E_i x|| <= sqrt(3)/3"
    );
    let mut reports = Vec::with_capacity(2);
    for (name, s) in [("g", seed), ("h", seed.wrapping_add(1))] {
        let label = if name == "g" { "A" } else { "B" };
        let r = witness_search_targets(
            label,
            &targets(name),
            eps,
            Metric::Chordal,
            &domain,
            budget,
            s,
        )?;
        reports.push(if eps < threshold {
            r.certify_empty(certificate.clone())?
        } else {
            r
        });
    }
    let b = reports.pop().expect("two reports");
    let a = reports.pop().expect("two reports");

    let parts = [
        masks[0].as_slice(),
        masks[1].as_slice(),
        masks[2].as_slice(),
    ];
    let checks = (budget / 10).max(1);
    let (violations, max_min_mass) = rng::par_fold(
        checks,
        seed,
        1,
        (0usize, 0.0f64),
        |r, _, acc| {
            let x = UnitVector::from_unit_unchecked(random_unit(r, d), Field::Real);
            match leader_projection_mass(parts, &x) {
                Ok(n) => {
                    acc.1 = acc
                        .1
                        .max(n.iter().map(|v| v * v).fold(f64::INFINITY, f64::min))
                }
                Err(_) => acc.0 += 1,
            }
        },
        |a, b| (a.0 + b.0, a.1.max(b.1)),
    );
    Ok(LeaderReport {
        d,
        threshold,
        a,
        b,
        pigeonhole: PigeonholeCheck {
            samples: checks,
            violations,
            max_min_mass,
        },
    })
}

fn name_of(transform: &str) -> &'static str {
    if transform == "g" {
        "A"
    } else {
        "B"
    }
}
