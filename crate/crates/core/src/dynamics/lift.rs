//! Lifting covers of `S_{H_1}` and `S_{H_2}` to `S_{H_1 + H_2}`.
//!
//! For `A` on the sphere of block `j`,
//! `lift(A) = {x : ||pi_j x|| >= sqrt(2)/2, pi_j x / ||pi_j x|| in A}`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

use nalgebra::DVector;
use serde::Serialize;

use super::{
    witness_search_targets, Cover, EssentialityReport, Metric, SampleDomain, SphericalSet,
};
use crate::error::{invalid, Error, Result};
use crate::group::UnitaryAction;
use crate::sphere::{Field, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    First,
    Second,
}

/// `min(eps/3, pi/8)`; radii strictly below it preserve inessentiality.
pub fn lift_margin(eps: f64) -> f64 {
    (eps / 3.0).min(FRAC_PI_8)
}

/// Lifts a set on `S^{d_j - 1}` (block `j`) into `S^{d1 + d2 - 1}`.
///
/// The distance is exact when `set` has an exact distance: for
/// `x = cos(phi) (u, 0) + sin(phi) (0, w)` the nearest lifted point keeps the
/// direction `w`, moves `u` to its nearest point of `set` and clamps the
/// block angle to `[0, pi/4]`.
pub fn lift_set(set: &SphericalSet, block: Block, d1: usize, d2: usize) -> Result<SphericalSet> {
    let (dj, offset) = match block {
        Block::First => (d1, 0),
        Block::Second => (d2, d1),
    };
    if dj == 0 {
        return invalid("cannot lift into an empty block");
    }
    if let Some(d) = set.dim() {
        if d != dj {
            return invalid(format!(
                "set `{}` lives in dimension {d}, block has {dj}",
                set.label()
            ));
        }
    }
    if !set.has_distance() {
        return invalid(format!("set `{}` has no distance evaluator", set.label()));
    }
    let total = d1 + d2;
    let label = format!(
        "lift{}({})",
        if block == Block::First { 1 } else { 2 },
        set.label()
    );
    if total == dj {
        return Ok(set.clone().relabel(label));
    }
    let split = move |x: &UnitVector| -> (Option<UnitVector>, f64, f64) {
        let c = x.coords();
        let pj = DVector::from_iterator(dj, (0..dj).map(|i| c[offset + i]));
        let nj = pj.norm();
        let other = (c.norm_squared() - nj * nj).max(0.0).sqrt();
        let u = if nj > 0.0 {
            Some(UnitVector::from_unit_unchecked(pj / nj, Field::Real))
        } else {
            None
        };
        (u, nj.min(1.0), other.min(1.0))
    };
    let member = set.clone();
    let membership = move |x: &UnitVector| {
        let (u, nj, _) = split(x);
        nj >= FRAC_1_SQRT_2 && u.is_some_and(|u| member.contains(&u))
    };
    let base = set.clone();
    let distance = move |x: &UnitVector| {
        let (u, cos_phi, sin_phi) = split(x);
        if cos_phi >= FRAC_1_SQRT_2 && u.as_ref().is_some_and(|u| base.contains(u)) {
            return 0.0;
        }
        // cosine of the angle from u to the nearest point of the base set;
        // with u undefined every direction of block j is equally far
        let c = match &u {
            Some(u) => {
                let d = base.distance(u).expect("checked above");
                1.0 - d * d / 2.0
            }
            None => 0.0,
        };
        let (x_part, y_part) = (c * cos_phi, sin_phi);
        let rho = x_part.hypot(y_part);
        let beta = y_part.atan2(x_part);
        let cos_geo = (rho * (beta - beta.clamp(0.0, FRAC_PI_4)).cos()).clamp(-1.0, 1.0);
        (2.0 - 2.0 * cos_geo).max(0.0).sqrt()
    };
    Ok(SphericalSet::new(
        label,
        membership,
        Some(super::DistanceToSet::Exact(std::sync::Arc::new(distance))),
    )
    .with_dim(total))
}

/// Lifts every element of `first` (block 1) and, when given, `second`
/// (block 2).
pub fn lift_cover(first: &Cover, second: Option<&Cover>, d1: usize, d2: usize) -> Result<Cover> {
    let mut sets = first
        .sets
        .iter()
        .map(|s| lift_set(s, Block::First, d1, d2))
        .collect::<Result<Vec<_>>>()?;
    if let Some(c) = second {
        for s in &c.sets {
            sets.push(lift_set(s, Block::Second, d1, d2)?);
        }
    }
    Ok(Cover::new(sets))
}

/// Witness searches for `A` at geodesic radius `eps` under `g_i` on `H_1`
/// and for its lift at `delta` under `g_i + h_i` on `H_1 + H_2`.
#[derive(Debug, Clone, Serialize)]
pub struct LiftCheck {
    pub delta: f64,
    pub base: EssentialityReport,
    pub lifted: EssentialityReport,
}

impl LiftCheck {
    /// Neither search found a witness.
    pub fn margin_persists(&self) -> bool {
        !self.base.is_essential() && !self.lifted.is_essential()
    }
}

/// Uses `delta = 0.99 * lift_margin(eps)`.
pub fn lifted_inessentiality(
    set: &SphericalSet,
    pairs: &[(UnitaryAction, UnitaryAction)],
    eps: f64,
    budget: usize,
    seed: u64,
) -> Result<LiftCheck> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no transformations given".into()))?;
    let (d1, d2) = (first.0.real_dim(), first.1.real_dim());
    if pairs
        .iter()
        .any(|(g, h)| g.real_dim() != d1 || h.real_dim() != d2)
    {
        return invalid("transformations act on different spaces");
    }
    let base_targets = pairs
        .iter()
        .map(|(g, _)| set.transformed(g))
        .collect::<Result<Vec<_>>>()?;
    let base = witness_search_targets(
        set.label(),
        &base_targets,
        eps,
        Metric::Geodesic,
        &SampleDomain::full(d1),
        budget,
        seed,
    )?;
    let lifted_set = lift_set(set, Block::First, d1, d2)?;
    let lifted_targets = pairs
        .iter()
        .map(|(g, h)| {
            let sum = UnitaryAction::direct_sum(
                format!("{}+{}", g.label(), h.label()),
                vec![g.clone(), h.clone()],
            )?;
            lifted_set.transformed(&sum)
        })
        .collect::<Result<Vec<_>>>()?;
    let delta = 0.99 * lift_margin(eps);
    let lifted = witness_search_targets(
        lifted_set.label(),
        &lifted_targets,
        delta,
        Metric::Geodesic,
        &SampleDomain::full(d1 + d2),
        budget,
        seed.wrapping_add(1),
    )?;
    Ok(LiftCheck {
        delta,
        base,
        lifted,
    })
}
