use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::group::UnitaryAction;
use crate::rng;
use crate::sphere::{chordal_distance, geodesic_to_chordal, random_unit, Field, UnitVector};

type Membership = Arc<dyn Fn(&UnitVector) -> bool + Send + Sync>;
type Distance = Arc<dyn Fn(&UnitVector) -> f64 + Send + Sync>;

/// How the chordal distance from a point to a set is evaluated.
#[derive(Clone)]
pub enum DistanceToSet {
    /// Exact distance function.
    Exact(Distance),
    /// Minimum distance to a stored sample of the set: an upper bound on the
    /// true distance, so any witness it certifies is genuine.
    Witnesses(Arc<Vec<UnitVector>>),
}

/// A subset of a unit sphere given by a membership predicate and, when
/// available, a chordal distance-to-set function.
#[derive(Clone)]
pub struct SphericalSet {
    label: String,
    dim: Option<usize>,
    membership: Membership,
    distance: Option<DistanceToSet>,
}

impl fmt::Debug for SphericalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphericalSet")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field(
                "distance",
                &self.distance.as_ref().map(|d| match d {
                    DistanceToSet::Exact(_) => "exact",
                    DistanceToSet::Witnesses(_) => "witnesses",
                }),
            )
            .finish()
    }
}

/// Chordal distance between points at angles `phi` and `psi` inside one
/// great circle.
fn chord(phi: f64, psi: f64) -> f64 {
    geodesic_to_chordal((phi - psi).abs())
}

fn masked_norm(mask: &[usize], x: &UnitVector) -> f64 {
    let c = x.coords();
    mask.iter()
        .map(|&i| c[i] * c[i])
        .sum::<f64>()
        .sqrt()
        .min(1.0)
}

impl SphericalSet {
    pub fn new(
        label: impl Into<String>,
        membership: impl Fn(&UnitVector) -> bool + Send + Sync + 'static,
        distance: Option<DistanceToSet>,
    ) -> Self {
        Self {
            label: label.into(),
            dim: None,
            membership: Arc::new(membership),
            distance,
        }
    }

    /// Set with an exact chordal distance; membership is `distance == 0`.
    pub fn from_distance(
        label: impl Into<String>,
        distance: impl Fn(&UnitVector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let distance: Distance = Arc::new(distance);
        let d = distance.clone();
        Self {
            label: label.into(),
            dim: None,
            membership: Arc::new(move |x| d(x) == 0.0),
            distance: Some(DistanceToSet::Exact(distance)),
        }
    }

    /// Predicate-only set.
    pub fn from_predicate(
        label: impl Into<String>,
        membership: impl Fn(&UnitVector) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, membership, None)
    }

    /// Attaches a stored sample of members as the distance evaluator.
    pub fn with_witnesses(mut self, witnesses: Vec<UnitVector>) -> Result<Self> {
        if let Some(w) = witnesses.iter().find(|w| !self.contains(w)) {
            return invalid(format!(
                "stored witness {:?} is not in `{}`",
                w.coords().as_slice(),
                self.label
            ));
        }
        self.distance = Some(DistanceToSet::Witnesses(Arc::new(witnesses)));
        Ok(self)
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The whole sphere.
    pub fn whole() -> Self {
        Self::from_distance("sphere", |_| 0.0)
    }

    /// `{x : <x, u> >= 0}` for a unit normal `u`.
    pub fn halfspace(label: impl Into<String>, normal: UnitVector) -> Self {
        let dim = normal.real_dim();
        Self::from_distance(label, move |x| {
            let t = x.coords().dot(normal.coords());
            if t >= 0.0 {
                0.0
            } else {
                // geodesic distance to the boundary great sphere is asin(-t)
                geodesic_to_chordal((-t).min(1.0).asin())
            }
        })
        .with_dim(dim)
    }

    /// `{x : x_axis >= 0}` in `R^d`.
    pub fn hemisphere(d: usize, axis: usize) -> Result<Self> {
        Ok(Self::halfspace(
            format!("x{axis}>=0"),
            UnitVector::basis(d, axis)?,
        ))
    }

    /// `{x : x_axis <= 0}` in `R^d`.
    pub fn lower_hemisphere(d: usize, axis: usize) -> Result<Self> {
        Ok(Self::halfspace(
            format!("x{axis}<=0"),
            UnitVector::basis(d, axis)?.neg(),
        ))
    }

    /// `{x : |p_M x| >= t}` where `p_M` keeps the real coordinates in `mask`.
    ///
    /// The distance formula assumes both the mask and its complement carry
    /// nonzero coordinates of the ambient space; a vector at angle
    /// `asin |p_M x|` from the complement is rotated inside the plane spanned
    /// by its two components.
    pub fn mask_norm_at_least(label: impl Into<String>, mask: Vec<usize>, t: f64) -> Self {
        let target = t.clamp(0.0, 1.0).asin();
        Self::from_distance(label, move |x| {
            let s = masked_norm(&mask, x);
            if s >= t {
                0.0
            } else {
                chord(s.asin(), target)
            }
        })
    }

    /// `{x : |p_M x| <= t}`; see [`SphericalSet::mask_norm_at_least`].
    pub fn mask_norm_at_most(label: impl Into<String>, mask: Vec<usize>, t: f64) -> Self {
        let target = t.clamp(0.0, 1.0).asin();
        Self::from_distance(label, move |x| {
            let s = masked_norm(&mask, x);
            if s <= t {
                0.0
            } else {
                chord(s.asin(), target)
            }
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn contains(&self, x: &UnitVector) -> bool {
        (self.membership)(x)
    }

    pub fn has_distance(&self) -> bool {
        self.distance.is_some()
    }

    pub fn has_exact_distance(&self) -> bool {
        matches!(self.distance, Some(DistanceToSet::Exact(_)))
    }

    /// Chordal distance from `x` (exact, or an upper bound for
    /// witness-backed sets).
    pub fn distance(&self, x: &UnitVector) -> Option<f64> {
        match &self.distance {
            None => None,
            Some(DistanceToSet::Exact(f)) => Some(f(x)),
            Some(DistanceToSet::Witnesses(ws)) => Some(
                ws.iter()
                    .map(|w| chordal_distance(x, w).unwrap_or(f64::INFINITY))
                    .fold(f64::INFINITY, f64::min),
            ),
        }
    }

    /// The image `g(A) = {g x : x in A}` of the set under a total action.
    ///
    /// For an isometry `dist(x, g(A)) = dist(g^-1 x, A)`.
    pub fn transformed(&self, g: &UnitaryAction) -> Result<SphericalSet> {
        if g.is_partial() {
            return invalid(format!(
                "partial action `{}` cannot transform sets",
                g.label()
            ));
        }
        if let Some(d) = self.dim {
            if d != g.real_dim() {
                return invalid(format!(
                    "set `{}` lives in dimension {d}, action in {}",
                    self.label,
                    g.real_dim()
                ));
            }
        }
        let inv = Arc::new(g.inverse());
        let pull = {
            let inv = inv.clone();
            move |x: &UnitVector| inv.apply(x).expect("dimension checked by caller")
        };
        let base = self.clone();
        let membership = {
            let base = base.clone();
            let pull = pull.clone();
            move |x: &UnitVector| base.contains(&pull(x))
        };
        let distance = base.distance.as_ref().map(|_| {
            let base = base.clone();
            DistanceToSet::Exact(Arc::new(move |x: &UnitVector| {
                base.distance(&pull(x)).expect("present")
            }) as Distance)
        });
        Ok(SphericalSet {
            label: format!("{}({})", g.label(), self.label),
            dim: Some(g.real_dim()),
            membership: Arc::new(membership),
            distance,
        })
    }
}

/// A finite family of spherical sets meant to cover a sphere.
#[derive(Debug, Clone)]
pub struct Cover {
    pub sets: Vec<SphericalSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageCheck {
    pub samples: usize,
    pub uncovered: usize,
    pub seed: u64,
}

impl Cover {
    pub fn new(sets: Vec<SphericalSet>) -> Self {
        Self { sets }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Counts uniform samples of `S^{d-1}` lying in no element.
    pub fn coverage_check(&self, d: usize, m: usize, seed: u64) -> Result<CoverageCheck> {
        if d == 0 || m == 0 {
            return invalid("coverage check needs d >= 1 and m >= 1");
        }
        let uncovered = rng::par_fold(
            m,
            seed,
            0,
            0usize,
            |rng, _, acc| {
                let x = UnitVector::from_unit_unchecked(random_unit(rng, d), Field::Real);
                if !self.sets.iter().any(|s| s.contains(&x)) {
                    *acc += 1;
                }
            },
            |a, b| a + b,
        );
        Ok(CoverageCheck {
            samples: m,
            uncovered,
            seed,
        })
    }
}
