//! Finite-scale machinery for the concentration property: spherical sets,
//! covers, witness search for intersections of transformed
//! `eps`-neighbourhoods, and the explicit counterexamples.
//!
//! A set `A` is essential for a finite family of transformations `g_1..g_k`
//! at radius `eps` when the neighbourhoods `O_eps(g_i A)` have a common
//! point. For isometries `g(O_eps(A)) = O_eps(g(A))`, so the search looks for
//! a point within `eps` of every transformed set.

mod f2;
mod leader;
mod lift;
mod sets;

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

pub use f2::{f2_a1_margin, f2_experiment, F2Report, F2_A1_THRESHOLD};
pub use leader::{leader_experiment, leader_threshold, LeaderReport};
pub use lift::{lift_cover, lift_margin, lift_set, lifted_inessentiality, Block, LiftCheck};
pub use sets::{Cover, CoverageCheck, DistanceToSet, SphericalSet};

use crate::error::{invalid, Error, Result};
use crate::group::UnitaryAction;
use crate::rng;
use crate::sphere::{chordal_to_geodesic, geodesic_to_chordal, random_unit, Field, UnitVector};
use crate::subspace::Frame;

/// Distance used for `eps`-neighbourhoods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Chordal,
    Geodesic,
}

impl Metric {
    /// Chordal radius equivalent to `eps` in this metric.
    pub fn chordal_radius(self, eps: f64) -> f64 {
        match self {
            Metric::Chordal => eps,
            Metric::Geodesic => {
                geodesic_to_chordal(eps.min(PI)) + if eps >= PI { 1.0 } else { 0.0 }
            }
        }
    }
}

/// Where candidate points are drawn from.
#[derive(Debug, Clone)]
pub enum SampleDomain {
    /// The whole unit sphere of a `dim`-dimensional space over `field`.
    Full { dim: usize, field: Field },
    /// Real unit vectors of `R^dim` supported on the listed coordinates.
    Coordinates { dim: usize, support: Vec<usize> },
    /// The unit sphere of the range of a frame.
    Frame(Frame),
}

impl SampleDomain {
    pub fn full(dim: usize) -> Self {
        SampleDomain::Full {
            dim,
            field: Field::Real,
        }
    }

    fn coefficient_dim(&self) -> usize {
        match self {
            SampleDomain::Full { dim, field } => field.real_dim(*dim),
            SampleDomain::Coordinates { support, .. } => support.len(),
            SampleDomain::Frame(f) => f.rank(),
        }
    }

    pub fn ambient_real_dim(&self) -> usize {
        match self {
            SampleDomain::Full { dim, field } => field.real_dim(*dim),
            SampleDomain::Coordinates { dim, .. } => *dim,
            SampleDomain::Frame(f) => f.ambient_dim(),
        }
    }

    fn field(&self) -> Field {
        match self {
            SampleDomain::Full { field, .. } => *field,
            _ => Field::Real,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SampleDomain::Full { dim, .. } if *dim == 0 => invalid("sample domain has dimension 0"),
            SampleDomain::Coordinates { dim, support } => {
                if support.is_empty() || support.iter().any(|&i| i >= *dim) {
                    return invalid("coordinate support is empty or out of range");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Maps a unit coefficient vector isometrically onto the domain.
    fn embed(&self, c: &DVector<f64>) -> UnitVector {
        let coords = match self {
            SampleDomain::Full { .. } => c.clone(),
            SampleDomain::Coordinates { dim, support } => {
                let mut x = DVector::zeros(*dim);
                for (k, &i) in support.iter().enumerate() {
                    x[i] = c[k];
                }
                x
            }
            SampleDomain::Frame(f) => f.basis() * c,
        };
        UnitVector::from_unit_unchecked(coords, self.field())
    }
}

/// Outcome of an essentiality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    WitnessFound,
    CertificateEmpty,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::WitnessFound => "witness-found",
            Verdict::CertificateEmpty => "certificate-empty",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EssentialityReport {
    pub label: String,
    pub transforms: Vec<String>,
    pub epsilon: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<UnitVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    pub samples: usize,
    pub seed: u64,
    /// Smallest observed `max_j dist(x, target_j)` (chordal).
    #[serde(skip)]
    pub best_distance: f64,
    #[serde(skip)]
    pub metric: Metric,
}

impl EssentialityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn is_essential(&self) -> bool {
        self.verdict == Verdict::WitnessFound
    }

    /// Upgrades an inconclusive search to `certificate-empty`.
    ///
    /// A verified witness contradicting the certificate is an error.
    pub fn certify_empty(mut self, certificate: impl Into<String>) -> Result<Self> {
        let certificate = certificate.into();
        if self.verdict == Verdict::WitnessFound {
            return Err(Error::Consistency(format!(
                "certificate for `{}` contradicted by a verified witness: {certificate}",
                self.label
            )));
        }
        self.verdict = Verdict::CertificateEmpty;
        self.certificate = Some(certificate);
        Ok(self)
    }
}

/// Largest chordal distance from `x` to the targets.
fn max_distance(targets: &[SphericalSet], x: &UnitVector) -> f64 {
    targets
        .iter()
        .map(|t| t.distance(x).expect("targets carry distances"))
        .fold(0.0, f64::max)
}

/// Rounds of cap-restricted resampling after the uniform phase.
pub const REFINEMENT_ROUNDS: u32 = 5;

/// Searches for a point within `eps` of every target set.
///
/// Half of the budget goes to uniform samples from `domain`; the other half
/// is split over [`REFINEMENT_ROUNDS`] rounds that resample inside a cap
/// around the best near-miss so far, halving the cap radius each round. The
/// first cap radius is the geodesic length of the best near-miss distance.
/// The lowest-index qualifying sample of a phase is the reported witness.
pub fn witness_search_targets(
    label: impl Into<String>,
    targets: &[SphericalSet],
    eps: f64,
    metric: Metric,
    domain: &SampleDomain,
    budget: usize,
    seed: u64,
) -> Result<EssentialityReport> {
    let label = label.into();
    if targets.is_empty() {
        return invalid("witness search needs at least one target set");
    }
    if eps.is_nan() || eps < 0.0 {
        return invalid(format!("epsilon must be nonnegative (got {eps})"));
    }
    if budget == 0 {
        return invalid("witness search budget must be positive");
    }
    domain.validate()?;
    let ambient = domain.ambient_real_dim();
    for t in targets {
        if !t.has_distance() {
            return invalid(format!("target `{}` has no distance evaluator", t.label()));
        }
        if let Some(d) = t.dim() {
            if d != ambient {
                return invalid(format!(
                    "target `{}` lives in dimension {d}, domain in {ambient}",
                    t.label()
                ));
            }
        }
    }
    let radius = metric.chordal_radius(eps);
    let k = domain.coefficient_dim();

    let per_round = if budget >= 10 { budget / 10 } else { 0 };
    let uniform = budget - per_round * REFINEMENT_ROUNDS as usize;

    let draw_uniform = |rng: &mut rand_chacha::ChaCha8Rng| random_unit(rng, k);
    let scores = rng::par_samples(uniform, seed, 0, |rng, _| {
        max_distance(targets, &domain.embed(&draw_uniform(rng)))
    });
    let mut used = uniform;
    let (mut best_idx, mut best) = argmin(&scores);
    let mut best_coeffs = draw_uniform(&mut rng::sample_rng(seed, 0, best_idx));
    let mut found = scores
        .iter()
        .position(|&s| s < radius)
        .map(|i| draw_uniform(&mut rng::sample_rng(seed, 0, i)));

    let mut cap = chordal_to_geodesic(best.min(2.0)).clamp(1e-6, PI / 2.0);
    for round in 1..=REFINEMENT_ROUNDS {
        if found.is_some() || per_round == 0 {
            break;
        }
        let centre = best_coeffs.clone();
        let draw_cap = |rng: &mut rand_chacha::ChaCha8Rng| cap_sample(rng, &centre, cap);
        let scores = rng::par_samples(per_round, seed, round, |rng, _| {
            max_distance(targets, &domain.embed(&draw_cap(rng)))
        });
        used += per_round;
        if let Some(i) = scores.iter().position(|&s| s < radius) {
            found = Some(draw_cap(&mut rng::sample_rng(seed, round, i)));
        }
        let (idx, score) = argmin(&scores);
        if score < best {
            best = score;
            best_idx = idx;
            best_coeffs = draw_cap(&mut rng::sample_rng(seed, round, best_idx));
        }
        cap *= 0.5;
    }

    let transforms = targets.iter().map(|t| t.label().to_string()).collect();
    let mut report = EssentialityReport {
        label,
        transforms,
        epsilon: eps,
        verdict: Verdict::Inconclusive,
        witness: None,
        certificate: None,
        samples: used,
        seed,
        best_distance: best,
        metric,
    };
    if let Some(c) = found {
        let x = domain.embed(&c);
        // Re-verify against the targets independently of the search scores.
        for t in targets {
            let d = t.distance(&x).expect("targets carry distances");
            if d.is_nan() || d >= radius {
                return Err(Error::Consistency(format!(
                    "witness fails re-verification for `{}` ({d} >= {radius})",
                    t.label()
                )));
            }
        }
        report.best_distance = max_distance(targets, &x);
        report.verdict = Verdict::WitnessFound;
        report.witness = Some(x);
    }
    Ok(report)
}

fn argmin(scores: &[f64]) -> (usize, f64) {
    scores.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(bi, bs), (i, &s)| if s < bs { (i, s) } else { (bi, bs) },
    )
}

/// Point at geodesic distance `U[0, radius]` from `centre` in a uniformly
/// random tangent direction.
fn cap_sample<R: Rng + ?Sized>(rng: &mut R, centre: &DVector<f64>, radius: f64) -> DVector<f64> {
    let k = centre.len();
    if k == 1 {
        return centre.clone();
    }
    loop {
        let z = random_unit(rng, k);
        let tangent = &z - centre * centre.dot(&z);
        let n = tangent.norm();
        if n > 1e-12 {
            let t = radius * rng.random::<f64>();
            let x = centre * t.cos() + tangent * (t.sin() / n);
            let norm = x.norm();
            return x / norm;
        }
    }
}

/// Witness search for the images of `set` under each action.
pub fn witness_search(
    set: &SphericalSet,
    transforms: &[UnitaryAction],
    eps: f64,
    budget: usize,
    seed: u64,
) -> Result<EssentialityReport> {
    let first = transforms
        .first()
        .ok_or_else(|| Error::InvalidArgument("no transformations given".into()))?;
    let (dim, field) = (first.dim(), first.field());
    if transforms
        .iter()
        .any(|g| g.dim() != dim || g.field() != field)
    {
        return invalid("transformations act on different spaces");
    }
    let targets = transforms
        .iter()
        .map(|g| set.transformed(g))
        .collect::<Result<Vec<_>>>()?;
    witness_search_targets(
        set.label(),
        &targets,
        eps,
        Metric::Chordal,
        &SampleDomain::Full { dim, field },
        budget,
        seed,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    pub set: String,
    pub essential: bool,
    pub report: EssentialityReport,
}

/// Runs a witness search for every cover element under the same finite
/// family. Flags elements that are essential for this family only; it says
/// nothing about the concentration property, which quantifies over all
/// covers and families.
pub fn essential_element_scan(
    cover: &Cover,
    transforms: &[UnitaryAction],
    eps: f64,
    budget: usize,
    seed: u64,
) -> Result<Vec<ScanEntry>> {
    cover
        .sets
        .iter()
        .map(|s| {
            let report = witness_search(s, transforms, eps, budget, seed)?;
            Ok(ScanEntry {
                set: s.label().to_string(),
                essential: report.is_essential(),
                report,
            })
        })
        .collect()
}
