//! Almost-invariant vectors and Følner-type projections for finite families
//! of unitaries, and the pipeline that turns a sequence of nearly invariant
//! projections into a candidate essential set.

use std::collections::HashSet;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{witness_search_targets, Cover, EssentialityReport, Metric, SampleDomain};
use crate::error::{invalid, Error, Result};
use crate::group::{ActionKind, UnitaryAction};
use crate::rng;
use crate::sphere::{bernoulli_stderr, random_unit, UnitVector};
use crate::subspace::{build_isometry, Frame};

/// Most Lanczos steps taken by [`almost_invariant_vector`].
pub const LANCZOS_STEPS: usize = 300;

#[derive(Debug, Clone, Serialize)]
pub struct AlmostInvariant {
    pub vector: UnitVector,
    /// `max_g ||g xi - xi||`.
    pub residual: f64,
    /// `||g xi - xi||` per action, in input order.
    pub residuals: Vec<f64>,
    /// `<M xi, xi>` for `M = (1/2|F|) sum_g (g + g^-1)`.
    pub rayleigh: f64,
    /// `(1/|F|) sum_g ||g xi - xi||^2`, which equals `2 - 2 <M xi, xi>`.
    pub mean_square_residual: f64,
    pub lanczos_steps: usize,
    pub seed: u64,
}

fn check_family(actions: &[UnitaryAction]) -> Result<(usize, crate::sphere::Field)> {
    let first = actions
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty action list".into()))?;
    let (n, field) = (first.real_dim(), first.field());
    if actions
        .iter()
        .any(|g| g.real_dim() != n || g.field() != field)
    {
        return invalid("actions act on different spaces");
    }
    Ok((n, field))
}

/// Top eigenvector of the averaged operator `M`, compressed to the
/// coordinates in `support` (all coordinates when `None`).
///
/// Lanczos with full reorthogonalization from a seeded start vector. For
/// truncated regular representations the support must be small enough that
/// every `g` and `g^-1` keeps it inside the ball.
pub fn almost_invariant_vector(
    actions: &[UnitaryAction],
    support: Option<&[usize]>,
    seed: u64,
) -> Result<AlmostInvariant> {
    let (n, field) = check_family(actions)?;
    let support: Vec<usize> = match support {
        Some(s) => {
            if s.is_empty() || s.iter().any(|&i| i >= n) {
                return invalid("support is empty or out of range");
            }
            s.to_vec()
        }
        None => (0..n).collect(),
    };
    let inverses: Vec<UnitaryAction> = actions.iter().map(|g| g.inverse()).collect();
    let k = support.len();
    let scale = 1.0 / (2.0 * actions.len() as f64);
    let embed = |v: &DVector<f64>| {
        let mut x = DVector::zeros(n);
        for (j, &i) in support.iter().enumerate() {
            x[i] = v[j];
        }
        x
    };
    let averaged = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let mut y = DVector::zeros(n);
        for (g, h) in actions.iter().zip(&inverses) {
            y += g.apply_coords(x)?;
            y += h.apply_coords(x)?;
        }
        Ok(y * scale)
    };
    let compressed = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let y = averaged(&embed(v))?;
        Ok(DVector::from_iterator(k, support.iter().map(|&i| y[i])))
    };

    let steps = LANCZOS_STEPS.min(k);
    let start = random_unit(&mut rng::sample_rng(seed, 0, 0), k);
    let mut basis: Vec<DVector<f64>> = vec![start];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for j in 0..steps {
        let mut w = compressed(&basis[j])?;
        let a = w.dot(&basis[j]);
        alphas.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let b = w.norm();
        if j + 1 == steps || b < 1e-12 {
            break;
        }
        betas.push(b);
        basis.push(w / b);
    }
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c {
            betas[r]
        } else if c + 1 == r {
            betas[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let top = eig.eigenvalues.imax();
    let mut v = DVector::zeros(k);
    for (j, q) in basis.iter().take(m).enumerate() {
        v.axpy(eig.eigenvectors[(j, top)], q, 1.0);
    }
    // fix the overall sign so the first significant coordinate is positive
    if let Some(p) = v.iter().find(|c| c.abs() > 1e-9) {
        if *p < 0.0 {
            v.neg_mut();
        }
    }
    let xi = embed(&v.normalize());
    let residuals = actions
        .iter()
        .map(|g| Ok((g.apply_coords(&xi)? - &xi).norm()))
        .collect::<Result<Vec<_>>>()?;
    let rayleigh = averaged(&xi)?.dot(&xi);
    Ok(AlmostInvariant {
        residual: residuals.iter().cloned().fold(0.0, f64::max),
        mean_square_residual: residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64,
        residuals,
        rayleigh,
        vector: UnitVector::from_unit_unchecked(xi, field),
        lanczos_steps: m,
        seed,
    })
}

/// Action of a permutation-like unitary on basis indices; `None` where a
/// truncated translation leaves the universe.
#[derive(Debug, Clone)]
pub struct IndexMap {
    pub label: String,
    pub image: Vec<Option<usize>>,
}

impl IndexMap {
    pub fn from_action(g: &UnitaryAction) -> Result<IndexMap> {
        let image = match g.kind() {
            ActionKind::Permutation(p) => p.images().iter().map(|&j| Some(j)).collect(),
            ActionKind::Regular(r) => (0..g.dim()).map(|i| r.image_of(i)).collect(),
            _ => {
                return invalid(format!(
                    "action `{}` does not permute basis vectors",
                    g.label()
                ))
            }
        };
        Ok(IndexMap {
            label: g.label().to_string(),
            image,
        })
    }

    pub fn universe(&self) -> usize {
        self.image.len()
    }

    /// `|g S Δ S|`, which is `||P_{gS} - P_S||_1` for coordinate projections.
    pub fn symmetric_difference(&self, subset: &[usize], members: &[bool]) -> Result<usize> {
        let mut escaped = 0;
        for &s in subset {
            match self.image.get(s).copied().flatten() {
                Some(t) if members[t] => {}
                Some(_) => escaped += 1,
                None => return invalid(format!("`{}` is undefined on index {s}", self.label)),
            }
        }
        // g is injective, so |gS - S| = |S - gS|
        Ok(2 * escaped)
    }
}

/// `||g P g^-1 - P||_1` through coordinate counting.
pub fn trace_commutator_subset(subset: &[usize], g: &IndexMap) -> Result<usize> {
    let mut members = vec![false; g.universe()];
    for &s in subset {
        if s >= members.len() {
            return invalid(format!("index {s} outside the universe of `{}`", g.label));
        }
        members[s] = true;
    }
    g.symmetric_difference(subset, &members)
}

/// `||g P g^-1 - P||_1` from singular values of the dense difference.
pub fn trace_commutator_dense(frame: &Frame, g: &UnitaryAction) -> Result<f64> {
    if g.real_dim() != frame.ambient_dim() || g.field() != frame.field() {
        return invalid("frame and action live in different spaces");
    }
    if g.is_partial() {
        return invalid(format!(
            "partial action `{}` has no dense conjugate",
            g.label()
        ));
    }
    let gm = g.to_dense();
    let p = frame.projection();
    let diff = &gm * &p * gm.transpose() - p;
    Ok(crate::linalg::symmetric_trace_norm(diff) / frame.multiplicity() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    GreedySwap,
    Exhaustive,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy-swap" | "greedy" => Ok(Strategy::GreedySwap),
            "exhaustive" => Ok(Strategy::Exhaustive),
            _ => invalid(format!("unknown strategy `{s}`")),
        }
    }
}

/// Restarts of the greedy swap search.
pub const GREEDY_RESTARTS: usize = 32;
/// Largest number of subsets the exhaustive search will evaluate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct SearchTrace {
    pub strategy: Strategy,
    pub restarts: usize,
    pub iterations: usize,
    pub evaluated: u64,
    /// Objective `(max, sum)` of the winning restart's starting subset.
    pub initial_counts: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FolnerSearchResult {
    pub subset: Vec<usize>,
    pub rank: usize,
    pub generators: Vec<String>,
    /// `|g S Δ S|` per generator.
    pub counts: Vec<usize>,
    /// `|g S Δ S| / n` per generator.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub trace: SearchTrace,
}

impl FolnerSearchResult {
    /// Recomputes the counts from scratch and checks them against the
    /// search's bookkeeping.
    fn new(
        subset: Vec<usize>,
        maps: &[IndexMap],
        counts: Vec<usize>,
        trace: SearchTrace,
    ) -> Result<Self> {
        let fresh = maps
            .iter()
            .map(|g| trace_commutator_subset(&subset, g))
            .collect::<Result<Vec<_>>>()?;
        if fresh != counts {
            return Err(Error::Consistency(format!(
                "search counts {counts:?} disagree with recount {fresh:?}"
            )));
        }
        let n = subset.len();
        let ratios: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(Self {
            max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
            subset,
            rank: n,
            generators: maps.iter().map(|g| g.label.clone()).collect(),
            counts,
            ratios,
            trace,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

type Objective = (usize, usize);

fn objective(
    maps: &[IndexMap],
    subset: &[usize],
    members: &[bool],
) -> Result<(Objective, Vec<usize>)> {
    let counts = maps
        .iter()
        .map(|g| g.symmetric_difference(subset, members))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        (
            counts.iter().cloned().max().unwrap_or(0),
            counts.iter().sum(),
        ),
        counts,
    ))
}

/// Minimizes `max_g |g S Δ S| / n` over `n`-subsets `S` of `candidates`
/// (all of the universe when `None`).
///
/// Greedy swap: from a seeded random subset, repeatedly make the best
/// exchange of one member for one non-member under the objective
/// `(max count, total count)`, lowest indices first on ties. Exchanges that
/// keep the objective unchanged are allowed for a bounded number of steps,
/// with the last exchanged elements held fixed, so that runs separated by a
/// gap can slide together. The best subset seen is returned. Restarts run
/// in parallel and the lowest restart index wins ties.
pub fn folner_subset_search(
    actions: &[UnitaryAction],
    candidates: Option<&[usize]>,
    n: usize,
    strategy: Strategy,
    seed: u64,
) -> Result<FolnerSearchResult> {
    let maps = actions
        .iter()
        .map(IndexMap::from_action)
        .collect::<Result<Vec<_>>>()?;
    let universe = maps
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty action list".into()))?
        .universe();
    if maps.iter().any(|g| g.universe() != universe) {
        return invalid("actions act on different universes");
    }
    let pool: Vec<usize> = match candidates {
        Some(c) => {
            let mut c = c.to_vec();
            c.sort_unstable();
            c.dedup();
            c
        }
        None => (0..universe).collect(),
    };
    if pool.iter().any(|&i| i >= universe) {
        return invalid("candidate index outside the universe");
    }
    if n == 0 || n > pool.len() {
        return invalid(format!("rank {n} must lie in 1..={}", pool.len()));
    }
    match strategy {
        Strategy::Exhaustive => exhaustive(&maps, &pool, n),
        Strategy::GreedySwap => greedy(&maps, &pool, n, seed),
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

fn exhaustive(maps: &[IndexMap], pool: &[usize], n: usize) -> Result<FolnerSearchResult> {
    let total = binomial(pool.len(), n);
    let universe = maps[0].universe();
    let mut members = vec![false; universe];
    let mut best: Option<(Objective, Vec<usize>, Vec<usize>)> = None;
    let mut evaluated = 0u64;
    for subset in pool.iter().cloned().combinations(n) {
        if evaluated as u128 >= EXHAUSTIVE_LIMIT {
            let (obj, s, _) = best.expect("at least one subset evaluated");
            return Err(Error::ResourceLimit(format!(
                "exhaustive search over C({}, {n}) = {total} subsets exceeds {EXHAUSTIVE_LIMIT}; best so far: \
                 max count {} on {:?}",
                pool.len(),
                obj.0,
                s
            )));
        }
        for &s in &subset {
            members[s] = true;
        }
        let (obj, counts) = objective(maps, &subset, &members)?;
        for &s in &subset {
            members[s] = false;
        }
        evaluated += 1;
        if best.as_ref().is_none_or(|b| obj < b.0) {
            best = Some((obj, subset, counts));
        }
    }
    let (_, subset, counts) = best.expect("nonempty pool");
    FolnerSearchResult::new(
        subset,
        maps,
        counts,
        SearchTrace {
            strategy: Strategy::Exhaustive,
            restarts: 1,
            iterations: 0,
            evaluated,
            initial_counts: None,
        },
    )
}

struct Descent {
    objective: Objective,
    subset: Vec<usize>,
    counts: Vec<usize>,
    initial: Objective,
    iterations: usize,
    evaluated: u64,
}

fn greedy(maps: &[IndexMap], pool: &[usize], n: usize, seed: u64) -> Result<FolnerSearchResult> {
    let runs = (0..GREEDY_RESTARTS)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::sample_rng(seed, 0, r);
            let start: Vec<usize> = sample_indices(&mut rng, pool.len(), n)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            descend(maps, pool, start)
        })
        .collect::<Result<Vec<_>>>()?;
    let iterations = runs.iter().map(|d| d.iterations).sum();
    let evaluated = runs.iter().map(|d| d.evaluated).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.objective < a.objective { b } else { a })
        .expect("at least one restart");
    FolnerSearchResult::new(
        best.subset,
        maps,
        best.counts,
        SearchTrace {
            strategy: Strategy::GreedySwap,
            restarts: GREEDY_RESTARTS,
            iterations,
            evaluated,
            initial_counts: Some(best.initial),
        },
    )
}

fn descend(maps: &[IndexMap], pool: &[usize], start: Vec<usize>) -> Result<Descent> {
    let universe = maps[0].universe();
    let mut members = vec![false; universe];
    let mut subset = start;
    subset.sort_unstable();
    for &s in &subset {
        members[s] = true;
    }
    let (mut current, mut counts) = objective(maps, &subset, &members)?;
    let initial = current;
    let mut best = (current, subset.clone(), counts.clone());
    let max_plateau = pool.len();
    let mut plateau = 0;
    let mut tabu: HashSet<usize> = HashSet::new();
    let mut recent: Vec<usize> = Vec::new();
    let mut iterations = 0;
    let mut evaluated = 0u64;
    loop {
        iterations += 1;
        let mut step: Option<(Objective, usize, usize, Vec<usize>)> = None;
        for pos in 0..subset.len() {
            let out = subset[pos];
            if tabu.contains(&out) {
                continue;
            }
            for &inn in pool {
                if members[inn] || tabu.contains(&inn) {
                    continue;
                }
                members[out] = false;
                members[inn] = true;
                subset[pos] = inn;
                let (obj, c) = objective(maps, &subset, &members)?;
                subset[pos] = out;
                members[inn] = false;
                members[out] = true;
                evaluated += 1;
                if step.as_ref().is_none_or(|s| obj < s.0) {
                    step = Some((obj, pos, inn, c));
                }
            }
        }
        let Some((obj, pos, inn, c)) = step else {
            break;
        };
        if obj > current || (obj == current && plateau >= max_plateau) {
            break;
        }
        plateau = if obj == current { plateau + 1 } else { 0 };
        let out = subset[pos];
        members[out] = false;
        members[inn] = true;
        subset[pos] = inn;
        current = obj;
        counts = c;
        // hold the two exchanged elements fixed for the next two moves
        recent.extend([out, inn]);
        if recent.len() > 4 {
            recent.drain(..recent.len() - 4);
        }
        tabu = recent.iter().cloned().collect();
        if current < best.0 {
            let mut s = subset.clone();
            s.sort_unstable();
            best = (current, s, counts.clone());
        }
    }
    let (objective, mut subset, _) = best;
    subset.sort_unstable();
    let counts = {
        let mut m = vec![false; universe];
        for &s in &subset {
            m[s] = true;
        }
        objective_counts(maps, &subset, &m)?
    };
    Ok(Descent {
        objective,
        subset,
        counts,
        initial,
        iterations,
        evaluated,
    })
}

fn objective_counts(maps: &[IndexMap], subset: &[usize], members: &[bool]) -> Result<Vec<usize>> {
    Ok(objective(maps, subset, members)?.1)
}

/// Per-level data of a projection sequence.
#[derive(Debug, Clone, Serialize)]
pub struct SequenceLevel {
    pub rank: usize,
    /// `||g P g^-1 - P||_1 / rank` per action.
    pub ratios: Vec<f64>,
    /// Estimated `mu_{S_n}(A ∩ S_n)` per cover element.
    pub measures: Vec<f64>,
    pub stderrs: Vec<f64>,
}

/// Transport between `S_n^g` and `S_n` on the largest level.
#[derive(Debug, Clone, Serialize)]
pub struct Transport {
    pub action: String,
    pub trace_distance: f64,
    pub unitarity_residual: f64,
    /// Fraction of sampled `x` in `S_n^g` with `||r(x) - x|| < eps`.
    pub near_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevySequenceReport {
    pub levels: Vec<SequenceLevel>,
    pub ratios_decreasing: bool,
    pub warnings: Vec<String>,
    /// Index of the selected cover element.
    pub selected: usize,
    pub selected_label: String,
    /// Number of levels on which the selected element has measure `>= 1/|cover|`.
    pub selected_levels: usize,
    pub search: EssentialityReport,
    pub transports: Vec<Transport>,
    pub samples: usize,
    pub seed: u64,
}

impl LevySequenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the sequence pipeline: ratios per level, measures of every cover
/// element on every sub-sphere, selection of the element that carries at
/// least `1/|cover|` of the measure on the most levels (lowest index on
/// ties), a witness search for the `2 eps`-neighbourhoods of its images on
/// the largest sub-sphere, and the isometries `S_n^g -> S_n` on that level.
pub fn levy_sequence_experiment(
    frames: &[Frame],
    actions: &[UnitaryAction],
    cover: &Cover,
    eps: f64,
    m: usize,
    budget: usize,
    seed: u64,
) -> Result<LevySequenceReport> {
    let largest = frames
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty projection sequence".into()))?;
    let (dim, field) = check_family(actions)?;
    if frames
        .iter()
        .any(|f| f.ambient_dim() != dim || f.field() != field)
    {
        return invalid("frames and actions live in different spaces");
    }
    if cover.is_empty() {
        return invalid("cover is empty");
    }
    if m == 0 || (eps.is_nan() || eps < 0.0) {
        return invalid("need m >= 1 and eps >= 0");
    }
    let mut warnings = Vec::new();
    if frames.windows(2).any(|w| w[1].rank() <= w[0].rank()) {
        warnings.push("ranks are not increasing".to_string());
    }
    let mut levels = Vec::with_capacity(frames.len());
    for (li, f) in frames.iter().enumerate() {
        let ratios = actions
            .iter()
            .map(|g| Ok(trace_commutator_dense(f, g)? / f.rank() as f64))
            .collect::<Result<Vec<_>>>()?;
        let hits = rng::par_fold(
            m,
            seed,
            li as u32,
            vec![0usize; cover.len()],
            |r, _, acc| {
                let x = f.sample_unit(r);
                for (k, s) in cover.sets.iter().enumerate() {
                    if s.contains(&x) {
                        acc[k] += 1;
                    }
                }
            },
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
        let measures: Vec<f64> = hits.iter().map(|&h| h as f64 / m as f64).collect();
        levels.push(SequenceLevel {
            rank: f.rank(),
            ratios,
            stderrs: measures.iter().map(|&p| bernoulli_stderr(p, m)).collect(),
            measures,
        });
    }
    let max_ratio = |l: &SequenceLevel| l.ratios.iter().cloned().fold(0.0, f64::max);
    let ratios_decreasing = levels
        .windows(2)
        .all(|w| max_ratio(&w[1]) <= max_ratio(&w[0]) + 1e-12);
    if !ratios_decreasing {
        warnings.push("per-generator ratios do not decrease along the sequence".to_string());
    }
    let share = 1.0 / cover.len() as f64;
    let tallies: Vec<usize> = (0..cover.len())
        .map(|k| levels.iter().filter(|l| l.measures[k] >= share).count())
        .collect();
    let selected = (0..cover.len()).fold(
        0,
        |best, k| if tallies[k] > tallies[best] { k } else { best },
    );
    let set = &cover.sets[selected];
    let targets = actions
        .iter()
        .map(|g| set.transformed(g))
        .collect::<Result<Vec<_>>>()?;
    let search = witness_search_targets(
        set.label(),
        &targets,
        2.0 * eps,
        Metric::Chordal,
        &SampleDomain::Frame(largest.clone()),
        budget,
        seed.wrapping_add(1),
    )?;
    let mut transports = Vec::with_capacity(actions.len());
    let tm = (m / 10).max(1);
    for (gi, g) in actions.iter().enumerate() {
        let gb = g.to_dense() * largest.basis();
        let gf = Frame::from_orthonormal(gb, field)?;
        let iso = build_isometry(&gf, largest)?;
        let near = rng::par_fold(
            tm,
            seed,
            (frames.len() + gi) as u32,
            0usize,
            |r, _, acc| {
                let x = gf.sample_unit(r).into_coords();
                if (iso.apply(&x) - &x).norm() < eps {
                    *acc += 1;
                }
            },
            |a, b| a + b,
        );
        transports.push(Transport {
            action: g.label().to_string(),
            trace_distance: trace_commutator_dense(largest, g)?,
            unitarity_residual: iso.unitarity_residual(),
            near_mass: near as f64 / tm as f64,
        });
    }
    Ok(LevySequenceReport {
        levels,
        ratios_decreasing,
        warnings,
        selected,
        selected_label: set.label().to_string(),
        selected_levels: tallies[selected],
        search,
        transports,
        samples: m,
        seed,
    })
}
