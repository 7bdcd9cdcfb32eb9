//! Uniform geometry and measure on finite-dimensional spheres.
//!
//! Complex vectors are stored realified: complex coordinate `j` occupies the
//! real positions `2j` (real part) and `2j + 1` (imaginary part). The
//! realification is an isometry, so the uniform measure on the unit sphere
//! of `C^k` is the uniform measure on `S^{2k-1}` and `Re<x, y>` is the real
//! dot product of the realified vectors.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::SphericalSet;
use crate::error::{invalid, Error, Result};
use crate::quad::adaptive_simpson;
use crate::rng;

/// Unit-norm tolerance for [`UnitVector`].
pub const UNIT_TOL: f64 = 1e-12;

/// Absolute tolerance of the cap-measure quadrature.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Real coordinates needed for `dim` coordinates over this field.
    pub fn real_dim(self, dim: usize) -> usize {
        match self {
            Field::Real => dim,
            Field::Complex => 2 * dim,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::Parse(format!("unknown field `{other}`"))),
        }
    }
}

/// A point of the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitVector {
    #[serde(serialize_with = "ser_coords")]
    coords: DVector<f64>,
    #[serde(skip)]
    field: Field,
}

fn ser_coords<S: serde::Serializer>(
    v: &DVector<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

impl UnitVector {
    /// Wraps coordinates that already have unit norm.
    pub fn new(coords: DVector<f64>, field: Field) -> Result<Self> {
        check_field_len(coords.len(), field)?;
        let norm = coords.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return invalid(format!("vector norm {norm} is not 1"));
        }
        Ok(Self { coords, field })
    }

    /// Normalizes a nonzero vector onto the sphere.
    pub fn normalized(coords: DVector<f64>, field: Field) -> Result<Self> {
        check_field_len(coords.len(), field)?;
        let norm = coords.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        Ok(Self {
            coords: coords / norm,
            field,
        })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::normalized(DVector::from_column_slice(coords), Field::Real)
    }

    /// Standard basis vector `e_i` of `R^d`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return invalid(format!("basis index {i} out of range for dimension {d}"));
        }
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        Ok(Self {
            coords: v,
            field: Field::Real,
        })
    }

    pub(crate) fn from_unit_unchecked(coords: DVector<f64>, field: Field) -> Self {
        Self { coords, field }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Number of real coordinates.
    pub fn real_dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of coordinates over the vector's own field.
    pub fn dim(&self) -> usize {
        match self.field {
            Field::Real => self.coords.len(),
            Field::Complex => self.coords.len() / 2,
        }
    }

    /// Real part of the inner product.
    pub fn re_dot(&self, other: &UnitVector) -> Result<f64> {
        same_shape(self, other)?;
        Ok(self.coords.dot(&other.coords))
    }

    pub fn neg(&self) -> UnitVector {
        Self {
            coords: -&self.coords,
            field: self.field,
        }
    }
}

fn check_field_len(len: usize, field: Field) -> Result<()> {
    if len == 0 {
        return invalid("dimension must be at least 1");
    }
    if field == Field::Complex && !len.is_multiple_of(2) {
        return invalid("realified complex vector must have even length");
    }
    Ok(())
}

fn same_shape(x: &UnitVector, y: &UnitVector) -> Result<()> {
    if x.coords.len() != y.coords.len() || x.field != y.field {
        return invalid(format!(
            "dimension mismatch: {} ({}) vs {} ({})",
            x.coords.len(),
            x.field.as_str(),
            y.coords.len(),
            y.field.as_str()
        ));
    }
    Ok(())
}

/// Draws a uniform point of `S^{real_dim - 1}` by normalizing a standard
/// Gaussian vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, real_dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::<f64>::from_fn(real_dim, |_, _| rng.sample(StandardNormal));
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}

/// `m` i.i.d. uniform points on the unit sphere of the `d`-dimensional
/// space over `field`. Sample `i` depends only on `(seed, i)`.
pub fn sample_uniform(d: usize, m: usize, seed: u64, field: Field) -> Result<Vec<UnitVector>> {
    if d == 0 || m == 0 {
        return invalid(format!(
            "sample_uniform needs d >= 1 and m >= 1 (got d={d}, m={m})"
        ));
    }
    let real_dim = field.real_dim(d);
    Ok(rng::par_samples(m, seed, 0, |rng, _| {
        UnitVector::from_unit_unchecked(random_unit(rng, real_dim), field)
    }))
}

/// Great-circle distance in `[0, pi]`.
pub fn geodesic_distance(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    Ok(x.re_dot(y)?.clamp(-1.0, 1.0).acos())
}

/// Euclidean (chordal) distance.
pub fn chordal_distance(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    same_shape(x, y)?;
    Ok((&x.coords - &y.coords).norm())
}

/// Chordal length of a geodesic arc of length `theta` (`theta` in `[0, pi]`).
pub fn geodesic_to_chordal(theta: f64) -> f64 {
    2.0 * (0.5 * theta).sin()
}

/// Geodesic length of a chord of length `c` (`c` in `[0, 2]`).
pub fn chordal_to_geodesic(c: f64) -> f64 {
    2.0 * (0.5 * c).clamp(-1.0, 1.0).asin()
}

/// Normal-Levy bound `sqrt(pi/8) * exp(-eps^2 n / 2)` on the concentration
/// function of `S^{n+1}`.
pub fn levy_bound(n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return invalid("levy_bound needs n >= 1");
    }
    if eps.is_nan() || eps < 0.0 {
        return invalid(format!("epsilon must be nonnegative (got {eps})"));
    }
    Ok((PI / 8.0).sqrt() * (-eps * eps * n as f64 / 2.0).exp())
}

/// Exact concentration function of `S^n` under geodesic distance, realized
/// by hemispheres.
///
/// `alpha(eps) = int_{pi/2+eps}^{pi} sin^{n-1} / int_0^{pi} sin^{n-1}`.
/// The tail is evaluated as `cos(eps)^{n-1} * int_0^{pi/2-eps} (sin t / cos eps)^{n-1} dt`
/// so that the quadrature always sees an integrand of unit scale; the
/// result stays accurate in relative terms long after `1 - J(pi/2+eps)/J(pi)`
/// would have cancelled to rounding noise.
#[derive(Debug, Clone)]
pub struct CapProfile {
    n: usize,
    half_total: f64,
}

impl CapProfile {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("sphere dimension must be at least 1");
        }
        let half_total = scaled_tail(n, 0.0);
        Ok(Self { n, half_total })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn alpha(&self, eps: f64) -> Result<f64> {
        if !(0.0..=FRAC_PI_2).contains(&eps) {
            return invalid(format!("epsilon must lie in [0, pi/2] (got {eps})"));
        }
        let scale = eps.cos().powi(self.n as i32 - 1);
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok(scale * scaled_tail(self.n, eps) / (2.0 * self.half_total))
    }
}

fn scaled_tail(n: usize, eps: f64) -> f64 {
    let c = eps.cos();
    let p = n as i32 - 1;
    adaptive_simpson(
        &|t: f64| (t.sin() / c).powi(p),
        0.0,
        FRAC_PI_2 - eps,
        QUAD_TOL,
    )
}

/// Concentration function `alpha_{S^n}(eps)` (see [`CapProfile`]).
pub fn cap_alpha_exact(n: usize, eps: f64) -> Result<f64> {
    CapProfile::new(n)?.alpha(eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "exact-cap")]
    ExactCap,
    #[serde(rename = "empirical")]
    Empirical,
    #[serde(rename = "levy-bound")]
    LevyBound,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ExactCap => "exact-cap",
            Provenance::Empirical => "empirical",
            Provenance::LevyBound => "levy-bound",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-cap" => Ok(Provenance::ExactCap),
            "empirical" => Ok(Provenance::Empirical),
            "levy-bound" => Ok(Provenance::LevyBound),
            other => Err(Error::Parse(format!("unknown provenance `{other}`"))),
        }
    }
}

/// Sampled concentration function on an increasing grid of radii.
///
/// `n` is the sphere dimension for exact and empirical curves and the Levy
/// index (the bound concerns `S^{n+1}`) for `levy-bound` curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCurve {
    pub epsilon: Vec<f64>,
    pub alpha: Vec<f64>,
    pub provenance: Provenance,
    pub n: usize,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

pub const CURVE_CSV_HEADER: &str = "epsilon,alpha,provenance,n,samples,seed";

/// Monotonicity slack for quadrature-based curves.
const CURVE_MONOTONE_TOL: f64 = 1e-9;

impl ConcentrationCurve {
    pub fn exact(n: usize, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let profile = CapProfile::new(n)?;
        let alpha = grid
            .iter()
            .map(|&e| profile.alpha(e))
            .collect::<Result<Vec<_>>>()?;
        Self::checked(Self {
            epsilon: grid.to_vec(),
            alpha,
            provenance: Provenance::ExactCap,
            n,
            samples: None,
            seed: None,
        })
    }

    pub fn levy(n: usize, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let alpha = grid
            .iter()
            .map(|&e| levy_bound(n, e))
            .collect::<Result<Vec<_>>>()?;
        Self::checked(Self {
            epsilon: grid.to_vec(),
            alpha,
            provenance: Provenance::LevyBound,
            n,
            samples: None,
            seed: None,
        })
    }

    /// Monte Carlo curve `1 - mu(O_eps(A))` on `S^{d-1}`, one shared sample.
    pub fn empirical(
        set: &SphericalSet,
        d: usize,
        grid: &[f64],
        m: usize,
        seed: u64,
    ) -> Result<Self> {
        check_grid(grid)?;
        let dists = sample_set_distances(set, d, m, seed)?;
        let alpha = grid
            .iter()
            .map(|&e| {
                let r = geodesic_to_chordal(e.min(PI));
                let inside = dists
                    .iter()
                    .filter(|&&(member, dist)| member || dist < r)
                    .count();
                1.0 - inside as f64 / m as f64
            })
            .collect();
        Self::checked(Self {
            epsilon: grid.to_vec(),
            alpha,
            provenance: Provenance::Empirical,
            n: d - 1,
            samples: Some(m),
            seed: Some(seed),
        })
    }

    fn checked(curve: Self) -> Result<Self> {
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.len() != self.alpha.len() {
            return Err(Error::Consistency("grid and value lengths differ".into()));
        }
        check_grid(&self.epsilon)?;
        for w in self.alpha.windows(2) {
            if w[1] > w[0] + CURVE_MONOTONE_TOL {
                return Err(Error::Consistency(format!(
                    "concentration curve increases: {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if self.alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Consistency("alpha outside [0, 1]".into()));
        }
        if self.provenance == Provenance::ExactCap {
            if let Some(i) = self.epsilon.iter().position(|&e| e == 0.0) {
                if self.alpha[i] != 0.5 {
                    return Err(Error::Consistency(format!(
                        "alpha(0) = {} != 1/2",
                        self.alpha[i]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_CSV_HEADER);
        out.push('\n');
        let samples = self.samples.map(|s| s.to_string()).unwrap_or_default();
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        for (e, a) in self.epsilon.iter().zip(&self.alpha) {
            let _ = writeln!(
                out,
                "{e},{a},{},{},{samples},{seed}",
                self.provenance.as_str(),
                self.n
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == CURVE_CSV_HEADER => {}
            other => return Err(Error::Parse(format!("bad curve header {other:?}"))),
        }
        let mut curve: Option<Self> = None;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Parse(format!("expected 6 fields in `{line}`")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
            let opt = |s: &str| -> Result<Option<u64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse()
                        .map(Some)
                        .map_err(|e: std::num::ParseIntError| Error::Parse(e.to_string()))
                }
            };
            let provenance: Provenance = f[2].parse()?;
            let n: usize = f[3]
                .parse()
                .map_err(|e: std::num::ParseIntError| Error::Parse(e.to_string()))?;
            let samples = opt(f[4])?.map(|s| s as usize);
            let seed = opt(f[5])?;
            let c = curve.get_or_insert_with(|| Self {
                epsilon: Vec::new(),
                alpha: Vec::new(),
                provenance,
                n,
                samples,
                seed,
            });
            if c.provenance != provenance || c.n != n || c.samples != samples || c.seed != seed {
                return Err(Error::Parse("curve metadata changes between rows".into()));
            }
            c.epsilon.push(num(f[0])?);
            c.alpha.push(num(f[1])?);
        }
        curve.ok_or_else(|| Error::Parse("empty curve".into()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return invalid("epsilon grid is empty");
    }
    if grid.iter().any(|e| e.is_nan() || *e < 0.0) {
        return invalid("epsilon grid must be nonnegative");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("epsilon grid must be strictly increasing");
    }
    Ok(())
}

/// Monte Carlo estimate of the neighbourhood measure of a set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalAlpha {
    pub measure_set: f64,
    pub measure_neighbourhood: f64,
    pub alpha: f64,
    pub stderr_set: f64,
    pub stderr_neighbourhood: f64,
    /// True when `measure_set >= 1/2`, i.e. `alpha` estimates a lower bound
    /// on the concentration function.
    pub lower_bound: bool,
    pub samples: usize,
    pub seed: u64,
}

impl EmpiricalAlpha {
    /// Whether the estimated set measure clears `alpha_exact` by three
    /// standard errors, the premise under which `mu(O_eps(A)) > 1/2` must follow.
    pub fn exceeds_alpha(&self, alpha_exact: f64) -> bool {
        self.measure_set > alpha_exact + 3.0 * self.stderr_set
    }
}

pub(crate) fn bernoulli_stderr(p: f64, m: usize) -> f64 {
    (p * (1.0 - p) / m as f64).sqrt()
}

fn sample_set_distances(
    set: &SphericalSet,
    d: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<(bool, f64)>> {
    if d == 0 || m == 0 {
        return invalid("empirical estimates need d >= 1 and m >= 1");
    }
    if !set.has_distance() {
        return invalid(format!("set `{}` has no distance evaluator", set.label()));
    }
    Ok(rng::par_samples(m, seed, 0, |rng, _| {
        let x = UnitVector::from_unit_unchecked(random_unit(rng, d), Field::Real);
        let dist = set.distance(&x).expect("distance evaluator present");
        (set.contains(&x), dist)
    }))
}

/// Estimates `mu(A)`, `mu(O_eps(A))` and `1 - mu(O_eps(A))` on `S^{d-1}`
/// with geodesic radius `eps`. Members of `A` count as inside, so `eps = 0`
/// measures `A` itself.
pub fn empirical_alpha(
    set: &SphericalSet,
    d: usize,
    eps: f64,
    m: usize,
    seed: u64,
) -> Result<EmpiricalAlpha> {
    if eps.is_nan() || eps < 0.0 {
        return invalid(format!("epsilon must be nonnegative (got {eps})"));
    }
    let r = geodesic_to_chordal(eps.min(PI));
    let dists = sample_set_distances(set, d, m, seed)?;
    let in_set = dists.iter().filter(|p| p.0).count();
    let in_nbhd = dists.iter().filter(|p| p.0 || p.1 < r).count();
    let mu_a = in_set as f64 / m as f64;
    let mu_o = in_nbhd as f64 / m as f64;
    Ok(EmpiricalAlpha {
        measure_set: mu_a,
        measure_neighbourhood: mu_o,
        alpha: 1.0 - mu_o,
        stderr_set: bernoulli_stderr(mu_a, m),
        stderr_neighbourhood: bernoulli_stderr(mu_o, m),
        lower_bound: mu_a >= 0.5,
        samples: m,
        seed,
    })
}

/// Largest singular value, as the root of the top eigenvalue of `T^T T`.
pub fn operator_norm(t: &DMatrix<f64>) -> f64 {
    let gram = t.transpose() * t;
    SymmetricEigen::new(gram).eigenvalues.max().max(0.0).sqrt()
}

/// `f_T(xi) = (T xi, xi)`; for realified complex data this is the real part.
pub fn quadratic_functional(t: &DMatrix<f64>, xi: &UnitVector) -> Result<f64> {
    if !t.is_square() || t.nrows() != xi.real_dim() {
        return invalid(format!(
            "operator of shape {}x{} does not act on dimension {}",
            t.nrows(),
            t.ncols(),
            xi.real_dim()
        ));
    }
    Ok((t * xi.coords()).dot(xi.coords()))
}

/// `z_S(f) = sum_{j in S} |f_j|^2`, indices over the vector's own field.
pub fn mask_norm_functional(mask: &[usize], f: &UnitVector) -> Result<f64> {
    let d = f.dim();
    let c = f.coords();
    let mut total = 0.0;
    for &j in mask {
        if j >= d {
            return invalid(format!("mask index {j} out of range for dimension {d}"));
        }
        total += match f.field() {
            Field::Real => c[j] * c[j],
            Field::Complex => c[2 * j] * c[2 * j] + c[2 * j + 1] * c[2 * j + 1],
        };
    }
    Ok(total)
}

/// Outcome of checking `|f(x) - f(y)| <= L ||x - y||` on sample pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzCheck {
    pub constant: f64,
    pub pairs: usize,
    pub violations: usize,
    /// Largest observed `|f(x) - f(y)| / ||x - y||`.
    pub worst_ratio: f64,
}

/// Rounding slack on Lipschitz comparisons.
const LIPSCHITZ_SLACK: f64 = 1e-12;

fn check_lipschitz<F>(
    constant: f64,
    pairs: &[(UnitVector, UnitVector)],
    f: F,
) -> Result<LipschitzCheck>
where
    F: Fn(&UnitVector) -> Result<f64>,
{
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for (x, y) in pairs {
        let gap = (f(x)? - f(y)?).abs();
        let dist = chordal_distance(x, y)?;
        if gap > constant * dist + LIPSCHITZ_SLACK * (1.0 + constant) {
            violations += 1;
        }
        if dist > 0.0 {
            worst = worst.max(gap / dist);
        }
    }
    Ok(LipschitzCheck {
        constant,
        pairs: pairs.len(),
        violations,
        worst_ratio: worst,
    })
}

/// Checks the `2 ||T||` Lipschitz bound of [`quadratic_functional`].
pub fn check_quadratic_lipschitz(
    t: &DMatrix<f64>,
    pairs: &[(UnitVector, UnitVector)],
) -> Result<LipschitzCheck> {
    let constant = 2.0 * operator_norm(t);
    check_lipschitz(constant, pairs, |x| quadratic_functional(t, x))
}

/// Checks the 2-Lipschitz bound of [`mask_norm_functional`].
pub fn check_mask_lipschitz(
    mask: &[usize],
    pairs: &[(UnitVector, UnitVector)],
) -> Result<LipschitzCheck> {
    check_lipschitz(2.0, pairs, |x| mask_norm_functional(mask, x))
}
