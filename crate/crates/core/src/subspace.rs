//! Pairs of finite-rank orthogonal projections: trace distance, principal
//! angles and the isometry between the two unit spheres.
//!
//! Complex frames are stored realified. A complex rank-`n` frame in `C^d`
//! becomes a real frame of `2n` columns in `R^{2d}` (each vector `v` followed
//! by `i v`), so its principal angles appear twice each.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{checked_svd, symmetric_trace_norm};
use crate::rng;
use crate::sphere::{bernoulli_stderr, random_unit, Field, UnitVector};

/// Orthonormality tolerance for frames and aligned directions.
pub const ORTHO_TOL: f64 = 1e-10;
/// Tolerance for spectral cross-checks.
pub const SPECTRAL_TOL: f64 = 1e-8;
/// Relative threshold below which a Gram–Schmidt residual counts as rank loss.
pub const RANK_TOL: f64 = 1e-8;

/// Multiplies realified complex coordinates by `i`.
fn times_i(v: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(
        v.len(),
        |k, _| if k % 2 == 0 { -v[k + 1] } else { v[k - 1] },
    )
}

/// Orthonormal columns spanning a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    basis: DMatrix<f64>,
    field: Field,
}

impl Frame {
    /// Modified Gram–Schmidt with one reorthogonalization pass.
    ///
    /// Complex input vectors are realified (length `2d`).
    pub fn orthonormalize(vectors: &[DVector<f64>], field: Field) -> Result<Frame> {
        let Some(first) = vectors.first() else {
            return invalid("cannot orthonormalize an empty family");
        };
        let rows = first.len();
        if rows == 0 || vectors.iter().any(|v| v.len() != rows) {
            return invalid("vectors must share a nonzero dimension");
        }
        if field == Field::Complex && rows % 2 != 0 {
            return invalid("realified complex vectors must have even length");
        }
        let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for (index, v) in vectors.iter().enumerate() {
            let mut r = v.clone();
            for _ in 0..2 {
                for q in &cols {
                    let c = q.dot(&r);
                    r.axpy(-c, q, 1.0);
                }
            }
            let norm = r.norm();
            if norm.is_nan() || norm <= RANK_TOL * scale {
                return Err(Error::RankDeficient { index });
            }
            r /= norm;
            if field == Field::Complex {
                // span over C of the previous columns is closed under i, so
                // i r is already orthogonal to it and to r
                let ir = times_i(&r);
                cols.push(r);
                cols.push(ir);
            } else {
                cols.push(r);
            }
        }
        Ok(Frame {
            basis: DMatrix::from_columns(&cols),
            field,
        })
    }

    /// Wraps columns that are already orthonormal within [`ORTHO_TOL`].
    pub fn from_orthonormal(basis: DMatrix<f64>, field: Field) -> Result<Frame> {
        if basis.ncols() == 0 || basis.nrows() == 0 {
            return invalid("frame must have at least one column");
        }
        if field == Field::Complex
            && (!basis.nrows().is_multiple_of(2) || !basis.ncols().is_multiple_of(2))
        {
            return invalid("realified complex frame needs even shape");
        }
        let gram = basis.transpose() * &basis;
        let dev = (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax();
        if dev > ORTHO_TOL {
            return invalid(format!(
                "columns are not orthonormal (Gram deviation {dev:e})"
            ));
        }
        Ok(Frame { basis, field })
    }

    /// Frame of standard basis vectors `e_i`, `i` in `indices`, of the
    /// `d`-dimensional space over `field`.
    pub fn coordinate(d: usize, indices: &[usize], field: Field) -> Result<Frame> {
        if indices.iter().any(|&i| i >= d) {
            return invalid(format!("coordinate index out of range for dimension {d}"));
        }
        let vectors: Vec<_> = indices
            .iter()
            .map(|&i| {
                let mut v = DVector::zeros(field.real_dim(d));
                v[field.real_dim(i)] = 1.0;
                v
            })
            .collect();
        Frame::orthonormalize(&vectors, field)
    }

    /// Uniformly random rank-`n` subspace of the `d`-dimensional space.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize, field: Field) -> Result<Frame> {
        if n == 0 || n > d {
            return invalid(format!("rank {n} must lie in 1..={d}"));
        }
        let vectors: Vec<_> = (0..n)
            .map(|_| random_unit(rng, field.real_dim(d)))
            .collect();
        Frame::orthonormalize(&vectors, field)
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Dimension of the ambient space over the reals.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Number of real columns.
    pub fn columns(&self) -> usize {
        self.basis.ncols()
    }

    /// Rank over the frame's field.
    pub fn rank(&self) -> usize {
        self.columns() / self.multiplicity()
    }

    /// Ambient dimension over the frame's field.
    pub fn dim(&self) -> usize {
        self.ambient_dim() / self.multiplicity()
    }

    /// How many real columns represent one column over the field.
    pub fn multiplicity(&self) -> usize {
        match self.field {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }

    /// The orthogonal projection `F F^H` (realified).
    pub fn projection(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Uniform unit vector of the range.
    pub fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector {
        let c = random_unit(rng, self.columns());
        UnitVector::from_unit_unchecked(&self.basis * c, self.field)
    }

    /// Distance from `x` to the range, `||x - P x||`.
    pub fn distance_to_range(&self, x: &DVector<f64>) -> f64 {
        let p = &self.basis * (self.basis.transpose() * x);
        (x - p).norm()
    }

    /// Column-major CSV: a line `d,n,field` then one line per column.
    /// Complex columns are written as interleaved real and imaginary parts.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{},{}\n", self.dim(), self.rank(), self.field.as_str());
        for j in (0..self.columns()).step_by(self.multiplicity()) {
            let line: Vec<String> = self.basis.column(j).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Frame> {
        let parse_err = |m: String| Error::Parse(m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines
            .next()
            .ok_or_else(|| parse_err("empty frame file".into()))?;
        let parts: Vec<&str> = head.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(parse_err(format!("bad frame header `{head}`")));
        }
        let d: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(format!("bad d `{}`", parts[0])))?;
        let n: usize = parts[1]
            .parse()
            .map_err(|_| parse_err(format!("bad n `{}`", parts[1])))?;
        let field: Field = parts[2].parse()?;
        let mut vectors = Vec::with_capacity(n);
        for line in lines {
            let v = line
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| parse_err(format!("bad number `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if v.len() != field.real_dim(d) {
                return Err(parse_err(format!(
                    "column has {} entries, expected {}",
                    v.len(),
                    field.real_dim(d)
                )));
            }
            vectors.push(DVector::from_vec(v));
        }
        if vectors.len() != n {
            return Err(parse_err(format!(
                "expected {n} columns, found {}",
                vectors.len()
            )));
        }
        let mut cols = Vec::new();
        for v in vectors {
            if field == Field::Complex {
                let iv = times_i(&v);
                cols.push(v);
                cols.push(iv);
            } else {
                cols.push(v);
            }
        }
        Frame::from_orthonormal(DMatrix::from_columns(&cols), field)
    }
}

fn same_space(f1: &Frame, f2: &Frame) -> Result<()> {
    if f1.ambient_dim() != f2.ambient_dim() || f1.field != f2.field {
        return invalid(format!(
            "frames live in different spaces ({} {} vs {} {})",
            f1.dim(),
            f1.field.as_str(),
            f2.dim(),
            f2.field.as_str()
        ));
    }
    Ok(())
}

fn same_rank(f1: &Frame, f2: &Frame) -> Result<()> {
    same_space(f1, f2)?;
    if f1.columns() != f2.columns() {
        return invalid(format!("rank mismatch: {} vs {}", f1.rank(), f2.rank()));
    }
    Ok(())
}

/// Trace norm `||P_1 - P_2||_1` from the eigenvalues of the difference.
pub fn trace_distance(f1: &Frame, f2: &Frame) -> Result<f64> {
    same_space(f1, f2)?;
    let diff = f1.projection() - f2.projection();
    Ok(symmetric_trace_norm(diff) / f1.multiplicity() as f64)
}

/// Principal angles of an equal-rank pair together with the matched
/// directions realizing them.
#[derive(Debug, Clone)]
pub struct PrincipalAngleDecomposition {
    /// Nondecreasing angles in `[0, pi/2]`, one per real column.
    pub angles: Vec<f64>,
    pub cosines: Vec<f64>,
    /// Column `i` spans `range(P_1)` direction matched with `right` column `i`.
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
    /// Normalized `left_i + right_i`, the eigenvectors of `P_1 + P_2` with
    /// eigenvalue `1 + cos theta_i`.
    pub pair_vectors: DMatrix<f64>,
    /// Isometry coordinates: `U` and `V` with `F_1^H F_2 = U diag(cos) V^H`.
    u: DMatrix<f64>,
    v: DMatrix<f64>,
}

/// Angles via the singular value decomposition of `F_1^H F_2`.
pub fn principal_angles(f1: &Frame, f2: &Frame) -> Result<PrincipalAngleDecomposition> {
    same_rank(f1, f2)?;
    let k = f1.columns();
    let c = f1.basis.transpose() * &f2.basis;
    let svd = checked_svd(&c)?;
    let u_all = svd.u.expect("requested");
    let vt_all = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let u = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| u_all.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    let v = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| vt_all.row(i).transpose())
            .collect::<Vec<_>>(),
    );
    let cosines: Vec<f64> = order
        .iter()
        .map(|&i| svd.singular_values[i].clamp(0.0, 1.0))
        .collect();
    let left = &f1.basis * &u;
    let right = &f2.basis * &v;
    // sine from the component of right_i orthogonal to left_i: accurate
    // where acos of a cosine near 1 is not
    let angles = (0..k)
        .map(|i| {
            let s = (right.column(i) - left.column(i) * cosines[i]).norm();
            s.atan2(cosines[i])
        })
        .collect();
    let mut pairs = &left + &right;
    for mut col in pairs.column_iter_mut() {
        let n = col.norm();
        col /= n;
    }
    Ok(PrincipalAngleDecomposition {
        angles,
        cosines,
        left,
        right,
        pair_vectors: pairs,
        u,
        v,
    })
}

impl PrincipalAngleDecomposition {
    /// Maximum deviation between the sorted `{1 +- cos theta_i}` and the
    /// spectrum of `P_1 + P_2` (remaining eigenvalues compared with 0).
    pub fn spectral_deviation(&self, f1: &Frame, f2: &Frame) -> Result<f64> {
        same_rank(f1, f2)?;
        let d = f1.ambient_dim();
        let eig = SymmetricEigen::new(f1.projection() + f2.projection());
        let mut spectrum: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        spectrum.sort_by(|a, b| b.total_cmp(a));
        let mut expected: Vec<f64> = self
            .cosines
            .iter()
            .flat_map(|c| [1.0 + c, 1.0 - c])
            .collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        expected.resize(expected.len().max(d), 0.0);
        spectrum.resize(expected.len(), 0.0);
        Ok(spectrum
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Residuals as serialized in JSON: angle list plus spectral and
    /// orthogonality residuals.
    pub fn to_json(&self, f1: &Frame, f2: &Frame) -> Result<String> {
        let aligned = aligned_frames(self);
        #[derive(Serialize)]
        struct Residuals {
            spectral: f64,
            orthogonality: f64,
            reconstruction_left: f64,
            reconstruction_right: f64,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            angles: &'a [f64],
            residuals: Residuals,
        }
        let out = Out {
            angles: &self.angles,
            residuals: Residuals {
                spectral: self.spectral_deviation(f1, f2)?,
                orthogonality: aligned.orthogonality_residual,
                reconstruction_left: aligned.reconstruction_residual(f1, 1),
                reconstruction_right: aligned.reconstruction_residual(f2, 2),
            },
        };
        Ok(serde_json::to_string_pretty(&out).expect("serializable"))
    }
}

/// Rank-one directions `e_1^i`, `e_2^i` aligned pairwise.
#[derive(Debug, Clone)]
pub struct AlignedFrames {
    pub e1: DMatrix<f64>,
    pub e2: DMatrix<f64>,
    /// `max |<e_j^i, e_k^m>|` over `i != m`.
    pub orthogonality_residual: f64,
}

impl AlignedFrames {
    /// Entrywise deviation of `sum_i e_j^i (e_j^i)^H` from the projection of `frame`.
    pub fn reconstruction_residual(&self, frame: &Frame, j: usize) -> f64 {
        let e = if j == 1 { &self.e1 } else { &self.e2 };
        (e * e.transpose() - frame.projection()).amax()
    }
}

/// `e_j^i` spans `P_j x_i^+`, which is the `i`-th left (right) singular
/// direction. At `theta_i = pi/2` these are still orthonormal columns of
/// the two ranges, so no separate fallback is needed.
pub fn aligned_frames(pad: &PrincipalAngleDecomposition) -> AlignedFrames {
    let k = pad.left.ncols();
    let mut worst: f64 = 0.0;
    let blocks = [&pad.left, &pad.right];
    for a in blocks {
        for b in blocks {
            let g = a.transpose() * b;
            for i in 0..k {
                for m in 0..k {
                    if i != m {
                        worst = worst.max(g[(i, m)].abs());
                    }
                }
            }
        }
    }
    AlignedFrames {
        e1: pad.left.clone(),
        e2: pad.right.clone(),
        orthogonality_residual: worst,
    }
}

/// Unitary map from `range(P_1)` onto `range(P_2)` sending each `e_1^i` to
/// `e_2^i`, written in the two frames' coordinates.
#[derive(Debug, Clone)]
pub struct IsometryMap {
    pub matrix: DMatrix<f64>,
    source: DMatrix<f64>,
    target: DMatrix<f64>,
}

pub fn build_isometry(f1: &Frame, f2: &Frame) -> Result<IsometryMap> {
    let pad = principal_angles(f1, f2)?;
    Ok(IsometryMap {
        matrix: &pad.v * pad.u.transpose(),
        source: f1.basis.clone(),
        target: f2.basis.clone(),
    })
}

impl IsometryMap {
    /// `r(x) = F_2 M F_1^H x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.target * (&self.matrix * (self.source.transpose() * x))
    }

    /// `max |(M^H M - I)_{ij}|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.matrix.ncols();
        (self.matrix.transpose() * &self.matrix - DMatrix::identity(n, n)).amax()
    }

    /// `(||r(x) - x||, sqrt(2) dist(x, H_2))` for `x` in the source range.
    pub fn bound_terms(&self, x: &DVector<f64>) -> (f64, f64) {
        let rx = self.apply(x);
        let p2x = &self.target * (self.target.transpose() * x);
        ((rx - x).norm(), SQRT_2 * (x - p2x).norm())
    }
}

/// Result of testing `||r(x) - x|| <= sqrt(2) dist(x, H_2)` on random
/// unit vectors of `range(P_1)`.
#[derive(Debug, Clone, Serialize)]
pub struct IsometryCheck {
    pub rank: usize,
    pub samples: usize,
    pub violations: usize,
    /// Violations of the weaker bound with the distance to the unit sphere of `H_2`.
    pub sphere_violations: usize,
    /// Largest `||r(x) - x|| / (sqrt(2) dist(x, H_2))` among samples with positive distance.
    pub worst_ratio: f64,
    pub unitarity_residual: f64,
    pub seed: u64,
}

const BOUND_SLACK: f64 = 1e-12;
/// `worst_ratio` ignores samples whose bound is below this.
const RATIO_FLOOR: f64 = 1e-9;

pub fn isometry_check(f1: &Frame, f2: &Frame, m: usize, seed: u64) -> Result<IsometryCheck> {
    let r = build_isometry(f1, f2)?;
    let terms = rng::par_samples(m, seed, 0, |rng, _| {
        let x = f1.sample_unit(rng).into_coords();
        let (lhs, rhs) = r.bound_terms(&x);
        let p2x = &r.target * (r.target.transpose() * &x);
        let n = p2x.norm();
        let to_sphere = if n > 0.0 {
            (&x - p2x / n).norm()
        } else {
            SQRT_2
        };
        (lhs, rhs, SQRT_2 * to_sphere)
    });
    let violations = terms.iter().filter(|t| t.0 > t.1 + BOUND_SLACK).count();
    let sphere_violations = terms.iter().filter(|t| t.0 > t.2 + BOUND_SLACK).count();
    let worst_ratio = terms
        .iter()
        .filter(|t| t.1 > RATIO_FLOOR)
        .map(|t| t.0 / t.1)
        .fold(0.0, f64::max);
    Ok(IsometryCheck {
        rank: f1.rank(),
        samples: m,
        violations,
        sphere_violations,
        worst_ratio,
        unitarity_residual: r.unitarity_residual(),
        seed,
    })
}

/// Monte Carlo estimate of `mu{x in S_1 : ||x - P_2 x|| < eps}`.
#[derive(Debug, Clone, Serialize)]
pub struct ProximityMass {
    pub rank: usize,
    pub epsilon: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// `1 - sqrt(pi/8) exp(-eps^2 n / 8)`.
    pub reference_bound: f64,
    /// Whether `||P_1 - P_2||_1 < n eps` holds for this pair.
    pub trace_condition_met: bool,
    /// Whether `n < sqrt(pi/8) exp(-eps^2 (n-1)/2)` holds; it fails for every `n >= 1`.
    pub side_condition_met: bool,
    pub samples: usize,
    pub seed: u64,
}

pub fn proximity_reference_bound(n: usize, eps: f64) -> f64 {
    1.0 - (std::f64::consts::PI / 8.0).sqrt() * (-eps * eps * n as f64 / 8.0).exp()
}

pub fn proximity_mass(
    f1: &Frame,
    f2: &Frame,
    eps: f64,
    m: usize,
    seed: u64,
) -> Result<ProximityMass> {
    same_rank(f1, f2)?;
    if (eps.is_nan() || eps < 0.0) || m == 0 {
        return invalid("proximity mass needs eps >= 0 and m >= 1");
    }
    let hits = rng::par_fold(
        m,
        seed,
        0,
        0usize,
        |rng, _, acc| {
            let x = f1.sample_unit(rng);
            if f2.distance_to_range(x.coords()) < eps {
                *acc += 1;
            }
        },
        |a, b| a + b,
    );
    let n = f1.rank();
    let p = hits as f64 / m as f64;
    let c1 = (std::f64::consts::PI / 8.0).sqrt();
    Ok(ProximityMass {
        rank: n,
        epsilon: eps,
        estimate: p,
        stderr: bernoulli_stderr(p, m),
        reference_bound: proximity_reference_bound(n, eps),
        trace_condition_met: trace_distance(f1, f2)? < n as f64 * eps,
        side_condition_met: (n as f64) < c1 * (-eps * eps * (n as f64 - 1.0) / 2.0).exp(),
        samples: m,
        seed,
    })
}

/// Rank-`n` pair in `R^d` (`d >= 2n`) whose principal angles all equal `theta`.
pub fn constant_angle_pair(d: usize, n: usize, theta: f64) -> Result<(Frame, Frame)> {
    if n == 0 || 2 * n > d {
        return invalid(format!("need 1 <= n and 2n <= d (got n={n}, d={d})"));
    }
    let mut b1 = DMatrix::zeros(d, n);
    let mut b2 = DMatrix::zeros(d, n);
    for i in 0..n {
        b1[(2 * i, i)] = 1.0;
        b2[(2 * i, i)] = theta.cos();
        b2[(2 * i + 1, i)] = theta.sin();
    }
    Ok((
        Frame::from_orthonormal(b1, Field::Real)?,
        Frame::from_orthonormal(b2, Field::Real)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn e(d: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        v
    }

    #[test]
    fn orthonormalize_examples() {
        let f = Frame::orthonormalize(&[e(3, 0), e(3, 0) + e(3, 1)], Field::Real).unwrap();
        assert!((f.basis().column(0) - e(3, 0)).amax() < 1e-15);
        assert!((f.basis().column(1) - e(3, 1)).amax() < 1e-15);
        let q = Frame::random(&mut rng(1), 7, 4, Field::Real).unwrap();
        let cols: Vec<_> = q.basis().column_iter().map(|c| c.into_owned()).collect();
        let again = Frame::orthonormalize(&cols, Field::Real).unwrap();
        assert!((again.basis() - q.basis()).amax() < 1e-12);
        let v = e(4, 2) * 3.0;
        assert!(matches!(
            Frame::orthonormalize(&[e(4, 0), v.clone(), v], Field::Real),
            Err(Error::RankDeficient { index: 2 })
        ));
    }

    #[test]
    fn projection_is_idempotent_and_symmetric() {
        for field in [Field::Real, Field::Complex] {
            let f = Frame::random(&mut rng(2), 9, 4, field).unwrap();
            let p = f.projection();
            assert!((&p * &p - &p).amax() < 1e-10);
            assert!((p.transpose() - &p).amax() < 1e-10);
            assert_eq!(f.rank(), 4);
            assert_eq!(f.dim(), 9);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let f = Frame::random(&mut rng(3), 6, 2, Field::Real).unwrap();
        assert!(trace_distance(&f, &f).unwrap() < 1e-12);
        let e1 = Frame::coordinate(2, &[0], Field::Real).unwrap();
        let e2 = Frame::coordinate(2, &[1], Field::Real).unwrap();
        // oracle: eigenvalues of e1e1^T - e2e2^T
        let eig = SymmetricEigen::new(e1.projection() - e2.projection());
        let oracle: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();
        assert!((trace_distance(&e1, &e2).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 2.0).abs() < 1e-12);
        for theta in [0.1, 0.7, 1.3] {
            let (a, b) = constant_angle_pair(2, 1, theta).unwrap();
            // explicit 2x2 eigencomputation: difference has eigenvalues +- sin theta
            let m = a.projection() - b.projection();
            let (p, q, r) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let disc = (((p - r) / 2.0).powi(2) + q * q).sqrt();
            let oracle = ((p + r) / 2.0 + disc).abs() + ((p + r) / 2.0 - disc).abs();
            assert!((trace_distance(&a, &b).unwrap() - oracle).abs() < 1e-12);
            assert!((oracle - 2.0 * theta.sin()).abs() < 1e-12);
        }
        let g = Frame::random(&mut rng(4), 5, 2, Field::Real).unwrap();
        let h = Frame::random(&mut rng(4), 6, 2, Field::Real).unwrap();
        assert!(trace_distance(&g, &h).is_err());
    }

    #[test]
    fn complex_trace_distance_is_not_doubled() {
        let a = Frame::coordinate(2, &[0], Field::Complex).unwrap();
        let b = Frame::coordinate(2, &[1], Field::Complex).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn angles_trivial_cases() {
        let f = Frame::random(&mut rng(5), 10, 3, Field::Real).unwrap();
        let pad = principal_angles(&f, &f).unwrap();
        assert!(pad.angles.iter().all(|&t| t.abs() < 1e-7));
        let a = Frame::coordinate(6, &[0, 1], Field::Real).unwrap();
        let b = Frame::coordinate(6, &[2, 3], Field::Real).unwrap();
        let pad = principal_angles(&a, &b).unwrap();
        assert!(pad.angles.iter().all(|&t| (t - FRAC_PI_2).abs() < 1e-12));
        let c = Frame::coordinate(6, &[2], Field::Real).unwrap();
        assert!(principal_angles(&a, &c).is_err());
    }

    #[test]
    fn spectral_cross_check_random() {
        let mut r = rng(6);
        for _ in 0..20 {
            let f1 = Frame::random(&mut r, 40, 5, Field::Real).unwrap();
            let f2 = Frame::random(&mut r, 40, 5, Field::Real).unwrap();
            let pad = principal_angles(&f1, &f2).unwrap();
            assert!(pad.spectral_deviation(&f1, &f2).unwrap() < SPECTRAL_TOL);
        }
        // ranges forced to intersect: 2n > d
        let f1 = Frame::random(&mut r, 7, 5, Field::Real).unwrap();
        let f2 = Frame::random(&mut r, 7, 5, Field::Real).unwrap();
        let pad = principal_angles(&f1, &f2).unwrap();
        assert!(pad.spectral_deviation(&f1, &f2).unwrap() < SPECTRAL_TOL);
        assert!(pad.angles[..3].iter().all(|&t| t < 1e-6));
    }

    #[test]
    fn aligned_frames_random() {
        let mut r = rng(7);
        let f1 = Frame::random(&mut r, 20, 3, Field::Real).unwrap();
        let f2 = Frame::random(&mut r, 20, 3, Field::Real).unwrap();
        let pad = principal_angles(&f1, &f2).unwrap();
        let al = aligned_frames(&pad);
        // oracle: explicit Gram matrix of all six directions
        let all = DMatrix::from_columns(
            &al.e1
                .column_iter()
                .chain(al.e2.column_iter())
                .map(|c| c.into_owned())
                .collect::<Vec<_>>(),
        );
        let g = all.transpose() * &all;
        for i in 0..3 {
            for m in 0..3 {
                if i != m {
                    for (a, b) in [(i, m), (i, m + 3), (i + 3, m), (i + 3, m + 3)] {
                        assert!(g[(a, b)].abs() <= 1e-10);
                    }
                }
            }
            // e_1^i is the normalized projection of x_i^+ onto range(P_1)
            let p = f1.projection() * pad.pair_vectors.column(i);
            assert!((p.normalize() - al.e1.column(i)).amax() < 1e-10);
        }
        assert!(al.orthogonality_residual <= 1e-10);
        assert!(al.reconstruction_residual(&f1, 1) < 1e-8);
        assert!(al.reconstruction_residual(&f2, 2) < 1e-8);
        let same = aligned_frames(&principal_angles(&f1, &f1).unwrap());
        assert!((same.e1 - same.e2).amax() < 1e-7);
    }

    #[test]
    fn pair_vectors_are_eigenvectors() {
        let mut r = rng(8);
        let f1 = Frame::random(&mut r, 15, 4, Field::Real).unwrap();
        let f2 = Frame::random(&mut r, 15, 4, Field::Real).unwrap();
        let pad = principal_angles(&f1, &f2).unwrap();
        let s = f1.projection() + f2.projection();
        for i in 0..4 {
            let x = pad.pair_vectors.column(i);
            let lam = 1.0 + pad.cosines[i];
            assert!((&s * x - x * lam).amax() < 1e-10);
        }
    }

    #[test]
    fn isometry_examples() {
        let mut r = rng(9);
        let f = Frame::random(&mut r, 8, 3, Field::Real).unwrap();
        let id = build_isometry(&f, &f).unwrap();
        let x = f.sample_unit(&mut r).into_coords();
        assert!((id.apply(&x) - &x).amax() < 1e-10);

        let f1 = Frame::random(&mut r, 60, 10, Field::Real).unwrap();
        let f2 = Frame::random(&mut r, 60, 10, Field::Real).unwrap();
        let check = isometry_check(&f1, &f2, 1000, 1).unwrap();
        assert_eq!(check.violations, 0);
        assert_eq!(check.sphere_violations, 0);
        assert!(check.unitarity_residual < 1e-10);

        let a = Frame::coordinate(6, &[0, 1], Field::Real).unwrap();
        let b = Frame::coordinate(6, &[2, 3], Field::Real).unwrap();
        let orth = build_isometry(&a, &b).unwrap();
        assert!(orth.unitarity_residual() < 1e-10);
        let x = a.sample_unit(&mut r).into_coords();
        assert!((orth.apply(&x).norm() - 1.0).abs() < 1e-10);
        assert!((orth.apply(&x) - &x).norm() <= 2.0 + 1e-12);
    }

    #[test]
    fn isometry_maps_left_to_right() {
        let mut r = rng(10);
        let f1 = Frame::random(&mut r, 12, 3, Field::Real).unwrap();
        let f2 = Frame::random(&mut r, 12, 3, Field::Real).unwrap();
        let pad = principal_angles(&f1, &f2).unwrap();
        let iso = build_isometry(&f1, &f2).unwrap();
        for i in 0..3 {
            let img = iso.apply(&pad.left.column(i).into_owned());
            assert!((img - pad.right.column(i)).amax() < 1e-10);
        }
    }

    #[test]
    fn proximity_examples() {
        let mut r = rng(11);
        let f = Frame::random(&mut r, 10, 3, Field::Real).unwrap();
        assert_eq!(proximity_mass(&f, &f, 0.1, 1000, 1).unwrap().estimate, 1.0);
        let a = Frame::coordinate(6, &[0, 1], Field::Real).unwrap();
        let b = Frame::coordinate(6, &[2, 3], Field::Real).unwrap();
        assert_eq!(proximity_mass(&a, &b, 0.9, 1000, 1).unwrap().estimate, 0.0);
        let (p, q) = constant_angle_pair(200, 100, 0.02).unwrap();
        let pm = proximity_mass(&p, &q, 0.1, 2000, 3).unwrap();
        // every x has ||x - P_2 x|| <= sin(0.02) < 0.1
        assert_eq!(pm.estimate, 1.0);
        assert!(pm.estimate >= pm.reference_bound - 3.0 * pm.stderr);
        assert!(!pm.side_condition_met);
    }

    #[test]
    fn frame_csv_round_trip() {
        for field in [Field::Real, Field::Complex] {
            let f = Frame::random(&mut rng(12), 5, 2, field).unwrap();
            let text = f.to_csv();
            assert!(text.starts_with(&format!("5,2,{}\n", field.as_str())));
            let g = Frame::from_csv(&text).unwrap();
            assert_eq!(f, g);
        }
        assert!(Frame::from_csv("3,1,real\n1,0\n").is_err());
    }

    #[test]
    fn decomposition_json_fields() {
        let mut r = rng(13);
        let f1 = Frame::random(&mut r, 9, 2, Field::Real).unwrap();
        let f2 = Frame::random(&mut r, 9, 2, Field::Real).unwrap();
        let pad = principal_angles(&f1, &f2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&pad.to_json(&f1, &f2).unwrap()).unwrap();
        assert_eq!(v["angles"].as_array().unwrap().len(), 2);
        assert!(v["residuals"]["spectral"].as_f64().unwrap() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn angles_symmetric_and_basis_invariant(seed in 0u64..1000, d in 4usize..20, n in 1usize..4) {
            let mut r = rng(seed);
            let f1 = Frame::random(&mut r, d, n, Field::Real).unwrap();
            let f2 = Frame::random(&mut r, d, n, Field::Real).unwrap();
            let a = principal_angles(&f1, &f2).unwrap().angles;
            let b = principal_angles(&f2, &f1).unwrap().angles;
            // compare cosines: arccos is ill-conditioned near 0
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.cos() - y.cos()).abs() < 1e-10);
            }
            let q = crate::group::haar_orthogonal(&mut r, n);
            let f1q = Frame::from_orthonormal(f1.basis() * q, Field::Real).unwrap();
            let c = principal_angles(&f1q, &f2).unwrap().angles;
            for (x, y) in a.iter().zip(&c) {
                prop_assert!((x.cos() - y.cos()).abs() < 1e-10);
            }
            let td = trace_distance(&f1, &f2).unwrap();
            let from_angles: f64 = 2.0 * a.iter().map(|t| t.sin()).sum::<f64>();
            prop_assert!((td - from_angles).abs() < 1e-8);
        }
    }
}
