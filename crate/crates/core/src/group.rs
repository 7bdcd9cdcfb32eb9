//! Reduced words of the free group `F_2`, finite permutations, and unitary
//! actions on truncated coordinate spaces.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use num_rational::Ratio;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::sphere::{mask_norm_functional, Field, UnitVector};

/// A generator of `F_2` or its inverse. Declaration order is the
/// lexicographic order used for ball enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'A' => Some(Letter::AInv),
            'b' => Some(Letter::B),
            'B' => Some(Letter::BInv),
            _ => None,
        }
    }
}

/// A freely reduced word over `{a, a^-1, b, b^-1}`.
///
/// Ordered by length, then lexicographically in `a < a^-1 < b < b^-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Self(vec![l])
    }

    /// Freely reduces an arbitrary letter string.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Word length; `is_identity` is the emptiness test.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[1] != w[0].inverse())
    }

    pub fn multiply(&self, other: &ReducedWord) -> ReducedWord {
        let mut out = self.0.clone();
        let mut rest = other.0.as_slice();
        while let (Some(&last), Some(&first)) = (out.last(), rest.first()) {
            if last != first.inverse() {
                break;
            }
            out.pop();
            rest = &rest[1..];
        }
        out.extend_from_slice(rest);
        ReducedWord(out)
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn pow(&self, k: i64) -> ReducedWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = ReducedWord::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// The class `n` with `w` in `W_n`: the signed length of the maximal
    /// initial run of `a` or `a^-1`. Words not starting with `a^{+-1}`
    /// (including the identity) are in `W_0`.
    pub fn prefix_class(&self) -> i64 {
        let first = match self.0.first() {
            Some(&l @ (Letter::A | Letter::AInv)) => l,
            _ => return 0,
        };
        let run = self.0.iter().take_while(|&&l| l == first).count() as i64;
        if first == Letter::A {
            run
        } else {
            -run
        }
    }
}

impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for ReducedWord {
    type Err = Error;

    /// Parses `a`, `A` (= `a^-1`), `b`, `B`; `e` or the empty string is the
    /// identity. Input need not be reduced.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" {
            return Ok(ReducedWord::identity());
        }
        let letters = s
            .chars()
            .map(|c| {
                Letter::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("bad letter `{c}` in word `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReducedWord::from_letters(letters))
    }
}

/// Default cap on the enumerated ball radius (`|B_10| = 118097`).
pub const DEFAULT_BALL_LIMIT: usize = 10;

/// The Cayley ball `B_R` of `F_2` with a word -> index map. Words are listed
/// by length, then lexicographically, so `B_r` occupies the index prefix
/// `0..2*3^r - 1` for every `r <= R`.
#[derive(Debug, Clone)]
pub struct Ball {
    radius: usize,
    words: Vec<ReducedWord>,
    index: HashMap<ReducedWord, usize>,
}

impl Ball {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn words(&self) -> &[ReducedWord] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, w: &ReducedWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Number of words of length at most `r` (`r <= radius`).
    pub fn prefix_len(r: usize) -> usize {
        2 * 3usize.pow(r as u32) - 1
    }
}

pub fn ball_enumerate(radius: usize) -> Result<Ball> {
    ball_enumerate_with_limit(radius, DEFAULT_BALL_LIMIT)
}

pub fn ball_enumerate_with_limit(radius: usize, limit: usize) -> Result<Ball> {
    if radius > limit {
        return Err(Error::ResourceLimit(format!(
            "ball radius {radius} exceeds the configured limit {limit}"
        )));
    }
    let mut words = vec![ReducedWord::identity()];
    let mut shell_start = 0;
    for _ in 0..radius {
        let shell_end = words.len();
        for i in shell_start..shell_end {
            let w = words[i].clone();
            for l in Letter::ALL {
                if w.0.last() == Some(&l.inverse()) {
                    continue;
                }
                let mut next = w.0.clone();
                next.push(l);
                words.push(ReducedWord(next));
            }
        }
        shell_start = shell_end;
    }
    let index = words
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, w)| (w, i))
        .collect();
    Ok(Ball {
        radius,
        words,
        index,
    })
}

/// A bijection of `{0, .., n-1}`; `images[i]` is the image of `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return invalid(format!("{images:?} is not a bijection"));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `(self * other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        same_degree(self, other)?;
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }
}

impl fmt::Display for Permutation {
    /// One-line image notation, 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|i| (i + 1).to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let images = s
            .split_whitespace()
            .map(|t| match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::Parse(format!("bad permutation entry `{t}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(images).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn same_degree(a: &Permutation, b: &Permutation) -> Result<()> {
    if a.degree() != b.degree() {
        return invalid(format!("degree mismatch: {} vs {}", a.degree(), b.degree()));
    }
    Ok(())
}

/// Hamming distance `|{i : a(i) != b(i)}|`.
pub fn hamming(a: &Permutation, b: &Permutation) -> Result<usize> {
    same_degree(a, b)?;
    Ok(a.images
        .iter()
        .zip(&b.images)
        .filter(|(x, y)| x != y)
        .count())
}

/// `phi(a, b) = d(a, b) / max(d(a, e), d(b, e))` for `a != b`, else 0.
pub fn phi(a: &Permutation, b: &Permutation) -> Result<Ratio<usize>> {
    let d = hamming(a, b)?;
    if d == 0 {
        return Ok(Ratio::from_integer(0));
    }
    let e = Permutation::identity(a.degree());
    let denom = hamming(a, &e)?.max(hamming(b, &e)?);
    Ok(Ratio::new(d, denom))
}

/// The pair `(sigma, eta)` of degree `n` (even): `sigma` swaps every adjacent
/// pair `(1 2)(3 4)...`, `eta` swaps the pairs from `(3 4)` on and fixes 1, 2.
pub fn adjacent_swap_pair(n: usize) -> Result<(Permutation, Permutation)> {
    if n < 2 || !n.is_multiple_of(2) {
        return invalid(format!("degree must be even and at least 2 (got {n})"));
    }
    let sigma: Vec<usize> = (0..n).map(|i| i ^ 1).collect();
    let eta: Vec<usize> = (0..n).map(|i| if i < 2 { i } else { i ^ 1 }).collect();
    Ok((Permutation::new(sigma)?, Permutation::new(eta)?))
}

/// Realizations of a unitary operator on a finite coordinate space.
#[derive(Debug, Clone)]
pub enum ActionKind {
    /// Orthogonal matrix on the real (realified) coordinates.
    Dense(DMatrix<f64>),
    /// `delta_i -> delta_{p(i)}` on coordinates over the action's field.
    Permutation(Permutation),
    /// Multiplication by a unit scalar.
    Scalar(Complex<f64>),
    /// Block-diagonal sum acting on consecutive coordinate blocks.
    DirectSum(Vec<UnitaryAction>),
    /// Left translation `delta_w -> delta_{gw}` on `l_2(B_R)`, defined only
    /// on vectors whose support stays inside the ball after translation.
    Regular(RegularShift),
}

#[derive(Debug, Clone)]
pub struct RegularShift {
    ball: Arc<Ball>,
    word: ReducedWord,
    image: Vec<Option<usize>>,
}

impl RegularShift {
    pub fn word(&self) -> &ReducedWord {
        &self.word
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    /// Ball index of `g w`, if it lies in the ball.
    pub fn image_of(&self, i: usize) -> Option<usize> {
        self.image[i]
    }
}

/// An invertible norm-preserving transformation of a coordinate space.
#[derive(Debug, Clone)]
pub struct UnitaryAction {
    label: String,
    field: Field,
    dim: usize,
    kind: ActionKind,
}

/// Orthogonality tolerance for dense realizations.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

impl UnitaryAction {
    pub fn identity(dim: usize, field: Field) -> Self {
        Self::scalar_unchecked("e", dim, field, Complex::new(1.0, 0.0))
    }

    fn scalar_unchecked(label: &str, dim: usize, field: Field, z: Complex<f64>) -> Self {
        Self {
            label: label.into(),
            field,
            dim,
            kind: ActionKind::Scalar(z),
        }
    }

    pub fn scalar(
        label: impl Into<String>,
        dim: usize,
        field: Field,
        z: Complex<f64>,
    ) -> Result<Self> {
        if (z.norm() - 1.0).abs() > ORTHOGONALITY_TOL {
            return invalid(format!("scalar {z} is not of modulus 1"));
        }
        if field == Field::Real && z.im != 0.0 {
            return invalid("a real space only admits the scalars +1 and -1");
        }
        Ok(Self {
            label: label.into(),
            field,
            dim,
            kind: ActionKind::Scalar(z),
        })
    }

    /// Dense orthogonal matrix on real coordinates (realified for complex
    /// fields). Rejects matrices that are not orthogonal within
    /// [`ORTHOGONALITY_TOL`].
    pub fn dense(label: impl Into<String>, m: DMatrix<f64>, field: Field) -> Result<Self> {
        if !m.is_square() {
            return invalid("dense action must be square");
        }
        let real_dim = m.nrows();
        if real_dim == 0 || (field == Field::Complex && !real_dim.is_multiple_of(2)) {
            return invalid("dense action has an incompatible size");
        }
        let defect = (m.transpose() * &m - DMatrix::identity(real_dim, real_dim)).amax();
        if defect > ORTHOGONALITY_TOL {
            return invalid(format!(
                "matrix is not an invertible isometry (|M^T M - I| = {defect:e})"
            ));
        }
        let dim = match field {
            Field::Real => real_dim,
            Field::Complex => real_dim / 2,
        };
        Ok(Self {
            label: label.into(),
            field,
            dim,
            kind: ActionKind::Dense(m),
        })
    }

    /// Dense unitary matrix over `C`, stored realified.
    pub fn dense_complex(label: impl Into<String>, m: &DMatrix<Complex<f64>>) -> Result<Self> {
        let (r, c) = m.shape();
        let mut real = DMatrix::zeros(2 * r, 2 * c);
        for i in 0..r {
            for j in 0..c {
                let z = m[(i, j)];
                real[(2 * i, 2 * j)] = z.re;
                real[(2 * i, 2 * j + 1)] = -z.im;
                real[(2 * i + 1, 2 * j)] = z.im;
                real[(2 * i + 1, 2 * j + 1)] = z.re;
            }
        }
        Self::dense(label, real, Field::Complex)
    }

    pub fn permutation(label: impl Into<String>, p: Permutation, field: Field) -> Self {
        Self {
            label: label.into(),
            field,
            dim: p.degree(),
            kind: ActionKind::Permutation(p),
        }
    }

    /// Cyclic shift `delta_i -> delta_{i+1 mod k}`.
    pub fn cyclic_shift(k: usize, field: Field) -> Result<Self> {
        if k == 0 {
            return invalid("cyclic shift needs k >= 1");
        }
        let p = Permutation::new((0..k).map(|i| (i + 1) % k).collect())?;
        Ok(Self::permutation("shift", p, field))
    }

    pub fn direct_sum(label: impl Into<String>, blocks: Vec<UnitaryAction>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty direct sum".into()))?;
        let field = first.field;
        if blocks.iter().any(|b| b.field != field) {
            return invalid("direct sum blocks must share a field");
        }
        if blocks.iter().any(|b| b.is_partial()) {
            return invalid("direct sum blocks must be total actions");
        }
        let dim = blocks.iter().map(|b| b.dim).sum();
        Ok(Self {
            label: label.into(),
            field,
            dim,
            kind: ActionKind::DirectSum(blocks),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Dimension over the action's field.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn real_dim(&self) -> usize {
        self.field.real_dim(self.dim)
    }

    pub fn kind(&self) -> &ActionKind {
        &self.kind
    }

    /// True for actions only defined on part of the space.
    pub fn is_partial(&self) -> bool {
        matches!(self.kind, ActionKind::Regular(_))
    }

    pub fn inverse(&self) -> UnitaryAction {
        let kind = match &self.kind {
            ActionKind::Dense(m) => ActionKind::Dense(m.transpose()),
            ActionKind::Permutation(p) => ActionKind::Permutation(p.inverse()),
            ActionKind::Scalar(z) => ActionKind::Scalar(z.conj()),
            ActionKind::DirectSum(bs) => {
                ActionKind::DirectSum(bs.iter().map(|b| b.inverse()).collect())
            }
            ActionKind::Regular(r) => {
                ActionKind::Regular(regular_shift(r.ball.clone(), &r.word.inverse()))
            }
        };
        Self {
            label: format!("({})^-1", self.label),
            field: self.field,
            dim: self.dim,
            kind,
        }
    }

    /// Applies the action to raw real coordinates.
    pub fn apply_coords(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.real_dim() {
            return invalid(format!(
                "action `{}` acts on {} real coordinates, got {}",
                self.label,
                self.real_dim(),
                x.len()
            ));
        }
        Ok(match &self.kind {
            ActionKind::Dense(m) => m * x,
            ActionKind::Permutation(p) => {
                let mut y = DVector::zeros(x.len());
                match self.field {
                    Field::Real => {
                        for i in 0..p.degree() {
                            y[p.apply(i)] = x[i];
                        }
                    }
                    Field::Complex => {
                        for i in 0..p.degree() {
                            let j = p.apply(i);
                            y[2 * j] = x[2 * i];
                            y[2 * j + 1] = x[2 * i + 1];
                        }
                    }
                }
                y
            }
            ActionKind::Scalar(z) => match self.field {
                Field::Real => x * z.re,
                Field::Complex => {
                    let mut y = DVector::zeros(x.len());
                    for j in 0..self.dim {
                        let (a, b) = (x[2 * j], x[2 * j + 1]);
                        y[2 * j] = z.re * a - z.im * b;
                        y[2 * j + 1] = z.im * a + z.re * b;
                    }
                    y
                }
            },
            ActionKind::DirectSum(blocks) => {
                let mut y = DVector::zeros(x.len());
                let mut off = 0;
                for b in blocks {
                    let n = b.real_dim();
                    let part = b.apply_coords(&x.rows(off, n).into_owned())?;
                    y.rows_mut(off, n).copy_from(&part);
                    off += n;
                }
                y
            }
            ActionKind::Regular(r) => {
                let mut y = DVector::zeros(x.len());
                for (i, &v) in x.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    match r.image[i] {
                        Some(j) => y[j] = v,
                        None => {
                            return Err(Error::SupportViolation {
                                index: i,
                                word: r.ball.words[i].to_string(),
                            })
                        }
                    }
                }
                y
            }
        })
    }

    pub fn apply(&self, x: &UnitVector) -> Result<UnitVector> {
        if x.field() != self.field {
            return invalid(format!("action `{}` is over a different field", self.label));
        }
        let y = self.apply_coords(x.coords())?;
        Ok(UnitVector::from_unit_unchecked(y, self.field))
    }

    /// Dense real matrix of the action. Partial actions give the matrix of
    /// the translation restricted to coordinates whose image stays in range
    /// (zero columns elsewhere).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.real_dim();
        match &self.kind {
            ActionKind::Dense(m) => m.clone(),
            ActionKind::Regular(r) => {
                let mut m = DMatrix::zeros(n, n);
                for (i, img) in r.image.iter().enumerate() {
                    if let Some(j) = img {
                        m[(*j, i)] = 1.0;
                    }
                }
                m
            }
            _ => {
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    let mut e = DVector::zeros(n);
                    e[i] = 1.0;
                    m.set_column(i, &self.apply_coords(&e).expect("dimension matches"));
                }
                m
            }
        }
    }
}

fn regular_shift(ball: Arc<Ball>, g: &ReducedWord) -> RegularShift {
    let image = ball
        .words
        .iter()
        .map(|w| ball.index_of(&g.multiply(w)))
        .collect();
    RegularShift {
        ball,
        word: g.clone(),
        image,
    }
}

/// Left translation by `g` on `l_2(B_R)`.
pub fn regular_action(g: &ReducedWord, radius: usize) -> Result<UnitaryAction> {
    let ball = Arc::new(ball_enumerate(radius)?);
    Ok(regular_action_on(g, ball))
}

/// Left translation by `g` on a shared, already enumerated ball.
pub fn regular_action_on(g: &ReducedWord, ball: Arc<Ball>) -> UnitaryAction {
    let dim = ball.len();
    UnitaryAction {
        label: g.to_string(),
        field: Field::Real,
        dim,
        kind: ActionKind::Regular(regular_shift(ball, g)),
    }
}

/// Haar-random orthogonal matrix (QR of a Gaussian matrix with the sign of
/// `R`'s diagonal folded into `Q`).
pub fn haar_orthogonal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Norms `(|p_{E_1} x|, |p_{E_2} x|, |p_{E_3} x|)` of the coordinate
/// projections onto three pairwise disjoint index sets.
///
/// Fails with a consistency error if `min_i |p_{E_i} x|^2 > 1/3`, which
/// disjointness rules out.
pub fn leader_projection_mass(parts: [&[usize]; 3], x: &UnitVector) -> Result<[f64; 3]> {
    let d = x.dim();
    let mut owner = vec![usize::MAX; d];
    for (k, part) in parts.iter().enumerate() {
        for &i in *part {
            if i >= d {
                return invalid(format!("index {i} out of range for dimension {d}"));
            }
            if owner[i] != usize::MAX && owner[i] != k {
                return invalid(format!("index {i} lies in two parts"));
            }
            owner[i] = k;
        }
    }
    let mut norms = [0.0; 3];
    for (k, part) in parts.iter().enumerate() {
        norms[k] = mask_norm_functional(part, x)?.sqrt();
    }
    let min_sq = norms.iter().map(|v| v * v).fold(f64::INFINITY, f64::min);
    if min_sq > 1.0 / 3.0 + 1e-12 {
        return Err(Error::Consistency(format!(
            "min |p_E x|^2 = {min_sq} exceeds 1/3"
        )));
    }
    Ok(norms)
}
