//! Indefinite inner-product linear algebra on pseudo-Euclidean space.
//!
//! The ambient space `E^n_nu` is `R^n` with the bilinear form
//!
//! ```text
//! <x,y> = -x_1 y_1 - .. - x_nu y_nu + x_{nu+1} y_{nu+1} + .. + x_n y_n
//! ```
//!
//! i.e. the `nu` negative directions come first, so `nu` is literally the
//! index of the metric. Everything downstream (spheres, warped products,
//! circles, isometries) is built on the types here.

use crate::dense::DMat;
use crate::error::{GeomError, Result};
use crate::rng::SplitMix64;
use crate::scalar::{tol, Scalar};

/// Ambient pseudo-Euclidean space `E^n_nu`: a dimension and a metric index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Space {
    dim: usize,
    index: usize,
}

impl Space {
    /// `E^n_nu` with `n >= 1` and `0 <= nu <= n`.
    pub fn new(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 || index > dim {
            return Err(GeomError::InvalidSpace { dim, index });
        }
        Ok(Self { dim, index })
    }

    /// Euclidean space `E^n`.
    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, 0)
    }

    /// Minkowski space `M^n = E^n_1`.
    pub fn minkowski(dim: usize) -> Result<Self> {
        Self::new(dim, 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Sign of the `i`-th metric direction: `-1` for `i < nu`, else `+1`.
    pub fn metric_sign<S: Scalar>(&self, i: usize) -> S {
        if i < self.index {
            -S::one()
        } else {
            S::one()
        }
    }
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "E^{}_{}", self.dim, self.index)
    }
}

/// Causal class of a vector with respect to the ambient form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CausalClass {
    Zero,
    Spacelike,
    Timelike,
    Lightlike,
}

impl std::fmt::Display for CausalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CausalClass::Zero => "zero",
            CausalClass::Spacelike => "spacelike",
            CausalClass::Timelike => "timelike",
            CausalClass::Lightlike => "lightlike",
        };
        f.write_str(s)
    }
}

/// A vector (equivalently, a point) of `E^n_nu` in standard coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<S> {
    space: Space,
    coords: Vec<S>,
}

impl<S: Scalar> Vector<S> {
    pub fn new(space: Space, coords: Vec<S>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: space.dim(),
                got: coords.len(),
            });
        }
        Ok(Self { space, coords })
    }

    pub fn zero(space: Space) -> Self {
        Self {
            space,
            coords: vec![S::zero(); space.dim()],
        }
    }

    /// The `i`-th standard basis vector.
    pub fn basis(space: Space, i: usize) -> Self {
        assert!(i < space.dim(), "basis index out of range");
        let mut v = Self::zero(space);
        v.coords[i] = S::one();
        v
    }

    pub fn from_f64(space: Space, coords: &[f64]) -> Result<Self> {
        Self::new(space, coords.iter().map(|&x| S::lit(x)).collect())
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> S {
        self.coords[i]
    }

    fn assert_same_space(&self, other: &Self) {
        assert_eq!(
            self.space, other.space,
            "vectors from different spaces: {} vs {}",
            self.space, other.space
        );
    }

    /// The ambient inner product `<x,y>`. Symmetric and bilinear.
    ///
    /// Panics if the two vectors live in different spaces; mixed-space data
    /// is rejected at construction boundaries before it can reach here.
    pub fn inner(&self, other: &Self) -> S {
        self.assert_same_space(other);
        let nu = self.space.index();
        let mut acc = S::zero();
        for i in 0..self.coords.len() {
            let term = self.coords[i] * other.coords[i];
            acc = if i < nu { acc - term } else { acc + term };
        }
        acc
    }

    /// `<x,x>`.
    pub fn norm_sq(&self) -> S {
        self.inner(self)
    }

    /// `||x|| = sqrt(|<x,x>|)`.
    pub fn norm(&self) -> S {
        self.norm_sq().abs().sqrt()
    }

    pub fn euclid_norm_sq(&self) -> S {
        self.coords.iter().fold(S::zero(), |acc, x| acc + *x * *x)
    }

    pub fn euclid_norm(&self) -> S {
        self.euclid_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> S {
        self.coords.iter().fold(S::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn scaled(&self, s: S) -> Self {
        Self {
            space: self.space,
            coords: self.coords.iter().map(|x| *x * s).collect(),
        }
    }

    /// Causal classification with the crate's relative tolerance: zero when
    /// all coordinates are below tolerance, lightlike when `<v,v>` vanishes
    /// relative to the Euclidean magnitude, otherwise by the sign of `<v,v>`.
    pub fn causal_class(&self) -> CausalClass {
        let t = S::lit(tol::CLASS);
        if self.max_abs() <= t {
            return CausalClass::Zero;
        }
        let q = self.norm_sq();
        if q.abs() <= t * self.euclid_norm_sq() {
            CausalClass::Lightlike
        } else if q > S::zero() {
            CausalClass::Spacelike
        } else {
            CausalClass::Timelike
        }
    }

    pub fn is_lightlike(&self) -> bool {
        self.causal_class() == CausalClass::Lightlike
    }
}

impl<S: Scalar> std::ops::Add for &Vector<S> {
    type Output = Vector<S>;
    fn add(self, rhs: &Vector<S>) -> Vector<S> {
        self.assert_same_space(rhs);
        Vector {
            space: self.space,
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl<S: Scalar> std::ops::Sub for &Vector<S> {
    type Output = Vector<S>;
    fn sub(self, rhs: &Vector<S>) -> Vector<S> {
        self.assert_same_space(rhs);
        Vector {
            space: self.space,
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

impl<S: Scalar> std::ops::Neg for &Vector<S> {
    type Output = Vector<S>;
    fn neg(self) -> Vector<S> {
        self.scaled(-S::one())
    }
}

impl<S: Scalar> std::ops::Mul<S> for &Vector<S> {
    type Output = Vector<S>;
    fn mul(self, s: S) -> Vector<S> {
        self.scaled(s)
    }
}

/// A linear subspace given by a basis, with its Gram data and signature.
///
/// The empty basis is allowed and represents the zero subspace (projections
/// onto it return zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<S> {
    space: Space,
    basis: Vec<Vector<S>>,
    gram: DMat<S>,
    index: usize,
    degenerate: bool,
}

impl<S: Scalar> Subspace<S> {
    /// Span of linearly independent vectors. Fails on rank deficiency.
    pub fn span(space: Space, basis: Vec<Vector<S>>) -> Result<Self> {
        for v in &basis {
            if v.space() != space {
                return Err(GeomError::SpaceMismatch {
                    dim_a: space.dim(),
                    idx_a: space.index(),
                    dim_b: v.space().dim(),
                    idx_b: v.space().index(),
                });
            }
        }
        let m = basis.len();
        if m > 0 {
            let rows: Vec<Vec<S>> = basis.iter().map(|v| v.coords().to_vec()).collect();
            let rank = DMat::from_rows(&rows).rank(tol::CLASS);
            if rank < m {
                return Err(GeomError::RankDeficient { rank, count: m });
            }
        }
        let mut gram = DMat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let g = basis[i].inner(&basis[j]);
                gram[(i, j)] = g;
                gram[(j, i)] = g;
            }
        }
        // Signature and degeneracy are judged on the Euclid-normalized Gram
        // matrix so the tolerance is scale free.
        let mut normalized = gram.clone();
        let scales: Vec<S> = basis.iter().map(|v| v.euclid_norm()).collect();
        for i in 0..m {
            for j in 0..m {
                normalized[(i, j)] = normalized[(i, j)] / (scales[i] * scales[j]);
            }
        }
        let eigen = normalized.jacobi_eigenvalues();
        let t = S::lit(tol::CLASS);
        let index = eigen.iter().filter(|l| **l < -t).count();
        let det = eigen.iter().fold(S::one(), |acc, l| acc * *l);
        let degenerate = det.abs() <= t;
        Ok(Self {
            space,
            basis,
            gram,
            index,
            degenerate,
        })
    }

    /// Span of standard basis vectors `e_i` for `i` in `indices`.
    pub fn coordinate_span(space: Space, indices: &[usize]) -> Result<Self> {
        Self::span(
            space,
            indices.iter().map(|&i| Vector::basis(space, i)).collect(),
        )
    }

    /// The zero subspace.
    pub fn empty(space: Space) -> Self {
        Self {
            space,
            basis: Vec::new(),
            gram: DMat::zeros(0, 0),
            index: 0,
            degenerate: false,
        }
    }

    /// The whole space as a subspace.
    pub fn whole(space: Space) -> Self {
        Self::span(
            space,
            (0..space.dim()).map(|i| Vector::basis(space, i)).collect(),
        )
        .expect("standard basis is independent")
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector<S>] {
        &self.basis
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// `(dim, index, degenerate)` of the induced metric.
    pub fn signature(&self) -> (usize, usize, bool) {
        (self.basis.len(), self.index, self.degenerate)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn gram_entry(&self, i: usize, j: usize) -> S {
        self.gram[(i, j)]
    }

    fn require_non_degenerate(&self, operation: &'static str) -> Result<()> {
        if self.degenerate {
            Err(GeomError::DegenerateSubspace { operation })
        } else {
            Ok(())
        }
    }

    /// Orthogonal projection onto the subspace. Requires non-degeneracy;
    /// idempotent and self-adjoint with respect to the ambient form.
    pub fn project(&self, v: &Vector<S>) -> Result<Vector<S>> {
        self.require_non_degenerate("orthogonal projection")?;
        if self.basis.is_empty() {
            return Ok(Vector::zero(self.space));
        }
        let rhs: Vec<S> = self.basis.iter().map(|b| b.inner(v)).collect();
        let coeff = self
            .gram
            .solve(&rhs)
            .ok_or(GeomError::DegenerateSubspace {
                operation: "orthogonal projection",
            })?;
        let mut out = Vector::zero(self.space);
        for (c, b) in coeff.iter().zip(&self.basis) {
            out = &out + &b.scaled(*c);
        }
        Ok(out)
    }

    /// Membership test by a rank criterion (works for degenerate subspaces
    /// too). `tol_rel` is relative to the vector magnitudes.
    pub fn contains_vector(&self, v: &Vector<S>, tol_rel: f64) -> bool {
        let scale = v.euclid_norm();
        if scale <= S::lit(tol::CLASS) {
            return true;
        }
        if self.basis.is_empty() {
            return false;
        }
        let mut rows: Vec<Vec<S>> = self
            .basis
            .iter()
            .map(|b| b.scaled(S::one() / b.euclid_norm()).coords().to_vec())
            .collect();
        rows.push(v.scaled(S::one() / scale).coords().to_vec());
        DMat::from_rows(&rows).rank(tol_rel) == self.basis.len()
    }

    /// Residual of `v` against the subspace: `||v - P v||` (Euclidean).
    /// Requires non-degeneracy.
    pub fn projection_residual(&self, v: &Vector<S>) -> Result<S> {
        let p = self.project(v)?;
        Ok((v - &p).euclid_norm())
    }

    /// `{ x in carrier : x perp self }`, with `self` required non-degenerate.
    /// With `carrier` the whole space this is the orthogonal complement.
    pub fn orthogonal_complement_in(&self, carrier: &Subspace<S>) -> Result<Subspace<S>> {
        self.require_non_degenerate("orthogonal complement")?;
        perp_within(&self.basis, carrier)
    }

    /// Orthogonal complement in the whole ambient space.
    pub fn orthogonal_complement(&self) -> Result<Subspace<S>> {
        self.orthogonal_complement_in(&Subspace::whole(self.space))
    }

    /// An ordered basis orthonormal for the ambient form (each `<u_i,u_i>`
    /// is `+-1`, mixed products vanish); pivoted Gram-Schmidt. Requires
    /// non-degeneracy.
    pub fn orthonormal_basis(&self) -> Result<Vec<Vector<S>>> {
        self.require_non_degenerate("orthonormalization")?;
        let mut remaining: Vec<Vector<S>> = self.basis.clone();
        let mut chosen: Vec<Vector<S>> = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            // Orthogonalize every candidate against the accepted set, pick the
            // one with the largest |<r,r>| relative to its Euclidean size.
            let mut best: Option<(usize, Vector<S>, S)> = None;
            for (i, cand) in remaining.iter().enumerate() {
                let mut r = cand.clone();
                for u in &chosen {
                    let sign = u.norm_sq(); // +-1 for orthonormal u
                    r = &r - &u.scaled(u.inner(&r) / sign);
                }
                let e = r.euclid_norm_sq();
                if e <= S::lit(tol::CLASS) {
                    continue;
                }
                let quality = r.norm_sq().abs() / e;
                if best.as_ref().map(|b| quality > b.2).unwrap_or(true) {
                    best = Some((i, r.clone(), quality));
                }
            }
            let (i, r, quality) = best.ok_or(GeomError::DegenerateSubspace {
                operation: "orthonormalization",
            })?;
            if quality <= S::lit(tol::CLASS) {
                return Err(GeomError::DegenerateSubspace {
                    operation: "orthonormalization",
                });
            }
            chosen.push(r.scaled(S::one() / r.norm()));
            remaining.remove(i);
        }
        Ok(chosen)
    }
}

/// `{ x in carrier : <x, v> = 0 for every v in vectors }`.
///
/// No non-degeneracy assumption on the `vectors`; the result may itself be
/// degenerate. Internal building block for complements and lightlike duals.
pub(crate) fn perp_within<S: Scalar>(
    vectors: &[Vector<S>],
    carrier: &Subspace<S>,
) -> Result<Subspace<S>> {
    let space = carrier.space();
    if vectors.is_empty() {
        return Subspace::span(space, carrier.basis().to_vec());
    }
    if carrier.dim() == 0 {
        return Ok(Subspace::empty(space));
    }
    let rows: Vec<Vec<S>> = vectors
        .iter()
        .map(|v| {
            carrier
                .basis()
                .iter()
                .map(|w| v.inner(w))
                .collect::<Vec<S>>()
        })
        .collect();
    let coeffs = DMat::from_rows(&rows).nullspace(tol::CLASS);
    let mut basis = Vec::with_capacity(coeffs.len());
    for y in coeffs {
        let mut x = Vector::zero(space);
        for (c, w) in y.iter().zip(carrier.basis()) {
            x = &x + &w.scaled(*c);
        }
        basis.push(x);
    }
    Subspace::span(space, basis)
}

/// Dual basis for pairwise orthogonal, independent, lightlike vectors:
/// returns `b_1..b_k` with `<a_i,b_j> = delta_ij` and `<b_i,b_j> = 0`.
///
/// Built by induction: find `b_1` orthogonal to the remaining `a_i` with
/// `<a_1,b_1> = 1`, strip its null defect with `b_1 -> b_1 - (b_1^2/2) a_1`,
/// then recurse inside `span{a_1,b_1}^perp`.
pub fn dual_lightlike_basis<S: Scalar>(a: &[Vector<S>]) -> Result<Vec<Vector<S>>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let space = a[0].space();
    for (i, ai) in a.iter().enumerate() {
        if ai.causal_class() != CausalClass::Lightlike {
            return Err(GeomError::NotLightlike {
                context: "dual basis input",
            });
        }
        for aj in &a[i + 1..] {
            let scale = ai.euclid_norm() * aj.euclid_norm();
            if ai.inner(aj).abs() > S::lit(tol::CLASS) * scale {
                return Err(GeomError::NotOrthogonal {
                    context: "dual basis input",
                });
            }
        }
    }
    let rows: Vec<Vec<S>> = a.iter().map(|v| v.coords().to_vec()).collect();
    let rank = DMat::from_rows(&rows).rank(tol::CLASS);
    if rank < a.len() {
        return Err(GeomError::RankDeficient {
            rank,
            count: a.len(),
        });
    }
    let nu = space.index();
    let max_isotropic = nu.min(space.dim() - nu);
    if a.len() > max_isotropic {
        return Err(GeomError::InvalidInitialData(format!(
            "{} pairwise orthogonal lightlike vectors cannot be independent in {}",
            a.len(),
            space
        )));
    }
    dual_rec(a, &Subspace::whole(space))
}

fn dual_rec<S: Scalar>(a: &[Vector<S>], carrier: &Subspace<S>) -> Result<Vec<Vector<S>>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let rest_perp = perp_within(&a[1..], carrier)?;
    // Pick the candidate with the largest pairing against a_0.
    let mut best: Option<(Vector<S>, S)> = None;
    for w in rest_perp.basis() {
        let unit = w.scaled(S::one() / w.euclid_norm());
        let pairing = a[0].inner(&unit).abs();
        if best.as_ref().map(|b| pairing > b.1).unwrap_or(true) {
            best = Some((unit, pairing));
        }
    }
    let (w, pairing) = best.ok_or_else(|| {
        GeomError::InvalidInitialData("no dual direction for lightlike vector".into())
    })?;
    let scale = a[0].euclid_norm();
    if pairing <= S::lit(tol::CLASS) * scale {
        return Err(GeomError::InvalidInitialData(
            "lightlike vectors admit no dual basis (dependent input?)".into(),
        ));
    }
    let mut b0 = w.scaled(S::one() / a[0].inner(&w));
    b0 = &b0 - &a[0].scaled(b0.norm_sq() / S::lit(2.0));
    let sub = perp_within(&[a[0].clone(), b0.clone()], carrier)?;
    let mut out = vec![b0];
    out.extend(dual_rec(&a[1..], &sub)?);
    Ok(out)
}

/// A linear map of the ambient space in standard coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap<S> {
    space: Space,
    mat: DMat<S>,
}

impl<S: Scalar> LinearMap<S> {
    pub fn identity(space: Space) -> Self {
        Self {
            space,
            mat: DMat::identity(space.dim()),
        }
    }

    pub fn from_rows(space: Space, rows: &[Vec<S>]) -> Result<Self> {
        if rows.len() != space.dim() || rows.iter().any(|r| r.len() != space.dim()) {
            return Err(GeomError::DimensionMismatch {
                expected: space.dim(),
                got: rows.len(),
            });
        }
        Ok(Self {
            space,
            mat: DMat::from_rows(rows),
        })
    }

    /// `exp(A)` of a generator given by rows.
    pub fn exp_generator(space: Space, rows: &[Vec<S>]) -> Result<Self> {
        let g = Self::from_rows(space, rows)?;
        Ok(Self {
            space: g.space,
            mat: g.mat.expm(),
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn entry(&self, i: usize, j: usize) -> S {
        self.mat[(i, j)]
    }

    pub fn apply(&self, v: &Vector<S>) -> Vector<S> {
        assert_eq!(v.space(), self.space, "map applied to foreign vector");
        Vector {
            space: self.space,
            coords: self.mat.apply(v.coords()),
        }
    }

    /// Function composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &LinearMap<S>) -> LinearMap<S> {
        assert_eq!(self.space, other.space);
        LinearMap {
            space: self.space,
            mat: self.mat.matmul(&other.mat),
        }
    }

    /// `max |(B^T g B - g)_{ij}|`: zero iff the map preserves the form.
    pub fn metric_defect(&self) -> S {
        let n = self.space.dim();
        let mut worst = S::zero();
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    let sign: S = self.space.metric_sign(k);
                    acc = acc + sign * self.mat[(k, i)] * self.mat[(k, j)];
                }
                let g = if i == j {
                    self.space.metric_sign::<S>(i)
                } else {
                    S::zero()
                };
                worst = worst.max((acc - g).abs());
            }
        }
        worst
    }
}

/// Seeded sample from the pseudo-orthogonal group `O_nu(n)`: `exp(A)` with
/// `A^T g + g A = 0`, `A = g K` for a random antisymmetric `K`.
pub fn pseudo_orthogonal_sample<S: Scalar>(space: Space, seed: u64) -> LinearMap<S> {
    let n = space.dim();
    let mut rng = SplitMix64::new(seed);
    let mut k = DMat::<S>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let x = S::lit(rng.uniform(-0.7, 0.7));
            k[(i, j)] = x;
            k[(j, i)] = -x;
        }
    }
    let mut a = DMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let sign: S = space.metric_sign(i);
            a[(i, j)] = sign * k[(i, j)];
        }
    }
    LinearMap {
        space,
        mat: a.expm(),
    }
}
