//! Warped product decompositions of `E^n_nu` and its central hyperquadrics.
//!
//! Initial data `(p_bar; V_0, ..., V_k; a_1..a_k)` — an orthogonal
//! splitting of the (sub)space being decomposed together with pairwise
//! orthogonal, independent, nonzero vectors `a_i in V_0` — determines the
//! decomposition map
//!
//! ```text
//! psi(p_0,...,p_k) = p_0 + sum_i rho_i(p_0) (p_i - p_bar),
//! rho_i(p_0) = 1 + <a_i, p_0 - p_bar>
//! ```
//!
//! from `N_0 x N_1 x ... x N_k` onto an explicit open subset of the space,
//! where `N_i` is the spherical submanifold determined by `(p_bar, V_i, a_i)`
//! and `N_0` is the region of `V_0` (translated by the center `c`) where all
//! `rho_i` are positive. Two standard cases exist: non-null (all `a_i`
//! non-lightlike) and null (`k = 1` with `a` lightlike). Mixed causal types
//! arise only through [`WarpedDecomposition::compose`].
//!
//! In canonical form (`p_bar in V_0`, `<p_bar, a_i> = 1`) the map satisfies
//! `psi(p)^2 = p_0^2`, which is what makes restriction to the hyperquadric
//! `E^n_nu(kappa)`, `kappa = 1/p_bar^2`, immediate.

use crate::error::{GeomError, ImageViolation, Result};
use crate::pseudo_linear::{perp_within, CausalClass, Space, Subspace, Vector};
use crate::rng::SplitMix64;
use crate::scalar::{tol, Scalar};
use crate::spheres::{classify_sphere, SphereInitialData, SphericalSubmanifold};

/// Relative tolerance used to validate domain membership of evaluation
/// points (looser than construction tolerances: callers may supply points
/// with a few ulps of noise).
const DOMAIN_TOL: f64 = 1e-6;

/// Case split of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    NonNull,
    Null,
    /// Built by composing decompositions; may mix causal types.
    Composed,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseTag::NonNull => "non-null",
            CaseTag::Null => "null",
            CaseTag::Composed => "composed",
        };
        f.write_str(s)
    }
}

/// Validated initial data for a warped product decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData<S> {
    base: Vector<S>,
    factors: Vec<Subspace<S>>,
    a_vectors: Vec<Vector<S>>,
    ambient_kappa: S,
    carrier: Subspace<S>,
    b_hint: Option<Vector<S>>,
}

impl<S: Scalar> InitialData<S> {
    /// Initial data decomposing the whole flat space.
    pub fn new(
        base: Vector<S>,
        factors: Vec<Subspace<S>>,
        a_vectors: Vec<Vector<S>>,
    ) -> Result<Self> {
        let space = base.space();
        Self::new_full(
            Subspace::whole(space),
            base,
            factors,
            a_vectors,
            S::zero(),
            None,
        )
    }

    /// Initial data with every knob: the carrier subspace being decomposed
    /// (the whole space for ordinary use), an ambient curvature (`kappa != 0`
    /// demands canonical data on the hyperquadric `<p,p> = 1/kappa`), and an
    /// optional lightlike partner `b` for the null case.
    pub fn new_full(
        carrier: Subspace<S>,
        base: Vector<S>,
        factors: Vec<Subspace<S>>,
        a_vectors: Vec<Vector<S>>,
        ambient_kappa: S,
        b_hint: Option<Vector<S>>,
    ) -> Result<Self> {
        let space = base.space();
        if factors.len() < 2 {
            return Err(GeomError::InvalidInitialData(
                "need a geodesic factor and at least one spherical factor (k >= 1)".into(),
            ));
        }
        let k = factors.len() - 1;
        if a_vectors.len() != k {
            return Err(GeomError::InvalidInitialData(format!(
                "expected {k} a-vectors for {k} spherical factors, got {}",
                a_vectors.len()
            )));
        }
        let whole = carrier.dim() == space.dim();
        for (i, f) in factors.iter().enumerate() {
            if f.dim() == 0 {
                return Err(GeomError::InvalidInitialData(format!(
                    "factor V_{i} is trivial"
                )));
            }
            if f.is_degenerate() {
                return Err(GeomError::InvalidInitialData(format!(
                    "factor V_{i} is degenerate"
                )));
            }
            if !whole {
                for v in f.basis() {
                    if !carrier.contains_vector(v, tol::CLASS * 1e2) {
                        return Err(GeomError::InvalidInitialData(format!(
                            "factor V_{i} is not contained in the carrier subspace"
                        )));
                    }
                }
            }
        }
        let total: usize = factors.iter().map(|f| f.dim()).sum();
        if total != carrier.dim() {
            return Err(GeomError::InvalidInitialData(format!(
                "factor dimensions sum to {total}, expected {}",
                carrier.dim()
            )));
        }
        for i in 0..factors.len() {
            for j in (i + 1)..factors.len() {
                for u in factors[i].basis() {
                    for w in factors[j].basis() {
                        let scale = u.euclid_norm() * w.euclid_norm();
                        if u.inner(w).abs() > S::lit(tol::MEMBERSHIP) * scale {
                            return Err(GeomError::InvalidInitialData(format!(
                                "factors V_{i} and V_{j} are not orthogonal"
                            )));
                        }
                    }
                }
            }
        }
        if !whole && !carrier.contains_vector(&base, tol::CLASS * 1e2) {
            return Err(GeomError::InvalidInitialData(
                "base point must lie in the carrier subspace".into(),
            ));
        }
        let mut lightlike = Vec::new();
        let mut non_lightlike = Vec::new();
        for (i, a) in a_vectors.iter().enumerate() {
            match a.causal_class() {
                CausalClass::Zero => {
                    return Err(GeomError::InvalidInitialData(format!(
                        "a_{} is zero; only proper decompositions are built",
                        i + 1
                    )))
                }
                CausalClass::Lightlike => lightlike.push(i + 1),
                _ => non_lightlike.push(i + 1),
            }
            if !factors[0].contains_vector(a, tol::CLASS * 1e2) {
                return Err(GeomError::InvalidInitialData(format!(
                    "a_{} does not lie in the geodesic factor V_0",
                    i + 1
                )));
            }
        }
        if !lightlike.is_empty() && !non_lightlike.is_empty() {
            return Err(GeomError::MixedCausalTypes {
                lightlike,
                non_lightlike,
            });
        }
        if lightlike.len() > 1 {
            return Err(GeomError::InvalidInitialData(
                "at most one lightlike a-vector is admitted (the null case has k = 1); \
                 build further factors by composition"
                    .into(),
            ));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let scale = a_vectors[i].euclid_norm() * a_vectors[j].euclid_norm();
                if a_vectors[i].inner(&a_vectors[j]).abs() > S::lit(tol::MEMBERSHIP) * scale {
                    return Err(GeomError::InvalidInitialData(format!(
                        "a_{} and a_{} are not orthogonal",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if k > 1 {
            let rows: Vec<Vec<S>> = a_vectors
                .iter()
                .map(|a| a.scaled(S::one() / a.euclid_norm()).coords().to_vec())
                .collect();
            let rank = crate::dense::DMat::from_rows(&rows).rank(tol::CLASS);
            if rank < k {
                return Err(GeomError::InvalidInitialData(
                    "a-vectors are linearly dependent".into(),
                ));
            }
        }
        if let Some(b) = &b_hint {
            if lightlike.is_empty() {
                return Err(GeomError::InvalidInitialData(
                    "a lightlike partner b only applies to the null case".into(),
                ));
            }
            if b.causal_class() != CausalClass::Lightlike {
                return Err(GeomError::NotLightlike {
                    context: "the supplied b-vector",
                });
            }
            if !factors[0].contains_vector(b, tol::CLASS * 1e2) {
                return Err(GeomError::InvalidInitialData(
                    "the supplied b-vector must lie in V_0".into(),
                ));
            }
            let pairing = a_vectors[0].inner(b);
            if (pairing - S::one()).abs() > S::lit(tol::MEMBERSHIP) * (S::one() + b.euclid_norm())
            {
                return Err(GeomError::InvalidInitialData(format!(
                    "the supplied b-vector must satisfy <a,b> = 1, got {pairing}"
                )));
            }
        }
        let data = Self {
            base,
            factors,
            a_vectors,
            ambient_kappa,
            carrier,
            b_hint,
        };
        if ambient_kappa != S::zero() {
            let psq = data.base.norm_sq();
            let scale = S::one() + data.base.euclid_norm_sq();
            if (psq - S::one() / ambient_kappa).abs() > S::lit(tol::MEMBERSHIP) * scale {
                return Err(GeomError::InvalidInitialData(format!(
                    "base point must satisfy <p,p> = 1/kappa = {}, got {psq}",
                    S::one() / ambient_kappa
                )));
            }
            if !data.is_canonical() {
                return Err(GeomError::NotCanonical {
                    operation: "initial data on a hyperquadric",
                });
            }
        }
        Ok(data)
    }

    pub fn space(&self) -> Space {
        self.base.space()
    }

    pub fn base(&self) -> &Vector<S> {
        &self.base
    }

    /// Number of spherical factors `k`.
    pub fn spherical_count(&self) -> usize {
        self.a_vectors.len()
    }

    pub fn factor(&self, i: usize) -> &Subspace<S> {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[Subspace<S>] {
        &self.factors
    }

    /// `a_i` for `i = 1..=k`.
    pub fn a_vector(&self, i: usize) -> &Vector<S> {
        &self.a_vectors[i - 1]
    }

    pub fn a_vectors(&self) -> &[Vector<S>] {
        &self.a_vectors
    }

    pub fn ambient_kappa(&self) -> S {
        self.ambient_kappa
    }

    pub fn carrier(&self) -> &Subspace<S> {
        &self.carrier
    }

    /// Canonical form: `p_bar in V_0` and `<p_bar, a_i> = 1` for all `i`.
    pub fn is_canonical(&self) -> bool {
        if !self.factors[0].contains_vector(&self.base, tol::MEMBERSHIP * 1e2) {
            return false;
        }
        let scale = S::one() + self.base.euclid_norm();
        self.a_vectors
            .iter()
            .all(|a| (a.inner(&self.base) - S::one()).abs() <= S::lit(tol::MEMBERSHIP) * scale)
    }
}

/// A point of the product `N_0 x N_1 x ... x N_k`, each component in
/// ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedPoint<S> {
    components: Vec<Vector<S>>,
}

impl<S: Scalar> WarpedPoint<S> {
    pub fn new(components: Vec<Vector<S>>) -> Result<Self> {
        if components.is_empty() {
            return Err(GeomError::InvalidInitialData(
                "a warped point needs at least the geodesic component".into(),
            ));
        }
        let space = components[0].space();
        for c in &components {
            if c.space() != space {
                return Err(GeomError::SpaceMismatch {
                    dim_a: space.dim(),
                    idx_a: space.index(),
                    dim_b: c.space().dim(),
                    idx_b: c.space().index(),
                });
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Vector<S>] {
        &self.components
    }

    /// Geodesic component `p_0`.
    pub fn geodesic(&self) -> &Vector<S> {
        &self.components[0]
    }

    /// Spherical component `p_i`, `i = 1..=k`.
    pub fn spherical(&self, i: usize) -> &Vector<S> {
        &self.components[i]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// A standard (single-case) decomposition with all derived fields.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardDecomposition<S> {
    data: InitialData<S>,
    case: CaseTag,
    canonical: bool,
    /// Translation center: `p_bar - sum a_i/kappa_i` (non-null) or
    /// `p_bar - b` (null). Canonicalization subtracts it.
    c: Vector<S>,
    /// Null case only: the lightlike partner with `<a,b> = 1`, `b in V_0`.
    b: Option<Vector<S>>,
    /// `kappa_i = <a_i, a_i>`.
    kappas: Vec<S>,
    /// `c_i = p_bar - a_i/kappa_i`; `None` in the null case.
    centers: Vec<Option<Vector<S>>>,
    /// Spherical factors `N_i` determined by `(p_bar, V_i, a_i)`.
    factors: Vec<SphericalSubmanifold<S>>,
    /// `W_0`: target of `P_0`. Non-null: `V_0 cap span{a_i}^perp`; null:
    /// `V_0 cap span{a,b}^perp`.
    w0: Subspace<S>,
    /// `W_i`: targets of `P_i`. Non-null: the orthogonal sum `R a_i + V_i`;
    /// null: `V_1`.
    wi: Vec<Subspace<S>>,
}

impl<S: Scalar> StandardDecomposition<S> {
    fn build(data: InitialData<S>) -> Result<Self> {
        let base = data.base.clone();
        let k = data.spherical_count();
        let null_case = data.a_vectors[0].causal_class() == CausalClass::Lightlike;
        let canonical = data.is_canonical();
        let mut factors = Vec::with_capacity(k);
        for i in 1..=k {
            let seed = SphereInitialData::new(
                base.clone(),
                data.factor(i).clone(),
                data.a_vector(i).clone(),
            )?;
            factors.push(classify_sphere(&seed)?);
        }
        if null_case {
            let a = data.a_vector(1).clone();
            let b = match &data.b_hint {
                Some(b) => b.clone(),
                None => derive_null_partner(&a, data.factor(0))?,
            };
            let c = &base - &b;
            let w0 = perp_within(&[a.clone(), b.clone()], data.factor(0))?;
            let wi = vec![data.factor(1).clone()];
            Ok(Self {
                data,
                case: CaseTag::Null,
                canonical,
                c,
                b: Some(b),
                kappas: vec![S::zero()],
                centers: vec![None],
                factors,
                w0,
                wi,
            })
        } else {
            let kappas: Vec<S> = data.a_vectors.iter().map(|a| a.norm_sq()).collect();
            let mut c = base.clone();
            for (a, kap) in data.a_vectors.iter().zip(&kappas) {
                c = &c - &a.scaled(S::one() / *kap);
            }
            let centers: Vec<Option<Vector<S>>> = data
                .a_vectors
                .iter()
                .zip(&kappas)
                .map(|(a, kap)| Some(&base - &a.scaled(S::one() / *kap)))
                .collect();
            let w0 = perp_within(&data.a_vectors, data.factor(0))?;
            let mut wi = Vec::with_capacity(k);
            for i in 1..=k {
                let mut basis = vec![data.a_vector(i).clone()];
                basis.extend(data.factor(i).basis().iter().cloned());
                wi.push(Subspace::span(data.space(), basis)?);
            }
            Ok(Self {
                data,
                case: CaseTag::NonNull,
                canonical,
                c,
                b: None,
                kappas,
                centers,
                factors,
                w0,
                wi,
            })
        }
    }

    pub fn data(&self) -> &InitialData<S> {
        &self.data
    }

    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Translation center `c`.
    pub fn center(&self) -> &Vector<S> {
        &self.c
    }

    /// The lightlike partner `b` of the null case.
    pub fn null_partner(&self) -> Option<&Vector<S>> {
        self.b.as_ref()
    }

    /// `kappa_i = a_i^2`, `i = 1..=k`.
    pub fn factor_kappa(&self, i: usize) -> S {
        self.kappas[i - 1]
    }

    /// `c_i = p_bar - a_i / kappa_i` (non-null case).
    pub fn factor_center(&self, i: usize) -> Option<&Vector<S>> {
        self.centers[i - 1].as_ref()
    }

    /// The spherical factor `N_i`, `i = 1..=k`.
    pub fn spherical_factor(&self, i: usize) -> &SphericalSubmanifold<S> {
        &self.factors[i - 1]
    }

    /// `W_0`, the target of the geodesic projector `P_0`.
    pub fn w0(&self) -> &Subspace<S> {
        &self.w0
    }

    /// `W_i`, the target of `P_i`, `i = 1..=k`.
    pub fn w_subspace(&self, i: usize) -> &Subspace<S> {
        &self.wi[i - 1]
    }

    /// `rho_i(p_0) = <a_i, p_0 - c> = 1 + <a_i, p_0 - p_bar>`.
    pub fn rho(&self, i: usize, p0: &Vector<S>) -> S {
        self.data.a_vector(i).inner(&(p0 - &self.c))
    }

    /// Membership in the geodesic region `N_0 = c + { p in V_0 : rho_i > 0 }`.
    pub fn n0_contains(&self, p0: &Vector<S>, tol_rel: f64) -> bool {
        let d = p0 - &self.c;
        let affine_ok = self
            .data
            .factor(0)
            .projection_residual(&d)
            .map(|r| r <= S::lit(tol_rel) * (S::one() + d.euclid_norm()))
            .unwrap_or(false);
        affine_ok && (1..=self.data.spherical_count()).all(|i| self.rho(i, p0) > S::zero())
    }

    fn check_domain(&self, p: &WarpedPoint<S>) -> Result<()> {
        let k = self.data.spherical_count();
        if p.len() != k + 1 {
            return Err(GeomError::DimensionMismatch {
                expected: k + 1,
                got: p.len(),
            });
        }
        if !self.n0_contains(p.geodesic(), DOMAIN_TOL) {
            return Err(GeomError::OutOfDomain(
                "geodesic component outside N_0 (affine constraint or some rho_i <= 0)".into(),
            ));
        }
        for i in 1..=k {
            if !self.factors[i - 1].contains(p.spherical(i), DOMAIN_TOL) {
                return Err(GeomError::OutOfDomain(format!(
                    "component {i} is not on the spherical factor N_{i}"
                )));
            }
        }
        Ok(())
    }

    /// The defining formula `psi(p) = p_0 + sum rho_i(p_0)(p_i - p_bar)`.
    pub fn psi_forward(&self, p: &WarpedPoint<S>) -> Result<Vector<S>> {
        self.check_domain(p)?;
        Ok(self.psi_forward_unchecked(p))
    }

    fn psi_forward_unchecked(&self, p: &WarpedPoint<S>) -> Vector<S> {
        let mut q = p.geodesic().clone();
        for i in 1..=self.data.spherical_count() {
            let rho = self.rho(i, p.geodesic());
            q = &q + &(p.spherical(i) - &self.data.base).scaled(rho);
        }
        q
    }

    /// The case-expanded form of `psi`; agrees with [`Self::psi_forward`] to
    /// rounding. Non-null:
    /// `c + P_0(p_0 - c) + sum <a_i, p_0 - c>(p_i - c_i)`; null:
    /// `c + P_0 q_0 + (<b,q_0> - <a,q_0>(P_1 q_1)^2/2) a + <a,q_0> b +
    /// <a,q_0> P_1 q_1` with `q_0 = p_0 - c`, `q_1 = p_1 - p_bar`.
    pub fn psi_forward_expanded(&self, p: &WarpedPoint<S>) -> Result<Vector<S>> {
        self.check_domain(p)?;
        match self.case {
            CaseTag::NonNull => {
                let pt = p.geodesic() - &self.c;
                let mut q = &self.c + &self.w0.project(&pt)?;
                for i in 1..=self.data.spherical_count() {
                    let coeff = self.data.a_vector(i).inner(&pt);
                    let ci = self.centers[i - 1].as_ref().expect("non-null center");
                    q = &q + &(p.spherical(i) - ci).scaled(coeff);
                }
                Ok(q)
            }
            CaseTag::Null => {
                let a = self.data.a_vector(1);
                let b = self.b.as_ref().expect("null partner");
                let p0t = p.geodesic() - &self.c;
                let p1t = p.spherical(1) - &self.data.base;
                let p1p = self.wi[0].project(&p1t)?;
                let alpha = a.inner(&p0t);
                let a_coeff =
                    b.inner(&p0t) - alpha * p1p.norm_sq() / S::lit(2.0);
                let mut q = &self.c + &self.w0.project(&p0t)?;
                q = &q + &a.scaled(a_coeff);
                q = &q + &b.scaled(alpha);
                q = &q + &p1p.scaled(alpha);
                Ok(q)
            }
            CaseTag::Composed => unreachable!("standard decomposition"),
        }
    }

    /// Image membership: the case sign conditions, the carrier
    /// constraint, and (for disconnected factors) the component cuts.
    pub fn image_contains(&self, q: &Vector<S>, tol_rel: f64) -> bool {
        let pt = q - &self.c;
        let whole = self.data.carrier.dim() == self.data.space().dim();
        if !whole {
            let ok = self
                .data
                .carrier
                .projection_residual(&pt)
                .map(|r| r <= S::lit(tol_rel) * (S::one() + pt.euclid_norm()))
                .unwrap_or(false);
            if !ok {
                return false;
            }
        }
        match self.case {
            CaseTag::NonNull => {
                for i in 1..=self.data.spherical_count() {
                    let Ok(pi) = self.wi[i - 1].project(&pt) else {
                        return false;
                    };
                    let s = pi.norm_sq();
                    let eps_positive = self.kappas[i - 1] > S::zero();
                    if eps_positive && s <= S::zero() {
                        return false;
                    }
                    if !eps_positive && s >= S::zero() {
                        return false;
                    }
                    if self.factors[i - 1].is_disconnected()
                        && self.data.a_vector(i).inner(&pi) <= S::zero()
                    {
                        return false;
                    }
                }
                true
            }
            CaseTag::Null => self.data.a_vector(1).inner(&pt) > S::zero(),
            CaseTag::Composed => unreachable!("standard decomposition"),
        }
    }

    /// Invert `psi` at `q`; errors name the violated image predicate.
    pub fn psi_inverse(&self, q: &Vector<S>) -> Result<WarpedPoint<S>> {
        let pt = q - &self.c;
        let whole = self.data.carrier.dim() == self.data.space().dim();
        if !whole {
            let res = self.data.carrier.projection_residual(&pt)?;
            if res > S::lit(DOMAIN_TOL) * (S::one() + pt.euclid_norm()) {
                return Err(ImageViolation::OutsideCarrier.into());
            }
        }
        let scale = S::one() + pt.euclid_norm();
        match self.case {
            CaseTag::NonNull => {
                let k = self.data.spherical_count();
                let mut q0 = &self.c + &self.w0.project(&pt)?;
                let mut components = vec![Vector::zero(self.data.space()); k + 1];
                for i in 1..=k {
                    let pi = self.wi[i - 1].project(&pt)?;
                    let s = pi.norm_sq();
                    let norm = s.abs().sqrt();
                    let eps_positive = self.kappas[i - 1] > S::zero();
                    let sgn_matches = match pi.causal_class() {
                        CausalClass::Spacelike => eps_positive,
                        CausalClass::Timelike => !eps_positive,
                        // sgn 0 != +-1: zero or lightlike projections fail.
                        _ => false,
                    };
                    if !sgn_matches {
                        return Err(ImageViolation::SignCondition { factor: i }.into());
                    }
                    // Signs pass but the inverse divides by ||P_i(q - c)||.
                    if norm < S::lit(tol::NEAR_BOUNDARY) * scale {
                        return Err(ImageViolation::NearBoundary { factor: i }.into());
                    }
                    if self.factors[i - 1].is_disconnected()
                        && self.data.a_vector(i).inner(&pi) <= S::zero()
                    {
                        return Err(ImageViolation::ComponentCut { factor: i }.into());
                    }
                    let root = self.kappas[i - 1].abs().sqrt();
                    let eps = if eps_positive { S::one() } else { -S::one() };
                    q0 = &q0 + &self.data.a_vector(i).scaled(eps * norm / root);
                    let ci = self.centers[i - 1].as_ref().expect("non-null center");
                    components[i] = ci + &pi.scaled(S::one() / (root * norm));
                }
                components[0] = q0;
                WarpedPoint::new(components)
            }
            CaseTag::Null => {
                let a = self.data.a_vector(1);
                let b = self.b.as_ref().expect("null partner");
                let alpha = a.inner(&pt);
                if alpha <= S::zero() {
                    return Err(ImageViolation::NonPositiveNullPairing.into());
                }
                if alpha < S::lit(tol::NEAR_BOUNDARY) {
                    return Err(ImageViolation::NearBoundary { factor: 1 }.into());
                }
                let p1 = self.wi[0].project(&pt)?;
                let p1sq = p1.norm_sq();
                let two = S::lit(2.0);
                let a_coeff = b.inner(&pt) + p1sq / (two * alpha);
                let mut q0 = &self.c + &self.w0.project(&pt)?;
                q0 = &q0 + &a.scaled(a_coeff);
                q0 = &q0 + &b.scaled(alpha);
                let mut q1 = &self.data.base + &p1.scaled(S::one() / alpha);
                q1 = &q1 - &a.scaled(p1sq / (two * alpha * alpha));
                WarpedPoint::new(vec![q0, q1])
            }
            CaseTag::Composed => unreachable!("standard decomposition"),
        }
    }

    fn check_tangency(&self, p: &WarpedPoint<S>, v: &[Vector<S>]) -> Result<()> {
        if v.len() != p.len() {
            return Err(GeomError::DimensionMismatch {
                expected: p.len(),
                got: v.len(),
            });
        }
        let v0_res = self.data.factor(0).projection_residual(&v[0])?;
        if v0_res > S::lit(DOMAIN_TOL) * (S::one() + v[0].euclid_norm()) {
            return Err(GeomError::NotTangent { factor: 0 });
        }
        for i in 1..=self.data.spherical_count() {
            let t = self.factors[i - 1].tangent_at(p.spherical(i))?;
            let res = t.projection_residual(&v[i])?;
            if res > S::lit(DOMAIN_TOL) * (S::one() + v[i].euclid_norm()) {
                return Err(GeomError::NotTangent { factor: i });
            }
        }
        Ok(())
    }

    /// Pushforward `psi_*` at `p` applied to factor tangents `v = (v_0..v_k)`.
    ///
    /// Non-null: `P_0 v_0 + sum <a_i,v_0>(p_i - c_i) + sum <a_i,p_0 - c> v_i`.
    /// Null: the analogous expansion with the `(a, b)` pair.
    pub fn psi_pushforward(&self, p: &WarpedPoint<S>, v: &[Vector<S>]) -> Result<Vector<S>> {
        self.check_domain(p)?;
        self.check_tangency(p, v)?;
        match self.case {
            CaseTag::NonNull => {
                let mut out = self.w0.project(&v[0])?;
                for i in 1..=self.data.spherical_count() {
                    let ci = self.centers[i - 1].as_ref().expect("non-null center");
                    out = &out + &(p.spherical(i) - ci).scaled(self.data.a_vector(i).inner(&v[0]));
                    out = &out + &v[i].scaled(self.rho(i, p.geodesic()));
                }
                Ok(out)
            }
            CaseTag::Null => {
                let a = self.data.a_vector(1);
                let b = self.b.as_ref().expect("null partner");
                let p0t = p.geodesic() - &self.c;
                let p1t = p.spherical(1) - &self.data.base;
                let p1p = self.wi[0].project(&p1t)?;
                let v1p = self.wi[0].project(&v[1])?;
                let two = S::lit(2.0);
                let alpha_p = a.inner(&p0t);
                let alpha_v = a.inner(&v[0]);
                let a_coeff =
                    b.inner(&v[0]) - alpha_v * p1p.norm_sq() / two - alpha_p * p1p.inner(&v1p);
                let mut out = self.w0.project(&v[0])?;
                out = &out + &a.scaled(a_coeff);
                out = &out + &b.scaled(alpha_v);
                out = &out + &p1p.scaled(alpha_v);
                out = &out + &v1p.scaled(alpha_p);
                Ok(out)
            }
            CaseTag::Composed => unreachable!("standard decomposition"),
        }
    }
}

/// Derive a lightlike `b in V_0` with `<a, b> = 1` from the ambient dual
/// basis: project the dual into `V_0`, then remove the null defect.
fn derive_null_partner<S: Scalar>(a: &Vector<S>, v0: &Subspace<S>) -> Result<Vector<S>> {
    let dual = crate::pseudo_linear::dual_lightlike_basis(std::slice::from_ref(a))?;
    let projected = v0.project(&dual[0])?;
    let pairing = a.inner(&projected);
    if pairing.abs() <= S::lit(tol::CLASS) {
        return Err(GeomError::InvalidInitialData(
            "V_0 contains no dual lightlike direction for a".into(),
        ));
    }
    let scaled = projected.scaled(S::one() / pairing);
    Ok(&scaled - &a.scaled(scaled.norm_sq() / S::lit(2.0)))
}

#[derive(Debug, Clone, PartialEq)]
enum Repr<S> {
    Standard(StandardDecomposition<S>),
    Composed {
        outer: Box<WarpedDecomposition<S>>,
        inner: Box<WarpedDecomposition<S>>,
    },
}

/// A warped product decomposition: either a standard one built directly from
/// initial data, or a composition `(p_0, .., p_k, q_1, .., q_l) ->
/// psi_outer(psi_inner(p_0, q_..), p_..)` whose geodesic factor has been
/// decomposed further.
///
/// Factor indices run `1..=k` with the outer decomposition's spherical
/// factors first, then the inner's.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedDecomposition<S> {
    repr: Repr<S>,
}

impl<S: Scalar> WarpedDecomposition<S> {
    /// Build the decomposition determined by validated initial data.
    ///
    /// With `ambient_kappa != 0` this still builds the flat decomposition;
    /// use [`Self::restrict_to_quadric`] (or let the caller do it) for the
    /// hyperquadric version.
    pub fn build(data: InitialData<S>) -> Result<Self> {
        Ok(Self {
            repr: Repr::Standard(StandardDecomposition::build(data)?),
        })
    }

    pub fn as_standard(&self) -> Option<&StandardDecomposition<S>> {
        match &self.repr {
            Repr::Standard(s) => Some(s),
            Repr::Composed { .. } => None,
        }
    }

    pub fn as_composed(&self) -> Option<(&WarpedDecomposition<S>, &WarpedDecomposition<S>)> {
        match &self.repr {
            Repr::Standard(_) => None,
            Repr::Composed { outer, inner } => Some((outer, inner)),
        }
    }

    pub fn space(&self) -> Space {
        self.base_point().space()
    }

    pub fn case(&self) -> CaseTag {
        match &self.repr {
            Repr::Standard(s) => s.case(),
            Repr::Composed { .. } => CaseTag::Composed,
        }
    }

    pub fn base_point(&self) -> &Vector<S> {
        match &self.repr {
            Repr::Standard(s) => s.data().base(),
            Repr::Composed { outer, .. } => outer.base_point(),
        }
    }

    /// The carrier subspace being decomposed.
    pub fn carrier(&self) -> &Subspace<S> {
        match &self.repr {
            Repr::Standard(s) => s.data().carrier(),
            Repr::Composed { outer, .. } => outer.carrier(),
        }
    }

    /// The innermost geodesic factor subspace `V_0`.
    pub fn geodesic_subspace(&self) -> &Subspace<S> {
        match &self.repr {
            Repr::Standard(s) => s.data().factor(0),
            Repr::Composed { inner, .. } => inner.geodesic_subspace(),
        }
    }

    /// Target of the innermost geodesic projector `W_0`.
    pub fn w0_subspace(&self) -> &Subspace<S> {
        match &self.repr {
            Repr::Standard(s) => s.w0(),
            Repr::Composed { inner, .. } => inner.w0_subspace(),
        }
    }

    /// Number of spherical factors.
    pub fn spherical_count(&self) -> usize {
        match &self.repr {
            Repr::Standard(s) => s.data().spherical_count(),
            Repr::Composed { outer, inner } => outer.spherical_count() + inner.spherical_count(),
        }
    }

    /// `a_i`, `i = 1..=k`, outer factors first.
    pub fn a_vector(&self, i: usize) -> &Vector<S> {
        match &self.repr {
            Repr::Standard(s) => s.data().a_vector(i),
            Repr::Composed { outer, inner } => {
                let ko = outer.spherical_count();
                if i <= ko {
                    outer.a_vector(i)
                } else {
                    inner.a_vector(i - ko)
                }
            }
        }
    }

    /// The spherical factor `N_i`, `i = 1..=k`, outer factors first.
    pub fn spherical_factor(&self, i: usize) -> &SphericalSubmanifold<S> {
        match &self.repr {
            Repr::Standard(s) => s.spherical_factor(i),
            Repr::Composed { outer, inner } => {
                let ko = outer.spherical_count();
                if i <= ko {
                    outer.spherical_factor(i)
                } else {
                    inner.spherical_factor(i - ko)
                }
            }
        }
    }

    /// The factor subspace `V_i`, `i = 1..=k`.
    pub fn factor_subspace(&self, i: usize) -> &Subspace<S> {
        match &self.repr {
            Repr::Standard(s) => s.data().factor(i),
            Repr::Composed { outer, inner } => {
                let ko = outer.spherical_count();
                if i <= ko {
                    outer.factor_subspace(i)
                } else {
                    inner.factor_subspace(i - ko)
                }
            }
        }
    }

    pub fn is_canonical(&self) -> bool {
        match &self.repr {
            Repr::Standard(s) => s.is_canonical(),
            // Composition requires canonical parts and preserves the property.
            Repr::Composed { .. } => true,
        }
    }

    /// The warping function `rho_i(p_0) = 1 + <a_i, p_0 - p_bar>`.
    pub fn rho(&self, i: usize, p0: &Vector<S>) -> S {
        S::one() + self.a_vector(i).inner(&(p0 - self.base_point()))
    }

    /// Membership in the geodesic region `N_0`.
    pub fn n0_contains(&self, p0: &Vector<S>, tol_rel: f64) -> bool {
        match &self.repr {
            Repr::Standard(s) => s.n0_contains(p0, tol_rel),
            Repr::Composed { outer, inner } => {
                inner.n0_contains(p0, tol_rel)
                    && (1..=outer.spherical_count()).all(|i| outer.rho(i, p0) > S::zero())
            }
        }
    }

    fn split_point(
        &self,
        p: &WarpedPoint<S>,
    ) -> (
        Vec<Vector<S>>, // outer components with a placeholder base slot
        Vec<Vector<S>>, // inner components
    ) {
        let Repr::Composed { outer, inner: _ } = &self.repr else {
            unreachable!("split_point on standard decomposition")
        };
        let ko = outer.spherical_count();
        let mut outer_parts = Vec::with_capacity(ko + 1);
        outer_parts.push(p.geodesic().clone()); // placeholder, replaced by inner image
        outer_parts.extend((1..=ko).map(|i| p.spherical(i).clone()));
        let mut inner_parts = Vec::with_capacity(p.len() - ko);
        inner_parts.push(p.geodesic().clone());
        inner_parts.extend((ko + 1..p.len()).map(|i| p.spherical(i).clone()));
        (outer_parts, inner_parts)
    }

    /// Evaluate `psi` by the master formula
    /// `p_0 + sum rho_i(p_0)(p_i - p_bar)` (all cases, composed included).
    pub fn psi_forward(&self, p: &WarpedPoint<S>) -> Result<Vector<S>> {
        match &self.repr {
            Repr::Standard(s) => s.psi_forward(p),
            Repr::Composed { .. } => {
                self.check_domain_composed(p)?;
                let mut q = p.geodesic().clone();
                for i in 1..=self.spherical_count() {
                    let rho = self.rho(i, p.geodesic());
                    q = &q + &(p.spherical(i) - self.base_point()).scaled(rho);
                }
                Ok(q)
            }
        }
    }

    fn check_domain_composed(&self, p: &WarpedPoint<S>) -> Result<()> {
        let k = self.spherical_count();
        if p.len() != k + 1 {
            return Err(GeomError::DimensionMismatch {
                expected: k + 1,
                got: p.len(),
            });
        }
        if !self.n0_contains(p.geodesic(), DOMAIN_TOL) {
            return Err(GeomError::OutOfDomain(
                "geodesic component outside N_0".into(),
            ));
        }
        for i in 1..=k {
            if !self.spherical_factor(i).contains(p.spherical(i), DOMAIN_TOL) {
                return Err(GeomError::OutOfDomain(format!(
                    "component {i} is not on the spherical factor N_{i}"
                )));
            }
        }
        Ok(())
    }

    /// Evaluate `psi` by the case-expanded route: the expanded closed form
    /// for standard decompositions, the nested evaluation
    /// `psi_outer(psi_inner(..), ..)` for composed ones. Agrees with
    /// [`Self::psi_forward`] to rounding.
    pub fn psi_forward_expanded(&self, p: &WarpedPoint<S>) -> Result<Vector<S>> {
        match &self.repr {
            Repr::Standard(s) => s.psi_forward_expanded(p),
            Repr::Composed { outer, inner } => {
                let (mut outer_parts, inner_parts) = self.split_point(p);
                let x0 = inner.psi_forward_expanded(&WarpedPoint::new(inner_parts)?)?;
                outer_parts[0] = x0;
                outer.psi_forward_expanded(&WarpedPoint::new(outer_parts)?)
            }
        }
    }

    /// Image membership at relative tolerance `tol_rel`.
    pub fn image_contains(&self, q: &Vector<S>, tol_rel: f64) -> bool {
        match &self.repr {
            Repr::Standard(s) => s.image_contains(q, tol_rel),
            Repr::Composed { outer, inner } => {
                if !outer.image_contains(q, tol_rel) {
                    return false;
                }
                match outer.psi_inverse(q) {
                    Ok(x) => inner.image_contains(x.geodesic(), tol_rel),
                    Err(_) => false,
                }
            }
        }
    }

    /// Invert `psi`; errors name the violated image predicate.
    pub fn psi_inverse(&self, q: &Vector<S>) -> Result<WarpedPoint<S>> {
        match &self.repr {
            Repr::Standard(s) => s.psi_inverse(q),
            Repr::Composed { outer, inner } => {
                let x = outer.psi_inverse(q)?;
                let inner_pt = inner.psi_inverse(x.geodesic())?;
                let mut components = Vec::with_capacity(self.spherical_count() + 1);
                components.push(inner_pt.geodesic().clone());
                components.extend(x.components()[1..].iter().cloned());
                components.extend(inner_pt.components()[1..].iter().cloned());
                WarpedPoint::new(components)
            }
        }
    }

    /// Pushforward `psi_*` at `p` applied to factor tangents `v`.
    pub fn psi_pushforward(&self, p: &WarpedPoint<S>, v: &[Vector<S>]) -> Result<Vector<S>> {
        match &self.repr {
            Repr::Standard(s) => s.psi_pushforward(p, v),
            Repr::Composed { outer, inner } => {
                if v.len() != p.len() {
                    return Err(GeomError::DimensionMismatch {
                        expected: p.len(),
                        got: v.len(),
                    });
                }
                let ko = outer.spherical_count();
                let (mut outer_parts, inner_parts) = self.split_point(p);
                let inner_point = WarpedPoint::new(inner_parts)?;
                let mut inner_tangents = Vec::with_capacity(v.len() - ko);
                inner_tangents.push(v[0].clone());
                inner_tangents.extend(v[ko + 1..].iter().cloned());
                let pushed = inner.psi_pushforward(&inner_point, &inner_tangents)?;
                let x0 = inner.psi_forward(&inner_point)?;
                outer_parts[0] = x0;
                let outer_point = WarpedPoint::new(outer_parts)?;
                let mut outer_tangents = Vec::with_capacity(ko + 1);
                outer_tangents.push(pushed);
                outer_tangents.extend(v[1..=ko].iter().cloned());
                outer.psi_pushforward(&outer_point, &outer_tangents)
            }
        }
    }

    /// Translate into canonical form (`psi -> psi - c`): the base point moves
    /// to `p_bar - c` while factors and `a`-vectors are unchanged. Composed
    /// decompositions are canonical by construction and returned as-is.
    pub fn canonicalize(&self) -> Result<WarpedDecomposition<S>> {
        match &self.repr {
            Repr::Composed { .. } => Ok(self.clone()),
            Repr::Standard(s) => {
                if s.is_canonical() {
                    return Ok(self.clone());
                }
                let data = s.data();
                let new_base = data.base() - s.center();
                let new_data = InitialData::new_full(
                    data.carrier().clone(),
                    new_base,
                    data.factors().to_vec(),
                    data.a_vectors().to_vec(),
                    data.ambient_kappa(),
                    s.null_partner().cloned(),
                )?;
                WarpedDecomposition::build(new_data)
            }
        }
    }

    /// Compose: decompose `outer`'s geodesic factor by `inner` (a canonical
    /// decomposition whose carrier is `outer`'s `V_0`). The result is the
    /// multi-factor decomposition with the union of `a`-vectors; its forward
    /// map is `psi_outer(psi_inner(p_0, q_..), p_..)`.
    ///
    /// Compatibility requires `V_0 cap W_0^perp subset W~_0`: the span
    /// complementary to `W_0` inside `V_0` (the `a`-vectors, plus `b` in the
    /// null case) must lie in the inner decomposition's `W~_0`.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if outer.space() != inner.space() {
            return Err(GeomError::IncompatibleComposition(
                "decompositions live in different spaces".into(),
            ));
        }
        let Some(outer_std) = outer.as_standard() else {
            return Err(GeomError::IncompatibleComposition(
                "the outer decomposition must be standard; iterate composition from inside out"
                    .into(),
            ));
        };
        if !outer.is_canonical() || !inner.is_canonical() {
            return Err(GeomError::NotCanonical {
                operation: "composition",
            });
        }
        let diff = (outer.base_point() - inner.base_point()).euclid_norm();
        let scale = S::one() + outer.base_point().euclid_norm();
        if diff > S::lit(tol::MEMBERSHIP) * scale {
            return Err(GeomError::IncompatibleComposition(
                "decompositions must share the base point".into(),
            ));
        }
        let v0 = outer_std.data().factor(0);
        let inner_carrier = inner.carrier();
        if inner_carrier.dim() != v0.dim()
            || !inner_carrier
                .basis()
                .iter()
                .all(|w| v0.contains_vector(w, tol::CLASS * 1e2))
        {
            return Err(GeomError::IncompatibleComposition(
                "the inner decomposition must decompose the outer geodesic factor V_0".into(),
            ));
        }
        // V_0 cap W_0^perp: the a-vectors (and b in the null case).
        let mut complement = outer_std.data().a_vectors().to_vec();
        if let Some(b) = outer_std.null_partner() {
            complement.push(b.clone());
        }
        let inner_w0 = inner.w0_subspace();
        for w in &complement {
            if !inner_w0.contains_vector(w, tol::CLASS * 1e2) {
                return Err(GeomError::IncompatibleComposition(
                    "V_0 cap W_0^perp must be contained in the inner W_0".into(),
                ));
            }
        }
        Ok(Self {
            repr: Repr::Composed {
                outer: Box::new(outer.clone()),
                inner: Box::new(inner.clone()),
            },
        })
    }

    /// Restrict a proper canonical decomposition to the hyperquadric through
    /// its base point, `kappa = 1 / <p_bar, p_bar>`.
    pub fn restrict_to_quadric(&self) -> Result<RestrictedDecomposition<S>> {
        RestrictedDecomposition::new(self.clone())
    }

    /// Family tag of the decomposition; see [`TypeTag`].
    pub fn enumerate_type(&self) -> TypeTag {
        let nu = self.space().index();
        let v0 = self.geodesic_subspace();
        let (m, mu, _) = v0.signature();
        let geodesic = FactorSymbol {
            letter: match mu {
                0 => 'E',
                1 => 'M',
                _ => 'E', // prints E^m_mu
            },
            dim: m,
            index: mu,
        };
        let factors: Vec<FactorSymbol> = (1..=self.spherical_count())
            .map(|i| factor_symbol(self.a_vector(i).causal_class(), self.factor_subspace(i)))
            .collect();
        let family = match nu {
            0 => Family::Euclidean,
            1 => {
                if factors.iter().any(|f| f.letter == 'E') {
                    Family::MinkowskiLightlike
                } else if factors.iter().any(|f| f.letter == 'H') {
                    Family::MinkowskiTimelike
                } else if mu == 0 {
                    Family::MinkowskiDeSitterFactor
                } else {
                    Family::MinkowskiSpacelike
                }
            }
            _ => Family::Generic,
        };
        TypeTag::new(family, geodesic, factors)
    }

    /// The product-decomposition obstruction is vacuous on flat ambient
    /// space; see [`RestrictedDecomposition::product_obstruction`].
    pub fn product_obstruction(&self) -> ProductObstruction<S> {
        ProductObstruction {
            applicable: false,
            holds: true,
            min_gradient: S::zero(),
        }
    }
}

/// A warped product decomposition of the hyperquadric `E^n_nu(kappa)`
/// obtained by restricting a canonical flat decomposition to
/// `N_0(kappa) x N_1 x ... x N_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedDecomposition<S> {
    flat: WarpedDecomposition<S>,
    kappa: S,
    /// The sphere `N_0(kappa)` is an open subset of: the sphere determined by
    /// `(p_bar, p_bar^perp cap V_0, kappa p_bar)` (absent when `V_0 = R p_bar`).
    geodesic_quadric: Option<SphericalSubmanifold<S>>,
    /// Index of the restricted geodesic factor `ind(p_bar^perp cap V_0)`.
    geodesic_index: usize,
    /// Whether the full quadric `{p in V_0 : <p,p> = 1/kappa}` is two-sheeted;
    /// the domain then carries the half-space cut `<kappa p_bar, p> > 0`.
    two_sheeted: bool,
}

impl<S: Scalar> RestrictedDecomposition<S> {
    fn new(flat: WarpedDecomposition<S>) -> Result<Self> {
        if !flat.is_canonical() {
            return Err(GeomError::NotCanonical {
                operation: "restriction to a hyperquadric",
            });
        }
        let base = flat.base_point().clone();
        let psq = base.norm_sq();
        if psq.abs() <= S::lit(tol::CLASS) * (S::one() + base.euclid_norm_sq()) {
            return Err(GeomError::LightlikeBasePoint);
        }
        let kappa = S::one() / psq;
        let v0 = flat.geodesic_subspace().clone();
        let g0 = perp_within(std::slice::from_ref(&base), &v0)?;
        let (m0, mu0, _) = g0.signature();
        let two_sheeted = (kappa < S::zero() && mu0 == 0) || (kappa > S::zero() && mu0 == m0);
        let geodesic_quadric = if m0 >= 1 {
            let seed = SphereInitialData::new(base.clone(), g0, base.scaled(kappa))?;
            Some(classify_sphere(&seed)?)
        } else {
            None
        };
        Ok(Self {
            flat,
            kappa,
            geodesic_quadric,
            geodesic_index: mu0,
            two_sheeted,
        })
    }

    /// The underlying flat decomposition (same map, larger domain).
    pub fn flat(&self) -> &WarpedDecomposition<S> {
        &self.flat
    }

    pub fn kappa(&self) -> S {
        self.kappa
    }

    pub fn space(&self) -> Space {
        self.flat.space()
    }

    pub fn base_point(&self) -> &Vector<S> {
        self.flat.base_point()
    }

    /// The sphere whose open subset is `N_0(kappa)`, when `dim V_0 > 1`.
    pub fn geodesic_quadric(&self) -> Option<&SphericalSubmanifold<S>> {
        self.geodesic_quadric.as_ref()
    }

    /// Whether the geodesic quadric is two-sheeted, requiring the
    /// `<kappa p_bar, p_0> > 0` component cut.
    pub fn is_two_sheeted(&self) -> bool {
        self.two_sheeted
    }

    fn on_quadric(&self, p: &Vector<S>, tol_rel: f64) -> bool {
        let scale = S::one() + p.euclid_norm_sq();
        (p.norm_sq() - S::one() / self.kappa).abs() <= S::lit(tol_rel) * scale
    }

    fn component_cut(&self, p0: &Vector<S>) -> bool {
        !self.two_sheeted || self.base_point().inner(p0) * self.kappa > S::zero()
    }

    /// Membership in the restricted geodesic region `N_0(kappa)`.
    pub fn n0_contains(&self, p0: &Vector<S>, tol_rel: f64) -> bool {
        self.flat.n0_contains(p0, tol_rel)
            && self.on_quadric(p0, tol_rel)
            && self.component_cut(p0)
    }

    /// Forward map; the image automatically satisfies `<q,q> = 1/kappa`.
    pub fn psi_forward(&self, p: &WarpedPoint<S>) -> Result<Vector<S>> {
        if !self.on_quadric(p.geodesic(), DOMAIN_TOL) {
            return Err(GeomError::OutOfDomain(
                "geodesic component is not on the hyperquadric".into(),
            ));
        }
        if !self.component_cut(p.geodesic()) {
            return Err(GeomError::OutOfDomain(
                "geodesic component on the opposite sheet of N_0(kappa)".into(),
            ));
        }
        self.flat.psi_forward(p)
    }

    pub fn psi_forward_expanded(&self, p: &WarpedPoint<S>) -> Result<Vector<S>> {
        if !self.n0_contains(p.geodesic(), DOMAIN_TOL) {
            return Err(GeomError::OutOfDomain(
                "geodesic component outside N_0(kappa)".into(),
            ));
        }
        self.flat.psi_forward_expanded(p)
    }

    /// Inverse; rejects points off the quadric or on the wrong sheet.
    pub fn psi_inverse(&self, q: &Vector<S>) -> Result<WarpedPoint<S>> {
        if !self.on_quadric(q, DOMAIN_TOL) {
            return Err(ImageViolation::OffQuadric.into());
        }
        let p = self.flat.psi_inverse(q)?;
        if !self.component_cut(p.geodesic()) {
            return Err(ImageViolation::GeodesicComponentCut.into());
        }
        Ok(p)
    }

    /// Image membership on the quadric.
    pub fn image_contains(&self, q: &Vector<S>, tol_rel: f64) -> bool {
        if !self.on_quadric(q, tol_rel) || !self.flat.image_contains(q, tol_rel) {
            return false;
        }
        match self.flat.psi_inverse(q) {
            Ok(p) => self.component_cut(p.geodesic()),
            Err(_) => false,
        }
    }

    /// Pushforward; `v_0` must additionally be tangent to the quadric
    /// (`<v_0, p_0> = 0`).
    pub fn psi_pushforward(&self, p: &WarpedPoint<S>, v: &[Vector<S>]) -> Result<Vector<S>> {
        if !v.is_empty() {
            let radial = v[0].inner(p.geodesic());
            let scale = (S::one() + v[0].euclid_norm()) * (S::one() + p.geodesic().euclid_norm());
            if radial.abs() > S::lit(DOMAIN_TOL) * scale {
                return Err(GeomError::NotTangent { factor: 0 });
            }
        }
        if !self.n0_contains(p.geodesic(), DOMAIN_TOL) {
            return Err(GeomError::OutOfDomain(
                "geodesic component outside N_0(kappa)".into(),
            ));
        }
        self.flat.psi_pushforward(p, v)
    }

    pub fn rho(&self, i: usize, p0: &Vector<S>) -> S {
        self.flat.rho(i, p0)
    }

    /// Ambient mean curvature of the leaf of factor `i` through `psi(p)`:
    /// the pushforward of `-a_i / rho_i(p_0)` in the geodesic slot. At
    /// `p_i = p_bar` this is the vector `-a_i / rho_i(p_0)` itself.
    pub fn leaf_mean_curvature(&self, i: usize, p: &WarpedPoint<S>) -> Result<Vector<S>> {
        let rho = self.rho(i, p.geodesic());
        let v0 = self.flat.a_vector(i).scaled(-S::one() / rho);
        let mut tangents: Vec<Vector<S>> = (0..p.len())
            .map(|_| Vector::zero(self.space()))
            .collect();
        tangents[0] = v0;
        self.flat.psi_pushforward(p, &tangents)
    }

    /// Verify the product-decomposition obstruction: every warping function
    /// must be non-constant on `N_0(kappa)`, i.e. the tangential gradient
    /// `a_i - kappa rho_i p_0` stays away from zero at sampled points.
    pub fn product_obstruction(&self, samples: usize, seed: u64) -> ProductObstruction<S> {
        let mut rng = SplitMix64::new(seed);
        let mut min_gradient = S::infinity();
        let mut count = 0usize;
        let mut attempts = 0usize;
        while count < samples.max(1) && attempts < samples.max(1) * 200 {
            attempts += 1;
            let Some(p0) = sample_restricted_geodesic(self, &mut rng) else {
                continue;
            };
            count += 1;
            for i in 1..=self.flat.spherical_count() {
                let rho = self.rho(i, &p0);
                let grad = self.flat.a_vector(i) - &p0.scaled(self.kappa * rho);
                min_gradient = min_gradient.min(grad.euclid_norm());
            }
        }
        if count == 0 {
            // 0-dimensional N_0(kappa): nothing can vary.
            return ProductObstruction {
                applicable: true,
                holds: true,
                min_gradient: S::zero(),
            };
        }
        ProductObstruction {
            applicable: true,
            holds: min_gradient > S::lit(1e-6),
            min_gradient,
        }
    }

    /// Family tag on the quadric; see [`TypeTag`].
    pub fn enumerate_type(&self) -> TypeTag {
        let nu = self.space().index();
        let quadric_index = if self.kappa > S::zero() { nu } else { nu - 1 };
        let v0 = self.flat.geodesic_subspace();
        let m0 = v0.dim() - 1;
        let mu0 = self.geodesic_index;
        let geodesic = if self.kappa > S::zero() {
            FactorSymbol {
                letter: if mu0 == 1 { 'd' } else { 'S' },
                dim: m0,
                index: mu0,
            }
        } else {
            FactorSymbol {
                letter: 'H',
                dim: m0,
                index: mu0,
            }
        };
        let factors: Vec<FactorSymbol> = (1..=self.flat.spherical_count())
            .map(|i| {
                factor_symbol(
                    self.flat.a_vector(i).causal_class(),
                    self.flat.factor_subspace(i),
                )
            })
            .collect();
        let family = match (self.kappa > S::zero(), quadric_index) {
            (true, 0) => Family::Sphere,
            (true, 1) => {
                if factors.iter().any(|f| f.letter == 'E') {
                    Family::DeSitterLightlike
                } else if factors.iter().any(|f| f.letter == 'H') {
                    Family::DeSitterTimelike
                } else if mu0 == 0 {
                    Family::DeSitterSphericalBase
                } else {
                    Family::DeSitterSpacelike
                }
            }
            (false, 0) => {
                if factors.iter().any(|f| f.letter == 'E') {
                    Family::HyperbolicLightlike
                } else if factors.iter().any(|f| f.letter == 'H') {
                    Family::HyperbolicTimelike
                } else {
                    Family::HyperbolicSpacelike
                }
            }
            _ => Family::Generic,
        };
        TypeTag::new(family, geodesic, factors)
    }
}

fn sample_restricted_geodesic<S: Scalar>(
    restricted: &RestrictedDecomposition<S>,
    rng: &mut SplitMix64,
) -> Option<Vector<S>> {
    let quadric = restricted.geodesic_quadric()?;
    let m = quadric.dim();
    let u: Vec<S> = (0..m).map(|_| S::lit(rng.uniform(-1.0, 1.0))).collect();
    let p0 = quadric.parametrize(&u).ok()?;
    restricted.n0_contains(&p0, DOMAIN_TOL).then_some(p0)
}

/// Result of the product-decomposition obstruction check.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductObstruction<S> {
    /// False for flat ambient space, where the obstruction is vacuous.
    pub applicable: bool,
    pub holds: bool,
    pub min_gradient: S,
}

/// One symbol of a product string, e.g. `S^2`, `dS^3`, `H^2_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FactorSymbol {
    /// `E`/`M` flat, `S` sphere, `H` hyperbolic, `d` de Sitter.
    pub letter: char,
    pub dim: usize,
    pub index: usize,
}

impl std::fmt::Display for FactorSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.letter {
            'E' | 'M' | 'S' | 'H' => {
                let named = match (self.letter, self.index) {
                    ('E', 0) | ('S', 0) | ('H', 0) | ('M', 1) => true,
                    ('S', 1) => false, // printed as dS below
                    _ => false,
                };
                if named {
                    write!(f, "{}^{}", self.letter, self.dim)
                } else if self.letter == 'S' && self.index == 1 {
                    write!(f, "dS^{}", self.dim)
                } else {
                    write!(f, "{}^{}_{}", self.letter, self.dim, self.index)
                }
            }
            'd' => write!(f, "dS^{}", self.dim),
            _ => write!(f, "{}^{}_{}", self.letter, self.dim, self.index),
        }
    }
}

fn factor_symbol<S: Scalar>(class: CausalClass, v: &Subspace<S>) -> FactorSymbol {
    let (dim, index, _) = v.signature();
    let letter = match class {
        CausalClass::Lightlike => 'E',
        CausalClass::Timelike => 'H',
        _ => {
            if index == 1 {
                'd'
            } else {
                'S'
            }
        }
    };
    FactorSymbol { letter, dim, index }
}

/// The named families of warped product decompositions for the flat and
/// quadric ambients of index 0 and 1; higher index reports `Generic` with a
/// descriptor string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `E^m x_rho S^{n_1} x ... x S^{n_s}`
    Euclidean,
    /// `M^m x_lambda E^{n_1} x S ...` (lightlike warping gradient)
    MinkowskiLightlike,
    /// `M^m x_tau H^{n_1} x S ...`
    MinkowskiTimelike,
    /// `E^m x_rho dS^{n_1} x S ...`
    MinkowskiDeSitterFactor,
    /// `M^m x_rho S^{n_1} x S ...`
    MinkowskiSpacelike,
    /// `S^m x_rho S^{n_1} x ...`
    Sphere,
    /// `dS^m x_lambda E^{n_1} x S ...`
    DeSitterLightlike,
    /// `dS^m x_tau H^{n_1} x S ...`
    DeSitterTimelike,
    /// `S^m x_rho dS^{n_1} x S ...`
    DeSitterSphericalBase,
    /// `dS^m x_rho S^{n_1} x S ...`
    DeSitterSpacelike,
    /// `H^m x_lambda E^{n_1} x S ...`
    HyperbolicLightlike,
    /// `H^m x_tau H^{n_1} x S ...`
    HyperbolicTimelike,
    /// `H^m x_rho S^{n_1} x S ...`
    HyperbolicSpacelike,
    /// Index >= 2: no named family, the descriptor carries the signatures.
    Generic,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::Euclidean => "euclidean",
            Family::MinkowskiLightlike => "minkowski-lightlike",
            Family::MinkowskiTimelike => "minkowski-timelike",
            Family::MinkowskiDeSitterFactor => "minkowski-desitter-factor",
            Family::MinkowskiSpacelike => "minkowski-spacelike",
            Family::Sphere => "sphere",
            Family::DeSitterLightlike => "desitter-lightlike",
            Family::DeSitterTimelike => "desitter-timelike",
            Family::DeSitterSphericalBase => "desitter-spherical-base",
            Family::DeSitterSpacelike => "desitter-spacelike",
            Family::HyperbolicLightlike => "hyperbolic-lightlike",
            Family::HyperbolicTimelike => "hyperbolic-timelike",
            Family::HyperbolicSpacelike => "hyperbolic-spacelike",
            Family::Generic => "generic",
        };
        f.write_str(s)
    }
}

/// The type tag of a decomposition: its family plus a printable product
/// descriptor like `E^1 x S^1` or `M^2 x_lambda E^1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeTag {
    pub family: Family,
    pub geodesic: FactorSymbol,
    pub factors: Vec<FactorSymbol>,
    pub product: String,
}

impl TypeTag {
    fn new(family: Family, geodesic: FactorSymbol, factors: Vec<FactorSymbol>) -> Self {
        let mut product = geodesic.to_string();
        for f in &factors {
            product.push_str(" x ");
            product.push_str(&f.to_string());
        }
        Self {
            family,
            geodesic,
            factors,
            product,
        }
    }
}

impl std::fmt::Display for TypeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.product, self.family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo_linear::Vector;
    use crate::spheres::SphereKind;

    fn vec64(space: Space, coords: &[f64]) -> Vector<f64> {
        Vector::from_f64(space, coords).unwrap()
    }

    /// Polar coordinates on E^2: V_0 = span e1, V_1 = span e2, a = e1,
    /// p_bar = e1. Canonical.
    fn polar() -> WarpedDecomposition<f64> {
        let e2 = Space::euclidean(2).unwrap();
        let data = InitialData::new(
            vec64(e2, &[1.0, 0.0]),
            vec![
                Subspace::coordinate_span(e2, &[0]).unwrap(),
                Subspace::coordinate_span(e2, &[1]).unwrap(),
            ],
            vec![vec64(e2, &[1.0, 0.0])],
        )
        .unwrap();
        WarpedDecomposition::build(data).unwrap()
    }

    /// The null seed of the module examples: E^3_1, a = (1,1,0),
    /// p_bar = b = (-1/2, 1/2, 0), V_0 = span{a, b}, V_1 = span{e3}.
    fn null_seed() -> WarpedDecomposition<f64> {
        let m3 = Space::minkowski(3).unwrap();
        let a = vec64(m3, &[1.0, 1.0, 0.0]);
        let b = vec64(m3, &[-0.5, 0.5, 0.0]);
        let data = InitialData::new_full(
            Subspace::whole(m3),
            b.clone(),
            vec![
                Subspace::span(m3, vec![a.clone(), b.clone()]).unwrap(),
                Subspace::coordinate_span(m3, &[2]).unwrap(),
            ],
            vec![a],
            0.0,
            Some(b),
        )
        .unwrap();
        WarpedDecomposition::build(data).unwrap()
    }

    #[test]
    fn polar_build_derived_fields() {
        let w = polar();
        let s = w.as_standard().unwrap();
        assert_eq!(s.case(), CaseTag::NonNull);
        assert!(s.is_canonical());
        assert!(s.center().euclid_norm() < 1e-12);
        assert!(s.factor_center(1).unwrap().euclid_norm() < 1e-12);
        assert_eq!(s.spherical_factor(1).kind(), SphereKind::PseudoSphere);
        assert!((s.spherical_factor(1).curvature() - 1.0).abs() < 1e-12);
        // rho(p_0) = <e1, p_0>.
        let p0 = vec64(w.space(), &[2.5, 0.0]);
        assert!((s.rho(1, &p0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn null_seed_build_derived_fields() {
        let w = null_seed();
        let s = w.as_standard().unwrap();
        assert_eq!(s.case(), CaseTag::Null);
        assert!(s.is_canonical());
        // c = p_bar - b = 0.
        assert!(s.center().euclid_norm() < 1e-12);
        assert_eq!(s.spherical_factor(1).kind(), SphereKind::Paraboloid);
        // rho(p_0) = <a, p_0>: at p_bar = b this is <a,b> = 1.
        assert!((s.rho(1, w.base_point()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_data() {
        let e3 = Space::euclidean(3).unwrap();
        // Dimension mismatch: factors span only 2 of 3 dimensions.
        let r = InitialData::new(
            vec64(e3, &[1.0, 0.0, 0.0]),
            vec![
                Subspace::coordinate_span(e3, &[0]).unwrap(),
                Subspace::coordinate_span(e3, &[1]).unwrap(),
            ],
            vec![vec64(e3, &[1.0, 0.0, 0.0])],
        );
        assert!(matches!(r, Err(GeomError::InvalidInitialData(_))));

        // Mixed causal types: a_1 lightlike and a_2 spacelike, both in V_0.
        let m5 = Space::minkowski(5).unwrap();
        let r = InitialData::new(
            vec64(m5, &[0.0, 1.0, 1.0, 0.0, 0.0]),
            vec![
                Subspace::coordinate_span(m5, &[0, 1, 2]).unwrap(),
                Subspace::coordinate_span(m5, &[3]).unwrap(),
                Subspace::coordinate_span(m5, &[4]).unwrap(),
            ],
            vec![
                vec64(m5, &[1.0, 1.0, 0.0, 0.0, 0.0]),
                vec64(m5, &[0.0, 0.0, 1.0, 0.0, 0.0]),
            ],
        );
        assert!(matches!(r, Err(GeomError::MixedCausalTypes { .. })));

        // Zero a-vector.
        let e2 = Space::euclidean(2).unwrap();
        let r = InitialData::new(
            vec64(e2, &[1.0, 0.0]),
            vec![
                Subspace::coordinate_span(e2, &[0]).unwrap(),
                Subspace::coordinate_span(e2, &[1]).unwrap(),
            ],
            vec![Vector::zero(e2)],
        );
        assert!(matches!(r, Err(GeomError::InvalidInitialData(_))));
    }

    #[test]
    fn forward_polar_is_polar_chart() {
        let w = polar();
        let e2 = w.space();
        // psi(r e1, (cos t, sin t)) = (r cos t, r sin t).
        for &(r, t) in &[(1.0f64, 0.0f64), (2.0, 0.7), (0.3, -1.2)] {
            let p = WarpedPoint::new(vec![
                vec64(e2, &[r, 0.0]),
                vec64(e2, &[t.cos(), t.sin()]),
            ])
            .unwrap();
            let q = w.psi_forward(&p).unwrap();
            assert!((q.coord(0) - r * t.cos()).abs() < 1e-12);
            assert!((q.coord(1) - r * t.sin()).abs() < 1e-12);
            let expanded = w.psi_forward_expanded(&p).unwrap();
            assert!((&q - &expanded).euclid_norm() < 1e-12);
        }
    }

    #[test]
    fn forward_fixes_base_tuple() {
        for w in [polar(), null_seed()] {
            let p = WarpedPoint::new(vec![
                w.base_point().clone(),
                w.base_point().clone(),
            ])
            .unwrap();
            let q = w.psi_forward(&p).unwrap();
            assert!((&q - w.base_point()).euclid_norm() < 1e-12);
        }
        // With the base point in every other slot, psi returns the factor
        // point itself: psi(p_bar, ..., p_i, ..., p_bar) = p_i.
        let w = polar();
        let e2 = w.space();
        let p1 = vec64(e2, &[0.6, 0.8]);
        let q = w
            .psi_forward(&WarpedPoint::new(vec![w.base_point().clone(), p1.clone()]).unwrap())
            .unwrap();
        assert!((&q - &p1).euclid_norm() < 1e-12);
    }

    #[test]
    fn forward_null_seed_example() {
        let w = null_seed();
        let m3 = w.space();
        let s = w.as_standard().unwrap();
        let b = s.null_partner().unwrap().clone();
        let a = vec64(m3, &[1.0, 1.0, 0.0]);
        // Factor point at graph parameter t = 1: p_1 = p_bar + e3 - a/2.
        let n1 = s.spherical_factor(1);
        let p1 = n1.point_from_graph(&vec64(m3, &[0.0, 0.0, 1.0]));
        let p = WarpedPoint::new(vec![b.clone(), p1]).unwrap();
        let q = w.psi_forward(&p).unwrap();
        let expected = &(&b + &vec64(m3, &[0.0, 0.0, 1.0])) - &a.scaled(0.5);
        assert!((&q - &expected).euclid_norm() < 1e-12);
        // psi(p)^2 = p_0^2 = 0 in canonical form.
        assert!(q.norm_sq().abs() < 1e-12);
        let expanded = w.psi_forward_expanded(&p).unwrap();
        assert!((&q - &expanded).euclid_norm() < 1e-12);
    }

    #[test]
    fn inverse_polar_example() {
        let w = polar();
        let e2 = w.space();
        let p = w.psi_inverse(&vec64(e2, &[3.0, 4.0])).unwrap();
        assert!((&p.geodesic().clone() - &vec64(e2, &[5.0, 0.0])).euclid_norm() < 1e-12);
        assert!((&p.spherical(1).clone() - &vec64(e2, &[0.6, 0.8])).euclid_norm() < 1e-12);

        // Fixed point.
        let at_base = w.psi_inverse(w.base_point()).unwrap();
        for c in at_base.components() {
            assert!((c - w.base_point()).euclid_norm() < 1e-12);
        }

        // The origin violates the sign condition (sgn 0 != +1).
        let err = w.psi_inverse(&vec64(e2, &[0.0, 0.0])).unwrap_err();
        assert!(matches!(
            err,
            GeomError::OutOfImage(ImageViolation::SignCondition { factor: 1 })
        ));
    }

    #[test]
    fn inverse_round_trip_null() {
        let w = null_seed();
        let m3 = w.space();
        let s = w.as_standard().unwrap();
        let b = s.null_partner().unwrap().clone();
        let n1 = s.spherical_factor(1);
        for &(s0, s1, t) in &[(0.0, 0.0, 1.0), (0.8, -0.4, 0.5), (-0.3, 1.2, 2.0)] {
            // p_0 = b + s0 a + s1 (a x-like shift inside V_0):
            // V_0 = span{a,b}: p_0 = b + s0 a + s1 b stays in V_0; keep rho>0.
            let a = vec64(m3, &[1.0, 1.0, 0.0]);
            let p0 = &(&b + &a.scaled(s0)) + &b.scaled(s1);
            if w.rho(1, &p0) <= 0.1 {
                continue;
            }
            let p1 = n1.point_from_graph(&vec64(m3, &[0.0, 0.0, t]));
            let p = WarpedPoint::new(vec![p0, p1]).unwrap();
            let q = w.psi_forward(&p).unwrap();
            let back = w.psi_inverse(&q).unwrap();
            for (x, y) in p.components().iter().zip(back.components()) {
                assert!((x - y).euclid_norm() < 1e-9, "round trip failed");
            }
        }
    }

    #[test]
    fn image_membership_examples() {
        let w = polar();
        let e2 = w.space();
        assert!(w.image_contains(&vec64(e2, &[3.0, 4.0]), 1e-9));
        assert!(!w.image_contains(&vec64(e2, &[0.0, 0.0]), 1e-9));

        let nw = null_seed();
        let m3 = nw.space();
        // <a, q> = 2 > 0.
        let q = vec64(m3, &[0.0, 2.0, 0.0]);
        assert!(nw.image_contains(&q, 1e-9));
        let q_bad = vec64(m3, &[0.0, -2.0, 0.0]);
        assert!(!nw.image_contains(&q_bad, 1e-9));
    }

    #[test]
    fn disconnected_factor_image_respects_component() {
        // H^1 factor in E^2_1: V_0 = span{e1} with a = e1 timelike,
        // p_bar = -e1, V_1 = span{e2}. The factor quadric x0^2 - x1^2 = 1
        // is two-branched; the image keeps the branch of the base point
        // (<a, P_1 q> > 0, i.e. q_0 < 0).
        let m2 = Space::new(2, 1).unwrap();
        let data = InitialData::new(
            vec64(m2, &[-1.0, 0.0]),
            vec![
                Subspace::coordinate_span(m2, &[0]).unwrap(),
                Subspace::coordinate_span(m2, &[1]).unwrap(),
            ],
            vec![vec64(m2, &[1.0, 0.0])],
        )
        .unwrap();
        let w = WarpedDecomposition::build(data).unwrap();
        let s = w.as_standard().unwrap();
        assert!(s.is_canonical());
        assert!(s.spherical_factor(1).is_disconnected());
        assert!(w.image_contains(&vec64(m2, &[-2.0, 0.0]), 1e-9));
        assert!(!w.image_contains(&vec64(m2, &[2.0, 0.0]), 1e-9));
        let err = w.psi_inverse(&vec64(m2, &[2.0, 0.0])).unwrap_err();
        assert!(matches!(
            err,
            GeomError::OutOfImage(ImageViolation::ComponentCut { factor: 1 })
        ));
        // Round trip on the admissible branch.
        let q = vec64(m2, &[-3.0, 1.0]);
        assert!(w.image_contains(&q, 1e-9));
        let p = w.psi_inverse(&q).unwrap();
        let q2 = w.psi_forward(&p).unwrap();
        assert!((&q2 - &q).euclid_norm() < 1e-12);
    }

    #[test]
    fn pushforward_matches_finite_difference_polar() {
        let w = polar();
        let e2 = w.space();
        let p0 = vec64(e2, &[2.0, 0.0]);
        let p1 = vec64(e2, &[0.6, 0.8]);
        let p = WarpedPoint::new(vec![p0.clone(), p1.clone()]).unwrap();
        // v_0 in V_0, v_1 tangent to the circle at p_1.
        let v0 = vec64(e2, &[0.7, 0.0]);
        let v1 = vec64(e2, &[-0.8, 0.6]);
        let push = w.psi_pushforward(&p, &[v0.clone(), v1.clone()]).unwrap();
        // Finite differences through factor curves.
        let h = 1e-6;
        let n1 = w.spherical_factor(1);
        let eval = |s: f64| {
            let q = WarpedPoint::new(vec![&p0 + &v0.scaled(s), n1.curve_through(&p1, &v1, s)])
                .unwrap();
            w.psi_forward(&q).unwrap()
        };
        let fd = (&eval(h) - &eval(-h)).scaled(0.5 / h);
        assert!((&push - &fd).euclid_norm() < 1e-6, "analytic vs fd");
        // Isometry identity.
        let lhs = push.norm_sq();
        let rhs = v0.norm_sq() + w.rho(1, &p0).powi(2) * v1.norm_sq();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn pushforward_rejects_non_tangent() {
        let w = polar();
        let e2 = w.space();
        let p = WarpedPoint::new(vec![vec64(e2, &[2.0, 0.0]), vec64(e2, &[1.0, 0.0])]).unwrap();
        // v_1 with a radial component is not tangent to the circle.
        let r = w.psi_pushforward(
            &p,
            &[Vector::zero(e2), vec64(e2, &[1.0, 0.0])],
        );
        assert!(matches!(r, Err(GeomError::NotTangent { factor: 1 })));
    }

    #[test]
    fn pushforward_w0_component_is_identity() {
        // v = (v_0, 0, ..., 0) with v_0 in W_0 maps to P_0 v_0 = v_0.
        let e3 = Space::euclidean(3).unwrap();
        let w = WarpedDecomposition::build(
            InitialData::new(
                vec64(e3, &[1.0, 0.0, 0.0]),
                vec![
                    Subspace::coordinate_span(e3, &[0, 1]).unwrap(),
                    Subspace::coordinate_span(e3, &[2]).unwrap(),
                ],
                vec![vec64(e3, &[1.0, 0.0, 0.0])],
            )
            .unwrap(),
        )
        .unwrap();
        // W_0 = V_0 cap a^perp = span{e2}.
        let p = WarpedPoint::new(vec![
            vec64(e3, &[2.0, 0.7, 0.0]),
            vec64(e3, &[0.6, 0.0, 0.8]),
        ])
        .unwrap();
        let v0 = vec64(e3, &[0.0, 1.3, 0.0]);
        let push = w
            .psi_pushforward(&p, &[v0.clone(), Vector::zero(e3)])
            .unwrap();
        assert!((&push - &v0).euclid_norm() < 1e-12);
    }

    #[test]
    fn canonicalize_recovers_polar_form() {
        let e2 = Space::euclidean(2).unwrap();
        // Polar seed translated: base point (3, 0), same factors and a.
        let data = InitialData::new(
            vec64(e2, &[3.0, 0.0]),
            vec![
                Subspace::coordinate_span(e2, &[0]).unwrap(),
                Subspace::coordinate_span(e2, &[1]).unwrap(),
            ],
            vec![vec64(e2, &[1.0, 0.0])],
        )
        .unwrap();
        let w = WarpedDecomposition::build(data).unwrap();
        let s = w.as_standard().unwrap();
        assert!(!s.is_canonical());
        assert!((&s.center().clone() - &vec64(e2, &[2.0, 0.0])).euclid_norm() < 1e-12);
        let canon = w.canonicalize().unwrap();
        let cs = canon.as_standard().unwrap();
        assert!(cs.is_canonical());
        assert!((cs.data().base().coord(0) - 1.0).abs() < 1e-12);
        // psi'(.) = psi(.) - c on corresponding points: the domains are
        // translates, so compare at matching tuples.
        let p0 = vec64(e2, &[4.0, 0.0]);
        // N_1 is the unit circle centered at c_1 = (2, 0).
        let p1 = vec64(e2, &[2.6, 0.8]);
        let q = w
            .psi_forward(&WarpedPoint::new(vec![p0.clone(), p1.clone()]).unwrap())
            .unwrap();
        let c = s.center().clone();
        let q2 = canon
            .psi_forward(&WarpedPoint::new(vec![&p0 - &c, &p1 - &c]).unwrap())
            .unwrap();
        assert!((&(&q - &c) - &q2).euclid_norm() < 1e-12);
        // Already canonical: identical output.
        let again = canon.canonicalize().unwrap();
        assert_eq!(again, canon);

        // Non-canonical null seed: c = p_bar - b and the translated base is b.
        let nw = null_seed();
        assert!(nw.is_canonical());
        let m3 = nw.space();
        let ns = nw.as_standard().unwrap();
        let b = ns.null_partner().unwrap().clone();
        let shifted_base = &b + &vec64(m3, &[0.0, 0.4, 0.5]);
        let shifted = WarpedDecomposition::build(
            InitialData::new_full(
                Subspace::whole(m3),
                shifted_base.clone(),
                ns.data().factors().to_vec(),
                ns.data().a_vectors().to_vec(),
                0.0,
                Some(b.clone()),
            )
            .unwrap(),
        )
        .unwrap();
        assert!(!shifted.is_canonical());
        let sc = shifted.as_standard().unwrap();
        assert!((&(&shifted_base - &b) - sc.center()).euclid_norm() < 1e-12);
        let canon_null = shifted.canonicalize().unwrap();
        assert!((canon_null.base_point() - &b).euclid_norm() < 1e-12);
        assert!(canon_null.is_canonical());
    }

    #[test]
    fn compose_bipolar_coordinates() {
        // Bipolar coordinates on E^4: the outer decomposition splits off the
        // circle towards e4 (a_1 = e1), the inner one decomposes the
        // remaining V_0 = span{e1,e2,e3} by the circle towards e3 (a_2 = e2).
        // Compatibility: a_1 = e1 lies in the inner W_0 = span{e1}.
        let e4 = Space::euclidean(4).unwrap();
        let base = vec64(e4, &[1.0, 1.0, 0.0, 0.0]);
        let outer = WarpedDecomposition::build(
            InitialData::new(
                base.clone(),
                vec![
                    Subspace::coordinate_span(e4, &[0, 1, 2]).unwrap(),
                    Subspace::coordinate_span(e4, &[3]).unwrap(),
                ],
                vec![vec64(e4, &[1.0, 0.0, 0.0, 0.0])],
            )
            .unwrap(),
        )
        .unwrap();
        let inner = WarpedDecomposition::build(
            InitialData::new_full(
                Subspace::coordinate_span(e4, &[0, 1, 2]).unwrap(),
                base.clone(),
                vec![
                    Subspace::coordinate_span(e4, &[0, 1]).unwrap(),
                    Subspace::coordinate_span(e4, &[2]).unwrap(),
                ],
                vec![vec64(e4, &[0.0, 1.0, 0.0, 0.0])],
                0.0,
                None,
            )
            .unwrap(),
        )
        .unwrap();
        let bipolar = WarpedDecomposition::compose(&outer, &inner).unwrap();
        assert_eq!(bipolar.spherical_count(), 2);
        assert_eq!(bipolar.case(), CaseTag::Composed);
        assert!(bipolar.is_canonical());

        // psi((x, y, 0, 0), theta-circle point, phi-circle point)
        //   = (x cos th, y cos ph, y sin ph, x sin th).
        let (x, y, th, ph) = (2.0f64, 1.5f64, 0.8f64, -0.4f64);
        let p0 = vec64(e4, &[x, y, 0.0, 0.0]);
        let p1 = vec64(e4, &[th.cos(), 1.0, 0.0, th.sin()]);
        let p2 = vec64(e4, &[1.0, ph.cos(), ph.sin(), 0.0]);
        let p = WarpedPoint::new(vec![p0.clone(), p1.clone(), p2.clone()]).unwrap();
        let q = bipolar.psi_forward(&p).unwrap();
        let expected = vec64(
            e4,
            &[x * th.cos(), y * ph.cos(), y * ph.sin(), x * th.sin()],
        );
        assert!((&q - &expected).euclid_norm() < 1e-12);

        // Master formula agrees with the nested evaluation.
        let nested = bipolar.psi_forward_expanded(&p).unwrap();
        assert!((&q - &nested).euclid_norm() < 1e-10);

        // The composite equals the direct three-factor build pointwise.
        let direct = WarpedDecomposition::build(
            InitialData::new(
                base.clone(),
                vec![
                    Subspace::coordinate_span(e4, &[0, 1]).unwrap(),
                    Subspace::coordinate_span(e4, &[3]).unwrap(),
                    Subspace::coordinate_span(e4, &[2]).unwrap(),
                ],
                vec![
                    vec64(e4, &[1.0, 0.0, 0.0, 0.0]),
                    vec64(e4, &[0.0, 1.0, 0.0, 0.0]),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let q_direct = direct.psi_forward(&p).unwrap();
        assert!((&q - &q_direct).euclid_norm() < 1e-10);

        // Inverse round trip through the composition.
        let back = bipolar.psi_inverse(&q).unwrap();
        for (a, b) in p.components().iter().zip(back.components()) {
            assert!((a - b).euclid_norm() < 1e-9);
        }

        // rho_1 is invariant under the inner map.
        let rho_direct = bipolar.rho(1, p.geodesic());
        let inner_img = inner
            .psi_forward(
                &WarpedPoint::new(vec![p.geodesic().clone(), p.spherical(2).clone()]).unwrap(),
            )
            .unwrap();
        let rho_after = bipolar.rho(1, &inner_img);
        assert!((rho_direct - rho_after).abs() < 1e-10);

        // Pushforward through the composition agrees with finite differences.
        let v0 = vec64(e4, &[0.3, -0.2, 0.0, 0.0]);
        let v1 = (&vec64(e4, &[-th.sin(), 0.0, 0.0, th.cos()])).scaled(0.7);
        let v2 = (&vec64(e4, &[0.0, -ph.sin(), ph.cos(), 0.0])).scaled(-0.5);
        let v = vec![v0.clone(), v1.clone(), v2.clone()];
        let push = bipolar.psi_pushforward(&p, &v).unwrap();
        let h = 1e-6;
        let eval = |s: f64| {
            let parts = vec![
                &p0 + &v0.scaled(s),
                bipolar.spherical_factor(1).curve_through(&p1, &v1, s),
                bipolar.spherical_factor(2).curve_through(&p2, &v2, s),
            ];
            bipolar.psi_forward(&WarpedPoint::new(parts).unwrap()).unwrap()
        };
        let fd = (&eval(h) - &eval(-h)).scaled(0.5 / h);
        assert!((&push - &fd).euclid_norm() < 1e-6);
        let lhs = push.norm_sq();
        let rhs = v0.norm_sq()
            + bipolar.rho(1, &p0).powi(2) * v1.norm_sq()
            + bipolar.rho(2, &p0).powi(2) * v2.norm_sq();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn compose_rejects_incompatible() {
        let e3 = Space::euclidean(3).unwrap();
        let outer = WarpedDecomposition::build(
            InitialData::new(
                vec64(e3, &[1.0, 0.0, 0.0]),
                vec![
                    Subspace::coordinate_span(e3, &[0, 1]).unwrap(),
                    Subspace::coordinate_span(e3, &[2]).unwrap(),
                ],
                vec![vec64(e3, &[1.0, 0.0, 0.0])],
            )
            .unwrap(),
        )
        .unwrap();
        // Inner decomposition of the wrong carrier (span{e1,e3}).
        let bad_inner = WarpedDecomposition::build(
            InitialData::new_full(
                Subspace::coordinate_span(e3, &[0, 2]).unwrap(),
                vec64(e3, &[1.0, 0.0, 0.0]),
                vec![
                    Subspace::coordinate_span(e3, &[0]).unwrap(),
                    Subspace::coordinate_span(e3, &[2]).unwrap(),
                ],
                vec![vec64(e3, &[1.0, 0.0, 0.0])],
                0.0,
                None,
            )
            .unwrap(),
        )
        .unwrap();
        assert!(matches!(
            WarpedDecomposition::compose(&outer, &bad_inner),
            Err(GeomError::IncompatibleComposition(_))
        ));
    }

    #[test]
    fn restrict_polar_to_circle_and_sphere() {
        // Spherical coordinates on E^3 restricted at p_bar with p_bar^2 = 1
        // give a warped chart on S^2.
        let e3 = Space::euclidean(3).unwrap();
        let outer = WarpedDecomposition::build(
            InitialData::new(
                vec64(e3, &[1.0, 0.0, 0.0]),
                vec![
                    Subspace::coordinate_span(e3, &[0, 1]).unwrap(),
                    Subspace::coordinate_span(e3, &[2]).unwrap(),
                ],
                vec![vec64(e3, &[1.0, 0.0, 0.0])],
            )
            .unwrap(),
        )
        .unwrap();
        let restricted = outer.restrict_to_quadric().unwrap();
        assert!((restricted.kappa() - 1.0).abs() < 1e-12);
        // Sample domain points on the circle N_0(1) in span{e1,e2}.
        for &t in &[0.0f64, 0.5, -0.9] {
            let p0 = vec64(e3, &[t.cos(), t.sin(), 0.0]);
            if !restricted.n0_contains(&p0, 1e-9) {
                continue;
            }
            let s = 0.4f64;
            let p1 = vec64(e3, &[s.cos(), 0.0, s.sin()]);
            let q = restricted
                .psi_forward(&WarpedPoint::new(vec![p0, p1]).unwrap())
                .unwrap();
            assert!((q.norm_sq() - 1.0).abs() < 1e-10);
            assert!(restricted.image_contains(&q, 1e-9));
        }

        // Null base point is rejected.
        let nw = null_seed();
        assert!(matches!(
            nw.restrict_to_quadric(),
            Err(GeomError::LightlikeBasePoint)
        ));
    }

    #[test]
    fn restriction_two_sheeted_cut() {
        // E^3_1, p_bar = e1 (timelike, kappa = -1), V_0 = span{e1,e2},
        // a = -e1 + sqrt(2) e2 spacelike with <a, p_bar> = 1.
        let m3 = Space::minkowski(3).unwrap();
        let s2 = 2.0f64.sqrt();
        let a = vec64(m3, &[-1.0, s2, 0.0]);
        let data = InitialData::new(
            vec64(m3, &[1.0, 0.0, 0.0]),
            vec![
                Subspace::coordinate_span(m3, &[0, 1]).unwrap(),
                Subspace::coordinate_span(m3, &[2]).unwrap(),
            ],
            vec![a.clone()],
        )
        .unwrap();
        let w = WarpedDecomposition::build(data).unwrap();
        let restricted = w.restrict_to_quadric().unwrap();
        assert!((restricted.kappa() + 1.0).abs() < 1e-12);
        assert!(restricted.is_two_sheeted());
        // Opposite-branch point with rho > 0: t = 2 on the lower sheet.
        let t = 2.0f64;
        let lower = vec64(m3, &[-t.cosh(), t.sinh(), 0.0]);
        assert!(w.rho(1, &lower) > 0.0, "rho must be positive for the test");
        assert!(!restricted.n0_contains(&lower, 1e-9));
        // Same-branch point passes.
        let upper = vec64(m3, &[t.cosh(), t.sinh(), 0.0]);
        if w.rho(1, &upper) > 0.0 {
            assert!(restricted.n0_contains(&upper, 1e-9));
        }
    }

    #[test]
    fn enumerate_type_examples() {
        assert_eq!(polar().enumerate_type().family, Family::Euclidean);

        let w = null_seed();
        let tag = w.enumerate_type();
        assert_eq!(tag.family, Family::MinkowskiLightlike);

        // Timelike a in E^3_1.
        let m3 = Space::minkowski(3).unwrap();
        let data = InitialData::new(
            vec64(m3, &[0.0, 1.0, 0.0]),
            vec![
                Subspace::coordinate_span(m3, &[0, 1]).unwrap(),
                Subspace::coordinate_span(m3, &[2]).unwrap(),
            ],
            vec![vec64(m3, &[-1.0, 0.0, 0.0])],
        )
        .unwrap();
        let w = WarpedDecomposition::build(data).unwrap();
        assert_eq!(w.enumerate_type().family, Family::MinkowskiTimelike);
    }

    #[test]
    fn product_obstruction_flat_is_vacuous() {
        let check = polar().product_obstruction();
        assert!(!check.applicable);
        assert!(check.holds);
    }

    #[test]
    fn product_obstruction_on_hyperbolic_restriction_holds() {
        // Timelike-a seed restricted to kappa < 0: warping stays non-constant.
        let m3 = Space::minkowski(3).unwrap();
        let w = WarpedDecomposition::build(
            InitialData::new(
                vec64(m3, &[1.0, 0.0, 0.0]),
                vec![
                    Subspace::coordinate_span(m3, &[0, 1]).unwrap(),
                    Subspace::coordinate_span(m3, &[2]).unwrap(),
                ],
                vec![vec64(m3, &[-1.0, 0.5, 0.0])],
            )
            .unwrap(),
        )
        .unwrap();
        let restricted = w.restrict_to_quadric().unwrap();
        assert!(restricted.kappa() < 0.0);
        let check = restricted.product_obstruction(50, 3);
        assert!(check.applicable);
        assert!(check.holds, "min gradient {}", check.min_gradient);
        assert!(check.min_gradient > 1e-6);
    }

    #[test]
    fn product_obstruction_on_sphere_holds() {
        let e3 = Space::euclidean(3).unwrap();
        let w = WarpedDecomposition::build(
            InitialData::new(
                vec64(e3, &[1.0, 0.0, 0.0]),
                vec![
                    Subspace::coordinate_span(e3, &[0, 1]).unwrap(),
                    Subspace::coordinate_span(e3, &[2]).unwrap(),
                ],
                vec![vec64(e3, &[1.0, 0.0, 0.0])],
            )
            .unwrap(),
        )
        .unwrap();
        let restricted = w.restrict_to_quadric().unwrap();
        let check = restricted.product_obstruction(50, 7);
        assert!(check.applicable);
        assert!(check.holds, "min gradient {}", check.min_gradient);
    }
}
