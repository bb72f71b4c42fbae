//! The isometry group of the paraboloid model and lifts of factor
//! isometries through warped product decompositions.
//!
//! `P^n_nu` sits inside `E^{n+2}_{nu+1}` as the lightlike slice
//! `{ q : <q,q> = 0, <q,a> = 1 }` for a lightlike `a`; choosing a lightlike
//! `b` with `<a,b> = 1` and `V = span{a,b}^perp ~ E^n_nu` gives the global
//! chart `psi(x) = b + x - (x^2/2) a`. Every isometry of the model arises
//! from a pair `(B, v)` in `O(V) x| V` through
//!
//! ```text
//! phi(B,v)(p + p~) = p~ + B p + <a,p~> v - (<B p, v> + <a,p~> v^2 / 2) a
//! ```
//!
//! (`p` the `V`-component, `p~` the rest), a linear map of the ambient space
//! that preserves the form and fixes `a`.

use crate::error::{GeomError, Result};
use crate::pseudo_linear::{CausalClass, LinearMap, Space, Subspace, Vector};
use crate::scalar::{tol, Scalar};
use crate::spheres::SphereKind;
use crate::warp::{WarpedDecomposition, WarpedPoint};

/// Embedding data for the paraboloid model `P^n_nu` in `E^{n+2}_{nu+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaboloidEmbedding<S> {
    ambient: Space,
    model: Space,
    a: Vector<S>,
    b: Vector<S>,
    v_subspace: Subspace<S>,
    /// Orthonormal basis of `V` ordered timelike first, so model coordinates
    /// carry the standard `E^n_nu` form.
    frame: Vec<Vector<S>>,
}

impl<S: Scalar> ParaboloidEmbedding<S> {
    /// The standard embedding of `E^n_nu`: ambient `E^{n+2}_{nu+1}` with
    /// `a = e_1 + e_{n+2}`, `b = (e_{n+2} - e_1)/2` and
    /// `V = span{e_2, ..., e_{n+1}}`.
    pub fn standard(model: Space) -> Result<Self> {
        let ambient = Space::new(model.dim() + 2, model.index() + 1)?;
        let n = ambient.dim();
        let mut a = Vector::zero(ambient);
        let mut b = Vector::zero(ambient);
        a = &a + &Vector::basis(ambient, 0);
        a = &a + &Vector::basis(ambient, n - 1);
        b = &b + &(&Vector::basis(ambient, n - 1) - &Vector::basis(ambient, 0)).scaled(S::lit(0.5));
        Self::new(ambient, a, b)
    }

    /// Embedding from an explicit lightlike pair with `<a,b> = 1`.
    pub fn new(ambient: Space, a: Vector<S>, b: Vector<S>) -> Result<Self> {
        if ambient.index() == 0 {
            return Err(GeomError::InvalidSpace {
                dim: ambient.dim(),
                index: ambient.index(),
            });
        }
        if a.causal_class() != CausalClass::Lightlike {
            return Err(GeomError::NotLightlike {
                context: "paraboloid direction a",
            });
        }
        if b.causal_class() != CausalClass::Lightlike {
            return Err(GeomError::NotLightlike {
                context: "paraboloid partner b",
            });
        }
        let pairing = a.inner(&b);
        if (pairing - S::one()).abs() > S::lit(tol::MEMBERSHIP) * (S::one() + b.euclid_norm()) {
            return Err(GeomError::InvalidInitialData(format!(
                "paraboloid pair must satisfy <a,b> = 1, got {pairing}"
            )));
        }
        let plane = Subspace::span(ambient, vec![a.clone(), b.clone()])?;
        let v_subspace = plane.orthogonal_complement()?;
        let mut frame = v_subspace.orthonormal_basis()?;
        frame.sort_by(|u, w| {
            u.norm_sq()
                .partial_cmp(&w.norm_sq())
                .expect("finite norms")
        });
        let model = Space::new(
            v_subspace.dim(),
            frame.iter().filter(|u| u.norm_sq() < S::zero()).count(),
        )?;
        if model.index() != ambient.index() - 1 {
            return Err(GeomError::InvalidInitialData(
                "span{a,b}^perp does not have the expected signature".into(),
            ));
        }
        Ok(Self {
            ambient,
            model,
            a,
            b,
            v_subspace,
            frame,
        })
    }

    pub fn ambient(&self) -> Space {
        self.ambient
    }

    /// The model space `E^n_nu`.
    pub fn model(&self) -> Space {
        self.model
    }

    pub fn a(&self) -> &Vector<S> {
        &self.a
    }

    pub fn b(&self) -> &Vector<S> {
        &self.b
    }

    pub fn v_subspace(&self) -> &Subspace<S> {
        &self.v_subspace
    }

    /// Model coordinates to the ambient vector in `V`.
    pub fn lift(&self, x: &Vector<S>) -> Vector<S> {
        assert_eq!(x.space(), self.model, "model-space vector expected");
        let mut out = Vector::zero(self.ambient);
        for (c, u) in x.coords().iter().zip(&self.frame) {
            out = &out + &u.scaled(*c);
        }
        out
    }

    /// Ambient vector in `V` back to model coordinates.
    pub fn drop(&self, p: &Vector<S>) -> Vector<S> {
        let coords: Vec<S> = self
            .frame
            .iter()
            .map(|u| p.inner(u) / u.norm_sq())
            .collect();
        Vector::new(self.model, coords).expect("frame has model dimension")
    }

    /// The global chart `psi(x) = b + x - (x^2/2) a` of the paraboloid.
    pub fn embed(&self, x: &Vector<S>) -> Vector<S> {
        let lifted = self.lift(x);
        let quad = self.a.scaled(x.norm_sq() / S::lit(2.0));
        &(&self.b + &lifted) - &quad
    }
}

/// An isometry `phi(B, v)` of the paraboloid model: a pseudo-orthogonal map
/// `B` of the model space and a translation `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaboloidIsometry<S> {
    embedding: ParaboloidEmbedding<S>,
    rotation: LinearMap<S>,
    translation: Vector<S>,
}

impl<S: Scalar> ParaboloidIsometry<S> {
    pub fn new(
        embedding: ParaboloidEmbedding<S>,
        rotation: LinearMap<S>,
        translation: Vector<S>,
    ) -> Result<Self> {
        if rotation.space() != embedding.model() || translation.space() != embedding.model() {
            return Err(GeomError::SpaceMismatch {
                dim_a: embedding.model().dim(),
                idx_a: embedding.model().index(),
                dim_b: rotation.space().dim(),
                idx_b: rotation.space().index(),
            });
        }
        let defect = rotation.metric_defect();
        if defect > S::lit(tol::MEMBERSHIP) {
            return Err(GeomError::NotIsometry {
                context: "B is not pseudo-orthogonal on the model space",
                defect: defect.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            embedding,
            rotation,
            translation,
        })
    }

    /// The identity isometry.
    pub fn identity(embedding: ParaboloidEmbedding<S>) -> Self {
        let model = embedding.model();
        Self {
            embedding,
            rotation: LinearMap::identity(model),
            translation: Vector::zero(model),
        }
    }

    /// Pure translation `phi(I, v)`.
    pub fn translation(embedding: ParaboloidEmbedding<S>, v: Vector<S>) -> Result<Self> {
        let id = LinearMap::identity(embedding.model());
        Self::new(embedding, id, v)
    }

    pub fn embedding(&self) -> &ParaboloidEmbedding<S> {
        &self.embedding
    }

    pub fn rotation(&self) -> &LinearMap<S> {
        &self.rotation
    }

    pub fn translation_vector(&self) -> &Vector<S> {
        &self.translation
    }

    /// Apply on the model: `x -> B x + v`.
    pub fn apply_model(&self, x: &Vector<S>) -> Vector<S> {
        &self.rotation.apply(x) + &self.translation
    }

    /// Realize the ambient linear map of `E^{n+2}_{nu+1}`. It preserves the
    /// ambient form and fixes `a`.
    pub fn realize(&self) -> Result<LinearMap<S>> {
        let ambient = self.embedding.ambient();
        let n = ambient.dim();
        let mut rows = vec![vec![S::zero(); n]; n];
        for j in 0..n {
            let col = self.apply_ambient(&Vector::basis(ambient, j))?;
            for (i, row) in rows.iter_mut().enumerate() {
                row[j] = col.coord(i);
            }
        }
        LinearMap::from_rows(ambient, &rows)
    }

    /// Apply the realized map to one ambient vector without materializing
    /// the matrix.
    pub fn apply_ambient(&self, x: &Vector<S>) -> Result<Vector<S>> {
        let emb = &self.embedding;
        let p = emb.v_subspace().project(x)?;
        let p_rest = x - &p;
        let rotated = emb.lift(&self.rotation.apply(&emb.drop(&p)));
        let v_amb = emb.lift(&self.translation);
        let alpha = emb.a().inner(&p_rest);
        let vsq = self.translation.norm_sq();
        let a_coeff = rotated.inner(&v_amb) + alpha * vsq / S::lit(2.0);
        let mut out = &p_rest + &rotated;
        out = &out + &v_amb.scaled(alpha);
        out = &out - &emb.a().scaled(a_coeff);
        Ok(out)
    }

    /// Group law: `phi(B1,v1) . phi(B2,v2) = phi(B1 B2, v1 + B1 v2)`.
    pub fn compose(&self, other: &ParaboloidIsometry<S>) -> Result<ParaboloidIsometry<S>> {
        if self.embedding != other.embedding {
            return Err(GeomError::EmbeddingMismatch);
        }
        Ok(ParaboloidIsometry {
            embedding: self.embedding.clone(),
            rotation: self.rotation.compose(&other.rotation),
            translation: &self.translation + &self.rotation.apply(&other.translation),
        })
    }

    /// Decode `(B, v)` from the realized map of a group element:
    /// `B = P T|_V`, `v = P T b`. Only well conditioned on-group.
    pub fn decode(
        embedding: &ParaboloidEmbedding<S>,
        map: &LinearMap<S>,
    ) -> Result<(LinearMap<S>, Vector<S>)> {
        let model = embedding.model();
        let m = model.dim();
        let mut rows = vec![vec![S::zero(); m]; m];
        for j in 0..m {
            let unit = Vector::basis(model, j);
            let image = map.apply(&embedding.lift(&unit));
            let dropped = embedding.drop(&embedding.v_subspace().project(&image)?);
            for (i, row) in rows.iter_mut().enumerate() {
                row[j] = dropped.coord(i);
            }
        }
        let rotation = LinearMap::from_rows(model, &rows)?;
        let tb = map.apply(embedding.b());
        let translation = embedding.drop(&embedding.v_subspace().project(&tb)?);
        Ok((rotation, translation))
    }
}

/// Max equivariance defect `||psi(T x) - T^ psi(x)||` over model samples.
pub fn check_equivariance<S: Scalar>(
    iso: &ParaboloidIsometry<S>,
    samples: &[Vector<S>],
) -> Result<S> {
    let realized = iso.realize()?;
    let mut worst = S::zero();
    for x in samples {
        let lhs = iso.embedding().embed(&iso.apply_model(x));
        let rhs = realized.apply(&iso.embedding().embed(x));
        worst = worst.max((&lhs - &rhs).euclid_norm());
    }
    Ok(worst)
}

/// An isometry of one spherical factor of a warped product decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorIsometry<S> {
    /// A pseudo-orthogonal map of the factor carrier `W_i` acting about the
    /// center `c_i` (quadric factors).
    QuadricMap { map: LinearMap<S> },
    /// A translation of the graph coordinates of a paraboloid factor.
    ParaboloidTranslation { translation: Vector<S> },
}

/// A factor isometry lifted through the decomposition:
/// `q -> psi(p_0, ..., f(p_i), ..., p_k)` at `(p_0,...,p_k) = psi^{-1}(q)`.
#[derive(Debug, Clone)]
pub struct LiftedIsometry<S> {
    decomposition: WarpedDecomposition<S>,
    index: usize,
    action: FactorIsometry<S>,
}

/// Validate and lift an isometry of factor `i` (1-based).
pub fn lift_factor_isometry<S: Scalar>(
    decomposition: &WarpedDecomposition<S>,
    index: usize,
    action: FactorIsometry<S>,
) -> Result<LiftedIsometry<S>> {
    if index == 0 || index > decomposition.spherical_count() {
        return Err(GeomError::InvalidInitialData(format!(
            "factor index {index} out of range"
        )));
    }
    let factor = decomposition.spherical_factor(index);
    match &action {
        FactorIsometry::QuadricMap { map } => {
            if !matches!(
                factor.kind(),
                SphereKind::PseudoSphere | SphereKind::PseudoHyperbolic
            ) {
                return Err(GeomError::InvalidInitialData(
                    "quadric factor map applied to a non-quadric factor".into(),
                ));
            }
            let defect = map.metric_defect();
            if defect > S::lit(tol::MEMBERSHIP) {
                return Err(GeomError::NotIsometry {
                    context: "factor map does not preserve the ambient form",
                    defect: defect.to_f64().unwrap_or(f64::NAN),
                });
            }
            for u in factor.carrier().basis() {
                if !factor.carrier().contains_vector(&map.apply(u), tol::CLASS * 1e2) {
                    return Err(GeomError::NotIsometry {
                        context: "factor map does not preserve the carrier subspace",
                        defect: f64::NAN,
                    });
                }
            }
        }
        FactorIsometry::ParaboloidTranslation { translation } => {
            if factor.kind() != SphereKind::Paraboloid {
                return Err(GeomError::InvalidInitialData(
                    "paraboloid translation applied to a non-paraboloid factor".into(),
                ));
            }
            if !factor
                .tangent_data()
                .contains_vector(translation, tol::CLASS * 1e2)
            {
                return Err(GeomError::InvalidInitialData(
                    "paraboloid translation must lie in the factor subspace V_i".into(),
                ));
            }
        }
    }
    Ok(LiftedIsometry {
        decomposition: decomposition.clone(),
        index,
        action,
    })
}

impl<S: Scalar> LiftedIsometry<S> {
    pub fn decomposition(&self) -> &WarpedDecomposition<S> {
        &self.decomposition
    }

    pub fn factor_index(&self) -> usize {
        self.index
    }

    /// Apply to an ambient point of the decomposition image.
    pub fn apply(&self, q: &Vector<S>) -> Result<Vector<S>> {
        let p = self.decomposition.psi_inverse(q)?;
        let factor = self.decomposition.spherical_factor(self.index);
        let pi = p.spherical(self.index);
        let moved = match &self.action {
            FactorIsometry::QuadricMap { map } => {
                let c = factor.center().expect("quadric factor has a center");
                c + &map.apply(&(pi - c))
            }
            FactorIsometry::ParaboloidTranslation { translation } => {
                let x = factor.tangent_data().project(&(pi - factor.base()))?;
                factor.point_from_graph(&(&x + translation))
            }
        };
        let mut components = p.components().to_vec();
        components[self.index] = moved;
        self.decomposition.psi_forward(&WarpedPoint::new(components)?)
    }
}
