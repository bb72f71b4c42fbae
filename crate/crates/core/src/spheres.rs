//! Spherical submanifolds of `E^n_nu` determined by initial data
//! `(p_bar, V, a)`: a base point, a non-degenerate tangent subspace, and a
//! normal vector `a` whose negative is the mean curvature at the base point.
//!
//! The causal class of `a` decides the shape:
//!
//! * `a = 0` — an affine plane `p_bar + V`,
//! * `a` spacelike — a pseudo-sphere `c + { p in W : <p,p> = 1/kappa }`,
//! * `a` timelike — a pseudo-hyperbolic space (same set, `kappa < 0`),
//! * `a` lightlike — a paraboloid `p_bar + { v - (v^2/2) a : v in V }`,
//!
//! with `kappa = <a,a>`, `c = p_bar - a/kappa`, and the carrier `W` the
//! orthogonal sum of the line `R a` and `V`.

use crate::error::{GeomError, Result};
use crate::pseudo_linear::{perp_within, CausalClass, Space, Subspace, Vector};
use crate::scalar::{tol, Scalar};

/// Seed data `(p_bar, V, a)` for a spherical submanifold.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereInitialData<S> {
    base: Vector<S>,
    tangent: Subspace<S>,
    a: Vector<S>,
}

impl<S: Scalar> SphereInitialData<S> {
    pub fn new(base: Vector<S>, tangent: Subspace<S>, a: Vector<S>) -> Result<Self> {
        if tangent.dim() == 0 {
            return Err(GeomError::InvalidInitialData(
                "sphere tangent subspace must have dimension >= 1".into(),
            ));
        }
        if tangent.is_degenerate() {
            return Err(GeomError::DegenerateSubspace {
                operation: "sphere initial data",
            });
        }
        let scale = S::one() + a.euclid_norm();
        for v in tangent.basis() {
            if a.inner(v).abs() > S::lit(tol::CLASS) * scale * v.euclid_norm() {
                return Err(GeomError::NotOrthogonal {
                    context: "a must be orthogonal to the tangent subspace",
                });
            }
        }
        Ok(Self { base, tangent, a })
    }

    pub fn base(&self) -> &Vector<S> {
        &self.base
    }

    pub fn tangent(&self) -> &Subspace<S> {
        &self.tangent
    }

    pub fn a(&self) -> &Vector<S> {
        &self.a
    }

    /// Classify the initial data into the sphere it determines.
    pub fn classify(&self) -> Result<SphericalSubmanifold<S>> {
        classify_sphere(self)
    }
}

/// The four shapes a spherical submanifold of `E^n_nu` can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SphereKind {
    Plane,
    PseudoSphere,
    PseudoHyperbolic,
    Paraboloid,
}

impl std::fmt::Display for SphereKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SphereKind::Plane => "Plane",
            SphereKind::PseudoSphere => "PseudoSphere",
            SphereKind::PseudoHyperbolic => "PseudoHyperbolic",
            SphereKind::Paraboloid => "Paraboloid",
        };
        f.write_str(s)
    }
}

/// A classified spherical submanifold.
///
/// Construction is deterministic: equal initial data produce records equal
/// field by field.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSubmanifold<S> {
    kind: SphereKind,
    base: Vector<S>,
    tangent: Subspace<S>,
    a: Vector<S>,
    /// `c = p_bar - a/kappa`; only the two quadric kinds have a center.
    center: Option<Vector<S>>,
    /// Carrier: the orthogonal sum `R a + V` for quadrics, `V` otherwise.
    carrier: Subspace<S>,
    /// `kappa = <a,a>` (zero for planes and paraboloids).
    curvature: S,
    /// Orthonormal frame of `W` with the normalized radial direction first;
    /// drives the polar/hyperbolic chart. Quadrics only.
    frame: Vec<Vector<S>>,
    /// True when the quadric is anti-isometric to a Euclidean sphere and
    /// hence disconnected; membership then respects the half space
    /// `<a, p - c> > 0` containing the base point.
    disconnected: bool,
}

/// Classify `(p_bar, V, a)` into the unique spherical submanifold through
/// `p_bar` tangent to `V` with mean curvature `-a` there.
pub fn classify_sphere<S: Scalar>(data: &SphereInitialData<S>) -> Result<SphericalSubmanifold<S>> {
    let base = data.base.clone();
    let tangent = data.tangent.clone();
    let a = data.a.clone();
    let space = base.space();
    let (m, mu, _) = tangent.signature();
    match a.causal_class() {
        CausalClass::Zero => Ok(SphericalSubmanifold {
            kind: SphereKind::Plane,
            base,
            carrier: tangent.clone(),
            tangent,
            a: Vector::zero(space),
            center: None,
            curvature: S::zero(),
            frame: Vec::new(),
            disconnected: false,
        }),
        CausalClass::Lightlike => Ok(SphericalSubmanifold {
            kind: SphereKind::Paraboloid,
            base,
            carrier: tangent.clone(),
            tangent,
            a,
            center: None,
            curvature: S::zero(),
            frame: Vec::new(),
            disconnected: false,
        }),
        class => {
            let kappa = a.norm_sq();
            let kind = if class == CausalClass::Spacelike {
                SphereKind::PseudoSphere
            } else {
                SphereKind::PseudoHyperbolic
            };
            let center = &base - &a.scaled(S::one() / kappa);
            let mut carrier_basis = vec![a.clone()];
            carrier_basis.extend(tangent.basis().iter().cloned());
            let carrier = Subspace::span(space, carrier_basis)?;
            // Frame: unit radial direction first, then an orthonormal basis
            // of V. The radius direction is r_bar = p_bar - c = a/kappa.
            let radial = a.scaled(S::one() / kappa);
            let mut frame = vec![radial.scaled(S::one() / radial.norm())];
            frame.extend(tangent.orthonormal_basis()?);
            let disconnected = (kind == SphereKind::PseudoHyperbolic && mu == 0)
                || (kind == SphereKind::PseudoSphere && mu == m);
            Ok(SphericalSubmanifold {
                kind,
                base,
                tangent,
                a,
                center: Some(center),
                carrier,
                curvature: kappa,
                frame,
                disconnected,
            })
        }
    }
}

impl<S: Scalar> SphericalSubmanifold<S> {
    pub fn kind(&self) -> SphereKind {
        self.kind
    }

    pub fn space(&self) -> Space {
        self.base.space()
    }

    pub fn base(&self) -> &Vector<S> {
        &self.base
    }

    pub fn tangent_data(&self) -> &Subspace<S> {
        &self.tangent
    }

    pub fn a(&self) -> &Vector<S> {
        &self.a
    }

    pub fn center(&self) -> Option<&Vector<S>> {
        self.center.as_ref()
    }

    pub fn carrier(&self) -> &Subspace<S> {
        &self.carrier
    }

    /// Intrinsic curvature `kappa = <a,a>`; zero for planes and paraboloids.
    pub fn curvature(&self) -> S {
        self.curvature
    }

    pub fn dim(&self) -> usize {
        self.tangent.dim()
    }

    /// Intrinsic signature `(m, mu)`.
    pub fn intrinsic_signature(&self) -> (usize, usize) {
        (self.tangent.dim(), self.tangent.index())
    }

    /// Whether the full quadric is disconnected (anti-isometric to a
    /// Euclidean sphere); membership is then restricted to the component of
    /// the base point, the half space `<a, p - c> > 0`.
    pub fn is_disconnected(&self) -> bool {
        self.disconnected
    }

    /// Mean curvature at the base point: `z = -a`.
    pub fn mean_curvature_at_base(&self) -> Vector<S> {
        -&self.a
    }

    /// Membership test at relative tolerance `tol_rel`.
    pub fn contains(&self, p: &Vector<S>, tol_rel: f64) -> bool {
        let t = S::lit(tol_rel);
        match self.kind {
            SphereKind::Plane => {
                let d = p - &self.base;
                let scale = S::one() + d.euclid_norm();
                self.tangent
                    .projection_residual(&d)
                    .map(|r| r <= t * scale)
                    .unwrap_or(false)
            }
            SphereKind::Paraboloid => {
                let d = p - &self.base;
                let scale = S::one() + d.euclid_norm();
                let Ok(v) = self.tangent.project(&d) else {
                    return false;
                };
                let rec = self.point_from_graph(&v);
                (p - &rec).euclid_norm() <= t * scale
            }
            _ => {
                let c = self.center.as_ref().expect("quadric has a center");
                let r = p - c;
                let scale = S::one() + r.euclid_norm_sq();
                let Ok(res) = self.carrier.projection_residual(&r) else {
                    return false;
                };
                if res > t * (S::one() + r.euclid_norm()) {
                    return false;
                }
                if (r.norm_sq() - S::one() / self.curvature).abs() > t * scale {
                    return false;
                }
                if self.disconnected && self.a.inner(&r) <= S::zero() {
                    return false;
                }
                true
            }
        }
    }

    /// Membership ignoring the connected-component restriction.
    pub fn contains_any_component(&self, p: &Vector<S>, tol_rel: f64) -> bool {
        if !self.disconnected {
            return self.contains(p, tol_rel);
        }
        let mut other = self.clone();
        other.disconnected = false;
        other.contains(p, tol_rel)
    }

    /// Paraboloid graph map `v -> p_bar + v - (v^2/2) a` for `v in V`.
    pub fn point_from_graph(&self, v: &Vector<S>) -> Vector<S> {
        let quad = self.a.scaled(v.norm_sq() / S::lit(2.0));
        &(&self.base + v) - &quad
    }

    /// Chart evaluation at coordinates `u` (length `dim`).
    ///
    /// * Plane: `p_bar + sum u_i v_i` over the stored basis of `V`.
    /// * Paraboloid: graph chart over the same basis (a global isometry).
    /// * Quadrics: iterated polar chart from the orthonormal frame of `W`,
    ///   trigonometric on equal-sign pairs and hyperbolic on mixed pairs,
    ///   centered so `u = 0` lands on the base point.
    pub fn parametrize(&self, u: &[S]) -> Result<Vector<S>> {
        if u.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::OutOfChartDomain(
                "chart coordinates must be finite".into(),
            ));
        }
        match self.kind {
            SphereKind::Plane => {
                let mut p = self.base.clone();
                for (c, v) in u.iter().zip(self.tangent.basis()) {
                    p = &p + &v.scaled(*c);
                }
                Ok(p)
            }
            SphereKind::Paraboloid => {
                let mut v = Vector::zero(self.space());
                for (c, b) in u.iter().zip(self.tangent.basis()) {
                    v = &v + &b.scaled(*c);
                }
                Ok(self.point_from_graph(&v))
            }
            _ => {
                let c = self.center.as_ref().expect("quadric has a center");
                let radius = (S::one() / self.curvature).abs().sqrt();
                let m = self.frame.len();
                let mut psi = self.frame[m - 1].clone();
                for i in (0..m - 1).rev() {
                    let eps_axis = self.frame[i].norm_sq();
                    let eps_rest = psi.norm_sq();
                    let angle = u[i];
                    psi = if (eps_axis - eps_rest).abs() < S::lit(0.5) {
                        &self.frame[i].scaled(angle.cos()) + &psi.scaled(angle.sin())
                    } else {
                        &self.frame[i].scaled(angle.cosh()) + &psi.scaled(angle.sinh())
                    };
                }
                Ok(c + &psi.scaled(radius))
            }
        }
    }

    /// Tangent space at a point of the submanifold.
    pub fn tangent_at(&self, p: &Vector<S>) -> Result<Subspace<S>> {
        self.require_membership(p)?;
        match self.kind {
            SphereKind::Plane => Ok(self.tangent.clone()),
            SphereKind::Paraboloid => {
                let x = self.tangent.project(&(p - &self.base))?;
                let basis = self
                    .tangent
                    .basis()
                    .iter()
                    .map(|v| v - &self.a.scaled(v.inner(&x)))
                    .collect();
                Subspace::span(self.space(), basis)
            }
            _ => {
                let c = self.center.as_ref().expect("quadric has a center");
                let r = p - c;
                perp_within(&[r], &self.carrier)
            }
        }
    }

    fn require_membership(&self, p: &Vector<S>) -> Result<()> {
        if !self.contains(p, tol::MEMBERSHIP * 1e3) {
            return Err(GeomError::OutOfDomain(format!(
                "point is not on the {} submanifold",
                self.kind
            )));
        }
        Ok(())
    }

    /// Mean curvature normal at `p`: `0` on planes, `-(p-c)/<p-c,p-c>` on
    /// quadrics, the constant `-a` on paraboloids.
    pub fn mean_curvature(&self, p: &Vector<S>) -> Result<Vector<S>> {
        self.require_membership(p)?;
        match self.kind {
            SphereKind::Plane => Ok(Vector::zero(self.space())),
            SphereKind::Paraboloid => Ok(-&self.a),
            _ => {
                let c = self.center.as_ref().expect("quadric has a center");
                let r = p - c;
                Ok(r.scaled(-S::one() / r.norm_sq()))
            }
        }
    }

    /// Geodesic through `p` with initial velocity `v`, evaluated at parameter
    /// `t`. Closed form:
    ///
    /// * plane: the straight line `p + t v`,
    /// * paraboloid: the graph image of a straight line,
    /// * quadrics: `c + cos_k(w t) r + sin_k(w t) v / w` with
    ///   `w = sqrt(|kappa <v,v>|)`, trigonometric when `kappa <v,v> > 0` and
    ///   hyperbolic otherwise. Null `v` is rejected.
    pub fn geodesic(&self, p: &Vector<S>, v: &Vector<S>, t: S) -> Result<Vector<S>> {
        self.require_membership(p)?;
        let tangent_space = self.tangent_at(p)?;
        let residual = tangent_space.projection_residual(v)?;
        if residual > S::lit(1e-7) * (S::one() + v.euclid_norm()) {
            return Err(GeomError::NotTangent { factor: 0 });
        }
        match self.kind {
            SphereKind::Plane => Ok(p + &v.scaled(t)),
            SphereKind::Paraboloid => {
                let x = self.tangent.project(&(p - &self.base))?;
                let w = self.tangent.project(v)?;
                Ok(self.point_from_graph(&(&x + &w.scaled(t))))
            }
            _ => {
                let vsq = v.norm_sq();
                if vsq.abs() <= S::lit(tol::CLASS) * v.euclid_norm_sq() {
                    return Err(GeomError::NullVector {
                        context: "closed-form quadric geodesic",
                    });
                }
                let c = self.center.as_ref().expect("quadric has a center");
                let r = p - c;
                let alpha = self.curvature * vsq;
                let omega = alpha.abs().sqrt();
                let (cos_t, sin_t) = if alpha > S::zero() {
                    ((omega * t).cos(), (omega * t).sin())
                } else {
                    ((omega * t).cosh(), (omega * t).sinh())
                };
                Ok(&(c + &r.scaled(cos_t)) + &v.scaled(sin_t / omega))
            }
        }
    }

    /// A curve on the submanifold with `gamma(0) = p`, `gamma'(0) = v`, valid
    /// for small `s` and any tangent `v` (null included). Used for
    /// finite-difference probes.
    pub fn curve_through(&self, p: &Vector<S>, v: &Vector<S>, s: S) -> Vector<S> {
        match self.kind {
            SphereKind::Plane => p + &v.scaled(s),
            SphereKind::Paraboloid => {
                let x = self
                    .tangent
                    .project(&(p - &self.base))
                    .expect("paraboloid tangent is non-degenerate");
                let w = self
                    .tangent
                    .project(v)
                    .expect("paraboloid tangent is non-degenerate");
                self.point_from_graph(&(&x + &w.scaled(s)))
            }
            _ => {
                // Renormalized chord: works for null tangents too.
                let c = self.center.as_ref().expect("quadric has a center");
                let r = p - c;
                let x = &r + &v.scaled(s);
                let lambda = (S::one() + s * s * self.curvature * v.norm_sq())
                    .abs()
                    .sqrt();
                c + &x.scaled(S::one() / lambda)
            }
        }
    }
}
