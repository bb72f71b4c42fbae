//! Circles in flat pseudo-Euclidean space.
//!
//! A circle is a unit-speed curve satisfying the third-order equation
//!
//! ```text
//! gamma''' = -<gamma'', gamma''> <gamma', gamma'> gamma'
//! ```
//!
//! With `X = gamma'` and `Y = gamma''`, both `<X,X>` and `<Y,Y>` are
//! conserved and `<X,Y> = 0` along solutions, which classifies circles by
//! the causal class of `Y`: geodesics (`Y = 0`), proper circles
//! (`<Y,Y> != 0`) and null circles (`Y != 0` lightlike, where the equation
//! degenerates to `gamma''' = 0`).

use crate::error::{GeomError, Result};
use crate::pseudo_linear::{CausalClass, Vector};
use crate::scalar::{tol, Scalar};
use crate::spheres::SphericalSubmanifold;

/// Classification of a circle by its acceleration vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircleClass {
    Geodesic,
    Proper,
    NullCircle,
}

impl std::fmt::Display for CircleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CircleClass::Geodesic => "geodesic",
            CircleClass::Proper => "proper",
            CircleClass::NullCircle => "null_circle",
        };
        f.write_str(s)
    }
}

/// Initial data for a circle: a point, a unit velocity `X`, and an
/// acceleration `Y` orthogonal to `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleState<S> {
    position: Vector<S>,
    velocity: Vector<S>,
    acceleration: Vector<S>,
    class: CircleClass,
    curvature: S,
}

impl<S: Scalar> CircleState<S> {
    pub fn new(position: Vector<S>, velocity: Vector<S>, acceleration: Vector<S>) -> Result<Self> {
        let speed = velocity.norm_sq();
        if (speed.abs() - S::one()).abs() > S::lit(tol::MEMBERSHIP) {
            return Err(GeomError::InvalidCircleState(format!(
                "velocity must be unit (<X,X> = +-1), got <X,X> = {speed}"
            )));
        }
        let pairing = velocity.inner(&acceleration);
        let scale = S::one() + acceleration.euclid_norm();
        if pairing.abs() > S::lit(tol::MEMBERSHIP) * scale {
            return Err(GeomError::InvalidCircleState(format!(
                "acceleration must be orthogonal to the velocity, got <X,Y> = {pairing}"
            )));
        }
        let class = match acceleration.causal_class() {
            CausalClass::Zero => CircleClass::Geodesic,
            CausalClass::Lightlike => CircleClass::NullCircle,
            _ => CircleClass::Proper,
        };
        let curvature = acceleration.norm();
        Ok(Self {
            position,
            velocity,
            acceleration,
            class,
            curvature,
        })
    }

    pub fn position(&self) -> &Vector<S> {
        &self.position
    }

    pub fn velocity(&self) -> &Vector<S> {
        &self.velocity
    }

    pub fn acceleration(&self) -> &Vector<S> {
        &self.acceleration
    }

    pub fn class(&self) -> CircleClass {
        self.class
    }

    /// Circle curvature `k = ||Y||`.
    pub fn curvature(&self) -> S {
        self.curvature
    }
}

/// Closed form of a proper circle.
///
/// Writing `eps0 = sgn <X,X>`, `eps1 = sgn <Y,Y>`, `k = ||Y||` and
/// `Yb = Y/k`, the center is fixed by the initial conditions
/// `gamma(0) = p`, `gamma'(0) = X`, `gamma''(0) = k Yb`, which gives
/// `c = p + eps0 eps1 Yb / k` and
///
/// * `eps0 eps1 = +1` (Euclidean type):
///   `gamma(t) = c + (sin(kt) X - cos(kt) Yb)/k`,
/// * `eps0 eps1 = -1` (hyperbolic and de Sitter types):
///   `gamma(t) = c + (sinh(kt) X + cosh(kt) Yb)/k`.
pub fn circle_closed_form<S: Scalar>(state: &CircleState<S>, t: S) -> Result<Vector<S>> {
    if state.class != CircleClass::Proper {
        return Err(GeomError::NotProperCircle {
            class: match state.class {
                CircleClass::Geodesic => "geodesic",
                CircleClass::NullCircle => "null_circle",
                CircleClass::Proper => unreachable!(),
            },
        });
    }
    let k = state.curvature;
    let yb = state.acceleration.scaled(S::one() / k);
    let eps0 = if state.velocity.norm_sq() > S::zero() {
        S::one()
    } else {
        -S::one()
    };
    let eps1 = if state.acceleration.norm_sq() > S::zero() {
        S::one()
    } else {
        -S::one()
    };
    let orient = eps0 * eps1;
    let c = &state.position + &yb.scaled(orient / k);
    let kt = k * t;
    if orient > S::zero() {
        let swing = &state.velocity.scaled(kt.sin()) - &yb.scaled(kt.cos());
        Ok(&c + &swing.scaled(S::one() / k))
    } else {
        let swing = &state.velocity.scaled(kt.sinh()) + &yb.scaled(kt.cosh());
        Ok(&c + &swing.scaled(S::one() / k))
    }
}

/// Closed-form trajectory for any class: straight line for geodesics,
/// `p + tX + t^2 Y / 2` for null circles, [`circle_closed_form`] otherwise.
pub fn trajectory_closed_form<S: Scalar>(state: &CircleState<S>, t: S) -> Vector<S> {
    match state.class {
        CircleClass::Geodesic => &state.position + &state.velocity.scaled(t),
        CircleClass::NullCircle => {
            let quad = state.acceleration.scaled(t * t / S::lit(2.0));
            &(&state.position + &state.velocity.scaled(t)) + &quad
        }
        CircleClass::Proper => circle_closed_form(state, t).expect("proper state"),
    }
}

/// One sampled state of an integrated circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSample<S> {
    pub t: S,
    pub position: Vector<S>,
    pub velocity: Vector<S>,
    pub acceleration: Vector<S>,
}

/// Closed-form state `(gamma, gamma', gamma'')` at `t` for any class.
pub fn closed_form_state<S: Scalar>(state: &CircleState<S>, t: S) -> CircleSample<S> {
    match state.class {
        CircleClass::Geodesic => CircleSample {
            t,
            position: trajectory_closed_form(state, t),
            velocity: state.velocity.clone(),
            acceleration: Vector::zero(state.position.space()),
        },
        CircleClass::NullCircle => CircleSample {
            t,
            position: trajectory_closed_form(state, t),
            velocity: &state.velocity + &state.acceleration.scaled(t),
            acceleration: state.acceleration.clone(),
        },
        CircleClass::Proper => {
            let k = state.curvature;
            let yb = state.acceleration.scaled(S::one() / k);
            let orient = if state.velocity.norm_sq() * state.acceleration.norm_sq() > S::zero() {
                S::one()
            } else {
                -S::one()
            };
            let kt = k * t;
            let (velocity, acceleration) = if orient > S::zero() {
                (
                    &state.velocity.scaled(kt.cos()) + &yb.scaled(kt.sin()),
                    (&state.velocity.scaled(-kt.sin()) + &yb.scaled(kt.cos())).scaled(k),
                )
            } else {
                (
                    &state.velocity.scaled(kt.cosh()) + &yb.scaled(kt.sinh()),
                    (&state.velocity.scaled(kt.sinh()) + &yb.scaled(kt.cosh())).scaled(k),
                )
            };
            CircleSample {
                t,
                position: trajectory_closed_form(state, t),
                velocity,
                acceleration,
            }
        }
    }
}

/// Classical fixed-step RK4 integration of the first-order system
/// `p' = X`, `X' = Y`, `Y' = -<Y,Y><X,X> X`.
///
/// The input state is taken at `t_grid[0]` and one RK4 step is taken per
/// grid interval, so the grid spacing is the step size. The grid must be
/// strictly monotone. Fully deterministic: equal inputs give bitwise equal
/// trajectories.
pub fn circle_integrate<S: Scalar>(
    state: &CircleState<S>,
    t_grid: &[S],
) -> Result<Vec<CircleSample<S>>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    let increasing = t_grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = t_grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(GeomError::OutOfDomain(
            "integration grid must be strictly monotone".into(),
        ));
    }
    let mut out = Vec::with_capacity(t_grid.len());
    let mut p = state.position.clone();
    let mut x = state.velocity.clone();
    let mut y = state.acceleration.clone();
    out.push(CircleSample {
        t: t_grid[0],
        position: p.clone(),
        velocity: x.clone(),
        acceleration: y.clone(),
    });
    let two = S::lit(2.0);
    let six = S::lit(6.0);
    let f = |x_: &Vector<S>, y_: &Vector<S>| {
        let coef = -(y_.norm_sq() * x_.norm_sq());
        (x_.clone(), y_.clone(), x_.scaled(coef))
    };
    for w in t_grid.windows(2) {
        let h = w[1] - w[0];
        let (k1p, k1x, k1y) = f(&x, &y);
        let (k2p, k2x, k2y) = f(&(&x + &k1x.scaled(h / two)), &(&y + &k1y.scaled(h / two)));
        let (k3p, k3x, k3y) = f(&(&x + &k2x.scaled(h / two)), &(&y + &k2y.scaled(h / two)));
        let (k4p, k4x, k4y) = f(&(&x + &k3x.scaled(h)), &(&y + &k3y.scaled(h)));
        let comb = |k1: &Vector<S>, k2: &Vector<S>, k3: &Vector<S>, k4: &Vector<S>| {
            (&(&(k1 + &k2.scaled(two)) + &k3.scaled(two)) + k4).scaled(h / six)
        };
        p = &p + &comb(&k1p, &k2p, &k3p, &k4p);
        x = &x + &comb(&k1x, &k2x, &k3x, &k4x);
        y = &y + &comb(&k1y, &k2y, &k3y, &k4y);
        out.push(CircleSample {
            t: w[1],
            position: p.clone(),
            velocity: x.clone(),
            acceleration: y.clone(),
        });
    }
    Ok(out)
}

/// Default base step for [`circle_residual`].
///
/// The third derivative of a sampled curve carries rounding noise of order
/// `eps |gamma| / h^3`, and the `<d2,d2><d1,d1> d1` term amplifies sample
/// noise by `|gamma'|^2`; on hyperbolic-type circles the curve grows like
/// `cosh(k t)`, so small steps drown the defect in noise. Richardson
/// extrapolation over steps `h, 2h, 4h, 8h` keeps the truncation error of
/// order `h^8` and lets the step stay large; `0.08` puts the measured noise
/// floor near `1e-6` for curvatures up to 1 over `t in [0, 2 pi]`.
pub const RESIDUAL_STEP: f64 = 0.08;

/// Magnitude of the circle-equation defect
/// `gamma''' + <gamma'',gamma''><gamma',gamma'> gamma'` at `t`.
///
/// Derivatives are central differences of the base-shifted samples
/// `gamma(t + s) - gamma(t)`, Richardson-extrapolated over the steps
/// `h, 2h, 4h, 8h` (the curve is sampled on `|s| <= 16 h`).
pub fn circle_residual<S: Scalar>(gamma: impl Fn(S) -> Vector<S>, t: S, h: S) -> S {
    let two = S::lit(2.0);
    let base = gamma(t);
    let stencil = |h: S| {
        let g = |s: S| &gamma(t + s) - &base;
        let p2 = g(two * h);
        let p1 = g(h);
        let m1 = g(-h);
        let m2 = g(-two * h);
        let d1 = (&p1 - &m1).scaled(S::one() / (two * h));
        let d2 = (&p1 + &m1).scaled(S::one() / (h * h)); // g(0) = 0
        let d3 = (&(&p2 - &p1.scaled(two)) + &(&m1.scaled(two) - &m2))
            .scaled(S::one() / (two * h * h * h));
        [d1, d2, d3]
    };
    let table = [
        stencil(h),
        stencil(two * h),
        stencil(S::lit(4.0) * h),
        stencil(S::lit(8.0) * h),
    ];
    // Richardson ladder removing the h^2, h^4, h^6 error terms of each
    // derivative (step doubles between columns).
    let extrapolate = |idx: usize| {
        let mut column: Vec<Vector<S>> = table.iter().map(|row| row[idx].clone()).collect();
        let mut factor = S::lit(4.0);
        while column.len() > 1 {
            column = column
                .windows(2)
                .map(|w| (&w[0].scaled(factor) - &w[1]).scaled(S::one() / (factor - S::one())))
                .collect();
            factor = factor * S::lit(4.0);
        }
        column.pop().expect("non-empty ladder")
    };
    let d1 = extrapolate(0);
    let d2 = extrapolate(1);
    let d3 = extrapolate(2);
    let defect = &d3 + &d1.scaled(d2.norm_sq() * d1.norm_sq());
    defect.euclid_norm()
}

/// Result of probing whether a submanifold geodesic satisfies the ambient
/// circle equation.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicCircleReport<S> {
    pub max_residual: S,
    pub samples: usize,
    pub pass: bool,
}

/// Residual threshold for [`sphere_geodesic_is_circle`].
pub const GEODESIC_RESIDUAL_PASS: f64 = 1e-5;

/// Sample the geodesic of a spherical submanifold through `(p, v)` over
/// `t in [0, 2*pi]` and report the worst circle-equation residual.
/// Requires unit-speed `v`.
pub fn sphere_geodesic_is_circle<S: Scalar>(
    submanifold: &SphericalSubmanifold<S>,
    p: &Vector<S>,
    v: &Vector<S>,
) -> Result<GeodesicCircleReport<S>> {
    if (v.norm_sq().abs() - S::one()).abs() > S::lit(tol::MEMBERSHIP) {
        return Err(GeomError::InvalidCircleState(
            "geodesic probe requires a unit-speed tangent".into(),
        ));
    }
    // Fail fast if the data is bad; afterwards the sampled curve is total.
    submanifold.geodesic(p, v, S::zero())?;
    let samples = 33;
    let h = S::lit(RESIDUAL_STEP);
    let mut max_residual = S::zero();
    for i in 0..samples {
        let t = S::of_usize(i) * S::TAU() / S::of_usize(samples - 1);
        let r = circle_residual(
            |s| submanifold.geodesic(p, v, s).expect("validated geodesic"),
            t,
            h,
        );
        max_residual = max_residual.max(r);
    }
    Ok(GeodesicCircleReport {
        max_residual,
        samples,
        pass: max_residual <= S::lit(GEODESIC_RESIDUAL_PASS),
    })
}
