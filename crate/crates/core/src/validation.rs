//! The seeded invariant suite behind `validate`: every check samples the
//! decomposition deterministically and reports its worst error against a
//! pinned tolerance.

use crate::error::Result;
use crate::pseudo_linear::Vector;
use crate::rng::SplitMix64;
use crate::sampling::{
    sample_domain_point, sample_restricted_point, sample_restricted_tangents, sample_tangents,
};
use crate::scalar::Scalar;
use crate::spheres::{SphereKind, SphericalSubmanifold};
use crate::warp::{RestrictedDecomposition, WarpedDecomposition, WarpedPoint};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult<S> {
    pub name: &'static str,
    pub samples: usize,
    pub max_error: S,
    pub tolerance: f64,
    pub pass: bool,
}

impl<S: Scalar> CheckResult<S> {
    fn new(name: &'static str, samples: usize, max_error: S, tolerance: f64) -> Self {
        let pass = max_error <= S::lit(tolerance);
        Self {
            name,
            samples,
            max_error,
            tolerance,
            pass,
        }
    }
}

/// Validation configuration: sample count per check, the master seed, and a
/// global scale multiplying every tolerance (1.0 for the pinned defaults).
#[derive(Debug, Clone, Copy)]
pub struct ValidationConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 1,
            tolerance_scale: 1.0,
        }
    }
}

/// A built seed: flat or restricted to a hyperquadric.
#[derive(Debug, Clone)]
pub enum BuiltSeed<S> {
    Flat(WarpedDecomposition<S>),
    Restricted(RestrictedDecomposition<S>),
}

impl<S: Scalar> BuiltSeed<S> {
    pub fn flat(&self) -> &WarpedDecomposition<S> {
        match self {
            BuiltSeed::Flat(w) => w,
            BuiltSeed::Restricted(r) => r.flat(),
        }
    }
}

const RHO_MIN: f64 = 0.05;

/// Run the full invariant suite on a built seed.
pub fn run_validation<S: Scalar>(seed: &BuiltSeed<S>, cfg: &ValidationConfig) -> Vec<CheckResult<S>> {
    let mut out = flat_checks(seed.flat(), cfg);
    if let BuiltSeed::Restricted(r) = seed {
        out.extend(restricted_checks(r, cfg));
    }
    for check in &mut out {
        check.pass = check.max_error <= S::lit(check.tolerance * cfg.tolerance_scale);
    }
    out
}

fn flat_checks<S: Scalar>(w: &WarpedDecomposition<S>, cfg: &ValidationConfig) -> Vec<CheckResult<S>> {
    let mut rng = SplitMix64::new(cfg.seed);
    let mut out = vec![
        pushforward_norm_identity(w, cfg.samples, &mut rng.fork(1)),
        pushforward_finite_difference(w, cfg.samples.min(60), &mut rng.fork(2)),
        forward_master_vs_expanded(w, cfg.samples, &mut rng.fork(3)),
        round_trip(w, cfg.samples, &mut rng.fork(4)),
        image_membership(w, cfg.samples, &mut rng.fork(5)),
        factor_mean_curvature(w, cfg.samples.min(50), &mut rng.fork(6)),
        factor_geodesic_circles(w, cfg.samples.min(12), &mut rng.fork(7)),
    ];
    if w.is_canonical() {
        out.push(norm_identity(w, cfg.samples, &mut rng.fork(8)));
    }
    if let Some(s) = w.as_standard() {
        if s.case() == crate::warp::CaseTag::Null {
            out.push(null_gauge_invariance(w, cfg.samples.min(80), &mut rng.fork(9)));
        }
        out.push(rebuild_determinism(w, cfg.samples.min(40), &mut rng.fork(10)));
    }
    out
}

fn restricted_checks<S: Scalar>(
    r: &RestrictedDecomposition<S>,
    cfg: &ValidationConfig,
) -> Vec<CheckResult<S>> {
    let mut rng = SplitMix64::new(cfg.seed ^ 0x5eed);
    let mut out = vec![
        quadric_residency(r, cfg.samples, &mut rng.fork(1)),
        leaf_mean_curvature(r, cfg.samples.min(40), &mut rng.fork(2)),
        restricted_isometry(r, cfg.samples, &mut rng.fork(3)),
        product_obstruction(r, cfg.samples.min(50), &mut rng.fork(4)),
    ];
    if r.is_two_sheeted() {
        out.push(connectedness_cut(r, cfg.samples.min(100), &mut rng.fork(5)));
    }
    out
}

fn pushforward_norm_identity<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_domain_point(w, rng, RHO_MIN) else {
            continue;
        };
        let Ok(v) = sample_tangents(w, &p, rng) else {
            continue;
        };
        let Ok(push) = w.psi_pushforward(&p, &v) else {
            continue;
        };
        used += 1;
        let mut rhs = v[0].norm_sq();
        let mut vscale = S::zero();
        for i in 1..=w.spherical_count() {
            let rho = w.rho(i, p.geodesic());
            rhs = rhs + rho * rho * v[i].norm_sq();
            vscale = vscale + v[i].euclid_norm_sq();
        }
        let err = (push.norm_sq() - rhs).abs() / (S::one() + vscale);
        worst = worst.max(err);
    }
    CheckResult::new("pushforward_norm_identity", used, worst, 1e-8)
}

fn pushforward_finite_difference<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let h = S::lit(1e-6);
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_domain_point(w, rng, RHO_MIN) else {
            continue;
        };
        let Ok(v) = sample_tangents(w, &p, rng) else {
            continue;
        };
        let Ok(push) = w.psi_pushforward(&p, &v) else {
            continue;
        };
        let eval = |s: S| -> Option<Vector<S>> {
            let mut parts = Vec::with_capacity(p.len());
            parts.push(p.geodesic() + &v[0].scaled(s));
            for i in 1..=w.spherical_count() {
                parts.push(
                    w.spherical_factor(i)
                        .curve_through(p.spherical(i), &v[i], s),
                );
            }
            w.psi_forward(&WarpedPoint::new(parts).ok()?).ok()
        };
        let (Some(plus), Some(minus)) = (eval(h), eval(-h)) else {
            continue;
        };
        used += 1;
        let fd = (&plus - &minus).scaled(S::lit(0.5) / h);
        worst = worst.max((&push - &fd).euclid_norm());
    }
    CheckResult::new("pushforward_finite_difference", used, worst, 1e-6)
}

fn norm_identity<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_domain_point(w, rng, RHO_MIN) else {
            continue;
        };
        let Ok(q) = w.psi_forward(&p) else { continue };
        used += 1;
        let p0sq = p.geodesic().norm_sq();
        let err = (q.norm_sq() - p0sq).abs() / (S::one() + p0sq.abs());
        worst = worst.max(err);
    }
    CheckResult::new("norm_identity", used, worst, 1e-10)
}

fn forward_master_vs_expanded<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_domain_point(w, rng, RHO_MIN) else {
            continue;
        };
        let (Ok(master), Ok(expanded)) = (w.psi_forward(&p), w.psi_forward_expanded(&p)) else {
            continue;
        };
        used += 1;
        let err = (&master - &expanded).euclid_norm() / (S::one() + master.euclid_norm());
        worst = worst.max(err);
    }
    CheckResult::new("forward_master_vs_expanded", used, worst, 1e-10)
}

fn round_trip<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_domain_point(w, rng, RHO_MIN) else {
            continue;
        };
        let Ok(q) = w.psi_forward(&p) else { continue };
        let Ok(back) = w.psi_inverse(&q) else {
            continue;
        };
        used += 1;
        let scale = S::one() + q.euclid_norm();
        for (x, y) in p.components().iter().zip(back.components()) {
            worst = worst.max((x - y).euclid_norm() / scale);
        }
        // Forward of the inverse lands back on q.
        if let Ok(q2) = w.psi_forward(&back) {
            worst = worst.max((&q2 - &q).euclid_norm() / scale);
        }
    }
    CheckResult::new("round_trip", used, worst, 1e-9)
}

fn image_membership<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut failures = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_domain_point(w, rng, RHO_MIN) else {
            continue;
        };
        let Ok(q) = w.psi_forward(&p) else { continue };
        used += 1;
        if !w.image_contains(&q, 1e-9) {
            failures = failures + S::one();
        }
    }
    CheckResult::new("image_membership", used, failures, 0.0)
}

/// Five-point second derivative of a curve.
fn second_derivative<S: Scalar>(f: impl Fn(S) -> Vector<S>, h: S) -> Vector<S> {
    let two = S::lit(2.0);
    let c16 = S::lit(16.0);
    let c30 = S::lit(30.0);
    let num = &(&(&f(two * h).scaled(-S::one()) + &f(h).scaled(c16)) - &f(S::zero()).scaled(c30))
        + &(&f(-h).scaled(c16) - &f(-two * h));
    num.scaled(S::one() / (S::lit(12.0) * h * h))
}

/// Mean curvature of a spherical submanifold at `p` from finite differences
/// of its geodesics: `H = (1/m) sum eps_j gamma_j''(0)` over an orthonormal
/// tangent frame.
pub fn fd_mean_curvature<S: Scalar>(
    n: &SphericalSubmanifold<S>,
    p: &Vector<S>,
) -> Result<Vector<S>> {
    let frame = n.tangent_at(p)?.orthonormal_basis()?;
    let m = frame.len();
    let h = S::lit(1e-2);
    let mut acc = Vector::zero(n.space());
    for u in &frame {
        let eps = u.norm_sq();
        let d2 = second_derivative(|s| n.geodesic(p, u, s).expect("frame geodesic"), h);
        acc = &acc + &d2.scaled(eps);
    }
    Ok(acc.scaled(S::one() / S::of_usize(m)))
}

fn factor_mean_curvature<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_domain_point(w, rng, RHO_MIN) else {
            continue;
        };
        for i in 1..=w.spherical_count() {
            let factor = w.spherical_factor(i);
            let (Ok(formula), Ok(fd)) = (
                factor.mean_curvature(p.spherical(i)),
                fd_mean_curvature(factor, p.spherical(i)),
            ) else {
                continue;
            };
            used += 1;
            worst = worst.max((&formula - &fd).euclid_norm());
        }
    }
    CheckResult::new("factor_mean_curvature", used, worst, 1e-5)
}

fn factor_geodesic_circles<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_domain_point(w, rng, RHO_MIN) else {
            continue;
        };
        for i in 1..=w.spherical_count() {
            let factor = w.spherical_factor(i);
            if factor.kind() == SphereKind::Plane {
                continue;
            }
            let Ok(tangent) = factor.tangent_at(p.spherical(i)) else {
                continue;
            };
            let Ok(frame) = tangent.orthonormal_basis() else {
                continue;
            };
            let Some(u) = frame.get(rng.below(frame.len().max(1))) else {
                continue;
            };
            let Ok(report) = crate::circles::sphere_geodesic_is_circle(factor, p.spherical(i), u)
            else {
                continue;
            };
            used += 1;
            worst = worst.max(report.max_residual);
        }
    }
    CheckResult::new("factor_geodesic_circles", used, worst, 1e-5)
}

fn rebuild_determinism<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let Some(s) = w.as_standard() else {
        return CheckResult::new("rebuild_determinism", 0, S::zero(), 0.0);
    };
    let rebuilt = WarpedDecomposition::build(s.data().clone());
    let mut failures = S::zero();
    let mut used = 0;
    match rebuilt {
        Err(_) => failures = S::one(),
        Ok(rebuilt) => {
            if rebuilt != *w {
                failures = S::one();
            }
            for _ in 0..samples {
                let Some(p) = sample_domain_point(w, rng, RHO_MIN) else {
                    continue;
                };
                used += 1;
                let a = w.psi_forward(&p).ok();
                let b = rebuilt.psi_forward(&p).ok();
                if a != b {
                    failures = failures + S::one();
                }
            }
        }
    }
    CheckResult::new("rebuild_determinism", used, failures, 0.0)
}

/// The chosen null partner `b` is a gauge: any valid `b' = b + w - (<b,w> +
/// w^2/2) a` with `w in W_0` yields the same image and consistent round
/// trips. Counts disagreement between membership verdicts.
fn null_gauge_invariance<S: Scalar>(
    w: &WarpedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let Some(s) = w.as_standard() else {
        return CheckResult::new("null_gauge_invariance", 0, S::zero(), 0.0);
    };
    let (Some(b), Some(_)) = (s.null_partner(), s.data().a_vectors().first()) else {
        return CheckResult::new("null_gauge_invariance", 0, S::zero(), 0.0);
    };
    let a = s.data().a_vector(1).clone();
    // Build an alternative gauge from a W_0 direction (fall back to b itself
    // when W_0 is trivial, which makes the check vacuous but still honest).
    let alt_b = if s.w0().dim() == 0 {
        b.clone()
    } else {
        let mut shift = Vector::zero(w.space());
        for u in s.w0().basis() {
            shift = &shift + &u.scaled(S::lit(rng.uniform(-0.8, 0.8)));
        }
        let corr = b.inner(&shift) + shift.norm_sq() / S::lit(2.0);
        &(b + &shift) - &a.scaled(corr)
    };
    let data = s.data();
    let Ok(alt_data) = crate::warp::InitialData::new_full(
        data.carrier().clone(),
        data.base().clone(),
        data.factors().to_vec(),
        data.a_vectors().to_vec(),
        data.ambient_kappa(),
        Some(alt_b),
    ) else {
        return CheckResult::new("null_gauge_invariance", 0, S::one(), 0.0);
    };
    let Ok(alt) = WarpedDecomposition::build(alt_data) else {
        return CheckResult::new("null_gauge_invariance", 0, S::one(), 0.0);
    };
    let mut failures = S::zero();
    let mut used = 0;
    let space = w.space();
    for _ in 0..samples {
        let coords: Vec<S> = (0..space.dim())
            .map(|_| S::lit(rng.uniform(-3.0, 3.0)))
            .collect();
        let q = Vector::new(space, coords).expect("dimension matches");
        used += 1;
        if w.image_contains(&q, 1e-9) != alt.image_contains(&q, 1e-9) {
            failures = failures + S::one();
        }
        // Round trip through the alternative gauge where defined.
        if let Ok(p) = alt.psi_inverse(&q) {
            if let Ok(q2) = alt.psi_forward(&p) {
                if (&q2 - &q).euclid_norm() > S::lit(1e-9) * (S::one() + q.euclid_norm()) {
                    failures = failures + S::one();
                }
            }
        }
    }
    CheckResult::new("null_gauge_invariance", used, failures, 0.0)
}

fn quadric_residency<S: Scalar>(
    r: &RestrictedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_restricted_point(r, rng, RHO_MIN) else {
            continue;
        };
        let Ok(q) = r.psi_forward(&p) else { continue };
        used += 1;
        let err = (q.norm_sq() - S::one() / r.kappa()).abs() / (S::one() + q.euclid_norm_sq());
        worst = worst.max(err);
    }
    CheckResult::new("quadric_residency", used, worst, 1e-10)
}

/// FD mean curvature of the leaf of factor `i` through `psi(p)`, measured in
/// the flat ambient space: `(1/m) sum eps_j gamma_j''(0) / rho^2` over a
/// factor-orthonormal frame, where `gamma_j(s)` follows the factor geodesic
/// in slot `i`.
pub fn fd_leaf_mean_curvature<S: Scalar>(
    w: &WarpedDecomposition<S>,
    p: &WarpedPoint<S>,
    i: usize,
) -> Result<Vector<S>> {
    let factor = w.spherical_factor(i);
    let frame = factor.tangent_at(p.spherical(i))?.orthonormal_basis()?;
    let m = frame.len();
    let rho = w.rho(i, p.geodesic());
    let h = S::lit(1e-2);
    let mut acc = Vector::zero(w.space());
    for u in &frame {
        let eps = u.norm_sq();
        let curve = |s: S| {
            let mut parts = p.components().to_vec();
            parts[i] = factor
                .geodesic(p.spherical(i), u, s)
                .expect("frame geodesic");
            w.psi_forward(&WarpedPoint::new(parts).expect("valid point"))
                .expect("in-domain curve")
        };
        let d2 = second_derivative(curve, h);
        acc = &acc + &d2.scaled(eps);
    }
    Ok(acc.scaled(S::one() / (S::of_usize(m) * rho * rho)))
}

fn leaf_mean_curvature<S: Scalar>(
    r: &RestrictedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_restricted_point(r, rng, RHO_MIN) else {
            continue;
        };
        for i in 1..=r.flat().spherical_count() {
            let (Ok(analytic), Ok(fd)) = (
                r.leaf_mean_curvature(i, &p),
                fd_leaf_mean_curvature(r.flat(), &p, i),
            ) else {
                continue;
            };
            used += 1;
            worst = worst.max((&analytic - &fd).euclid_norm());
            // At p_i = p_bar the leaf mean curvature is literally -a_i/rho_i.
            let mut at_base = p.components().to_vec();
            at_base[i] = r.base_point().clone();
            let at_base = WarpedPoint::new(at_base).expect("valid point");
            if let (Ok(analytic), Ok(fd)) = (
                r.leaf_mean_curvature(i, &at_base),
                fd_leaf_mean_curvature(r.flat(), &at_base, i),
            ) {
                let rho = r.rho(i, at_base.geodesic());
                let direct = r.flat().a_vector(i).scaled(-S::one() / rho);
                worst = worst.max((&analytic - &direct).euclid_norm());
                worst = worst.max((&fd - &direct).euclid_norm());
            }
        }
    }
    CheckResult::new("leaf_mean_curvature", used, worst, 1e-5)
}

fn restricted_isometry<S: Scalar>(
    r: &RestrictedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut worst = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_restricted_point(r, rng, RHO_MIN) else {
            continue;
        };
        let Ok(v) = sample_restricted_tangents(r, &p, rng) else {
            continue;
        };
        let Ok(push) = r.psi_pushforward(&p, &v) else {
            continue;
        };
        used += 1;
        let mut rhs = v[0].norm_sq();
        let mut vscale = S::zero();
        for i in 1..=r.flat().spherical_count() {
            let rho = r.rho(i, p.geodesic());
            rhs = rhs + rho * rho * v[i].norm_sq();
            vscale = vscale + v[i].euclid_norm_sq();
        }
        worst = worst.max((push.norm_sq() - rhs).abs() / (S::one() + vscale));
    }
    CheckResult::new("restricted_isometry", used, worst, 1e-8)
}

fn connectedness_cut<S: Scalar>(
    r: &RestrictedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let mut failures = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let Some(p) = sample_restricted_point(r, rng, RHO_MIN) else {
            continue;
        };
        // The antipode of the geodesic component sits on the opposite sheet
        // and must be rejected.
        let opposite = -p.geodesic();
        used += 1;
        if r.n0_contains(&opposite, 1e-9) {
            failures = failures + S::one();
        }
        if !r.n0_contains(p.geodesic(), 1e-9) {
            failures = failures + S::one();
        }
    }
    CheckResult::new("connectedness_cut", used, failures, 0.0)
}

fn product_obstruction<S: Scalar>(
    r: &RestrictedDecomposition<S>,
    samples: usize,
    rng: &mut SplitMix64,
) -> CheckResult<S> {
    let check = r.product_obstruction(samples, rng.next_u64());
    let err = if check.holds { S::zero() } else { S::one() };
    CheckResult::new("product_obstruction", samples, err, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo_linear::Space;
    use crate::sampling::{random_canonical_data, random_restrictable_data, SeedCase};

    #[test]
    fn suite_passes_on_random_flat_seed() {
        let space = Space::new(5, 1).unwrap();
        let data = random_canonical_data::<f64>(space, 2, SeedCase::NonNull, 42).unwrap();
        let w = WarpedDecomposition::build(data).unwrap();
        let cfg = ValidationConfig {
            samples: 60,
            seed: 7,
            tolerance_scale: 1.0,
        };
        let results = run_validation(&BuiltSeed::Flat(w), &cfg);
        for r in &results {
            assert!(
                r.pass,
                "{} failed: max_error {} > {}",
                r.name, r.max_error, r.tolerance
            );
            assert!(r.samples > 0 || r.name == "rebuild_determinism", "{} sampled nothing", r.name);
        }
    }

    #[test]
    fn suite_passes_on_null_seed() {
        let space = Space::new(4, 1).unwrap();
        let data = random_canonical_data::<f64>(space, 1, SeedCase::Null, 5).unwrap();
        let w = WarpedDecomposition::build(data).unwrap();
        let cfg = ValidationConfig {
            samples: 60,
            seed: 11,
            tolerance_scale: 1.0,
        };
        let results = run_validation(&BuiltSeed::Flat(w), &cfg);
        for r in &results {
            assert!(r.pass, "{} failed with {}", r.name, r.max_error);
        }
    }

    #[test]
    fn suite_passes_on_restricted_seed() {
        let space = Space::new(5, 1).unwrap();
        let data = random_restrictable_data::<f64>(space, 2, 9).unwrap();
        let w = WarpedDecomposition::build(data).unwrap();
        let restricted = w.restrict_to_quadric().unwrap();
        let cfg = ValidationConfig {
            samples: 40,
            seed: 3,
            tolerance_scale: 1.0,
        };
        let results = run_validation(&BuiltSeed::Restricted(restricted), &cfg);
        assert!(results.iter().any(|r| r.name == "quadric_residency"));
        for r in &results {
            assert!(r.pass, "{} failed with {}", r.name, r.max_error);
        }
    }
}
