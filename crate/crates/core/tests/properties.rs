//! Property tests for the algebraic invariants: bilinearity, projection
//! identities, Sylvester invariance, lightlike duals, sphere classification
//! round trips, chart isometry, and geodesic conservation laws.

use proptest::prelude::*;
use warpgeo::pseudo_linear::{dual_lightlike_basis, pseudo_orthogonal_sample, Space, Subspace, Vector};
use warpgeo::rng::SplitMix64;
use warpgeo::spheres::{SphereInitialData, SphereKind};

type V = Vector<f64>;

fn space(n: usize, nu: usize) -> Space {
    Space::new(n, nu).unwrap()
}

fn vec(space: Space, coords: Vec<f64>) -> V {
    Vector::new(space, coords).unwrap()
}

/// A space with 2 <= n <= 8 and nu <= min(3, n).
fn space_strategy() -> impl Strategy<Value = Space> {
    (2usize..=8, 0usize..=3).prop_map(|(n, nu)| space(n, nu.min(n)))
}

/// A non-degenerate subspace: rotate a coordinate span by a sampled
/// pseudo-orthogonal map, then mix the basis mildly.
fn rotated_subspace(sp: Space, m: usize, seed: u64) -> Subspace<f64> {
    let map = pseudo_orthogonal_sample::<f64>(sp, seed);
    let mut rng = SplitMix64::new(seed ^ 0xabcd);
    let basis: Vec<V> = (0..m)
        .map(|i| {
            let mut v = map.apply(&Vector::basis(sp, i));
            // Mild mixing keeps the span but destroys orthonormality.
            for j in 0..m {
                if j != i {
                    let c = rng.uniform(-0.3, 0.3);
                    v = &v + &map.apply(&Vector::basis(sp, j)).scaled(c);
                }
            }
            v
        })
        .collect();
    Subspace::span(sp, basis).expect("independent by construction")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_is_bilinear_and_symmetric(
        sp in space_strategy(),
        alpha in -3.0f64..3.0,
        raw in prop::collection::vec(-3.0f64..3.0, 24),
    ) {
        let n = sp.dim();
        let x = vec(sp, raw[0..n].to_vec());
        let y = vec(sp, raw[8..8 + n].to_vec());
        let z = vec(sp, raw[16..16 + n].to_vec());
        let lhs = (&x.scaled(alpha) + &y).inner(&z);
        let rhs = alpha * x.inner(&z) + y.inner(&z);
        let scale = 1.0 + lhs.abs() + rhs.abs();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        prop_assert!((x.inner(&y) - y.inner(&x)).abs() <= 1e-12 * (1.0 + x.inner(&y).abs()));
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint(
        sp in space_strategy(),
        m in 1usize..=3,
        seed in any::<u64>(),
        raw in prop::collection::vec(-3.0f64..3.0, 16),
    ) {
        let m = m.min(sp.dim());
        let s = rotated_subspace(sp, m, seed);
        let n = sp.dim();
        let v = vec(sp, raw[0..n].to_vec());
        let w = vec(sp, raw[8..8 + n].to_vec());
        let pv = s.project(&v).unwrap();
        let pw = s.project(&w).unwrap();
        let scale = 1.0 + v.euclid_norm() * w.euclid_norm();
        // Idempotence.
        let ppv = s.project(&pv).unwrap();
        prop_assert!((&ppv - &pv).euclid_norm() <= 1e-10 * (1.0 + pv.euclid_norm()));
        // Self-adjointness.
        prop_assert!((pv.inner(&w) - v.inner(&pw)).abs() <= 1e-10 * scale);
        // The residual is orthogonal to every basis vector.
        let r = &v - &pv;
        for b in s.basis() {
            prop_assert!(r.inner(b).abs() <= 1e-10 * (1.0 + v.euclid_norm()) * b.euclid_norm());
        }
    }

    #[test]
    fn dual_lightlike_identities_randomized(
        nu in 1usize..=4,
        extra in 0usize..=2,
        k in 1usize..=4,
        seed in any::<u64>(),
    ) {
        let k = k.min(nu);
        let n = (2 * nu + extra).min(8).max(nu + k);
        let sp = space(n, nu);
        // Standard orthogonal lightlike set e_i + e_{nu+i}, conjugated.
        let map = pseudo_orthogonal_sample::<f64>(sp, seed);
        let a: Vec<V> = (0..k)
            .map(|i| map.apply(&(&Vector::basis(sp, i) + &Vector::basis(sp, nu + i))))
            .collect();
        let b = dual_lightlike_basis(&a).unwrap();
        prop_assert_eq!(b.len(), k);
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((a[i].inner(&b[j]) - want).abs() <= 1e-9);
                prop_assert!(b[i].inner(&b[j]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn sphere_classification_round_trip(
        nu in 0usize..=3,
        m in 1usize..=3,
        kind in 0usize..=2,
        seed in any::<u64>(),
        alpha in 0.5f64..1.4,
    ) {
        // V = rotated span{e_{nu}..}, a = rotated axis orthogonal to V with a
        // chosen causal class (0 spacelike, 1 timelike, 2 lightlike).
        let nu = nu.max(if kind > 0 { 1 } else { 0 });
        let n = (nu + m + 2).min(8);
        let m = m.min(n - nu - 1).max(1);
        let sp = space(n, nu);
        let map = pseudo_orthogonal_sample::<f64>(sp, seed);
        let tangent = Subspace::span(
            sp,
            (nu..nu + m).map(|i| map.apply(&Vector::basis(sp, i))).collect(),
        )
        .unwrap();
        let spare_spacelike = nu + m; // < n by construction
        let a = match kind {
            0 => map.apply(&Vector::basis(sp, spare_spacelike)).scaled(alpha),
            1 => map.apply(&Vector::basis(sp, 0)).scaled(alpha),
            _ => map
                .apply(&(&Vector::basis(sp, 0) + &Vector::basis(sp, spare_spacelike)))
                .scaled(alpha),
        };
        let mut rng = SplitMix64::new(seed ^ 0x77);
        let base_coords: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let base = vec(sp, base_coords);
        let data = SphereInitialData::new(base.clone(), tangent, a.clone()).unwrap();
        let sphere = data.classify().unwrap();
        // The base point is on the sphere and carries mean curvature -a.
        prop_assert!(sphere.contains(&base, 1e-9));
        let h = sphere.mean_curvature(&base).unwrap();
        prop_assert!((&h - &(-&a)).euclid_norm() <= 1e-9 * (1.0 + a.euclid_norm()));
        // Chart points lie on the sphere across a small grid.
        for step in 0..5 {
            let u: Vec<f64> = (0..m).map(|j| -1.0 + 0.5 * ((step + j) % 5) as f64).collect();
            let p = sphere.parametrize(&u).unwrap();
            prop_assert!(sphere.contains(&p, 1e-9), "chart point off the sphere");
        }
    }

    #[test]
    fn quadric_geodesics_conserve_the_radius(
        nu in 0usize..=2,
        timelike_a in proptest::bool::ANY,
        seed in any::<u64>(),
        t_steps in 1usize..=8,
    ) {
        let timelike_a = timelike_a && nu >= 1;
        let sp = space(5, nu.max(if timelike_a { 1 } else { 0 }));
        let map = pseudo_orthogonal_sample::<f64>(sp, seed);
        let m = 2;
        let lo = sp.index();
        let tangent = Subspace::span(
            sp,
            (lo..lo + m).map(|i| map.apply(&Vector::basis(sp, i))).collect(),
        )
        .unwrap();
        // `a` takes the spare timelike or spacelike axis; the base point is
        // free as long as `a` is orthogonal to the tangent subspace.
        let (a_axis, base_axis) = if timelike_a { (0, lo + m) } else { (lo + m, 0) };
        let a = map.apply(&Vector::basis(sp, a_axis));
        let base = map.apply(&Vector::basis(sp, base_axis)).scaled(0.7);
        let data = SphereInitialData::new(base, tangent, a).unwrap();
        let sphere = data.classify().unwrap();
        let frame = sphere.tangent_at(sphere.base()).unwrap().orthonormal_basis().unwrap();
        let v = &frame[seed as usize % frame.len()];
        let c = sphere.center().unwrap();
        let radius_sq = 1.0 / sphere.curvature();
        for i in 0..=t_steps {
            let t = i as f64 / t_steps as f64 * std::f64::consts::TAU;
            let g = sphere.geodesic(sphere.base(), v, t).unwrap();
            let r = &g - c;
            prop_assert!(
                (r.norm_sq() - radius_sq).abs() <= 1e-9 * (1.0 + r.euclid_norm_sq()),
                "geodesic left the quadric at t = {t}"
            );
        }
    }
}

#[test]
fn sylvester_invariance_under_basis_change() {
    // The signature of a subspace is invariant under 50 random invertible
    // changes of its basis.
    let cases = [
        (space(3, 1), vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
        (space(4, 2), vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]]),
        (
            space(5, 1),
            vec![
                vec![1.0, 0.2, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 1.0, 0.0],
            ],
        ),
    ];
    let mut rng = SplitMix64::new(0xbead);
    for (sp, rows) in cases {
        let basis: Vec<V> = rows.iter().map(|r| vec(sp, r.clone())).collect();
        let reference = Subspace::span(sp, basis.clone()).unwrap().signature();
        let m = basis.len();
        let mut done = 0;
        while done < 50 {
            // M = I + R with small random R is invertible with high
            // probability; rank failures are skipped.
            let mix: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| if i == j { 1.0 } else { 0.0 } + rng.uniform(-0.45, 0.45))
                        .collect()
                })
                .collect();
            let new_basis: Vec<V> = (0..m)
                .map(|i| {
                    let mut v = Vector::zero(sp);
                    for j in 0..m {
                        v = &v + &basis[j].scaled(mix[i][j]);
                    }
                    v
                })
                .collect();
            let Ok(s) = Subspace::span(sp, new_basis) else {
                continue;
            };
            assert_eq!(s.signature(), reference, "signature changed under basis change");
            done += 1;
        }
    }
}

#[test]
fn paraboloid_chart_is_isometric() {
    // Finite-difference tangents of the graph chart have the same Gram
    // matrix as the basis of V (the chart is a global isometry).
    let sp = space(4, 1);
    let mut rng = SplitMix64::new(0x9a9a);
    for seed in 0..20u64 {
        let map = pseudo_orthogonal_sample::<f64>(sp, seed);
        let tangent = Subspace::span(
            sp,
            vec![
                map.apply(&Vector::basis(sp, 2)),
                map.apply(&Vector::basis(sp, 3)),
            ],
        )
        .unwrap();
        let a = map.apply(&(&Vector::basis(sp, 0) + &Vector::basis(sp, 1)));
        let base = map.apply(&Vector::basis(sp, 1)).scaled(0.3);
        let data = SphereInitialData::new(base, tangent.clone(), a).unwrap();
        let par = data.classify().unwrap();
        assert_eq!(par.kind(), SphereKind::Paraboloid);
        let u: Vec<f64> = (0..2).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let h = 1e-6;
        let mut fd_tangents = Vec::new();
        for j in 0..2 {
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] += h;
            um[j] -= h;
            let d = (&par.parametrize(&up).unwrap() - &par.parametrize(&um).unwrap())
                .scaled(0.5 / h);
            fd_tangents.push(d);
        }
        for i in 0..2 {
            for j in 0..2 {
                let chart = fd_tangents[i].inner(&fd_tangents[j]);
                let flat = tangent.basis()[i].inner(&tangent.basis()[j]);
                assert!(
                    (chart - flat).abs() <= 1e-7,
                    "chart Gram deviates: {chart} vs {flat}"
                );
            }
        }
    }
}

#[test]
fn circle_conserved_quantities_on_all_proper_types() {
    use warpgeo::circles::{circle_closed_form, circle_integrate, CircleState};
    let m2 = space(2, 1);
    let e2 = space(2, 0);
    // (space, p, X, Y) with X unit, Y orthogonal: Euclidean, de Sitter,
    // hyperbolic types.
    let states = [
        (e2, vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.3]),
        (m2, vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 0.8]),
        (m2, vec![1.0, 0.0], vec![0.0, 1.0], vec![0.9, 0.0]),
    ];
    let grid: Vec<f64> = (0..=6283).map(|i| i as f64 * 1e-3).collect();
    for (sp, p, x, y) in states {
        let state = CircleState::new(vec(sp, p), vec(sp, x), vec(sp, y)).unwrap();
        let traj = circle_integrate(&state, &grid).unwrap();
        let xx0 = state.velocity().norm_sq();
        let yy0 = state.acceleration().norm_sq();
        let mut worst = 0.0f64;
        for s in traj.iter().step_by(199) {
            worst = worst.max((s.velocity.norm_sq() - xx0).abs());
            worst = worst.max((s.acceleration.norm_sq() - yy0).abs());
            worst = worst.max(s.velocity.inner(&s.acceleration).abs());
            let closed = circle_closed_form(&state, s.t).unwrap();
            assert!(
                (&s.position - &closed).euclid_norm() <= 1e-6,
                "closed form vs integrator"
            );
        }
        assert!(worst <= 1e-6, "conserved-quantity drift {worst}");
    }
}
