//! Seeded random generation of canonical initial data, domain points, and
//! factor tangents. All generators are deterministic functions of their
//! seed, which keeps validation reports reproducible.

use crate::error::Result;
use crate::pseudo_linear::{pseudo_orthogonal_sample, Space, Subspace, Vector};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::warp::{InitialData, RestrictedDecomposition, WarpedDecomposition, WarpedPoint};

/// Which standard case to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedCase {
    NonNull,
    Null,
}

/// Generate random canonical initial data for a proper decomposition of the
/// whole space with `k` spherical factors: choose an axis-aligned seed in the
/// standard basis, then conjugate everything through a sampled
/// pseudo-orthogonal map so nothing stays axis aligned.
pub fn random_canonical_data<S: Scalar>(
    space: Space,
    k: usize,
    case: SeedCase,
    seed: u64,
) -> Result<InitialData<S>> {
    let mut rng = SplitMix64::new(seed);
    let n = space.dim();
    let nu = space.index();
    assert!(k >= 1, "need at least one spherical factor");
    match case {
        SeedCase::NonNull => assert!(n >= k + k, "space too small for {k} non-null factors"),
        SeedCase::Null => {
            assert!(k == 1, "the null case has exactly one factor");
            assert!(nu >= 1 && nu < n, "the null case needs an indefinite metric");
            assert!(n >= 3, "null seeds need dim >= 3");
        }
    }

    // Pick factor dimensions: d0 for V_0, then d_1..d_k >= 1.
    let d0_min = match case {
        SeedCase::NonNull => k,
        SeedCase::Null => 2,
    };
    let d0_max = n - k;
    let d0 = d0_min + rng.below(d0_max - d0_min + 1);
    let mut dims = vec![1usize; k];
    for _ in 0..(n - d0 - k) {
        let i = rng.below(k);
        dims[i] += 1;
    }

    // Assign the nu timelike axes (0..nu) and n-nu spacelike axes (nu..n)
    // to factor slots, respecting capacities and the case's needs for V_0.
    // The spherical factors can absorb at most n - d0 timelike axes, so V_0
    // must take at least nu - (n - d0) of them.
    let t0_floor = nu.saturating_sub(n - d0);
    let t0_min = match case {
        SeedCase::Null => t0_floor.max(1),
        SeedCase::NonNull => t0_floor,
    };
    let mut t0_max = nu.min(d0);
    if case == SeedCase::Null {
        t0_max = t0_max.min(d0 - 1); // V_0 must keep a spacelike axis too
    }
    assert!(t0_min <= t0_max, "no feasible timelike-axis assignment");
    let t0 = t0_min + rng.below(t0_max - t0_min + 1);
    // Distribute the remaining negatives among spherical factors.
    let mut t_per_factor = vec![0usize; k];
    let mut remaining = nu - t0;
    let mut guard = 0;
    while remaining > 0 {
        guard += 1;
        assert!(guard < 10_000, "cannot place timelike axes");
        let i = rng.below(k);
        if t_per_factor[i] < dims[i] {
            t_per_factor[i] += 1;
            remaining -= 1;
        }
    }

    let mut timelike_axes: Vec<usize> = (0..nu).collect();
    let mut spacelike_axes: Vec<usize> = (nu..n).collect();
    let take = |list: &mut Vec<usize>, count: usize| -> Vec<usize> {
        (0..count).map(|_| list.remove(0)).collect()
    };
    let v0_t = take(&mut timelike_axes, t0);
    let v0_s = take(&mut spacelike_axes, d0 - t0);
    let mut factor_axes = Vec::with_capacity(k);
    for i in 0..k {
        let mut axes = take(&mut timelike_axes, t_per_factor[i]);
        axes.extend(take(&mut spacelike_axes, dims[i] - t_per_factor[i]));
        factor_axes.push(axes);
    }

    let mut v0_axes: Vec<usize> = v0_t.clone();
    v0_axes.extend(v0_s.iter().copied());

    // a-vectors and the base point, in the standard basis.
    let axis = |i: usize| Vector::<S>::basis(space, i);
    let mut a_vectors: Vec<Vector<S>> = Vec::with_capacity(k);
    let mut used_axes: Vec<usize> = Vec::new();
    let mut b_vec: Option<Vector<S>> = None;
    let mut base;
    match case {
        SeedCase::Null => {
            let ut = v0_t[0];
            let us = v0_s[0];
            let alpha = S::lit(rng.uniform(0.6, 1.0));
            let a = (&axis(ut) + &axis(us)).scaled(alpha);
            let b = (&axis(us) - &axis(ut)).scaled(S::one() / (S::lit(2.0) * alpha));
            used_axes.push(ut);
            used_axes.push(us);
            base = b.clone();
            b_vec = Some(b);
            a_vectors.push(a);
        }
        SeedCase::NonNull => {
            // Use k distinct axes of V_0; a timelike one may come first.
            let mut pool = v0_axes.clone();
            // Bias: sometimes move a timelike axis to the front of the pool.
            if t0 > 0 && rng.next_f64() < 0.5 {
                pool.retain(|&x| x != v0_t[0]);
                pool.insert(0, v0_t[0]);
            } else {
                // Start from a spacelike axis when available.
                if let Some(pos) = pool.iter().position(|&x| x >= nu) {
                    let ax = pool.remove(pos);
                    pool.insert(0, ax);
                }
            }
            base = Vector::zero(space);
            for i in 0..k {
                let ax = pool[i];
                used_axes.push(ax);
                let alpha = S::lit(rng.uniform(0.6, 1.0));
                let a = axis(ax).scaled(alpha);
                let kappa = a.norm_sq();
                base = &base + &a.scaled(S::one() / kappa);
                a_vectors.push(a);
            }
        }
    }
    // Add a W_0 component to the base point.
    for &ax in &v0_axes {
        if used_axes.contains(&ax) {
            continue;
        }
        base = &base + &axis(ax).scaled(S::lit(rng.uniform(-0.4, 0.4)));
    }

    let mut factors = Vec::with_capacity(k + 1);
    factors.push(Subspace::coordinate_span(space, &v0_axes)?);
    for axes in &factor_axes {
        factors.push(Subspace::coordinate_span(space, axes)?);
    }

    // Conjugate through a random pseudo-orthogonal map.
    let map = pseudo_orthogonal_sample::<S>(space, rng.next_u64());
    let rotate_subspace = |s: &Subspace<S>| -> Result<Subspace<S>> {
        Subspace::span(space, s.basis().iter().map(|v| map.apply(v)).collect())
    };
    let factors: Vec<Subspace<S>> = factors
        .iter()
        .map(rotate_subspace)
        .collect::<Result<Vec<_>>>()?;
    let a_vectors: Vec<Vector<S>> = a_vectors.iter().map(|a| map.apply(a)).collect();
    let base = map.apply(&base);
    let b_vec = b_vec.map(|b| map.apply(&b));

    InitialData::new_full(
        Subspace::whole(space),
        base,
        factors,
        a_vectors,
        S::zero(),
        b_vec,
    )
}

/// Random canonical non-null data whose base point is safely non-lightlike,
/// so it restricts to a hyperquadric.
pub fn random_restrictable_data<S: Scalar>(
    space: Space,
    k: usize,
    seed: u64,
) -> Result<InitialData<S>> {
    let mut attempt = seed;
    for _ in 0..500 {
        let data = random_canonical_data::<S>(space, k, SeedCase::NonNull, attempt)?;
        let psq = data.base().norm_sq();
        if psq.abs() > S::lit(0.2) * (S::one() + data.base().euclid_norm_sq()) {
            return Ok(data);
        }
        attempt = attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    }
    unreachable!("restrictable seeds are abundant")
}

/// Rejection-sample a point of the domain `N_0 x N_1 x ... x N_k`: the
/// geodesic component from the box `[-3,3]^dim` in `V_0` coordinates and
/// each spherical component from the factor chart on `[-1,1]^m_i`. `rho_min`
/// keeps samples away from the warping boundary.
pub fn sample_domain_point<S: Scalar>(
    decomposition: &WarpedDecomposition<S>,
    rng: &mut SplitMix64,
    rho_min: f64,
) -> Option<WarpedPoint<S>> {
    let offset = decomposition
        .as_standard()
        .map(|s| s.center().clone())
        .unwrap_or_else(|| Vector::zero(decomposition.space()));
    let v0 = decomposition.geodesic_subspace();
    let k = decomposition.spherical_count();
    for _ in 0..400 {
        let mut p0 = offset.clone();
        for b in v0.basis() {
            p0 = &p0 + &b.scaled(S::lit(rng.uniform(-3.0, 3.0)));
        }
        if !decomposition.n0_contains(&p0, 1e-9) {
            continue;
        }
        if (1..=k).any(|i| decomposition.rho(i, &p0) < S::lit(rho_min)) {
            continue;
        }
        let mut components = Vec::with_capacity(k + 1);
        components.push(p0);
        for i in 1..=k {
            let factor = decomposition.spherical_factor(i);
            let u: Vec<S> = (0..factor.dim())
                .map(|_| S::lit(rng.uniform(-1.0, 1.0)))
                .collect();
            components.push(factor.parametrize(&u).ok()?);
        }
        return WarpedPoint::new(components).ok();
    }
    None
}

/// Domain sample for a restricted decomposition: the geodesic component
/// comes from the chart of `N_0(kappa)` (or is the base point when
/// `dim V_0 = 1`).
pub fn sample_restricted_point<S: Scalar>(
    restricted: &RestrictedDecomposition<S>,
    rng: &mut SplitMix64,
    rho_min: f64,
) -> Option<WarpedPoint<S>> {
    let flat = restricted.flat();
    let k = flat.spherical_count();
    for _ in 0..400 {
        let p0 = match restricted.geodesic_quadric() {
            Some(quadric) => {
                let u: Vec<S> = (0..quadric.dim())
                    .map(|_| S::lit(rng.uniform(-1.0, 1.0)))
                    .collect();
                quadric.parametrize(&u).ok()?
            }
            None => restricted.base_point().clone(),
        };
        if !restricted.n0_contains(&p0, 1e-6) {
            continue;
        }
        if (1..=k).any(|i| flat.rho(i, &p0) < S::lit(rho_min)) {
            continue;
        }
        let mut components = Vec::with_capacity(k + 1);
        components.push(p0);
        for i in 1..=k {
            let factor = flat.spherical_factor(i);
            let u: Vec<S> = (0..factor.dim())
                .map(|_| S::lit(rng.uniform(-1.0, 1.0)))
                .collect();
            components.push(factor.parametrize(&u).ok()?);
        }
        return WarpedPoint::new(components).ok();
    }
    None
}

/// Random factor tangents at a domain point: `v_0` in `V_0` and each `v_i`
/// tangent to `N_i` at `p_i`.
pub fn sample_tangents<S: Scalar>(
    decomposition: &WarpedDecomposition<S>,
    point: &WarpedPoint<S>,
    rng: &mut SplitMix64,
) -> Result<Vec<Vector<S>>> {
    let mut out = Vec::with_capacity(point.len());
    let mut v0 = Vector::zero(decomposition.space());
    for b in decomposition.geodesic_subspace().basis() {
        v0 = &v0 + &b.scaled(S::lit(rng.uniform(-1.0, 1.0)));
    }
    out.push(v0);
    for i in 1..=decomposition.spherical_count() {
        let tangent = decomposition
            .spherical_factor(i)
            .tangent_at(point.spherical(i))?;
        let mut v = Vector::zero(decomposition.space());
        for b in tangent.basis() {
            v = &v + &b.scaled(S::lit(rng.uniform(-1.0, 1.0)));
        }
        out.push(v);
    }
    Ok(out)
}

/// Tangents for a restricted decomposition: additionally forces `v_0` to be
/// tangent to the hyperquadric (`<v_0, p_0> = 0`).
pub fn sample_restricted_tangents<S: Scalar>(
    restricted: &RestrictedDecomposition<S>,
    point: &WarpedPoint<S>,
    rng: &mut SplitMix64,
) -> Result<Vec<Vector<S>>> {
    let mut tangents = sample_tangents(restricted.flat(), point, rng)?;
    let p0 = point.geodesic();
    let radial = tangents[0].inner(p0) / p0.norm_sq();
    tangents[0] = &tangents[0] - &p0.scaled(radial);
    Ok(tangents)
}
