//! Polar coordinates as a warped product decomposition of the plane.
//!
//! Seed: p = e1, V_0 = span{e1}, V_1 = span{e2}, a = e1. The spherical
//! factor is the unit circle, the warping function is rho(p_0) = <e1, p_0>,
//! and psi maps (r e1, (cos t, sin t)) to (r cos t, r sin t), an isometry
//! onto the punctured plane.
//!
//! Run: cargo run --example polar_plane

use warpgeo::pseudo_linear::{Space, Subspace, Vector};
use warpgeo::warp::{InitialData, WarpedDecomposition, WarpedPoint};

fn main() {
    let e2 = Space::euclidean(2).unwrap();
    let v = |coords: &[f64]| Vector::<f64>::from_f64(e2, coords).unwrap();

    let data = InitialData::new(
        v(&[1.0, 0.0]),
        vec![
            Subspace::coordinate_span(e2, &[0]).unwrap(),
            Subspace::coordinate_span(e2, &[1]).unwrap(),
        ],
        vec![v(&[1.0, 0.0])],
    )
    .unwrap();
    let w = WarpedDecomposition::build(data).unwrap();

    println!("case: {}, canonical: {}", w.case(), w.is_canonical());
    println!("type: {}", w.enumerate_type());

    let circle = w.spherical_factor(1);
    println!(
        "factor 1: {} with curvature {} centered at {:?}",
        circle.kind(),
        circle.curvature(),
        circle.center().map(|c| c.coords().to_vec()),
    );

    for (r, t) in [(2.0, 0.5f64), (0.5, 2.2), (3.0, -1.0)] {
        let p = WarpedPoint::new(vec![v(&[r, 0.0]), v(&[t.cos(), t.sin()])]).unwrap();
        let q = w.psi_forward(&p).unwrap();
        let back = w.psi_inverse(&q).unwrap();
        println!(
            "psi(r = {r}, t = {t}) = ({:+.6}, {:+.6}); inverse recovers r = {:.6}",
            q.coord(0),
            q.coord(1),
            back.geodesic().coord(0),
        );
    }

    // The norm identity of canonical decompositions: psi(p)^2 = p_0^2.
    let p = WarpedPoint::new(vec![v(&[2.5, 0.0]), v(&[0.6, 0.8])]).unwrap();
    let q = w.psi_forward(&p).unwrap();
    println!(
        "norm identity: psi(p)^2 = {:.12}, p_0^2 = {:.12}",
        q.norm_sq(),
        p.geodesic().norm_sq()
    );
}
