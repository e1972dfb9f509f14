use proptest::prelude::*;

use combescure::classify::cone_net_kind;
use combescure::deform::DeformationFamily;
use combescure::geom::Point;
use combescure::isotropic::{delta_plane, delta_point, dual_family_invariants, dual_net, isotropic_gaussian_curvature, IsoPlane};
use combescure::net::{Net, Tolerances};
use combescure::samples;
use combescure::smooth::{
    first_fundamental_det, numeric_partials, sample_family, sample_smooth, sampling_commutes_residual, ScalarCurve,
    SmoothConeCylinderNet, SmoothFamilyMember, Surface, VectorCurve,
};
use combescure::Error;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn poly(c: &[[f64; 3]]) -> VectorCurve {
    VectorCurve::Poly { coeffs: c.iter().map(|x| x.to_vec()).collect() }
}

fn sigma(c: &[f64]) -> ScalarCurve {
    ScalarCurve::Poly { coeffs: c.to_vec() }
}

/// Translational graph `(u, v, alpha(u) + beta(v))` with cubic `alpha`, `beta`.
fn translational_graph(al: [f64; 2], be: [f64; 2]) -> SmoothConeCylinderNet {
    SmoothConeCylinderNet::new(
        poly(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, al[0]], [0.0, 0.0, al[1]]]),
        sigma(&[1.0]),
        poly(&[[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, be[0]], [0.0, 0.0, be[1]]]),
        [[0.0, 1.0], [0.0, 1.0]],
    )
    .unwrap()
}

fn curved_surface() -> SmoothConeCylinderNet {
    SmoothConeCylinderNet::new(
        poly(&[[0.0, 0.0, 0.0], [0.0, 1.0, 0.1], [0.2, 0.0, 0.0]]),
        sigma(&[1.0, 0.4, 0.1]),
        poly(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.3, 0.2]]),
        [[0.0, 1.0], [0.0, 1.0]],
    )
    .unwrap()
}

fn curvature_field(net: &Net) -> Vec<Vec<f64>> {
    let z: Vec<Vec<f64>> = (0..=net.m()).map(|i| (0..=net.n()).map(|j| net.p(i, j).z).collect()).collect();
    let hx = net.p(1, 0).x - net.p(0, 0).x;
    let hy = net.p(0, 1).y - net.p(0, 0).y;
    isotropic_gaussian_curvature(&z, hx, hy).unwrap()
}

#[test]
fn poles_of_paraboloid_chords() {
    // z = (x^2 + y^2) / 2 on a rectangular grid has planar faces with poles
    // ((x0 + x1) / 2, (y0 + y1) / 2, (x0 x1 + y0 y1) / 2)
    let xs = [-1.0, -0.2, 0.5, 1.5];
    let ys = [-0.7, 0.1, 0.4, 1.2, 2.0];
    let net = Net::from_fn(3, 4, 3, |i, j| Point::new(xs[i], ys[j], 0.5 * (xs[i] * xs[i] + ys[j] * ys[j]))).unwrap();
    let d = dual_net(&net, &tol()).unwrap();
    assert_eq!((d.m(), d.n()), (2, 3));
    for i in 0..3 {
        for j in 0..4 {
            let want = Point::new(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]), 0.5 * (xs[i] * xs[i + 1] + ys[j] * ys[j + 1]));
            assert!((d.p(i, j) - want).norm() < 1e-13, "pole ({i},{j})");
        }
    }
}

#[test]
fn polar_plane_touches_the_unit_sphere() {
    // the polar plane of a point on 2z = x^2 + y^2 is its tangent plane
    let p = Point::new(0.6, -1.1, 0.5 * (0.36 + 1.21));
    let pl = delta_point(&p);
    assert!(pl.residual(&p).abs() < 1e-15);
    for (dx, dy) in [(0.1, 0.0), (0.0, -0.2), (0.3, 0.3)] {
        let (x, y) = (p.x + dx, p.y + dy);
        assert!(0.5 * (x * x + y * y) > pl.z_at(x, y));
    }
}

#[test]
fn coarse_grid_over_tight_curve_fails() {
    let half_circle = SmoothConeCylinderNet::new(
        VectorCurve::Poly { coeffs: vec![vec![0.0, 0.0]] },
        sigma(&[0.0, 1.0]),
        VectorCurve::Trig { constant: vec![0.0, 0.0], cos: vec![vec![1.0, 0.0]], sin: vec![vec![0.0, 1.0]], freq: 1.0 },
        [[1.0, 2.0], [0.0, std::f64::consts::PI]],
    )
    .unwrap();
    let err = sample_smooth(&half_circle, 2, 1, &tol()).unwrap_err();
    assert!(matches!(err, Error::NonConvex { .. } | Error::Degenerate { .. }), "{err}");
    assert!(err.to_string().contains("face (0,0)"));
    sample_smooth(&half_circle, 2, 8, &tol()).unwrap();
}

#[test]
fn grid_nodes_are_sampled_exactly() {
    let s = curved_surface();
    let net = sample_smooth(&s, 4, 5, &tol()).unwrap();
    let (us, vs) = s.grid_nodes(4, 5);
    for i in 0..=4 {
        for j in 0..=5 {
            assert_eq!(net.p(i, j), s.eval(us[i], vs[j]).unwrap());
        }
    }
    assert!(cone_net_kind(&net, &tol()).rows.cone_cylinder);
}

#[test]
fn unit_sigma_closed_form() {
    let s = translational_graph([0.4, -0.3], [0.2, 0.5]);
    for t in [0.3, 1.0, 4.0] {
        let member = SmoothFamilyMember::new(s.clone(), t).unwrap();
        let c = (1.0 + t).sqrt();
        for k in 0..=10 {
            let u = k as f64 / 10.0;
            let want = s.a.eval(0.0) + (s.a.eval(u) - s.a.eval(0.0)) / c;
            assert!((member.a_t(u).unwrap() - want).norm() < 1e-10);
        }
    }
}

#[test]
fn exact_partials_match_differences() {
    let s = curved_surface();
    for t in [0.0, 0.3, 1.0] {
        let member = SmoothFamilyMember::new(s.clone(), t).unwrap();
        for (u, v) in [(0.2, 0.3), (0.5, 0.5), (0.8, 0.6)] {
            let (fu, fv) = member.partials(u, v).unwrap();
            let (nu, nv) = numeric_partials(&member, u, v, 1e-4).unwrap();
            assert!((fu - nu).norm() < 1e-7 && (fv - nv).norm() < 1e-7, "t = {t} at ({u}, {v})");
        }
    }
}

#[test]
fn first_fundamental_det_is_t_invariant() {
    let s = curved_surface();
    let members: Vec<SmoothFamilyMember> = [0.0, 0.3, 1.0].iter().map(|&t| SmoothFamilyMember::new(s.clone(), t).unwrap()).collect();
    for i in 1..10 {
        for j in 1..10 {
            let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
            let d0 = first_fundamental_det(&members[0], u, v, 1e-4).unwrap();
            for m in &members[1..] {
                assert!((first_fundamental_det(m, u, v, 1e-4).unwrap() - d0).abs() < 1e-10 * d0.max(1.0));
            }
        }
    }
}

#[test]
fn sampling_commutes_to_second_order() {
    let s = curved_surface();
    let coarse = sampling_commutes_residual(&s, 8, 8, 0.5, &tol()).unwrap();
    let fine = sampling_commutes_residual(&s, 16, 16, 0.5, &tol()).unwrap();
    assert!(coarse < 1e-2, "coarse {coarse}");
    assert!(coarse / fine > 3.0, "coarse {coarse}, fine {fine}");
}

#[test]
fn negative_t_needs_the_experimental_constructor() {
    let s = curved_surface();
    assert!(SmoothFamilyMember::new(s.clone(), -0.5).is_err());
    let m = SmoothFamilyMember::new_experimental(s.clone(), -0.5).unwrap();
    assert!(sample_family(&m, 6, 6, &tol()).is_ok());
    assert!(SmoothFamilyMember::new_experimental(s, -1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn delta_is_an_involution(x in -10.0..10.0f64, y in -10.0..10.0f64, z in -10.0..10.0f64) {
        let p = Point::new(x, y, z);
        prop_assert_eq!(delta_plane(&delta_point(&p)), p);
        let pl = IsoPlane { u: x, v: y, w: z };
        prop_assert_eq!(delta_point(&delta_plane(&pl)), pl);
    }

    #[test]
    fn dual_top_views_are_fixed_along_families(seed in any::<u64>()) {
        let mut rng = samples::rng(seed);
        let data = samples::cone_cylinder_data(&mut rng, 3, 4, 3);
        let Ok(fam) = DeformationFamily::cone_cylinder(data, &tol()) else { return Ok(()) };
        let ts: Vec<f64> = (0..6).map(|k| -0.1 + 0.06 * k as f64).collect();
        let Ok(r) = dual_family_invariants(&fam, &ts, &tol()) else { return Ok(()) };
        let scale = dual_net(&fam.base, &tol()).unwrap().median_edge_length().max(1.0);
        prop_assert!(r.max_top_view_drift <= 1e-9 * scale, "drift {}", r.max_top_view_drift);
    }

    #[test]
    fn isotropic_curvature_survives_deformation(
        a2 in -0.5..0.5f64, a3 in -0.5..0.5f64, b2 in -0.5..0.5f64, b3 in -0.5..0.5f64, t in 0.1..2.0f64,
    ) {
        let s = translational_graph([a2, a3], [b2, b3]);
        let base = sample_family(&SmoothFamilyMember::new(s.clone(), 0.0).unwrap(), 20, 20, &tol()).unwrap();
        let moved = sample_family(&SmoothFamilyMember::new(s, t).unwrap(), 20, 20, &tol()).unwrap();
        let (k0, k1) = (curvature_field(&base), curvature_field(&moved));
        for (i, (r0, r1)) in k0.iter().zip(&k1).enumerate() {
            let u = (i + 1) as f64 / 20.0;
            for (j, (x, y)) in r0.iter().zip(r1).enumerate() {
                let v = (j + 1) as f64 / 20.0;
                let exact = (2.0 * a2 + 6.0 * a3 * u) * (2.0 * b2 + 6.0 * b3 * v);
                prop_assert!((x - exact).abs() < 1e-8, "base K_i {x} vs {exact}");
                prop_assert!((y - x).abs() < 1e-5, "K_i {x} -> {y} at ({i},{j})");
            }
        }
    }
}
