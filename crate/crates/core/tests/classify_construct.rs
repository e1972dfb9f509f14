use proptest::prelude::*;

use combescure::classify::{affine_symmetric, classify, cone_net_kind, is_koenigs, ClassVerdict, ConeKind};
use combescure::construct::{
    complete_L, extract_cone_cylinder_data, gen_cone_cylinder, CompletionClass, Direction, LShapedNet, TwoByTwoClass,
};
use combescure::deform::{cone_cylinder_family, max_area_residual};
use combescure::geom::Point;
use combescure::net::{are_parallel_nets, Net, Quad, Side, Tolerances};
use combescure::ratios::opposite_ratio;
use combescure::samples::{self, SampleRng};
use rand::RngExt;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn flags(v: &ClassVerdict) -> (bool, bool, bool) {
    (v.class_i_rows, v.class_i_cols, v.class_ii)
}

/// One net of each kind: class (i), class (ii), generic.
fn corpus_net(rng: &mut SampleRng, kind: u8, dim: usize) -> Net {
    let (m, n) = (rng.random_range(2..5), rng.random_range(2..5));
    match kind % 3 {
        0 => samples::doubled_cone_cylinder(rng, m, n, dim, &tol()),
        1 => samples::class_ii_net(rng, m, n, dim, &tol()),
        _ => samples::perturbed_grid(rng, m, n, 0.15, &tol()),
    }
}

fn random_affine(rng: &mut SampleRng, dim: usize) -> impl Fn(&Point) -> Point {
    loop {
        let mut a = nalgebra::Matrix3::<f64>::identity();
        for r in 0..dim {
            for c in 0..dim {
                a[(r, c)] = rng.random_range(-2.0..2.0);
            }
        }
        let mut t = Point::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0);
        if dim == 3 {
            t.z = rng.random_range(-3.0..3.0);
        }
        let det = a.determinant().abs();
        let cond = a.norm() * a.try_inverse().map_or(f64::INFINITY, |i| i.norm());
        if det > 0.3 && cond < 20.0 {
            return move |p: &Point| a * p + t;
        }
    }
}

#[test]
fn square_grid_is_everything() {
    let v = classify(&Net::square_grid(3, 4), &tol()).unwrap();
    assert_eq!(flags(&v), (true, true, true));
    assert_eq!(v.max_residual, 0.0);
    let k = cone_net_kind(&Net::square_grid(3, 4), &tol());
    assert_eq!(k.rows.strongest(), ConeKind::DoubledConeCylinder);
    assert_eq!(k.cols.strongest(), ConeKind::DoubledConeCylinder);
}

#[test]
fn single_strips_are_vacuously_class_i() {
    let net = samples::perturbed_grid(&mut samples::rng(3), 1, 4, 0.2, &tol());
    let v = classify(&net, &tol()).unwrap();
    assert!(v.class_i_cols && v.vacuous_cols && v.deformable);
    assert!(!v.vacuous_rows);
}

#[test]
fn two_by_two_builders_hit_their_class() {
    let mut rng = samples::rng(11);
    for _ in 0..20 {
        let v = classify(&samples::two_by_two(&mut rng, TwoByTwoClass::II, &tol()), &tol()).unwrap();
        assert!(v.class_ii);
        let v = classify(&samples::two_by_two(&mut rng, TwoByTwoClass::I(Direction::Rows), &tol()), &tol()).unwrap();
        assert!(v.class_i_rows);
        let v = classify(&samples::two_by_two(&mut rng, TwoByTwoClass::I(Direction::Cols), &tol()), &tol()).unwrap();
        assert!(v.class_i_cols);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn classify_respects_grid_symmetries(seed in any::<u64>(), kind in 0u8..3) {
        let mut rng = samples::rng(seed);
        let net = corpus_net(&mut rng, kind, 2);
        let v = classify(&net, &tol()).unwrap();
        let vt = classify(&net.transpose(), &tol()).unwrap();
        prop_assert_eq!(flags(&vt), flags(&v.transposed()));
        let (m, n) = (net.m(), net.n());
        let rev_i = Net::from_fn(m, n, 2, |i, j| net.p(m - i, j)).unwrap();
        prop_assert_eq!(flags(&classify(&rev_i, &tol()).unwrap()), flags(&v));
        let rev_j = Net::from_fn(m, n, 2, |i, j| net.p(i, n - j)).unwrap();
        prop_assert_eq!(flags(&classify(&rev_j, &tol()).unwrap()), flags(&v));
        if kind % 3 != 2 {
            prop_assert!(v.deformable);
        }
    }

    #[test]
    fn classify_is_affine_invariant(seed in any::<u64>(), kind in 0u8..3, dim in 2usize..4, k in 0.01..100.0f64) {
        let mut rng = samples::rng(seed);
        let net = corpus_net(&mut rng, kind, dim);
        let v = classify(&net, &tol()).unwrap();
        let f = random_affine(&mut rng, dim);
        let mapped = net.map(&f).unwrap();
        prop_assert_eq!(flags(&classify(&mapped, &tol()).unwrap()), flags(&v));
        let scaled = net.map(|p| p * k).unwrap();
        prop_assert_eq!(flags(&classify(&scaled, &tol()).unwrap()), flags(&v));
    }

    #[test]
    fn deformable_nets_are_koenigs(seed in any::<u64>(), kind in 0u8..2, dim in 2usize..4) {
        let net = corpus_net(&mut samples::rng(seed), kind, dim);
        prop_assert!(classify(&net, &tol()).unwrap().deformable);
        prop_assert!(is_koenigs(&net, &tol()).unwrap());
    }

    #[test]
    fn class_i_nets_are_doubled_cone_cylinders(seed in any::<u64>(), dim in 2usize..4) {
        let mut rng = samples::rng(seed);
        let (m, n) = (rng.random_range(1..5), rng.random_range(2..6));
        let net = samples::doubled_cone_cylinder(&mut rng, m, n, dim, &tol());
        let v = classify(&net, &tol()).unwrap();
        prop_assert!(v.class_i_rows);
        prop_assert_eq!(cone_net_kind(&net, &tol()).rows.strongest(), ConeKind::DoubledConeCylinder);
        let vt = classify(&net.transpose(), &tol()).unwrap();
        prop_assert!(vt.class_i_cols);
        prop_assert_eq!(cone_net_kind(&net.transpose(), &tol()).cols.strongest(), ConeKind::DoubledConeCylinder);
    }

    #[test]
    fn affine_mirrors_share_opposite_ratios(seed in any::<u64>(), shear in -1.0..1.0f64, k in 0.3..3.0f64) {
        let q = samples::convex_quad(&mut samples::rng(seed));
        let e = (q.b - q.a).normalize();
        let nu = Point::new(-e.y, e.x, 0.0);
        let mirror = |p: &Point| {
            let (al, be) = ((p - q.a).dot(&e), (p - q.a).dot(&nu));
            q.a + e * (al + shear * be) - nu * (k * be)
        };
        let p = Quad::new(q.a, q.b, mirror(&q.c), mirror(&q.d));
        prop_assert!(affine_symmetric(&q, &p, &tol()).unwrap());
        for s in Side::ALL {
            let (a, b) = (opposite_ratio(&q, s, &tol()).unwrap(), opposite_ratio(&p, s, &tol()).unwrap());
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{s:?}: {a} vs {b}");
        }
        // an extra shear of one corner breaks the symmetry
        let bent = Quad::new(q.a, q.b, p.c + (p.c - p.d) * 0.05, p.d);
        prop_assert!(!affine_symmetric(&q, &bent, &tol()).unwrap_or(false));
    }

    #[test]
    fn cone_cylinder_nets_deform(seed in any::<u64>(), dim in 2usize..4, t in -0.2..0.4f64) {
        let mut rng = samples::rng(seed);
        let (m, n) = (rng.random_range(1..5), rng.random_range(1..5));
        let (data, net) = samples::cone_cylinder_net(&mut rng, m, n, dim, &tol());
        prop_assert!(classify(&net, &tol()).unwrap().deformable);
        let back = gen_cone_cylinder(&extract_cone_cylinder_data(&net, &tol()).unwrap(), &tol()).unwrap();
        prop_assert!(back.max_vertex_distance(&net).unwrap() <= 1e-9 * (1.0 + net.median_edge_length()));
        if let Ok(d) = cone_cylinder_family(&data, t, &tol()) {
            prop_assert!(are_parallel_nets(&net, &d, &tol()).unwrap());
            prop_assert!(max_area_residual(&net, &d).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn completion_is_deterministic_and_exact(seed in any::<u64>(), dim in 2usize..4) {
        let mut rng = samples::rng(seed);
        let (m, n) = (rng.random_range(2..6), rng.random_range(2..6));
        let net = samples::class_ii_net(&mut rng, m, n, dim, &tol());
        let l = LShapedNet::from_net(&net);
        let a = complete_L(&l, CompletionClass::II, &tol()).unwrap();
        let b = complete_L(&l, CompletionClass::II, &tol()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.max_vertex_distance(&net).unwrap() <= 1e-8 * net.median_edge_length());

        let dc = samples::doubled_cone_cylinder(&mut rng, m, n, dim, &tol());
        let c = complete_L(&LShapedNet::from_net(&dc), CompletionClass::I, &tol()).unwrap();
        prop_assert!(c.max_vertex_distance(&dc).unwrap() <= 1e-8 * dc.median_edge_length());
        let ct = complete_L(&LShapedNet::from_net(&dc.transpose()), CompletionClass::ICols, &tol()).unwrap();
        prop_assert!(ct.max_vertex_distance(&dc.transpose()).unwrap() <= 1e-8 * dc.median_edge_length());
    }
}
