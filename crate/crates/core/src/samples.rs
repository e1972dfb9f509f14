//! Seeded random generators of nets, quads and frames for tests and benchmarks.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::construct::{
    build_2x2_from_opposite_faces, complete_L, gen_cone_cylinder, gen_doubled_cone_cylinder, l_shape_class_ii,
    CompletionClass, ConeCylinderData, Direction, DoubledSeed, LShapedNet, TwoByTwoClass,
};
use crate::geom::Point;
use crate::net::{Net, Quad, Tolerances};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const MAX_TRIES: usize = 10_000;

fn retry<T>(rng: &mut SampleRng, mut f: impl FnMut(&mut SampleRng) -> Option<T>) -> T {
    for _ in 0..MAX_TRIES {
        if let Some(v) = f(rng) {
            return v;
        }
    }
    panic!("no valid sample after {MAX_TRIES} tries");
}

fn jitter(rng: &mut SampleRng, amp: f64, dim: usize) -> Point {
    let z = if dim == 3 { rng.random_range(-amp..amp) } else { 0.0 };
    Point::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp), z)
}

/// Random strictly convex planar quad with diagonal parameters in `(0.1, 0.9)`.
pub fn convex_quad(rng: &mut SampleRng) -> Quad {
    let a = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
    let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let c = a + Point::new(ang.cos(), ang.sin(), 0.0) * rng.random_range(0.5..2.0);
    let s = rng.random_range(0.1..0.9);
    let r = rng.random_range(0.1..0.9);
    // BD crosses AC counterclockwise at an angle in (0.3, pi - 0.3)
    let phi = ang + rng.random_range(0.3..std::f64::consts::PI - 0.3);
    let w = Point::new(phi.cos(), phi.sin(), 0.0) * rng.random_range(0.5..2.0);
    let q = a + (c - a) * s;
    Quad::new(a, q - w * r, c, q + w * (1.0 - r))
}

/// Random class-(ii) L-shape near the `m x n` square L-shape, or `None` when
/// a face is not convex.
pub fn near_square_l_shape_ii(rng: &mut SampleRng, m: usize, n: usize, dim: usize, amp: f64, tol: &Tolerances) -> Option<LShapedNet> {
    let g = |i: usize, j: usize, rng: &mut SampleRng| Point::new(i as f64, j as f64, 0.0) + jitter(rng, amp, dim);
    let (p00, p10, p11) = (g(0, 0, rng), g(1, 0, rng), g(1, 1, rng));
    // P01 in the plane of the other three corners
    let p01 = p00 + (p11 - p10) * rng.random_range(1.0 - amp..1.0 + amp) + (p10 - p00) * rng.random_range(-amp..amp);
    let face00 = [p00, p10, p11, p01];
    let row: Vec<(Point, f64)> =
        (2..=n).map(|j| (g(0, j, rng), 1.0 + rng.random_range(-2.0 * amp..2.0 * amp))).collect();
    let col: Vec<(Point, f64)> =
        (2..=m).map(|i| (g(i, 0, rng), 1.0 + rng.random_range(-2.0 * amp..2.0 * amp))).collect();
    l_shape_class_ii(face00, &row, &col, dim, tol).ok()
}

/// Random class-(ii) `m x n` net from a completed L-shape.
pub fn class_ii_net(rng: &mut SampleRng, m: usize, n: usize, dim: usize, tol: &Tolerances) -> Net {
    retry(rng, |rng| {
        let l = near_square_l_shape_ii(rng, m, n, dim, 0.05, tol)?;
        complete_L(&l, CompletionClass::II, tol).ok()
    })
}

/// Random cone-cylinder net `a_i + sigma_i b_j` near the square grid.
pub fn cone_cylinder_data(rng: &mut SampleRng, m: usize, n: usize, dim: usize) -> ConeCylinderData {
    let mut sigma = vec![1.0];
    for _ in 0..m {
        let last = *sigma.last().expect("nonempty");
        sigma.push(last * rng.random_range(0.9..1.1));
    }
    let a = (0..=m).map(|i| Point::new(0.0, i as f64, 0.0) + jitter(rng, 0.1, dim)).collect();
    let b = (0..=n).map(|j| Point::new(j as f64, 0.0, 0.0) + jitter(rng, 0.1, dim)).collect();
    ConeCylinderData { a, sigma, b, direction: Direction::Rows, dim }
}

pub fn cone_cylinder_net(rng: &mut SampleRng, m: usize, n: usize, dim: usize, tol: &Tolerances) -> (ConeCylinderData, Net) {
    retry(rng, |rng| {
        let d = cone_cylinder_data(rng, m, n, dim);
        gen_cone_cylinder(&d, tol).ok().map(|net| (d, net))
    })
}

/// Random doubled cone-cylinder net (class (i)) of size `m x n`, `n >= 2`.
pub fn doubled_cone_cylinder(rng: &mut SampleRng, m: usize, n: usize, dim: usize, tol: &Tolerances) -> Net {
    assert!(n >= 2, "doubled cone-cylinder nets need n >= 2");
    let k_even = n / 2 + 1;
    let k_odd = n + 1 - k_even;
    retry(rng, |rng| {
        let mut even = cone_cylinder_data(rng, m, k_even - 1, dim);
        for (k, b) in even.b.iter_mut().enumerate() {
            *b = Point::new(2.0 * k as f64, 0.0, 0.0) + jitter(rng, 0.15, dim);
        }
        let odd_row0 =
            (0..k_odd).map(|k| even.point(0, 0) + Point::new(2.0 * k as f64 + 1.0, 0.0, 0.0) + jitter(rng, 0.15, dim)).collect();
        let kappa = (0..m).map(|_| rng.random_range(0.8..1.2)).collect();
        gen_doubled_cone_cylinder(&DoubledSeed { even, odd_row0, kappa }, tol).ok()
    })
}

/// Square grid with every vertex moved uniformly within `[-amp, amp]^dim`.
pub fn perturbed_grid(rng: &mut SampleRng, m: usize, n: usize, amp: f64, tol: &Tolerances) -> Net {
    retry(rng, |rng| {
        let net = Net::from_fn(m, n, 2, |i, j| Point::new(i as f64, j as f64, 0.0) + jitter(rng, amp, 2)).ok()?;
        net.validated(tol).ok()
    })
}

/// Random `2 x 2` net of the given class from two random opposite faces.
pub fn two_by_two(rng: &mut SampleRng, class: TwoByTwoClass, tol: &Tolerances) -> Net {
    retry(rng, |rng| {
        let g = |i: f64, j: f64, rng: &mut SampleRng| Point::new(i, j, 0.0) + jitter(rng, 0.15, 2);
        let p11 = Point::new(1.0, 1.0, 0.0);
        let f1 = Quad::new(g(0.0, 0.0, rng), g(1.0, 0.0, rng), p11, g(0.0, 1.0, rng));
        let f3 = Quad::new(p11, g(2.0, 1.0, rng), g(2.0, 2.0, rng), g(1.0, 2.0, rng));
        build_2x2_from_opposite_faces(&f1, &f3, class, tol).ok()
    })
}
