//! Small geometric primitives shared by the other modules.

use nalgebra::{DMatrix, Matrix3, Vector3};

pub type Point = Vector3<f64>;

/// Least-squares intersection of `p1 + s d1` and `p2 + r d2`.
#[derive(Clone, Copy, Debug)]
pub struct LineHit {
    pub s: f64,
    pub r: f64,
    /// Distance between the two closest points.
    pub residual: f64,
    pub point: Point,
}

/// Returns `None` when the lines are (numerically) parallel.
pub fn intersect_lines(p1: &Point, d1: &Point, p2: &Point, d2: &Point) -> Option<LineHit> {
    let a = d1.dot(d1);
    let b = d1.dot(d2);
    let c = d2.dot(d2);
    let det = a * c - b * b;
    if !(det > 1e-24 * a * c) {
        return None;
    }
    let w = p2 - p1;
    let e = d1.dot(&w);
    let f = d2.dot(&w);
    let s = (e * c - b * f) / det;
    let r = (b * e - a * f) / det;
    let x1 = p1 + d1 * s;
    let x2 = p2 + d2 * r;
    Some(LineHit {
        s,
        r,
        residual: (x1 - x2).norm(),
        point: (x1 + x2) * 0.5,
    })
}

/// Sine of the angle between two directions (0 for parallel or antiparallel).
pub fn sin_angle(a: &Point, b: &Point) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (a.cross(b).norm() / (na * nb)).min(1.0)
}

/// Unit normal from a raw normal, flipped so that the first significant
/// component in the order z, y, x is positive.
pub fn canonical_unit(n: &Point) -> Option<Point> {
    let len = n.norm();
    if !(len > 0.0) || !len.is_finite() {
        return None;
    }
    let u = n / len;
    for k in [2usize, 1, 0] {
        if u[k].abs() > 1e-12 {
            return Some(if u[k] < 0.0 { -u } else { u });
        }
    }
    Some(u)
}

/// Median of a slice of finite values; 0 for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Deviation of a family of lines `p_j + t d_j` from passing through one
/// common (possibly ideal) point.
///
/// A homogeneous point `(c, w)` lies on line `j` iff `(c - w p_j) x d_j = 0`.
/// The stacked system is solved by SVD; the smallest singular value is the
/// residual. Points are centered and divided by `scale` first.
#[derive(Clone, Copy, Debug)]
pub struct Concurrency {
    pub residual: f64,
    /// Common point when finite; `None` when the best fit is the ideal point.
    pub point: Option<Point>,
}

pub fn line_concurrency(points: &[Point], dirs: &[Point], scale: f64) -> Concurrency {
    let k = points.len();
    if k < 3 {
        return Concurrency { residual: 0.0, point: None };
    }
    let center = points.iter().fold(Point::zeros(), |acc, p| acc + p) / k as f64;
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut m = DMatrix::<f64>::zeros(3 * k, 4);
    for (j, (p, d)) in points.iter().zip(dirs).enumerate() {
        let q = (p - center) / scale;
        let dn = d.norm();
        let u = if dn > 0.0 { d / dn } else { *d };
        let skew = Matrix3::new(0.0, -u.z, u.y, u.z, 0.0, -u.x, -u.y, u.x, 0.0);
        let pxd = q.cross(&u);
        for r in 0..3 {
            for c in 0..3 {
                m[(3 * j + r, c)] = -skew[(r, c)];
            }
            m[(3 * j + r, 3)] = -pxd[r];
        }
    }
    let svd = m.svd(false, true);
    let (idx, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, s)| (i, *s))
        .unwrap_or((0, 0.0));
    let point = svd.v_t.as_ref().and_then(|vt| {
        let row = vt.row(idx);
        let w = row[3];
        let c = Point::new(row[0], row[1], row[2]);
        if w.abs() > 1e-12 * c.norm().max(1.0) {
            Some(c / w * scale + center)
        } else {
            None
        }
    });
    Concurrency { residual: smin, point }
}

/// Affine coordinates `(x, y)` of `p` in the frame `(o; e1, e2)`, with the
/// distance of `p` from the frame plane.
pub fn affine_coords(o: &Point, e1: &Point, e2: &Point, p: &Point) -> Option<(f64, f64, f64)> {
    let hit = intersect_lines(o, e1, p, e2)?;
    // p = o + x e1 + y e2  <=>  o + x e1 = p - y e2
    Some((hit.s, -hit.r, hit.residual))
}
