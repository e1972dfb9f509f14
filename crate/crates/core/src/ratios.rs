//! Simple ratios, opposite ratios, local ratio frames and the `H`/`V` tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, FaceLabel, Result};
use crate::geom::Point;
use crate::net::{Net, Quad, Side, Tolerances};

/// Diagonal intersection data of a convex quad.
///
/// `QA = alpha e1`, `QB = beta e2`, `QC = gamma e1`, `QD = delta e2` with the
/// diagonal directions scaled so that `alpha beta gamma delta = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceGeometry {
    pub q: Point,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub e1: Point,
    pub e2: Point,
    /// `Q = A + s (C - A)`.
    pub s: f64,
    /// `Q = B + r (D - B)`.
    pub r: f64,
}

pub fn diagonal_intersection(q: &Quad, tol: &Tolerances) -> Result<FaceGeometry> {
    q.check(tol)?;
    let (s, r) = q.diagonal_params().ok_or(Error::Degenerate {
        face: q.label(),
        reason: "diagonals are parallel".into(),
    })?;
    let lambda = (s * (1.0 - s) * r * (1.0 - r)).sqrt().sqrt();
    let point = q.a + (q.c - q.a) * s;
    Ok(FaceGeometry {
        q: point,
        alpha: -s / lambda,
        beta: -r / lambda,
        gamma: (1.0 - s) / lambda,
        delta: (1.0 - r) / lambda,
        e1: (q.c - q.a) * lambda,
        e2: (q.d - q.b) * lambda,
        s,
        r,
    })
}

/// `(XQ * YQ) / (ZQ * WQ)` for side `XY` with opposite side `ZW`.
pub fn opposite_ratio(q: &Quad, side: Side, tol: &Tolerances) -> Result<f64> {
    let g = diagonal_intersection(q, tol)?;
    Ok(opposite_ratio_from_params(g.s, g.r, side))
}

pub(crate) fn opposite_ratio_from_params(s: f64, r: f64, side: Side) -> f64 {
    // AQ = s|AC|, CQ = (1-s)|AC|, BQ = r|BD|, DQ = (1-r)|BD|
    let ab = s * r / ((1.0 - s) * (1.0 - r));
    let bc = r * (1.0 - s) / ((1.0 - r) * s);
    match side {
        Side::AB => ab,
        Side::BC => bc,
        Side::CD => 1.0 / ab,
        Side::DA => 1.0 / bc,
    }
}

/// Simple ratio of `ABCD` with respect to the oriented side `AB`.
///
/// With `R = A + lambda (B - A)` the meeting point of lines `AB` and `CD`, the
/// value is `-1 / lambda`; it is 0 when `AB` is parallel to `CD`. The value is
/// independent of the normal used, since it is a ratio of two cross products.
pub fn simple_ratio_points(a: &Point, b: &Point, c: &Point, d: &Point, tol: &Tolerances) -> Result<f64> {
    let n = (c - a).cross(&(d - b));
    let dc = d - c;
    let den = n.dot(&(c - a).cross(&dc));
    if !(den.abs() > 0.0) || !den.is_finite() {
        return Err(Error::Degenerate { face: FaceLabel(None), reason: "side collinear with opposite side".into() });
    }
    let value = -n.dot(&(b - a).cross(&dc)) / den;
    // |lambda| > 1 / eps is the parallel case
    if value.abs() < tol.eps_concurrency {
        return Ok(0.0);
    }
    Ok(value)
}

/// Simple ratio of `q` with respect to the oriented side `side` (traversed in
/// the quad's own direction).
pub fn simple_ratio(q: &Quad, side: Side, tol: &Tolerances) -> Result<f64> {
    q.check(tol)?;
    let r = q.rotated(side);
    simple_ratio_points(&r.a, &r.b, &r.c, &r.d, tol).map_err(|_| Error::Degenerate {
        face: q.label(),
        reason: format!("side {side:?} is degenerate"),
    })
}

/// `(AQ/CQ, BQ/DQ)` from the triangle areas `[AQB, BQC, CQD, DQA]`.
pub fn lengths_from_opposite_ratios(areas: [f64; 4]) -> Result<(f64, f64)> {
    for (k, a) in areas.iter().enumerate() {
        if !(*a > 0.0) {
            return Err(Error::NonPositive { what: format!("triangle area {k}"), value: *a });
        }
    }
    let [aqb, bqc, cqd, dqa] = areas;
    Ok(((aqb / cqd * dqa / bqc).sqrt(), (aqb / cqd * bqc / dqa).sqrt()))
}

/// Unsigned areas `[AQB, BQC, CQD, DQA]` of the four triangles around the
/// diagonal intersection.
pub fn diagonal_triangle_areas(q: &Quad, tol: &Tolerances) -> Result<[f64; 4]> {
    let g = diagonal_intersection(q, tol)?;
    let v = q.vertices();
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = 0.5 * (v[k] - g.q).cross(&(v[(k + 1) % 4] - g.q)).norm();
    }
    Ok(out)
}

/// Simple ratios around an interior vertex `O = P_ij`.
///
/// Neighbors `A_1..A_4 = P_{i+1,j}, P_{i,j+1}, P_{i-1,j}, P_{i,j-1}`; face
/// `f_k = O A_k B_k A_{k+1}`. `l_k` is the simple ratio of `f_k` with respect to
/// `OA_k`, and `m_k` that of `O A_{k+1} B_k A_k` with respect to `OA_{k+1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimpleRatioFrame {
    pub l: [f64; 4],
    pub m: [f64; 4],
    pub center: (usize, usize),
}

impl SimpleRatioFrame {
    /// Frame whose `f_1` is this frame's `f_{1+shift}`.
    pub fn rotated(&self, shift: usize) -> Self {
        let mut l = [0.0; 4];
        let mut m = [0.0; 4];
        for k in 0..4 {
            l[k] = self.l[(k + shift) % 4];
            m[k] = self.m[(k + shift) % 4];
        }
        Self { l, m, center: self.center }
    }

    /// Opposite ratio of `f_k` with respect to `OA_{k+1}`: `(1 - m l) / (1 + l)^2`.
    pub fn opposite_ratio_next(&self, k: usize) -> f64 {
        let (l, m) = (self.l[k], self.m[k]);
        (1.0 - m * l) / ((1.0 + l) * (1.0 + l))
    }

    /// Opposite ratio of `f_k` with respect to `OA_k`: `(1 - m l) / (1 + m)^2`.
    pub fn opposite_ratio_prev(&self, k: usize) -> f64 {
        let (l, m) = (self.l[k], self.m[k]);
        (1.0 - m * l) / ((1.0 + m) * (1.0 + m))
    }
}

/// The four faces around `O` as `(O, A_k, B_k, A_{k+1})`.
pub fn star(net: &Net, i: usize, j: usize) -> Result<[[Point; 4]; 4]> {
    if i == 0 || j == 0 || i >= net.m() || j >= net.n() {
        return Err(Error::BoundaryVertex { i, j });
    }
    let o = net.p(i, j);
    let a = [net.p(i + 1, j), net.p(i, j + 1), net.p(i - 1, j), net.p(i, j - 1)];
    let b = [net.p(i + 1, j + 1), net.p(i - 1, j + 1), net.p(i - 1, j - 1), net.p(i + 1, j - 1)];
    Ok([0, 1, 2, 3].map(|k| [o, a[k], b[k], a[(k + 1) % 4]]))
}

/// Net face index of `f_k` around `P_ij`.
pub fn star_face_index(i: usize, j: usize, k: usize) -> (usize, usize) {
    match k {
        0 => (i, j),
        1 => (i - 1, j),
        2 => (i - 1, j - 1),
        _ => (i, j - 1),
    }
}

pub fn local_frame(net: &Net, i: usize, j: usize, tol: &Tolerances) -> Result<SimpleRatioFrame> {
    let faces = star(net, i, j)?;
    let mut l = [0.0; 4];
    let mut m = [0.0; 4];
    for (k, f) in faces.iter().enumerate() {
        let label = FaceLabel(Some(star_face_index(i, j, k)));
        let quad = Quad { origin: label.0, ..Quad::new(f[0], f[1], f[2], f[3]) };
        quad.check(tol)?;
        let (lk, mk) = face_simple_ratios(f, tol).map_err(|_| Error::Degenerate {
            face: label,
            reason: "simple ratio undefined".into(),
        })?;
        check_frame_invariant(lk, mk, label)?;
        l[k] = lk;
        m[k] = mk;
    }
    Ok(SimpleRatioFrame { l, m, center: (i, j) })
}

/// `(l, m)` of the face `O A B A'` with respect to `OA` and `OA'`.
pub fn face_simple_ratios(f: &[Point; 4], tol: &Tolerances) -> Result<(f64, f64)> {
    let [o, a, b, a2] = f;
    Ok((simple_ratio_points(o, a, b, a2, tol)?, simple_ratio_points(o, a2, b, a, tol)?))
}

fn check_frame_invariant(l: f64, m: f64, face: FaceLabel) -> Result<()> {
    let checks = [(l + 1.0, "l + 1"), (m + 1.0, "m + 1"), (1.0 - l * m, "1 - l m")];
    for (v, what) in checks {
        if !(v > 0.0) {
            return Err(Error::FrameInvariant { face, detail: format!("{what} = {v} is not positive") });
        }
    }
    Ok(())
}

/// The `H` and `V` tables of opposite ratios, indexed `[i][j]` by face.
///
/// `H[i][j]` is taken with respect to the side `P_ij P_{i,j+1}` for even `i`
/// and `P_{i+1,j} P_{i+1,j+1}` for odd `i`; `V[i][j]` with respect to
/// `P_ij P_{i+1,j}` for even `j` and `P_{i,j+1} P_{i+1,j+1}` for odd `j`. With
/// this alternation, equal neighbouring entries mean equal opposite ratios
/// across the shared edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OppositeRatioTables {
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "V")]
    pub v: Vec<Vec<f64>>,
}

/// Side of face `(i, j)` (as labeled by [`Net::face`]) that anchors `H[i][j]`.
pub fn h_side(i: usize) -> Side {
    if i % 2 == 0 {
        Side::DA
    } else {
        Side::BC
    }
}

/// Side of face `(i, j)` that anchors `V[i][j]`.
pub fn v_side(j: usize) -> Side {
    if j % 2 == 0 {
        Side::AB
    } else {
        Side::CD
    }
}

pub fn face_table_entries(q: &Quad, i: usize, j: usize, tol: &Tolerances) -> Result<(f64, f64)> {
    let g = diagonal_intersection(q, tol)?;
    Ok((
        opposite_ratio_from_params(g.s, g.r, h_side(i)),
        opposite_ratio_from_params(g.s, g.r, v_side(j)),
    ))
}

#[allow(non_snake_case)]
pub fn tables_HV(net: &Net, tol: &Tolerances) -> Result<OppositeRatioTables> {
    let mut h = vec![vec![0.0; net.n()]; net.m()];
    let mut v = vec![vec![0.0; net.n()]; net.m()];
    for q in net.faces() {
        let (i, j) = q.origin.expect("labeled");
        let (hv, vv) = face_table_entries(&q, i, j, tol)?;
        h[i][j] = hv;
        v[i][j] = vv;
    }
    Ok(OppositeRatioTables { h, v })
}

impl OppositeRatioTables {
    /// Max relative deviation of `t[i][j]` from `t[0][j]` (all rows equal).
    pub fn rows_equal_residual(t: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in t.iter().skip(1) {
            for (j, x) in row.iter().enumerate() {
                worst = worst.max(crate::net::rel_diff(*x, t[0][j]));
            }
        }
        worst
    }

    /// Max relative deviation of `t[i][j]` from `t[i][0]` (all columns equal).
    pub fn cols_equal_residual(t: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in t {
            for x in row.iter().skip(1) {
                worst = worst.max(crate::net::rel_diff(*x, row[0]));
            }
        }
        worst
    }
}
