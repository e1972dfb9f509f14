//! Construction of deformable nets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FaceLabel, Result};
use crate::geom::{affine_coords, sin_angle, Point};
use crate::net::{rel_diff, validate, Net, Quad, Side, Tolerances};
use crate::ratios::{face_table_entries, h_side, opposite_ratio, simple_ratio_points, v_side};

/// Which index plays the role of `i` in `P_ij = a_i + sigma_i b_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `P_ij = a_i + sigma_i b_j`.
    #[default]
    Rows,
    /// `P_ij = a_j + sigma_j b_i`.
    Cols,
}

/// Data of a cone-cylinder net `P_ij = a_i + sigma_i b_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeCylinderData {
    pub a: Vec<Point>,
    pub sigma: Vec<f64>,
    pub b: Vec<Point>,
    pub direction: Direction,
    pub dim: usize,
}

impl ConeCylinderData {
    pub fn new(a: Vec<Point>, sigma: Vec<f64>, b: Vec<Point>, direction: Direction, dim: usize) -> Result<Self> {
        if a.len() != sigma.len() {
            return Err(Error::Input(format!("{} points a_i but {} values sigma_i", a.len(), sigma.len())));
        }
        if a.len() < 2 || b.len() < 2 {
            return Err(Error::Input("need at least two a_i and two b_j".into()));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::Input(format!("dim must be 2 or 3, got {dim}")));
        }
        for (i, s) in sigma.iter().enumerate() {
            if !s.is_finite() || *s == 0.0 {
                return Err(Error::Input(format!("sigma_{i} = {s} must be finite and nonzero")));
            }
        }
        Ok(Self { a, sigma, b, direction, dim })
    }

    /// `P_ij` in the data's own indexing (before any transposition).
    pub fn point(&self, i: usize, j: usize) -> Point {
        self.a[i] + self.b[j] * self.sigma[i]
    }

    /// Apex `c_i = (sigma_{i+1} a_i - sigma_i a_{i+1}) / (sigma_{i+1} - sigma_i)`
    /// of strip `i`; `None` for a cylinder.
    pub fn apex(&self, i: usize) -> Option<Point> {
        let (s0, s1) = (self.sigma[i], self.sigma[i + 1]);
        if s0 == s1 {
            return None;
        }
        Some((self.a[i] * s1 - self.a[i + 1] * s0) / (s1 - s0))
    }
}

fn net_from_rows(rows: usize, cols: usize, dim: usize, direction: Direction, f: impl Fn(usize, usize) -> Point) -> Result<Net> {
    let net = Net::from_fn(rows, cols, dim, f)?;
    Ok(match direction {
        Direction::Rows => net,
        Direction::Cols => net.transpose(),
    })
}

/// `P_ij = a_i + sigma_i b_j` (transposed for [`Direction::Cols`]), validated.
pub fn gen_cone_cylinder(data: &ConeCylinderData, tol: &Tolerances) -> Result<Net> {
    let net = net_from_rows(data.a.len() - 1, data.b.len() - 1, data.dim, data.direction, |i, j| data.point(i, j))?;
    net.validated(tol)
}

fn extract_rows(net: &Net) -> (ConeCylinderData, f64) {
    let b: Vec<Point> = (0..=net.n()).map(|j| net.p(0, j)).collect();
    let mut a = Vec::with_capacity(net.m() + 1);
    let mut sigma = Vec::with_capacity(net.m() + 1);
    let db: Vec<Point> = (0..net.n()).map(|j| b[j + 1] - b[j]).collect();
    let den: f64 = db.iter().map(|d| d.norm_squared()).sum();
    for i in 0..=net.m() {
        let num: f64 = (0..net.n()).map(|j| (net.p(i, j + 1) - net.p(i, j)).dot(&db[j])).sum();
        let s = if i == 0 { 1.0 } else { num / den };
        sigma.push(s);
        a.push(net.p(i, 0) - b[0] * s);
    }
    let scale = net.median_edge_length();
    let mut worst: f64 = 0.0;
    for i in 0..=net.m() {
        for j in 0..=net.n() {
            worst = worst.max((net.p(i, j) - (a[i] + b[j] * sigma[i])).norm() / scale);
        }
    }
    (ConeCylinderData { a, sigma, b, direction: Direction::Rows, dim: net.dim() }, worst)
}

/// Recovers `(a, sigma, b)` with the gauge `sigma_0 = 1`, `b_j = P_0j`, `a_0 = 0`.
pub fn extract_cone_cylinder_data(net: &Net, tol: &Tolerances) -> Result<ConeCylinderData> {
    let (rows, r1) = extract_rows(net);
    if r1 <= tol.eps_concurrency && rows.sigma.iter().all(|s| *s != 0.0) {
        return Ok(rows);
    }
    let (mut cols, r2) = extract_rows(&net.transpose());
    if r2 <= tol.eps_concurrency && cols.sigma.iter().all(|s| *s != 0.0) {
        cols.direction = Direction::Cols;
        return Ok(cols);
    }
    Err(Error::NotConeCylinder { residual: r1.min(r2) })
}

/// The unique convex quad `ABCD` with the given opposite ratios with respect to
/// `AB` and `BC`.
pub fn quad_from_ratios(a: &Point, b: &Point, c: &Point, r_ab: f64, r_bc: f64, tol: &Tolerances) -> Result<Quad> {
    for (what, r) in [("r_AB", r_ab), ("r_BC", r_bc)] {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositive { what: what.into(), value: r });
        }
    }
    if sin_angle(&(b - a), &(c - a)) <= tol.eps_parallel.max(1e-12) {
        return Err(Error::Collinear("A, B, C".into()));
    }
    // r_AB = (AQ/CQ)(BQ/DQ), r_BC = (BQ/DQ)/(AQ/CQ)
    let ac = (r_ab / r_bc).sqrt();
    let bd = (r_ab * r_bc).sqrt();
    let q = a + (c - a) * (ac / (1.0 + ac));
    let d = q + (q - b) / bd;
    Ok(Quad::new(*a, *b, *c, d))
}

/// Class and variant for the `2 x 2` completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoByTwoClass {
    /// Affine symmetric pairs `(0,0),(0,1)` and `(1,0),(1,1)` (`Rows`) or
    /// `(0,0),(1,0)` and `(0,1),(1,1)` (`Cols`).
    I(Direction),
    II,
}

fn affine_image(o: &Point, e1: &Point, from: &Point, to: &Point, p: &Point, tol: &Tolerances) -> Result<Point> {
    let (x, y, res) = affine_coords(o, e1, &(from - o), p).ok_or(Error::Collinear("affine frame".into()))?;
    let scale = e1.norm().max((from - o).norm());
    if res > tol.eps_planar * scale {
        return Err(Error::NonPlanar { face: FaceLabel(None), residual: res / scale });
    }
    Ok(o + e1 * x + (to - o) * y)
}

/// Completes a `2 x 2` net from its faces `(0,0) = f1` and `(1,1) = f3`, which
/// share only `P_11`.
pub fn build_2x2_from_opposite_faces(f1: &Quad, f3: &Quad, class: TwoByTwoClass, tol: &Tolerances) -> Result<Net> {
    f1.check(tol)?;
    f3.check(tol)?;
    let scale = f1.mean_edge_length().max(f3.mean_edge_length());
    if (f1.c - f3.a).norm() > tol.eps_planar * scale {
        return Err(Error::Input("faces (0,0) and (1,1) must share P_11".into()));
    }
    let (p00, p10, p11, p01) = (f1.a, f1.b, f1.c, f1.d);
    let (p21, p22, p12) = (f3.b, f3.c, f3.d);
    let (p20, p02) = match class {
        TwoByTwoClass::II => {
            let q10 = quad_from_ratios(&p21, &p11, &p10, opposite_ratio(f3, Side::AB, tol)?, opposite_ratio(f1, Side::BC, tol)?, tol)?;
            let q01 = quad_from_ratios(&p01, &p11, &p12, opposite_ratio(f1, Side::CD, tol)?, opposite_ratio(f3, Side::DA, tol)?, tol)?;
            (q10.d, q01.d)
        }
        TwoByTwoClass::I(Direction::Cols) => (
            affine_image(&p10, &(p11 - p10), &p01, &p21, &p00, tol)?,
            affine_image(&p12, &(p11 - p12), &p21, &p01, &p22, tol)?,
        ),
        TwoByTwoClass::I(Direction::Rows) => (
            affine_image(&p11, &(p21 - p11), &p12, &p10, &p22, tol)?,
            affine_image(&p11, &(p01 - p11), &p10, &p12, &p00, tol)?,
        ),
    };
    let pts = [[p00, p01, p02], [p10, p11, p12], [p20, p21, p22]];
    Net::from_fn(2, 2, if f1.a.z == 0.0 && pts.iter().flatten().all(|p| p.z == 0.0) { 2 } else { 3 }, |i, j| pts[i][j])?
        .validated(tol)
}

/// Vertices `P_ij` with `min(i, j) <= 1` of an `m x n` net.
#[derive(Clone, Debug, PartialEq)]
pub struct LShapedNet {
    pub m: usize,
    pub n: usize,
    pub dim: usize,
    pub points: BTreeMap<(usize, usize), Point>,
}

impl LShapedNet {
    pub fn new(m: usize, n: usize, dim: usize, points: BTreeMap<(usize, usize), Point>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidNet(format!("m and n must be positive, got {m}x{n}")));
        }
        for i in 0..=m {
            for j in 0..=n {
                let inside = i.min(j) <= 1;
                match (inside, points.get(&(i, j))) {
                    (true, None) => return Err(Error::Input(format!("L-shape is missing vertex ({i},{j})"))),
                    (false, Some(_)) => return Err(Error::Input(format!("vertex ({i},{j}) is outside the L-shape"))),
                    (true, Some(p)) if !p.iter().all(|x| x.is_finite()) => return Err(Error::NonFinite { i, j }),
                    _ => {}
                }
            }
        }
        if let Some((i, j)) = points.keys().find(|(i, j)| *i > m || *j > n) {
            return Err(Error::IndexOutOfRange { i: *i, j: *j, m, n });
        }
        Ok(Self { m, n, dim, points })
    }

    pub fn from_net(net: &Net) -> Self {
        let mut points = BTreeMap::new();
        for i in 0..=net.m() {
            for j in 0..=net.n() {
                if i.min(j) <= 1 {
                    points.insert((i, j), net.p(i, j));
                }
            }
        }
        Self { m: net.m(), n: net.n(), dim: net.dim(), points }
    }

    pub fn p(&self, i: usize, j: usize) -> Point {
        self.points[&(i, j)]
    }

    /// Face `(i, j)` with `min(i, j) = 0`.
    pub fn face(&self, i: usize, j: usize) -> Quad {
        Quad {
            a: self.p(i, j),
            b: self.p(i + 1, j),
            c: self.p(i + 1, j + 1),
            d: self.p(i, j + 1),
            origin: Some((i, j)),
        }
    }

    pub fn faces(&self) -> Vec<Quad> {
        let mut out: Vec<Quad> = (0..self.n).map(|j| self.face(0, j)).collect();
        out.extend((1..self.m).map(|i| self.face(i, 0)));
        out
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.n,
            n: self.m,
            dim: self.dim,
            points: self.points.iter().map(|((i, j), p)| ((*j, *i), *p)).collect(),
        }
    }
}

/// Class used to extend the `H`/`V` tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionClass {
    /// Class (i), direction detected from the L-shape (rows preferred).
    I,
    IRows,
    ICols,
    #[serde(rename = "ii")]
    II,
}

fn pair_residual(o: &Point, a_prev: &Point, b_f: &Point, a_common: &Point, b_g: &Point, a_next: &Point, tol: &Tolerances) -> Result<f64> {
    let lf = simple_ratio_points(o, a_prev, b_f, a_common, tol)?;
    let mf = simple_ratio_points(o, a_common, b_f, a_prev, tol)?;
    let lg = simple_ratio_points(o, a_common, b_g, a_next, tol)?;
    let mg = simple_ratio_points(o, a_next, b_g, a_common, tol)?;
    Ok(rel_diff(lf, mg).max(rel_diff(mf, lg)))
}

/// Worst row-pair residual along row 0 of the L-shape, with the offending face.
fn l_row_residual(l: &LShapedNet, tol: &Tolerances) -> Result<(f64, (usize, usize))> {
    let mut worst = (0.0, (0, 0));
    for j in 0..l.n.saturating_sub(1) {
        let r = pair_residual(&l.p(0, j + 1), &l.p(0, j), &l.p(1, j), &l.p(1, j + 1), &l.p(1, j + 2), &l.p(0, j + 2), tol)?;
        if r > worst.0 {
            worst = (r, (0, j + 1));
        }
    }
    Ok(worst)
}

#[allow(non_snake_case)]
pub fn complete_L(l: &LShapedNet, class: CompletionClass, tol: &Tolerances) -> Result<Net> {
    let (m, n) = (l.m, l.n);
    for q in l.faces() {
        q.check(tol)?;
    }
    let mut h = vec![vec![f64::NAN; n]; m];
    let mut v = vec![vec![f64::NAN; n]; m];
    for q in l.faces() {
        let (i, j) = q.origin.expect("labeled");
        let (hv, vv) = face_table_entries(&q, i, j, tol)?;
        h[i][j] = hv;
        v[i][j] = vv;
    }
    let eps = tol.eps_concurrency;
    let class = match class {
        CompletionClass::I => {
            let (rr, rf) = l_row_residual(l, tol)?;
            let (cr, cf) = l_row_residual(&l.transpose(), tol)?;
            if rr <= eps {
                CompletionClass::IRows
            } else if cr <= eps {
                CompletionClass::ICols
            } else {
                let (residual, (i, j)) = if rr <= cr { (rr, rf) } else { (cr, (cf.1, cf.0)) };
                return Err(Error::ClassCondition { class: "i", location: format!("face ({i},{j})"), residual });
            }
        }
        c => c,
    };
    match class {
        CompletionClass::IRows | CompletionClass::ICols => {
            let (res, (i, j)) = if class == CompletionClass::IRows {
                l_row_residual(l, tol)?
            } else {
                let (r, f) = l_row_residual(&l.transpose(), tol)?;
                (r, (f.1, f.0))
            };
            if res > eps {
                return Err(Error::ClassCondition { class: "i", location: format!("face ({i},{j})"), residual: res });
            }
        }
        _ => {
            for i in 1..m {
                let r = rel_diff(h[i][0], h[i - 1][0]);
                if r > eps {
                    return Err(Error::ClassCondition { class: "ii", location: format!("face ({i},0)"), residual: r });
                }
            }
            for j in 1..n {
                let r = rel_diff(v[0][j], v[0][j - 1]);
                if r > eps {
                    return Err(Error::ClassCondition { class: "ii", location: format!("face (0,{j})"), residual: r });
                }
            }
        }
    }
    for i in 1..m {
        for j in 1..n {
            let (hi, vi) = match class {
                CompletionClass::IRows => (h[i][0], v[i][0]),
                CompletionClass::ICols => (h[0][j], v[0][j]),
                _ => (h[0][j], v[i][0]),
            };
            h[i][j] = hi;
            v[i][j] = vi;
        }
    }

    let mut pts = l.points.clone();
    for i in 1..m {
        for j in 1..n {
            let a = pts[&(i + 1, j)];
            let b = pts[&(i, j)];
            let c = pts[&(i, j + 1)];
            // left side P_ij P_{i+1,j} and bottom side P_ij P_{i,j+1}
            let r_left = if v_side(j) == Side::AB { v[i][j] } else { 1.0 / v[i][j] };
            let r_bottom = if h_side(i) == Side::DA { h[i][j] } else { 1.0 / h[i][j] };
            let q = quad_from_ratios(&a, &b, &c, r_left, r_bottom, tol).map_err(|e| match e {
                Error::Collinear(_) => Error::Degenerate {
                    face: FaceLabel(Some((i, j))),
                    reason: "completion triple is collinear".into(),
                },
                other => other,
            })?;
            pts.insert((i + 1, j + 1), q.d);
        }
    }
    let net = Net::from_fn(m, n, l.dim, |i, j| pts[&(i, j)])?;
    validate(&net, tol).into_result()?;
    Ok(net)
}

/// Class-(ii) L-shape from its face `(0,0) = [P00, P10, P11, P01]` and one free
/// point and one free opposite ratio per further face.
///
/// `row[k]` for face `(0, k+1)` is `(P_{0,k+2}, r)` with `r` the opposite ratio
/// with respect to `P_{0,k+1} P_{0,k+2}`; `col[k]` for face `(k+1, 0)` is
/// `(P_{k+2,0}, r)` with `r` taken with respect to `P_{k+1,0} P_{k+2,0}`.
pub fn l_shape_class_ii(face00: [Point; 4], row: &[(Point, f64)], col: &[(Point, f64)], dim: usize, tol: &Tolerances) -> Result<LShapedNet> {
    let (m, n) = (col.len() + 1, row.len() + 1);
    let mut pts = BTreeMap::new();
    pts.insert((0, 0), face00[0]);
    pts.insert((1, 0), face00[1]);
    pts.insert((1, 1), face00[2]);
    pts.insert((0, 1), face00[3]);
    let face = |pts: &BTreeMap<(usize, usize), Point>, i: usize, j: usize| Quad {
        a: pts[&(i, j)],
        b: pts[&(i + 1, j)],
        c: pts[&(i + 1, j + 1)],
        d: pts[&(i, j + 1)],
        origin: Some((i, j)),
    };
    for (k, (p, r)) in row.iter().enumerate() {
        let j = k + 1;
        let prev = face(&pts, 0, j - 1);
        let shared = opposite_ratio(&prev, Side::CD, tol)?;
        let q = quad_from_ratios(p, &pts[&(0, j)], &pts[&(1, j)], *r, shared, tol)?;
        pts.insert((0, j + 1), *p);
        pts.insert((1, j + 1), q.d);
    }
    for (k, (p, r)) in col.iter().enumerate() {
        let i = k + 1;
        let prev = face(&pts, i - 1, 0);
        let shared = opposite_ratio(&prev, Side::BC, tol)?;
        let q = quad_from_ratios(p, &pts[&(i, 0)], &pts[&(i, 1)], *r, shared, tol)?;
        pts.insert((i + 1, 0), *p);
        pts.insert((i + 1, 1), q.d);
    }
    let l = LShapedNet::new(m, n, dim, pts)?;
    for q in l.faces() {
        q.check(tol)?;
    }
    Ok(l)
}

/// Class-(i) L-shape whose strip `i in {0, 1}` consists of affine symmetric
/// neighbours (`Rows`), or the transposed construction (`Cols`).
///
/// For `Rows`: `row[k] = P_{0,k+2}` fixes face `(0,k+1)` as the mirror image of
/// face `(0,k)`; `col[k] = (P_{k+2,0}, P_{k+2,1})` are free.
pub fn l_shape_class_i(face00: [Point; 4], row: &[Point], col: &[(Point, Point)], direction: Direction, dim: usize, tol: &Tolerances) -> Result<LShapedNet> {
    if direction == Direction::Cols {
        let f = [face00[0], face00[3], face00[2], face00[1]];
        return Ok(l_shape_class_i(f, row, col, Direction::Rows, dim, tol)?.transpose());
    }
    let (m, n) = (col.len() + 1, row.len() + 1);
    let mut pts = BTreeMap::new();
    pts.insert((0, 0), face00[0]);
    pts.insert((1, 0), face00[1]);
    pts.insert((1, 1), face00[2]);
    pts.insert((0, 1), face00[3]);
    for (k, p) in row.iter().enumerate() {
        let j = k + 1;
        let o = pts[&(0, j)];
        let e1 = pts[&(1, j)] - o;
        let img = affine_image(&o, &e1, &pts[&(0, j - 1)], p, &pts[&(1, j - 1)], tol)?;
        pts.insert((0, j + 1), *p);
        pts.insert((1, j + 1), img);
    }
    for (k, (p, q)) in col.iter().enumerate() {
        pts.insert((k + 2, 0), *p);
        pts.insert((k + 2, 1), *q);
    }
    let l = LShapedNet::new(m, n, dim, pts)?;
    for q in l.faces() {
        q.check(tol)?;
    }
    Ok(l)
}

/// Input of [`gen_doubled_cone_cylinder`].
///
/// Even columns `2k` form the cone-cylinder net `even` (direction `Rows`);
/// odd columns start at `odd_row0[k] = P_{0,2k+1}` and continue by
/// `P_{i+1,c} = x + kappa_i (H_i(x) - x)` with `x = P_{i,c}` and `H_i` the
/// similarity carrying even row `i` to even row `i+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubledSeed {
    pub even: ConeCylinderData,
    pub odd_row0: Vec<Point>,
    pub kappa: Vec<f64>,
}

pub fn gen_doubled_cone_cylinder(seed: &DoubledSeed, tol: &Tolerances) -> Result<Net> {
    let e = &seed.even;
    let m = e.a.len() - 1;
    let k_even = e.b.len();
    let k_odd = seed.odd_row0.len();
    if k_odd + 1 != k_even && k_odd != k_even {
        return Err(Error::Input(format!(
            "{k_even} even columns need {} or {k_even} odd anchors, got {k_odd}",
            k_even - 1
        )));
    }
    if seed.kappa.len() != m {
        return Err(Error::Input(format!("need {m} kappa values, got {}", seed.kappa.len())));
    }
    let n = k_even + k_odd - 1;
    let mut odd: Vec<Vec<Point>> = vec![seed.odd_row0.clone()];
    for i in 0..m {
        let ratio = e.sigma[i + 1] / e.sigma[i];
        let next: Vec<Point> = odd[i]
            .iter()
            .map(|x| {
                let hx = e.a[i + 1] + (x - e.a[i]) * ratio;
                x + (hx - x) * seed.kappa[i]
            })
            .collect();
        odd.push(next);
    }
    let net = net_from_rows(m, n, e.dim, e.direction, |i, c| {
        if c % 2 == 0 {
            e.point(i, c / 2)
        } else {
            odd[i][c / 2]
        }
    })?;
    net.validated(tol)
}
