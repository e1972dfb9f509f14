//! Nets, faces, oriented areas and validation.

use crate::error::{Error, FaceLabel, Result};
use crate::geom::{canonical_unit, intersect_lines, sin_angle, Point};

/// Numerical tolerances. All comparisons are relative to a local length or
/// area scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub eps_planar: f64,
    pub eps_parallel: f64,
    pub eps_area: f64,
    pub eps_concurrency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_planar: 1e-9,
            eps_parallel: 1e-9,
            eps_area: 1e-9,
            eps_concurrency: 1e-8,
        }
    }
}

impl Tolerances {
    /// Same value for every tolerance.
    pub fn uniform(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::Input(format!("tolerance must be finite and nonnegative, got {eps}")));
        }
        Ok(Self {
            eps_planar: eps,
            eps_parallel: eps,
            eps_area: eps,
            eps_concurrency: eps,
        })
    }
}

/// Relative comparison `|a - b| <= tol * max(1, |a|, |b|)`, returned as the
/// left-hand side divided by the scale.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Side of a quad `ABCD`, named by its start vertex in cyclic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    AB,
    BC,
    CD,
    DA,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::AB, Side::BC, Side::CD, Side::DA];

    pub fn index(self) -> usize {
        match self {
            Side::AB => 0,
            Side::BC => 1,
            Side::CD => 2,
            Side::DA => 3,
        }
    }

    pub fn opposite(self) -> Side {
        Side::ALL[(self.index() + 2) % 4]
    }
}

/// Four points in cyclic order, optionally labeled by their face index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub d: Point,
    pub origin: Option<(usize, usize)>,
}

impl Quad {
    pub fn new(a: Point, b: Point, c: Point, d: Point) -> Self {
        Self { a, b, c, d, origin: None }
    }

    pub fn from_xy(pts: [[f64; 2]; 4]) -> Self {
        let p = |k: usize| Point::new(pts[k][0], pts[k][1], 0.0);
        Self::new(p(0), p(1), p(2), p(3))
    }

    pub fn vertices(&self) -> [Point; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn label(&self) -> FaceLabel {
        FaceLabel(self.origin)
    }

    /// Relabels so that `side` becomes `AB`.
    pub fn rotated(&self, side: Side) -> Quad {
        let v = self.vertices();
        let k = side.index();
        Quad {
            a: v[k],
            b: v[(k + 1) % 4],
            c: v[(k + 2) % 4],
            d: v[(k + 3) % 4],
            origin: self.origin,
        }
    }

    /// Same quad traversed in the opposite direction, starting at `A`.
    pub fn reversed(&self) -> Quad {
        Quad {
            a: self.a,
            b: self.d,
            c: self.c,
            d: self.b,
            origin: self.origin,
        }
    }

    pub fn translated(&self, v: &Point) -> Quad {
        Quad {
            a: self.a + v,
            b: self.b + v,
            c: self.c + v,
            d: self.d + v,
            origin: self.origin,
        }
    }

    pub fn scaled(&self, k: f64) -> Quad {
        Quad {
            a: self.a * k,
            b: self.b * k,
            c: self.c * k,
            d: self.d * k,
            origin: self.origin,
        }
    }

    /// Vertex-wise sum.
    pub fn plus(&self, other: &Quad) -> Quad {
        Quad {
            a: self.a + other.a,
            b: self.b + other.b,
            c: self.c + other.c,
            d: self.d + other.d,
            origin: self.origin,
        }
    }

    /// Directed side vector.
    pub fn side_vector(&self, side: Side) -> Point {
        let v = self.vertices();
        let k = side.index();
        v[(k + 1) % 4] - v[k]
    }

    /// Cross product of the diagonals `AC x BD`.
    pub fn diagonal_cross(&self) -> Point {
        (self.c - self.a).cross(&(self.d - self.b))
    }

    /// Reference normal: the diagonal cross, oriented so the first significant
    /// component (z, then y, then x) is positive. In the plane this is `+z`.
    pub fn normal(&self) -> Option<Point> {
        canonical_unit(&self.diagonal_cross())
    }

    pub fn mean_edge_length(&self) -> f64 {
        Side::ALL.iter().map(|s| self.side_vector(*s).norm()).sum::<f64>() / 4.0
    }

    /// Signed area with respect to a given unit normal.
    pub fn area_wrt(&self, n: &Point) -> f64 {
        0.5 * n.dot(&self.diagonal_cross())
    }

    /// Signed area with respect to [`Quad::normal`]; no planarity check.
    pub fn signed_area(&self) -> f64 {
        match self.normal() {
            Some(n) => self.area_wrt(&n),
            None => 0.0,
        }
    }

    /// Max distance of a vertex from the best plane, over the mean edge length.
    pub fn planarity_residual(&self) -> f64 {
        let scale = self.mean_edge_length();
        let Some(n) = canonical_unit(&self.diagonal_cross()) else {
            return f64::INFINITY;
        };
        let centroid = (self.a + self.b + self.c + self.d) / 4.0;
        let dev = self
            .vertices()
            .iter()
            .map(|p| n.dot(&(p - centroid)).abs())
            .fold(0.0, f64::max);
        if scale > 0.0 {
            dev / scale
        } else {
            f64::INFINITY
        }
    }

    /// Parameters `(s, r)` of the diagonal intersection
    /// `A + s (C - A) = B + r (D - B)`.
    pub fn diagonal_params(&self) -> Option<(f64, f64)> {
        intersect_lines(&self.a, &(self.c - self.a), &self.b, &(self.d - self.b)).map(|h| (h.s, h.r))
    }

    /// Full structural check: finite, non-degenerate edges, planar, strictly convex.
    pub fn check(&self, tol: &Tolerances) -> Result<()> {
        let label = self.label();
        if self.vertices().iter().any(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(Error::Degenerate { face: label, reason: "non-finite vertex".into() });
        }
        let scale = self.mean_edge_length();
        if !(scale > 0.0) {
            return Err(Error::Degenerate { face: label, reason: "all vertices coincide".into() });
        }
        for s in Side::ALL {
            if self.side_vector(s).norm() <= tol.eps_planar * scale {
                return Err(Error::Degenerate {
                    face: label,
                    reason: format!("edge {s:?} has zero length"),
                });
            }
        }
        let res = self.planarity_residual();
        if !(res <= tol.eps_planar) {
            if res.is_infinite() {
                return Err(Error::NonConvex { face: label });
            }
            return Err(Error::NonPlanar { face: label, residual: res });
        }
        if !self.is_strictly_convex(tol) {
            return Err(Error::NonConvex { face: label });
        }
        Ok(())
    }

    /// Diagonals cross in their interiors.
    pub fn is_strictly_convex(&self, tol: &Tolerances) -> bool {
        let eps = tol.eps_planar.max(1e-14);
        match self.diagonal_params() {
            Some((s, r)) => s > eps && s < 1.0 - eps && r > eps && r < 1.0 - eps,
            None => false,
        }
    }
}

/// Oriented area in the face plane. Positive for counterclockwise order seen
/// from the reference normal [`Quad::normal`].
pub fn oriented_area(q: &Quad, tol: &Tolerances) -> Result<f64> {
    let res = q.planarity_residual();
    if !(res <= tol.eps_planar) {
        return Err(Error::NonPlanar { face: q.label(), residual: res });
    }
    Ok(q.signed_area())
}

/// Mixed area of two quads with parallel corresponding sides, measured with
/// respect to the normal of `q1`.
pub fn mixed_area(q1: &Quad, q2: &Quad, tol: &Tolerances) -> Result<f64> {
    for s in Side::ALL {
        let (u, v) = (q1.side_vector(s), q2.side_vector(s));
        if sin_angle(&u, &v) > tol.eps_parallel && v.norm() > 0.0 && u.norm() > 0.0 {
            return Err(Error::NotParallel(format!(
                "side {s:?} of {} and {} differ in direction",
                q1.label(),
                q2.label()
            )));
        }
    }
    let n = q1
        .normal()
        .or_else(|| q2.normal())
        .ok_or_else(|| Error::Degenerate { face: q1.label(), reason: "diagonals are parallel".into() })?;
    let sum = q1.plus(q2);
    Ok((sum.area_wrt(&n) - q1.area_wrt(&n) - q2.area_wrt(&n)) / 2.0)
}

/// An `m x n` grid of points with `idx(i, j) = i (n + 1) + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Net {
    m: usize,
    n: usize,
    dim: usize,
    vertices: Vec<Point>,
}

impl Net {
    pub fn new(m: usize, n: usize, dim: usize, vertices: Vec<Point>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidNet(format!("m and n must be positive, got {m}x{n}")));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidNet(format!("dim must be 2 or 3, got {dim}")));
        }
        if vertices.len() != (m + 1) * (n + 1) {
            return Err(Error::InvalidNet(format!(
                "a {m}x{n} net needs {} vertices, got {}",
                (m + 1) * (n + 1),
                vertices.len()
            )));
        }
        for (k, p) in vertices.iter().enumerate() {
            if !p.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite { i: k / (n + 1), j: k % (n + 1) });
            }
            if dim == 2 && p.z != 0.0 {
                return Err(Error::InvalidNet(format!(
                    "vertex ({},{}) of a planar net has nonzero z",
                    k / (n + 1),
                    k % (n + 1)
                )));
            }
        }
        Ok(Self { m, n, dim, vertices })
    }

    /// Builds a net from `f(i, j)`; 2D nets get their `z` cleared.
    pub fn from_fn(m: usize, n: usize, dim: usize, mut f: impl FnMut(usize, usize) -> Point) -> Result<Self> {
        let mut v = Vec::with_capacity((m + 1) * (n + 1));
        for i in 0..=m {
            for j in 0..=n {
                let mut p = f(i, j);
                if dim == 2 {
                    p.z = 0.0;
                }
                v.push(p);
            }
        }
        Self::new(m, n, dim, v)
    }

    /// Square grid `P_ij = (i, j)` in the plane.
    pub fn square_grid(m: usize, n: usize) -> Self {
        Self::from_fn(m, n, 2, |i, j| Point::new(i as f64, j as f64, 0.0)).expect("valid grid")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.n + 1) + j
    }

    /// Vertex `P_ij`. Panics when out of range.
    pub fn p(&self, i: usize, j: usize) -> Point {
        assert!(i <= self.m && j <= self.n, "vertex ({i},{j}) out of range");
        self.vertices[self.idx(i, j)]
    }

    pub fn get(&self, i: usize, j: usize) -> Result<Point> {
        if i > self.m || j > self.n {
            return Err(Error::IndexOutOfRange { i, j, m: self.m, n: self.n });
        }
        Ok(self.vertices[self.idx(i, j)])
    }

    /// Face `(P_ij, P_{i+1,j}, P_{i+1,j+1}, P_{i,j+1})` labeled `(i, j)`.
    pub fn face(&self, i: usize, j: usize) -> Result<Quad> {
        if i >= self.m || j >= self.n {
            return Err(Error::IndexOutOfRange { i, j, m: self.m, n: self.n });
        }
        Ok(self.face_unchecked(i, j))
    }

    pub(crate) fn face_unchecked(&self, i: usize, j: usize) -> Quad {
        Quad {
            a: self.p(i, j),
            b: self.p(i + 1, j),
            c: self.p(i + 1, j + 1),
            d: self.p(i, j + 1),
            origin: Some((i, j)),
        }
    }

    pub fn faces(&self) -> impl Iterator<Item = Quad> + '_ {
        (0..self.m).flat_map(move |i| (0..self.n).map(move |j| self.face_unchecked(i, j)))
    }

    /// Swaps the roles of `i` and `j`.
    pub fn transpose(&self) -> Net {
        Net::from_fn(self.n, self.m, self.dim, |i, j| self.p(j, i)).expect("transpose of a valid net")
    }

    /// Applies `f` to every vertex. A 2D net stays 2D only if `f` keeps `z = 0`.
    pub fn map(&self, f: impl Fn(&Point) -> Point) -> Result<Net> {
        let v: Vec<Point> = self.vertices.iter().map(f).collect();
        let dim = if self.dim == 2 && v.iter().all(|p| p.z == 0.0) { 2 } else { 3 };
        Net::new(self.m, self.n, dim, v)
    }

    pub fn translated(&self, t: &Point) -> Net {
        self.map(|p| p + t).expect("translation keeps the net valid")
    }

    /// Same vertices viewed as a 3D net.
    pub fn lifted(&self) -> Net {
        Net { dim: 3, ..self.clone() }
    }

    /// Sub-net with vertex ranges `i0..=i1`, `j0..=j1`.
    pub fn subnet(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> Result<Net> {
        if i1 > self.m || j1 > self.n || i0 >= i1 || j0 >= j1 {
            return Err(Error::IndexOutOfRange { i: i1, j: j1, m: self.m, n: self.n });
        }
        Net::from_fn(i1 - i0, j1 - j0, self.dim, |i, j| self.p(i0 + i, j0 + j))
    }

    /// Median edge length, used as a length scale.
    pub fn median_edge_length(&self) -> f64 {
        let mut e = Vec::new();
        for i in 0..=self.m {
            for j in 0..=self.n {
                if i < self.m {
                    e.push((self.p(i + 1, j) - self.p(i, j)).norm());
                }
                if j < self.n {
                    e.push((self.p(i, j + 1) - self.p(i, j)).norm());
                }
            }
        }
        crate::geom::median(&e)
    }

    /// Max vertex distance to another net of the same shape.
    pub fn max_vertex_distance(&self, other: &Net) -> Result<f64> {
        same_shape(self, other)?;
        Ok(self
            .vertices
            .iter()
            .zip(&other.vertices)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Errors with the first failing face, if any.
    pub fn validated(self, tol: &Tolerances) -> Result<Self> {
        validate(&self, tol).into_result()?;
        Ok(self)
    }
}

pub(crate) fn same_shape(a: &Net, b: &Net) -> Result<()> {
    if a.m != b.m || a.n != b.n {
        return Err(Error::ShapeMismatch(format!("{}x{} vs {}x{}", a.m, a.n, b.m, b.n)));
    }
    Ok(())
}

/// Edge directions `P_ij -> P_{i+1,j}` and `P_ij -> P_{i,j+1}` of two nets
/// agree in direction (no reversal) within `eps_parallel`.
pub fn are_parallel_nets(n1: &Net, n2: &Net, tol: &Tolerances) -> Result<bool> {
    same_shape(n1, n2)?;
    if n1.dim != n2.dim {
        return Err(Error::ShapeMismatch(format!("dim {} vs {}", n1.dim, n2.dim)));
    }
    Ok(parallel_edge_residual(n1, n2) <= tol.eps_parallel)
}

/// Largest sine between corresponding edges; reversed edges count as 1.
pub fn parallel_edge_residual(n1: &Net, n2: &Net) -> f64 {
    let mut worst: f64 = 0.0;
    let mut check = |u: Point, v: Point| {
        let s = if u.dot(&v) <= 0.0 { 1.0 } else { sin_angle(&u, &v) };
        worst = worst.max(s);
    };
    for i in 0..=n1.m {
        for j in 0..=n1.n {
            if i < n1.m {
                check(n1.p(i + 1, j) - n1.p(i, j), n2.p(i + 1, j) - n2.p(i, j));
            }
            if j < n1.n {
                check(n1.p(i, j + 1) - n1.p(i, j), n2.p(i, j + 1) - n2.p(i, j));
            }
        }
    }
    worst
}

/// Per-face validation result.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceReport {
    pub i: usize,
    pub j: usize,
    pub planarity_residual: f64,
    pub planar: bool,
    pub convex: bool,
    /// Sides whose length vanishes relative to the face size.
    pub degenerate_edges: Vec<Side>,
}

impl FaceReport {
    pub fn ok(&self) -> bool {
        self.planar && self.convex && self.degenerate_edges.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub m: usize,
    pub n: usize,
    pub faces: Vec<FaceReport>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.faces.iter().all(FaceReport::ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FaceReport> {
        self.faces.iter().filter(|f| !f.ok())
    }

    pub fn into_result(self) -> Result<()> {
        match self.failures().next() {
            None => Ok(()),
            Some(f) => {
                let face = FaceLabel(Some((f.i, f.j)));
                Err(if !f.degenerate_edges.is_empty() {
                    Error::Degenerate { face, reason: format!("degenerate edges {:?}", f.degenerate_edges) }
                } else if !f.planar {
                    Error::NonPlanar { face, residual: f.planarity_residual }
                } else {
                    Error::NonConvex { face }
                })
            }
        }
    }
}

pub fn validate(net: &Net, tol: &Tolerances) -> ValidationReport {
    let faces = net
        .faces()
        .map(|q| {
            let (i, j) = q.origin.expect("net faces are labeled");
            let scale = q.mean_edge_length();
            let degenerate_edges: Vec<Side> = Side::ALL
                .into_iter()
                .filter(|s| !(q.side_vector(*s).norm() > tol.eps_planar * scale))
                .collect();
            let res = q.planarity_residual();
            FaceReport {
                i,
                j,
                planarity_residual: res,
                planar: res.is_finite() && res <= tol.eps_planar,
                convex: q.is_strictly_convex(tol),
                degenerate_edges,
            }
        })
        .collect();
    ValidationReport { m: net.m, n: net.n, faces }
}
