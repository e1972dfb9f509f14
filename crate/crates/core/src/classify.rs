//! Deformability classes and geometric predicates on nets.
//!
//! Naming: a *row pair* is two faces `(i, j), (i, j+1)` of one `1 x n` strip;
//! a *column pair* is `(i, j), (i+1, j)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{line_concurrency, sin_angle, Point};
use crate::net::{rel_diff, validate, Net, Quad, Tolerances};
use crate::ratios::{simple_ratio_points, tables_HV, OppositeRatioTables};

/// Whether `q2 = (A, B, C', D')` is an affine mirror image of `q1 = (A, B, C, D)`
/// fixing the common side `AB` pointwise.
pub fn affine_symmetric(q1: &Quad, q2: &Quad, tol: &Tolerances) -> Result<bool> {
    Ok(affine_symmetry_residual(q1, q2, tol)? <= tol.eps_concurrency)
}

/// Residual of the affine symmetry test: `CC' || DD'`, plus concurrency of
/// `AB`, `CD`, `C'D'` when the quads are coplanar.
pub fn affine_symmetry_residual(q1: &Quad, q2: &Quad, tol: &Tolerances) -> Result<f64> {
    q1.check(tol)?;
    q2.check(tol)?;
    let scale = 0.5 * (q1.mean_edge_length() + q2.mean_edge_length());
    if (q1.a - q2.a).norm() > tol.eps_planar * scale || (q1.b - q2.b).norm() > tol.eps_planar * scale {
        return Err(Error::Input("the two quads do not share side AB".into()));
    }
    let u = q2.c - q1.c;
    let w = q2.d - q1.d;
    let (nu, nw) = (u.norm() / scale, w.norm() / scale);
    let par = if nu < tol.eps_parallel && nw < tol.eps_parallel {
        0.0
    } else if nu < tol.eps_parallel || nw < tol.eps_parallel {
        nu.max(nw)
    } else {
        sin_angle(&u, &w)
    };
    let n1 = q1.normal().expect("checked quad");
    let off = [q2.c, q2.d].iter().map(|p| n1.dot(&(p - q1.a)).abs() / scale).fold(0.0, f64::max);
    if off > tol.eps_planar {
        return Ok(par);
    }
    let conc = line_concurrency(
        &[q1.a, q1.c, q2.c],
        &[q1.b - q1.a, q1.d - q1.c, q2.d - q2.c],
        scale,
    );
    Ok(par.max(conc.residual))
}

/// `(l, m, l', m')` of the faces `f = O A B A_c` and `g = O A_c B' A'` around `O`.
fn pair_ratios(o: &Point, a_prev: &Point, b_f: &Point, a_common: &Point, b_g: &Point, a_next: &Point, tol: &Tolerances) -> Result<[f64; 4]> {
    Ok([
        simple_ratio_points(o, a_prev, b_f, a_common, tol)?,
        simple_ratio_points(o, a_common, b_f, a_prev, tol)?,
        simple_ratio_points(o, a_common, b_g, a_next, tol)?,
        simple_ratio_points(o, a_next, b_g, a_common, tol)?,
    ])
}

/// Residual of the affine symmetry of the row pair `(i, j), (i, j+1)`,
/// expressed through the simple ratios at `O = P_{i,j+1}`: `l_f = m_g`, `m_f = l_g`.
pub fn row_pair_residual(net: &Net, i: usize, j: usize, tol: &Tolerances) -> Result<f64> {
    let o = net.p(i, j + 1);
    let [lf, mf, lg, mg] = pair_ratios(
        &o,
        &net.p(i, j),
        &net.p(i + 1, j),
        &net.p(i + 1, j + 1),
        &net.p(i + 1, j + 2),
        &net.p(i, j + 2),
        tol,
    )
    .map_err(|_| Error::Degenerate {
        face: crate::error::FaceLabel(Some((i, j))),
        reason: "simple ratio undefined".into(),
    })?;
    Ok(rel_diff(lf, mg).max(rel_diff(mf, lg)))
}

/// Per-face residuals (max over the conditions that involve the face).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceDiagnostic {
    pub i: usize,
    pub j: usize,
    pub rows: f64,
    pub cols: f64,
    pub ii: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassVerdict {
    pub class_i_rows: bool,
    pub class_i_cols: bool,
    pub class_ii: bool,
    pub deformable: bool,
    /// Residual of the verdict: the largest residual among the classes that
    /// hold, or the smallest class residual when none holds.
    pub max_residual: f64,
    pub residual_i_rows: f64,
    pub residual_i_cols: f64,
    pub residual_ii: f64,
    /// `n = 1`: no row pairs exist, so `class_i_rows` holds vacuously.
    pub vacuous_rows: bool,
    /// `m = 1`: no column pairs exist, so `class_i_cols` holds vacuously.
    pub vacuous_cols: bool,
    #[serde(skip)]
    pub diagnostics: Vec<FaceDiagnostic>,
}

impl ClassVerdict {
    /// Transposed verdict: rows and columns swap.
    pub fn transposed(&self) -> ClassVerdict {
        ClassVerdict {
            class_i_rows: self.class_i_cols,
            class_i_cols: self.class_i_rows,
            residual_i_rows: self.residual_i_cols,
            residual_i_cols: self.residual_i_rows,
            vacuous_rows: self.vacuous_cols,
            vacuous_cols: self.vacuous_rows,
            diagnostics: self
                .diagnostics
                .iter()
                .map(|d| FaceDiagnostic { i: d.j, j: d.i, rows: d.cols, cols: d.rows, ii: d.ii })
                .collect(),
            ..self.clone()
        }
    }
}

/// Row-pair residual table, `[i][j]` for the pair `(i, j), (i, j+1)`.
fn row_residuals(net: &Net, tol: &Tolerances) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![0.0; net.n().saturating_sub(1)]; net.m()];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, r) in row.iter_mut().enumerate() {
            *r = row_pair_residual(net, i, j, tol)?;
        }
    }
    Ok(out)
}

pub fn classify(net: &Net, tol: &Tolerances) -> Result<ClassVerdict> {
    validate(net, tol).into_result()?;
    let (m, n) = (net.m(), net.n());
    let mut diag: Vec<FaceDiagnostic> = (0..m)
        .flat_map(|i| (0..n).map(move |j| FaceDiagnostic { i, j, rows: 0.0, cols: 0.0, ii: 0.0 }))
        .collect();
    let at = |i: usize, j: usize| i * n + j;

    let rows = row_residuals(net, tol)?;
    let mut res_rows: f64 = 0.0;
    for (i, row) in rows.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            res_rows = res_rows.max(*r);
            diag[at(i, j)].rows = diag[at(i, j)].rows.max(*r);
            diag[at(i, j + 1)].rows = diag[at(i, j + 1)].rows.max(*r);
        }
    }
    // column pairs (i, j), (i+1, j) are row pairs (j, i), (j, i+1) of the transpose
    let cols = row_residuals(&net.transpose(), tol)?;
    let mut res_cols: f64 = 0.0;
    for (j, row) in cols.iter().enumerate() {
        for (i, r) in row.iter().enumerate() {
            res_cols = res_cols.max(*r);
            diag[at(i, j)].cols = diag[at(i, j)].cols.max(*r);
            diag[at(i + 1, j)].cols = diag[at(i + 1, j)].cols.max(*r);
        }
    }

    let OppositeRatioTables { h, v } = tables_HV(net, tol)?;
    let mut res_ii: f64 = 0.0;
    for i in 0..m {
        for j in 0..n {
            if i > 0 {
                let r = rel_diff(h[i][j], h[i - 1][j]);
                res_ii = res_ii.max(r);
                diag[at(i, j)].ii = diag[at(i, j)].ii.max(r);
                diag[at(i - 1, j)].ii = diag[at(i - 1, j)].ii.max(r);
            }
            if j > 0 {
                let r = rel_diff(v[i][j], v[i][j - 1]);
                res_ii = res_ii.max(r);
                diag[at(i, j)].ii = diag[at(i, j)].ii.max(r);
                diag[at(i, j - 1)].ii = diag[at(i, j - 1)].ii.max(r);
            }
        }
    }

    let eps = tol.eps_concurrency;
    let class_i_rows = res_rows <= eps;
    let class_i_cols = res_cols <= eps;
    let class_ii = res_ii <= eps;
    let deformable = class_i_rows || class_i_cols || class_ii;
    let all = [(class_i_rows, res_rows), (class_i_cols, res_cols), (class_ii, res_ii)];
    let max_residual = if deformable {
        all.iter().filter(|(f, _)| *f).map(|(_, r)| *r).fold(0.0, f64::max)
    } else {
        all.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min)
    };
    Ok(ClassVerdict {
        class_i_rows,
        class_i_cols,
        class_ii,
        deformable,
        max_residual,
        residual_i_rows: res_rows,
        residual_i_cols: res_cols,
        residual_ii: res_ii,
        vacuous_rows: n == 1,
        vacuous_cols: m == 1,
        diagnostics: diag,
    })
}

/// Largest `|product - 1|` over all `2 x 2` sub-nets, where the product is
/// `(P10 Q00 / Q00 P01)(P01 Q01 / Q01 P12)(P12 Q11 / Q11 P21)(P21 Q10 / Q10 P10)`
/// and `Q` are diagonal intersections.
pub fn koenigs_residual(net: &Net, tol: &Tolerances) -> Result<f64> {
    let mut params = vec![vec![(0.0, 0.0); net.n()]; net.m()];
    for q in net.faces() {
        q.check(tol)?;
        let (i, j) = q.origin.expect("labeled");
        params[i][j] = q.diagonal_params().ok_or(Error::Degenerate {
            face: q.label(),
            reason: "diagonals are parallel".into(),
        })?;
    }
    let mut worst: f64 = 0.0;
    for i in 0..net.m().saturating_sub(1) {
        for j in 0..net.n().saturating_sub(1) {
            let (_, r00) = params[i][j];
            let (s01, _) = params[i][j + 1];
            let (_, r11) = params[i + 1][j + 1];
            let (s10, _) = params[i + 1][j];
            let p = (r00 / (1.0 - r00)) * (s01 / (1.0 - s01)) * ((1.0 - r11) / r11) * ((1.0 - s10) / s10);
            worst = worst.max((p - 1.0).abs());
        }
    }
    Ok(worst)
}

pub fn is_koenigs(net: &Net, tol: &Tolerances) -> Result<bool> {
    Ok(koenigs_residual(net, tol)? <= tol.eps_concurrency)
}

/// Cone-net properties of all strips in one direction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StripKind {
    pub cone: bool,
    pub cone_cylinder: bool,
    pub doubled: bool,
    pub cone_residual: f64,
    pub cylinder_residual: f64,
    pub doubled_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    None,
    Cone,
    ConeCylinder,
    DoubledConeCylinder,
}

impl StripKind {
    /// Single label in the order none < cone < cone_cylinder < doubled.
    pub fn strongest(&self) -> ConeKind {
        if self.doubled {
            ConeKind::DoubledConeCylinder
        } else if self.cone_cylinder {
            ConeKind::ConeCylinder
        } else if self.cone {
            ConeKind::Cone
        } else {
            ConeKind::None
        }
    }
}

/// `rows`: strips `{i, i+1} x {0..n}` with cross edges `P_ij P_{i+1,j}`;
/// `cols`: strips `{0..m} x {j, j+1}` with cross edges `P_ij P_{i,j+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeNetKind {
    pub rows: StripKind,
    pub cols: StripKind,
}

fn strip_kind(net: &Net, tol: &Tolerances) -> StripKind {
    let scale = net.median_edge_length();
    let (mut cone, mut cyl, mut dbl): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut collinear_corners = false;
    for i in 0..net.m() {
        let pts: Vec<Point> = (0..=net.n()).map(|j| net.p(i, j)).collect();
        let dirs: Vec<Point> = (0..=net.n()).map(|j| net.p(i + 1, j) - net.p(i, j)).collect();
        cone = cone.max(line_concurrency(&pts, &dirs, scale).residual);
        for j in 0..net.n() {
            cyl = cyl.max(sin_angle(&(net.p(i, j + 1) - net.p(i, j)), &(net.p(i + 1, j + 1) - net.p(i + 1, j))));
        }
        for j in 0..net.n().saturating_sub(1) {
            let (a, b) = (net.p(i, j + 2) - net.p(i, j), net.p(i + 1, j + 2) - net.p(i + 1, j));
            dbl = dbl.max(sin_angle(&a, &b));
            let c = net.p(i + 1, j) - net.p(i, j);
            if sin_angle(&a, &c) <= tol.eps_parallel && sin_angle(&b, &c) <= tol.eps_parallel {
                collinear_corners = true;
            }
        }
    }
    let is_cone = cone <= tol.eps_concurrency;
    StripKind {
        cone: is_cone,
        cone_cylinder: is_cone && cyl <= tol.eps_parallel,
        doubled: is_cone && dbl <= tol.eps_parallel && !collinear_corners,
        cone_residual: cone,
        cylinder_residual: cyl,
        doubled_residual: dbl,
    }
}

pub fn cone_net_kind(net: &Net, tol: &Tolerances) -> ConeNetKind {
    ConeNetKind {
        rows: strip_kind(net, tol),
        cols: strip_kind(&net.transpose(), tol),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZigzagKind {
    /// The two meeting points lie on opposite sides of the edge line.
    OppositeSides,
    SameSide,
    /// The transversal sides of both faces are parallel.
    Parallel,
}

/// Interior edge of the net. `along_i`: the edge `P_ij P_{i+1,j}`; otherwise
/// `P_ij P_{i,j+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZigzagEdge {
    pub i: usize,
    pub j: usize,
    pub along_i: bool,
    pub kind: ZigzagKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZigzagReport {
    pub edges: Vec<ZigzagEdge>,
}

impl ZigzagReport {
    /// No interior edge of the given direction has both points on one side.
    pub fn holds(&self, along_i: bool) -> bool {
        self.edges
            .iter()
            .filter(|e| e.along_i == along_i)
            .all(|e| e.kind != ZigzagKind::SameSide)
    }

    pub fn count(&self, along_i: bool, kind: ZigzagKind) -> usize {
        self.edges.iter().filter(|e| e.along_i == along_i && e.kind == kind).count()
    }
}

/// Parameter `lambda` of `S = A + lambda (D - A)`, the meeting point of lines
/// `AD` and `BC` for the face `ABCD` with common side `AB`; `None` if parallel.
fn meeting_parameter(a: &Point, b: &Point, c: &Point, d: &Point, tol: &Tolerances) -> Option<f64> {
    let n = (c - a).cross(&(d - b));
    let cb = c - b;
    let den = n.dot(&(d - a).cross(&cb));
    let num = n.dot(&(b - a).cross(&cb));
    let lambda = num / den;
    if !lambda.is_finite() || lambda.abs() * tol.eps_concurrency > 1.0 {
        None
    } else {
        Some(lambda)
    }
}

/// Position of the side-line intersections of the two faces adjacent to
/// every interior edge.
pub fn zigzag_diagnostic(net: &Net, tol: &Tolerances) -> ZigzagReport {
    let classify_edge = |a: Point, b: Point, c1: Point, d1: Point, c2: Point, d2: Point| {
        let l1 = meeting_parameter(&a, &b, &c1, &d1, tol);
        let l2 = meeting_parameter(&a, &b, &c2, &d2, tol);
        match (l1, l2) {
            (None, None) => ZigzagKind::Parallel,
            (Some(x), Some(y)) if x.signum() == y.signum() => ZigzagKind::OppositeSides,
            _ => ZigzagKind::SameSide,
        }
    };
    let mut edges = Vec::new();
    for i in 0..net.m() {
        for j in 1..net.n() {
            // faces (i, j) and (i, j-1) share P_ij P_{i+1,j}
            let kind = classify_edge(
                net.p(i, j),
                net.p(i + 1, j),
                net.p(i + 1, j + 1),
                net.p(i, j + 1),
                net.p(i + 1, j - 1),
                net.p(i, j - 1),
            );
            edges.push(ZigzagEdge { i, j, along_i: true, kind });
        }
    }
    for i in 1..net.m() {
        for j in 0..net.n() {
            // faces (i, j) and (i-1, j) share P_ij P_{i,j+1}
            let kind = classify_edge(
                net.p(i, j),
                net.p(i, j + 1),
                net.p(i + 1, j + 1),
                net.p(i + 1, j),
                net.p(i - 1, j + 1),
                net.p(i - 1, j),
            );
            edges.push(ZigzagEdge { i, j, along_i: false, kind });
        }
    }
    ZigzagReport { edges }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn square_grid_is_everything() {
        let g = Net::square_grid(3, 4);
        let v = classify(&g, &tol()).unwrap();
        assert!(v.class_i_rows && v.class_i_cols && v.class_ii && v.deformable);
        assert_eq!(v.max_residual, 0.0);
        assert!(is_koenigs(&g, &tol()).unwrap());
        assert_eq!(koenigs_residual(&g, &tol()).unwrap(), 0.0);
        let k = cone_net_kind(&g, &tol());
        assert_eq!(k.rows.strongest(), ConeKind::DoubledConeCylinder);
        assert_eq!(k.cols.strongest(), ConeKind::DoubledConeCylinder);
        assert!(k.rows.cone_cylinder && k.cols.cone_cylinder);
    }

    #[test]
    fn strips_are_vacuous() {
        let g = Net::from_fn(1, 3, 2, |i, j| Point::new(i as f64 + 0.2 * (j * j) as f64, j as f64, 0.0)).unwrap();
        let v = classify(&g, &tol()).unwrap();
        assert!(v.vacuous_cols && v.class_i_cols && v.deformable);
        let one = classify(&Net::square_grid(1, 1), &tol()).unwrap();
        assert!(one.vacuous_rows && one.vacuous_cols && one.deformable);
    }

    #[test]
    fn perturbed_grid_is_not_deformable() {
        let mut v = Net::square_grid(2, 2).vertices().to_vec();
        v[3] += Point::new(0.1, 0.05, 0.0);
        let net = Net::new(2, 2, 2, v).unwrap();
        let verdict = classify(&net, &tol()).unwrap();
        assert!(!verdict.deformable);
        assert!(verdict.max_residual > 1e-3);
        assert!(!is_koenigs(&net, &tol()).unwrap());
        let k = cone_net_kind(&net, &tol());
        assert_eq!(k.rows.strongest(), ConeKind::None);
    }

    #[test]
    fn moving_the_center_keeps_koenigs() {
        // the condition only couples the four edge midpoints P10, P01, P12, P21
        let mut v = Net::square_grid(2, 2).vertices().to_vec();
        v[4] += Point::new(0.1, 0.05, 0.0);
        let net = Net::new(2, 2, 2, v).unwrap();
        assert!(koenigs_residual(&net, &tol()).unwrap() < 1e-14);
        assert!(!classify(&net, &tol()).unwrap().deformable);
    }

    #[test]
    fn grid_neighbors_are_affine_symmetric() {
        let g = Net::square_grid(1, 2);
        let f = g.face(0, 0).unwrap();
        let h = g.face(0, 1).unwrap();
        // common side P_01 P_11: f = (P01, P11, P10, P00), h = (P01, P11, P12, P02)
        let q1 = Quad::new(f.d, f.c, f.b, f.a);
        let q2 = Quad::new(h.a, h.b, h.c, h.d);
        assert!(affine_symmetric(&q1, &q2, &tol()).unwrap());
        let q3 = Quad::new(h.a, h.b, h.c + Point::new(0.1, 0.05, 0.0), h.d);
        assert!(!affine_symmetric(&q1, &q3, &tol()).unwrap());
        let q4 = Quad::new(h.b, h.a, h.c, h.d);
        assert!(affine_symmetric(&q1, &q4, &tol()).is_err());
    }

    #[test]
    fn translational_zigzag_is_parallel() {
        let g = Net::square_grid(3, 3);
        let rep = zigzag_diagnostic(&g, &tol());
        assert!(rep.edges.iter().all(|e| e.kind == ZigzagKind::Parallel));
        assert_eq!(rep.edges.len(), 12);
    }
}
