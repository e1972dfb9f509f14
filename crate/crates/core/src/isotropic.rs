//! Isotropic space: semi-norm, the metric duality with respect to the
//! isotropic unit sphere `2z = x^2 + y^2`, and dual nets.

use serde::Serialize;

use crate::construct::Direction;
use crate::deform::DeformationFamily;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::net::{Net, Quad, Tolerances};

pub fn iso_norm(v: &Point) -> f64 {
    v.x.hypot(v.y)
}

/// Non-isotropic plane `u x + v y - z - w = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsoPlane {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl IsoPlane {
    /// Plane `n . x = d`, or `None` when it is parallel to the z-axis.
    pub fn from_normal(n: &Point, d: f64, eps: f64) -> Option<Self> {
        if n.z.abs() <= eps * n.norm() {
            return None;
        }
        Some(Self { u: -n.x / n.z, v: -n.y / n.z, w: -d / n.z })
    }

    pub fn z_at(&self, x: f64, y: f64) -> f64 {
        self.u * x + self.v * y - self.w
    }

    pub fn residual(&self, p: &Point) -> f64 {
        self.u * p.x + self.v * p.y - p.z - self.w
    }

    pub fn is_parallel(&self, other: &IsoPlane) -> bool {
        self.u == other.u && self.v == other.v
    }
}

/// Point and tangent plane through it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactElement {
    pub point: Point,
    pub plane: IsoPlane,
}

impl ContactElement {
    pub fn new(point: Point, plane: IsoPlane, tol: &Tolerances) -> Result<Self> {
        let r = plane.residual(&point).abs() / (1.0 + point.norm());
        if r > tol.eps_planar {
            return Err(Error::Input(format!("contact point is off its plane by {r:e}")));
        }
        Ok(Self { point, plane })
    }

    /// The dual contact element: the pole of the plane with the polar plane of the point.
    pub fn dual(&self) -> ContactElement {
        ContactElement { point: delta_plane(&self.plane), plane: delta_point(&self.point) }
    }
}

pub fn delta_point(p: &Point) -> IsoPlane {
    IsoPlane { u: p.x, v: p.y, w: p.z }
}

pub fn delta_plane(pl: &IsoPlane) -> Point {
    Point::new(pl.u, pl.v, pl.w)
}

/// Plane of a face, from its diagonal normal through the vertex centroid.
pub fn face_plane(q: &Quad, tol: &Tolerances) -> Result<IsoPlane> {
    q.check(tol)?;
    let n = q.diagonal_cross();
    let c = (q.a + q.b + q.c + q.d) / 4.0;
    let (i, j) = q.origin.unwrap_or((0, 0));
    IsoPlane::from_normal(&n, n.dot(&c), tol.eps_planar).ok_or(Error::IsotropicPlane { i, j })
}

/// Net of the poles of the face planes: an `(m - 1) x (n - 1)` net.
pub fn dual_net(net: &Net, tol: &Tolerances) -> Result<Net> {
    if net.dim() != 3 {
        return Err(Error::Input("isotropic dual needs a 3D net".into()));
    }
    if net.m() < 2 || net.n() < 2 {
        return Err(Error::ShapeMismatch(format!("isotropic dual needs m, n >= 2, got {}x{}", net.m(), net.n())));
    }
    let mut poles = Vec::with_capacity(net.m() * net.n());
    for q in net.faces() {
        poles.push(delta_plane(&face_plane(&q, tol)?));
    }
    Net::new(net.m() - 1, net.n() - 1, 3, poles)
}

/// Diagnostics of the isotropic duals along a deformation family.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DualFamilyReport {
    pub samples: Vec<f64>,
    /// Largest change of the top view `(x, y)` of a dual vertex across samples.
    pub max_top_view_drift: f64,
    /// Largest planarity residual of a dual polyline of a cylindrical strip.
    pub max_cylinder_planarity: Option<f64>,
    /// Largest sine between a fitted polyline plane and the z-axis.
    pub max_cylinder_isotropy: Option<f64>,
}

/// Plane fit through points: returns (unit normal, max distance / extent).
fn plane_fit(points: &[Point]) -> (Point, f64) {
    let c = points.iter().sum::<Point>() / points.len() as f64;
    let mut m = nalgebra::Matrix3::zeros();
    for p in points {
        let d = p - c;
        m += d * d.transpose();
    }
    let eig = m.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let n: Point = eig.eigenvectors.column(k).into();
    let extent = points.iter().map(|p| (p - c).norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let res = points.iter().map(|p| n.dot(&(p - c)).abs()).fold(0.0, f64::max);
    (n, res / extent)
}

/// Evaluates the family at every sample and measures the top-view drift of
/// the dual vertices; for cone-cylinder families also checks that the dual
/// polylines of cylindrical strips lie in isotropic planes.
pub fn dual_family_invariants(fam: &DeformationFamily, ts: &[f64], tol: &Tolerances) -> Result<DualFamilyReport> {
    let mut report = DualFamilyReport { samples: ts.to_vec(), ..Default::default() };
    let mut reference: Option<Net> = None;
    for &t in ts {
        let member = fam.evaluate(t, tol)?;
        let dual = dual_net(&member, tol)?;
        if let Some(r) = &reference {
            for (p, q) in r.vertices().iter().zip(dual.vertices()) {
                report.max_top_view_drift = report.max_top_view_drift.max((p.x - q.x).hypot(p.y - q.y));
            }
        } else {
            reference = Some(dual.clone());
        }
        if let Some(data) = fam.cone_cylinder_data() {
            // strips i with sigma_i = sigma_{i+1} are cylindrical
            let (planarity, isotropy) = cylinder_dual_planarity(&dual, &data.sigma, data.direction);
            if let Some(p) = planarity {
                let old = report.max_cylinder_planarity.unwrap_or(0.0);
                report.max_cylinder_planarity = Some(old.max(p));
                let old = report.max_cylinder_isotropy.unwrap_or(0.0);
                report.max_cylinder_isotropy = Some(old.max(isotropy));
            }
        }
    }
    Ok(report)
}

fn cylinder_dual_planarity(dual: &Net, sigma: &[f64], direction: Direction) -> (Option<f64>, f64) {
    let dual = match direction {
        Direction::Rows => dual.clone(),
        Direction::Cols => dual.transpose(),
    };
    let mut planarity: Option<f64> = None;
    let mut isotropy: f64 = 0.0;
    for i in 0..sigma.len() - 1 {
        if sigma[i] != sigma[i + 1] || dual.n() < 1 {
            continue;
        }
        // dual vertices of strip i: D_{i,j}, j = 0..=n
        let pts: Vec<Point> = (0..=dual.n()).map(|j| dual.p(i, j)).collect();
        let (n, res) = if pts.len() >= 3 { plane_fit(&pts) } else { (Point::new(1.0, 0.0, 0.0), 0.0) };
        planarity = Some(planarity.unwrap_or(0.0).max(res));
        isotropy = isotropy.max(n.z.abs());
    }
    (planarity, isotropy)
}

/// Isotropic Gaussian curvature `f_xx f_yy - f_xy^2` of a graph sampled on a
/// uniform grid `z[i][j] = f(x_0 + i hx, y_0 + j hy)`, at interior nodes.
pub fn isotropic_gaussian_curvature(z: &[Vec<f64>], hx: f64, hy: f64) -> Result<Vec<Vec<f64>>> {
    let rows = z.len();
    let cols = z.first().map_or(0, |r| r.len());
    if rows < 3 || cols < 3 {
        return Err(Error::ShapeMismatch(format!("curvature needs at least a 3x3 grid, got {rows}x{cols}")));
    }
    if z.iter().any(|r| r.len() != cols) {
        return Err(Error::ShapeMismatch("ragged grid".into()));
    }
    if !(hx > 0.0 && hy > 0.0) {
        return Err(Error::NonPositive { what: "grid step".into(), value: hx.min(hy) });
    }
    let mut out = vec![vec![0.0; cols - 2]; rows - 2];
    for i in 1..rows - 1 {
        for j in 1..cols - 1 {
            let fxx = (z[i + 1][j] - 2.0 * z[i][j] + z[i - 1][j]) / (hx * hx);
            let fyy = (z[i][j + 1] - 2.0 * z[i][j] + z[i][j - 1]) / (hy * hy);
            let fxy = (z[i + 1][j + 1] - z[i + 1][j - 1] - z[i - 1][j + 1] + z[i - 1][j - 1]) / (4.0 * hx * hy);
            out[i - 1][j - 1] = fxx * fyy - fxy * fxy;
        }
    }
    Ok(out)
}

pub fn curvature_csv(field: &[Vec<f64>]) -> String {
    let mut s = String::new();
    for row in field {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}
