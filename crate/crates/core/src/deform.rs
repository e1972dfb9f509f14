//! Area-preserving Combescure deformations.

use crate::construct::{ConeCylinderData, Direction};
use crate::error::{Error, FaceLabel, Result};
use crate::geom::{intersect_lines, sin_angle, Point};
use crate::net::{mixed_area, rel_diff, same_shape, validate, Net, Quad, Side, Tolerances};
use crate::ratios::{diagonal_intersection, simple_ratio_points, SimpleRatioFrame};

/// `P(x, y) = l x^2 + 2 x y + m y^2 - (l + m + 2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemPolynomial {
    pub l: f64,
    pub m: f64,
}

impl SystemPolynomial {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.l * x * x + 2.0 * x * y + self.m * y * y - (self.l + self.m + 2.0)
    }

    /// Root `y` of `P(x, y) = 0` on the branch through `(1, 1)`.
    ///
    /// Rationalized form of `(-x + sqrt(x^2 (1 - l m) + m c)) / m`, stable for
    /// small `m`; for `m = 0` it is the linear solution `(c - l x^2) / (2 x)`.
    pub fn root_y(&self, x: f64) -> Option<f64> {
        let c = self.l + self.m + 2.0;
        if self.m == 0.0 {
            return Some((c - self.l * x * x) / (2.0 * x));
        }
        let disc = x * x * (1.0 - self.l * self.m) + self.m * c;
        if disc < 0.0 {
            return None;
        }
        Some((c - self.l * x * x) / (x + disc.sqrt()))
    }

    /// Open interval of `x > 0` on which [`SystemPolynomial::root_y`] exists and is positive.
    pub fn admissible_x(&self) -> (f64, f64) {
        let c = self.l + self.m + 2.0;
        let lo = if self.m < 0.0 { (-self.m * c / (1.0 - self.l * self.m)).sqrt() } else { 0.0 };
        let hi = if self.l > 0.0 { (c / self.l).sqrt() } else { f64::INFINITY };
        (lo, hi)
    }
}

/// `x_2(t)` of the class-(i) family when `m_1 = 0`.
pub fn class_i_m1_zero_branch(l1: f64, t: f64) -> f64 {
    (l1 + 2.0 - l1 * (1.0 + t) * (1.0 + t)) / (2.0 * (1.0 + t))
}

/// Closed-form family of a class-(i) `2 x 2` net.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassIFamily {
    pub frame: SimpleRatioFrame,
    /// 0 when `(f_1, f_2), (f_3, f_4)` are the affine symmetric pairs, 1 for
    /// `(f_2, f_3), (f_4, f_1)`.
    pub shift: usize,
}

impl ClassIFamily {
    /// `P_k(x_k, x_{k+1})` for `k = 1..4`, using the frame's `l_k, m_k`.
    pub fn polynomials(&self) -> [SystemPolynomial; 4] {
        [0, 1, 2, 3].map(|k| SystemPolynomial { l: self.frame.l[k], m: self.frame.m[k] })
    }

    /// Scale factors `x_1..x_4` of the edges `OA_1..OA_4`.
    pub fn x(&self, t: f64) -> Result<[f64; 4]> {
        let f = self.frame.rotated(self.shift);
        let s = 1.0 + t;
        let y = |k: usize| -> Result<f64> {
            let p = SystemPolynomial { l: f.l[k], m: f.m[k] };
            let v = if p.m == 0.0 { Some(class_i_m1_zero_branch(p.l, t)) } else { p.root_y(s) };
            match v {
                Some(v) if v > 0.0 && s > 0.0 => Ok(v),
                _ => Err(Error::OutOfDomain(format!("t = {t} leaves the class-(i) family domain"))),
            }
        };
        let rot = [s, y(0)?, s, y(2)?];
        let mut x = [0.0; 4];
        for k in 0..4 {
            x[(k + self.shift) % 4] = rot[k];
        }
        Ok(x)
    }
}

/// Residuals of the two class-(i) pairings of a frame.
pub fn class_i_pairing_residuals(frame: &SimpleRatioFrame) -> [f64; 2] {
    [0, 1].map(|shift| {
        let f = frame.rotated(shift);
        [rel_diff(f.l[0], f.m[1]), rel_diff(f.l[1], f.m[0]), rel_diff(f.l[2], f.m[3]), rel_diff(f.l[3], f.m[2])]
            .into_iter()
            .fold(0.0, f64::max)
    })
}

pub fn family_2x2_class_i(frame: &SimpleRatioFrame, tol: &Tolerances) -> Result<ClassIFamily> {
    let res = class_i_pairing_residuals(frame);
    let shift = if res[0] <= res[1] { 0 } else { 1 };
    if res[shift] > tol.eps_concurrency {
        return Err(Error::ClassCondition {
            class: "i",
            location: format!("vertex ({},{})", frame.center.0, frame.center.1),
            residual: res[shift],
        });
    }
    Ok(ClassIFamily { frame: *frame, shift })
}

/// `k_1..k_4` of a class-(ii) `2 x 2` net.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassIIParams {
    pub k: [f64; 4],
}

impl ClassIIParams {
    /// `l_i = (k_{i+1}^2 - 1) / (1 + k_i k_{i+1})`.
    pub fn l(&self, i: usize) -> f64 {
        let (a, b) = (self.k[i], self.k[(i + 1) % 4]);
        (b * b - 1.0) / (1.0 + a * b)
    }

    /// `m_i = (k_i^2 - 1) / (1 + k_i k_{i+1})`.
    pub fn m(&self, i: usize) -> f64 {
        let (a, b) = (self.k[i], self.k[(i + 1) % 4]);
        (a * a - 1.0) / (1.0 + a * b)
    }

    pub fn x(&self, t: f64) -> Result<[f64; 4]> {
        let s = 1.0 + t;
        if !(s > 0.0) {
            return Err(Error::OutOfDomain(format!("t = {t} must exceed -1")));
        }
        let s2 = s * s;
        let x = [0, 1, 2, 3].map(|i| {
            let k = self.k[i];
            if i % 2 == 0 {
                (s2 * (1.0 - k) + 1.0 + k) / (2.0 * s)
            } else {
                (s2 * (1.0 + k) + 1.0 - k) / (2.0 * s)
            }
        });
        if x.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::OutOfDomain(format!("t = {t} leaves the class-(ii) family domain")));
        }
        Ok(x)
    }
}

pub fn family_2x2_class_ii(frame: &SimpleRatioFrame, tol: &Tolerances) -> Result<ClassIIParams> {
    let mut k = [0.0; 4];
    for i in 0..4 {
        let here = frame.opposite_ratio_next(i);
        let there = frame.opposite_ratio_prev((i + 1) % 4);
        let r = rel_diff(here, there);
        if r > tol.eps_concurrency {
            return Err(Error::ClassCondition {
                class: "ii",
                location: format!("edge {} at vertex ({},{})", i + 2, frame.center.0, frame.center.1),
                residual: r,
            });
        }
        if !(here > 0.0) {
            return Err(Error::NonPositive { what: "opposite ratio".into(), value: here });
        }
        k[(i + 1) % 4] = 1.0 / here.sqrt();
    }
    Ok(ClassIIParams { k })
}

/// Scales the edges `OA_k` of a `2 x 2` net around `O = P_11` by `x_k` and
/// rebuilds the corners from parallel lines.
pub fn apply_scales(net: &Net, x: [f64; 4], tol: &Tolerances) -> Result<Net> {
    if net.m() != 2 || net.n() != 2 {
        return Err(Error::ShapeMismatch(format!("expected a 2x2 net, got {}x{}", net.m(), net.n())));
    }
    let o = net.p(1, 1);
    let a_idx = [(2, 1), (1, 2), (0, 1), (1, 0)];
    let b_idx = [(2, 2), (0, 2), (0, 0), (2, 0)];
    let a: Vec<Point> = a_idx.iter().map(|&(i, j)| net.p(i, j)).collect();
    let na: Vec<Point> = (0..4).map(|k| o + (a[k] - o) * x[k]).collect();
    let mut pts = [[Point::zeros(); 3]; 3];
    pts[1][1] = o;
    for k in 0..4 {
        pts[a_idx[k].0][a_idx[k].1] = na[k];
        let b = net.p(b_idx[k].0, b_idx[k].1);
        let k1 = (k + 1) % 4;
        let hit = intersect_lines(&na[k], &(b - a[k]), &na[k1], &(b - a[k1]))
            .ok_or_else(|| Error::NotParallel(format!("sides at corner {:?} are parallel", b_idx[k])))?;
        pts[b_idx[k].0][b_idx[k].1] = hit.point;
    }
    Net::from_fn(2, 2, net.dim(), |i, j| pts[i][j])?.validated(tol)
}

fn unrotate(q: &Quad, side: Side) -> Quad {
    let v = q.vertices();
    let mut w = [Point::zeros(); 4];
    for k in 0..4 {
        w[(k + side.index()) % 4] = v[k];
    }
    Quad { a: w[0], b: w[1], c: w[2], d: w[3], origin: q.origin }
}

/// Admissible range `(min, max)` of the scale factor of `side` in [`deform_1x1`].
pub fn admissible_scale_interval(q: &Quad, side: Side, tol: &Tolerances) -> Result<(f64, f64)> {
    q.check(tol)?;
    let r = q.rotated(side);
    let p = SystemPolynomial {
        l: simple_ratio_points(&r.a, &r.b, &r.c, &r.d, tol)?,
        m: simple_ratio_points(&r.a, &r.d, &r.c, &r.b, tol)?,
    };
    Ok(p.admissible_x())
}

/// The unique parallel quad of equal area whose side `side` is the segment
/// `new_start -> new_end`, which must be parallel to and oriented like the
/// original side.
pub fn deform_1x1(q: &Quad, side: Side, new_start: &Point, new_end: &Point, tol: &Tolerances) -> Result<Quad> {
    q.check(tol)?;
    let r = q.rotated(side);
    let old = r.b - r.a;
    let new = new_end - new_start;
    if sin_angle(&old, &new) > tol.eps_parallel || old.dot(&new) <= 0.0 {
        return Err(Error::NotParallel(format!("new edge is not parallel to side {side:?} of {}", q.label())));
    }
    if *new_start == r.a && *new_end == r.b {
        return Ok(*q);
    }
    let s = new.norm() / old.norm();
    let p = SystemPolynomial {
        l: simple_ratio_points(&r.a, &r.b, &r.c, &r.d, tol)?,
        m: simple_ratio_points(&r.a, &r.d, &r.c, &r.b, tol)?,
    };
    let (lo, hi) = p.admissible_x();
    let y = match p.root_y(s) {
        Some(y) if s > lo && s < hi && y > 0.0 => y,
        _ => return Err(Error::Inadmissible { scale: s, min: lo, max: hi }),
    };
    let na = *new_start;
    let nb = *new_end;
    let nd = na + (r.d - r.a) * y;
    let hit = intersect_lines(&nb, &(r.c - r.b), &nd, &(r.c - r.d)).ok_or(Error::Degenerate {
        face: q.label(),
        reason: "sides BC and CD are parallel".into(),
    })?;
    let out = unrotate(&Quad { a: na, b: nb, c: hit.point, d: nd, origin: q.origin }, side);
    out.check(tol)?;
    Ok(out)
}

/// [`deform_1x1`] keeping the start of `side` fixed and scaling it by `s`.
pub fn deform_1x1_scaled(q: &Quad, side: Side, s: f64, tol: &Tolerances) -> Result<Quad> {
    let r = q.rotated(side);
    deform_1x1(q, side, &r.a, &(r.a + (r.b - r.a) * s), tol)
}

fn face_area_residual(base: &Quad, new: &Quad) -> f64 {
    let n = base.normal().unwrap_or_else(|| Point::new(0.0, 0.0, 1.0));
    let a0 = base.area_wrt(&n);
    (new.area_wrt(&n) - a0).abs() / a0.abs()
}

/// Layer-by-layer deformation with `P_00` fixed and `P_00 P_10` scaled by `seed(t)`.
pub fn propagate(net: &Net, t: f64, seed: impl Fn(f64) -> f64, tol: &Tolerances) -> Result<Net> {
    validate(net, tol).into_result()?;
    let s0 = seed(t);
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::OutOfDomain(format!("seed scale {s0} at t = {t} must be positive")));
    }
    if s0 == 1.0 {
        return Ok(net.clone());
    }
    let (m, n) = (net.m(), net.n());
    let mut p = vec![Point::zeros(); (m + 1) * (n + 1)];
    let at = |i: usize, j: usize| i * (n + 1) + j;
    p[at(0, 0)] = net.p(0, 0);
    p[at(1, 0)] = net.p(0, 0) + (net.p(1, 0) - net.p(0, 0)) * s0;
    for j in 0..n {
        let q = net.face_unchecked(0, j);
        let d = deform_1x1(&q, Side::AB, &p[at(0, j)], &p[at(1, j)], tol)?;
        p[at(1, j + 1)] = d.c;
        p[at(0, j + 1)] = d.d;
    }
    for k in 2..=m {
        let q = net.face_unchecked(k - 1, 0);
        let d = deform_1x1(&q, Side::DA, &p[at(k - 1, 1)], &p[at(k - 1, 0)], tol)?;
        p[at(k, 0)] = d.b;
        p[at(k, 1)] = d.c;
        for j in 1..n {
            let e_row = net.p(k, j + 1) - net.p(k, j);
            let e_col = net.p(k, j + 1) - net.p(k - 1, j + 1);
            let hit = intersect_lines(&p[at(k, j)], &e_row, &p[at(k - 1, j + 1)], &e_col).ok_or_else(|| {
                Error::ForcedVertex { i: k, j: j + 1, residual: f64::INFINITY }
            })?;
            let scale = e_row.norm().min(e_col.norm());
            let residual = hit.residual / scale;
            if residual > tol.eps_planar {
                return Err(Error::ForcedVertex { i: k, j: j + 1, residual });
            }
            p[at(k, j + 1)] = hit.point;
        }
    }
    let out = Net::new(m, n, net.dim(), p)?;
    check_area_preserving(net, &out, tol)?;
    validate(&out, tol).into_result().map_err(|e| match e {
        Error::NonConvex { face } => Error::OutOfDomain(format!("{face} loses convexity at t = {t}")),
        other => other,
    })?;
    Ok(out)
}

/// [`propagate`] with the default seed `1 + t`.
pub fn propagate_default(net: &Net, t: f64, tol: &Tolerances) -> Result<Net> {
    propagate(net, t, |t| 1.0 + t, tol)
}

/// Largest relative change of a face area between two nets of equal shape.
pub fn max_area_residual(base: &Net, other: &Net) -> Result<f64> {
    same_shape(base, other)?;
    Ok(base
        .faces()
        .zip(other.faces())
        .map(|(a, b)| face_area_residual(&a, &b))
        .fold(0.0, f64::max))
}

fn check_area_preserving(base: &Net, other: &Net, tol: &Tolerances) -> Result<()> {
    for (a, b) in base.faces().zip(other.faces()) {
        let r = face_area_residual(&a, &b);
        if !(r <= tol.eps_area) {
            let (i, j) = a.origin.expect("labeled");
            return Err(Error::AreaResidual { i, j, residual: r });
        }
    }
    Ok(())
}

/// Christoffel dual with equal face areas, anchored at `P*_00 = 0`.
pub fn christoffel_dual(net: &Net, tol: &Tolerances) -> Result<Net> {
    validate(net, tol).into_result()?;
    let (m, n) = (net.m(), net.n());
    let at = |i: usize, j: usize| i * (n + 1) + j;
    let mut p: Vec<Option<Point>> = vec![None; (m + 1) * (n + 1)];
    p[0] = Some(Point::zeros());
    for i in 0..m {
        for j in 0..n {
            let q = net.face_unchecked(i, j);
            let g = diagonal_intersection(&q, tol)?;
            // offsets from Q*
            let off = [-g.e2 / g.alpha, -g.e1 / g.beta, -g.e2 / g.gamma, -g.e1 / g.delta];
            let idx = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let qstar = p[idx[0]].expect("placed by an earlier face") - off[0];
            let scale = off.iter().map(|o| o.norm()).fold(0.0, f64::max);
            for k in 1..4 {
                let v = qstar + off[k];
                match p[idx[k]] {
                    None => p[idx[k]] = Some(v),
                    Some(old) => {
                        let r = (old - v).norm() / scale;
                        if r > tol.eps_concurrency {
                            return Err(Error::ClassCondition {
                                class: "ii",
                                location: format!("face ({i},{j}) (dual edge mismatch)"),
                                residual: r,
                            });
                        }
                    }
                }
            }
        }
    }
    Net::new(m, n, net.dim(), p.into_iter().map(|v| v.expect("all placed")).collect())
}

/// Checks that `dual` is an equal-area Christoffel dual of `net`: parallel
/// corresponding sides, opposite oriented areas, vanishing mixed areas.
pub fn check_dual_pair(net: &Net, dual: &Net, tol: &Tolerances) -> Result<()> {
    same_shape(net, dual)?;
    for (f, g) in net.faces().zip(dual.faces()) {
        let (i, j) = f.origin.expect("labeled");
        let n = f.normal().ok_or(Error::Degenerate { face: f.label(), reason: "no normal".into() })?;
        let mix = mixed_area(&f, &g, tol)?;
        let (af, ag) = (f.area_wrt(&n), g.area_wrt(&n));
        let r = ((af + ag).abs() / af.abs()).max(mix.abs() / af.abs());
        if r > tol.eps_area {
            return Err(Error::AreaResidual { i, j, residual: r });
        }
    }
    Ok(())
}

/// `P cosh t + P* sinh t`.
pub fn hyperbolic_family(net: &Net, dual: &Net, t: f64, tol: &Tolerances) -> Result<Net> {
    check_dual_pair(net, dual, tol)?;
    let (c, s) = (t.cosh(), t.sinh());
    let v = net.vertices().iter().zip(dual.vertices()).map(|(p, q)| p * c + q * s).collect();
    let out = Net::new(net.m(), net.n(), net.dim(), v)?;
    validate(&out, tol).into_result().map_err(|e| match e {
        Error::NonConvex { face } => Error::OutOfDomain(format!("{face} loses convexity at t = {t}")),
        other => other,
    })?;
    Ok(out)
}

/// `P_ij(t) = a_i(t) + sqrt(t + sigma_i^2) b_j` for a cone-cylinder net with
/// all `sigma_i > 0`.
pub fn cone_cylinder_family(data: &ConeCylinderData, t: f64, tol: &Tolerances) -> Result<Net> {
    if let Some((i, s)) = data.sigma.iter().enumerate().find(|(_, s)| !(**s > 0.0)) {
        return Err(Error::NonPositive { what: format!("sigma_{i}"), value: *s });
    }
    let min_sq = data.sigma.iter().map(|s| s * s).fold(f64::INFINITY, f64::min);
    if !(t > -min_sq) {
        return Err(Error::OutOfDomain(format!("t = {t} must exceed -min sigma^2 = {}", -min_sq)));
    }
    let st: Vec<f64> = data.sigma.iter().map(|s| (t + s * s).sqrt()).collect();
    // a_i(t) = a_i + sum_k (a_k - a_{k-1}) (w_k - 1), exact at t = 0
    let mut a = Vec::with_capacity(data.a.len());
    let mut shift = Point::zeros();
    a.push(data.a[0]);
    for k in 1..data.a.len() {
        let num = data.sigma[k] + data.sigma[k - 1] - st[k] - st[k - 1];
        let wm1 = num / (st[k] + st[k - 1]);
        shift += (data.a[k] - data.a[k - 1]) * wm1;
        a.push(data.a[k] + shift);
    }
    let rows = data.a.len() - 1;
    let cols = data.b.len() - 1;
    let net = Net::from_fn(rows, cols, data.dim, |i, j| a[i] + data.b[j] * st[i])?;
    let net = match data.direction {
        Direction::Rows => net,
        Direction::Cols => net.transpose(),
    };
    validate(&net, tol).into_result().map_err(|e| match e {
        Error::NonConvex { face } => Error::OutOfDomain(format!("{face} loses convexity at t = {t}")),
        other => other,
    })?;
    Ok(net)
}

/// Kind and data of a deformation family.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    /// [`propagate`] with seed `1 + t`.
    Propagated,
    Hyperbolic { dual: Net },
    ConeCylinder { data: ConeCylinderData },
    ClosedForm2x2I(ClassIFamily),
    ClosedForm2x2II(ClassIIParams),
}

/// A map `t -> Net` of area-preserving Combescure transformations of `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationFamily {
    pub base: Net,
    pub kind: FamilyKind,
}

impl DeformationFamily {
    pub fn propagated(base: Net, tol: &Tolerances) -> Result<Self> {
        validate(&base, tol).into_result()?;
        Ok(Self { base, kind: FamilyKind::Propagated })
    }

    pub fn hyperbolic(base: Net, tol: &Tolerances) -> Result<Self> {
        let dual = christoffel_dual(&base, tol)?;
        check_dual_pair(&base, &dual, tol)?;
        Ok(Self { base, kind: FamilyKind::Hyperbolic { dual } })
    }

    pub fn cone_cylinder(data: ConeCylinderData, tol: &Tolerances) -> Result<Self> {
        let base = crate::construct::gen_cone_cylinder(&data, tol)?;
        Ok(Self { base, kind: FamilyKind::ConeCylinder { data } })
    }

    /// Closed-form family of a `2 x 2` net (class (ii) preferred).
    pub fn closed_form_2x2(base: Net, tol: &Tolerances) -> Result<Self> {
        let frame = crate::ratios::local_frame(&base, 1, 1, tol)?;
        let kind = match family_2x2_class_ii(&frame, tol) {
            Ok(k) => FamilyKind::ClosedForm2x2II(k),
            Err(_) => FamilyKind::ClosedForm2x2I(family_2x2_class_i(&frame, tol)?),
        };
        Ok(Self { base, kind })
    }

    pub fn evaluate(&self, t: f64, tol: &Tolerances) -> Result<Net> {
        if t == 0.0 {
            return Ok(self.base.clone());
        }
        match &self.kind {
            FamilyKind::Propagated => propagate_default(&self.base, t, tol),
            FamilyKind::Hyperbolic { dual } => hyperbolic_family(&self.base, dual, t, tol),
            FamilyKind::ConeCylinder { data } => cone_cylinder_family(data, t, tol),
            FamilyKind::ClosedForm2x2I(f) => apply_scales(&self.base, f.x(t)?, tol),
            FamilyKind::ClosedForm2x2II(k) => apply_scales(&self.base, k.x(t)?, tol),
        }
    }

    /// Cone-cylinder data of the base net, when the family is built from it.
    pub fn cone_cylinder_data(&self) -> Option<&ConeCylinderData> {
        match &self.kind {
            FamilyKind::ConeCylinder { data } => Some(data),
            _ => None,
        }
    }

    /// Empirically admissible interval `(t_min, t_max)` within `[-limit, limit]`:
    /// expand from 0 by doubling, then bisect the first failure.
    pub fn admissible_domain(&self, limit: f64, tol: &Tolerances) -> (f64, f64) {
        let ok = |t: f64| self.evaluate(t, tol).is_ok();
        let bisect_with = |sign: f64, mut lo: f64, mut hi: f64| {
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if ok(sign * mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let expand = |sign: f64| {
            let mut good = 0.0;
            let mut step = limit.min(1e-3);
            while good < limit {
                let t = (good + step).min(limit);
                if ok(sign * t) {
                    good = t;
                    step *= 2.0;
                } else {
                    return bisect_with(sign, good, t);
                }
            }
            good
        };
        (-expand(-1.0), expand(1.0))
    }
}

/// Label of the first face whose corresponding edges are not all parallel.
pub fn first_nonparallel_face(a: &Net, b: &Net, tol: &Tolerances) -> Option<FaceLabel> {
    for (f, g) in a.faces().zip(b.faces()) {
        for s in Side::ALL {
            let (u, v) = (f.side_vector(s), g.side_vector(s));
            if u.dot(&v) <= 0.0 || sin_angle(&u, &v) > tol.eps_parallel {
                return Some(f.label());
            }
        }
    }
    None
}
