//! Smooth scale-translational surfaces `f(u, v) = a(u) + sigma(u) b(v)` and
//! their area-preserving Combescure family.

use serde::{Deserialize, Serialize};

use crate::construct::{ConeCylinderData, Direction};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::net::{validate, Net, Tolerances};

/// Real function of one variable with exact derivatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarCurve {
    /// `sum_k coeffs[k] u^k`.
    Poly { coeffs: Vec<f64> },
    /// `constant + sum_k cos[k] cos((k+1) freq u) + sin[k] sin((k+1) freq u)`.
    Trig {
        constant: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        freq: f64,
    },
}

fn poly_derivative(c: &[f64], u: f64, order: u32) -> f64 {
    let mut acc = 0.0;
    for k in (order as usize..c.len()).rev() {
        let f: f64 = (0..order).map(|r| (k - r as usize) as f64).product();
        acc = acc * u + f * c[k];
    }
    acc
}

fn trig_derivative(constant: f64, cos: &[f64], sin: &[f64], freq: f64, u: f64, order: u32) -> f64 {
    let mut acc = if order == 0 { constant } else { 0.0 };
    for k in 0..cos.len().max(sin.len()) {
        let w = (k + 1) as f64 * freq;
        let (a, b) = (cos.get(k).copied().unwrap_or(0.0), sin.get(k).copied().unwrap_or(0.0));
        // d^r/du^r of cos(wu) = w^r cos(wu + r pi/2)
        let phase = w * u + order as f64 * std::f64::consts::FRAC_PI_2;
        acc += w.powi(order as i32) * (a * phase.cos() + b * phase.sin());
    }
    acc
}

impl ScalarCurve {
    pub fn constant(c: f64) -> Self {
        ScalarCurve::Poly { coeffs: vec![c] }
    }

    pub fn derivative(&self, u: f64, order: u32) -> f64 {
        match self {
            ScalarCurve::Poly { coeffs } => poly_derivative(coeffs, u, order),
            ScalarCurve::Trig { constant, cos, sin, freq } => trig_derivative(*constant, cos, sin, *freq, u, order),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.derivative(u, 0)
    }

    pub fn d1(&self, u: f64) -> f64 {
        self.derivative(u, 1)
    }

    /// Exactly the constant function 1.
    pub fn is_one(&self) -> bool {
        match self {
            ScalarCurve::Poly { coeffs } => {
                coeffs.first() == Some(&1.0) && coeffs[1..].iter().all(|c| *c == 0.0)
            }
            ScalarCurve::Trig { constant, cos, sin, .. } => {
                *constant == 1.0 && cos.iter().chain(sin).all(|c| *c == 0.0)
            }
        }
    }
}

/// Curve in the plane or in space, componentwise like [`ScalarCurve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VectorCurve {
    /// `sum_k coeffs[k] u^k`, each coefficient a 2- or 3-vector.
    Poly { coeffs: Vec<Vec<f64>> },
    Trig {
        constant: Vec<f64>,
        #[serde(default)]
        cos: Vec<Vec<f64>>,
        #[serde(default)]
        sin: Vec<Vec<f64>>,
        freq: f64,
    },
}

impl VectorCurve {
    pub fn dim(&self) -> usize {
        match self {
            VectorCurve::Poly { coeffs } => coeffs.first().map_or(0, |c| c.len()),
            VectorCurve::Trig { constant, .. } => constant.len(),
        }
    }

    fn check(&self) -> Result<usize> {
        let d = self.dim();
        let ok = match self {
            VectorCurve::Poly { coeffs } => !coeffs.is_empty() && coeffs.iter().all(|c| c.len() == d),
            VectorCurve::Trig { cos, sin, .. } => cos.iter().chain(sin).all(|c| c.len() == d),
        };
        if !ok || !(d == 2 || d == 3) {
            return Err(Error::Input("curve coefficients must all be 2- or 3-vectors".into()));
        }
        Ok(d)
    }

    fn component(&self, c: usize) -> ScalarCurve {
        let pick = |v: &Vec<Vec<f64>>| v.iter().map(|x| x.get(c).copied().unwrap_or(0.0)).collect();
        match self {
            VectorCurve::Poly { coeffs } => ScalarCurve::Poly { coeffs: pick(coeffs) },
            VectorCurve::Trig { constant, cos, sin, freq } => ScalarCurve::Trig {
                constant: constant.get(c).copied().unwrap_or(0.0),
                cos: pick(cos),
                sin: pick(sin),
                freq: *freq,
            },
        }
    }

    pub fn derivative(&self, u: f64, order: u32) -> Point {
        let mut p = Point::zeros();
        for c in 0..self.dim().min(3) {
            p[c] = self.component(c).derivative(u, order);
        }
        p
    }

    pub fn eval(&self, u: f64) -> Point {
        self.derivative(u, 0)
    }

    pub fn d1(&self, u: f64) -> Point {
        self.derivative(u, 1)
    }

    pub fn negated(&self) -> Self {
        let neg = |v: &Vec<Vec<f64>>| v.iter().map(|x| x.iter().map(|c| -c).collect()).collect();
        match self {
            VectorCurve::Poly { coeffs } => VectorCurve::Poly { coeffs: neg(coeffs) },
            VectorCurve::Trig { constant, cos, sin, freq } => VectorCurve::Trig {
                constant: constant.iter().map(|c| -c).collect(),
                cos: neg(cos),
                sin: neg(sin),
                freq: *freq,
            },
        }
    }
}

/// Parametrized surface on a rectangle, with optional exact derivatives.
pub trait Surface {
    fn domain(&self) -> [[f64; 2]; 2];
    fn point(&self, u: f64, v: f64) -> Result<Point>;

    fn partials(&self, _u: f64, _v: f64) -> Option<(Point, Point)> {
        None
    }

    fn mixed(&self, _u: f64, _v: f64) -> Option<Point> {
        None
    }
}

fn in_domain(d: &[[f64; 2]; 2], u: f64, v: f64) -> Result<()> {
    if u < d[0][0] || u > d[0][1] || v < d[1][0] || v > d[1][1] || u.is_nan() || v.is_nan() {
        return Err(Error::OutOfDomain(format!("({u}, {v}) is outside {d:?}")));
    }
    Ok(())
}

/// Surface given by a closure; derivatives by central differences.
pub struct FnSurface<F: Fn(f64, f64) -> Point> {
    pub f: F,
    pub domain: [[f64; 2]; 2],
}

impl<F: Fn(f64, f64) -> Point> Surface for FnSurface<F> {
    fn domain(&self) -> [[f64; 2]; 2] {
        self.domain
    }

    fn point(&self, u: f64, v: f64) -> Result<Point> {
        in_domain(&self.domain, u, v)?;
        Ok((self.f)(u, v))
    }
}

/// `f(u, v) = a(u) + sigma(u) b(v)` on `domain = [[alpha, beta], [gamma, delta]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothConeCylinderNet {
    pub a: VectorCurve,
    pub sigma: ScalarCurve,
    pub b: VectorCurve,
    pub domain: [[f64; 2]; 2],
}

const CHECK_SAMPLES: usize = 24;

impl SmoothConeCylinderNet {
    pub fn new(a: VectorCurve, sigma: ScalarCurve, b: VectorCurve, domain: [[f64; 2]; 2]) -> Result<Self> {
        Self { a, sigma, b, domain }.validated()
    }

    /// Checks dimensions, `sigma > 0` and regularity on a sample grid.
    pub fn validated(self) -> Result<Self> {
        let d = self.a.check()?;
        if self.b.check()? != d {
            return Err(Error::Input("curves a and b have different dimensions".into()));
        }
        let [[al, be], [ga, de]] = self.domain;
        if !(al < be && ga < de) || !self.domain.iter().flatten().all(|x| x.is_finite()) {
            return Err(Error::Input(format!("empty parameter domain {:?}", self.domain)));
        }
        for k in 0..=CHECK_SAMPLES {
            let u = al + (be - al) * k as f64 / CHECK_SAMPLES as f64;
            let s = self.sigma.eval(u);
            if !(s > 0.0) {
                return Err(Error::NonPositive { what: format!("sigma({u})"), value: s });
            }
            for l in 0..=CHECK_SAMPLES {
                let v = ga + (de - ga) * l as f64 / CHECK_SAMPLES as f64;
                let (fu, fv) = self.exact_partials(u, v);
                let area = if d == 2 { (fu.x * fv.y - fu.y * fv.x).abs() } else { fu.cross(&fv).norm() };
                if !(area > 1e-12 * fu.norm() * fv.norm()) {
                    return Err(Error::Degenerate {
                        face: crate::error::FaceLabel(None),
                        reason: format!("surface is singular at ({u}, {v})"),
                    });
                }
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<Point> {
        in_domain(&self.domain, u, v)?;
        Ok(self.a.eval(u) + self.b.eval(v) * self.sigma.eval(u))
    }

    fn exact_partials(&self, u: f64, v: f64) -> (Point, Point) {
        let fu = self.a.d1(u) + self.b.eval(v) * self.sigma.d1(u);
        let fv = self.b.d1(v) * self.sigma.eval(u);
        (fu, fv)
    }

    /// Parameter nodes `(u_i, v_j)` of an `m x n` sampling.
    pub fn grid_nodes(&self, m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
        let nodes = |[lo, hi]: [f64; 2], k: usize| -> Vec<f64> {
            (0..=k).map(|i| if i == k { hi } else { lo + (hi - lo) * i as f64 / k as f64 }).collect()
        };
        (nodes(self.domain[0], m), nodes(self.domain[1], n))
    }

    /// Exact cone-cylinder data of the `m x n` sampling.
    pub fn sampled_data(&self, m: usize, n: usize) -> ConeCylinderData {
        let (us, vs) = self.grid_nodes(m, n);
        ConeCylinderData {
            a: us.iter().map(|&u| self.a.eval(u)).collect(),
            sigma: us.iter().map(|&u| self.sigma.eval(u)).collect(),
            b: vs.iter().map(|&v| self.b.eval(v)).collect(),
            direction: Direction::Rows,
            dim: self.dim(),
        }
    }
}

impl Surface for SmoothConeCylinderNet {
    fn domain(&self) -> [[f64; 2]; 2] {
        self.domain
    }

    fn point(&self, u: f64, v: f64) -> Result<Point> {
        self.eval(u, v)
    }

    fn partials(&self, u: f64, v: f64) -> Option<(Point, Point)> {
        Some(self.exact_partials(u, v))
    }

    fn mixed(&self, u: f64, v: f64) -> Option<Point> {
        Some(self.b.d1(v) * self.sigma.d1(u))
    }
}

fn sample_surface(s: &dyn Surface, m: usize, n: usize, dim: usize, tol: &Tolerances) -> Result<Net> {
    if m == 0 || n == 0 {
        return Err(Error::ShapeMismatch(format!("grid must be at least 1x1, got {m}x{n}")));
    }
    let [[al, be], [ga, de]] = s.domain();
    let node = |lo: f64, hi: f64, i: usize, k: usize| if i == k { hi } else { lo + (hi - lo) * i as f64 / k as f64 };
    let mut v = Vec::with_capacity((m + 1) * (n + 1));
    for i in 0..=m {
        for j in 0..=n {
            v.push(s.point(node(al, be, i, m), node(ga, de, j, n))?);
        }
    }
    Net::new(m, n, dim, v)?.validated(tol)
}

/// The net `P_ij = f(u_i, v_j)` on the uniform `m x n` parameter grid.
pub fn sample_smooth(net: &SmoothConeCylinderNet, m: usize, n: usize, tol: &Tolerances) -> Result<Net> {
    sample_surface(net, m, n, net.dim(), tol)
}

/// Member `t` of the family `a(u, t) + sqrt(t + sigma(u)^2) b(v)` with
/// `a(u, t) = a(alpha) + int_alpha^u a'(w) sigma(w) / sqrt(t + sigma(w)^2) dw`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothFamilyMember {
    pub base: SmoothConeCylinderNet,
    pub t: f64,
    /// Absolute tolerance of the adaptive quadrature.
    pub quad_tol: f64,
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

impl SmoothFamilyMember {
    pub fn new(base: SmoothConeCylinderNet, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::OutOfDomain(format!("smooth family needs t >= 0, got {t}")));
        }
        Ok(Self { base, t, quad_tol: DEFAULT_QUAD_TOL })
    }

    /// Allows `t > -min sigma^2` (minimum estimated on a dense sample).
    pub fn new_experimental(base: SmoothConeCylinderNet, t: f64) -> Result<Self> {
        let [al, be] = base.domain[0];
        let min_sq = (0..=1000)
            .map(|k| base.sigma.eval(al + (be - al) * k as f64 / 1000.0).powi(2))
            .fold(f64::INFINITY, f64::min);
        if !(t > -min_sq) {
            return Err(Error::OutOfDomain(format!("t = {t} must exceed -min sigma^2 = {}", -min_sq)));
        }
        Ok(Self { base, t, quad_tol: DEFAULT_QUAD_TOL })
    }

    pub fn sigma_t(&self, u: f64) -> f64 {
        (self.t + self.base.sigma.eval(u).powi(2)).sqrt()
    }

    pub fn a_t(&self, u: f64) -> Result<Point> {
        let al = self.base.domain[0][0];
        let integrand = |w: f64| {
            let s = self.base.sigma.eval(w);
            self.base.a.d1(w) * (s / (self.t + s * s).sqrt())
        };
        Ok(self.base.a.eval(al) + integrate(&integrand, al, u, self.quad_tol)?)
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<Point> {
        in_domain(&self.base.domain, u, v)?;
        Ok(self.a_t(u)? + self.base.b.eval(v) * self.sigma_t(u))
    }

    /// Exact cone-cylinder data of the `m x n` sampling of this member.
    pub fn sampled_data(&self, m: usize, n: usize) -> Result<ConeCylinderData> {
        let (us, vs) = self.base.grid_nodes(m, n);
        // accumulate a(u, t) interval by interval
        let mut a = Vec::with_capacity(us.len());
        let integrand = |w: f64| {
            let s = self.base.sigma.eval(w);
            self.base.a.d1(w) * (s / (self.t + s * s).sqrt())
        };
        let mut acc = self.base.a.eval(us[0]);
        a.push(acc);
        for k in 1..us.len() {
            acc += integrate(&integrand, us[k - 1], us[k], self.quad_tol)?;
            a.push(acc);
        }
        Ok(ConeCylinderData {
            a,
            sigma: us.iter().map(|&u| self.sigma_t(u)).collect(),
            b: vs.iter().map(|&v| self.base.b.eval(v)).collect(),
            direction: Direction::Rows,
            dim: self.base.dim(),
        })
    }
}

impl Surface for SmoothFamilyMember {
    fn domain(&self) -> [[f64; 2]; 2] {
        self.base.domain
    }

    fn point(&self, u: f64, v: f64) -> Result<Point> {
        self.eval(u, v)
    }

    fn partials(&self, u: f64, v: f64) -> Option<(Point, Point)> {
        let (s, ds) = (self.base.sigma.eval(u), self.base.sigma.d1(u));
        let st = self.sigma_t(u);
        let fu = (self.base.a.d1(u) * s + self.base.b.eval(v) * (s * ds)) / st;
        let fv = self.base.b.d1(v) * st;
        Some((fu, fv))
    }

    fn mixed(&self, u: f64, v: f64) -> Option<Point> {
        let (s, ds) = (self.base.sigma.eval(u), self.base.sigma.d1(u));
        Some(self.base.b.d1(v) * (s * ds / self.sigma_t(u)))
    }
}

/// Samples a family member on the uniform `m x n` grid.
pub fn sample_family(member: &SmoothFamilyMember, m: usize, n: usize, tol: &Tolerances) -> Result<Net> {
    let data = member.sampled_data(m, n)?;
    let net = Net::from_fn(m, n, data.dim, |i, j| data.point(i, j))?;
    validate(&net, tol).into_result()?;
    Ok(net)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for nodes 1, 3, 5, 7 of the Kronrod set
const GAUSS_W: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> Point, a: f64, b: f64) -> (Point, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * KRONROD_W[7];
    let mut g = fc * GAUSS_W[3];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += s * KRONROD_W[i];
        if i % 2 == 1 {
            g += s * GAUSS_W[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss-Kronrod (7, 15) quadrature of a vector integrand.
pub fn integrate(f: &dyn Fn(f64) -> Point, a: f64, b: f64, abs_tol: f64) -> Result<Point> {
    if a == b {
        return Ok(Point::zeros());
    }
    let mut total = Point::zeros();
    let mut stack = vec![(a, b, abs_tol, 0u32)];
    while let Some((lo, hi, eps, depth)) = stack.pop() {
        let (v, err) = gk15(f, lo, hi);
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::Quadrature { a: lo, b: hi, estimate: f64::NAN });
        }
        if err <= eps || (hi - lo).abs() < 1e-12 * (b - a).abs() {
            total += v;
        } else if depth >= 48 {
            return Err(Error::Quadrature { a: lo, b: hi, estimate: err });
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * eps, depth + 1));
            stack.push((mid, hi, 0.5 * eps, depth + 1));
        }
    }
    Ok(total)
}

fn check_interior(s: &dyn Surface, u: f64, v: f64, h: f64) -> Result<()> {
    let [[al, be], [ga, de]] = s.domain();
    if !(u - h >= al && u + h <= be && v - h >= ga && v + h <= de) {
        return Err(Error::OutOfDomain(format!("({u}, {v}) is within {h} of the boundary")));
    }
    Ok(())
}

/// Central-difference partials `(f_u, f_v)`.
pub fn numeric_partials(s: &dyn Surface, u: f64, v: f64, h: f64) -> Result<(Point, Point)> {
    check_interior(s, u, v, h)?;
    let fu = (s.point(u + h, v)? - s.point(u - h, v)?) / (2.0 * h);
    let fv = (s.point(u, v + h)? - s.point(u, v - h)?) / (2.0 * h);
    Ok((fu, fv))
}

pub fn numeric_mixed(s: &dyn Surface, u: f64, v: f64, h: f64) -> Result<Point> {
    check_interior(s, u, v, h)?;
    Ok((s.point(u + h, v + h)? - s.point(u + h, v - h)? - s.point(u - h, v + h)? + s.point(u - h, v - h)?)
        / (4.0 * h * h))
}

fn gram_det(fu: &Point, fv: &Point) -> f64 {
    fu.dot(fu) * fv.dot(fv) - fu.dot(fv).powi(2)
}

/// `<f_u, f_u><f_v, f_v> - <f_u, f_v>^2`, from exact partials when available.
pub fn first_fundamental_det(s: &dyn Surface, u: f64, v: f64, h: f64) -> Result<f64> {
    check_interior(s, u, v, h)?;
    let (fu, fv) = match s.partials(u, v) {
        Some(p) => p,
        None => numeric_partials(s, u, v, h)?,
    };
    Ok(gram_det(&fu, &fv))
}

/// [`first_fundamental_det`] from central differences only.
pub fn first_fundamental_det_numeric(s: &dyn Surface, u: f64, v: f64, h: f64) -> Result<f64> {
    let (fu, fv) = numeric_partials(s, u, v, h)?;
    Ok(gram_det(&fu, &fv))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ConjugateReport {
    /// Largest normal component of `f_uv`.
    pub tangent_residual: f64,
    /// Largest `|f_uv x f_v| / |f_v|`.
    pub cone_residual: f64,
    pub conjugate: bool,
    pub cone: bool,
    pub points: usize,
}

/// Checks `f_uv` against the tangent plane and against `f_v` on an interior
/// `m x n` grid; derivatives exact when available, else differences with step `h`.
pub fn conjugate_net_check(s: &dyn Surface, m: usize, n: usize, h: f64, eps: f64) -> Result<ConjugateReport> {
    let [[al, be], [ga, de]] = s.domain();
    let mut r = ConjugateReport::default();
    for i in 1..=m {
        for j in 1..=n {
            let u = al + (be - al) * i as f64 / (m + 1) as f64;
            let v = ga + (de - ga) * j as f64 / (n + 1) as f64;
            let (fu, fv) = match s.partials(u, v) {
                Some(p) => p,
                None => numeric_partials(s, u, v, h)?,
            };
            let fuv = match s.mixed(u, v) {
                Some(p) => p,
                None => numeric_mixed(s, u, v, h)?,
            };
            let nrm = fu.cross(&fv);
            let tangent = if nrm.norm() > 0.0 { nrm.dot(&fuv).abs() / nrm.norm() } else { 0.0 };
            let cone = if fv.norm() > 0.0 { fuv.cross(&fv).norm() / fv.norm() } else { fuv.norm() };
            r.tangent_residual = r.tangent_residual.max(tangent);
            r.cone_residual = r.cone_residual.max(cone);
            r.points += 1;
        }
    }
    r.conjugate = r.tangent_residual <= eps;
    r.cone = r.cone_residual <= eps;
    Ok(r)
}

/// Area-preserving Christoffel dual `a(u) - b(v)` of a translational surface.
pub fn translational_dual(net: &SmoothConeCylinderNet) -> Result<SmoothConeCylinderNet> {
    if !net.sigma.is_one() {
        return Err(Error::Input("translational dual needs sigma identically 1".into()));
    }
    Ok(SmoothConeCylinderNet { b: net.b.negated(), ..net.clone() })
}

/// Largest vertex distance between the sampled family member and the
/// discrete cone-cylinder family of the sampled base, after the gauge
/// `sigma_0 = 1` of [`crate::construct::extract_cone_cylinder_data`].
pub fn sampling_commutes_residual(
    net: &SmoothConeCylinderNet,
    m: usize,
    n: usize,
    t: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let base = sample_smooth(net, m, n, tol)?;
    let data = crate::construct::extract_cone_cylinder_data(&base, tol)?;
    let s0 = net.sigma.eval(net.domain[0][0]);
    let discrete = crate::deform::cone_cylinder_family(&data, t / (s0 * s0), tol)?;
    let smooth = sample_family(&SmoothFamilyMember::new(net.clone(), t)?, m, n, tol)?;
    let shift = smooth.p(0, 0) - discrete.p(0, 0);
    discrete.translated(&shift).max_vertex_distance(&smooth)
}
