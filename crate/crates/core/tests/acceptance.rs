//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs without the libtest harness so the report is always printed:
//! `cargo test -p combescure --test acceptance`.

use std::time::{Duration, Instant};

use combescure::classify::{classify, cone_net_kind, koenigs_residual};
use combescure::construct::{complete_L, l_shape_class_ii, CompletionClass, Direction, LShapedNet, TwoByTwoClass};
use combescure::deform::{
    christoffel_dual, class_i_m1_zero_branch, cone_cylinder_family, family_2x2_class_i, family_2x2_class_ii,
    hyperbolic_family, propagate_default, DeformationFamily, SystemPolynomial,
};
use combescure::geom::{intersect_lines, sin_angle, Point};
use combescure::isotropic::{delta_plane, delta_point, dual_family_invariants};
use combescure::net::{are_parallel_nets, mixed_area, Net, Quad, Side, Tolerances};
use combescure::ratios::{local_frame, opposite_ratio, simple_ratio_points};
use combescure::samples::{self, SampleRng};
use combescure::smooth::{
    conjugate_net_check, first_fundamental_det, sample_smooth, ScalarCurve, SmoothConeCylinderNet,
    SmoothFamilyMember, VectorCurve,
};
use rand::RngExt;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

/// Relative difference of two positive quantities.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn tri_area(p: &Point, q: &Point, r: &Point) -> f64 {
    0.5 * (q - p).cross(&(r - p)).norm()
}

fn oriented_tri(p: &Point, q: &Point, r: &Point) -> f64 {
    0.5 * (q - p).cross(&(r - p)).z
}

fn shoelace(q: &Quad) -> f64 {
    let v = q.vertices();
    0.5 * (0..4).map(|k| v[k].x * v[(k + 1) % 4].y - v[(k + 1) % 4].x * v[k].y).sum::<f64>()
}

fn ratio_identities(tol: &Tolerances) -> Outcome {
    let start = Instant::now();
    let mut rng = samples::rng(1);
    let (mut worst_eq, mut worst_area, mut positive, mut skipped) = (0.0f64, 0.0f64, 0usize, 0usize);
    let total = 10_000;
    for _ in 0..total {
        let q = samples::convex_quad(&mut rng);
        let (a, b, c, d) = (q.a, q.b, q.c, q.d);
        let r = opposite_ratio(&q, Side::AB, tol).unwrap();
        let hit = intersect_lines(&a, &(c - a), &b, &(d - b)).unwrap();
        let qq = hit.point;
        let e1 = tri_area(&a, &qq, &b) / tri_area(&c, &qq, &d);
        let e2 = (a - qq).norm() * (b - qq).norm() / ((c - qq).norm() * (d - qq).norm());
        let mut vals = vec![e1, e2];
        // lines BC and AD meet at S unless parallel
        match intersect_lines(&b, &(c - b), &a, &(d - a)) {
            Some(s) if s.point.norm() < 1e4 => {
                let s = s.point;
                vals.push((a - s).norm() * (b - s).norm() / ((c - s).norm() * (d - s).norm()));
                vals.push(tri_area(&a, &s, &b) / tri_area(&c, &s, &d));
                vals.push(1.0 / (1.0 - shoelace(&q) / oriented_tri(&a, &b, &s)));
            }
            _ => skipped += 1,
        }
        for v in vals {
            worst_eq = worst_eq.max(rel(r, v));
        }
        // frame identity with O = A, A1 = B, B1 = C, A2 = D
        let l = simple_ratio_points(&a, &b, &c, &d, tol).unwrap();
        let m = simple_ratio_points(&a, &d, &c, &b, tol).unwrap();
        let lhs = shoelace(&q) / oriented_tri(&a, &b, &d);
        worst_area = worst_area.max(rel(lhs, (l + m + 2.0) / (1.0 - l * m)));
        if l + 1.0 > 0.0 && m + 1.0 > 0.0 && 1.0 - l * m > 0.0 {
            positive += 1;
        }
    }
    let el = start.elapsed();
    let ok = worst_eq < 1e-9 && worst_area < 1e-9 && positive == total && el < Duration::from_secs(5);
    outcome(
        ok,
        format!(
            "{total} quads: ratio expressions {worst_eq:.2e}, area ratio {worst_area:.2e}, positivity {positive}/{total}, far-S skipped {skipped}, {:.2}s",
            el.as_secs_f64()
        ),
    )
}

struct Corpus {
    class_i: Vec<Net>,
    class_ii: Vec<Net>,
    perturbed: Vec<Net>,
}

fn corpus(tol: &Tolerances) -> Corpus {
    let mut rng = samples::rng(2);
    let class_i = (0..100)
        .map(|k| {
            let m = 1 + k % 7;
            let n = 2 + (k / 7) % 8;
            samples::doubled_cone_cylinder(&mut rng, m, n, if k % 2 == 0 { 2 } else { 3 }, tol)
        })
        .collect();
    let class_ii = (0..100)
        .map(|k| samples::class_ii_net(&mut rng, 2 + k % 5, 2 + (k / 5) % 5, if k % 2 == 0 { 2 } else { 3 }, tol))
        .collect();
    let perturbed = (0..100).map(|k| samples::perturbed_grid(&mut rng, 2 + k % 4, 2 + (k / 4) % 4, 0.1, tol)).collect();
    Corpus { class_i, class_ii, perturbed }
}

fn classification(c: &Corpus, tol: &Tolerances, build: Duration) -> Outcome {
    let start = Instant::now();
    let mut worst_i: f64 = 0.0;
    let mut worst_ii: f64 = 0.0;
    let (mut ok_i, mut ok_ii, mut ok_p) = (0, 0, 0);
    for net in &c.class_i {
        let v = classify(net, tol).unwrap();
        let r = v.residual_i_rows.min(v.residual_i_cols);
        worst_i = worst_i.max(r);
        if (v.class_i_rows || v.class_i_cols) && r < 1e-8 {
            ok_i += 1;
        }
    }
    for net in &c.class_ii {
        let v = classify(net, tol).unwrap();
        worst_ii = worst_ii.max(v.residual_ii);
        if v.class_ii && v.residual_ii < 1e-8 {
            ok_ii += 1;
        }
    }
    for net in &c.perturbed {
        if !classify(net, tol).unwrap().deformable {
            ok_p += 1;
        }
    }
    let el = start.elapsed() + build;
    outcome(
        ok_i == 100 && ok_ii == 100 && ok_p == 100 && el < Duration::from_secs(10),
        format!(
            "class (i) {ok_i}/100 (max residual {worst_i:.2e}), class (ii) {ok_ii}/100 (max {worst_ii:.2e}), perturbed not deformable {ok_p}/100, {:.2}s",
            el.as_secs_f64()
        ),
    )
}

fn koenigs(c: &Corpus, tol: &Tolerances) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for net in c.class_i.iter().chain(&c.class_ii) {
        let r = koenigs_residual(net, tol).unwrap();
        worst = worst.max(r);
        if r >= 1e-8 {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("200 nets, max |product - 1| = {worst:.2e}, failing {bad}"))
}

fn closed_forms(tol: &Tolerances) -> Outcome {
    let mut rng = samples::rng(4);
    let ts: Vec<f64> = (0..=100).map(|k| -0.2 + 0.5 * k as f64 / 100.0).collect();
    let (mut worst_i, mut worst_ii): (f64, f64) = (0.0, 0.0);
    let mut errors = 0;
    for k in 0..100 {
        let dir = if k % 2 == 0 { Direction::Rows } else { Direction::Cols };
        let net = samples::two_by_two(&mut rng, TwoByTwoClass::I(dir), tol);
        let frame = local_frame(&net, 1, 1, tol).unwrap();
        let fam = family_2x2_class_i(&frame, tol).unwrap();
        for &t in &ts {
            match fam.x(t) {
                Ok(x) => {
                    for i in 0..4 {
                        let p = SystemPolynomial { l: frame.l[i], m: frame.m[i] };
                        worst_i = worst_i.max(p.eval(x[i], x[(i + 1) % 4]).abs());
                    }
                }
                Err(_) => errors += 1,
            }
        }
        let net = samples::two_by_two(&mut rng, TwoByTwoClass::II, tol);
        let frame = local_frame(&net, 1, 1, tol).unwrap();
        let k = family_2x2_class_ii(&frame, tol).unwrap();
        for &t in &ts {
            let x = k.x(t).unwrap();
            for i in 0..4 {
                let p = SystemPolynomial { l: frame.l[i], m: frame.m[i] };
                worst_ii = worst_ii.max(p.eval(x[i], x[(i + 1) % 4]).abs());
            }
        }
    }
    outcome(
        worst_i < 1e-10 && worst_ii < 1e-10 && errors == 0,
        format!("t in [-0.2, 0.3] x 101: class (i) max |P| {worst_i:.2e}, class (ii) {worst_ii:.2e}, domain errors {errors}"),
    )
}

fn edges_differ(a: &Net, b: &Net) -> bool {
    let mut worst: f64 = 0.0;
    for (f, g) in a.faces().zip(b.faces()) {
        for s in Side::ALL {
            worst = worst.max(rel(f.side_vector(s).norm(), g.side_vector(s).norm()));
        }
    }
    worst > 1e-6
}

fn max_area_error(a: &Net, b: &Net) -> f64 {
    a.faces()
        .zip(b.faces())
        .map(|(f, g)| {
            let n = f.normal().unwrap();
            rel(f.area_wrt(&n), g.area_wrt(&n))
        })
        .fold(0.0, f64::max)
}

#[derive(Default)]
struct FamilyStats {
    members: usize,
    area: f64,
    nonparallel: usize,
    congruent: usize,
    errors: Vec<String>,
}

impl FamilyStats {
    fn record(&mut self, base: &Net, out: combescure::Result<Net>, tol: &Tolerances, what: &str) {
        match out {
            Ok(net) => {
                self.members += 1;
                self.area = self.area.max(max_area_error(base, &net));
                if !are_parallel_nets(base, &net, tol).unwrap() {
                    self.nonparallel += 1;
                }
                if !edges_differ(base, &net) {
                    self.congruent += 1;
                }
            }
            Err(e) => self.errors.push(format!("{what}: {e}")),
        }
    }

    fn ok(&self) -> bool {
        self.area < 1e-9 && self.nonparallel == 0 && self.congruent == 0 && self.errors.is_empty()
    }

    fn summary(&self, name: &str) -> String {
        format!(
            "{name}: {} members, area {:.2e}, non-parallel {}, congruent {}, errors {}{}",
            self.members,
            self.area,
            self.nonparallel,
            self.congruent,
            self.errors.len(),
            self.errors.first().map(|e| format!(" ({e})")).unwrap_or_default()
        )
    }
}

fn deformation_invariants(c: &Corpus, tol: &Tolerances) -> Outcome {
    let ts = [-0.1, 0.1, 0.25];
    let mut prop = FamilyStats::default();
    let mut hyp = FamilyStats::default();
    let mut cc = FamilyStats::default();
    let mut rng = samples::rng(5);
    let cones: Vec<_> =
        (0..50).map(|k| samples::cone_cylinder_net(&mut rng, 1 + k % 6, 1 + k % 5, 2 + k % 2, tol)).collect();
    for net in c.class_i.iter().chain(&c.class_ii).chain(cones.iter().map(|(_, n)| n)) {
        for t in ts {
            prop.record(net, propagate_default(net, t, tol), tol, &format!("{}x{} t={t}", net.m(), net.n()));
        }
    }
    for net in &c.class_ii {
        let dual = christoffel_dual(net, tol).unwrap();
        for t in ts {
            hyp.record(net, hyperbolic_family(net, &dual, t, tol), tol, &format!("t={t}"));
        }
    }
    for (data, net) in &cones {
        for t in ts {
            cc.record(net, cone_cylinder_family(data, t, tol), tol, &format!("t={t}"));
        }
    }
    outcome(
        prop.ok() && hyp.ok() && cc.ok(),
        format!("{}; {}; {}", prop.summary("propagate"), hyp.summary("hyperbolic"), cc.summary("cone-cylinder")),
    )
}

fn christoffel(c: &Corpus, tol: &Tolerances) -> Outcome {
    let (mut diag, mut mixed, mut area, mut law): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for net in &c.class_ii {
        let dual = christoffel_dual(net, tol).unwrap();
        for (f, g) in net.faces().zip(dual.faces()) {
            diag = diag.max(sin_angle(&(g.c - g.a), &(f.d - f.b))).max(sin_angle(&(g.d - g.b), &(f.c - f.a)));
            let n = f.normal().unwrap();
            let af = f.area_wrt(&n);
            mixed = mixed.max(mixed_area(&f, &g, tol).unwrap().abs() / af.abs());
            area = area.max(rel(af.abs(), g.area_wrt(&n).abs()));
            // opposite ratios from the four triangles around the diagonal intersection
            let q = intersect_lines(&f.a, &(f.c - f.a), &f.b, &(f.d - f.b)).unwrap().point;
            let v = f.vertices();
            let w = g.vertices();
            let t: Vec<f64> = (0..4).map(|k| tri_area(&v[k], &q, &v[(k + 1) % 4])).collect();
            for k in 0..4 {
                let ratio = t[k] / t[(k + 2) % 4];
                let e = (v[(k + 1) % 4] - v[k]).norm();
                let es = (w[(k + 1) % 4] - w[k]).norm();
                law = law.max(rel(e / es, ratio.sqrt()));
            }
        }
    }
    outcome(
        diag < 1e-9 && mixed < 1e-9 && area < 1e-9 && law < 1e-9,
        format!("100 nets: diagonals {diag:.2e}, mixed/area {mixed:.2e}, areas {area:.2e}, sqrt law {law:.2e}"),
    )
}

struct LParams {
    face00: [Point; 4],
    row: Vec<(Point, f64)>,
    col: Vec<(Point, f64)>,
}

fn random_l_params(rng: &mut SampleRng, m: usize, n: usize) -> LParams {
    let amp = 0.05;
    let mut g = |i: usize, j: usize| {
        Point::new(i as f64 + rng.random_range(-amp..amp), j as f64 + rng.random_range(-amp..amp), 0.0)
    };
    let face00 = [g(0, 0), g(1, 0), g(1, 1), g(0, 1)];
    let row = (2..=n).map(|j| (g(0, j), 1.0)).collect();
    let col = (2..=m).map(|i| (g(i, 0), 1.0)).collect();
    let mut p = LParams { face00, row, col };
    for (_, r) in p.row.iter_mut().chain(p.col.iter_mut()) {
        *r += rng.random_range(-0.1..0.1);
    }
    p
}

fn build_l(p: &LParams, tol: &Tolerances) -> combescure::Result<LShapedNet> {
    l_shape_class_ii(p.face00, &p.row, &p.col, 2, tol)
}

fn l_completion(tol: &Tolerances) -> Outcome {
    let mut rng = samples::rng(7);
    let mut round: f64 = 0.0;
    let mut lip = Vec::new();
    let mut errors = 0;
    for _ in 0..20 {
        let net = samples::class_ii_net(&mut rng, 6, 6, 2, tol);
        match complete_L(&LShapedNet::from_net(&net), CompletionClass::II, tol) {
            Ok(back) => round = round.max(back.max_vertex_distance(&net).unwrap()),
            Err(_) => errors += 1,
        }
    }
    for _ in 0..10 {
        let p = loop {
            let p = random_l_params(&mut rng, 6, 6);
            if build_l(&p, tol).and_then(|l| complete_L(&l, CompletionClass::II, tol)).is_ok() {
                break p;
            }
        };
        let base = complete_L(&build_l(&p, tol).unwrap(), CompletionClass::II, tol).unwrap();
        let dir = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0).normalize();
        let ratios: Vec<f64> = [1e-6, 1e-7]
            .iter()
            .map(|&eps| {
                let mut q = LParams { face00: p.face00, row: p.row.clone(), col: p.col.clone() };
                q.row[1].0 += dir * eps;
                q.face00[2] += dir * eps;
                let out = complete_L(&build_l(&q, tol).unwrap(), CompletionClass::II, tol).unwrap();
                out.max_vertex_distance(&base).unwrap() / eps
            })
            .collect();
        lip.push(ratios);
    }
    let bounded = lip.iter().all(|r| r[0] < 1e3 && r[1] < 1e3 && rel(r[0], r[1]) < 0.1);
    let max_ratio = lip.iter().flatten().fold(0.0f64, |a, b| a.max(*b));
    outcome(
        round < 1e-8 && errors == 0 && bounded,
        format!("6x6 round trip {round:.2e} (errors {errors}); FD ratio max {max_ratio:.2} at eps 1e-6/1e-7, consistent {bounded}"),
    )
}

fn isotropic(tol: &Tolerances) -> Outcome {
    let mut rng = samples::rng(8);
    let mut inv: f64 = 0.0;
    for _ in 0..1000 {
        let p = Point::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        inv = inv.max((delta_plane(&delta_point(&p)) - p).norm());
    }
    let mut drift: f64 = 0.0;
    let mut planar: f64 = 0.0;
    let mut isotropy: f64 = 0.0;
    let mut errors = Vec::new();
    let ts: Vec<f64> = (0..=10).map(|k| 0.025 * k as f64).collect();
    let mut families = Vec::new();
    for _ in 0..5 {
        let net = samples::class_ii_net(&mut rng, 3, 4, 3, tol);
        families.push(DeformationFamily::propagated(net.clone(), tol).unwrap());
        families.push(DeformationFamily::hyperbolic(net, tol).unwrap());
        let mut data = samples::cone_cylinder_data(&mut rng, 4, 4, 3);
        data.sigma[1] = data.sigma[0];
        data.sigma[3] = data.sigma[2];
        families.push(DeformationFamily::cone_cylinder(data, tol).unwrap());
    }
    for fam in &families {
        match dual_family_invariants(fam, &ts, tol) {
            Ok(r) => {
                drift = drift.max(r.max_top_view_drift);
                planar = planar.max(r.max_cylinder_planarity.unwrap_or(0.0));
                isotropy = isotropy.max(r.max_cylinder_isotropy.unwrap_or(0.0));
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    outcome(
        inv <= 1e-12 && drift < 1e-9 && planar < 1e-8 && isotropy < 1e-8 && errors.is_empty(),
        format!(
            "involution {inv:.1e}; {} families x 11 samples: top-view drift {drift:.2e}; cylinder duals planarity {planar:.2e}, z-component of plane normal {isotropy:.2e}; errors {}",
            families.len(),
            errors.len()
        ),
    )
}

fn random_poly_surface(rng: &mut SampleRng) -> SmoothConeCylinderNet {
    let mut c = |amp: f64| rng.random_range(-amp..amp);
    let a = VectorCurve::Poly {
        coeffs: vec![
            vec![c(0.5), c(0.5), c(0.5)],
            vec![1.0 + c(0.1), c(0.2), c(0.3)],
            vec![c(0.2), c(0.2), c(0.4)],
            vec![c(0.1), c(0.1), c(0.2)],
        ],
    };
    let sigma = ScalarCurve::Poly { coeffs: vec![1.0 + c(0.1), c(0.4), c(0.2)] };
    let b = VectorCurve::Poly {
        coeffs: vec![
            vec![c(0.5), c(0.5), c(0.5)],
            vec![c(0.2), 1.0 + c(0.1), c(0.3)],
            vec![c(0.2), c(0.2), c(0.4)],
            vec![c(0.1), c(0.1), c(0.2)],
        ],
    };
    SmoothConeCylinderNet::new(a, sigma, b, [[0.0, 1.0], [0.0, 1.0]]).expect("regular")
}

fn smooth_family(tol: &Tolerances) -> Outcome {
    let start = Instant::now();
    let mut rng = samples::rng(9);
    let (mut det, mut conj, mut cone_fail) = (0.0f64, 0.0f64, 0);
    for _ in 0..20 {
        let s = random_poly_surface(&mut rng);
        let members: Vec<SmoothFamilyMember> =
            [0.0, 0.3, 1.0].iter().map(|&t| SmoothFamilyMember::new(s.clone(), t).unwrap()).collect();
        for i in 1..=20 {
            for j in 1..=20 {
                let (u, v) = (i as f64 / 21.0, j as f64 / 21.0);
                let d: Vec<f64> = members.iter().map(|m| first_fundamental_det(m, u, v, 1e-4).unwrap()).collect();
                det = det.max(rel(d[0], d[1])).max(rel(d[0], d[2]));
            }
        }
        for m in &members {
            let r = conjugate_net_check(m, 20, 20, 1e-4, 1e-12).unwrap();
            conj = conj.max(r.tangent_residual).max(r.cone_residual);
        }
        let net = sample_smooth(&s, 6, 6, tol).unwrap();
        if !cone_net_kind(&net, tol).rows.cone_cylinder {
            cone_fail += 1;
        }
    }
    let el = start.elapsed();
    outcome(
        det < 1e-6 && conj < 1e-12 && cone_fail == 0 && el < Duration::from_secs(30),
        format!(
            "20 surfaces x 400 points x t in {{0, 0.3, 1}}: det drift {det:.2e}; conjugate residual {conj:.1e}; samples not cone-cylinder {cone_fail}; {:.2}s",
            el.as_secs_f64()
        ),
    )
}

fn m1_zero_branch() -> Outcome {
    let mut rng = samples::rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let l1 = rng.random_range(-0.9..3.0);
        let t = rng.random_range(-0.5..1.0);
        let p = SystemPolynomial { l: l1, m: 0.0 };
        worst = worst.max(p.eval(1.0 + t, class_i_m1_zero_branch(l1, t)).abs());
    }
    outcome(worst < 1e-12, format!("10000 samples, max |P_1| = {worst:.2e}"))
}

fn main() {
    let tol = Tolerances::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("ratio identities", ratio_identities(&tol)));
    let start = Instant::now();
    let c = corpus(&tol);
    let build = start.elapsed();
    results.push(("classification soundness", classification(&c, &tol, build)));
    results.push(("Koenigs necessity", koenigs(&c, &tol)));
    results.push(("closed-form 2x2 families", closed_forms(&tol)));
    results.push(("deformation invariants", deformation_invariants(&c, &tol)));
    results.push(("Christoffel dual", christoffel(&c, &tol)));
    results.push(("L-completion uniqueness and continuity", l_completion(&tol)));
    results.push(("isotropic duality", isotropic(&tol)));
    results.push(("smooth family", smooth_family(&tol)));
    results.push(("m1 = 0 branch regression", m1_zero_branch()));
    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        if !o.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
