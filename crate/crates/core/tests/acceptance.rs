//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use semiconcave::extension::{
    build_support_set, constant_bound, glue_global, holder_ratio, ExtensionField, Mollified, PartitionOfUnity,
    SupportParams,
};
use semiconcave::funcspace::{hessian_fd, FunctionSpec};
use semiconcave::geometry::{contains, lattice_in_ball, BallRegion, DomainSpec, Where};
use semiconcave::gradients::{hausdorff, reachable_gradients, ReachableParams};
use semiconcave::linalg::{dist, dot, max_symmetric_eigenvalue};
use semiconcave::sampling::{derive_seed, seeded_rng};
use semiconcave::semiconcavity::{certify, estimate_constant, ModulusParams};
use semiconcave::singularity::{
    check_condition_h, deepest_candidate, propagation_directions, trace_singular_arc, transverse_offset, ArcParams,
};
use semiconcave::Result;

const SEED: u64 = 20_240_601;
const SPACING: f64 = 0.01;
const TRIPLES: usize = 10_000;

fn unit() -> BallRegion {
    BallRegion::new(vec![0.0, 0.0], 1.0).unwrap()
}

fn examples() -> [FunctionSpec; 3] {
    [FunctionSpec::NegNorm, FunctionSpec::NegAbsX2, FunctionSpec::NegSqrtX1p4X2sq]
}

fn envelope(f: &FunctionSpec, coefficient: Option<f64>) -> Result<ExtensionField> {
    let s = build_support_set(f, &DomainSpec::half_disk(), &unit(), &SupportParams::with_spacing(SPACING, 1.0))?;
    ExtensionField::new(s, ModulusParams::new(1.0, 0.0)?, coefficient)
}

/// The envelope of all three examples on the unit ball.
fn closed_form(f: &FunctionSpec, x: &[f64]) -> f64 {
    if x[0] >= 0.0 {
        f.eval(x).unwrap()
    } else {
        -x[1].abs() + x[0] * x[0]
    }
}

/// Analytic reachable gradients at the origin, sampled finely.
fn analytic_gradients(k: usize) -> Vec<Vec<f64>> {
    match k {
        0 => (0..=180)
            .map(|i| {
                let t = std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / 180.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        1 => vec![vec![0.0, 1.0], vec![0.0, -1.0]],
        _ => (0..=200).map(|i| vec![0.0, -1.0 + i as f64 / 100.0]).collect(),
    }
}

fn angle_deg(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, b) / (dot(a, a) * dot(b, b)).sqrt()).clamp(-1.0, 1.0).acos().to_degrees()
}

struct Suite {
    failed: usize,
}

impl Suite {
    fn report(&mut self, id: &str, name: &str, outcome: Result<(bool, String)>) {
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            self.failed += 1;
        }
        println!("[{}] {id} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn envelope_oracle() -> Result<(bool, String)> {
    let t = Instant::now();
    let f = FunctionSpec::NegNorm;
    let e = envelope(&f, Some(1.0))?;
    let mut worst: f64 = 0.0;
    for x in lattice_in_ball(&unit(), 0.02) {
        worst = worst.max((e.extend(&x)? - closed_form(&f, &x)).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((worst <= 0.02 && secs <= 120.0, format!("sup error {worst:.3e} <= 0.02, {secs:.1} s <= 120 s")))
}

fn identity(es: &[ExtensionField]) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (f, e) in examples().iter().zip(es) {
        for pair in &e.support.pairs {
            worst = worst.max((e.extend(&pair.y)? - f.eval(&pair.y)?).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |E - u| on support nodes {worst:.3e} <= 1e-12")))
}

fn constant(es: &[ExtensionField]) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, e) in es.iter().enumerate() {
        let params = ModulusParams::new(1.0, constant_bound(&e.params)? + 0.05)?;
        let cert = certify(e, &unit().as_domain(), &unit(), &params, TRIPLES, derive_seed(SEED, i as u64))?;
        ok &= cert.passed && cert.witnesses.is_empty();
        parts.push(format!("ex{} max defect {:.3e}", i + 1, cert.max_defect));
    }
    Ok((ok, format!("C = 6.05; {}", parts.join(", "))))
}

fn gradient_sets(es: &[ExtensionField]) -> Result<(bool, String)> {
    let params = ReachableParams::for_radius(1.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, e) in es.iter().enumerate() {
        let set = reachable_gradients(e, &unit().as_domain(), &[0.0, 0.0], &params)?;
        let d = hausdorff(&set.representatives, &analytic_gradients(i));
        ok &= d <= 0.05;
        parts.push(format!("ex{} {d:.3}", i + 1));
    }
    Ok((ok, format!("Hausdorff <= 0.05: {}", parts.join(", "))))
}

/// Condition verdict and directions from `u` itself.
fn condition_of(f: &FunctionSpec) -> Result<(bool, Option<Vec<f64>>, Vec<Vec<f64>>)> {
    let set = reachable_gradients(f, &DomainSpec::half_disk(), &[0.0, 0.0], &ReachableParams::for_radius(1.0))?;
    let (holds, candidates) = check_condition_h(&set, 0.01)?;
    let p0 = if holds { deepest_candidate(&set, &candidates) } else { None };
    let dirs = match &p0 {
        Some(p) => propagation_directions(&set, p)?,
        None => Vec::new(),
    };
    Ok((holds, p0, dirs))
}

fn directions_match(found: &[Vec<f64>], expected: &[[f64; 2]]) -> bool {
    found.len() == expected.len() && expected.iter().all(|t| found.iter().any(|d| angle_deg(d, t) <= 5.0))
}

fn condition() -> Result<(bool, String)> {
    let (h1, _, d1) = condition_of(&FunctionSpec::NegNorm)?;
    let (h2, _, d2) = condition_of(&FunctionSpec::NegAbsX2)?;
    let (h3, _, _) = condition_of(&FunctionSpec::NegSqrtX1p4X2sq)?;
    let ok = h1 && !h3 && h2 && directions_match(&d1, &[[-1.0, 0.0]]) && directions_match(&d2, &[[1.0, 0.0], [-1.0, 0.0]]);
    Ok((ok, format!("verdicts ({h1}, {h2}, {h3}), directions {d1:.3?} and {d2:.3?}")))
}

/// Largest offset from the ray over `s in [0.05, 0.4]`, and the sign of the
/// first coordinate there.
fn arc_window(e: &ExtensionField, theta: &[f64], p0: Option<Vec<f64>>) -> Result<(f64, bool, bool, Vec<f64>)> {
    let x0 = [0.0, 0.0];
    let arc = trace_singular_arc(e, &unit(), &x0, theta, p0, &ArcParams::for_radius(1.0))?;
    let window: Vec<_> = arc.samples.iter().filter(|s| (0.05 - 1e-12..=0.4 + 1e-12).contains(&s.s)).collect();
    let band = window.iter().map(|s| transverse_offset(&s.point, &x0, theta)).fold(0.0, f64::max);
    let neg = !window.is_empty() && window.iter().all(|s| s.point[0] < 0.0);
    let pos = !window.is_empty() && window.iter().all(|s| s.point[0] > 0.0);
    Ok((band, neg, pos, arc.residuals()))
}

fn arcs(es: &[ExtensionField]) -> Result<(bool, String)> {
    let (_, p1, d1) = condition_of(&FunctionSpec::NegNorm)?;
    let theta1 = d1.first().cloned().unwrap_or(vec![-1.0, 0.0]);
    let (b1, neg1, _, r1) = arc_window(&es[0], &theta1, p1)?;
    let first3 = r1.iter().take(3).fold(0.0, |m: f64, r| m.max(*r));
    let ex1 = b1 <= 0.02 && neg1 && first3 <= 0.25;

    let (_, p2, d2) = condition_of(&FunctionSpec::NegAbsX2)?;
    let forward = d2.iter().find(|d| d[0] > 0.0).cloned().unwrap_or(vec![1.0, 0.0]);
    let (b2, _, pos2, _) = arc_window(&es[1], &forward, p2)?;
    let ex2 = b2 <= 0.02 && pos2;

    let (b3, neg3, _, _) = arc_window(&es[2], &[-1.0, 0.0], None)?;
    let ex3 = b3 <= 0.02 && neg3;
    Ok((
        ex1 && ex2 && ex3,
        format!("offsets {b1:.4}, {b2:.4}, {b3:.4} <= 0.02; sides ({neg1}, {pos2}, {neg3}); first residuals {first3:.3} <= 0.25"),
    ))
}

fn mollification(e2: &ExtensionField) -> Result<(bool, String)> {
    let half = unit().scaled(0.5);
    let params = ModulusParams::new(1.0, e2.constant_bound + 0.05)?;
    let mut ok = true;
    let mut prev: Option<f64> = None;
    let mut parts = Vec::new();
    for (i, h) in [10.0, 20.0, 40.0].into_iter().enumerate() {
        let m = Mollified::new(e2, unit(), h, 21)?;
        let mut sup: f64 = 0.0;
        for x in lattice_in_ball(&half, 0.05) {
            sup = sup.max((m.eval(&x)? - e2.extend(&x)?).abs());
        }
        ok &= sup <= 2.0 / h;
        if let Some(p) = prev {
            ok &= sup <= 0.6 * p;
        }
        prev = Some(sup);
        let cert = certify(&m, &half.as_domain(), &half, &params, TRIPLES, derive_seed(SEED, 10 + i as u64))?;
        ok &= cert.passed;
        parts.push(format!("h={h}: {sup:.3e}, certified {}", cert.passed));
    }
    Ok((ok, parts.join("; ")))
}

fn hessian(e2: &ExtensionField) -> Result<(bool, String)> {
    let m = Mollified::new(e2, unit(), 40.0, 21)?;
    let mut eig = f64::NEG_INFINITY;
    for x in lattice_in_ball(&unit().scaled(0.25), 0.05) {
        eig = eig.max(max_symmetric_eigenvalue(&hessian_fd(&m, &x, 1e-3)?));
    }
    let bound = e2.constant_bound + 0.1;
    Ok((eig <= bound, format!("max eigenvalue {eig:.4} <= {bound}")))
}

fn holder() -> Result<(bool, String)> {
    let mut rng = seeded_rng(derive_seed(SEED, 20));
    let mut point = || loop {
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if dot(&p, &p) <= 1.0 {
            return p;
        }
    };
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        let bound = (1.0 + alpha) * (1.0 + 2f64.powf(2.0 - alpha));
        let mut n = 0;
        while n < 100_000 {
            let (y, x, z) = (point(), point(), point());
            if dist(&x, &z) == 0.0 {
                continue;
            }
            let r = holder_ratio(&y, &x, &z, alpha, 1.0)?;
            worst = worst.max(r / bound);
            if r > bound + 1e-9 {
                violations += 1;
            }
            n += 1;
        }
    }
    Ok((violations == 0, format!("{violations} violations, largest ratio / bound {worst:.4}")))
}

fn affine() -> Result<(bool, String)> {
    let f = FunctionSpec::Affine { coefficients: vec![0.3, -0.7], constant: 0.2 };
    let e = envelope(&f, Some(1e-12))?;
    let mut ext: f64 = 0.0;
    for x in lattice_in_ball(&unit(), 0.05) {
        ext = ext.max((e.extend(&x)? - f.eval(&x)?).abs());
    }
    let m = Mollified::new(&e, unit(), 10.0, 21)?;
    let mut mol: f64 = 0.0;
    for x in lattice_in_ball(&unit().scaled(0.5), 0.1) {
        mol = mol.max((m.eval(&x)? - f.eval(&x)?).abs());
    }

    let g1 = FunctionSpec::Affine { coefficients: vec![0.5], constant: -0.1 };
    let interval = DomainSpec::Box { lo: vec![0.0], hi: vec![1.0] };
    let balls = vec![BallRegion::new(vec![0.0], 0.3)?, BallRegion::new(vec![1.0], 0.3)?];
    let mut locals = Vec::new();
    for b in &balls {
        let s = build_support_set(&g1, &interval, b, &SupportParams::with_spacing(1e-3, b.radius))?;
        locals.push(ExtensionField::new(s, ModulusParams::new(1.0, 0.0)?, Some(1e-12))?);
    }
    let glued = glue_global(PartitionOfUnity::new(interval, balls, 0.1)?, locals, g1.clone())?;
    let mut glue: f64 = 0.0;
    for k in 0..=1000 {
        let y = [-0.29 + 1.58 * k as f64 / 1000.0];
        glue = glue.max((glued.eval(&y)? - g1.eval(&y)?).abs());
    }

    let disk = DomainSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 };
    let up = estimate_constant(&FunctionSpec::SqNorm, &disk, &unit(), 1.0, TRIPLES, derive_seed(SEED, 30))?;
    let down = estimate_constant(&FunctionSpec::NegSqNorm, &disk, &unit(), 1.0, TRIPLES, derive_seed(SEED, 31))?;
    let ok = ext <= 1e-9 && mol <= 1e-9 && glue <= 1e-9 && (up - 1.0).abs() <= 0.05 && (down + 1.0).abs() <= 0.05;
    Ok((ok, format!("extend {ext:.1e}, mollify {mol:.1e}, glue {glue:.1e}; constants {up:.4}, {down:.4}")))
}

fn partition() -> Result<(bool, String)> {
    let u = FunctionSpec::Quadratic { curvature: -1.0, linear: vec![1.0], constant: 0.0 };
    let interval = DomainSpec::Box { lo: vec![0.0], hi: vec![1.0] };
    let params = ModulusParams::new(1.0, -1.0)?;
    let balls = vec![BallRegion::new(vec![0.0], 0.3)?, BallRegion::new(vec![1.0], 0.3)?];
    let mut locals = Vec::new();
    for b in &balls {
        let s = build_support_set(&u, &interval, b, &SupportParams::with_spacing(1e-5, b.radius))?;
        locals.push(ExtensionField::new(s, params, None)?);
    }
    let g = glue_global(PartitionOfUnity::new(interval.clone(), balls, 0.1)?, locals, u.clone())?;
    let (mut range, mut support, mut sum, mut on_domain) = (true, true, 0.0f64, 0.0f64);
    for k in 0..1000 {
        let y = [-0.29 + 1.58 * k as f64 / 999.0];
        let w = g.partition.weights(&y)?;
        sum = sum.max((w.total() - 1.0).abs());
        range &= w.balls.iter().chain([&w.domain]).all(|v| (0.0..=1.0).contains(v));
        for (wj, b) in w.balls.iter().zip(&g.partition.balls) {
            support &= dist(&y, &b.center) < b.radius || *wj == 0.0;
        }
        support &= interval.slack(&y) > 0.0 || w.domain == 0.0;
        if contains(&interval, &y, Where::Closure)? {
            on_domain = on_domain.max((g.eval(&y)? - u.eval(&y)?).abs());
        }
    }
    let ok = range && support && sum <= 1e-12 && on_domain <= 1e-9;
    Ok((ok, format!("in [0,1] {range}, supported {support}, |sum - 1| {sum:.1e}, |glued - u| on domain {on_domain:.1e}")))
}

fn main() -> ExitCode {
    let mut suite = Suite { failed: 0 };
    suite.report("C1", "envelope oracle", envelope_oracle());
    let es: Vec<ExtensionField> = match examples().iter().map(|f| envelope(f, None)).collect() {
        Ok(es) => es,
        Err(e) => {
            println!("[FAIL] setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    suite.report("C2", "identity on the domain", identity(&es));
    suite.report("C3", "constant bound", constant(&es));
    suite.report("C4", "reachable-gradient preservation", gradient_sets(&es));
    suite.report("C5", "condition detector", condition());
    suite.report("C6", "arc tracing", arcs(&es));
    suite.report("C7", "mollification", mollification(&es[1]));
    suite.report("C8", "Hessian bound", hessian(&es[1]));
    suite.report("C9", "Holder seminorm", holder());
    suite.report("C10", "affine reproduction", affine());
    suite.report("C11", "partition of unity", partition());
    println!("{} of 11 criteria passed", 11 - suite.failed);
    if suite.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
