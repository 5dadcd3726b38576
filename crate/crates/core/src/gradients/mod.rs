//! Reachable gradients: gradient samples on shrinking annuli around a
//! point, clustered into representatives, plus hulls and normal cones.

pub mod hull;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::funcspace::{one_sided_quotients, passes_filter, Field, GradientMethod, GradientSample};
use crate::geometry::{fibonacci_sphere, in_closure, in_open, segment_in_closure, DomainSpec, DEFAULT_SEGMENT_PROBES};
use crate::linalg::{axpy, dist, dot, lex_cmp, sub};
use crate::semiconcavity::ModulusParams;

pub use hull::{convex_hull, normal_cone_directions, ConvexPolytope, Facet, HULL_TOL};

/// Default diameter threshold above which a point counts as singular.
pub const DEFAULT_EPS_S: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachableParams {
    /// Outer radius of the first annulus.
    pub r0: f64,
    /// Radius ratio between consecutive annuli, in `(0, 1)`.
    pub ratio: f64,
    pub k_max: usize,
    /// Annuli with index below this are skipped; coarse annuli see the
    /// gradient field far from the base point.
    pub first_annulus: usize,
    /// Seed samples per annulus (before adaptive refinement).
    pub m_a: usize,
    pub eps_c: f64,
    /// Fixed finite-difference step; when absent the step is `h_rel` times
    /// the annulus radius.
    pub h_fd: Option<f64>,
    pub h_rel: f64,
    /// Bisect between neighbouring samples whose gradients differ by more
    /// than `eps_c / 2`.
    pub refine: bool,
}

impl Default for ReachableParams {
    fn default() -> Self {
        ReachableParams {
            r0: 0.2,
            ratio: 0.5,
            k_max: 8,
            first_annulus: 4,
            m_a: 200,
            eps_c: 0.02,
            h_fd: None,
            h_rel: 1e-6,
            refine: true,
        }
    }
}

impl ReachableParams {
    /// Defaults scaled to a ball of radius `delta`.
    pub fn for_radius(delta: f64) -> Self {
        ReachableParams { r0: 0.2 * delta, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Input(m.to_string()));
        if !(self.r0 > 0.0) {
            return bad("r0 must be positive");
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return bad("ratio must lie in (0, 1)");
        }
        if self.k_max == 0 || self.first_annulus >= self.k_max {
            return bad("need first_annulus < k_max");
        }
        if self.m_a == 0 {
            return bad("m_a must be positive");
        }
        if !(self.eps_c > 0.0) {
            return bad("eps_c must be positive");
        }
        if let Some(h) = self.h_fd {
            if !(h > 0.0) {
                return bad("h_fd must be positive");
            }
        }
        if !(self.h_rel > 0.0) {
            return bad("h_rel must be positive");
        }
        Ok(())
    }

    fn step_at(&self, radius: f64) -> f64 {
        self.h_fd.unwrap_or(self.h_rel * radius)
    }
}

/// Approximation of the reachable-gradient set at `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachableGradientSet {
    pub base: Vec<f64>,
    /// Cluster means, pairwise farther apart than `params.eps_c`.
    pub representatives: Vec<Vec<f64>>,
    pub cluster_sizes: Vec<usize>,
    pub samples: Vec<GradientSample>,
    pub params: ReachableParams,
}

impl ReachableGradientSet {
    pub fn diameter(&self) -> f64 {
        let r = &self.representatives;
        let mut d: f64 = 0.0;
        for i in 0..r.len() {
            for j in (i + 1)..r.len() {
                d = d.max(dist(&r[i], &r[j]));
            }
        }
        d
    }

    pub fn hull(&self) -> Result<ConvexPolytope> {
        convex_hull(&self.representatives)
    }
}

/// Accepted gradient at `y`, or `None` when `y` is not interior, the stencil
/// leaves the closure, the field cannot be evaluated there, or the one-sided
/// quotients disagree by more than `eps_c`.
fn probe<F: Field + ?Sized>(field: &F, domain: &DomainSpec, y: &[f64], step: f64, eps_c: f64) -> Result<Option<GradientSample>> {
    if !in_open(domain, y) {
        return Ok(None);
    }
    let q = match one_sided_quotients(field, domain, y, step) {
        Ok(q) => q,
        Err(Error::Stencil { .. } | Error::Input(_) | Error::Evaluation(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !passes_filter(&q, eps_c) {
        return Ok(None);
    }
    Ok(Some(match field.exact_gradient(y) {
        Some(g) => GradientSample { point: y.to_vec(), gradient: g, method: GradientMethod::Analytic },
        None => GradientSample {
            point: y.to_vec(),
            gradient: q.iter().map(|(u, d)| 0.5 * (u + d)).collect(),
            method: GradientMethod::CentralDifference { h_fd: step },
        },
    }))
}

struct CircleSampler<'a, F: Field + ?Sized> {
    field: &'a F,
    domain: &'a DomainSpec,
    center: &'a [f64],
    radius: f64,
    step: f64,
    eps_c: f64,
    budget: usize,
    out: Vec<GradientSample>,
}

impl<F: Field + ?Sized> CircleSampler<'_, F> {
    fn at(&mut self, angle: f64) -> Result<Option<GradientSample>> {
        let y = vec![self.center[0] + self.radius * angle.cos(), self.center[1] + self.radius * angle.sin()];
        self.budget = self.budget.saturating_sub(1);
        let s = probe(self.field, self.domain, &y, self.step, self.eps_c)?;
        if let Some(s) = &s {
            self.out.push(s.clone());
        }
        Ok(s)
    }

    fn refine(&mut self, a: f64, ga: Option<Vec<f64>>, b: f64, gb: Option<Vec<f64>>) -> Result<()> {
        if self.budget == 0 || self.radius * (b - a) < 8.0 * self.step {
            return Ok(());
        }
        match (&ga, &gb) {
            (None, None) => return Ok(()),
            (Some(u), Some(v)) if dist(u, v) <= 0.5 * self.eps_c => return Ok(()),
            _ => {}
        }
        let mid = 0.5 * (a + b);
        let gm = self.at(mid)?.map(|s| s.gradient);
        if gm.is_none() && ga.is_some() && gb.is_some() {
            // a rejected midpoint between two accepted samples: try the quarter points once
            let g1 = self.at(0.5 * (a + mid))?.map(|s| s.gradient);
            let g3 = self.at(0.5 * (mid + b))?.map(|s| s.gradient);
            self.refine(a, ga, 0.5 * (a + mid), g1)?;
            return self.refine(0.5 * (mid + b), g3, b, gb);
        }
        self.refine(a, ga, mid, gm.clone())?;
        self.refine(mid, gm, b, gb)
    }
}

/// Samples gradients of `field` on annuli `r_{k+1} <= |y - x| <= r_k`,
/// `r_k = r0 ratio^k`, and clusters them into representatives.
pub fn reachable_gradients<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    x: &[f64],
    params: &ReachableParams,
) -> Result<ReachableGradientSet> {
    params.validate()?;
    check_dim(domain.dim(), x)?;
    if !in_closure(domain, x) {
        return Err(Error::Input(format!("base point {x:?} is outside the closure")));
    }
    let n = x.len();
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut samples = Vec::new();
    for k in params.first_annulus..params.k_max {
        let r_hi = params.r0 * params.ratio.powi(k as i32);
        let radius = r_hi * params.ratio.sqrt();
        let step = params.step_at(radius);
        match n {
            1 => {
                for s in [-1.0, 1.0] {
                    if let Some(g) = probe(field, domain, &[x[0] + s * radius], step, params.eps_c)? {
                        samples.push(g);
                    }
                }
            }
            2 => {
                let offset = 2.0 * PI * ((k as f64 * golden).fract()) / params.m_a as f64;
                let mut circle = CircleSampler {
                    field,
                    domain,
                    center: x,
                    radius,
                    step,
                    eps_c: params.eps_c,
                    budget: 8 * params.m_a,
                    out: Vec::new(),
                };
                let angles: Vec<f64> = (0..=params.m_a).map(|j| offset + 2.0 * PI * j as f64 / params.m_a as f64).collect();
                let mut grads = Vec::with_capacity(angles.len());
                for &a in &angles[..params.m_a] {
                    grads.push(circle.at(a)?.map(|s| s.gradient));
                }
                grads.push(grads[0].clone());
                if params.refine {
                    for j in 0..params.m_a {
                        circle.refine(angles[j], grads[j].clone(), angles[j + 1], grads[j + 1].clone())?;
                    }
                }
                samples.extend(circle.out);
            }
            _ => {
                for d in fibonacci_sphere(params.m_a) {
                    if let Some(g) = probe(field, domain, &axpy(x, radius, &d), step, params.eps_c)? {
                        samples.push(g);
                    }
                }
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Isolation(x.to_vec()));
    }
    let vectors: Vec<Vec<f64>> = samples.iter().map(|s| s.gradient.clone()).collect();
    let clusters = cluster_gradients(&vectors, params.eps_c);
    Ok(ReachableGradientSet {
        base: x.to_vec(),
        representatives: clusters.iter().map(|c| c.0.clone()).collect(),
        cluster_sizes: clusters.iter().map(|c| c.1).collect(),
        samples,
        params: params.clone(),
    })
}

/// Deterministic clustering: a leader pass at radius `eps/2` over the
/// lexicographically sorted vectors, then repeated merging of the closest
/// pair of cluster means until all means are farther apart than `eps`.
/// Returns `(mean, size)` pairs.
pub fn cluster_gradients(vectors: &[Vec<f64>], eps: f64) -> Vec<(Vec<f64>, usize)> {
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&vectors[a], &vectors[b]));
    let mut leaders: Vec<Vec<f64>> = Vec::new();
    let mut sums: Vec<Vec<f64>> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for &i in &order {
        let v = &vectors[i];
        match leaders.iter().position(|l| dist(l, v) <= 0.5 * eps) {
            Some(j) => {
                sums[j] = axpy(&sums[j], 1.0, v);
                counts[j] += 1;
            }
            None => {
                leaders.push(v.clone());
                sums.push(v.clone());
                counts.push(1);
            }
        }
    }
    let mut means: Vec<Vec<f64>> = sums.iter().zip(&counts).map(|(s, &c)| s.iter().map(|x| x / c as f64).collect()).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..means.len() {
            for j in (i + 1)..means.len() {
                let d = dist(&means[i], &means[j]);
                if d <= eps && best.map_or(true, |(b, _, _)| d < b) {
                    best = Some((d, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let (ci, cj) = (counts[i] as f64, counts[j] as f64);
        means[i] = means[i].iter().zip(&means[j]).map(|(a, b)| (ci * a + cj * b) / (ci + cj)).collect();
        counts[i] += counts[j];
        means.remove(j);
        counts.remove(j);
    }
    means.into_iter().zip(counts).collect()
}

/// Symmetric Hausdorff distance between finite sets.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let directed = |s: &[Vec<f64>], t: &[Vec<f64>]| {
        s.iter()
            .map(|p| t.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// `u(y) - u(x) - <p, y - x> - C|y - x|^{1+α}`; nonpositive for reachable
/// gradients `p` when `C` is a valid constant.
pub fn supergradient_defect<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    x: &[f64],
    p: &[f64],
    y: &[f64],
    params: &ModulusParams,
) -> Result<f64> {
    params.validate()?;
    check_dim(domain.dim(), x)?;
    check_dim(domain.dim(), p)?;
    check_dim(domain.dim(), y)?;
    if !segment_in_closure(domain, x, y, DEFAULT_SEGMENT_PROBES)? {
        return Err(Error::Hypothesis(format!("segment [{x:?}, {y:?}] leaves the closure")));
    }
    if x == y {
        return Ok(0.0);
    }
    let d = sub(y, x);
    Ok(field.value(y)? - field.value(x)? - dot(p, &d) - params.c * dist(x, y).powf(1.0 + params.alpha))
}

/// Whether the representatives at `x` spread wider than `eps_s`.
pub fn is_singular<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    x: &[f64],
    eps_s: f64,
    params: &ReachableParams,
) -> Result<bool> {
    Ok(reachable_gradients(field, domain, x, params)?.diameter() > eps_s)
}

/// Points of the boundary of the hull of the representatives, at spacing
/// `eps_g`, farther than `eps_c` from every representative and from every
/// raw gradient sample. Empty output means the hull boundary is covered by
/// the reachable set.
pub fn hull_gap(set: &ReachableGradientSet, eps_g: f64) -> Result<Vec<Vec<f64>>> {
    if !(eps_g > 0.0) {
        return Err(Error::Input("eps_g must be positive".into()));
    }
    let poly = set.hull()?;
    if poly.affine_dim == 0 {
        return Ok(Vec::new());
    }
    let eps = set.params.eps_c;
    let far = |p: &Vec<f64>| {
        set.representatives.iter().all(|r| dist(r, p) > eps) && set.samples.iter().all(|s| dist(&s.gradient, p) > eps)
    };
    Ok(poly.boundary_points(eps_g).into_iter().filter(far).collect())
}
