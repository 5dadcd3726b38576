//! The finite set of `(y, u(y), p)` data the envelope minimizes over.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::funcspace::{one_sided_quotients, passes_filter, Field};
use crate::geometry::{boundary_sample, closure_grid, BallRegion, DomainSpec};
use crate::gradients::{cluster_gradients, reachable_gradients, ReachableParams};
use crate::linalg::dist;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Grid node where the nondifferentiability filter passed.
    Smooth,
    /// Representative of the reachable set at a kink or boundary point.
    Reachable,
    /// Differentiable point on a small circle around a point with several
    /// representatives; supplies the gradients between them.
    Ring,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportPair {
    pub y: Vec<f64>,
    pub u: f64,
    pub p: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    pub pairs: Vec<SupportPair>,
    pub ball: BallRegion,
    pub spacing: f64,
}

impl SupportSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    /// Distinct base points, in insertion order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for pair in &self.pairs {
            if out.last() != Some(&pair.y) {
                out.push(pair.y.clone());
            }
        }
        out
    }

    /// Builds a support set directly from a list of pairs.
    pub fn from_pairs(pairs: Vec<SupportPair>, ball: BallRegion, spacing: f64) -> Result<Self> {
        ball.validate()?;
        if pairs.is_empty() {
            return Err(Error::Geometry("support set is empty".into()));
        }
        for pair in &pairs {
            check_dim(ball.dim(), &pair.y)?;
            check_dim(ball.dim(), &pair.p)?;
            if !ball.contains_closed(&pair.y) {
                return Err(Error::Input(format!("support point {:?} outside the ball", pair.y)));
            }
        }
        Ok(SupportSet { pairs, ball, spacing })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportParams {
    pub spacing: f64,
    /// Step of the nondifferentiability filter at grid nodes.
    pub h_fd: f64,
    pub eps_c: f64,
    /// Probe for kink and boundary points; `r0` should stay below the
    /// grid spacing so reachable sets stay local.
    pub reachable: ReachableParams,
    pub include_boundary: bool,
    /// Radius of the ring around kinks, as a fraction of the spacing; zero
    /// disables ring pairs.
    pub ring_fraction: f64,
}

impl SupportParams {
    /// Defaults for a ball of radius `delta` at grid spacing `0.01 delta`.
    pub fn for_radius(delta: f64) -> Self {
        Self::with_spacing(0.01 * delta, delta)
    }

    pub fn with_spacing(spacing: f64, delta: f64) -> Self {
        SupportParams {
            spacing,
            h_fd: 1e-5 * delta,
            eps_c: 0.02,
            reachable: ReachableParams { r0: 0.2 * spacing, ..Default::default() },
            include_boundary: true,
            ring_fraction: 0.25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) || !(self.h_fd > 0.0) || !(self.eps_c > 0.0) {
            return Err(Error::Input("support spacing, h_fd and eps_c must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.ring_fraction) {
            return Err(Error::Input(format!("ring fraction must lie in [0, 0.5), got {}", self.ring_fraction)));
        }
        self.reachable.validate()
    }
}

fn push_reachable<F: Field + ?Sized>(
    out: &mut Vec<SupportPair>,
    field: &F,
    domain: &DomainSpec,
    y: &[f64],
    uy: f64,
    ball: &BallRegion,
    params: &SupportParams,
) -> Result<()> {
    let set = reachable_gradients(field, domain, y, &params.reachable)?;
    for p in &set.representatives {
        out.push(SupportPair { y: y.to_vec(), u: uy, p: p.clone(), provenance: Provenance::Reachable });
    }
    if set.representatives.len() >= 2 && params.ring_fraction > 0.0 {
        push_ring(out, field, domain, y, ball, params)?;
    }
    Ok(())
}

/// One pair per gradient cluster on a circle of radius `ring_fraction *
/// spacing` around `y`: the sample closest to the cluster mean.
fn push_ring<F: Field + ?Sized>(
    out: &mut Vec<SupportPair>,
    field: &F,
    domain: &DomainSpec,
    y: &[f64],
    ball: &BallRegion,
    params: &SupportParams,
) -> Result<()> {
    let ratio = params.reachable.ratio;
    let ring = ReachableParams {
        r0: params.ring_fraction * params.spacing / ratio.sqrt(),
        first_annulus: 0,
        k_max: 1,
        ..params.reachable.clone()
    };
    let set = match reachable_gradients(field, domain, y, &ring) {
        Ok(s) => s,
        Err(Error::Isolation(_)) => return Ok(()),
        Err(e) => return Err(e),
    };
    let grads: Vec<Vec<f64>> = set.samples.iter().map(|s| s.gradient.clone()).collect();
    for (mean, _) in cluster_gradients(&grads, params.eps_c) {
        let mut best: Option<(f64, usize)> = None;
        for (i, g) in grads.iter().enumerate() {
            let d = dist(g, &mean);
            if best.map_or(true, |(b, _)| d < b) {
                best = Some((d, i));
            }
        }
        if let Some((_, i)) = best.filter(|(_, i)| ball.contains_closed(&set.samples[*i].point)) {
            let z = &set.samples[i].point;
            out.push(SupportPair { y: z.clone(), u: field.value(z)?, p: grads[i].clone(), provenance: Provenance::Ring });
        }
    }
    Ok(())
}

/// Pairs over `closure(domain) ∩ ball`: one `(y, Du(y))` per grid node where
/// the filter passes, reachable representatives elsewhere and at boundary
/// sample points not already on the grid, and ring pairs around points with
/// several representatives.
pub fn build_support_set<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    ball: &BallRegion,
    params: &SupportParams,
) -> Result<SupportSet> {
    params.validate()?;
    let nodes = closure_grid(domain, ball, params.spacing)?;
    if nodes.is_empty() {
        return Err(Error::Geometry("closure of the domain misses the ball grid".into()));
    }
    let mut pairs = Vec::with_capacity(nodes.len());
    for y in &nodes {
        let uy = field.value(y)?;
        let smooth = match one_sided_quotients(field, domain, y, params.h_fd) {
            Ok(q) if passes_filter(&q, params.eps_c) => {
                Some(field.exact_gradient(y).unwrap_or_else(|| q.iter().map(|(a, b)| 0.5 * (a + b)).collect()))
            }
            Ok(_) | Err(Error::Stencil { .. }) => None,
            Err(e) => return Err(e),
        };
        match smooth {
            Some(p) => pairs.push(SupportPair { y: y.clone(), u: uy, p, provenance: Provenance::Smooth }),
            None => push_reachable(&mut pairs, field, domain, y, uy, ball, params)?,
        }
    }
    if params.include_boundary {
        for b in boundary_sample(domain, ball, params.spacing)? {
            if nodes.iter().any(|y| dist(y, &b) < 0.25 * params.spacing) {
                continue;
            }
            let ub = field.value(&b)?;
            push_reachable(&mut pairs, field, domain, &b, ub, ball, params)?;
        }
    }
    SupportSet::from_pairs(pairs, ball.clone(), params.spacing)
}
