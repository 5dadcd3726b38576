//! The fractional semiconcavity inequality
//! `λu(x) + (1-λ)u(y) - u(λx + (1-λ)y) <= C λ(1-λ) |x-y|^{1+α}`:
//! per-triple defects, a sampled estimate of the best constant, and
//! certificates carrying violation witnesses.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::funcspace::Field;
use crate::geometry::{segment_in_closure, uniform_in_closure, BallRegion, DomainSpec, DEFAULT_SEGMENT_PROBES};
use crate::linalg::dist;
use crate::sampling::{seeded_rng, SAMPLER_VERSION};

/// Ratios from pairs closer than this are ignored by the estimator.
pub const MIN_PAIR_DISTANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusParams {
    pub alpha: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl ModulusParams {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        let p = ModulusParams { alpha, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Input(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !self.c.is_finite() {
            return Err(Error::Input("semiconcavity constant must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiconcavityTriple {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
}

impl SemiconcavityTriple {
    pub fn midpoint(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(a, b)| self.lambda * a + (1.0 - self.lambda) * b).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub triple: SemiconcavityTriple,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiconcavityCertificate {
    pub function: String,
    pub region: BallRegion,
    pub params: ModulusParams,
    pub n_triples: usize,
    pub max_defect: f64,
    pub witnesses: Vec<Witness>,
    pub seed: u64,
    pub sampler_version: String,
    pub passed: bool,
}

/// Left-hand side of the inequality without the modulus term.
fn concavity_gap<F: Field + ?Sized>(field: &F, t: &SemiconcavityTriple) -> Result<f64> {
    if t.lambda == 0.0 || t.lambda == 1.0 {
        return Ok(0.0);
    }
    let ux = field.value(&t.x)?;
    let uy = field.value(&t.y)?;
    let um = field.value(&t.midpoint())?;
    Ok(t.lambda * ux + (1.0 - t.lambda) * uy - um)
}

fn modulus_weight(t: &SemiconcavityTriple, alpha: f64) -> f64 {
    t.lambda * (1.0 - t.lambda) * dist(&t.x, &t.y).powf(1.0 + alpha)
}

fn check_triple(domain: &DomainSpec, t: &SemiconcavityTriple) -> Result<()> {
    check_dim(domain.dim(), &t.x)?;
    check_dim(domain.dim(), &t.y)?;
    if !(0.0..=1.0).contains(&t.lambda) {
        return Err(Error::Input(format!("lambda must lie in [0, 1], got {}", t.lambda)));
    }
    if !segment_in_closure(domain, &t.x, &t.y, DEFAULT_SEGMENT_PROBES)? {
        return Err(Error::Hypothesis(format!("segment [{:?}, {:?}] leaves the closure", t.x, t.y)));
    }
    Ok(())
}

/// Residual of the inequality for one triple; nonpositive iff it holds.
pub fn defect<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    t: &SemiconcavityTriple,
    params: &ModulusParams,
) -> Result<f64> {
    params.validate()?;
    check_triple(domain, t)?;
    if t.lambda == 0.0 || t.lambda == 1.0 {
        return Ok(0.0);
    }
    Ok(concavity_gap(field, t)? - params.c * modulus_weight(t, params.alpha))
}

/// Draws `n` valid triples: endpoints uniform in `closure ∩ region`,
/// `λ` uniform in `(0,1)`, segments required to stay in the closure.
pub fn sample_triples(
    domain: &DomainSpec,
    region: &BallRegion,
    n: usize,
    seed: u64,
) -> Result<Vec<SemiconcavityTriple>> {
    if n < 1 {
        return Err(Error::Input("n_triples must be at least 1".into()));
    }
    check_dim(domain.dim(), &region.center)?;
    region.validate()?;
    let mut rng = seeded_rng(seed);
    let cap = 100 * n;
    let mut out = Vec::with_capacity(n);
    let mut draws = 0usize;
    while out.len() < n {
        if draws >= cap {
            return Err(Error::Sampling(format!("found only {} valid triples after {cap} draws", out.len())));
        }
        draws += 1;
        let x = uniform_in_closure(&mut rng, domain, region, 1000);
        let y = uniform_in_closure(&mut rng, domain, region, 1000);
        let lambda = loop {
            let l: f64 = rng.gen();
            if l > 0.0 {
                break l;
            }
        };
        let (Some(x), Some(y)) = (x, y) else { continue };
        if segment_in_closure(domain, &x, &y, DEFAULT_SEGMENT_PROBES)? {
            out.push(SemiconcavityTriple { x, y, lambda });
        }
    }
    Ok(out)
}

/// Largest sampled ratio of the concavity gap to `λ(1-λ)|x-y|^{1+α}`: a
/// lower bound on the smallest admissible constant on `region`.
pub fn estimate_constant<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    region: &BallRegion,
    alpha: f64,
    n_triples: usize,
    seed: u64,
) -> Result<f64> {
    ModulusParams::new(alpha, 0.0)?;
    let triples = sample_triples(domain, region, n_triples, seed)?;
    let mut best = f64::NEG_INFINITY;
    for t in &triples {
        if dist(&t.x, &t.y) < MIN_PAIR_DISTANCE {
            continue;
        }
        let w = modulus_weight(t, alpha);
        if w > 0.0 {
            best = best.max(concavity_gap(field, t)? / w);
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Sampling("no triple with distinct endpoints".into()));
    }
    Ok(best)
}

/// Checks the inequality on `n_triples` seeded triples and records every
/// positive defect.
pub fn certify<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    region: &BallRegion,
    params: &ModulusParams,
    n_triples: usize,
    seed: u64,
) -> Result<SemiconcavityCertificate> {
    params.validate()?;
    let triples = sample_triples(domain, region, n_triples, seed)?;
    let mut max_defect = f64::NEG_INFINITY;
    let mut witnesses = Vec::new();
    for t in triples {
        let d = concavity_gap(field, &t)? - params.c * modulus_weight(&t, params.alpha);
        max_defect = max_defect.max(d);
        if d > 0.0 {
            witnesses.push(Witness { triple: t, defect: d });
        }
    }
    Ok(SemiconcavityCertificate {
        function: field.label(),
        region: region.clone(),
        params: *params,
        n_triples,
        max_defect,
        passed: witnesses.is_empty(),
        witnesses,
        seed,
        sampler_version: SAMPLER_VERSION.to_string(),
    })
}
