//! Analytic open domains, balls, membership and closure/boundary sampling.
//!
//! Every domain kind has an exact signed slack `phi` (positive inside,
//! negative outside, zero on the boundary). Membership is decided on `phi`
//! with the band tolerance [`BOUNDARY_BAND`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, complement_basis, dist, dot, norm, normalize, sub};

pub const BOUNDARY_BAND: f64 = 1e-12;
pub const DEFAULT_SEGMENT_PROBES: usize = 256;

/// An open subset of `R^n`, `n <= 3`, with nonempty boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    /// `{x : <normal, x> > offset} ∩ B_radius(center)`.
    CappedBall {
        center: Vec<f64>,
        radius: f64,
        normal: Vec<f64>,
        offset: f64,
    },
    /// Open axis-aligned box `(lo, hi)`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Open ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// `{x : <normal, x> > offset}`.
    HalfSpace { normal: Vec<f64>, offset: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Where {
    Open,
    Closure,
    Boundary,
}

/// The ball `B_delta(x0)`; sampling treats it as closed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRegion {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallRegion {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        let b = BallRegion { center, radius };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Input(format!("ball radius must be positive, got {}", self.radius)));
        }
        if self.center.is_empty() || self.center.len() > 3 {
            return Err(Error::Input(format!("unsupported dimension {}", self.center.len())));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("ball center must be finite".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Closed-ball membership with a relative rounding allowance.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        dist(x, &self.center) <= self.radius * (1.0 + 1e-12) + 1e-15
    }

    /// The same ball viewed as an open domain.
    pub fn as_domain(&self) -> DomainSpec {
        DomainSpec::Ball { center: self.center.clone(), radius: self.radius }
    }

    pub fn scaled(&self, factor: f64) -> BallRegion {
        BallRegion { center: self.center.clone(), radius: self.radius * factor }
    }
}

impl DomainSpec {
    /// The open half-disk `{x1 > 0, |x| < 1}` used by the closed-form examples.
    pub fn half_disk() -> Self {
        DomainSpec::CappedBall {
            center: vec![0.0, 0.0],
            radius: 1.0,
            normal: vec![1.0, 0.0],
            offset: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::CappedBall { center, .. } | DomainSpec::Ball { center, .. } => center.len(),
            DomainSpec::Box { lo, .. } => lo.len(),
            DomainSpec::HalfSpace { normal, .. } => normal.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if !(1..=3).contains(&n) {
            return Err(Error::Input(format!("unsupported dimension {n}")));
        }
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        match self {
            DomainSpec::CappedBall { center, radius, normal, offset } => {
                check_dim(n, normal)?;
                if !(*radius > 0.0) || norm(normal) == 0.0 || !finite(center) || !finite(normal) || !offset.is_finite() {
                    return Err(Error::Input("capped ball needs positive radius and nonzero normal".into()));
                }
            }
            DomainSpec::Box { lo, hi } => {
                check_dim(n, hi)?;
                if lo.iter().zip(hi).any(|(a, b)| !(a < b)) || !finite(lo) || !finite(hi) {
                    return Err(Error::Input("box needs lo < hi on every axis".into()));
                }
            }
            DomainSpec::Ball { center, radius } => {
                if !(*radius > 0.0) || !finite(center) {
                    return Err(Error::Input("ball needs positive radius".into()));
                }
            }
            DomainSpec::HalfSpace { normal, offset } => {
                if norm(normal) == 0.0 || !finite(normal) || !offset.is_finite() {
                    return Err(Error::Input("half-space needs nonzero normal".into()));
                }
            }
        }
        Ok(())
    }

    /// Signed slack: positive in the open domain, zero on the boundary.
    pub fn slack(&self, x: &[f64]) -> f64 {
        match self {
            DomainSpec::CappedBall { center, radius, normal, offset } => {
                let plane = (dot(normal, x) - offset) / norm(normal);
                plane.min(radius - dist(x, center))
            }
            DomainSpec::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(xi, (a, b))| (xi - a).min(b - xi))
                .fold(f64::INFINITY, f64::min),
            DomainSpec::Ball { center, radius } => radius - dist(x, center),
            DomainSpec::HalfSpace { normal, offset } => (dot(normal, x) - offset) / norm(normal),
        }
    }

    /// Bounding box, when the domain is bounded.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            DomainSpec::CappedBall { center, radius, .. } | DomainSpec::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            DomainSpec::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            DomainSpec::HalfSpace { .. } => None,
        }
    }

    fn boundary_candidates(&self, region: &BallRegion, spacing: f64) -> Vec<Vec<f64>> {
        let n = self.dim();
        match self {
            DomainSpec::Ball { center, radius } => sphere_points(center, *radius, spacing),
            DomainSpec::HalfSpace { normal, offset } => plane_points(normal, *offset, region, spacing),
            DomainSpec::CappedBall { center, radius, normal, offset } => {
                let mut pts = plane_points(normal, *offset, region, spacing);
                pts.extend(sphere_points(center, *radius, spacing));
                pts.extend(plane_sphere_rim(center, *radius, normal, *offset));
                pts
            }
            DomainSpec::Box { lo, hi } => {
                let mut pts = Vec::new();
                for axis in 0..n {
                    for (face_value, sign) in [(lo[axis], 1.0), (hi[axis], -1.0)] {
                        let mut nrm = vec![0.0; n];
                        nrm[axis] = sign;
                        let off = sign * face_value;
                        for mut p in plane_points(&nrm, off, region, spacing) {
                            p[axis] = face_value;
                            pts.push(p);
                        }
                    }
                }
                pts
            }
        }
    }
}

/// Exact analytic membership.
pub fn contains(domain: &DomainSpec, x: &[f64], place: Where) -> Result<bool> {
    check_dim(domain.dim(), x)?;
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::Input("non-finite point".into()));
    }
    let phi = domain.slack(x);
    Ok(match place {
        Where::Open => phi > BOUNDARY_BAND,
        Where::Closure => phi >= -BOUNDARY_BAND,
        Where::Boundary => phi.abs() <= BOUNDARY_BAND,
    })
}

pub(crate) fn in_closure(domain: &DomainSpec, x: &[f64]) -> bool {
    domain.slack(x) >= -BOUNDARY_BAND
}

pub(crate) fn in_open(domain: &DomainSpec, x: &[f64]) -> bool {
    domain.slack(x) > BOUNDARY_BAND
}

/// Probes `n_probe` equally spaced points of `[a, b]`, endpoints included.
///
/// Sampling approximation: exact for convex domains, a filter otherwise.
pub fn segment_in_closure(domain: &DomainSpec, a: &[f64], b: &[f64], n_probe: usize) -> Result<bool> {
    if n_probe < 2 {
        return Err(Error::Input(format!("n_probe must be at least 2, got {n_probe}")));
    }
    check_dim(domain.dim(), a)?;
    check_dim(domain.dim(), b)?;
    let d = sub(b, a);
    let last = (n_probe - 1) as f64;
    for k in 0..n_probe {
        let p = if k + 1 == n_probe { b.to_vec() } else { axpy(a, k as f64 / last, &d) };
        if !in_closure(domain, &p) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lattice nodes `x0 + spacing * i` lying in `closure(domain) ∩ closed ball`,
/// in lexicographic order.
pub fn closure_grid(domain: &DomainSpec, region: &BallRegion, spacing: f64) -> Result<Vec<Vec<f64>>> {
    check_dim(domain.dim(), &region.center)?;
    region.validate()?;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Input(format!("spacing must be positive, got {spacing}")));
    }
    Ok(lattice_in_ball(region, spacing)
        .into_iter()
        .filter(|p| in_closure(domain, p))
        .collect())
}

/// Lattice nodes anchored at the ball center inside the closed ball.
pub fn lattice_in_ball(region: &BallRegion, spacing: f64) -> Vec<Vec<f64>> {
    let n = region.dim();
    let k = (region.radius / spacing + 1e-9).floor() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-k; n];
    loop {
        let p: Vec<f64> = idx
            .iter()
            .zip(&region.center)
            .map(|(&i, c)| c + i as f64 * spacing)
            .collect();
        if region.contains_closed(&p) {
            out.push(p);
        }
        // odometer, last axis fastest
        let mut axis = n;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if idx[axis] < k {
                idx[axis] += 1;
                for later in idx.iter_mut().skip(axis + 1) {
                    *later = -k;
                }
                break;
            }
        }
    }
}

/// Parametric boundary points of `domain` inside the closed ball, at roughly
/// the given spacing. Every returned point passes `contains(.., Boundary)`.
pub fn boundary_sample(domain: &DomainSpec, region: &BallRegion, spacing: f64) -> Result<Vec<Vec<f64>>> {
    check_dim(domain.dim(), &region.center)?;
    region.validate()?;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Input(format!("spacing must be positive, got {spacing}")));
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in domain.boundary_candidates(region, spacing) {
        if domain.slack(&p).abs() <= BOUNDARY_BAND
            && region.contains_closed(&p)
            && !out.iter().any(|q| dist(q, &p) < 1e-12)
        {
            out.push(p);
        }
    }
    Ok(out)
}

fn sphere_points(center: &[f64], radius: f64, spacing: f64) -> Vec<Vec<f64>> {
    match center.len() {
        1 => vec![vec![center[0] - radius], vec![center[0] + radius]],
        2 => {
            let count = ((2.0 * PI * radius) / spacing - 1e-9).ceil().max(3.0) as usize;
            (0..count)
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / count as f64;
                    vec![center[0] + radius * phi.cos(), center[1] + radius * phi.sin()]
                })
                .collect()
        }
        _ => {
            let count = ((4.0 * PI * radius * radius) / (spacing * spacing)).ceil().max(8.0) as usize;
            fibonacci_sphere(count)
                .into_iter()
                .map(|d| axpy(center, radius, &d))
                .collect()
        }
    }
}

/// Quasi-uniform unit vectors on the 2-sphere.
pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * i as f64;
            vec![r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Lattice on the hyperplane `<normal, x> = offset` around the projection of
/// the region center, restricted to the region ball.
fn plane_points(normal: &[f64], offset: f64, region: &BallRegion, spacing: f64) -> Vec<Vec<f64>> {
    let n = normal.len();
    let unit_n = normalize(normal).expect("validated normal");
    let nn = norm(normal);
    let signed = (dot(normal, &region.center) - offset) / nn;
    let foot = axpy(&region.center, -signed, &unit_n);
    if signed.abs() > region.radius {
        return Vec::new();
    }
    if n == 1 {
        return vec![vec![offset / normal[0]]];
    }
    let tangents = complement_basis(n, std::slice::from_ref(&unit_n));
    let half = (region.radius * region.radius - signed * signed).max(0.0).sqrt();
    let k = (half / spacing + 1e-9).floor() as i64;
    let mut out = Vec::new();
    let snap = |p: Vec<f64>| -> Vec<f64> {
        // Pull the point back onto the plane to kill rounding drift.
        let err = (dot(normal, &p) - offset) / (nn * nn);
        axpy(&p, -err, normal)
    };
    match tangents.len() {
        1 => {
            for i in -k..=k {
                out.push(snap(axpy(&foot, i as f64 * spacing, &tangents[0])));
            }
        }
        _ => {
            for i in -k..=k {
                for j in -k..=k {
                    let p = axpy(&axpy(&foot, i as f64 * spacing, &tangents[0]), j as f64 * spacing, &tangents[1]);
                    out.push(snap(p));
                }
            }
        }
    }
    out
}

/// Points where the cap plane meets the sphere (2D: the two corner points).
fn plane_sphere_rim(center: &[f64], radius: f64, normal: &[f64], offset: f64) -> Vec<Vec<f64>> {
    let n = center.len();
    let unit_n = normalize(normal).expect("validated normal");
    let signed = (dot(normal, center) - offset) / norm(normal);
    if signed.abs() >= radius || n != 2 {
        return Vec::new();
    }
    let foot = axpy(center, -signed, &unit_n);
    let half = (radius * radius - signed * signed).sqrt();
    let t = vec![-unit_n[1], unit_n[0]];
    vec![axpy(&foot, half, &t), axpy(&foot, -half, &t)]
}

/// Uniform samples of the closed ball (rejection from the bounding cube).
pub(crate) fn uniform_in_ball<R: rand::Rng>(rng: &mut R, region: &BallRegion) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..region.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if norm(&v) <= 1.0 {
            return axpy(&region.center, region.radius, &v);
        }
    }
}

/// Uniform sample of `closure(domain) ∩ region` by rejection; `None` after
/// `max_attempts` misses.
pub(crate) fn uniform_in_closure<R: rand::Rng>(
    rng: &mut R,
    domain: &DomainSpec,
    region: &BallRegion,
    max_attempts: usize,
) -> Option<Vec<f64>> {
    for _ in 0..max_attempts {
        let p = uniform_in_ball(rng, region);
        if in_closure(domain, &p) {
            return Some(p);
        }
    }
    None
}
