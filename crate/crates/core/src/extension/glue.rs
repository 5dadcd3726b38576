//! Gluing local extensions with a smooth partition of unity subordinate to
//! a finite cover of boundary balls plus the domain itself.

use crate::error::{check_dim, Error, Result};
use crate::extension::envelope::ExtensionField;
use crate::funcspace::{Field, FunctionSpec};
use crate::geometry::{lattice_in_ball, BallRegion, DomainSpec, BOUNDARY_BAND};
use crate::linalg::{dist, dist_sq};

/// Tolerance on `sum of weights = 1` over the probe grid.
pub const PARTITION_TOL: f64 = 1e-9;

/// `exp(-1/t)` for `t > 0`, else 0.
fn flat_ramp(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    let a = flat_ramp(t);
    let b = flat_ramp(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// `exp(1/(|y-c|^2/ρ^2 - 1))` inside the open ball, 0 outside.
pub fn ball_bump(ball: &BallRegion, y: &[f64]) -> f64 {
    let s = dist_sq(y, &ball.center) / (ball.radius * ball.radius);
    if s < 1.0 {
        (1.0 / (s - 1.0)).exp()
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity {
    pub domain: DomainSpec,
    pub balls: Vec<BallRegion>,
    /// Width of the cut-off layer of the domain weight inside the boundary.
    pub band: f64,
}

/// Normalized weights at a point: one per ball, then the domain weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    pub balls: Vec<f64>,
    pub domain: f64,
}

impl Weights {
    pub fn total(&self) -> f64 {
        self.balls.iter().sum::<f64>() + self.domain
    }
}

impl PartitionOfUnity {
    pub fn new(domain: DomainSpec, balls: Vec<BallRegion>, band: f64) -> Result<Self> {
        domain.validate()?;
        if !(band > 0.0) {
            return Err(Error::Input("partition band must be positive".into()));
        }
        for b in &balls {
            check_dim(domain.dim(), &b.center)?;
            b.validate()?;
        }
        Ok(PartitionOfUnity { domain, balls, band })
    }

    /// Unnormalized bumps.
    pub fn raw(&self, y: &[f64]) -> Weights {
        Weights {
            balls: self.balls.iter().map(|b| ball_bump(b, y)).collect(),
            domain: smooth_step(self.domain.slack(y) / self.band),
        }
    }

    /// Whether `y` lies in the union of the open balls and the domain.
    pub fn covers(&self, y: &[f64]) -> bool {
        self.domain.slack(y) > 0.0 || self.balls.iter().any(|b| dist(y, &b.center) < b.radius)
    }

    pub fn weights(&self, y: &[f64]) -> Result<Weights> {
        check_dim(self.domain.dim(), y)?;
        let raw = self.raw(y);
        let total = raw.total();
        if !(total > 0.0) {
            return Err(Error::Partition(format!("no weight at {y:?}; the point is outside the cover")));
        }
        Ok(Weights { balls: raw.balls.iter().map(|b| b / total).collect(), domain: raw.domain / total })
    }

    /// Covered with a 1% margin, so no bump is below the underflow range.
    fn covers_with_margin(&self, y: &[f64]) -> bool {
        self.domain.slack(y) > 0.01 * self.band || self.balls.iter().any(|b| dist(y, &b.center) < 0.99 * b.radius)
    }

    /// Lattice points of every cover ball plus lattice points of the domain's
    /// bounding box, at about `per_axis` points per diameter, restricted to
    /// points covered with a 1% margin.
    pub fn probe_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for b in &self.balls {
            out.extend(lattice_in_ball(b, 2.0 * b.radius / per_axis.max(1) as f64));
        }
        if let Some((lo, hi)) = self.domain.bounding_box() {
            let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let radius = 0.5 * dist(&lo, &hi);
            if radius > 0.0 {
                let ball = BallRegion { center, radius };
                out.extend(lattice_in_ball(&ball, 2.0 * radius / per_axis.max(1) as f64));
            }
        }
        out.retain(|p| self.covers_with_margin(p));
        out
    }
}

/// `y -> sum_j χ_j(y) E_j(y) + χ_Ω(y) u(y)`.
#[derive(Clone, Debug)]
pub struct GlobalExtension {
    pub partition: PartitionOfUnity,
    pub locals: Vec<ExtensionField>,
    pub base: FunctionSpec,
}

/// Glues local extensions. Checks that cover balls are centered on the
/// boundary, that each local field lives on its ball, and that the
/// normalized weights sum to 1 on a probe grid.
pub fn glue_global(partition: PartitionOfUnity, locals: Vec<ExtensionField>, base: FunctionSpec) -> Result<GlobalExtension> {
    if locals.len() != partition.balls.len() {
        return Err(Error::Partition(format!(
            "{} local fields for {} cover balls",
            locals.len(),
            partition.balls.len()
        )));
    }
    for (b, f) in partition.balls.iter().zip(&locals) {
        if partition.domain.slack(&b.center).abs() > BOUNDARY_BAND {
            return Err(Error::Partition(format!("cover ball at {:?} is not centered on the boundary", b.center)));
        }
        let fb = f.ball();
        if dist(&fb.center, &b.center) > 1e-12 || (fb.radius - b.radius).abs() > 1e-12 {
            return Err(Error::Partition("local field ball differs from its cover ball".into()));
        }
    }
    for y in partition.probe_points(20) {
        let w = partition.weights(&y)?;
        if (w.total() - 1.0).abs() > PARTITION_TOL {
            return Err(Error::Partition(format!("weights sum to {} at {y:?}", w.total())));
        }
    }
    Ok(GlobalExtension { partition, locals, base })
}

impl GlobalExtension {
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        let w = self.partition.weights(y)?;
        let mut acc = 0.0;
        for (wj, f) in w.balls.iter().zip(&self.locals) {
            if *wj > 0.0 {
                acc += wj * f.extend(y)?;
            }
        }
        if w.domain > 0.0 {
            acc += w.domain * self.base.eval(y)?;
        }
        Ok(acc)
    }
}

impl Field for GlobalExtension {
    fn dim(&self) -> usize {
        self.partition.domain.dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
    fn label(&self) -> String {
        "global-extension".into()
    }
}
