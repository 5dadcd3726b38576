//! Mollified approximants `u_h(x) = sum_k w_k E(x + y_k / h)` with an even
//! bump discretized on a tensor grid.

use crate::error::{check_dim, Error, Result};
use crate::funcspace::{one_sided_quotients, passes_filter, Field};
use crate::geometry::{BallRegion, DomainSpec};
use crate::linalg::{axpy, dist, norm_sq};

pub const DEFAULT_QUADRATURE_POINTS: usize = 21;

/// Quadrature nodes in the open unit ball with nonnegative weights summing
/// to 1 (in node order). Nodes come in `±y` pairs with equal weights.
#[derive(Clone, Debug, PartialEq)]
pub struct MollifierRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub points_per_axis: usize,
}

impl MollifierRule {
    /// `m` must be odd so the origin is a node.
    pub fn new(dim: usize, m: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Input(format!("mollifier dimension must be 1 to 3, got {dim}")));
        }
        if m < 3 || m % 2 == 0 {
            return Err(Error::Input(format!("quadrature points per axis must be odd and at least 3, got {m}")));
        }
        let coord = |i: usize| (2.0 * i as f64 - (m - 1) as f64) / (m - 1) as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let total = m.pow(dim as u32);
        let mut center = usize::MAX;
        for flat in 0..total {
            let mut rest = flat;
            let mut y = vec![0.0; dim];
            for a in (0..dim).rev() {
                y[a] = coord(rest % m);
                rest /= m;
            }
            let s = norm_sq(&y);
            if s < 1.0 {
                if s == 0.0 {
                    center = nodes.len();
                }
                weights.push((1.0 / (s - 1.0)).exp());
                nodes.push(y);
            }
        }
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        // put the rounding residue on the origin, which keeps the rule even
        for _ in 0..8 {
            let s: f64 = weights.iter().sum();
            if s == 1.0 {
                break;
            }
            weights[center] += 1.0 - s;
        }
        Ok(MollifierRule { nodes, weights, points_per_axis: m })
    }
}

#[derive(Clone, Debug)]
pub struct Mollified<F> {
    pub base: F,
    /// `B_δ(x0)`, where the base field lives; queries must lie in `B_{δ/2}`.
    pub ball: BallRegion,
    pub h: f64,
    pub rule: MollifierRule,
}

impl<F: Field> Mollified<F> {
    pub fn new(base: F, ball: BallRegion, h: f64, points_per_axis: usize) -> Result<Self> {
        ball.validate()?;
        check_dim(base.dim(), &ball.center)?;
        if !(h > 2.0 / ball.radius) || !h.is_finite() {
            return Err(Error::Parameter(format!("h = {h} must exceed 2/δ = {}", 2.0 / ball.radius)));
        }
        let rule = MollifierRule::new(ball.dim(), points_per_axis)?;
        Ok(Mollified { base, ball, h, rule })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.ball.dim(), x)?;
        if dist(x, &self.ball.center) > 0.5 * self.ball.radius * (1.0 + 1e-12) {
            return Err(Error::Input(format!("{x:?} is outside the half ball")));
        }
        let ex = self.base.value(x)?;
        let mut qs = Vec::with_capacity(self.rule.nodes.len());
        for y in &self.rule.nodes {
            let q = axpy(x, 1.0 / self.h, y);
            if !self.ball.contains_closed(&q) {
                return Err(Error::Internal(format!("quadrature node {q:?} left the ball")));
            }
            qs.push(q);
        }
        let mut acc = 0.0;
        for (v, w) in self.base.values(&qs)?.into_iter().zip(&self.rule.weights) {
            acc += w * (v - ex);
        }
        Ok(ex + acc)
    }
}

impl<F: Field> Field for Mollified<F> {
    fn dim(&self) -> usize {
        self.ball.dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
    fn label(&self) -> String {
        format!("mollified(h={})", self.h)
    }
}

/// Where the sum of `fields` passes the nondifferentiability filter at `x`,
/// reports whether every summand passes too. Points where the sum fails are
/// vacuously fine.
pub fn summand_differentiability_probe(
    fields: &[&dyn Field],
    domain: &DomainSpec,
    x: &[f64],
    h_fd: f64,
    eps_c: f64,
) -> Result<bool> {
    struct Sum<'a>(&'a [&'a dyn Field]);
    impl Field for Sum<'_> {
        fn dim(&self) -> usize {
            self.0.first().map_or(0, |f| f.dim())
        }
        fn value(&self, x: &[f64]) -> Result<f64> {
            self.0.iter().map(|f| f.value(x)).sum()
        }
        fn label(&self) -> String {
            "sum".into()
        }
    }
    if fields.is_empty() {
        return Err(Error::Input("no fields to probe".into()));
    }
    let total = one_sided_quotients(&Sum(fields), domain, x, h_fd)?;
    if !passes_filter(&total, eps_c) {
        return Ok(true);
    }
    for f in fields {
        if !passes_filter(&one_sided_quotients(*f, domain, x, h_fd)?, eps_c) {
            return Ok(false);
        }
    }
    Ok(true)
}
