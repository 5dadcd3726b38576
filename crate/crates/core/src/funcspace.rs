//! Candidate functions on closed domains, finite-difference gradients and
//! Lipschitz estimation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{in_closure, in_open, uniform_in_closure, BallRegion, DomainSpec};
use crate::linalg::{dist, norm, norm_sq};
use crate::sampling::seeded_rng;

/// Anything that can be evaluated pointwise: analytic functions, envelopes,
/// glued extensions and mollified approximants.
pub trait Field {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Closed-form gradient at `x`, if the field knows one.
    fn exact_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn label(&self) -> String;

    /// Values at many points; fields with a shared search override this.
    fn values(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.value(x)).collect()
    }
}

impl<F: Field + ?Sized> Field for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }
    fn exact_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).exact_gradient(x)
    }
    fn values(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        (**self).values(xs)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync>;

/// A user-registered closure with an optional gradient.
#[derive(Clone)]
pub struct CustomFunction {
    pub name: String,
    pub dim: usize,
    pub value: ScalarFn,
    pub gradient: Option<VectorFn>,
}

impl fmt::Debug for CustomFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("has_gradient", &self.gradient.is_some())
            .finish()
    }
}

/// Values on a regular lattice, interpolated multilinearly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledGrid {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub counts: Vec<usize>,
    /// Row-major, last axis fastest.
    pub values: Vec<f64>,
}

impl SampledGrid {
    pub fn validate(&self) -> Result<()> {
        let n = self.origin.len();
        check_dim(n, &self.spacing)?;
        if self.counts.len() != n || self.counts.iter().any(|&c| c < 2) {
            return Err(Error::Input("sampled grid needs at least two nodes per axis".into()));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Input("sampled grid spacing must be positive".into()));
        }
        let total: usize = self.counts.iter().product();
        if total != self.values.len() {
            return Err(Error::Input(format!(
                "sampled grid has {} values, expected {total}",
                self.values.len()
            )));
        }
        Ok(())
    }

    /// Tabulates `f` on the lattice.
    pub fn tabulate(origin: Vec<f64>, spacing: Vec<f64>, counts: Vec<usize>, f: impl Fn(&[f64]) -> f64) -> Self {
        let total: usize = counts.iter().product();
        let mut values = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = unflatten(flat, &counts);
            let p: Vec<f64> = (0..origin.len()).map(|a| origin[a] + idx[a] as f64 * spacing[a]).collect();
            values.push(f(&p));
        }
        SampledGrid { origin, spacing, counts, values }
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        let n = self.origin.len();
        check_dim(n, x)?;
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for a in 0..n {
            let t = (x[a] - self.origin[a]) / self.spacing[a];
            let last = (self.counts[a] - 1) as f64;
            if !(t >= -1e-12 && t <= last + 1e-12) {
                return Err(Error::Evaluation(format!("point {x:?} outside the sampled grid hull")));
            }
            let t = t.clamp(0.0, last);
            let i = (t.floor() as usize).min(self.counts[a] - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for a in 0..n {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                flat = flat * self.counts[a] + base[a] + bit;
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        Ok(acc)
    }
}

fn unflatten(mut flat: usize, counts: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; counts.len()];
    for a in (0..counts.len()).rev() {
        idx[a] = flat % counts[a];
        flat /= counts[a];
    }
    idx
}

/// A candidate function `u`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// `-|x|`
    NegNorm,
    /// `-|x_2|`
    NegAbsX2,
    /// `-sqrt(x_1^4 + x_2^2)`
    NegSqrtX1p4X2sq,
    /// `<coefficients, x> + constant`
    Affine { coefficients: Vec<f64>, constant: f64 },
    /// `curvature * |x|^2 + <linear, x> + constant`
    Quadratic { curvature: f64, linear: Vec<f64>, constant: f64 },
    /// `|x|^2`
    SqNorm,
    /// `-|x|^2`
    NegSqNorm,
    Constant { value: f64 },
    SampledGrid(SampledGrid),
    #[serde(skip)]
    Custom(CustomFunction),
}

impl FunctionSpec {
    /// Fixed dimension, when the function has one.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            FunctionSpec::NegSqrtX1p4X2sq => Some(2),
            FunctionSpec::Affine { coefficients, .. } => Some(coefficients.len()),
            FunctionSpec::Quadratic { linear, .. } => Some(linear.len()),
            FunctionSpec::SampledGrid(g) => Some(g.origin.len()),
            FunctionSpec::Custom(c) => Some(c.dim),
            _ => None,
        }
    }

    pub fn id(&self) -> String {
        match self {
            FunctionSpec::NegNorm => "neg-norm".into(),
            FunctionSpec::NegAbsX2 => "neg-abs-x2".into(),
            FunctionSpec::NegSqrtX1p4X2sq => "neg-sqrt-x1p4-x2sq".into(),
            FunctionSpec::Affine { .. } => "affine".into(),
            FunctionSpec::Quadratic { .. } => "quadratic".into(),
            FunctionSpec::SqNorm => "sq-norm".into(),
            FunctionSpec::NegSqNorm => "neg-sq-norm".into(),
            FunctionSpec::Constant { .. } => "constant".into(),
            FunctionSpec::SampledGrid(_) => "sampled-grid".into(),
            FunctionSpec::Custom(c) => c.name.clone(),
        }
    }

    pub fn validate_for(&self, dim: usize) -> Result<()> {
        if let Some(d) = self.fixed_dim() {
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: d });
            }
        }
        if matches!(self, FunctionSpec::NegAbsX2) && dim < 2 {
            return Err(Error::Input("neg-abs-x2 needs dimension at least 2".into()));
        }
        if let FunctionSpec::SampledGrid(g) = self {
            g.validate()?;
        }
        Ok(())
    }

    /// Evaluates `u(x)`. Analytic forms are exact; sampled grids interpolate.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.fixed_dim() {
            check_dim(d, x)?;
        }
        let v = match self {
            FunctionSpec::NegNorm => -norm(x),
            FunctionSpec::NegAbsX2 => {
                if x.len() < 2 {
                    return Err(Error::DimensionMismatch { expected: 2, got: x.len() });
                }
                -x[1].abs()
            }
            FunctionSpec::NegSqrtX1p4X2sq => -(x[0].powi(4) + x[1] * x[1]).sqrt(),
            FunctionSpec::Affine { coefficients, constant } => {
                constant + coefficients.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            }
            FunctionSpec::Quadratic { curvature, linear, constant } => {
                curvature * norm_sq(x) + linear.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + constant
            }
            FunctionSpec::SqNorm => norm_sq(x),
            FunctionSpec::NegSqNorm => -norm_sq(x),
            FunctionSpec::Constant { value } => *value,
            FunctionSpec::SampledGrid(g) => g.eval(x)?,
            FunctionSpec::Custom(c) => (c.value)(x),
        };
        if !v.is_finite() {
            return Err(Error::Evaluation(format!("{} is not finite at {x:?}", self.id())));
        }
        Ok(v)
    }

    /// Closed-form gradient where the function is differentiable.
    pub fn analytic_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            FunctionSpec::NegNorm => {
                let r = norm(x);
                (r > 0.0).then(|| x.iter().map(|c| -c / r).collect())
            }
            FunctionSpec::NegAbsX2 => {
                if x.len() < 2 || x[1] == 0.0 {
                    return None;
                }
                let mut g = vec![0.0; x.len()];
                g[1] = -x[1].signum();
                Some(g)
            }
            FunctionSpec::NegSqrtX1p4X2sq => {
                let r = (x[0].powi(4) + x[1] * x[1]).sqrt();
                (r > 0.0).then(|| vec![-2.0 * x[0].powi(3) / r, -x[1] / r])
            }
            FunctionSpec::Affine { coefficients, .. } => Some(coefficients.clone()),
            FunctionSpec::Quadratic { curvature, linear, .. } => {
                Some(x.iter().zip(linear).map(|(xi, b)| 2.0 * curvature * xi + b).collect())
            }
            FunctionSpec::SqNorm => Some(x.iter().map(|c| 2.0 * c).collect()),
            FunctionSpec::NegSqNorm => Some(x.iter().map(|c| -2.0 * c).collect()),
            FunctionSpec::Constant { .. } => Some(vec![0.0; x.len()]),
            FunctionSpec::SampledGrid(_) => None,
            FunctionSpec::Custom(c) => c.gradient.as_ref().and_then(|g| g(x)),
        }
    }
}

impl Field for FunctionSpec {
    fn dim(&self) -> usize {
        self.fixed_dim().unwrap_or(2)
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
    fn exact_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.analytic_gradient(x)
    }
    fn label(&self) -> String {
        self.id()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GradientMethod {
    Analytic,
    CentralDifference { h_fd: f64 },
}

/// A gradient sampled at a point of the open domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub point: Vec<f64>,
    pub gradient: Vec<f64>,
    pub method: GradientMethod,
}

/// Forward and backward difference quotients along every axis. All stencil
/// points must lie in the closure of `domain`.
pub fn one_sided_quotients<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    x: &[f64],
    step: f64,
) -> Result<Vec<(f64, f64)>> {
    check_dim(domain.dim(), x)?;
    let center = field.value(x)?;
    let mut out = Vec::with_capacity(x.len());
    for axis in 0..x.len() {
        let mut fwd = x.to_vec();
        fwd[axis] += step;
        let mut bwd = x.to_vec();
        bwd[axis] -= step;
        if !in_closure(domain, &fwd) || !in_closure(domain, &bwd) {
            return Err(Error::Stencil { point: x.to_vec(), step });
        }
        let up = (field.value(&fwd)? - center) / step;
        let down = (center - field.value(&bwd)?) / step;
        out.push((up, down));
    }
    Ok(out)
}

/// Nondifferentiability filter: every pair of one-sided quotients must agree
/// within `eps`.
pub fn passes_filter(quotients: &[(f64, f64)], eps: f64) -> bool {
    quotients.iter().all(|(up, down)| (up - down).abs() <= eps)
}

/// Central-difference gradient with step `h_fd`.
pub fn central_difference<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    x: &[f64],
    h_fd: f64,
) -> Result<GradientSample> {
    if !(h_fd > 0.0) {
        return Err(Error::Input(format!("h_fd must be positive, got {h_fd}")));
    }
    let q = one_sided_quotients(field, domain, x, h_fd)?;
    Ok(GradientSample {
        point: x.to_vec(),
        gradient: q.iter().map(|(u, d)| 0.5 * (u + d)).collect(),
        method: GradientMethod::CentralDifference { h_fd },
    })
}

/// Gradient at an interior point: analytic when declared, otherwise central
/// differences with step `h_fd`.
pub fn gradient<F: Field + ?Sized>(field: &F, domain: &DomainSpec, x: &[f64], h_fd: f64) -> Result<GradientSample> {
    check_dim(domain.dim(), x)?;
    if !in_open(domain, x) {
        return Err(Error::Input(format!("gradients are sampled in the open domain; {x:?} is not interior")));
    }
    match field.exact_gradient(x) {
        Some(g) => Ok(GradientSample { point: x.to_vec(), gradient: g, method: GradientMethod::Analytic }),
        None => central_difference(field, domain, x, h_fd),
    }
}

/// Central second-difference Hessian (no domain checks).
pub fn hessian_fd<F: Field + ?Sized>(field: &F, x: &[f64], step: f64) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let f0 = field.value(x)?;
    let shifted = |a: usize, sa: f64, b: Option<(usize, f64)>| -> Result<f64> {
        let mut p = x.to_vec();
        p[a] += sa * step;
        if let Some((b, sb)) = b {
            p[b] += sb * step;
        }
        field.value(&p)
    };
    let mut h = vec![vec![0.0; n]; n];
    for a in 0..n {
        h[a][a] = (shifted(a, 1.0, None)? - 2.0 * f0 + shifted(a, -1.0, None)?) / (step * step);
        for b in (a + 1)..n {
            let v = (shifted(a, 1.0, Some((b, 1.0)))? - shifted(a, 1.0, Some((b, -1.0)))?
                - shifted(a, -1.0, Some((b, 1.0)))?
                + shifted(a, -1.0, Some((b, -1.0)))?)
                / (4.0 * step * step);
            h[a][b] = v;
            h[b][a] = v;
        }
    }
    Ok(h)
}

/// Largest ratio `|u(x)-u(y)|/|x-y|` over `n_pairs` seeded random pairs of
/// `closure(domain) ∩ region`: a lower bound on the local Lipschitz constant.
pub fn lipschitz_estimate<F: Field + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    region: &BallRegion,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    if n_pairs < 1 {
        return Err(Error::Input("n_pairs must be at least 1".into()));
    }
    check_dim(domain.dim(), &region.center)?;
    let mut rng = seeded_rng(seed);
    let attempts = 100_000;
    let mut best: f64 = 0.0;
    for _ in 0..n_pairs {
        let x = uniform_in_closure(&mut rng, domain, region, attempts)
            .ok_or_else(|| Error::Input("region does not meet the domain closure".into()))?;
        let y = uniform_in_closure(&mut rng, domain, region, attempts)
            .ok_or_else(|| Error::Input("region does not meet the domain closure".into()))?;
        let d = dist(&x, &y);
        if d > 0.0 {
            best = best.max((field.value(&x)? - field.value(&y)?).abs() / d);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn half_disk() -> DomainSpec {
        DomainSpec::half_disk()
    }

    #[test]
    fn named_values() {
        assert!((FunctionSpec::NegNorm.eval(&[0.6, 0.8]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(FunctionSpec::NegAbsX2.eval(&[0.5, -0.3]).unwrap(), -0.3);
        assert_eq!(FunctionSpec::NegSqrtX1p4X2sq.eval(&[1.0, 0.0]).unwrap(), -1.0);
    }

    #[test]
    fn named_gradients() {
        let g = gradient(&FunctionSpec::NegNorm, &half_disk(), &[0.6, 0.8 - 1e-3], 1e-5).unwrap();
        assert_eq!(g.method, GradientMethod::Analytic);
        let exact = gradient(&FunctionSpec::NegNorm, &DomainSpec::Ball { center: vec![0.0, 0.0], radius: 2.0 }, &[0.6, 0.8], 1e-5).unwrap();
        assert!((exact.gradient[0] + 0.6).abs() < 1e-15 && (exact.gradient[1] + 0.8).abs() < 1e-15);
        let g = gradient(&FunctionSpec::NegAbsX2, &half_disk(), &[0.5, 0.2], 1e-5).unwrap();
        assert_eq!(g.gradient, vec![0.0, -1.0]);
    }

    #[test]
    fn central_difference_of_squared_norm() {
        let g = central_difference(&FunctionSpec::SqNorm, &half_disk(), &[0.3, 0.4], 1e-4).unwrap();
        assert!((g.gradient[0] - 0.6).abs() < 1e-8);
        assert!((g.gradient[1] - 0.8).abs() < 1e-8);
    }

    #[test]
    fn stencil_errors_near_the_boundary() {
        let err = central_difference(&FunctionSpec::SqNorm, &half_disk(), &[1e-6, 0.4], 1e-4);
        assert!(matches!(err, Err(Error::Stencil { .. })));
        assert!(gradient(&FunctionSpec::SqNorm, &half_disk(), &[0.0, 0.4], 1e-4).is_err());
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        let big = DomainSpec::Ball { center: vec![0.0, 0.0], radius: 10.0 };
        let mut rng = seeded_rng(5);
        let h = 1e-4;
        let funcs = [
            FunctionSpec::NegNorm,
            FunctionSpec::NegAbsX2,
            FunctionSpec::NegSqrtX1p4X2sq,
            FunctionSpec::SqNorm,
            FunctionSpec::NegSqNorm,
            FunctionSpec::Affine { coefficients: vec![2.0, -1.0], constant: 0.5 },
        ];
        for f in &funcs {
            for _ in 0..100 {
                // stay away from the kinks so third derivatives stay O(1)
                let x = [rng.gen_range(0.3..0.9), rng.gen_range(0.3..0.9)];
                let a = f.analytic_gradient(&x).unwrap();
                let c = central_difference(f, &big, &x, h).unwrap().gradient;
                for (ai, ci) in a.iter().zip(&c) {
                    assert!((ai - ci).abs() <= 10.0 * h * h * 100.0, "{} at {x:?}", f.id());
                }
            }
        }
    }

    #[test]
    fn sampled_grid_interpolates_multilinearly() {
        let g = SampledGrid::tabulate(vec![0.0, 0.0], vec![0.5, 0.5], vec![3, 3], |p| 2.0 * p[0] - p[1] + 1.0);
        let f = FunctionSpec::SampledGrid(g);
        assert!((f.eval(&[0.3, 0.7]).unwrap() - (0.6 - 0.7 + 1.0)).abs() < 1e-14);
        assert!(matches!(f.eval(&[1.2, 0.0]), Err(Error::Evaluation(_))));
    }

    #[test]
    fn lipschitz_lower_bounds() {
        let region = BallRegion::new(vec![0.0, 0.0], 1.0).unwrap();
        let l = lipschitz_estimate(&FunctionSpec::NegNorm, &half_disk(), &region, 10_000, 3).unwrap();
        assert!((0.95..=1.0 + 1e-12).contains(&l), "{l}");
        let aff = FunctionSpec::Affine { coefficients: vec![2.0, 0.0], constant: 0.0 };
        let l = lipschitz_estimate(&aff, &half_disk(), &region, 10_000, 3).unwrap();
        assert!((1.9..=2.0 + 1e-12).contains(&l), "{l}");
        let c = FunctionSpec::Constant { value: 3.0 };
        assert_eq!(lipschitz_estimate(&c, &half_disk(), &region, 100, 3).unwrap(), 0.0);
        let far = BallRegion::new(vec![-5.0, 0.0], 1.0).unwrap();
        assert!(lipschitz_estimate(&c, &half_disk(), &far, 1, 3).is_err());
    }

    #[test]
    fn lipschitz_estimate_grows_with_pairs() {
        let region = BallRegion::new(vec![0.0, 0.0], 1.0).unwrap();
        let mut prev = 0.0;
        for n in [1, 10, 100, 1000] {
            let l = lipschitz_estimate(&FunctionSpec::NegSqrtX1p4X2sq, &half_disk(), &region, n, 9).unwrap();
            assert!(l >= prev);
            prev = l;
        }
    }

    #[test]
    fn serde_ids() {
        let json = serde_json::to_string(&FunctionSpec::NegSqrtX1p4X2sq).unwrap();
        assert_eq!(json, r#"{"id":"neg-sqrt-x1p4-x2sq"}"#);
        let back: FunctionSpec = serde_json::from_str(r#"{"id":"neg-abs-x2"}"#).unwrap();
        assert!(matches!(back, FunctionSpec::NegAbsX2));
    }
}
