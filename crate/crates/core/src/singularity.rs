//! Propagation of singularities from boundary points: the hull-gap
//! condition, directions from the normal cone, a numerical singularity
//! indicator and an arc tracer.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::funcspace::Field;
use crate::geometry::{fibonacci_sphere, BallRegion};
use crate::gradients::{cluster_gradients, hull_gap, normal_cone_directions, ReachableGradientSet};
use crate::linalg::{axpy, complement_basis, dist, dot, norm, normalize, sub};

/// `(holds, candidates)`: the condition holds when the boundary of the hull
/// of the reachable set has points away from the set; those points are the
/// candidates for `p0`.
pub fn check_condition_h(set: &ReachableGradientSet, eps_g: f64) -> Result<(bool, Vec<Vec<f64>>)> {
    let gap = hull_gap(set, eps_g)?;
    Ok((!gap.is_empty(), gap))
}

/// The candidate farthest from every representative; ties go to the first.
pub fn deepest_candidate(set: &ReachableGradientSet, candidates: &[Vec<f64>]) -> Option<Vec<f64>> {
    let depth = |p: &Vec<f64>| set.representatives.iter().map(|r| dist(r, p)).fold(f64::INFINITY, f64::min);
    let mut best: Option<(f64, &Vec<f64>)> = None;
    for c in candidates {
        let d = depth(c);
        if best.map_or(true, |(b, _)| d > b) {
            best = Some((d, c));
        }
    }
    best.map(|(_, c)| c.clone())
}

/// `θ = -ν` for every generator `ν` of the normal cone of the hull at `p0`.
pub fn propagation_directions(set: &ReachableGradientSet, p0: &[f64]) -> Result<Vec<Vec<f64>>> {
    let hull = set.hull()?;
    let normals = normal_cone_directions(&hull, p0, 16)?;
    if normals.is_empty() {
        return Err(Error::DegenerateDirection(format!("{p0:?} is interior to the hull; the normal cone is {{0}}")));
    }
    Ok(normals.into_iter().map(|v| v.iter().map(|c| -c).collect()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorParams {
    /// Probe radius around the query point.
    pub radius: f64,
    /// Probe points besides the center.
    pub m: usize,
    /// Central-difference step for fields without exact gradients.
    pub h_fd: f64,
    pub eps_c: f64,
}

impl IndicatorParams {
    pub fn for_radius(delta: f64) -> Self {
        IndicatorParams { radius: 0.005 * delta, m: 24, h_fd: 1e-7 * delta, eps_c: 0.02 }
    }
}

fn probe_offsets(dim: usize, radius: f64, m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim]];
    match dim {
        1 => {
            for k in 1..=m {
                let t = radius * (2.0 * k as f64 / m as f64 - 1.0);
                out.push(vec![t]);
            }
        }
        2 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for k in 0..m {
                let r = radius * ((k as f64 + 0.5) / m as f64).sqrt();
                let a = golden * k as f64;
                out.push(vec![r * a.cos(), r * a.sin()]);
            }
        }
        _ => {
            for (k, d) in fibonacci_sphere(m).into_iter().enumerate() {
                let r = radius * ((k as f64 + 0.5) / m as f64).cbrt();
                out.push(d.iter().map(|c| r * c).collect());
            }
        }
    }
    out
}

fn field_gradient<F: Field + ?Sized>(field: &F, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if let Some(g) = field.exact_gradient(x) {
        return Ok(g);
    }
    let mut g = Vec::with_capacity(x.len());
    for a in 0..x.len() {
        let mut up = x.to_vec();
        up[a] += h;
        let mut down = x.to_vec();
        down[a] -= h;
        g.push((field.value(&up)? - field.value(&down)?) / (2.0 * h));
    }
    Ok(g)
}

/// Diameter of the clustered gradients of `field` sampled on a small ball
/// around `x`; large values flag a nearby nondifferentiability. `ball` is
/// where `field` can be evaluated.
pub fn singularity_indicator<F: Field + ?Sized>(
    field: &F,
    ball: &BallRegion,
    x: &[f64],
    params: &IndicatorParams,
) -> Result<f64> {
    check_dim(ball.dim(), x)?;
    if !(params.radius > 0.0) || params.m == 0 || !(params.h_fd > 0.0) || !(params.eps_c > 0.0) {
        return Err(Error::Input("indicator parameters must be positive".into()));
    }
    if dist(x, &ball.center) + params.radius + params.h_fd > ball.radius {
        return Err(Error::Input(format!("indicator probe around {x:?} leaves the field ball")));
    }
    let grads = probe_offsets(x.len(), params.radius, params.m)
        .iter()
        .map(|o| field_gradient(field, &axpy(x, 1.0, o), params.h_fd))
        .collect::<Result<Vec<_>>>()?;
    let reps: Vec<Vec<f64>> = cluster_gradients(&grads, params.eps_c).into_iter().map(|c| c.0).collect();
    let mut d: f64 = 0.0;
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            d = d.max(dist(&reps[i], &reps[j]));
        }
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcParams {
    pub ds: f64,
    pub sigma: f64,
    /// Half-width of the transverse search disc.
    pub width: f64,
    /// Spacing of the transverse search grid.
    pub search_spacing: f64,
    pub eps_s: f64,
    /// Bound on the first three tangency residuals.
    pub rho_t: f64,
    pub indicator: IndicatorParams,
}

impl ArcParams {
    pub fn for_radius(delta: f64) -> Self {
        let ds = 0.02 * delta;
        ArcParams {
            ds,
            sigma: 0.4 * delta,
            width: 3.0 * ds,
            search_spacing: ds / 10.0,
            eps_s: 0.05,
            rho_t: 0.25,
            indicator: IndicatorParams::for_radius(delta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ds > 0.0 && self.sigma >= self.ds && self.width >= 0.0 && self.search_spacing > 0.0) {
            return Err(Error::Input("arc parameters need ds > 0, sigma >= ds, width >= 0, spacing > 0".into()));
        }
        if !(self.eps_s > 0.0 && self.rho_t > 0.0) {
            return Err(Error::Input("eps_s and rho_t must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSample {
    pub s: f64,
    pub point: Vec<f64>,
    pub indicator: f64,
    /// `|x(s) - x0 - s θ| / s`; absent at `s = 0`.
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularArc {
    pub anchor: Vec<f64>,
    pub p0: Option<Vec<f64>>,
    pub theta: Vec<f64>,
    pub sigma: f64,
    pub ds: f64,
    pub samples: Vec<ArcSample>,
    /// Every indicator above `eps_s` and the first three residuals at most
    /// `rho_t`.
    pub validated: bool,
}

impl SingularArc {
    pub fn residuals(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.residual).collect()
    }
}

/// Transverse search grid: offsets orthogonal to `theta` within `width`.
fn transverse_offsets(theta: &[f64], width: f64, spacing: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let frame = complement_basis(theta.len(), std::slice::from_ref(&theta.to_vec()));
    let k = (width / spacing + 1e-9).floor() as i64;
    let mut coords: Vec<Vec<f64>> = Vec::new();
    match frame.len() {
        0 => coords.push(Vec::new()),
        1 => coords.extend((-k..=k).map(|i| vec![i as f64 * spacing])),
        _ => {
            for i in -k..=k {
                for j in -k..=k {
                    let c = vec![i as f64 * spacing, j as f64 * spacing];
                    if norm(&c) <= width + 1e-12 {
                        coords.push(c);
                    }
                }
            }
        }
    }
    (frame, coords)
}

/// Follows the singular set of `field` from `x0` along `theta`: at each
/// `s_i = i ds <= sigma` the indicator is maximized over a disc orthogonal
/// to `theta` and the center of the plateau around the maximizer is kept.
pub fn trace_singular_arc<F: Field + ?Sized>(
    field: &F,
    ball: &BallRegion,
    x0: &[f64],
    theta: &[f64],
    p0: Option<Vec<f64>>,
    params: &ArcParams,
) -> Result<SingularArc> {
    params.validate()?;
    check_dim(ball.dim(), x0)?;
    check_dim(ball.dim(), theta)?;
    let theta = normalize(theta).ok_or_else(|| Error::DegenerateDirection("theta is zero".into()))?;
    let room = ball.radius - dist(x0, &ball.center);
    if params.sigma + params.width + params.indicator.radius >= room {
        return Err(Error::Input(format!(
            "horizon {} plus search width {} does not fit in the ball around {x0:?}",
            params.sigma, params.width
        )));
    }
    let (frame, coords) = transverse_offsets(&theta, params.width, params.search_spacing);
    let mut arc = SingularArc {
        anchor: x0.to_vec(),
        p0,
        theta: theta.clone(),
        sigma: params.sigma,
        ds: params.ds,
        samples: vec![ArcSample {
            s: 0.0,
            point: x0.to_vec(),
            indicator: singularity_indicator(field, ball, x0, &params.indicator)?,
            residual: None,
        }],
        validated: false,
    };
    let steps = (params.sigma / params.ds + 1e-9).floor() as usize;
    for i in 1..=steps {
        let s = i as f64 * params.ds;
        let center = axpy(x0, s, &theta);
        let lift = |c: &[f64]| {
            let mut p = center.clone();
            for (ci, e) in c.iter().zip(&frame) {
                p = axpy(&p, *ci, e);
            }
            p
        };
        let values = coords
            .iter()
            .map(|c| singularity_indicator(field, ball, &lift(c), &params.indicator))
            .collect::<Result<Vec<f64>>>()?;
        let (arg, top) = values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if *v > acc.1 { (k, *v) } else { acc });
        let chosen: Vec<f64> = if frame.len() == 1 {
            let (mut lo, mut hi) = (arg, arg);
            while lo > 0 && values[lo - 1] >= 0.5 * top {
                lo -= 1;
            }
            while hi + 1 < values.len() && values[hi + 1] >= 0.5 * top {
                hi += 1;
            }
            vec![0.5 * (coords[lo][0] + coords[hi][0])]
        } else if frame.len() >= 2 {
            let plateau: Vec<&Vec<f64>> = coords.iter().zip(&values).filter(|(_, v)| **v >= 0.5 * top).map(|(c, _)| c).collect();
            let n = plateau.len() as f64;
            (0..frame.len()).map(|a| plateau.iter().map(|c| c[a]).sum::<f64>() / n).collect()
        } else {
            Vec::new()
        };
        let point = lift(&chosen);
        let indicator = singularity_indicator(field, ball, &point, &params.indicator)?;
        let residual = dist(&point, &center) / s;
        if indicator <= params.eps_s {
            return Err(Error::PropagationLost { s, partial: Box::new(arc) });
        }
        arc.samples.push(ArcSample { s, point, indicator, residual: Some(residual) });
    }
    let head_ok = arc.residuals().iter().take(3).all(|r| *r <= params.rho_t);
    let moving = arc.samples.iter().skip(1).all(|p| dist(&p.point, x0) > 0.0);
    arc.validated = head_ok && moving && arc.samples.iter().skip(1).all(|p| p.indicator > params.eps_s);
    Ok(arc)
}

/// Component of `x - x0` orthogonal to `theta`.
pub fn transverse_offset(x: &[f64], x0: &[f64], theta: &[f64]) -> f64 {
    let d = sub(x, x0);
    let t = dot(&d, theta);
    norm(&axpy(&d, -t, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{build_support_set, ExtensionField, SupportParams};
    use crate::funcspace::FunctionSpec;
    use crate::geometry::DomainSpec;
    use crate::gradients::{convex_hull, reachable_gradients, ReachableParams};
    use crate::semiconcavity::ModulusParams;

    fn unit() -> BallRegion {
        BallRegion::new(vec![0.0, 0.0], 1.0).unwrap()
    }

    fn origin_set(f: &FunctionSpec) -> ReachableGradientSet {
        reachable_gradients(f, &DomainSpec::half_disk(), &[0.0, 0.0], &ReachableParams::default()).unwrap()
    }

    fn envelope(f: &FunctionSpec) -> ExtensionField {
        let s = build_support_set(f, &DomainSpec::half_disk(), &unit(), &SupportParams::for_radius(1.0)).unwrap();
        ExtensionField::new(s, ModulusParams::new(1.0, 0.0).unwrap(), None).unwrap()
    }

    fn angle_deg(a: &[f64], b: &[f64]) -> f64 {
        (dot(a, b) / (norm(a) * norm(b))).clamp(-1.0, 1.0).acos().to_degrees()
    }

    #[test]
    fn condition_on_the_three_examples() {
        let (holds, cands) = check_condition_h(&origin_set(&FunctionSpec::NegNorm), 0.01).unwrap();
        assert!(holds && cands.iter().any(|p| norm(p) <= 0.01));
        let (holds, cands) = check_condition_h(&origin_set(&FunctionSpec::NegAbsX2), 0.01).unwrap();
        assert!(holds && cands.iter().all(|p| p[0].abs() < 1e-9 && p[1].abs() < 1.0));
        let (holds, cands) = check_condition_h(&origin_set(&FunctionSpec::NegSqrtX1p4X2sq), 0.01).unwrap();
        assert!(!holds && cands.is_empty());
    }

    #[test]
    fn directions_on_the_examples() {
        let set = origin_set(&FunctionSpec::NegNorm);
        let (_, cands) = check_condition_h(&set, 0.01).unwrap();
        let p0 = deepest_candidate(&set, &cands).unwrap();
        let dirs = propagation_directions(&set, &p0).unwrap();
        assert_eq!(dirs.len(), 1);
        assert!(angle_deg(&dirs[0], &[-1.0, 0.0]) <= 5.0);

        let set = origin_set(&FunctionSpec::NegAbsX2);
        let (_, cands) = check_condition_h(&set, 0.01).unwrap();
        let p0 = deepest_candidate(&set, &cands).unwrap();
        assert!(norm(&p0) < 0.01);
        let dirs = propagation_directions(&set, &p0).unwrap();
        assert_eq!(dirs.len(), 2);
        assert!(dirs.iter().any(|d| angle_deg(d, &[1.0, 0.0]) <= 5.0));
        assert!(dirs.iter().any(|d| angle_deg(d, &[-1.0, 0.0]) <= 5.0));
        for d in &dirs {
            assert!((norm(d) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn square_vertex_and_interior_point() {
        let mut set = origin_set(&FunctionSpec::NegAbsX2);
        set.representatives = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        assert_eq!(propagation_directions(&set, &[1.0, 1.0]).unwrap().len(), 2);
        assert!(matches!(propagation_directions(&set, &[0.5, 0.5]), Err(Error::DegenerateDirection(_))));
        assert!(convex_hull(&set.representatives).is_ok());
    }

    #[test]
    fn condition_is_rotation_invariant() {
        let set = origin_set(&FunctionSpec::NegNorm);
        let (c, s) = (0.6f64, 0.8f64);
        let rot = |v: &Vec<f64>| vec![c * v[0] - s * v[1], s * v[0] + c * v[1]];
        let mut turned = set.clone();
        turned.representatives = set.representatives.iter().map(rot).collect();
        for smp in &mut turned.samples {
            smp.gradient = rot(&smp.gradient);
        }
        let (h0, c0) = check_condition_h(&set, 0.01).unwrap();
        let (h1, c1) = check_condition_h(&turned, 0.01).unwrap();
        assert_eq!(h0, h1);
        let p0 = deepest_candidate(&set, &c0).unwrap();
        let p1 = deepest_candidate(&turned, &c1).unwrap();
        assert!(dist(&rot(&p0), &p1) <= 0.02);
        let d0 = propagation_directions(&set, &p0).unwrap();
        let d1 = propagation_directions(&turned, &p1).unwrap();
        assert!(angle_deg(&rot(&d0[0]), &d1[0]) <= 1.0);
    }

    #[test]
    fn indicator_values() {
        let e = envelope(&FunctionSpec::NegAbsX2);
        let p = IndicatorParams::for_radius(1.0);
        assert!(singularity_indicator(&e, &unit(), &[-0.3, 0.0], &p).unwrap() > 1.9);
        assert!(singularity_indicator(&e, &unit(), &[-0.3, 0.2], &p).unwrap() < 0.05);
        let aff = FunctionSpec::Affine { coefficients: vec![0.3, 0.9], constant: 1.0 };
        assert!(singularity_indicator(&aff, &unit(), &[0.1, 0.1], &p).unwrap() < 1e-9);
        assert!(singularity_indicator(&aff, &unit(), &[0.999, 0.0], &p).is_err());
    }

    #[test]
    fn arcs_follow_the_closed_form_singular_lines() {
        let mut params = ArcParams::for_radius(1.0);
        params.ds = 0.05;
        for (f, theta) in [
            (FunctionSpec::NegNorm, [-1.0, 0.0]),
            (FunctionSpec::NegAbsX2, [1.0, 0.0]),
            (FunctionSpec::NegAbsX2, [-1.0, 0.0]),
            (FunctionSpec::NegSqrtX1p4X2sq, [-1.0, 0.0]),
        ] {
            let e = envelope(&f);
            let arc = trace_singular_arc(&e, &unit(), &[0.0, 0.0], &theta, None, &params).unwrap();
            assert!(arc.validated, "{}", f.id());
            assert_eq!(arc.samples[0].point, vec![0.0, 0.0]);
            for smp in arc.samples.iter().skip(1) {
                assert!(dist(&smp.point, &[theta[0] * smp.s, 0.0]) <= 0.02, "{} at s={}", f.id(), smp.s);
            }
            assert_eq!(arc.samples.len(), 9);
        }
    }

    #[test]
    fn losing_the_singularity_returns_the_partial_arc() {
        let e = envelope(&FunctionSpec::NegNorm);
        let mut params = ArcParams::for_radius(1.0);
        params.ds = 0.05;
        params.width = 0.01;
        match trace_singular_arc(&e, &unit(), &[0.0, 0.0], &[0.0, 1.0], None, &params) {
            Err(Error::PropagationLost { s, partial }) => {
                assert!(s > 0.0);
                assert_eq!(partial.samples[0].s, 0.0);
            }
            other => panic!("expected a lost arc, got {other:?}"),
        }
        params.sigma = 0.99;
        assert!(matches!(trace_singular_arc(&e, &unit(), &[0.0, 0.0], &[-1.0, 0.0], None, &params), Err(Error::Input(_))));
    }
}
