//! The extension envelope
//! `E(x) = min_(y,p) u(y) + <p, x - y> + k |x - y|^{1+α}`
//! over a support set, with an exact branch-and-bound index.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::extension::support::{Provenance, SupportPair, SupportSet};
use crate::funcspace::Field;
use crate::geometry::BallRegion;
use crate::linalg::{dist, dot, sub};
use crate::semiconcavity::ModulusParams;

/// `k (1+α)(1 + 2^{2-α})`, the semiconcavity constant of the envelope on
/// the ball when the kernel coefficient is `k`.
pub fn constant_bound_for(coefficient: f64, alpha: f64) -> f64 {
    coefficient * (1.0 + alpha) * (1.0 + 2f64.powf(2.0 - alpha))
}

/// The bound for the default coefficient `C + 1`.
pub fn constant_bound(params: &ModulusParams) -> Result<f64> {
    params.validate()?;
    Ok(constant_bound_for(params.c + 1.0, params.alpha))
}

fn kernel(d_sq: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        d_sq
    } else {
        d_sq.powf(0.5 * (1.0 + alpha))
    }
}

/// Gradient of `w -> k |w - y|^{1+α}`, zero at `w = y`.
pub fn kernel_gradient(w: &[f64], y: &[f64], alpha: f64, coefficient: f64) -> Vec<f64> {
    let d = sub(w, y);
    if alpha == 1.0 {
        return d.iter().map(|v| 2.0 * coefficient * v).collect();
    }
    let r = dist(w, y);
    if r == 0.0 {
        return vec![0.0; w.len()];
    }
    let s = coefficient * (1.0 + alpha) * r.powf(alpha - 1.0);
    d.iter().map(|v| s * v).collect()
}

/// `|Dv(x) - Dv(z)| / |x - z|^α` for `v(w) = k |w - y|^{1+α}`.
pub fn holder_ratio(y: &[f64], x: &[f64], z: &[f64], alpha: f64, coefficient: f64) -> Result<f64> {
    ModulusParams::new(alpha, 0.0)?;
    check_dim(y.len(), x)?;
    check_dim(y.len(), z)?;
    let d = dist(x, z);
    if d == 0.0 {
        return Err(Error::Input("holder ratio needs x != z".into()));
    }
    let gx = kernel_gradient(x, y, alpha, coefficient);
    let gz = kernel_gradient(z, y, alpha, coefficient);
    Ok(dist(&gx, &gz) / d.powf(alpha))
}

/// Pairs per index cell and cells per block, roughly.
const CELL_TARGET: usize = 48;
const BLOCK_TARGET: usize = 16;

/// Box data bounding every term of a group of pairs from below.
#[derive(Clone, Debug)]
struct Bounds {
    /// Midpoint of the y-box; terms are linearized about it.
    anchor: [f64; 3],
    /// `min (u_j + <p_j, anchor - y_j>)` over members.
    intercept: f64,
    /// The same with the origin as anchor, which is exact for cones.
    intercept0: f64,
    p_lo: [f64; 3],
    p_hi: [f64; 3],
    y_lo: [f64; 3],
    y_hi: [f64; 3],
    /// Every `p` lies within `p_radius` of the p-box midpoint.
    p_radius: f64,
}

impl Bounds {
    fn empty() -> Self {
        Bounds {
            anchor: [0.0; 3],
            intercept: f64::INFINITY,
            intercept0: f64::INFINITY,
            p_lo: [f64::INFINITY; 3],
            p_hi: [f64::NEG_INFINITY; 3],
            y_lo: [f64::INFINITY; 3],
            y_hi: [f64::NEG_INFINITY; 3],
            p_radius: 0.0,
        }
    }

    fn p_mid(&self, a: usize) -> f64 {
        0.5 * (self.p_lo[a] + self.p_hi[a])
    }

    /// Sets the anchor, intercept and `p_radius` from the pairs the boxes
    /// were built from.
    fn fit<'a>(&mut self, pairs: impl Iterator<Item = &'a SupportPair>) {
        for a in 0..3 {
            if self.y_lo[a] <= self.y_hi[a] {
                self.anchor[a] = 0.5 * (self.y_lo[a] + self.y_hi[a]);
            }
        }
        let mut r: f64 = 0.0;
        for pair in pairs {
            let n = pair.y.len();
            let lin: f64 = (0..n).map(|a| pair.p[a] * (self.anchor[a] - pair.y[a])).sum();
            self.intercept = self.intercept.min(pair.u + lin);
            self.intercept0 = self.intercept0.min(pair.u - dot(&pair.p, &pair.y));
            let d: f64 = (0..n).map(|a| (pair.p[a] - self.p_mid(a)).powi(2)).sum();
            r = r.max(d.sqrt());
        }
        self.p_radius = r;
    }

    fn add_pair(&mut self, pair: &SupportPair) {
        for a in 0..pair.y.len() {
            self.p_lo[a] = self.p_lo[a].min(pair.p[a]);
            self.p_hi[a] = self.p_hi[a].max(pair.p[a]);
            self.y_lo[a] = self.y_lo[a].min(pair.y[a]);
            self.y_hi[a] = self.y_hi[a].max(pair.y[a]);
        }
    }

    fn merge(&mut self, o: &Bounds) {
        for a in 0..3 {
            self.p_lo[a] = self.p_lo[a].min(o.p_lo[a]);
            self.p_hi[a] = self.p_hi[a].max(o.p_hi[a]);
            self.y_lo[a] = self.y_lo[a].min(o.y_lo[a]);
            self.y_hi[a] = self.y_hi[a].max(o.y_hi[a]);
        }
    }

    fn lower_bound(&self, x: &[f64], alpha: f64, coefficient: f64) -> f64 {
        let (mut corner, mut mid, mut d_sq) = (0.0, 0.0, 0.0);
        let (mut corner0, mut mid0, mut x_sq, mut gap_sq) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..x.len() {
            let (lo, hi, m) = (self.p_lo[i], self.p_hi[i], self.p_mid(i));
            let d = x[i] - self.anchor[i];
            corner += (lo * d).min(hi * d);
            mid += m * d;
            d_sq += d * d;
            corner0 += (lo * x[i]).min(hi * x[i]);
            mid0 += m * x[i];
            x_sq += x[i] * x[i];
            let g = (self.y_lo[i] - x[i]).max(x[i] - self.y_hi[i]).max(0.0);
            gap_sq += g * g;
        }
        let local = self.intercept + corner.max(mid - self.p_radius * d_sq.sqrt());
        let conic = self.intercept0 + corner0.max(mid0 - self.p_radius * x_sq.sqrt());
        local.max(conic) + coefficient * kernel(gap_sq, alpha)
    }

    /// Lower bound over every `x` in the box `[lo, hi]`.
    fn lower_bound_box(&self, lo: &[f64], hi: &[f64], alpha: f64, coefficient: f64) -> f64 {
        let (mut local, mut conic, mut gap_sq) = (self.intercept, self.intercept0, 0.0);
        let low = |p0: f64, p1: f64, d0: f64, d1: f64| (p0 * d0).min(p0 * d1).min(p1 * d0).min(p1 * d1);
        for i in 0..lo.len() {
            let (p0, p1) = (self.p_lo[i], self.p_hi[i]);
            local += low(p0, p1, lo[i] - self.anchor[i], hi[i] - self.anchor[i]);
            conic += low(p0, p1, lo[i], hi[i]);
            let g = (self.y_lo[i] - hi[i]).max(lo[i] - self.y_hi[i]).max(0.0);
            gap_sq += g * g;
        }
        local.max(conic) + coefficient * kernel(gap_sq, alpha)
    }
}

/// A group of pairs (for cells) or of cells (for blocks).
#[derive(Clone, Debug)]
struct Group {
    bounds: Bounds,
    members: Vec<usize>,
}

/// Buckets `points` on a regular grid over `ball` with about `target`
/// points per bucket; returns member lists in key order.
fn bucket(points: &[Vec<f64>], ball: &BallRegion, target: usize) -> Vec<Vec<usize>> {
    let n = ball.dim();
    let per_axis = ((points.len() as f64 / target as f64).powf(1.0 / n as f64)).ceil().max(1.0) as usize;
    let width = 2.0 * ball.radius / per_axis as f64;
    let mut buckets: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
    for (j, y) in points.iter().enumerate() {
        let key: Vec<usize> = (0..n)
            .map(|a| (((y[a] - ball.center[a] + ball.radius) / width).floor().max(0.0) as usize).min(per_axis - 1))
            .collect();
        buckets.entry(key).or_default().push(j);
    }
    buckets.into_values().collect()
}

fn build_index(pairs: &[SupportPair], ball: &BallRegion) -> (Vec<Group>, Vec<Group>) {
    let ys: Vec<Vec<f64>> = pairs.iter().map(|p| p.y.clone()).collect();
    let cells: Vec<Group> = bucket(&ys, ball, CELL_TARGET)
        .into_iter()
        .map(|members| {
            let mut bounds = Bounds::empty();
            for &j in &members {
                bounds.add_pair(&pairs[j]);
            }
            bounds.fit(members.iter().map(|&j| &pairs[j]));
            Group { bounds, members }
        })
        .collect();
    let centers: Vec<Vec<f64>> = cells
        .iter()
        .map(|c| (0..ball.dim()).map(|a| 0.5 * (c.bounds.y_lo[a] + c.bounds.y_hi[a])).collect())
        .collect();
    let blocks = bucket(&centers, ball, BLOCK_TARGET)
        .into_iter()
        .map(|members| {
            let mut bounds = Bounds::empty();
            for &c in &members {
                bounds.merge(&cells[c].bounds);
            }
            bounds.fit(members.iter().flat_map(|&c| cells[c].members.iter().map(|&j| &pairs[j])));
            Group { bounds, members }
        })
        .collect();
    (cells, blocks)
}

/// Serializable description of an envelope; loading rebuilds the index and
/// reproduces every value bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionDescriptor {
    pub support: SupportSet,
    pub params: ModulusParams,
    pub coefficient: f64,
}

#[derive(Clone, Debug)]
pub struct ExtensionField {
    pub support: SupportSet,
    pub params: ModulusParams,
    pub coefficient: f64,
    pub constant_bound: f64,
    cells: Vec<Group>,
    blocks: Vec<Group>,
}

impl ExtensionField {
    /// `coefficient` defaults to `C + 1` and must exceed `C`.
    pub fn new(support: SupportSet, params: ModulusParams, coefficient: Option<f64>) -> Result<Self> {
        params.validate()?;
        let coefficient = coefficient.unwrap_or(params.c + 1.0);
        if !(coefficient > params.c) || !coefficient.is_finite() {
            return Err(Error::Input(format!(
                "kernel coefficient {coefficient} must exceed the semiconcavity constant {}",
                params.c
            )));
        }
        if support.is_empty() {
            return Err(Error::Geometry("support set is empty".into()));
        }
        let (cells, blocks) = build_index(&support.pairs, &support.ball);
        let mut field = ExtensionField {
            constant_bound: constant_bound_for(coefficient, params.alpha),
            support,
            params,
            coefficient,
            cells,
            blocks,
        };
        // ring pairs come from inexact limits nearby; drop the ones another
        // term undercuts so the envelope still matches u at every node
        let mut keep = Vec::with_capacity(field.support.len());
        for pair in &field.support.pairs {
            keep.push(
                pair.provenance != Provenance::Ring || field.extend(&pair.y)? >= pair.u - 1e-13,
            );
        }
        if keep.contains(&false) {
            let mut flags = keep.into_iter();
            field.support.pairs.retain(|_| flags.next().unwrap_or(true));
            (field.cells, field.blocks) = build_index(&field.support.pairs, &field.support.ball);
        }
        Ok(field)
    }

    pub fn ball(&self) -> &BallRegion {
        &self.support.ball
    }

    pub fn descriptor(&self) -> ExtensionDescriptor {
        ExtensionDescriptor { support: self.support.clone(), params: self.params, coefficient: self.coefficient }
    }

    pub fn from_descriptor(d: ExtensionDescriptor) -> Result<Self> {
        Self::new(d.support, d.params, Some(d.coefficient))
    }

    fn pair_value(&self, j: usize, x: &[f64]) -> f64 {
        let pair = &self.support.pairs[j];
        let (mut lin, mut sq) = (0.0, 0.0);
        for a in 0..x.len() {
            let d = x[a] - pair.y[a];
            lin += pair.p[a] * d;
            sq += d * d;
        }
        pair.u + lin + self.coefficient * kernel(sq, self.params.alpha)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.support.dim(), x)?;
        if !self.support.ball.contains_closed(x) {
            return Err(Error::Input(format!("{x:?} is outside the extension ball")));
        }
        Ok(())
    }

    /// Envelope value and the index of a minimizing pair. A cell is skipped
    /// once its bound reaches the running minimum, so exact ties go to the
    /// pair scanned first.
    pub fn extend_with_argmin(&self, x: &[f64]) -> Result<(f64, usize)> {
        self.check_point(x)?;
        let (alpha, k) = (self.params.alpha, self.coefficient);
        let block_bounds: Vec<f64> = self.blocks.iter().map(|b| b.bounds.lower_bound(x, alpha, k)).collect();
        let mut order: Vec<usize> = (0..self.blocks.len()).collect();
        order.sort_by(|&a, &b| block_bounds[a].total_cmp(&block_bounds[b]).then(a.cmp(&b)));
        let mut best = f64::INFINITY;
        let mut arg = usize::MAX;
        for b in order {
            if block_bounds[b] >= best {
                break;
            }
            self.scan_cells(x, &self.blocks[b].members, &mut best, &mut arg);
        }
        Ok((best, arg))
    }

    /// Scans `cells` in order of their bound at `x`, updating the running
    /// minimum; ties within a cell keep the lowest pair index.
    fn scan_cells(&self, x: &[f64], cells: &[usize], best: &mut f64, arg: &mut usize) {
        let (alpha, k) = (self.params.alpha, self.coefficient);
        let mut order: Vec<(f64, usize)> = cells.iter().map(|&c| (self.cells[c].bounds.lower_bound(x, alpha, k), c)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (bound, c) in order {
            if bound >= *best {
                break;
            }
            for &j in &self.cells[c].members {
                let v = self.pair_value(j, x);
                if v < *best || (v == *best && j < *arg) {
                    *best = v;
                    *arg = j;
                }
            }
        }
    }

    /// `extend` at every point, sharing one cell search across the batch.
    pub fn extend_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        if xs.len() < 2 {
            return xs.iter().map(|x| self.extend(x)).collect();
        }
        let n = self.support.dim();
        let (mut lo, mut hi) = (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]);
        for x in xs {
            self.check_point(x)?;
            for a in 0..n {
                lo[a] = lo[a].min(x[a]);
                hi[a] = hi[a].max(x[a]);
            }
        }
        // the pair minimizing at one point bounds the envelope everywhere
        let (_, j0) = self.extend_with_argmin(&xs[0])?;
        let cap = xs.iter().map(|x| self.pair_value(j0, x)).fold(f64::NEG_INFINITY, f64::max);
        let (alpha, k) = (self.params.alpha, self.coefficient);
        let candidates: Vec<usize> = (0..self.cells.len())
            .filter(|&c| self.cells[c].bounds.lower_bound_box(&lo, &hi, alpha, k) <= cap)
            .collect();
        // warm start each point from the previous minimizer, so most cells
        // fail their bound without a sort
        let mut arg = j0;
        Ok(xs
            .iter()
            .map(|x| {
                let mut best = self.pair_value(arg, x);
                for &c in &candidates {
                    if self.cells[c].bounds.lower_bound(x, alpha, k) >= best {
                        continue;
                    }
                    for &j in &self.cells[c].members {
                        let v = self.pair_value(j, x);
                        if v < best {
                            best = v;
                            arg = j;
                        }
                    }
                }
                best
            })
            .collect())
    }

    pub fn extend(&self, x: &[f64]) -> Result<f64> {
        Ok(self.extend_with_argmin(x)?.0)
    }

    /// Reference scan over every pair.
    pub fn extend_exhaustive(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok((0..self.support.len()).map(|j| self.pair_value(j, x)).fold(f64::INFINITY, f64::min))
    }

    /// Gradient of the minimizing term at `x`.
    pub fn active_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (_, j) = self.extend_with_argmin(x)?;
        let pair = &self.support.pairs[j];
        let k = kernel_gradient(x, &pair.y, self.params.alpha, self.coefficient);
        Ok(pair.p.iter().zip(&k).map(|(a, b)| a + b).collect())
    }
}

impl Field for ExtensionField {
    fn dim(&self) -> usize {
        self.support.dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.extend(x)
    }
    fn exact_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.active_gradient(x).ok()
    }
    fn values(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.extend_many(xs)
    }
    fn label(&self) -> String {
        "extension".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::support::{build_support_set, Provenance, SupportParams};
    use crate::funcspace::FunctionSpec;
    use crate::geometry::{lattice_in_ball, DomainSpec};
    use proptest::prelude::*;

    fn unit() -> BallRegion {
        BallRegion::new(vec![0.0, 0.0], 1.0).unwrap()
    }

    fn envelope(f: &FunctionSpec, spacing: f64, coefficient: Option<f64>) -> ExtensionField {
        let s = build_support_set(f, &DomainSpec::half_disk(), &unit(), &SupportParams::with_spacing(spacing, 1.0)).unwrap();
        ExtensionField::new(s, ModulusParams::new(1.0, 0.0).unwrap(), coefficient).unwrap()
    }

    fn examples() -> [FunctionSpec; 3] {
        [FunctionSpec::NegNorm, FunctionSpec::NegAbsX2, FunctionSpec::NegSqrtX1p4X2sq]
    }

    #[test]
    fn constant_bound_values() {
        assert_eq!(constant_bound(&ModulusParams::new(1.0, 0.0).unwrap()).unwrap(), 6.0);
        let b = constant_bound(&ModulusParams::new(0.5, 1.0).unwrap()).unwrap();
        assert!((b - 2.0 * 1.5 * (1.0 + 2f64.powf(1.5))).abs() < 1e-12 && (b - 11.4853).abs() < 1e-4);
        assert_eq!(constant_bound(&ModulusParams::new(1.0, -1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn holder_ratio_cases() {
        let r = holder_ratio(&[0.1, 0.2], &[0.5, -0.3], &[-0.7, 0.4], 1.0, 1.0).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        for alpha in [0.25, 0.5, 1.0] {
            let r = holder_ratio(&[0.1, 0.2], &[0.1, 0.2], &[0.6, -0.1], alpha, 1.5).unwrap();
            assert!((r - 1.5 * (1.0 + alpha)).abs() < 1e-12);
        }
        assert!(holder_ratio(&[0.0, 0.0], &[0.3, 0.3], &[0.3, 0.3], 0.5, 1.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let e1 = envelope(&FunctionSpec::NegNorm, 0.01, None);
        assert!((e1.extend(&[-0.5, 0.3]).unwrap() + 0.05).abs() <= 0.02);
        assert!((e1.extend(&[0.5, 0.5]).unwrap() + 0.5f64.sqrt()).abs() <= 1e-6);
        let e3 = envelope(&FunctionSpec::NegSqrtX1p4X2sq, 0.01, None);
        assert!((e3.extend(&[-0.2, -0.4]).unwrap() + 0.36).abs() <= 0.02);
    }

    #[test]
    fn identity_on_support_nodes() {
        for f in examples() {
            let e = envelope(&f, 0.05, None);
            for pair in &e.support.pairs {
                assert!((e.extend(&pair.y).unwrap() - f.eval(&pair.y).unwrap()).abs() <= 1e-12, "{} at {:?}", f.id(), pair.y);
            }
        }
    }

    #[test]
    fn batched_values_match_pointwise() {
        for f in examples() {
            let e = envelope(&f, 0.05, None);
            for c in [[-0.3, 0.1], [0.0, 0.0], [0.2, -0.25]] {
                let xs: Vec<Vec<f64>> = lattice_in_ball(&BallRegion::new(c.to_vec(), 0.1).unwrap(), 0.02);
                let batch = e.extend_many(&xs).unwrap();
                for (x, v) in xs.iter().zip(batch) {
                    assert!((v - e.extend(x).unwrap()).abs() <= 1e-14, "{} at {x:?}", f.id());
                }
            }
        }
    }

    #[test]
    fn affine_reproduction() {
        let f = FunctionSpec::Affine { coefficients: vec![0.4, -1.1], constant: 0.25 };
        let e = envelope(&f, 0.05, Some(1.0));
        for pair in &e.support.pairs {
            assert!((e.extend(&pair.y).unwrap() - f.eval(&pair.y).unwrap()).abs() <= 1e-12);
        }
        let e = envelope(&f, 0.05, Some(1e-12));
        for x in lattice_in_ball(&unit(), 0.03) {
            assert!((e.extend(&x).unwrap() - f.eval(&x).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn descriptor_round_trip_is_bit_identical() {
        let e = envelope(&FunctionSpec::NegSqrtX1p4X2sq, 0.1, None);
        let json = serde_json::to_string(&e.descriptor()).unwrap();
        let back = ExtensionField::from_descriptor(serde_json::from_str(&json).unwrap()).unwrap();
        for x in lattice_in_ball(&unit(), 0.07) {
            assert_eq!(e.extend(&x).unwrap().to_bits(), back.extend(&x).unwrap().to_bits());
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let e = envelope(&FunctionSpec::NegNorm, 0.1, None);
        assert!(matches!(e.extend(&[1.2, 0.0]), Err(Error::Input(_))));
        let s = e.support.clone();
        assert!(ExtensionField::new(s, ModulusParams::new(1.0, 0.5).unwrap(), Some(0.5)).is_err());
    }

    #[test]
    fn refinement_never_increases_values() {
        let coarse = envelope(&FunctionSpec::NegNorm, 0.1, None);
        let mut pairs = coarse.support.pairs.clone();
        pairs.push(SupportPair { y: vec![0.3, 0.3], u: -(0.18f64).sqrt(), p: vec![-0.5f64.sqrt(), -0.5f64.sqrt()], provenance: Provenance::Smooth });
        let support = SupportSet::from_pairs(pairs, unit(), 0.1).unwrap();
        let fine = ExtensionField::new(support, coarse.params, Some(coarse.coefficient)).unwrap();
        for x in lattice_in_ball(&unit(), 0.05) {
            assert!(fine.extend(&x).unwrap() <= coarse.extend(&x).unwrap());
        }
    }

    fn in_ball() -> impl Strategy<Value = Vec<f64>> {
        (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| vec![r.sqrt() * t.cos(), r.sqrt() * t.sin()])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn index_matches_exhaustive_scan(x in in_ball()) {
            let e = envelope(&FunctionSpec::NegSqrtX1p4X2sq, 0.1, None);
            prop_assert_eq!(e.extend(&x).unwrap().to_bits(), e.extend_exhaustive(&x).unwrap().to_bits());
        }

        #[test]
        fn envelope_lies_below_every_term(x in in_ball()) {
            let e = envelope(&FunctionSpec::NegNorm, 0.1, None);
            let v = e.extend(&x).unwrap();
            for j in 0..e.support.len() {
                prop_assert!(v <= e.pair_value(j, &x));
            }
        }

        #[test]
        fn holder_ratio_respects_the_bound(y in in_ball(), x in in_ball(), z in in_ball(), a in 0.05..=1.0f64) {
            prop_assume!(dist(&x, &z) > 1e-9);
            let r = holder_ratio(&y, &x, &z, a, 1.0).unwrap();
            prop_assert!(r <= constant_bound_for(1.0, a) + 1e-9);
        }
    }
}
