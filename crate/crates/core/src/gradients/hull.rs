//! Convex hulls of finite point sets in dimension at most 3, membership,
//! boundary sampling and normal cones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, complement_basis, dist, dot, lex_cmp, norm, normalize, sub, unit};

/// Tolerance for membership and normal-cone inequalities.
pub const HULL_TOL: f64 = 1e-9;

/// A supporting hyperplane `<normal, p> = offset` of the hull inside its
/// affine span; `normal` is a unit vector of the span pointing outward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Indices into `vertices`; counterclockwise around `normal` in 3D.
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolytope {
    pub ambient_dim: usize,
    pub affine_dim: usize,
    /// Extreme points. When the affine dimension is 2 they are ordered
    /// counterclockwise in the frame given by `basis`.
    pub vertices: Vec<Vec<f64>>,
    pub origin: Vec<f64>,
    /// Orthonormal basis of the affine span, relative to `origin`.
    pub basis: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
}

impl ConvexPolytope {
    fn coords(&self, p: &[f64]) -> Vec<f64> {
        let d = sub(p, &self.origin);
        self.basis.iter().map(|b| dot(&d, b)).collect()
    }

    fn lift(&self, c: &[f64]) -> Vec<f64> {
        let mut p = self.origin.clone();
        for (ci, b) in c.iter().zip(&self.basis) {
            p = axpy(&p, *ci, b);
        }
        p
    }

    /// Distance from `p` to the affine span.
    pub fn span_residual(&self, p: &[f64]) -> f64 {
        dist(p, &self.lift(&self.coords(p)))
    }

    /// Largest facet violation `<n, p> - offset` (or the distance to the lone
    /// vertex of a point polytope).
    fn max_slack(&self, p: &[f64]) -> f64 {
        if self.affine_dim == 0 {
            return dist(p, &self.vertices[0]);
        }
        self.facets.iter().map(|f| dot(&f.normal, p) - f.offset).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.ambient_dim && self.span_residual(p) <= tol && self.max_slack(p) <= tol
    }

    /// Topological boundary in the ambient space: the whole polytope when
    /// its affine dimension is deficient.
    pub fn on_boundary(&self, p: &[f64], tol: f64) -> bool {
        if !self.contains(p, tol) {
            return false;
        }
        self.affine_dim < self.ambient_dim || self.max_slack(p) >= -tol
    }

    /// Points of the topological boundary at spacing about `spacing`.
    pub fn boundary_points(&self, spacing: f64) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        match (self.affine_dim, self.ambient_dim) {
            (0, _) => out.push(self.vertices[0].clone()),
            (1, _) => push_segment(&mut out, &self.vertices[0], &self.vertices[1], spacing),
            (2, 2) => {
                let n = self.vertices.len();
                for i in 0..n {
                    push_segment(&mut out, &self.vertices[i], &self.vertices[(i + 1) % n], spacing);
                }
            }
            (2, _) => {
                let v = &self.vertices;
                for i in 1..v.len() - 1 {
                    push_triangle(&mut out, &v[0], &v[i], &v[i + 1], spacing);
                }
            }
            _ => {
                for f in &self.facets {
                    let v = &f.vertices;
                    for i in 1..v.len() - 1 {
                        push_triangle(
                            &mut out,
                            &self.vertices[v[0]],
                            &self.vertices[v[i]],
                            &self.vertices[v[i + 1]],
                            spacing,
                        );
                    }
                }
            }
        }
        out
    }
}

fn push_segment(out: &mut Vec<Vec<f64>>, a: &[f64], b: &[f64], spacing: f64) {
    let n = (dist(a, b) / spacing).ceil().max(1.0) as usize;
    for k in 0..=n {
        let t = k as f64 / n as f64;
        out.push(a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect());
    }
}

fn push_triangle(out: &mut Vec<Vec<f64>>, a: &[f64], b: &[f64], c: &[f64], spacing: f64) {
    let longest = dist(a, b).max(dist(b, c)).max(dist(a, c));
    let n = (longest / spacing).ceil().max(1.0) as usize;
    for i in 0..=n {
        for j in 0..=(n - i) {
            let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
            out.push((0..a.len()).map(|k| a[k] + s * (b[k] - a[k]) + t * (c[k] - a[k])).collect());
        }
    }
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn cross3(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Andrew's monotone chain; indices of the extreme points, counterclockwise,
/// collinear points dropped.
fn hull_2d(pts: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| lex_cmp(&pts[a], &pts[b]));
    idx.dedup_by(|a, b| dist(&pts[*a], &pts[*b]) <= tol);
    if idx.len() < 3 {
        return idx;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && cross2(&pts[lower[lower.len() - 2]], &pts[lower[lower.len() - 1]], &pts[i]) <= tol {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && cross2(&pts[upper[upper.len() - 2]], &pts[upper[upper.len() - 1]], &pts[i]) <= tol {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Facets of a full-dimensional 3D point set by exhaustive plane search.
/// Returns extreme points and facets indexing into them.
fn hull_3d(pts: &[Vec<f64>], tol: f64) -> (Vec<Vec<f64>>, Vec<Facet>) {
    let n = pts.len();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let c = cross3(&sub(&pts[j], &pts[i]), &sub(&pts[k], &pts[i]));
                let Some(nrm) = normalize(&c) else { continue };
                if norm(&c) <= tol {
                    continue;
                }
                let off = dot(&nrm, &pts[i]);
                let (mut above, mut below) = (false, false);
                for p in pts {
                    let s = dot(&nrm, p) - off;
                    above |= s > tol;
                    below |= s < -tol;
                    if above && below {
                        break;
                    }
                }
                let (nrm, off) = match (above, below) {
                    (false, true) => (nrm, off),
                    (true, false) => (nrm.iter().map(|v| -v).collect(), -off),
                    _ => continue,
                };
                if !planes.iter().any(|(m, o)| dist(m, &nrm) <= 1e-7 && (o - off).abs() <= 1e-7) {
                    planes.push((nrm, off));
                }
            }
        }
    }
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut facets = Vec::new();
    for (nrm, off) in planes {
        let on: Vec<&Vec<f64>> = pts.iter().filter(|p| (dot(&nrm, p) - off).abs() <= tol).collect();
        // frame of the facet plane, oriented so counterclockwise is around `nrm`
        let basis = complement_basis(3, std::slice::from_ref(&nrm));
        let mut e1 = basis[0].clone();
        let mut e2 = basis[1].clone();
        if dot(&cross3(&e1, &e2), &nrm) < 0.0 {
            std::mem::swap(&mut e1, &mut e2);
        }
        let flat: Vec<Vec<f64>> = on.iter().map(|p| vec![dot(p, &e1), dot(p, &e2)]).collect();
        let ring = hull_2d(&flat, tol);
        let mut ids = Vec::with_capacity(ring.len());
        for r in ring {
            let p = on[r];
            let id = match vertices.iter().position(|v| dist(v, p) <= tol) {
                Some(id) => id,
                None => {
                    vertices.push(p.clone());
                    vertices.len() - 1
                }
            };
            ids.push(id);
        }
        facets.push(Facet { normal: nrm, offset: off, vertices: ids });
    }
    (vertices, facets)
}

/// Convex hull of a nonempty finite set in dimension at most 3. Degenerate
/// inputs give a point, segment or polygon flagged with its affine dimension.
pub fn convex_hull(points: &[Vec<f64>]) -> Result<ConvexPolytope> {
    let first = points.first().ok_or_else(|| Error::Input("convex hull of an empty set".into()))?;
    let dim = first.len();
    if dim == 0 || dim > 3 {
        return Err(Error::Input(format!("convex hull supports dimensions 1 to 3, got {dim}")));
    }
    if points.iter().any(|p| p.len() != dim || p.iter().any(|c| !c.is_finite())) {
        return Err(Error::Input("hull input must be finite points of one dimension".into()));
    }
    let scale = points.iter().map(|p| dist(p, first)).fold(0.0, f64::max);
    let tol = 1e-10 * (1.0 + scale);

    // greedy orthonormal basis of the affine span
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for p in points {
            let mut r = sub(p, first);
            for b in &basis {
                r = axpy(&r, -dot(&r, b), b);
            }
            let len = norm(&r);
            if best.as_ref().map_or(true, |(l, _)| len > *l) {
                best = Some((len, r));
            }
        }
        match best {
            Some((len, r)) if len > tol => basis.push(normalize(&r).unwrap()),
            _ => break,
        }
    }
    let k = basis.len();
    let (origin, basis) = if k == dim { (vec![0.0; dim], (0..dim).map(|a| unit(dim, a)).collect()) } else { (first.clone(), basis) };
    let mut poly = ConvexPolytope { ambient_dim: dim, affine_dim: k, vertices: Vec::new(), origin, basis, facets: Vec::new() };
    let coords: Vec<Vec<f64>> = points.iter().map(|p| poly.coords(p)).collect();
    match k {
        0 => poly.vertices.push(first.clone()),
        1 => {
            let (mut lo, mut hi) = (0, 0);
            for (i, c) in coords.iter().enumerate() {
                if c[0] < coords[lo][0] {
                    lo = i;
                }
                if c[0] > coords[hi][0] {
                    hi = i;
                }
            }
            poly.vertices = vec![points[lo].clone(), points[hi].clone()];
            let b = poly.basis[0].clone();
            let neg: Vec<f64> = b.iter().map(|v| -v).collect();
            poly.facets = vec![
                Facet { offset: dot(&neg, &points[lo]), normal: neg, vertices: vec![0] },
                Facet { offset: dot(&b, &points[hi]), normal: b, vertices: vec![1] },
            ];
        }
        2 => {
            let ring = hull_2d(&coords, tol);
            poly.vertices = ring.iter().map(|&i| points[i].clone()).collect();
            let m = ring.len();
            for e in 0..m {
                let (a, b) = (&coords[ring[e]], &coords[ring[(e + 1) % m]]);
                let out2 = normalize(&[b[1] - a[1], a[0] - b[0]]).unwrap();
                let normal = axpy(&vec![0.0; dim], out2[0], &poly.basis[0]);
                let normal = axpy(&normal, out2[1], &poly.basis[1]);
                let offset = dot(&normal, &poly.vertices[e]);
                poly.facets.push(Facet { normal, offset, vertices: vec![e, (e + 1) % m] });
            }
        }
        _ => {
            let (vertices, facets) = hull_3d(points, tol);
            poly.vertices = vertices;
            poly.facets = facets;
        }
    }
    Ok(poly)
}

/// Extreme-ray generators of the normal cone of `poly` at `p0`: unit `ν`
/// with `<ν, q - p0> <= 1e-9` for every vertex `q`. Interior points give an
/// empty list. At most `n_dirs` generators are returned.
pub fn normal_cone_directions(poly: &ConvexPolytope, p0: &[f64], n_dirs: usize) -> Result<Vec<Vec<f64>>> {
    if p0.len() != poly.ambient_dim || !poly.contains(p0, HULL_TOL) {
        return Err(Error::Input(format!("{p0:?} is not on the polytope")));
    }
    let mut gens: Vec<Vec<f64>> = Vec::new();
    if poly.affine_dim > 0 {
        for f in &poly.facets {
            if dot(&f.normal, p0) - f.offset >= -HULL_TOL {
                gens.push(f.normal.clone());
            }
        }
    }
    if poly.affine_dim < poly.ambient_dim {
        let span: Vec<Vec<f64>> = if poly.affine_dim == 0 { Vec::new() } else { poly.basis.clone() };
        for c in complement_basis(poly.ambient_dim, &span) {
            gens.push(c.iter().map(|v| -v).collect());
            gens.push(c);
        }
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for g in gens {
        let ok = poly.vertices.iter().all(|q| dot(&g, &sub(q, p0)) <= HULL_TOL);
        if ok && !out.iter().any(|o| dist(o, &g) <= HULL_TOL) {
            out.push(g);
        }
    }
    out.truncate(n_dirs);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn left_arc(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|k| {
                let t = PI / 2.0 + PI * k as f64 / (n - 1) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()
    }

    #[test]
    fn segment_hull() {
        let h = convex_hull(&[vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(h.affine_dim, 1);
        assert_eq!(h.vertices.len(), 2);
        assert!(h.contains(&[0.0, 0.3], HULL_TOL));
        assert!(!h.contains(&[0.01, 0.3], HULL_TOL));
        assert!(h.on_boundary(&[0.0, 0.3], HULL_TOL));
    }

    #[test]
    fn arc_points_are_all_extreme_and_counterclockwise() {
        let arc = left_arc(32);
        let h = convex_hull(&arc).unwrap();
        assert_eq!(h.affine_dim, 2);
        assert_eq!(h.vertices.len(), 32);
        let n = h.vertices.len();
        for i in 0..n {
            let c = cross2(&h.vertices[i], &h.vertices[(i + 1) % n], &h.vertices[(i + 2) % n]);
            assert!(c > 0.0);
        }
    }

    #[test]
    fn interior_point_is_dropped() {
        let h = convex_hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.2, 0.2]]).unwrap();
        assert_eq!(h.vertices, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn collinear_points_are_dropped() {
        let h = convex_hull(&[vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(h.vertices.len(), 4);
    }

    #[test]
    fn empty_and_mixed_inputs_fail() {
        assert!(convex_hull(&[]).is_err());
        assert!(convex_hull(&[vec![0.0, 1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn point_and_line_in_three_dimensions() {
        let h = convex_hull(&vec![vec![1.0, 2.0, 3.0]; 4]).unwrap();
        assert_eq!(h.affine_dim, 0);
        let h = convex_hull(&[vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![0.5, 0.5, 0.5]]).unwrap();
        assert_eq!(h.affine_dim, 1);
        assert!(h.contains(&[0.25, 0.25, 0.25], HULL_TOL));
    }

    #[test]
    fn cube_hull() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(vec![(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        pts.push(vec![0.5, 0.5, 0.5]);
        pts.push(vec![0.5, 0.5, 0.0]);
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.affine_dim, 3);
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.facets.len(), 6);
        assert!(h.facets.iter().all(|f| f.vertices.len() == 4));
        assert!(h.contains(&[0.5, 0.5, 0.5], HULL_TOL));
        assert!(!h.on_boundary(&[0.5, 0.5, 0.5], HULL_TOL));
        let corner = normal_cone_directions(&h, &[1.0, 1.0, 1.0], 10).unwrap();
        assert_eq!(corner.len(), 3);
        for p in h.boundary_points(0.25) {
            assert!(h.on_boundary(&p, 1e-9));
        }
    }

    #[test]
    fn triangle_in_three_dimensions() {
        let h = convex_hull(&[vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]).unwrap();
        assert_eq!(h.affine_dim, 2);
        assert!(h.on_boundary(&[0.2, 0.2, 1.0], HULL_TOL));
        let cone = normal_cone_directions(&h, &[0.2, 0.2, 1.0], 10).unwrap();
        assert_eq!(cone.len(), 2);
        assert!(cone.iter().all(|v| v[2].abs() > 0.999));
    }

    #[test]
    fn normal_cones_of_examples() {
        let h = convex_hull(&left_arc(32)).unwrap();
        let cone = normal_cone_directions(&h, &[0.0, 0.0], 8).unwrap();
        assert_eq!(cone.len(), 1);
        assert!(dist(&cone[0], &[1.0, 0.0]) < 1e-12);

        let seg = convex_hull(&[vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        let mut cone = normal_cone_directions(&seg, &[0.0, 0.0], 8).unwrap();
        cone.sort_by(|a, b| lex_cmp(a, b));
        assert_eq!(cone.len(), 2);
        assert!(dist(&cone[0], &[-1.0, 0.0]) < 1e-12 && dist(&cone[1], &[1.0, 0.0]) < 1e-12);

        let tri = convex_hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(normal_cone_directions(&tri, &[0.2, 0.2], 8).unwrap().is_empty());
        assert!(normal_cone_directions(&tri, &[2.0, 2.0], 8).is_err());

        let square = convex_hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let cone = normal_cone_directions(&square, &[1.0, 1.0], 8).unwrap();
        assert_eq!(cone.len(), 2);
    }

    #[test]
    fn one_dimensional_ambient() {
        let h = convex_hull(&[vec![0.5], vec![-1.0], vec![0.0]]).unwrap();
        assert_eq!(h.vertices, vec![vec![-1.0], vec![0.5]]);
        assert!(h.on_boundary(&[0.5], HULL_TOL) && !h.on_boundary(&[0.0], HULL_TOL));
        assert_eq!(normal_cone_directions(&h, &[-1.0], 4).unwrap(), vec![vec![-1.0]]);
    }

    fn cloud() -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 1..40)
    }

    proptest! {
        #[test]
        fn hull_is_idempotent(pts in cloud()) {
            let h = convex_hull(&pts).unwrap();
            let again = convex_hull(&h.vertices).unwrap();
            prop_assert_eq!(h.affine_dim, again.affine_dim);
            prop_assert_eq!(h.vertices.len(), again.vertices.len());
            for v in &again.vertices {
                prop_assert!(h.vertices.iter().any(|w| dist(v, w) <= 1e-12));
            }
            for p in &pts {
                prop_assert!(h.contains(p, 1e-9));
            }
        }

        #[test]
        fn cone_generators_satisfy_the_inequality(pts in cloud(), k in 0usize..40) {
            let h = convex_hull(&pts).unwrap();
            let p0 = h.vertices[k % h.vertices.len()].clone();
            for nu in normal_cone_directions(&h, &p0, 16).unwrap() {
                prop_assert!((norm(&nu) - 1.0).abs() <= 1e-12);
                for q in &h.vertices {
                    prop_assert!(dot(&nu, &sub(q, &p0)) <= 1e-9);
                }
            }
        }

        #[test]
        fn boundary_samples_lie_on_the_boundary(pts in cloud()) {
            let h = convex_hull(&pts).unwrap();
            for p in h.boundary_points(0.1) {
                prop_assert!(h.on_boundary(&p, 1e-9));
            }
        }
    }
}
