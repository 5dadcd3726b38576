//! Small dense-vector helpers for points in dimension 1 to 3.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn normalize(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn unit(dim: usize, axis: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[axis] = 1.0;
    e
}

/// Lexicographic total order on vectors.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Orthonormal basis of the orthogonal complement of the span of `basis`
/// (which must itself be orthonormal) in `R^dim`.
pub fn complement_basis(dim: usize, basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for axis in 0..dim {
        let mut v = unit(dim, axis);
        for b in basis.iter().chain(out.iter()) {
            let c = dot(&v, b);
            v = axpy(&v, -c, b);
        }
        if norm(&v) > 1e-6 {
            out.push(normalize(&v).unwrap());
        }
        if basis.len() + out.len() == dim {
            break;
        }
    }
    out
}

/// Largest eigenvalue of a symmetric matrix of size at most 3 (cyclic Jacobi).
pub fn max_symmetric_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    match n {
        0 => f64::NEG_INFINITY,
        1 => m[0][0],
        2 => {
            let (a, b, d) = (m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            mean + rad
        }
        _ => {
            let mut a: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| 0.5 * (m[i][j] + m[j][i])).collect())
                .collect();
            for _ in 0..64 {
                let off: f64 = (0..n)
                    .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .map(|(i, j)| a[i][j] * a[i][j])
                    .sum();
                if off < 1e-30 {
                    break;
                }
                for p in 0..n {
                    for q in (p + 1)..n {
                        if a[p][q].abs() < 1e-300 {
                            continue;
                        }
                        let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                        let t = if theta == 0.0 { 1.0 } else { t };
                        let c = 1.0 / (t * t + 1.0).sqrt();
                        let s = t * c;
                        for k in 0..n {
                            let akp = a[k][p];
                            let akq = a[k][q];
                            a[k][p] = c * akp - s * akq;
                            a[k][q] = s * akp + c * akq;
                        }
                        for k in 0..n {
                            let apk = a[p][k];
                            let aqk = a[q][k];
                            a[p][k] = c * apk - s * aqk;
                            a[q][k] = s * apk + c * aqk;
                        }
                    }
                }
            }
            (0..n).map(|i| a[i][i]).fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_small_matrices() {
        assert_eq!(max_symmetric_eigenvalue(&[vec![3.0]]), 3.0);
        let m2 = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        assert!((max_symmetric_eigenvalue(&m2) - 3.0).abs() < 1e-14);
        let m3 = vec![
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ];
        let expected = 2.0 + std::f64::consts::SQRT_2;
        assert!((max_symmetric_eigenvalue(&m3) - expected).abs() < 1e-12);
    }

    #[test]
    fn complement_of_a_line_in_the_plane() {
        let b = vec![vec![0.0, 1.0]];
        let c = complement_basis(2, &b);
        assert_eq!(c.len(), 1);
        assert!((dot(&c[0], &b[0])).abs() < 1e-15);
        assert!((norm(&c[0]) - 1.0).abs() < 1e-15);
    }
}
