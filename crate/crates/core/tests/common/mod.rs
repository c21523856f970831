#![allow(dead_code)]

use bearing_core::{Configuration, Framework, Graph};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Random connected framework: a spanning path plus extra edges, points
/// in `[-1, 1]^d` kept at least `0.05` apart.
#[derive(Debug, Clone)]
pub struct RandomFramework {
    pub n: usize,
    pub d: usize,
    pub edges: Vec<(usize, usize)>,
    pub coords: Vec<f64>,
}

impl RandomFramework {
    pub fn framework(&self) -> Framework {
        let g = Graph::new(self.n, &self.edges).unwrap();
        Framework::new(g, Configuration::new(self.d, DVector::from_vec(self.coords.clone())).unwrap()).unwrap()
    }

    pub fn graph(&self) -> Graph {
        Graph::new(self.n, &self.edges).unwrap()
    }

    pub fn p(&self) -> DVector<f64> {
        DVector::from_vec(self.coords.clone())
    }
}

fn well_separated(d: usize, c: &[f64]) -> bool {
    let n = c.len() / d;
    (0..n).all(|i| {
        (i + 1..n).all(|j| (0..d).map(|a| (c[i * d + a] - c[j * d + a]).powi(2)).sum::<f64>().sqrt() > 0.05)
    })
}

pub fn random_framework(max_n: usize) -> impl Strategy<Value = RandomFramework> {
    (3..=max_n, 2usize..=3)
        .prop_flat_map(|(n, d)| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            (
                Just(n),
                Just(d),
                proptest::collection::vec(-1.0f64..1.0, n * d),
                proptest::sample::subsequence(pairs.clone(), 0..=pairs.len()),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
        .prop_filter("points too close", |(_, d, c, _, _)| well_separated(*d, c))
        .prop_map(|(n, d, coords, extra, perm)| {
            let mut edges: Vec<(usize, usize)> = perm.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
            for e in extra {
                if !edges.contains(&e) {
                    edges.push(e);
                }
            }
            RandomFramework { n, d, edges, coords }
        })
}

/// Bearings computed from scratch: canonical edges sorted, tail < head,
/// `(p_head - p_tail) / ||p_head - p_tail||`.
pub fn oracle_bearings(n: usize, d: usize, edges: &[(usize, usize)], p: &[f64]) -> Vec<f64> {
    let mut canon: Vec<(usize, usize)> = edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    canon.sort_unstable();
    assert!(p.len() == n * d);
    let mut out = Vec::new();
    for (t, h) in canon {
        let v: Vec<f64> = (0..d).map(|a| p[h * d + a] - p[t * d + a]).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.extend(v.iter().map(|x| x / len));
    }
    out
}

/// Central-difference Jacobian of [`oracle_bearings`].
pub fn oracle_jacobian(n: usize, d: usize, edges: &[(usize, usize)], p: &[f64], h: f64) -> DMatrix<f64> {
    let rows = edges.len() * d;
    let mut j = DMatrix::zeros(rows, n * d);
    let mut q = p.to_vec();
    for c in 0..n * d {
        q[c] = p[c] + h;
        let plus = oracle_bearings(n, d, edges, &q);
        q[c] = p[c] - h;
        let minus = oracle_bearings(n, d, edges, &q);
        q[c] = p[c];
        for r in 0..rows {
            j[(r, c)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    j
}

/// Bearing Laplacian assembled directly from its block definition.
pub fn oracle_laplacian(n: usize, d: usize, edges: &[(usize, usize)], p: &[f64]) -> DMatrix<f64> {
    let g = oracle_bearings(n, d, edges, p);
    let mut canon: Vec<(usize, usize)> = edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    canon.sort_unstable();
    let mut l = DMatrix::zeros(n * d, n * d);
    for (k, &(t, h)) in canon.iter().enumerate() {
        let gk = DVector::from_column_slice(&g[k * d..(k + 1) * d]);
        let proj = DMatrix::identity(d, d) - &gk * gk.transpose();
        for (a, b, s) in [(t, t, 1.0), (h, h, 1.0), (t, h, -1.0), (h, t, -1.0)] {
            let mut blk = l.view_mut((a * d, b * d), (d, d));
            blk += &proj * s;
        }
    }
    l
}

/// Rotation in the plane of axes `(0, 1)` by `theta`, then a second
/// rotation in `(1, 2)` for 3-D.
pub fn rotation(d: usize, theta: f64, phi: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(d, d);
    let (s, c) = theta.sin_cos();
    r[(0, 0)] = c;
    r[(0, 1)] = -s;
    r[(1, 0)] = s;
    r[(1, 1)] = c;
    if d >= 3 {
        let mut r2 = DMatrix::identity(d, d);
        let (s, c) = phi.sin_cos();
        r2[(1, 1)] = c;
        r2[(1, 2)] = -s;
        r2[(2, 1)] = s;
        r2[(2, 2)] = c;
        r = r2 * r;
    }
    r
}
