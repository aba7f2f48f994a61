//! Chebyshev collocation nodes and differentiation matrices.

use std::f64::consts::PI;

/// Gauss-Lobatto nodes `x_j = cos(j*pi/n)`, `j = 0..=n` (descending from 1).
pub fn nodes(n: usize) -> Vec<f64> {
    (0..=n).map(|j| (j as f64 * PI / n as f64).cos()).collect()
}

/// First-derivative collocation matrix on the Gauss-Lobatto nodes, row-major
/// `(n+1) x (n+1)`.
pub fn diff_matrix(n: usize) -> Vec<f64> {
    let m = n + 1;
    let x = nodes(n);
    let c = |i: usize| -> f64 {
        if i == 0 || i == n {
            2.0
        } else {
            1.0
        }
    };
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[i * m + j] = c(i) / c(j) * sign / (x[i] - x[j]);
            }
        }
    }
    // Negative-sum trick for the diagonal keeps the row sums exactly zero.
    for i in 0..m {
        let mut sum = 0.0;
        for j in 0..m {
            if i != j {
                sum += d[i * m + j];
            }
        }
        d[i * m + i] = -sum;
    }
    d
}

/// Barycentric interpolation weights for an arbitrary node set.
pub fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= x[j] - x[k];
            }
        }
    }
    w
}

/// First-derivative collocation matrix on an arbitrary node set, row-major.
pub fn diff_matrix_nodes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let w = barycentric_weights(x);
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            if i != j {
                d[i * n + j] = (w[j] / w[i]) / (x[i] - x[j]);
                sum += d[i * n + j];
            }
        }
        d[i * n + i] = -sum;
    }
    d
}

/// Row of interpolation weights evaluating the interpolant on `x` at `target`
/// (barycentric, exact when `target` hits a node).
pub fn interpolation_row(x: &[f64], target: f64) -> Vec<f64> {
    let n = x.len();
    let w = barycentric_weights(x);
    for (j, &xj) in x.iter().enumerate() {
        if target == xj {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            return row;
        }
    }
    let mut row: Vec<f64> = (0..n).map(|j| w[j] / (target - x[j])).collect();
    let denom: f64 = row.iter().sum();
    for v in row.iter_mut() {
        *v /= denom;
    }
    row
}

/// Matrix product of two row-major square matrices.
pub fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    out
}
