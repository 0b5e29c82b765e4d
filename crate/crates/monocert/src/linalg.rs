//! Small dense linear algebra helpers: just enough for Newton steps and
//! polytope vertex enumeration. Matrices are row-major `Vec<Vec<f64>>`.

/// Solve `A x = b` by LU factorization with partial pivoting.
/// Returns `None` when the matrix is singular to working precision.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x: Vec<f64> = b.to_vec();

    for k in 0..n {
        let mut piv = k;
        let mut max = m[k][k].abs();
        for i in (k + 1)..n {
            let v = m[i][k].abs();
            if v > max {
                max = v;
                piv = i;
            }
        }
        if max < 1e-300 {
            return None;
        }
        if piv != k {
            m.swap(k, piv);
            x.swap(k, piv);
        }
        let pivot = m[k][k];
        for i in (k + 1)..n {
            let factor = m[i][k] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                m[i][j] -= factor * m[k][j];
            }
            x[i] -= factor * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `n` evenly spaced points from `a` to `b` inclusive. `n == 1` yields `[a]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + step * i as f64).collect()
}
