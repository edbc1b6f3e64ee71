//! Test-side dense oracles, independent of the library's band code.
#![allow(dead_code)]

use uniloc::{ComplexBandMatrix, C64};

pub type Dense = Vec<Vec<C64>>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(n: usize, m: usize) -> Dense {
    vec![vec![c(0.0, 0.0); m]; n]
}

pub fn eye(n: usize) -> Dense {
    let mut a = zeros(n, n);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    a
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x == c(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                out[i][j] += x * b[l][j];
            }
        }
    }
    out
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    let mut out = zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn of_band(m: &ComplexBandMatrix) -> Dense {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect()).collect()
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Dense, b: &[C64]) -> Vec<C64> {
    let n = a.len();
    let mut m: Dense = a.iter().zip(b).map(|(row, &v)| {
        let mut r = row.clone();
        r.push(v);
        r
    }).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap();
        m.swap(col, p);
        let piv = m[col][col];
        assert!(piv.norm() > 1e-300, "singular oracle system");
        for i in col + 1..n {
            let f = m[i][col] / piv;
            if f == c(0.0, 0.0) {
                continue;
            }
            for j in col..=n {
                let v = m[col][j];
                m[i][j] -= f * v;
            }
        }
    }
    let mut x = vec![c(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = m[i][n];
        for j in i + 1..n {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    x
}

/// `S(t)` from its row formula, periodic on `n` (even) sites: even row `2k`
/// holds `(rt, r², rt, -t²)` at columns `2k-1..=2k+2`, odd row `2k+1` holds
/// `(-t², -tr, r², -rt)` at `2k-1..=2k+2`.
pub fn s_rows(t: f64, n: usize) -> Dense {
    let r = (1.0 - t * t).sqrt();
    let mut s = zeros(n, n);
    let at = |i: usize, off: i64| ((i as i64 + off).rem_euclid(n as i64)) as usize;
    for k in (0..n).step_by(2) {
        for (off, v) in [(-1, r * t), (0, r * r), (1, r * t), (2, -t * t)] {
            s[k][at(k, off)] += c(v, 0.0);
        }
        let o = k + 1;
        for (off, v) in [(-2, -t * t), (-1, -t * r), (0, r * r), (1, -r * t)] {
            s[o][at(o, off)] += c(v, 0.0);
        }
    }
    s
}

pub fn scale_rows(a: &Dense, thetas: &[f64]) -> Dense {
    a.iter()
        .zip(thetas)
        .map(|(row, &th)| row.iter().map(|&x| C64::from_polar(1.0, -th) * x).collect())
        .collect()
}

/// Deterministic pseudo-random phases for oracle inputs.
pub fn phases(n: usize, seed: u64) -> Vec<f64> {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * std::f64::consts::PI - std::f64::consts::PI
        })
        .collect()
}
