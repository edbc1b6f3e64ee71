//! Shifted band solves: LU with partial pivoting restricted to the band.

use crate::band::ComplexBandMatrix;
use crate::error::{Error, Result};
use crate::C64;

/// `|z| = 1` is rejected when `||z| - 1|` is at most this.
pub const CIRCLE_TOL: f64 = 1e-15;

pub fn check_off_circle(z: C64) -> Result<()> {
    let m = z.norm();
    if !m.is_finite() || (m - 1.0).abs() <= CIRCLE_TOL {
        return Err(Error::OnUnitCircle(m));
    }
    Ok(())
}

/// LU factorization of a band matrix with row pivoting, in the layout of
/// LAPACK's `gbtrf`: pivoting widens the upper band from `ku` to `kl + ku`.
///
/// Periodic matrices are reordered first by interleaving the two halves of
/// the ring (`0, n-1, 1, n-2, ...`), which turns wrap entries into a plain
/// band of at most twice the width.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    order: Option<Vec<usize>>,
    work: Vec<C64>,
    lmul: Vec<C64>,
    piv: Vec<usize>,
}

fn folded_order(n: usize) -> Vec<usize> {
    let h = n.div_ceil(2);
    let mut order = vec![0; n];
    for i in 0..n {
        let p = if i < h { 2 * i } else { 2 * (n - 1 - i) + 1 };
        order[p] = i;
    }
    order
}

impl BandLu {
    /// Factors `M - z I`.
    pub fn factor(m: &ComplexBandMatrix, z: C64) -> Result<Self> {
        let n = m.dim();
        let wraps = m.is_periodic() && m.lower_bw() + m.upper_bw() + 1 < n;
        let order = wraps.then(|| folded_order(n));
        let pos: Option<Vec<usize>> = order.as_ref().map(|o| {
            let mut p = vec![0; n];
            for (a, &i) in o.iter().enumerate() {
                p[i] = a;
            }
            p
        });
        let at = |i: usize| pos.as_ref().map_or(i, |p| p[i]);

        let mut entries = Vec::with_capacity(n * (m.lower_bw() + m.upper_bw() + 1));
        let (mut kl, mut ku) = (0usize, 0usize);
        for i in 0..n {
            let a = at(i);
            for (j, v) in m.row(i) {
                let v = if i == j { v - z } else { v };
                if v == C64::new(0.0, 0.0) && i != j {
                    continue;
                }
                let c = at(j);
                if c < a {
                    kl = kl.max(a - c);
                } else {
                    ku = ku.max(c - a);
                }
                entries.push((a, c, v));
            }
        }
        let w = 2 * kl + ku + 1;
        let mut work = vec![C64::new(0.0, 0.0); n * w];
        for (a, c, v) in entries {
            work[a * w + c + kl - a] += v;
        }

        let idx = |a: usize, c: usize| a * w + c + kl - a;
        let mut lmul = vec![C64::new(0.0, 0.0); n * kl];
        let mut piv = vec![0usize; n];
        for c in 0..n {
            let amax = (n - 1).min(c + kl);
            let mut p = c;
            let mut best = work[idx(c, c)].norm();
            for a in c + 1..=amax {
                let x = work[idx(a, c)].norm();
                if x > best {
                    best = x;
                    p = a;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(c));
            }
            piv[c] = p;
            let cmax = (n - 1).min(c + kl + ku);
            if p != c {
                for col in c..=cmax {
                    work.swap(idx(c, col), idx(p, col));
                }
            }
            let pivot = work[idx(c, c)];
            for a in c + 1..=amax {
                let f = work[idx(a, c)] / pivot;
                lmul[c * kl + (a - c - 1)] = f;
                work[idx(a, c)] = C64::new(0.0, 0.0);
                if f != C64::new(0.0, 0.0) {
                    for col in c + 1..=cmax {
                        let u = work[idx(c, col)];
                        work[idx(a, col)] -= f * u;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            order,
            work,
            lmul,
            piv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `(M - z) x = b`.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let w = 2 * kl + ku + 1;
        let mut y: Vec<C64> = match &self.order {
            Some(o) => o.iter().map(|&i| b[i]).collect(),
            None => b.to_vec(),
        };
        for c in 0..n {
            let p = self.piv[c];
            if p != c {
                y.swap(c, p);
            }
            let yc = y[c];
            if yc == C64::new(0.0, 0.0) {
                continue;
            }
            for a in c + 1..=(n - 1).min(c + kl) {
                y[a] -= self.lmul[c * kl + (a - c - 1)] * yc;
            }
        }
        for c in (0..n).rev() {
            let row = &self.work[c * w..(c + 1) * w];
            let mut s = y[c];
            for col in c + 1..=(n - 1).min(c + kl + ku) {
                s -= row[col + kl - c] * y[col];
            }
            y[c] = s / row[kl];
        }
        Ok(match &self.order {
            Some(o) => {
                let mut x = vec![C64::new(0.0, 0.0); n];
                for (a, &i) in o.iter().enumerate() {
                    x[i] = y[a];
                }
                x
            }
            None => y,
        })
    }
}

/// Column `l` of `(M - z)^{-1}`, so that `G(k, l; z) = g[k]`.
pub fn resolvent_column(m: &ComplexBandMatrix, z: C64, l: usize) -> Result<Vec<C64>> {
    check_off_circle(z)?;
    if l >= m.dim() {
        return Err(Error::IndexOutOfRange { index: l, dim: m.dim() });
    }
    let lu = BandLu::factor(m, z)?;
    let mut e = vec![C64::new(0.0, 0.0); m.dim()];
    e[l] = C64::new(1.0, 0.0);
    lu.solve(&e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Gaussian elimination with full pivoting on a dense copy.
    fn dense_solve(a: &crate::DenseMatrix, b: &[C64]) -> Vec<C64> {
        let n = b.len();
        let mut m: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
        let mut y = b.to_vec();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm())).unwrap();
            m.swap(k, p);
            y.swap(k, p);
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    let u = m[k][j];
                    m[i][j] -= f * u;
                }
                let yk = y[k];
                y[i] -= f * yk;
            }
        }
        let mut x = vec![c(0.0, 0.0); n];
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..n {
                s -= m[k][j] * x[j];
            }
            x[k] = s / m[k][k];
        }
        x
    }

    fn pseudo(i: usize) -> f64 {
        ((i as f64 * 12.9898).sin() * 43758.5453).fract()
    }

    fn random_band(n: usize, kl: usize, ku: usize, periodic: bool) -> ComplexBandMatrix {
        let mut trip = Vec::new();
        for i in 0..n {
            for o in -(kl as i64)..=(ku as i64) {
                let j = i as i64 + o;
                let j = if periodic {
                    j.rem_euclid(n as i64)
                } else if j < 0 || j >= n as i64 {
                    continue;
                } else {
                    j
                } as usize;
                let s = i * 31 + (o + 7) as usize;
                trip.push((i, j, c(pseudo(s), pseudo(s + 1000))));
            }
        }
        ComplexBandMatrix::from_triplets(n, periodic, &trip).unwrap()
    }

    #[test]
    fn matches_dense_solve() {
        for &(n, kl, ku, per) in &[(10, 2, 1, false), (12, 2, 2, true), (7, 1, 3, true), (5, 3, 3, true)] {
            let m = random_band(n, kl, ku, per);
            let z = c(0.3, -0.2);
            let lu = BandLu::factor(&m, z).unwrap();
            let b: Vec<C64> = (0..n).map(|i| c(pseudo(i + 77), pseudo(i + 99))).collect();
            let x = lu.solve(&b).unwrap();
            let oracle = dense_solve(&m.shifted(z).to_dense(), &b);
            for (a, o) in x.iter().zip(&oracle) {
                assert!((a - o).norm() < 1e-10, "{n} {kl} {ku} {per}");
            }
        }
    }

    #[test]
    fn diagonal_resolvent() {
        let th = [0.1, 0.7, -2.0, 3.0];
        let d: Vec<C64> = th.iter().map(|&t| C64::from_polar(1.0, -t)).collect();
        let m = ComplexBandMatrix::diagonal(&d).unwrap();
        let z = c(0.5, 0.5);
        for l in 0..4 {
            let g = resolvent_column(&m, z, l).unwrap();
            for k in 0..4 {
                let want = if k == l { 1.0 / (d[l] - z) } else { c(0.0, 0.0) };
                assert!((g[k] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_unit_circle() {
        let m = ComplexBandMatrix::identity(3).unwrap();
        assert!(matches!(
            resolvent_column(&m, C64::from_polar(1.0, 0.4), 0),
            Err(Error::OnUnitCircle(_))
        ));
    }

    #[test]
    fn singular_reported() {
        let m = ComplexBandMatrix::identity(3).unwrap();
        assert!(matches!(BandLu::factor(&m, c(1.0, 0.0)), Err(Error::Singular(_))));
    }
}
