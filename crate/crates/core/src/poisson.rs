//! Functional calculus through the Poisson integral at radius `r < 1`.
//!
//! For unitary `U` and `w = r e^{iθ}`,
//! `(1 - r²)/2π ∫ (U - w)^{-1} (U^{-1} - w̄)^{-1} f(e^{iθ}) dθ`
//! tends to `f(U)` as `r → 1`. The integrand is `R R*` with `R = (U - w)^{-1}`.

use crate::band::ComplexBandMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::solve::BandLu;
use crate::spectral::eig_finite;
use crate::{C64, TAU};

/// Smallest admissible number of θ-samples at radius `r`: the Poisson kernel
/// has width of order `1 - r`, so the grid must resolve it.
pub fn min_grid(r: f64) -> usize {
    (64.0 / (1.0 - r)).ceil() as usize
}

/// Samples `f` at `e^{2πij/m}`, `j = 0..m`.
pub fn sample_on_grid(m: usize, f: impl Fn(C64) -> C64) -> Vec<C64> {
    (0..m)
        .map(|j| f(C64::from_polar(1.0, TAU * j as f64 / m as f64)))
        .collect()
}

fn check_radius(r: f64, grid: usize) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid("r", format!("{r} is not in (0, 1)")));
    }
    let need = min_grid(r);
    if grid < need {
        return Err(Error::invalid(
            "grid",
            format!("{grid} points are too coarse at r = {r}; need at least {need}"),
        ));
    }
    Ok(())
}

/// Trapezoidal Poisson approximation of `f(M)` from samples of `f` on the
/// uniform grid `θ_j = 2πj/m`.
///
/// `R_j R_j*` shares the eigenvectors of `M`, so the quadrature sum is
/// evaluated eigenvalue by eigenvalue and assembled once.
pub fn poisson_fc(m: &ComplexBandMatrix, f: &[C64], r: f64) -> Result<DenseMatrix> {
    let grid = f.len();
    check_radius(r, grid)?;
    let eig = eig_finite(m)?;
    let w: Vec<C64> = (0..grid)
        .map(|j| C64::from_polar(r, TAU * j as f64 / grid as f64))
        .collect();
    let scale = (1.0 - r * r) / grid as f64;
    let weights: Vec<C64> = eig
        .values
        .iter()
        .map(|&lam| {
            let mut acc = C64::new(0.0, 0.0);
            for (fj, wj) in f.iter().zip(&w) {
                acc += fj / (lam - wj).norm_sqr();
            }
            acc * scale
        })
        .collect();
    let n = m.dim();
    let v = &eig.vectors;
    let mut out = DenseMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (k, wk) in weights.iter().enumerate() {
                acc += v[(a, k)] * wk * v[(b, k)].conj();
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// `(1 - r²)/m Σ_j ⟨φ, R_j R_j* φ⟩`, which should reproduce `‖φ‖²`.
///
/// Computed with band solves, independently of `poisson_fc`.
pub fn poisson_normalization(m: &ComplexBandMatrix, phi: &[C64], r: f64, grid: usize) -> Result<f64> {
    check_radius(r, grid)?;
    if phi.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: phi.len(),
        });
    }
    let adj = m.adjoint();
    let mut acc = 0.0;
    for j in 0..grid {
        let w = C64::from_polar(r, TAU * j as f64 / grid as f64);
        let lu = BandLu::factor(&adj, w.conj())?;
        let y = lu.solve(phi)?;
        acc += y.iter().map(|x| x.norm_sqr()).sum::<f64>();
    }
    Ok(acc * (1.0 - r * r) / grid as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rule() {
        let m = ComplexBandMatrix::identity(2).unwrap().mark_unitary(1e-12).unwrap();
        let f = vec![C64::new(1.0, 0.0); 100];
        assert!(poisson_fc(&m, &f, 0.9).is_err());
        assert!(poisson_fc(&m, &f, 1.0).is_err());
        let f = vec![C64::new(1.0, 0.0); min_grid(0.9)];
        let p = poisson_fc(&m, &f, 0.9).unwrap();
        assert!(p.max_abs_diff(&DenseMatrix::identity(2)) < 1e-12);
    }
}
