//! CMV matrices of Verblunsky coefficients and their gauge to `-U`.

use std::collections::VecDeque;

use crate::band::{ComplexBandMatrix, SiteLabel, UNITARITY_TOL};
use crate::disorder::{sample_phases, PhaseDistribution};
use crate::error::{Error, Result};
use crate::C64;

/// `Θ_k = [[ᾱ_k, ρ_k], [ρ_k, -α_k]]`, `ρ_k = √(1 - |α_k|²)`.
fn theta(a: C64) -> [[C64; 2]; 2] {
    let rho = C64::new((1.0 - a.norm_sqr()).max(0.0).sqrt(), 0.0);
    [[a.conj(), rho], [rho, -a]]
}

#[derive(Clone, Debug)]
pub struct CmvMatrix {
    pub matrix: ComplexBandMatrix,
    /// The last coefficient was replaced by one of modulus 1.
    pub closed: bool,
    /// Unitarity residual of the stored corner; nonzero only at the boundary.
    pub boundary_defect: f64,
}

/// Top-left `N×N` corner of `C = L M`, `N = alphas.len()`, where
/// `L = Θ_0 ⊕ Θ_2 ⊕ ...` and `M = 1 ⊕ Θ_1 ⊕ Θ_3 ⊕ ...`.
///
/// The corner only involves `α_0..α_{N-1}`. With `close`, `α_{N-1}` is
/// replaced by `α_{N-1}/|α_{N-1}|` (1 if it vanishes): its `ρ` is then zero,
/// the truncated blocks decouple and the corner is exactly unitary.
pub fn build_cmv(alphas: &[C64], close: bool) -> Result<CmvMatrix> {
    let n = alphas.len();
    if n < 2 {
        return Err(Error::invalid("n", "CMV corner needs at least 2 coefficients"));
    }
    for (k, a) in alphas.iter().enumerate() {
        if !(a.norm() < 1.0) {
            return Err(Error::invalid(
                format!("verblunsky[{k}]"),
                format!("|α| = {} is not below 1", a.norm()),
            ));
        }
    }
    let mut al = alphas.to_vec();
    if close {
        let a = al[n - 1];
        al[n - 1] = if a.norm() > 0.0 { a / a.norm() } else { C64::new(1.0, 0.0) };
    }
    let mut lt = Vec::with_capacity(2 * n);
    let mut mt = vec![(0, 0, C64::new(1.0, 0.0))];
    for (k, &a) in al.iter().enumerate() {
        let th = theta(a);
        let dst = if k % 2 == 0 { &mut lt } else { &mut mt };
        for i in 0..2 {
            for j in 0..2 {
                if k + i < n && k + j < n {
                    dst.push((k + i, k + j, th[i][j]));
                }
            }
        }
    }
    let l = ComplexBandMatrix::from_triplets(n, false, &lt)?;
    let m = ComplexBandMatrix::from_triplets(n, false, &mt)?;
    let c = l
        .mul(&m)?
        .with_labels((0..n as i64).map(SiteLabel::index).collect())?;
    let defect = c.unitarity_residual();
    let matrix = if close { c.mark_unitary(UNITARITY_TOL)? } else { c };
    Ok(CmvMatrix {
        matrix,
        closed: close,
        boundary_defect: defect,
    })
}

/// `α_k = r e^{iη_k}` with `η_k = θ_0 + ... + θ_k`.
pub fn verblunsky_from_phases(r: f64, thetas: &[f64]) -> Vec<C64> {
    let mut eta = 0.0;
    thetas
        .iter()
        .map(|&th| {
            eta += th;
            C64::from_polar(r, eta)
        })
        .collect()
}

/// Constant-modulus random coefficients; also returns the i.i.d. increments.
pub fn random_verblunsky(
    r: f64,
    dist: &PhaseDistribution,
    master_seed: u64,
    realization_index: u64,
    n: usize,
) -> Result<(Vec<C64>, Vec<f64>)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid("r", format!("{r} is not in (0, 1)")));
    }
    let labels: Vec<SiteLabel> = (0..n as i64).map(SiteLabel::index).collect();
    let th = sample_phases(dist, master_seed, realization_index, &labels)?.phases;
    Ok((verblunsky_from_phases(r, &th), th))
}

/// Diagonal unitary `Λ` with `Λ C Λ* = -U` on interior rows.
#[derive(Clone, Debug)]
pub struct Gauge {
    pub lambda: Vec<C64>,
    /// `max |(Λ C Λ* + U)_{ij}|` over rows `1..=N-3`.
    pub interior_error: f64,
}

/// Finds the diagonal gauge taking a CMV corner to minus a half-line
/// monodromy operator built with the same phases.
///
/// Row 0 and the last two rows are excluded: the first differs by the
/// boundary block, the last ones by the truncation. The phases follow from
/// `λ_i C_ij λ̄_j = -U_ij` along the nonzero pattern of the interior rows,
/// starting from `λ_1 = 1`. The last index never appears in an interior
/// equation and is set to 1.
pub fn gauge_cmv_to_monodromy(c: &ComplexBandMatrix, u: &ComplexBandMatrix) -> Result<Gauge> {
    let n = c.dim();
    if u.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.dim() });
    }
    if n < 4 {
        return Err(Error::invalid("n", "gauge needs dimension at least 4"));
    }
    const TINY: f64 = 1e-14;
    let interior = 1..=n - 3;
    let mut edges: Vec<Vec<(usize, C64, C64, bool)>> = vec![Vec::new(); n];
    for i in interior.clone() {
        let mut cols: Vec<usize> = c.row(i).map(|e| e.0).chain(u.row(i).map(|e| e.0)).collect();
        cols.sort_unstable();
        cols.dedup();
        for j in cols {
            let (cij, uij) = (c.get(i, j), u.get(i, j));
            if (cij.norm() - uij.norm()).abs() > 1e-8 {
                return Err(Error::Mismatch(format!(
                    "entry ({i}, {j}) has |C| = {} but |U| = {}; parameters do not match",
                    cij.norm(),
                    uij.norm()
                )));
            }
            if cij.norm() > TINY && j != i {
                edges[i].push((j, cij, uij, true));
                edges[j].push((i, cij, uij, false));
            }
        }
    }
    let mut lambda = vec![C64::new(0.0, 0.0); n];
    let mut seen = vec![false; n];
    lambda[1] = C64::new(1.0, 0.0);
    seen[1] = true;
    let mut queue = VecDeque::from([1usize]);
    while let Some(a) = queue.pop_front() {
        for &(b, cij, uij, forward) in &edges[a] {
            if seen[b] {
                continue;
            }
            // forward: a = i, b = j. Otherwise a = j, b = i.
            let v = if forward {
                (-uij / (lambda[a] * cij)).conj()
            } else {
                -uij * lambda[a] / cij
            };
            lambda[b] = v / v.norm();
            seen[b] = true;
            queue.push_back(b);
        }
    }
    for (l, s) in lambda.iter_mut().zip(&seen) {
        if !s {
            *l = C64::new(1.0, 0.0);
        }
    }
    let mut err: f64 = 0.0;
    for i in interior {
        for (j, cij) in c.row(i) {
            err = err.max((lambda[i] * cij * lambda[j].conj() + u.get(i, j)).norm());
        }
        for (j, uij) in u.row(i) {
            err = err.max((lambda[i] * c.get(i, j) * lambda[j].conj() + uij).norm());
        }
    }
    if err > 1e-8 {
        return Err(Error::Mismatch(format!(
            "no diagonal gauge matches the interior rows (error {err:e}); phases differ"
        )));
    }
    Ok(Gauge {
        lambda,
        interior_error: err,
    })
}
