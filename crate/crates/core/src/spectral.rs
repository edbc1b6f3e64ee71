//! Dense eigendecomposition of finite unitary matrices and spectral projectors.

use faer::Side;

use crate::arc::Arc;
use crate::band::ComplexBandMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::C64;

/// Largest dimension for which full spectra are computed.
pub const DENSE_LIMIT: usize = 4096;

/// Matrices that are not flagged unitary must pass this residual check.
const UNITARY_CHECK: f64 = 1e-10;

/// Mixing weight of the anti-Hermitian part in the auxiliary Hermitian matrix.
const MIX: f64 = 0.618_033_988_749_894_8;

/// Hermitian eigenvalues closer than this are resolved together.
const CLUSTER_GAP: f64 = 1e-6;

/// Eigenvalues and orthonormal eigenvectors (as columns).
#[derive(Clone, Debug)]
pub struct Eig {
    pub values: Vec<C64>,
    pub vectors: DenseMatrix,
}

fn check(m: &ComplexBandMatrix) -> Result<()> {
    if m.dim() > DENSE_LIMIT {
        return Err(Error::DenseLimit {
            dim: m.dim(),
            limit: DENSE_LIMIT,
        });
    }
    if !m.is_unitary() {
        let r = m.unitarity_residual();
        if !(r <= UNITARY_CHECK) {
            return Err(Error::invalid(
                "matrix",
                format!("not unitary (residual {r:e})"),
            ));
        }
    }
    Ok(())
}

/// Eigenvalues only, via the complex Schur form.
pub fn eigenvalues_finite(m: &ComplexBandMatrix) -> Result<Vec<C64>> {
    check(m)?;
    m.to_dense()
        .to_faer()
        .eigenvalues()
        .map_err(|_| Error::NoConvergence)
}

/// Full eigendecomposition with an orthonormal eigenbasis.
///
/// A unitary `M` is normal, so `(M + M*)/2` and `(M - M*)/2i` commute and
/// any real combination of them is Hermitian with the same eigenvectors.
/// The Hermitian solver returns an orthonormal basis directly. Two distinct
/// eigenvalues of `M` can still land on the same Hermitian eigenvalue; such
/// clusters are split by diagonalizing `M` compressed to the cluster.
pub fn eig_finite(m: &ComplexBandMatrix) -> Result<Eig> {
    check(m)?;
    let n = m.dim();
    let d = m.to_dense();
    let h = faer::Mat::<C64>::from_fn(n, n, |i, j| {
        let a = d[(i, j)];
        let b = d[(j, i)].conj();
        // (a + b)/2 + MIX * (a - b)/(2i)
        (a + b) * 0.5 + (a - b) * C64::new(0.0, -0.5 * MIX)
    });
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let hv: Vec<f64> = order.iter().map(|&k| s[k].re).collect();
    let mut v = DenseMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && hv[end] - hv[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            split_cluster(m, &mut v, start, end)?;
        }
        start = end;
    }

    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let col = v.column(j);
        let mc = m.matvec(&col)?;
        values.push(col.iter().zip(&mc).map(|(a, b)| a.conj() * b).sum());
    }
    Ok(Eig { values, vectors: v })
}

/// Rotates columns `start..end` of `v` into eigenvectors of `M`.
fn split_cluster(m: &ComplexBandMatrix, v: &mut DenseMatrix, start: usize, end: usize) -> Result<()> {
    let n = m.dim();
    let k = end - start;
    let cols: Vec<Vec<C64>> = (start..end).map(|j| v.column(j)).collect();
    let mcols: Vec<Vec<C64>> = cols.iter().map(|c| m.matvec(c)).collect::<Result<_>>()?;
    let kmat = faer::Mat::<C64>::from_fn(k, k, |a, b| {
        cols[a].iter().zip(&mcols[b]).map(|(x, y)| x.conj() * y).sum()
    });
    let w = kmat.eigen().map_err(|_| Error::NoConvergence)?;
    // Near-degenerate eigenvectors from a non-Hermitian solver need not be
    // orthogonal; a QR pass fixes that without spoiling the residuals.
    let q = w.U().qr().compute_thin_Q();
    for i in 0..n {
        let row: Vec<C64> = cols.iter().map(|c| c[i]).collect();
        for b in 0..k {
            let mut acc = C64::new(0.0, 0.0);
            for (a, &x) in row.iter().enumerate() {
                acc += x * q[(a, b)];
            }
            v[(i, start + b)] = acc;
        }
    }
    Ok(())
}

/// `P = Σ v v*` over eigenpairs whose argument lies in the closed arc.
pub fn projector_from_eig(eig: &Eig, arc: &Arc) -> DenseMatrix {
    let n = eig.vectors.rows();
    if arc.is_full() {
        return DenseMatrix::identity(n);
    }
    let sel: Vec<usize> = (0..eig.values.len())
        .filter(|&j| arc.contains(eig.values[j].arg(), 0.0))
        .collect();
    let mut p = DenseMatrix::zeros(n, n);
    for &j in &sel {
        let c = eig.vectors.column(j);
        for a in 0..n {
            if c[a] == C64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..n {
                p[(a, b)] += c[a] * c[b].conj();
            }
        }
    }
    p
}

/// Spectral projector of `M` onto the arc. The full circle returns the
/// identity without diagonalizing.
pub fn spectral_projector(m: &ComplexBandMatrix, arc: &Arc) -> Result<DenseMatrix> {
    if arc.is_full() {
        if m.dim() > DENSE_LIMIT {
            return Err(Error::DenseLimit {
                dim: m.dim(),
                limit: DENSE_LIMIT,
            });
        }
        return Ok(DenseMatrix::identity(m.dim()));
    }
    Ok(projector_from_eig(&eig_finite(m)?, arc))
}
