//! Unitary Anderson model `U_ω = D_ω S_d(t)` on a periodic box.

use crate::band::{ComplexBandMatrix, SiteLabel, UNITARITY_TOL};
use crate::error::{Error, Result};
use crate::models::blocks::{band_s, origin, Closure};
use crate::C64;

/// Lattice coordinates of flat index `i` (row-major, first axis slowest).
pub fn coords(i: usize, d: usize, l: usize) -> Vec<usize> {
    let mut c = vec![0; d];
    let mut r = i;
    for a in (0..d).rev() {
        c[a] = r % l;
        r /= l;
    }
    c
}

fn check(d: usize, l: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be at least 1"));
    }
    if l % 2 == 1 || l < 4 {
        return Err(Error::invalid("l", format!("box side {l} must be even and at least 4")));
    }
    l.checked_pow(d as u32)
        .ok_or_else(|| Error::invalid("l", "box volume overflows"))
}

/// Labels `coords - origin` on every axis.
pub fn box_labels(d: usize, l: usize) -> Result<Vec<SiteLabel>> {
    let n = check(d, l)?;
    let o = origin(l) as i64;
    Ok((0..n)
        .map(|i| SiteLabel::lattice(coords(i, d, l).into_iter().map(|c| c as i64 - o).collect()))
        .collect())
}

/// `S_d(t) = S(t)^{⊗d}` with periodic `S(t)` on each axis of the box.
pub fn sd_matrix(t: f64, d: usize, l: usize) -> Result<ComplexBandMatrix> {
    let n = check(d, l)?;
    let s = band_s(t, l, Closure::Periodic)?;
    let rows: Vec<Vec<(usize, C64)>> = (0..l).map(|i| s.row(i).filter(|e| e.1 != C64::new(0.0, 0.0)).collect()).collect();
    let mut trip = Vec::new();
    for i in 0..n {
        let c = coords(i, d, l);
        // Partial products over the leading axes: (flat column prefix, value).
        let mut acc: Vec<(usize, C64)> = vec![(0, C64::new(1.0, 0.0))];
        for (a, &ca) in c.iter().enumerate() {
            let mut next = Vec::with_capacity(acc.len() * rows[ca].len());
            for &(prefix, v) in &acc {
                for &(j, w) in &rows[ca] {
                    next.push((prefix * l + j, if a == 0 { w } else { v * w }));
                }
            }
            acc = next;
        }
        trip.extend(acc.into_iter().map(|(j, v)| (i, j, v)));
    }
    ComplexBandMatrix::from_triplets(n, true, &trip)
}

/// `U_ω = D_ω S_d(t)` with phases given in flat index order.
pub fn build_anderson_d(t: f64, d: usize, l: usize, thetas: &[f64]) -> Result<ComplexBandMatrix> {
    let n = check(d, l)?;
    if thetas.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: thetas.len() });
    }
    let s = sd_matrix(t, d, l)?;
    let dg: Vec<C64> = thetas.iter().map(|&th| C64::from_polar(1.0, -th)).collect();
    s.scale_rows(&dg)?
        .with_labels(box_labels(d, l)?)?
        .mark_unitary(UNITARITY_TOL)
}
