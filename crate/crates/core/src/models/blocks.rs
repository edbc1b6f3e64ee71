//! Monodromy operators `U = U_o U_e` assembled from 2×2 scattering blocks,
//! and the band-1d model built from them.

use serde::{Deserialize, Serialize};

use crate::band::{ComplexBandMatrix, SiteLabel, UNITARITY_TOL};
use crate::error::{Error, Result};
use crate::C64;

pub type Block = [[C64; 2]; 2];

/// `S_k = e^{-iθ}[[r e^{-iα}, i t e^{iγ}], [i t e^{-iγ}, r e^{iα}]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockScattering {
    pub r: f64,
    pub t: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub theta: f64,
}

impl BlockScattering {
    pub fn new(r: f64, t: f64, alpha: f64, gamma: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) || !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid("block", format!("r = {r}, t = {t} must lie in [0, 1]")));
        }
        if (r * r + t * t - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("block", format!("r² + t² = {} ≠ 1", r * r + t * t)));
        }
        Ok(Self { r, t, alpha, gamma, theta })
    }

    pub fn matrix(&self) -> Block {
        let ph = C64::from_polar(1.0, -self.theta);
        let i = C64::new(0.0, 1.0);
        [
            [
                ph * C64::from_polar(self.r, -self.alpha),
                ph * i * C64::from_polar(self.t, self.gamma),
            ],
            [
                ph * i * C64::from_polar(self.t, -self.gamma),
                ph * C64::from_polar(self.r, self.alpha),
            ],
        ]
    }
}

/// How the ends of the chain are closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    /// Wrap block `S_N` couples sites `N-1` and `0`; needs even `N`.
    #[default]
    Periodic,
    /// Open chain: the uncovered end indices carry the scalar 1.
    Reflecting,
}

/// Places `S_k` on rows and columns `(k-1, k)`: odd `k` in `U_o`, even `k`
/// in `U_e`. Without wrap, index 0 of `U_e` holds `s0` and any dangling last
/// index holds 1. With wrap, `blocks[n-1]` couples `n-1` and `0` in `U_e`.
fn assemble(blocks: &[Block], s0: C64, wrap: bool, n: usize) -> Result<ComplexBandMatrix> {
    let need = if wrap { n } else { n - 1 };
    if blocks.len() < need {
        return Err(Error::invalid(
            "blocks",
            format!("{} blocks given, {need} needed for dimension {n}", blocks.len()),
        ));
    }
    let one = C64::new(1.0, 0.0);
    let mut uo = Vec::with_capacity(2 * n);
    let mut ue = Vec::with_capacity(2 * n);
    let mut covered_o = vec![false; n];
    let mut covered_e = vec![false; n];
    for k in 1..=need {
        let (a, b) = (k - 1, k % n);
        let s = &blocks[k - 1];
        let (dst, cov) = if k % 2 == 1 {
            (&mut uo, &mut covered_o)
        } else {
            (&mut ue, &mut covered_e)
        };
        dst.push((a, a, s[0][0]));
        dst.push((a, b, s[0][1]));
        dst.push((b, a, s[1][0]));
        dst.push((b, b, s[1][1]));
        cov[a] = true;
        cov[b] = true;
    }
    if !covered_e[0] {
        ue.push((0, 0, s0));
        covered_e[0] = true;
    }
    for i in 0..n {
        if !covered_o[i] {
            uo.push((i, i, one));
        }
        if !covered_e[i] {
            ue.push((i, i, one));
        }
    }
    let uo = ComplexBandMatrix::from_triplets(n, wrap, &uo)?;
    let ue = ComplexBandMatrix::from_triplets(n, wrap, &ue)?;
    uo.mul(&ue)
}

/// Monodromy operator `U = U_o U_e` from scattering blocks `S_1, S_2, ...`.
///
/// With `half_line` the top index of `U_e` is the 1×1 block
/// `s0 = e^{-i s0_phase}` and the chain is open; otherwise the chain is
/// closed periodically, which needs even `n` and `n` blocks.
pub fn build_block_unitary(
    blocks: &[BlockScattering],
    s0_phase: f64,
    half_line: bool,
    n: usize,
) -> Result<ComplexBandMatrix> {
    if n < 3 {
        return Err(Error::invalid("n", format!("dimension {n} is below 3")));
    }
    if !half_line && n % 2 == 1 {
        return Err(Error::invalid("n", "periodic closure needs an even dimension"));
    }
    let mats: Vec<Block> = blocks.iter().map(BlockScattering::matrix).collect();
    let u = assemble(&mats, C64::from_polar(1.0, -s0_phase), !half_line, n)?;
    u.with_labels((0..n as i64).map(SiteLabel::index).collect())?
        .mark_unitary(UNITARITY_TOL)
}

/// Diagonal `Φ = diag(e^{iφ_j})` with `φ_0 = 0`, `φ_k = φ_{k-1} + γ_k`.
///
/// For the half-line operator `Φ U(γ) Φ*` equals the operator with every
/// `γ_k = 0`: conjugation multiplies entry `(k-1, k)` by `e^{-iγ_k}` and
/// entry `(k, k-1)` by `e^{iγ_k}`, which is exactly the phase carried by the
/// off-diagonal of `S_k`.
pub fn gamma_gauge(blocks: &[BlockScattering], n: usize) -> Vec<C64> {
    let mut phi = 0.0;
    let mut out = Vec::with_capacity(n);
    out.push(C64::new(1.0, 0.0));
    for k in 1..n {
        phi += blocks.get(k - 1).map_or(0.0, |b| b.gamma);
        out.push(C64::from_polar(1.0, phi));
    }
    out
}

fn check_t(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid("t", format!("{t} is not in [0, 1]")));
    }
    Ok((1.0 - t * t).max(0.0).sqrt())
}

/// Blocks reproducing the free operator `S(t)`: `[[r, t], [-t, r]]` for odd
/// `k` and `[[r, -t], [t, r]]` for even `k`, with exactly real entries.
fn free_blocks(t: f64, count: usize) -> Result<Vec<Block>> {
    let r = check_t(t)?;
    let c = |x: f64| C64::new(x, 0.0);
    Ok((1..=count)
        .map(|k| {
            if k % 2 == 1 {
                [[c(r), c(t)], [c(-t), c(r)]]
            } else {
                [[c(r), c(-t)], [c(t), c(r)]]
            }
        })
        .collect())
}

/// Offset of the lattice origin in a chain of length `n`; it is even so
/// that the 2-periodicity of `S` is aligned with even labels.
pub fn origin(n: usize) -> usize {
    2 * (n / 4)
}

/// The free band unitary `S(t)` on `n` sites.
///
/// In the interior, even rows read `(rt, r², rt, -t²)` at columns
/// `2k-1..=2k+2` and odd rows read `(-t², -tr, r², -rt)` at `2k-1..=2k+2`.
pub fn band_s(t: f64, n: usize, closure: Closure) -> Result<ComplexBandMatrix> {
    if n < 3 {
        return Err(Error::invalid("n", format!("dimension {n} is below 3")));
    }
    let wrap = closure == Closure::Periodic;
    if wrap && (n % 2 == 1 || n < 4) {
        return Err(Error::invalid("n", "periodic closure needs an even dimension of at least 4"));
    }
    let blocks = free_blocks(t, n)?;
    assemble(&blocks, C64::new(1.0, 0.0), wrap, n)
}

fn phase_diag(thetas: &[f64]) -> Vec<C64> {
    thetas.iter().map(|&th| C64::from_polar(1.0, -th)).collect()
}

/// `U_ω = D_ω S(t)` on a chain of `thetas.len()` sites, labelled from the
/// origin given by [`origin`].
pub fn build_band_1d(t: f64, thetas: &[f64], closure: Closure) -> Result<ComplexBandMatrix> {
    let n = thetas.len();
    let s = band_s(t, n, closure)?;
    let o = origin(n) as i64;
    s.scale_rows(&phase_diag(thetas))?
        .with_labels((0..n as i64).map(|k| SiteLabel::index(k - o)).collect())?
        .mark_unitary(UNITARITY_TOL)
}

/// Half-line magnetic-ring operator `U_ω = D_ω S` with the boundary block
/// `s0 = 1`; labels count from the boundary.
pub fn build_halfline(t: f64, thetas: &[f64]) -> Result<ComplexBandMatrix> {
    let n = thetas.len();
    let s = band_s(t, n, Closure::Reflecting)?;
    s.scale_rows(&phase_diag(thetas))?
        .with_labels((0..n as i64).map(SiteLabel::index).collect())?
        .mark_unitary(UNITARITY_TOL)
}
