//! Coined quantum walks on a ring of `N` positions.
//!
//! Basis index `2n + s` holds position `n` with spin `s` (0 = up, 1 = down).
//! One step applies the coin at every position, then moves spin up one
//! position to the right and spin down one to the left.

use crate::band::{ComplexBandMatrix, SiteLabel, Spin, UNITARITY_TOL};
use crate::disorder::{sample_phases, PhaseDistribution};
use crate::error::{Error, Result};
use crate::C64;

pub type Coin = [[C64; 2]; 2];

pub fn coin_residual(c: &Coin) -> f64 {
    let mut r: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let g: C64 = (0..2).map(|k| c[k][a].conj() * c[k][b]).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            r = r.max((g - want).norm());
        }
    }
    r
}

/// `[[e^{-iω↑} t, -e^{-iω↑} r], [e^{-iω↓} r, e^{-iω↓} t]]`.
pub fn phase_coin(t: f64, w_up: f64, w_down: f64) -> Coin {
    let r = (1.0 - t * t).max(0.0).sqrt();
    let u = C64::from_polar(1.0, -w_up);
    let d = C64::from_polar(1.0, -w_down);
    [[u * t, -u * r], [d * r, d * t]]
}

/// Origin position in a ring of `n` positions.
pub fn walk_origin(n: usize) -> usize {
    n / 2
}

pub fn walk_labels(n: usize) -> Vec<SiteLabel> {
    let o = walk_origin(n) as i64;
    (0..n as i64)
        .flat_map(|p| [SiteLabel::walk(p - o, Spin::Up), SiteLabel::walk(p - o, Spin::Down)])
        .collect()
}

/// One-step operator for per-position coins, periodic in position.
///
/// Column `(k, τ)` sends `C_k[↑][τ]` to `(k+1, ↑)` and `C_k[↓][τ]` to
/// `(k-1, ↓)`.
pub fn build_qw(coins: &[Coin]) -> Result<ComplexBandMatrix> {
    let n = coins.len();
    if n < 3 {
        return Err(Error::invalid("n", format!("{n} positions; need at least 3")));
    }
    for (k, c) in coins.iter().enumerate() {
        let r = coin_residual(c);
        if r > 1e-12 {
            return Err(Error::invalid(format!("coins[{k}]"), format!("not unitary (residual {r:e})")));
        }
    }
    let mut trip = Vec::with_capacity(4 * n);
    for (k, c) in coins.iter().enumerate() {
        let right = (k + 1) % n;
        let left = (k + n - 1) % n;
        for tau in 0..2 {
            trip.push((2 * right, 2 * k + tau, c[0][tau]));
            trip.push((2 * left + 1, 2 * k + tau, c[1][tau]));
        }
    }
    ComplexBandMatrix::from_triplets(2 * n, true, &trip)?
        .with_labels(walk_labels(n))?
        .mark_unitary(UNITARITY_TOL)
}

/// Coins `phase_coin(t, ω↑_k, ω↓_k)` with i.i.d. phases; `ω↑_k` is drawn
/// for label `(k, ↑)` and `ω↓_k` for `(k, ↓)`.
pub fn random_coins(
    t: f64,
    dist: &PhaseDistribution,
    master_seed: u64,
    realization_index: u64,
    n: usize,
) -> Result<Vec<Coin>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid("t", format!("{t} is not in [0, 1]")));
    }
    let ph = sample_phases(dist, master_seed, realization_index, &walk_labels(n))?.phases;
    Ok(coins_from_phases(t, &ph))
}

/// Coins from interleaved phases `(ω↑_0, ω↓_0, ω↑_1, ...)`.
pub fn coins_from_phases(t: f64, phases: &[f64]) -> Vec<Coin> {
    phases
        .chunks_exact(2)
        .map(|w| phase_coin(t, w[0], w[1]))
        .collect()
}
