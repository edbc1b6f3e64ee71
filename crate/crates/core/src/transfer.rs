//! Transfer matrices of `Uψ = zψ` on chains and walks, and Lyapunov
//! exponents.
//!
//! Band chain `U = D S`: rows `2k` and `2k+1` of `(S - w)ψ = 0`, with
//! `w_i = z e^{iθ_i}`, both involve `ψ_{2k-1}..ψ_{2k+2}`. Solving them for
//! the last two gives
//!
//! ```text
//! (ψ_{2k+1}, ψ_{2k+2}) = T_k (ψ_{2k-1}, ψ_{2k}),   T_k = -A⁻¹ B,
//! A = [[rt, -t²], [r² - w_{2k+1}, -rt]],   B = [[rt, r² - w_{2k}], [-t², -tr]],
//! ```
//!
//! and `det A = -t² w_{2k+1}`.
//!
//! Walk: with `c^n` the coin at position `n`, the rows `(n, ↑)` and
//! `(n-1, ↓)` give
//!
//! ```text
//! ψ_{2n}   = (c^{n-1}_{↑↑} ψ_{2n-2} + c^{n-1}_{↑↓} ψ_{2n-1}) / z,
//! ψ_{2n+1} = (z ψ_{2n-1} - c^n_{↓↑} ψ_{2n}) / c^n_{↓↓}.
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band::SiteLabel;
use crate::disorder::sample_phases;
use crate::error::{Error, Result};
use crate::models::walk::{coins_from_phases, walk_labels, Coin};
use crate::models::{CoinSpec, ModelSpec};
use crate::stats::{mean, BATCHES};
use crate::C64;

/// Pivots below this make `z` exceptional for the row.
pub const PIVOT_TOL: f64 = 1e-13;

/// Renormalization period of the propagated vector.
pub const RENORM_EVERY: usize = 16;

pub type Mat2 = [[C64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferStep {
    /// Chain: `k` of the row pair `(2k, 2k+1)`. Walk: position `n`.
    pub site: usize,
    pub z: C64,
    pub t: Mat2,
}

fn mat_vec(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn max_norm(v: [C64; 2]) -> f64 {
    v[0].norm().max(v[1].norm())
}

fn check_z(z: C64) -> Result<()> {
    if !z.norm().is_finite() {
        return Err(Error::invalid("z", "not finite"));
    }
    Ok(())
}

/// Transfer matrices of the band chain for phases `θ_0, θ_1, ...`; step `k`
/// uses `θ_{2k}` and `θ_{2k+1}`.
pub fn band_transfer(t: f64, phases: &[f64], z: C64) -> Result<Vec<TransferStep>> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::invalid("t", format!("{t} is degenerate for the chain recursion; need t in (0, 1]")));
    }
    check_z(z)?;
    let r = (1.0 - t * t).max(0.0).sqrt();
    let (rt, t2, r2) = (C64::new(r * t, 0.0), C64::new(t * t, 0.0), C64::new(r * r, 0.0));
    phases
        .chunks_exact(2)
        .enumerate()
        .map(|(k, th)| {
            let we = z * C64::from_polar(1.0, th[0]);
            let wo = z * C64::from_polar(1.0, th[1]);
            let det = -t2 * wo;
            if det.norm() < PIVOT_TOL {
                return Err(Error::Exceptional { row: 2 * k + 1, pivot: det.norm() });
            }
            let a = [[rt, -t2], [r2 - wo, -rt]];
            let b = [[rt, r2 - we], [-t2, -rt]];
            let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
            let mut m = [[C64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] = -(inv[i][0] * b[0][j] + inv[i][1] * b[1][j]);
                }
            }
            Ok(TransferStep { site: k, z, t: m })
        })
        .collect()
}

/// Transfer matrices of the walk; step `n` (for `n = 1..coins.len()`) maps
/// `(ψ_{2n-2}, ψ_{2n-1})` to `(ψ_{2n}, ψ_{2n+1})`.
pub fn walk_transfer(coins: &[Coin], z: C64) -> Result<Vec<TransferStep>> {
    check_z(z)?;
    if z.norm() < PIVOT_TOL {
        return Err(Error::Exceptional { row: 0, pivot: z.norm() });
    }
    (1..coins.len())
        .map(|n| {
            let (p, c) = (&coins[n - 1], &coins[n]);
            let d = c[1][1];
            if d.norm() < PIVOT_TOL {
                return Err(Error::Exceptional { row: 2 * n - 1, pivot: d.norm() });
            }
            let r0 = [p[0][0] / z, p[0][1] / z];
            let r1 = [-c[1][0] * r0[0] / d, (z - c[1][0] * r0[1]) / d];
            Ok(TransferStep { site: n, z, t: [r0, r1] })
        })
        .collect()
}

/// Applies the steps to `seed`, returning the seed and every image.
pub fn propagate(steps: &[TransferStep], seed: [C64; 2]) -> Vec<[C64; 2]> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    let mut v = seed;
    out.push(v);
    for s in steps {
        v = mat_vec(&s.t, v);
        out.push(v);
    }
    out
}

/// `ln ‖T_N ⋯ T_1 v‖_∞` accumulated with renormalization every
/// [`RENORM_EVERY`] steps, plus the increments over `batches` contiguous
/// blocks of steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Growth {
    pub log_norm: f64,
    pub batch_logs: Vec<f64>,
    pub batch_steps: Vec<usize>,
}

pub fn log_growth(steps: &[TransferStep], seed: [C64; 2], batches: usize) -> Growth {
    let n = steps.len();
    let b = batches.clamp(1, n.max(1));
    let mut v = seed;
    let n0 = max_norm(v);
    v = [v[0] / n0, v[1] / n0];
    let mut acc = n0.ln();
    let mut batch_logs = Vec::with_capacity(b);
    let mut batch_steps = Vec::with_capacity(b);
    let mut mark = acc;
    let mut next_cut = 1;
    let mut start = 0;
    for (i, s) in steps.iter().enumerate() {
        v = mat_vec(&s.t, v);
        let done = i + 1;
        let cut = next_cut * n / b;
        if done % RENORM_EVERY == 0 || done == cut || done == n {
            let m = max_norm(v);
            acc += m.ln();
            v = [v[0] / m, v[1] / m];
        }
        if done == cut {
            batch_logs.push(acc - mark);
            batch_steps.push(done - start);
            mark = acc;
            start = done;
            next_cut += 1;
        }
    }
    Growth {
        log_norm: acc,
        batch_logs,
        batch_steps,
    }
}

/// Which recursion a model uses.
enum Chain {
    Band { t: f64 },
    Walk,
}

fn chain_of(model: &ModelSpec) -> Result<Chain> {
    match model {
        ModelSpec::Band1d { t, .. } | ModelSpec::MagneticRingHalfline { t, .. } => Ok(Chain::Band { t: *t }),
        ModelSpec::AndersonD { t, d: 1, .. } => Ok(Chain::Band { t: *t }),
        ModelSpec::QuantumWalk { .. } => Ok(Chain::Walk),
        _ => Err(Error::invalid(
            "model",
            format!("{} has no one-dimensional transfer recursion", model.family()),
        )),
    }
}

/// Transfer matrices of `steps` steps for realization `realization_index`
/// of a chain or walk ensemble on the half-infinite chain. Chain phases are
/// drawn for labels `0, 1, ..., 2·steps - 1`, walk phases for positions
/// `0..=steps`.
pub fn transfer_matrices(
    model: &ModelSpec,
    master_seed: u64,
    realization_index: u64,
    z: C64,
    steps: usize,
) -> Result<Vec<TransferStep>> {
    match chain_of(model)? {
        Chain::Band { t } => {
            let dist = model.phase_distribution().expect("chain families carry phases");
            let labels: Vec<SiteLabel> = (0..2 * steps as i64).map(SiteLabel::index).collect();
            band_transfer(t, &sample_phases(dist, master_seed, realization_index, &labels)?.phases, z)
        }
        Chain::Walk => {
            let ModelSpec::QuantumWalk { coin, .. } = model else { unreachable!() };
            let coins = match coin {
                CoinSpec::Random { t, phases } => {
                    let labels = walk_labels(steps + 1);
                    coins_from_phases(*t, &sample_phases(phases, master_seed, realization_index, &labels)?.phases)
                }
                CoinSpec::Fixed { matrix } => vec![CoinSpec::fixed_coin(matrix); steps + 1],
            };
            walk_transfer(&coins, z)
        }
    }
}

/// Sites advanced by one transfer step: two chain sites or one walk position.
fn sites_per_step(model: &ModelSpec) -> Result<f64> {
    Ok(match chain_of(model)? {
        Chain::Band { .. } => 2.0,
        Chain::Walk => 1.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub z: C64,
    /// Growth rate per chain site (per position for walks).
    pub gamma: f64,
    pub stderr: f64,
    pub steps: usize,
    pub realizations: usize,
}

/// `γ(z)` averaged over realizations, each propagating the seed `(1, 0)`.
///
/// The error bar pools the per-batch rates of all realizations (each chain
/// cut into [`BATCHES`] blocks).
pub fn lyapunov(model: &ModelSpec, master_seed: u64, z: C64, steps: usize, realizations: usize) -> Result<LyapunovEstimate> {
    if steps < BATCHES {
        return Err(Error::invalid("steps", format!("{steps} is below {BATCHES}")));
    }
    if realizations == 0 {
        return Err(Error::invalid("realizations", "must be positive"));
    }
    let per = sites_per_step(model)?;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let runs: Vec<Growth> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let st = transfer_matrices(model, master_seed, r, z, steps)?;
            Ok(log_growth(&st, [one, zero], BATCHES))
        })
        .collect::<Result<_>>()?;
    let totals: Vec<f64> = runs.iter().map(|g| g.log_norm / (per * steps as f64)).collect();
    let pooled: Vec<f64> = runs
        .iter()
        .flat_map(|g| g.batch_logs.iter().zip(&g.batch_steps).map(|(l, &n)| l / (per * n as f64)))
        .collect();
    let m = mean(&pooled);
    let var = pooled.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (pooled.len() - 1) as f64;
    Ok(LyapunovEstimate {
        z,
        gamma: mean(&totals),
        stderr: (var / pooled.len() as f64).sqrt(),
        steps,
        realizations,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaScan {
    pub rows: Vec<LyapunovEstimate>,
    /// Largest `|γ_{i+1} - γ_i|` between neighbouring grid points.
    pub max_adjacent_jump: f64,
    /// Neighbours differing by more than 3 combined error bars.
    pub discontinuities: usize,
}

pub fn gamma_scan(model: &ModelSpec, master_seed: u64, zs: &[C64], steps: usize, realizations: usize) -> Result<GammaScan> {
    let rows = zs
        .iter()
        .map(|&z| lyapunov(model, master_seed, z, steps, realizations))
        .collect::<Result<Vec<_>>>()?;
    let mut jump: f64 = 0.0;
    let mut bad = 0;
    for w in rows.windows(2) {
        let d = (w[1].gamma - w[0].gamma).abs();
        jump = jump.max(d);
        if d > 3.0 * w[0].stderr.hypot(w[1].stderr) {
            bad += 1;
        }
    }
    Ok(GammaScan {
        rows,
        max_adjacent_jump: jump,
        discontinuities: bad,
    })
}
