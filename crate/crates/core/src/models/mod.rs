//! The operator families and their configuration.

pub mod anderson;
pub mod arcs;
pub mod blocks;
pub mod cmv;
pub mod walk;

use serde::{Deserialize, Serialize};

use crate::band::{ComplexBandMatrix, SiteLabel};
use crate::disorder::{sample_phases, DisorderRealization, PhaseDistribution};
use crate::error::{FieldError, Result};
use crate::C64;

pub use anderson::{build_anderson_d, sd_matrix};
pub use arcs::{almost_sure_spectrum, lambda0, sd_spectrum_arcs, AlmostSureSpectrum};
pub use blocks::{band_s, build_band_1d, build_block_unitary, build_halfline, gamma_gauge, BlockScattering, Closure};
pub use cmv::{build_cmv, gauge_cmv_to_monodromy, random_verblunsky, verblunsky_from_phases, CmvMatrix, Gauge};
pub use walk::{build_qw, phase_coin, random_coins, Coin};

/// Coin of a quantum walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoinSpec {
    /// `[[e^{-iω↑} t, -e^{-iω↑} r], [e^{-iω↓} r, e^{-iω↓} t]]` with i.i.d. phases.
    Random { t: f64, phases: PhaseDistribution },
    /// The same coin at every position, rows given as `[re, im]` pairs.
    Fixed { matrix: [[[f64; 2]; 2]; 2] },
}

impl CoinSpec {
    pub fn fixed(c: Coin) -> Self {
        CoinSpec::Fixed {
            matrix: [
                [[c[0][0].re, c[0][0].im], [c[0][1].re, c[0][1].im]],
                [[c[1][0].re, c[1][0].im], [c[1][1].re, c[1][1].im]],
            ],
        }
    }

    pub(crate) fn fixed_coin(m: &[[[f64; 2]; 2]; 2]) -> Coin {
        let c = |p: [f64; 2]| C64::new(p[0], p[1]);
        [[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]]
    }
}

/// Which position operator a family carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// `|k|` for a chain.
    Index1d,
    /// Euclidean norm of lattice coordinates.
    EuclidD,
    /// `|n|` of the walker position, spin ignored.
    WalkPosition,
}

impl NormKind {
    pub fn of(&self, l: &SiteLabel) -> f64 {
        match self {
            NormKind::Index1d | NormKind::WalkPosition => l.coords[0].unsigned_abs() as f64,
            NormKind::EuclidD => l.euclid_norm(),
        }
    }
}

/// A model family with all deterministic parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum ModelSpec {
    /// Half-line monodromy operator `D_ω S` with the boundary block `s0 = 1`.
    #[serde(rename = "magnetic-ring-halfline")]
    MagneticRingHalfline { t: f64, n: usize, phases: PhaseDistribution },
    /// `D_ω S(t)` on a chain of `n` sites.
    #[serde(rename = "band-1d")]
    Band1d {
        t: f64,
        n: usize,
        #[serde(default)]
        closure: Closure,
        phases: PhaseDistribution,
    },
    /// `D_ω S(t)^{⊗d}` on the periodic box of side `l`.
    #[serde(rename = "anderson-d")]
    AndersonD {
        t: f64,
        d: usize,
        l: usize,
        phases: PhaseDistribution,
    },
    /// CMV corner with `α_k = r e^{iη_k}`, `η_k` cumulative i.i.d. phases.
    #[serde(rename = "cmv")]
    Cmv {
        r: f64,
        n: usize,
        #[serde(default = "default_true")]
        closure: bool,
        phases: PhaseDistribution,
    },
    /// Coined walk on a ring of `n` positions.
    #[serde(rename = "quantum-walk")]
    QuantumWalk { n: usize, coin: CoinSpec },
}

fn default_true() -> bool {
    true
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::MagneticRingHalfline { .. } => "magnetic-ring-halfline",
            ModelSpec::Band1d { .. } => "band-1d",
            ModelSpec::AndersonD { .. } => "anderson-d",
            ModelSpec::Cmv { .. } => "cmv",
            ModelSpec::QuantumWalk { .. } => "quantum-walk",
        }
    }

    /// Range problems, with paths relative to `prefix`.
    pub fn problems(&self, prefix: &str) -> Vec<FieldError> {
        let mut out = Vec::new();
        let mut push = |f: &str, m: String| out.push(FieldError::new(format!("{prefix}.{f}"), m));
        let check_t = |t: f64, push: &mut dyn FnMut(&str, String)| {
            if !(0.0..=1.0).contains(&t) {
                push("t", format!("{t} is not in [0, 1]"));
            }
        };
        let phases = |p: &PhaseDistribution, at: &str, push: &mut dyn FnMut(&str, String)| {
            for (f, m) in p.problems() {
                push(&format!("{at}.{f}"), m);
            }
        };
        match self {
            ModelSpec::MagneticRingHalfline { t, n, phases: p } => {
                check_t(*t, &mut push);
                if *n < 3 {
                    push("n", format!("{n} is below 3"));
                }
                phases(p, "phases", &mut push);
            }
            ModelSpec::Band1d { t, n, closure, phases: p } => {
                check_t(*t, &mut push);
                match closure {
                    Closure::Periodic if n % 2 == 1 || *n < 4 => {
                        push("n", format!("periodic closure needs an even n ≥ 4, got {n}"))
                    }
                    Closure::Reflecting if *n < 3 => push("n", format!("{n} is below 3")),
                    _ => {}
                }
                phases(p, "phases", &mut push);
            }
            ModelSpec::AndersonD { t, d, l, phases: p } => {
                check_t(*t, &mut push);
                if *d == 0 || *d > 6 {
                    push("d", format!("{d} is not in 1..=6"));
                }
                if l % 2 == 1 {
                    push("l", format!("odd box side {l} breaks the periodic closure of S"));
                } else if *l < 4 {
                    push("l", format!("{l} is below 4"));
                }
                phases(p, "phases", &mut push);
            }
            ModelSpec::Cmv { r, n, phases: p, .. } => {
                if !(*r > 0.0 && *r < 1.0) {
                    push("r", format!("{r} is not in (0, 1)"));
                }
                if *n < 4 {
                    push("n", format!("{n} is below 4"));
                }
                phases(p, "phases", &mut push);
            }
            ModelSpec::QuantumWalk { n, coin } => {
                if *n < 3 {
                    push("n", format!("{n} is below 3"));
                }
                match coin {
                    CoinSpec::Random { t, phases: p } => {
                        if !(0.0..=1.0).contains(t) {
                            push("coin.t", format!("{t} is not in [0, 1]"));
                        }
                        phases(p, "coin.phases", &mut push);
                    }
                    CoinSpec::Fixed { matrix } => {
                        let r = walk::coin_residual(&CoinSpec::fixed_coin(matrix));
                        if r > 1e-12 {
                            push("coin.matrix", format!("not unitary (residual {r:e})"));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::MagneticRingHalfline { n, .. } | ModelSpec::Band1d { n, .. } | ModelSpec::Cmv { n, .. } => *n,
            ModelSpec::AndersonD { d, l, .. } => l.pow(*d as u32),
            ModelSpec::QuantumWalk { n, .. } => 2 * n,
        }
    }

    pub fn norm_kind(&self) -> NormKind {
        match self {
            ModelSpec::AndersonD { .. } => NormKind::EuclidD,
            ModelSpec::QuantumWalk { .. } => NormKind::WalkPosition,
            _ => NormKind::Index1d,
        }
    }

    /// Hopping amplitude `t` where the family has one.
    pub fn t(&self) -> Option<f64> {
        match self {
            ModelSpec::MagneticRingHalfline { t, .. } | ModelSpec::Band1d { t, .. } | ModelSpec::AndersonD { t, .. } => Some(*t),
            ModelSpec::Cmv { r, .. } => Some((1.0 - r * r).sqrt()),
            ModelSpec::QuantumWalk { coin: CoinSpec::Random { t, .. }, .. } => Some(*t),
            ModelSpec::QuantumWalk { .. } => None,
        }
    }

    pub fn phase_distribution(&self) -> Option<&PhaseDistribution> {
        match self {
            ModelSpec::MagneticRingHalfline { phases, .. }
            | ModelSpec::Band1d { phases, .. }
            | ModelSpec::AndersonD { phases, .. }
            | ModelSpec::Cmv { phases, .. } => Some(phases),
            ModelSpec::QuantumWalk { coin: CoinSpec::Random { phases, .. }, .. } => Some(phases),
            ModelSpec::QuantumWalk { .. } => None,
        }
    }

    /// Labels of the random phases, in the order `build` consumes them.
    pub fn phase_labels(&self) -> Result<Vec<SiteLabel>> {
        Ok(match self {
            ModelSpec::MagneticRingHalfline { n, .. } | ModelSpec::Cmv { n, .. } => {
                (0..*n as i64).map(SiteLabel::index).collect()
            }
            ModelSpec::Band1d { n, .. } => {
                let o = blocks::origin(*n) as i64;
                (0..*n as i64).map(|k| SiteLabel::index(k - o)).collect()
            }
            ModelSpec::AndersonD { d, l, .. } => anderson::box_labels(*d, *l)?,
            ModelSpec::QuantumWalk { coin: CoinSpec::Random { .. }, n } => walk::walk_labels(*n),
            ModelSpec::QuantumWalk { .. } => Vec::new(),
        })
    }

    /// Basis labels of the built operator.
    pub fn basis_labels(&self) -> Result<Vec<SiteLabel>> {
        Ok(match self {
            ModelSpec::QuantumWalk { n, .. } => walk::walk_labels(*n),
            _ => self.phase_labels()?,
        })
    }

    /// Index of the basis vector at the origin (spin up for walks).
    pub fn origin_index(&self) -> usize {
        match self {
            ModelSpec::MagneticRingHalfline { .. } | ModelSpec::Cmv { .. } => 0,
            ModelSpec::Band1d { n, .. } => blocks::origin(*n),
            ModelSpec::AndersonD { d, l, .. } => {
                let o = blocks::origin(*l);
                (0..*d).fold(0, |acc, _| acc * l + o)
            }
            ModelSpec::QuantumWalk { n, .. } => 2 * walk::walk_origin(*n),
        }
    }

    pub fn realize(&self, master_seed: u64, realization_index: u64) -> Result<DisorderRealization> {
        let labels = self.phase_labels()?;
        match self.phase_distribution() {
            Some(d) => sample_phases(d, master_seed, realization_index, &labels),
            None => Ok(DisorderRealization {
                master_seed,
                realization_index,
                labels,
                phases: Vec::new(),
            }),
        }
    }

    /// The operator for the given phases (see [`ModelSpec::phase_labels`]).
    pub fn build_with_phases(&self, phases: &[f64]) -> Result<ComplexBandMatrix> {
        match self {
            ModelSpec::MagneticRingHalfline { t, .. } => build_halfline(*t, phases),
            ModelSpec::Band1d { t, closure, .. } => build_band_1d(*t, phases, *closure),
            ModelSpec::AndersonD { t, d, l, .. } => build_anderson_d(*t, *d, *l, phases),
            ModelSpec::Cmv { r, closure, .. } => Ok(build_cmv(&verblunsky_from_phases(*r, phases), *closure)?.matrix),
            ModelSpec::QuantumWalk { coin, n } => match coin {
                CoinSpec::Random { t, .. } => build_qw(&walk::coins_from_phases(*t, phases)),
                CoinSpec::Fixed { matrix } => build_qw(&vec![CoinSpec::fixed_coin(matrix); *n]),
            },
        }
    }

    pub fn build(&self, realization: &DisorderRealization) -> Result<ComplexBandMatrix> {
        self.build_with_phases(&realization.phases)
    }

    /// Builds realization `realization_index` of the ensemble.
    pub fn sample(&self, master_seed: u64, realization_index: u64) -> Result<ComplexBandMatrix> {
        self.build(&self.realize(master_seed, realization_index)?)
    }

    /// Distance of a basis label from the origin: `|n|` on chains and walks,
    /// the max-norm on boxes.
    pub fn distance(&self, l: &SiteLabel) -> usize {
        match self {
            ModelSpec::AndersonD { .. } => l.max_norm() as usize,
            _ => l.coords[0].unsigned_abs() as usize,
        }
    }
}
