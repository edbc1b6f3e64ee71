//! Phase distributions on the torus and reproducible disorder sampling.
//!
//! Every phase is drawn from its own ChaCha8 stream: the 256-bit key holds
//! `master_seed` and `realization_index` (little endian, zero padded) and the
//! stream id is the label's [`SiteLabel::stream_key`]. One `f64` in `[0, 1)`
//! is taken from the stream and mapped through the distribution. Any single
//! phase can therefore be regenerated without touching the others.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::band::SiteLabel;
use crate::error::{Error, Result};
use crate::TAU;

/// Size of the inverse-CDF table used for tabulated densities.
pub const TABLE_SIZE: usize = 1 << 16;

/// Density `τ` of the i.i.d. phases, with support in `[-β, β]` mod 2π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhaseDistribution {
    /// Uniform on the whole circle (`β = π`).
    UniformFull,
    /// Uniform on `[-β, β]`.
    Uniform { beta: f64 },
    /// All phases equal to `at`. Degenerate (no bounded density); meant for
    /// deterministic reference runs.
    PointMass {
        #[serde(default)]
        at: f64,
    },
    /// Piecewise-linear density through `(angle, density)` points, periodic
    /// on the circle and normalized on construction of the sampler. The
    /// points may instead come from a two-column CSV file.
    Tabulated {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<String>,
    },
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

impl PhaseDistribution {
    /// Reads `(angle, density)` rows from a CSV file without header.
    pub fn tabulated_from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::invalid("tabulated", "rows need angle and density"));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::invalid("tabulated", format!("not a number: {s}")))
            };
            points.push([parse(&rec[0])?, parse(&rec[1])?]);
        }
        Ok(PhaseDistribution::Tabulated { points, csv: None })
    }

    /// Replaces a CSV reference by the points it holds; relative paths are
    /// resolved against `base`.
    pub fn resolved(&self, base: &Path) -> Result<Self> {
        match self {
            PhaseDistribution::Tabulated { points, csv: Some(p) } if points.is_empty() => {
                let path = Path::new(p);
                let path = if path.is_relative() { base.join(path) } else { path.to_path_buf() };
                Self::tabulated_from_csv(path)
            }
            other => Ok(other.clone()),
        }
    }

    /// Problems with the parameters, as `(field, message)` pairs.
    pub fn problems(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        match self {
            PhaseDistribution::UniformFull => {}
            PhaseDistribution::Uniform { beta } => {
                if !(*beta > 0.0 && *beta <= PI) {
                    out.push(("beta".into(), format!("{beta} is not in (0, π]")));
                }
            }
            PhaseDistribution::PointMass { at } => {
                if !at.is_finite() {
                    out.push(("at".into(), "must be finite".into()));
                }
            }
            PhaseDistribution::Tabulated { points, csv } => {
                if points.is_empty() && csv.is_none() {
                    out.push(("points".into(), "needs points or a csv path".into()));
                }
                if !points.is_empty() {
                    if let Err(e) = Table::new(points) {
                        out.push(("points".into(), e.to_string()));
                    }
                }
            }
        }
        out
    }

    /// Support bound `β` with `supp τ ⊆ [-β, β]`.
    pub fn beta(&self) -> Result<f64> {
        Ok(match self {
            PhaseDistribution::UniformFull => PI,
            PhaseDistribution::Uniform { beta } => *beta,
            PhaseDistribution::PointMass { at } => wrap_angle(*at).abs(),
            PhaseDistribution::Tabulated { points, .. } => Table::new(points)?.beta,
        })
    }

    /// Density at angle `θ`. A point mass has no density and reports 0.
    pub fn density(&self, theta: f64) -> Result<f64> {
        let t = wrap_angle(theta);
        Ok(match self {
            PhaseDistribution::UniformFull => 1.0 / TAU,
            PhaseDistribution::Uniform { beta } => {
                if t.abs() <= *beta {
                    0.5 / beta
                } else {
                    0.0
                }
            }
            PhaseDistribution::PointMass { .. } => 0.0,
            PhaseDistribution::Tabulated { points, .. } => Table::new(points)?.density(t),
        })
    }

    pub fn sampler(&self) -> Result<PhaseSampler> {
        let problems = self.problems();
        if let Some((f, m)) = problems.into_iter().next() {
            return Err(Error::invalid(f, m));
        }
        Ok(match self {
            PhaseDistribution::UniformFull => PhaseSampler::Uniform(PI),
            PhaseDistribution::Uniform { beta } => PhaseSampler::Uniform(*beta),
            PhaseDistribution::PointMass { at } => PhaseSampler::Point(wrap_angle(*at)),
            PhaseDistribution::Tabulated { points, .. } => {
                if points.is_empty() {
                    return Err(Error::invalid("points", "unresolved csv reference"));
                }
                PhaseSampler::Table(Box::new(Table::new(points)?.inverse_cdf()))
            }
        })
    }
}

/// Normalized piecewise-linear periodic density.
struct Table {
    angles: Vec<f64>,
    values: Vec<f64>,
    beta: f64,
}

impl Table {
    fn new(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("points", "need at least two points"));
        }
        let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (wrap_angle(p[0]), p[1])).collect();
        if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite() || p.1 < 0.0) {
            return Err(Error::invalid("points", "densities must be finite and nonnegative"));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("points", "duplicate angles"));
        }
        let n = pts.len();
        let mut integral = 0.0;
        let mut beta: f64 = 0.0;
        for i in 0..n {
            let (a0, d0) = pts[i];
            let (a1, d1) = if i + 1 < n { pts[i + 1] } else { (pts[0].0 + TAU, pts[0].1) };
            integral += 0.5 * (d0 + d1) * (a1 - a0);
            if d0 > 0.0 || d1 > 0.0 {
                if i + 1 == n {
                    beta = PI;
                } else {
                    beta = beta.max(a0.abs()).max(a1.abs());
                }
            }
        }
        if !(integral > 0.0) {
            return Err(Error::invalid("points", "density integrates to zero"));
        }
        Ok(Self {
            angles: pts.iter().map(|p| p.0).collect(),
            values: pts.iter().map(|p| p.1 / integral).collect(),
            beta: beta.min(PI),
        })
    }

    fn density(&self, t: f64) -> f64 {
        let n = self.angles.len();
        let k = self.angles.partition_point(|&a| a <= t);
        let (a0, d0, a1, d1) = if k == 0 {
            (self.angles[n - 1] - TAU, self.values[n - 1], self.angles[0], self.values[0])
        } else if k == n {
            (self.angles[n - 1], self.values[n - 1], self.angles[0] + TAU, self.values[0])
        } else {
            (self.angles[k - 1], self.values[k - 1], self.angles[k], self.values[k])
        };
        d0 + (d1 - d0) * (t - a0) / (a1 - a0)
    }

    /// Cumulative table on `TABLE_SIZE` equal cells of `[-π, π)`, weighting
    /// each cell by the density at its midpoint.
    fn inverse_cdf(&self) -> Vec<f64> {
        let h = TAU / TABLE_SIZE as f64;
        let mut cdf = Vec::with_capacity(TABLE_SIZE);
        let mut acc = 0.0;
        for k in 0..TABLE_SIZE {
            acc += self.density(-PI + (k as f64 + 0.5) * h);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        cdf
    }
}

/// Maps uniform variates in `[0, 1)` to phases.
#[derive(Clone, Debug)]
pub enum PhaseSampler {
    Uniform(f64),
    Point(f64),
    Table(Box<Vec<f64>>),
}

impl PhaseSampler {
    pub fn map(&self, u: f64) -> f64 {
        match self {
            PhaseSampler::Uniform(beta) => (2.0 * u - 1.0) * beta,
            PhaseSampler::Point(a) => *a,
            PhaseSampler::Table(cdf) => {
                let k = cdf.partition_point(|&c| c <= u).min(TABLE_SIZE - 1);
                let lo = if k == 0 { 0.0 } else { cdf[k - 1] };
                let width = cdf[k] - lo;
                let frac = if width > 0.0 { ((u - lo) / width).clamp(0.0, 1.0) } else { 0.5 };
                -PI + (k as f64 + frac) * (TAU / TABLE_SIZE as f64)
            }
        }
    }
}

/// Uniform variate in `[0, 1)` for one site of one realization.
pub fn site_uniform(master_seed: u64, realization_index: u64, label: &SiteLabel) -> f64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&realization_index.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(label.stream_key());
    rng.random::<f64>()
}

/// Phases `θ_k^ω` of one realization, one per label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub master_seed: u64,
    pub realization_index: u64,
    pub labels: Vec<SiteLabel>,
    pub phases: Vec<f64>,
}

impl DisorderRealization {
    pub fn phase_of(&self, label: &SiteLabel) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.phases[i])
    }
}

pub fn sample_phases(
    dist: &PhaseDistribution,
    master_seed: u64,
    realization_index: u64,
    labels: &[SiteLabel],
) -> Result<DisorderRealization> {
    let sampler = dist.sampler()?;
    Ok(sample_with(&sampler, master_seed, realization_index, labels))
}

pub fn sample_with(
    sampler: &PhaseSampler,
    master_seed: u64,
    realization_index: u64,
    labels: &[SiteLabel],
) -> DisorderRealization {
    let phases = labels
        .iter()
        .map(|l| sampler.map(site_uniform(master_seed, realization_index, l)))
        .collect();
    DisorderRealization {
        master_seed,
        realization_index,
        labels: labels.to_vec(),
        phases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn labels(n: i64) -> Vec<SiteLabel> {
        (0..n).map(SiteLabel::index).collect()
    }

    #[test]
    fn point_mass_is_constant() {
        let r = sample_phases(&PhaseDistribution::PointMass { at: 0.0 }, 1, 2, &labels(50)).unwrap();
        assert!(r.phases.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn uniform_full_mean_phase_small() {
        let r = sample_phases(&PhaseDistribution::UniformFull, 7, 0, &labels(100_000)).unwrap();
        let m: C64 = r.phases.iter().map(|&t| C64::from_polar(1.0, t)).sum::<C64>() / 1e5;
        assert!(m.norm() <= 0.02, "{}", m.norm());
    }

    #[test]
    fn support_respected() {
        let r = sample_phases(&PhaseDistribution::Uniform { beta: 0.3 }, 3, 1, &labels(10_000)).unwrap();
        assert!(r.phases.iter().all(|p| p.abs() <= 0.3));
    }

    #[test]
    fn regeneration_is_bitwise() {
        let d = PhaseDistribution::UniformFull;
        let a = sample_phases(&d, 11, 4, &labels(64)).unwrap();
        let b = sample_phases(&d, 11, 4, &labels(64)[10..20]).unwrap();
        for (i, l) in b.labels.iter().enumerate() {
            assert_eq!(a.phase_of(l).unwrap().to_bits(), b.phases[i].to_bits());
        }
        let c = sample_phases(&d, 11, 5, &labels(64)).unwrap();
        assert_ne!(a.phases, c.phases);
    }

    #[test]
    fn tabulated_triangle() {
        let d = PhaseDistribution::Tabulated {
            points: vec![[-0.5, 0.0], [0.0, 1.0], [0.5, 0.0]],
            csv: None,
        };
        assert!((d.beta().unwrap() - 0.5).abs() < 1e-15);
        assert!((d.density(0.0).unwrap() - 2.0).abs() < 1e-12);
        let r = sample_phases(&d, 5, 0, &labels(20_000)).unwrap();
        assert!(r.phases.iter().all(|p| p.abs() <= 0.5 + 1e-4));
        let frac_inner = r.phases.iter().filter(|p| p.abs() < 0.25).count() as f64 / 20_000.0;
        assert!((frac_inner - 0.75).abs() < 0.02, "{frac_inner}");
    }

    #[test]
    fn rejects_bad_tables() {
        let d = PhaseDistribution::Tabulated { points: vec![[0.0, -1.0], [1.0, 1.0]], csv: None };
        assert!(d.sampler().is_err());
        assert!(!PhaseDistribution::Uniform { beta: 4.0 }.problems().is_empty());
    }
}
