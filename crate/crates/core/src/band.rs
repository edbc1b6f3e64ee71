//! Diagonal-wise storage for complex band matrices with optional periodic wrap.

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::C64;

/// Tolerance used when builders flag their output as unitary.
pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

/// Lattice (and, for walks, spin) label of a basis vector.
///
/// Coordinates are measured from the origin of the finite volume, so the
/// position operator acts as `X e_k = label(k) e_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteLabel {
    pub coords: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<Spin>,
}

impl SiteLabel {
    pub fn index(k: i64) -> Self {
        Self {
            coords: vec![k],
            spin: None,
        }
    }

    pub fn lattice(coords: Vec<i64>) -> Self {
        Self { coords, spin: None }
    }

    pub fn walk(position: i64, spin: Spin) -> Self {
        Self {
            coords: vec![position],
            spin: Some(spin),
        }
    }

    /// 64-bit key used to select the random stream of this site.
    ///
    /// Coordinates are zigzag encoded and folded with splitmix64, so the key
    /// depends only on the label, never on its position in a list.
    pub fn stream_key(&self) -> u64 {
        let mut h: u64 = 0x243f_6a88_85a3_08d3 ^ (self.coords.len() as u64);
        for &c in &self.coords {
            let z = ((c << 1) ^ (c >> 63)) as u64;
            h = splitmix64(h ^ z);
        }
        let s = match self.spin {
            None => 0,
            Some(Spin::Up) => 1,
            Some(Spin::Down) => 2,
        };
        splitmix64(h ^ s)
    }

    pub fn max_norm(&self) -> f64 {
        self.coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64
    }

    pub fn euclid_norm(&self) -> f64 {
        self.coords
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Square complex matrix stored by diagonals.
///
/// Row `i` keeps the entries at column offsets `-lower_bw..=upper_bw`. For a
/// periodic matrix offsets are taken modulo `dim`, which is how wrap-around
/// closures are represented. A periodic matrix whose band would cover more
/// than `dim` offsets is stored densely as offsets `0..dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "BandJson", try_from = "BandJson")]
pub struct ComplexBandMatrix {
    dim: usize,
    lower: usize,
    upper: usize,
    periodic: bool,
    data: Vec<C64>,
    labels: Option<Vec<SiteLabel>>,
    unitary: bool,
}

impl ComplexBandMatrix {
    pub fn zeros(dim: usize, lower: usize, upper: usize, periodic: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        let (lower, upper) = if periodic {
            if lower + upper + 1 > dim {
                (0, dim - 1)
            } else {
                (lower, upper)
            }
        } else {
            (lower.min(dim - 1), upper.min(dim - 1))
        };
        Ok(Self {
            dim,
            lower,
            upper,
            periodic,
            data: vec![C64::new(0.0, 0.0); dim * (lower + upper + 1)],
            labels: None,
            unitary: false,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(values: &[C64]) -> Result<Self> {
        let mut m = Self::zeros(values.len(), 0, 0, false)?;
        m.data.copy_from_slice(values);
        Ok(m)
    }

    /// Assembles a matrix from `(row, col, value)` triplets, summing duplicates.
    /// Bandwidths are the smallest that hold every nonzero entry.
    pub fn from_triplets(dim: usize, periodic: bool, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        let mut lower = 0usize;
        let mut upper = 0usize;
        for &(i, j, v) in triplets {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            if j >= dim {
                return Err(Error::IndexOutOfRange { index: j, dim });
            }
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let o = if periodic {
                signed_mod(j as i64 - i as i64, dim)
            } else {
                j as i64 - i as i64
            };
            if o < 0 {
                lower = lower.max((-o) as usize);
            } else {
                upper = upper.max(o as usize);
            }
        }
        let mut m = Self::zeros(dim, lower, upper, periodic)?;
        for &(i, j, v) in triplets {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let s = m.slot(i, j).expect("bandwidth covers every triplet");
            m.data[s] += v;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower_bw(&self) -> usize {
        self.lower
    }

    pub fn upper_bw(&self) -> usize {
        self.upper
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn labels(&self) -> Option<&[SiteLabel]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<SiteLabel>) -> Result<Self> {
        if labels.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Sets the `unitary` flag after checking the residual against `tol`.
    pub fn mark_unitary(mut self, tol: f64) -> Result<Self> {
        let res = self.unitarity_residual();
        if !(res <= tol) {
            return Err(Error::invalid(
                "matrix",
                format!("unitarity residual {res:e} exceeds {tol:e}"),
            ));
        }
        self.unitary = true;
        Ok(self)
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    /// Storage slot of entry `(i, j)` if it lies inside the band.
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.dim;
        let o = if self.periodic {
            let d = (j as i64 - i as i64).rem_euclid(n as i64) as usize;
            if d <= self.upper {
                d as i64
            } else if n - d <= self.lower {
                d as i64 - n as i64
            } else {
                return None;
            }
        } else {
            let o = j as i64 - i as i64;
            if o < -(self.lower as i64) || o > self.upper as i64 {
                return None;
            }
            o
        };
        Some(i * self.width() + (o + self.lower as i64) as usize)
    }

    /// Column reached from row `i` at band offset `o`, if any.
    fn column(&self, i: usize, o: i64) -> Option<usize> {
        let c = i as i64 + o;
        if self.periodic {
            Some(c.rem_euclid(self.dim as i64) as usize)
        } else if c < 0 || c >= self.dim as i64 {
            None
        } else {
            Some(c as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        assert!(i < self.dim && j < self.dim, "index out of range");
        self.slot(i, j).map_or(C64::new(0.0, 0.0), |s| self.data[s])
    }

    /// Overwrites an entry inside the band.
    pub fn set(&mut self, i: usize, j: usize, v: C64) -> Result<()> {
        if i >= self.dim || j >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                dim: self.dim,
            });
        }
        let s = self
            .slot(i, j)
            .ok_or_else(|| Error::invalid("entry", format!("({i}, {j}) lies outside the band")))?;
        self.data[s] = v;
        self.unitary = false;
        Ok(())
    }

    /// Entries `(column, value)` of row `i` inside the band.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let w = self.width();
        let base = i * w;
        (0..w).filter_map(move |s| {
            let o = s as i64 - self.lower as i64;
            self.column(i, o).map(|c| (c, self.data[base + s]))
        })
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    /// `out = M v` without allocating.
    pub fn matvec_into(&self, v: &[C64], out: &mut [C64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: out.len(),
            });
        }
        let n = self.dim as i64;
        let w = self.width();
        let lo = self.lower as i64;
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = C64::new(0.0, 0.0);
            let start = i as i64 - lo;
            if !self.periodic || (start >= 0 && start + w as i64 <= n) {
                let c0 = start.max(0);
                let c1 = (start + w as i64).min(n);
                for c in c0..c1 {
                    acc += row[(c - start) as usize] * v[c as usize];
                }
            } else {
                for (s, &a) in row.iter().enumerate() {
                    let c = (start + s as i64).rem_euclid(n) as usize;
                    acc += a * v[c];
                }
            }
            *o = acc;
        }
        Ok(())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim, self.upper, self.lower, self.periodic)
            .expect("same shape as self");
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                let s = m.slot(j, i).expect("transposed band");
                m.data[s] = v.conj();
            }
        }
        m.labels = self.labels.clone();
        m.unitary = self.unitary;
        m
    }

    /// Matrix product `self * other`; the result is periodic if either factor is.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut trip = Vec::with_capacity(self.dim * self.width() * other.width());
        for i in 0..self.dim {
            for (j, a) in self.row(i) {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for (k, b) in other.row(j) {
                    trip.push((i, k, a * b));
                }
            }
        }
        let mut m = Self::from_triplets(self.dim, self.periodic || other.periodic, &trip)?;
        m.labels = self.labels.clone();
        Ok(m)
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[C64]) -> Result<Self> {
        if d.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: d.len(),
            });
        }
        let mut m = self.clone();
        let w = self.width();
        for (i, &di) in d.iter().enumerate() {
            for x in &mut m.data[i * w..(i + 1) * w] {
                *x *= di;
            }
        }
        m.unitary = false;
        Ok(m)
    }

    /// Max-norm of `M* M - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let p = self.adjoint().mul(self).expect("square");
        let mut res: f64 = 0.0;
        for i in 0..self.dim {
            res = res.max((p.get(i, i) - 1.0).norm());
            for (j, v) in p.row(i) {
                if j != i {
                    res = res.max(v.norm());
                }
            }
        }
        res
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// `(M - z I)`, keeping band structure.
    pub fn shifted(&self, z: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            let s = m.slot(i, i).expect("diagonal is always stored");
            m.data[s] -= z;
        }
        m.unitary = false;
        m
    }
}

/// Representative of `d mod n` in `(-n/2, n/2]`.
fn signed_mod(d: i64, n: usize) -> i64 {
    let n = n as i64;
    let r = d.rem_euclid(n);
    if r > n / 2 {
        r - n
    } else {
        r
    }
}

#[derive(Serialize, Deserialize)]
struct DiagonalJson {
    offset: i64,
    entries: Vec<[f64; 2]>,
}

/// Debug JSON form: one array of `[re, im]` pairs per stored diagonal,
/// indexed by row. Slots whose column falls outside a non-periodic matrix
/// are written as zero.
#[derive(Serialize, Deserialize)]
struct BandJson {
    dim: usize,
    lower_bw: usize,
    upper_bw: usize,
    periodic: bool,
    #[serde(default)]
    unitary: bool,
    diagonals: Vec<DiagonalJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<SiteLabel>>,
}

impl From<ComplexBandMatrix> for BandJson {
    fn from(m: ComplexBandMatrix) -> Self {
        let w = m.width();
        let diagonals = (0..w)
            .map(|s| DiagonalJson {
                offset: s as i64 - m.lower as i64,
                entries: (0..m.dim)
                    .map(|i| {
                        let v = m.data[i * w + s];
                        [v.re, v.im]
                    })
                    .collect(),
            })
            .collect();
        BandJson {
            dim: m.dim,
            lower_bw: m.lower,
            upper_bw: m.upper,
            periodic: m.periodic,
            unitary: m.unitary,
            diagonals,
            labels: m.labels,
        }
    }
}

impl TryFrom<BandJson> for ComplexBandMatrix {
    type Error = Error;

    fn try_from(j: BandJson) -> Result<Self> {
        let mut m = ComplexBandMatrix::zeros(j.dim, j.lower_bw, j.upper_bw, j.periodic)?;
        if m.lower != j.lower_bw || m.upper != j.upper_bw {
            return Err(Error::invalid("bandwidth", "inconsistent with dim"));
        }
        let w = m.width();
        for d in j.diagonals {
            if d.offset < -(m.lower as i64) || d.offset > m.upper as i64 {
                return Err(Error::invalid("offset", format!("{} outside the band", d.offset)));
            }
            if d.entries.len() != m.dim {
                return Err(Error::DimensionMismatch {
                    expected: m.dim,
                    got: d.entries.len(),
                });
            }
            let s = (d.offset + m.lower as i64) as usize;
            for (i, e) in d.entries.iter().enumerate() {
                let v = C64::new(e[0], e[1]);
                if m.column(i, d.offset).is_none() && v != C64::new(0.0, 0.0) {
                    return Err(Error::invalid(
                        "entries",
                        format!("row {i}, offset {} lies outside the matrix", d.offset),
                    ));
                }
                m.data[i * w + s] = v;
            }
        }
        if let Some(labels) = j.labels {
            m = m.with_labels(labels)?;
        }
        if j.unitary {
            m = m.mark_unitary(UNITARITY_TOL)?;
        }
        Ok(m)
    }
}
