//! Closed, positively oriented arcs on the unit circle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TAU;

/// The arc `{e^{iφ} : start ≤ φ ≤ start + length}`.
///
/// `start` is normalized to `[0, 2π)`. A zero-length arc is a single point,
/// which is what the spectrum of the free operator collapses to at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    start: f64,
    length: f64,
}

impl Arc {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !start.is_finite() || !length.is_finite() || length < 0.0 {
            return Err(Error::invalid("arc", format!("start {start}, length {length}")));
        }
        Ok(Self {
            start: start.rem_euclid(TAU),
            length: length.min(TAU),
        })
    }

    /// The arc from angle `a` counterclockwise to angle `b ≥ a`.
    pub fn from_endpoints(a: f64, b: f64) -> Result<Self> {
        if b < a {
            return Err(Error::invalid("arc", format!("end {b} precedes start {a}")));
        }
        Self::new(a, b - a)
    }

    pub fn full() -> Self {
        Self {
            start: 0.0,
            length: TAU,
        }
    }

    /// `[-half, half]`, saturating to the full circle.
    pub fn symmetric(half: f64) -> Self {
        if 2.0 * half >= TAU {
            Self::full()
        } else {
            Self::new(-half, 2.0 * half).expect("finite nonnegative")
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    pub fn is_full(&self) -> bool {
        self.length >= TAU
    }

    /// Closed containment with angular slack `tol`.
    pub fn contains(&self, angle: f64, tol: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let d = (angle - self.start).rem_euclid(TAU);
        d <= self.length + tol || d >= TAU - tol
    }

    /// Containment in the arc shrunk by `margin` at both ends.
    pub fn contains_inner(&self, angle: f64, margin: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let d = (angle - self.start).rem_euclid(TAU);
        d >= margin && d <= self.length - margin
    }
}

/// Finite union of disjoint arcs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSet {
    arcs: Vec<Arc>,
}

impl ArcSet {
    /// Normalizes by merging overlapping arcs.
    pub fn new(arcs: Vec<Arc>) -> Self {
        if arcs.iter().any(Arc::is_full) {
            return Self {
                arcs: vec![Arc::full()],
            };
        }
        let mut iv: Vec<(f64, f64)> = Vec::new();
        for a in &arcs {
            let e = a.start + a.length;
            if e > TAU {
                iv.push((a.start, TAU));
                iv.push((0.0, e - TAU));
            } else {
                iv.push((a.start, e));
            }
        }
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (s, e) in iv {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        if merged.len() > 1 {
            let first = merged[0];
            let last = *merged.last().unwrap();
            if first.0 <= 0.0 && last.1 >= TAU {
                merged.pop();
                merged[0] = (last.0, first.1 + TAU);
            }
        }
        if merged.len() == 1 && merged[0].1 - merged[0].0 >= TAU {
            return Self {
                arcs: vec![Arc::full()],
            };
        }
        let mut arcs: Vec<Arc> = merged
            .into_iter()
            .map(|(s, e)| Arc::new(s, e - s).expect("ordered"))
            .collect();
        arcs.sort_by(|x, y| x.start.total_cmp(&y.start));
        Self { arcs }
    }

    pub fn single(arc: Arc) -> Self {
        Self::new(vec![arc])
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(Arc::length).sum()
    }

    pub fn is_full(&self) -> bool {
        self.arcs.len() == 1 && self.arcs[0].is_full()
    }

    pub fn contains(&self, angle: f64, tol: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(angle, tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn containment() {
        let a = Arc::symmetric(PI / 2.0);
        assert!(a.contains(0.0, 0.0));
        assert!(a.contains(-PI / 2.0, 1e-12));
        assert!(!a.contains(PI, 0.0));
        assert!(a.contains_inner(0.3, 0.1));
        assert!(!a.contains_inner(PI / 2.0 - 0.05, 0.1));
    }

    #[test]
    fn point_arc() {
        let a = Arc::symmetric(0.0);
        assert_eq!(a.length(), 0.0);
        assert!(a.contains(0.0, 0.0));
        assert!(a.contains(TAU, 1e-12));
        assert!(!a.contains(0.01, 0.0));
    }

    #[test]
    fn merge_wrapping() {
        let s = ArcSet::new(vec![
            Arc::new(6.0, 0.5).unwrap(),
            Arc::new(0.1, 0.3).unwrap(),
            Arc::new(2.0, 0.5).unwrap(),
        ]);
        assert_eq!(s.arcs().len(), 2);
        assert!((s.total_length() - ((TAU - 6.0) + 0.4 + 0.5)).abs() < 1e-12);
        assert!(s.contains(0.05, 0.0));
        assert!(!s.contains(1.0, 0.0));
    }

    #[test]
    fn full_absorbs() {
        let s = ArcSet::new(vec![Arc::new(1.0, 4.0).unwrap(), Arc::new(4.5, 3.0).unwrap()]);
        assert!(s.is_full());
    }
}
