//! Uniform phase codebooks and per-control phase profiles.
//!
//! A profile stores one codebook index per control. This is the dense form of
//! the one-hot selector matrix: control `g` with index `q` has phase
//! `360 q / Q` degrees and unit-circle weight `exp(j 2 pi q / Q)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `Q` admissible phases uniformly spaced on `[0, 360)` degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseCodebook {
    q_count: usize,
}

impl PhaseCodebook {
    pub fn new(q_count: usize) -> Result<Self> {
        if q_count < 2 {
            return Err(Error::Validation(format!("codebook.q must be >= 2 (got {q_count})")));
        }
        Ok(Self { q_count })
    }

    pub fn len(&self) -> usize {
        self.q_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Phase of entry `q` in degrees.
    pub fn phase_deg<T: Real>(&self, q: usize) -> T {
        T::from_count(360 * q) / T::from_count(self.q_count)
    }

    /// Unit-circle point of entry `q`.
    pub fn point<T: Real>(&self, q: usize) -> Complex<T> {
        if q == 0 {
            return Complex::new(T::one(), T::zero());
        }
        let angle = T::TAU() * T::from_count(q) / T::from_count(self.q_count);
        Complex::from_polar(T::one(), angle)
    }

    pub fn points<T: Real>(&self) -> Vec<Complex<T>> {
        (0..self.q_count).map(|q| self.point(q)).collect()
    }

    /// Plain (non-wrapped) phase change in degrees when moving from entry
    /// `from` to entry `to`.
    pub fn delta_deg<T: Real>(&self, from: usize, to: usize) -> T {
        self.phase_deg::<T>(to) - self.phase_deg::<T>(from)
    }

    /// Index of the entry at exactly `phase_deg` (mod 360), if any.
    pub fn index_of_phase(&self, phase_deg: f64) -> Option<usize> {
        let x = phase_deg.rem_euclid(360.0) * self.q_count as f64 / 360.0;
        let r = x.round();
        ((x - r).abs() < 1e-9).then(|| (r as usize) % self.q_count)
    }
}

/// One codebook index per control.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseProfile {
    q_count: usize,
    indices: Vec<usize>,
}

impl PhaseProfile {
    pub fn new(codebook: PhaseCodebook, indices: Vec<usize>) -> Result<Self> {
        if let Some(bad) = indices.iter().find(|&&q| q >= codebook.len()) {
            return Err(Error::Validation(format!(
                "profile index {bad} outside codebook of size {}",
                codebook.len()
            )));
        }
        Ok(Self {
            q_count: codebook.len(),
            indices,
        })
    }

    /// All controls at phase 0.
    pub fn zeros(codebook: PhaseCodebook, controls: usize) -> Self {
        Self {
            q_count: codebook.len(),
            indices: vec![0; controls],
        }
    }

    pub fn codebook(&self) -> PhaseCodebook {
        PhaseCodebook { q_count: self.q_count }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn phases_deg<T: Real>(&self) -> Vec<T> {
        let cb = self.codebook();
        self.indices.iter().map(|&q| cb.phase_deg(q)).collect()
    }

    /// Unit-modulus complex weights `exp(j phi_g)`.
    pub fn weights<T: Real>(&self) -> Vec<Complex<T>> {
        let cb = self.codebook();
        self.indices.iter().map(|&q| cb.point(q)).collect()
    }

    /// Every control shifted by `steps` codebook entries (a global phase
    /// offset of `360 steps / Q` degrees).
    pub fn rotated(&self, steps: usize) -> Self {
        Self {
            q_count: self.q_count,
            indices: self.indices.iter().map(|&q| (q + steps) % self.q_count).collect(),
        }
    }

    /// Re-expresses the profile on a finer codebook whose size is a multiple
    /// of this one. Phases are preserved exactly.
    pub fn refine(&self, finer: PhaseCodebook) -> Result<Self> {
        if !finer.len().is_multiple_of(self.q_count) {
            return Err(Error::ShapeMismatch(format!(
                "codebook {} does not refine {}",
                finer.len(),
                self.q_count
            )));
        }
        let factor = finer.len() / self.q_count;
        Ok(Self {
            q_count: finer.len(),
            indices: self.indices.iter().map(|&q| q * factor).collect(),
        })
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.q_count != other.q_count || self.indices.len() != other.indices.len() {
            return Err(Error::ShapeMismatch(format!(
                "profiles over (Q={}, G={}) and (Q={}, G={})",
                self.q_count,
                self.indices.len(),
                other.q_count,
                other.indices.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codebook_rejects_degenerate_sizes() {
        assert!(PhaseCodebook::new(0).is_err());
        assert!(PhaseCodebook::new(1).is_err());
        assert!(PhaseCodebook::new(2).is_ok());
    }

    #[test]
    fn phases_are_uniform_and_start_at_zero() {
        let cb = PhaseCodebook::new(8).unwrap();
        let phases: Vec<f64> = (0..8).map(|q| cb.phase_deg(q)).collect();
        assert_eq!(phases, vec![0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0]);
        assert_eq!(cb.point::<f64>(0), Complex::new(1.0, 0.0));
        let p = cb.point::<f64>(2);
        assert!((p.re).abs() < 1e-15 && (p.im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deltas_do_not_wrap() {
        let cb = PhaseCodebook::new(36).unwrap();
        // 350 deg -> 10 deg is a -340 deg physical change
        assert_eq!(cb.delta_deg::<f64>(35, 1), -340.0);
        assert_eq!(cb.delta_deg::<f64>(1, 35), 340.0);
    }

    #[test]
    fn profile_validation_and_refinement() {
        let cb = PhaseCodebook::new(4).unwrap();
        assert!(PhaseProfile::new(cb, vec![0, 4]).is_err());
        let p = PhaseProfile::new(cb, vec![1, 3]).unwrap();
        let fine = p.refine(PhaseCodebook::new(16).unwrap()).unwrap();
        assert_eq!(fine.indices(), &[4, 12]);
        assert_eq!(p.phases_deg::<f64>(), fine.phases_deg::<f64>());
        assert!(p.refine(PhaseCodebook::new(6).unwrap()).is_err());
        assert_eq!(p.rotated(2).indices(), &[3, 1]);
    }

    #[test]
    fn index_lookup() {
        let cb = PhaseCodebook::new(256).unwrap();
        assert_eq!(cb.index_of_phase(0.0), Some(0));
        assert_eq!(cb.index_of_phase(180.0), Some(128));
        assert_eq!(cb.index_of_phase(1.0), None);
    }
}
