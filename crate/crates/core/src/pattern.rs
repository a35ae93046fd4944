//! Far-field reflected beam patterns.
//!
//! The pattern of a profile is obtained by sweeping the departure azimuth and
//! evaluating `|a(beta)^H diag(g*) x|^2`, where `a(beta)` is a unit-gain
//! steering vector. Values are normalized to the grid maximum and reported in
//! dB, so the peak is exactly 0 dB.

use num_complex::Complex;

use crate::channel::{ArrayGeometry, DirectionAngles};
use crate::codebook::PhaseProfile;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Main-lobe extent used by [`pattern_similarity`], relative to the peak.
pub const MAIN_LOBE_DB: f64 = -6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamPattern<T> {
    pub angles_deg: Vec<T>,
    pub gain_db: Vec<T>,
    pub peak_angle_deg: T,
    /// Unnormalized power at the peak.
    pub peak_power: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSimilarity<T> {
    /// `peak(a) - peak(b)` in degrees.
    pub peak_offset_deg: T,
    /// `10 log10(peak_power(a) / peak_power(b))`.
    pub peak_ratio_db: T,
    /// Largest `|a_db - b_db|` over the main lobe of `a`.
    pub main_lobe_max_dev_db: T,
}

/// `lo, lo + step, ...` up to and including `hi` (within rounding).
pub fn angle_grid<T: Real>(lo: T, hi: T, step: T) -> Result<Vec<T>> {
    if !(step > T::zero()) || !(hi >= lo) {
        return Err(Error::Validation(format!(
            "angle grid {lo}:{hi}:{step} needs step > 0 and hi >= lo"
        )));
    }
    let count = ((hi - lo) / step + T::lit(1e-9)).floor().to_usize().unwrap_or(0) + 1;
    Ok((0..count).map(|i| lo + step * T::from_count(i)).collect())
}

/// 0 to 180 deg in 0.25 deg steps.
pub fn default_grid<T: Real>() -> Vec<T> {
    angle_grid(T::zero(), T::lit(180.0), T::lit(0.25)).expect("valid default grid")
}

/// Pattern of arbitrary complex per-control weights.
pub fn beam_pattern_weights<T: Real>(
    geometry: &ArrayGeometry<T>,
    incident: &[Complex<T>],
    weights: &[Complex<T>],
    angles_deg: &[T],
    elevation_deg: T,
) -> Result<BeamPattern<T>> {
    if angles_deg.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if incident.len() != geometry.element_count() {
        return Err(Error::ShapeMismatch(format!(
            "incident channel of length {} for {} elements",
            incident.len(),
            geometry.element_count()
        )));
    }
    if weights.len() != geometry.control_count() {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for {} controls",
            weights.len(),
            geometry.control_count()
        )));
    }
    if angles_deg.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("angle grid must be strictly increasing".into()));
    }
    // diag(g*) x, per element
    let excitation: Vec<Complex<T>> = incident
        .iter()
        .zip(geometry.tie_groups())
        .map(|(g, &grp)| g.conj() * weights[grp])
        .collect();

    let power = angles_deg
        .iter()
        .map(|&beta| {
            let dir = DirectionAngles::new(beta, elevation_deg)?;
            let a = geometry.build_channel(&dir, T::one());
            let s = a
                .iter()
                .zip(&excitation)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (an, en)| {
                    acc + an.conj() * *en
                });
            Ok(s.norm_sqr())
        })
        .collect::<Result<Vec<T>>>()?;

    let (peak_idx, &peak_power) = power
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &T)>, (i, p)| match best {
            Some((_, bp)) if *bp >= *p => best,
            _ => Some((i, p)),
        })
        .expect("nonempty grid");
    let gain_db = power
        .iter()
        .map(|&p| {
            if peak_power > T::zero() {
                T::lit(10.0) * (p / peak_power).log10()
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(BeamPattern {
        angles_deg: angles_deg.to_vec(),
        gain_db,
        peak_angle_deg: angles_deg[peak_idx],
        peak_power,
    })
}

/// Pattern of a codebook profile under incident channel `incident`.
pub fn beam_pattern<T: Real>(
    geometry: &ArrayGeometry<T>,
    incident: &[Complex<T>],
    profile: &PhaseProfile,
    angles_deg: &[T],
    elevation_deg: T,
) -> Result<BeamPattern<T>> {
    beam_pattern_weights(geometry, incident, &profile.weights(), angles_deg, elevation_deg)
}

pub fn pattern_similarity<T: Real>(a: &BeamPattern<T>, b: &BeamPattern<T>) -> Result<PatternSimilarity<T>> {
    if a.angles_deg != b.angles_deg {
        return Err(Error::GridMismatch);
    }
    let lobe = T::lit(MAIN_LOBE_DB);
    let main_lobe_max_dev_db = a
        .gain_db
        .iter()
        .zip(&b.gain_db)
        .filter(|(ga, _)| **ga >= lobe)
        .fold(T::zero(), |acc, (&ga, &gb)| acc.max((ga - gb).abs()));
    Ok(PatternSimilarity {
        peak_offset_deg: a.peak_angle_deg - b.peak_angle_deg,
        peak_ratio_db: T::lit(10.0) * (a.peak_power / b.peak_power).log10(),
        main_lobe_max_dev_db,
    })
}
