//! Array geometry, line-of-sight channels and the SNR of a reflected link.
//!
//! The surface lies in the xz-plane centred at the origin. A direction with
//! azimuth `beta` and elevation `theta` has unit vector
//! `[sin(theta) cos(beta), sin(theta) sin(beta), cos(theta)]`, so broadside is
//! `beta = theta = 90` deg. The incident channel is
//! `g_n = rho exp(-j 2 pi / lambda * psi_n)` with `psi_n = v_r . p_n`, and the
//! departure channel `h_n` is built the same way with gain `mu`.
//!
//! With cells tied into control groups the received amplitude collapses to a
//! sum over controls, `h^H diag(g*) x = sum_g C_g x_g`, where
//! `C_g = sum_{n in g} conj(h_n) conj(g_n)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::codebook::PhaseProfile;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const DEFAULT_CARRIER_HZ: f64 = 60e9;
pub const DEFAULT_COLUMNS: usize = 12;
pub const DEFAULT_ROWS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry<T> {
    n_x: usize,
    n_z: usize,
    spacing: T,
    wavelength: T,
    positions: Vec<[T; 3]>,
    tie_groups: Vec<usize>,
    controls: usize,
}

impl<T: Real> ArrayGeometry<T> {
    /// Uniform `n_x` x `n_z` grid. Elements are numbered column by column
    /// (`n = ix * n_z + iz`). With `column_tied` every column shares one
    /// control, otherwise each element is its own control.
    pub fn new(n_x: usize, n_z: usize, spacing: T, wavelength: T, column_tied: bool) -> Result<Self> {
        if n_x == 0 || n_z == 0 {
            return Err(Error::Validation("geometry needs at least one row and column".into()));
        }
        if !(spacing > T::zero()) || !(wavelength > T::zero()) {
            return Err(Error::Validation(
                "geometry spacing and wavelength must be positive".into(),
            ));
        }
        let half = T::lit(0.5);
        let centre_x = T::from_count(n_x - 1) * half;
        let centre_z = T::from_count(n_z - 1) * half;
        let mut positions = Vec::with_capacity(n_x * n_z);
        let mut tie_groups = Vec::with_capacity(n_x * n_z);
        for ix in 0..n_x {
            for iz in 0..n_z {
                positions.push([
                    (T::from_count(ix) - centre_x) * spacing,
                    T::zero(),
                    (T::from_count(iz) - centre_z) * spacing,
                ]);
                tie_groups.push(if column_tied { ix } else { ix * n_z + iz });
            }
        }
        let controls = if column_tied { n_x } else { n_x * n_z };
        Ok(Self {
            n_x,
            n_z,
            spacing,
            wavelength,
            positions,
            tie_groups,
            controls,
        })
    }

    /// 12 x 10 column-biased surface at 60 GHz with half-wavelength pitch.
    pub fn default_prototype() -> Self {
        let wavelength = T::lit(SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ);
        Self::new(
            DEFAULT_COLUMNS,
            DEFAULT_ROWS,
            wavelength * T::lit(0.5),
            wavelength,
            true,
        )
        .expect("default geometry is valid")
    }

    /// Replaces the element-to-control map. Groups must cover `0..G` with no
    /// gaps.
    pub fn with_tie_groups(mut self, tie_groups: Vec<usize>) -> Result<Self> {
        if tie_groups.len() != self.positions.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} tie groups for {} elements",
                tie_groups.len(),
                self.positions.len()
            )));
        }
        let controls = tie_groups.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; controls];
        for &g in &tie_groups {
            seen[g] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Validation("tie groups must be surjective onto 0..G".into()));
        }
        self.tie_groups = tie_groups;
        self.controls = controls;
        Ok(self)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn element_count(&self) -> usize {
        self.positions.len()
    }

    pub fn control_count(&self) -> usize {
        self.controls
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn positions(&self) -> &[[T; 3]] {
        &self.positions
    }

    pub fn tie_groups(&self) -> &[usize] {
        &self.tie_groups
    }

    fn wavenumber(&self) -> T {
        T::TAU() / self.wavelength
    }

    /// Path-length projection `v . p_n` of element `n` in metres.
    pub fn steering_phase(&self, direction: &DirectionAngles<T>, n: usize) -> T {
        let v = direction.unit_vector();
        let p = self.positions[n];
        v[0] * p[0] + v[1] * p[1] + v[2] * p[2]
    }

    /// Constant-modulus far-field channel `gain * exp(-j k (v . p_n))`.
    pub fn build_channel(&self, direction: &DirectionAngles<T>, gain: T) -> Vec<Complex<T>> {
        let k = self.wavenumber();
        (0..self.positions.len())
            .map(|n| Complex::from_polar(gain, -k * self.steering_phase(direction, n)))
            .collect()
    }

    /// Sums per-element values into their control groups.
    pub(crate) fn group_sum(&self, per_element: impl IntoIterator<Item = Complex<T>>) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.controls];
        for (value, &g) in per_element.into_iter().zip(&self.tie_groups) {
            out[g] = out[g] + value;
        }
        out
    }
}

/// Azimuth and elevation in degrees, both in `[0, 180]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionAngles<T> {
    azimuth_deg: T,
    elevation_deg: T,
}

impl<T: Real> DirectionAngles<T> {
    pub fn new(azimuth_deg: T, elevation_deg: T) -> Result<Self> {
        let in_range = |a: T| a >= T::zero() && a <= T::lit(180.0);
        if !in_range(azimuth_deg) || !in_range(elevation_deg) {
            return Err(Error::Validation(format!(
                "direction ({azimuth_deg}, {elevation_deg}) deg outside [0, 180]"
            )));
        }
        Ok(Self {
            azimuth_deg,
            elevation_deg,
        })
    }

    /// Direction in the horizontal plane (elevation 90 deg).
    pub fn azimuth(azimuth_deg: T) -> Result<Self> {
        Self::new(azimuth_deg, T::lit(90.0))
    }

    pub fn broadside() -> Self {
        Self {
            azimuth_deg: T::lit(90.0),
            elevation_deg: T::lit(90.0),
        }
    }

    pub fn azimuth_deg(&self) -> T {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> T {
        self.elevation_deg
    }

    pub fn unit_vector(&self) -> [T; 3] {
        let (sb, cb) = sin_cos_deg(self.azimuth_deg);
        let (st, ct) = sin_cos_deg(self.elevation_deg);
        [st * cb, st * sb, ct]
    }
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90.
fn sin_cos_deg<T: Real>(deg: T) -> (T, T) {
    let quarter = deg / T::lit(90.0);
    if quarter == quarter.round() {
        let k = quarter.to_i64().unwrap_or(0).rem_euclid(4);
        let (s, c) = [(0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0)][k as usize];
        return (T::lit(s), T::lit(c));
    }
    deg.to_radians().sin_cos()
}

/// Link-budget constants. `K^2 = p_bs * g_bs * g_mt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams<T> {
    pub p_bs: T,
    pub g_bs: T,
    pub g_mt: T,
    pub sigma2: T,
    pub delta: T,
    pub rho: T,
    pub mu: T,
}

impl<T: Real> Default for RadioParams<T> {
    fn default() -> Self {
        let one = T::one();
        Self {
            p_bs: one,
            g_bs: one,
            g_mt: one,
            sigma2: one,
            delta: one,
            rho: one,
            mu: one,
        }
    }
}

impl<T: Real> RadioParams<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_bs", self.p_bs),
            ("g_bs", self.g_bs),
            ("g_mt", self.g_mt),
            ("sigma2", self.sigma2),
            ("delta", self.delta),
            ("rho", self.rho),
            ("mu", self.mu),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::Validation(format!("radio.{name} must be positive")));
            }
        }
        if self.delta > T::one() {
            return Err(Error::Validation("radio.delta must be <= 1".into()));
        }
        Ok(())
    }

    /// `delta K / sigma`, the factor in front of the real-part constraint.
    pub fn amplitude_gain(&self) -> T {
        self.delta * (self.p_bs * self.g_bs * self.g_mt / self.sigma2).sqrt()
    }

    /// `delta^2 K^2 / sigma^2`.
    pub fn snr_scale(&self) -> T {
        let a = self.amplitude_gain();
        a * a
    }
}

/// Per-control coupling coefficients of one link, with the amplitude factor
/// `delta K / sigma` that turns `sum_g C_g x_g` into a received amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet<T> {
    coeffs: Vec<Complex<T>>,
    gain: T,
}

impl<T: Real> CouplingSet<T> {
    pub fn new(coeffs: Vec<Complex<T>>, gain: T) -> Self {
        Self { coeffs, gain }
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn gain(&self) -> T {
        self.gain
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.coeffs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{n} weights for {} controls",
                self.coeffs.len()
            )));
        }
        Ok(())
    }

    /// `sum_g C_g w_g` for arbitrary complex weights.
    pub fn combine(&self, weights: &[Complex<T>]) -> Result<Complex<T>> {
        self.check_len(weights.len())?;
        Ok(self
            .coeffs
            .iter()
            .zip(weights)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&c, &w)| acc + c * w))
    }

    pub fn snr_weights(&self, weights: &[Complex<T>]) -> Result<T> {
        Ok(self.gain * self.gain * self.combine(weights)?.norm_sqr())
    }

    /// Linear SNR of a codebook profile.
    pub fn snr(&self, profile: &PhaseProfile) -> Result<T> {
        self.snr_weights(&profile.weights())
    }

    /// `(delta K / sigma) Re{sum_g C_g x_g}`, the quantity bounded below by
    /// `sqrt(alpha)` in the real-part constraint.
    pub fn real_part(&self, profile: &PhaseProfile) -> Result<T> {
        self.check_len(profile.len())?;
        let cb = profile.codebook();
        let sum = self
            .coeffs
            .iter()
            .zip(profile.indices())
            .fold(T::zero(), |acc, (&c, &q)| acc + (c * cb.point::<T>(q)).re);
        Ok(self.gain * sum)
    }

    /// Phase-aligned optimum `(delta K / sigma)^2 (sum_g |C_g|)^2`.
    pub fn max_snr(&self) -> T {
        let s: T = self.coeffs.iter().map(|c| c.norm()).sum();
        self.gain * self.gain * s * s
    }
}

/// One reflected link: geometry, radio constants, arrival and departure
/// directions, and the derived channels.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario<T> {
    geometry: ArrayGeometry<T>,
    radio: RadioParams<T>,
    aoa: DirectionAngles<T>,
    aod: DirectionAngles<T>,
    g: Vec<Complex<T>>,
    h: Vec<Complex<T>>,
    coupling: CouplingSet<T>,
}

impl<T: Real> LinkScenario<T> {
    pub fn new(
        geometry: ArrayGeometry<T>,
        radio: RadioParams<T>,
        aoa: DirectionAngles<T>,
        aod: DirectionAngles<T>,
    ) -> Result<Self> {
        radio.validate()?;
        let g = geometry.build_channel(&aoa, radio.rho);
        let h = geometry.build_channel(&aod, radio.mu);
        let coeffs = geometry.group_sum(h.iter().zip(&g).map(|(hn, gn)| hn.conj() * gn.conj()));
        let coupling = CouplingSet::new(coeffs, radio.amplitude_gain());
        Ok(Self {
            geometry,
            radio,
            aoa,
            aod,
            g,
            h,
            coupling,
        })
    }

    pub fn geometry(&self) -> &ArrayGeometry<T> {
        &self.geometry
    }

    pub fn radio(&self) -> &RadioParams<T> {
        &self.radio
    }

    pub fn aoa(&self) -> DirectionAngles<T> {
        self.aoa
    }

    pub fn aod(&self) -> DirectionAngles<T> {
        self.aod
    }

    /// Incident channel `g`.
    pub fn incident(&self) -> &[Complex<T>] {
        &self.g
    }

    /// Departure channel `h`.
    pub fn departure(&self) -> &[Complex<T>] {
        &self.h
    }

    pub fn coupling(&self) -> &CouplingSet<T> {
        &self.coupling
    }

    pub fn coupling_coefficients(&self) -> &[Complex<T>] {
        self.coupling.coeffs()
    }

    pub fn snr(&self, profile: &PhaseProfile) -> Result<T> {
        self.coupling.snr(profile)
    }
}

impl<T> AsRef<CouplingSet<T>> for LinkScenario<T> {
    fn as_ref(&self) -> &CouplingSet<T> {
        &self.coupling
    }
}

impl<T> AsRef<CouplingSet<T>> for CouplingSet<T> {
    fn as_ref(&self) -> &CouplingSet<T> {
        self
    }
}
