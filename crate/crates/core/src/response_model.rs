//! Convex piecewise-linear response-time model.
//!
//! Maps a signed phase change in degrees to the time in milliseconds a
//! liquid-crystal cell needs to settle. Positive changes are driven by the
//! applied field; negative ones rely on the slower elastic relaxation, so the
//! curve is asymmetric around zero.
//!
//! The model is stored as breakpoints `(c_i, w_i)` together with the derived
//! slopes `a_i` and intercepts `b_i` of the `I - 1` segments. Because the
//! function is convex it can be evaluated either segment-wise or as the
//! pointwise maximum of all affine pieces; both give the same value.

use serde::{Deserialize, Serialize};

use crate::codebook::{PhaseCodebook, PhaseProfile};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower end of the admissible phase-change range, in degrees.
pub const MIN_PHASE_DEG: f64 = -360.0;
/// Upper end of the admissible phase-change range, in degrees.
pub const MAX_PHASE_DEG: f64 = 360.0;

/// Exponential shape scale of the synthetic default curve, in degrees.
const DEFAULT_SHAPE_DEG: f64 = 160.0;
const DEFAULT_STEP_DEG: f64 = 45.0;
/// Settling time of a +320 deg change.
pub const POSITIVE_ANCHOR_MS: f64 = 20.0;
/// Settling time of a -320 deg change.
pub const NEGATIVE_ANCHOR_MS: f64 = 80.0;
pub const ANCHOR_PHASE_DEG: f64 = 320.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint<T> {
    pub phase_deg: T,
    pub time_ms: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTimeModel<T> {
    breakpoints: Vec<Breakpoint<T>>,
    slopes: Vec<T>,
    intercepts: Vec<T>,
}

impl<T: Real> ResponseTimeModel<T> {
    /// Builds a model from breakpoints sorted by phase, checking every model
    /// invariant.
    pub fn new(breakpoints: Vec<Breakpoint<T>>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidModel("need at least two breakpoints".into()));
        }
        for (i, bp) in breakpoints.iter().enumerate() {
            if !bp.phase_deg.is_finite() || !bp.time_ms.is_finite() {
                return Err(Error::InvalidModel(format!("non-finite breakpoint {i}")));
            }
            if bp.time_ms < T::zero() {
                return Err(Error::InvalidModel(format!(
                    "negative time {} at breakpoint {i}",
                    bp.time_ms
                )));
            }
        }
        if breakpoints.windows(2).any(|w| w[0].phase_deg >= w[1].phase_deg) {
            return Err(Error::InvalidModel(
                "breakpoint phases must be strictly increasing".into(),
            ));
        }
        let first = breakpoints[0].phase_deg;
        let last = breakpoints[breakpoints.len() - 1].phase_deg;
        if first > T::lit(MIN_PHASE_DEG) || last < T::lit(MAX_PHASE_DEG) {
            return Err(Error::InvalidModel(format!(
                "domain [{first}, {last}] does not cover [-360, 360]"
            )));
        }
        if !breakpoints
            .iter()
            .any(|bp| bp.phase_deg == T::zero() && bp.time_ms == T::zero())
        {
            return Err(Error::InvalidModel("missing zero-cost breakpoint at 0 deg".into()));
        }

        let (slopes, intercepts): (Vec<T>, Vec<T>) = breakpoints
            .windows(2)
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                let a = (lo.time_ms - hi.time_ms) / (lo.phase_deg - hi.phase_deg);
                let b = hi.time_ms - a * hi.phase_deg;
                (a, b)
            })
            .unzip();

        // Rounding in the slope quotient may perturb pooled (equal) slopes.
        let tol = T::lit(1e-9);
        for (i, w) in slopes.windows(2).enumerate() {
            let scale = T::one().max(w[0].abs()).max(w[1].abs());
            if w[1] < w[0] - tol * scale {
                return Err(Error::InvalidModel(format!(
                    "slopes decrease between segments {i} and {} (not convex)",
                    i + 1
                )));
            }
        }

        Ok(Self {
            breakpoints,
            slopes,
            intercepts,
        })
    }

    /// Synthetic model calibrated to 20 ms at +320 deg and 80 ms at -320 deg.
    ///
    /// Both branches follow `amp * (exp(|phi| / 160) - 1)` sampled every 45
    /// deg over `[-360, 360]` (17 breakpoints). Amplitudes are chosen so the
    /// piecewise-linear interpolant itself passes through the two anchors.
    pub fn default_model() -> Self {
        let shape = |phi: f64| (phi.abs() / DEFAULT_SHAPE_DEG).exp_m1();
        let lo = (ANCHOR_PHASE_DEG / DEFAULT_STEP_DEG).floor() * DEFAULT_STEP_DEG;
        let hi = lo + DEFAULT_STEP_DEG;
        let chord = shape(lo) + (ANCHOR_PHASE_DEG - lo) / DEFAULT_STEP_DEG * (shape(hi) - shape(lo));
        let pos_amp = POSITIVE_ANCHOR_MS / chord;
        let neg_amp = NEGATIVE_ANCHOR_MS / chord;

        let steps = (MAX_PHASE_DEG / DEFAULT_STEP_DEG) as i32;
        let breakpoints = (-steps..=steps)
            .map(|k| {
                let phi = f64::from(k) * DEFAULT_STEP_DEG;
                let amp = if k < 0 { neg_amp } else { pos_amp };
                Breakpoint {
                    phase_deg: T::lit(phi),
                    time_ms: T::lit(amp * shape(phi)),
                }
            })
            .collect();
        Self::new(breakpoints).expect("default model satisfies invariants")
    }

    pub fn breakpoints(&self) -> &[Breakpoint<T>] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[T] {
        &self.intercepts
    }

    pub fn segment_count(&self) -> usize {
        self.slopes.len()
    }

    pub fn domain(&self) -> (T, T) {
        (
            self.breakpoints[0].phase_deg,
            self.breakpoints[self.breakpoints.len() - 1].phase_deg,
        )
    }

    fn check_domain(&self, phase_delta: T) -> Result<()> {
        let (lo, hi) = self.domain();
        if phase_delta.is_nan() || phase_delta < lo || phase_delta > hi {
            return Err(Error::OutOfDomain {
                phase_deg: phase_delta.to_f64_lossy(),
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Index of the segment whose interval contains `phase_delta`; a value
    /// sitting on a shared breakpoint resolves to the lower-index segment.
    fn segment_of(&self, phase_delta: T) -> usize {
        let below = self.breakpoints.partition_point(|bp| bp.phase_deg < phase_delta);
        below.saturating_sub(1).min(self.slopes.len() - 1)
    }

    /// Response time of a single phase change, evaluated on the segment that
    /// contains it.
    pub fn eval_piecewise(&self, phase_delta: T) -> Result<T> {
        self.check_domain(phase_delta)?;
        let i = self.segment_of(phase_delta);
        Ok(self.slopes[i] * phase_delta + self.intercepts[i])
    }

    /// Response time as the maximum over all affine pieces.
    pub fn eval_max_affine(&self, phase_delta: T) -> Result<T> {
        self.check_domain(phase_delta)?;
        Ok(self
            .slopes
            .iter()
            .zip(&self.intercepts)
            .map(|(&a, &b)| a * phase_delta + b)
            .fold(T::neg_infinity(), T::max))
    }

    /// Switching time between two profiles: the slowest control dominates.
    pub fn profile_transition_time(&self, prev: &PhaseProfile, next: &PhaseProfile) -> Result<T> {
        prev.check_compatible(next)?;
        let cb = prev.codebook();
        prev.indices()
            .iter()
            .zip(next.indices())
            .try_fold(T::zero(), |acc, (&from, &to)| {
                Ok(acc.max(self.eval_piecewise(cb.delta_deg(from, to))?))
            })
    }

    /// Per-control cost table `cost[g][q] = f(r_q - phi_prev,g)`.
    pub fn transition_costs(&self, prev: &PhaseProfile, codebook: PhaseCodebook) -> Result<Vec<Vec<T>>> {
        if prev.codebook() != codebook {
            return Err(Error::ShapeMismatch(format!(
                "profile over Q={} used with codebook Q={}",
                prev.codebook().len(),
                codebook.len()
            )));
        }
        prev.indices()
            .iter()
            .map(|&from| {
                (0..codebook.len())
                    .map(|q| self.eval_piecewise(codebook.delta_deg(from, q)))
                    .collect()
            })
            .collect()
    }

    /// Sorted, deduplicated response times reachable from `prev` by moving
    /// any single control to any codebook entry. The optimal threshold of a
    /// single-beam design is always one of these.
    pub fn candidate_thresholds(&self, prev: &PhaseProfile, codebook: PhaseCodebook) -> Result<Vec<T>> {
        let costs = self.transition_costs(prev, codebook)?;
        Ok(sorted_unique(costs.into_iter().flatten()))
    }
}

pub(crate) fn sorted_unique<T: Real>(values: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = values.into_iter().collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite response times"));
    v.dedup();
    v
}

/// Raw `(phase change, settling time)` measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSamples<T> {
    points: Vec<(T, T)>,
}

impl<T: Real> ResponseSamples<T> {
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        for (i, &(phi, t)) in points.iter().enumerate() {
            if !phi.is_finite() || !t.is_finite() {
                return Err(Error::NonFiniteSample(i));
            }
            if phi < T::lit(MIN_PHASE_DEG) || phi > T::lit(MAX_PHASE_DEG) {
                return Err(Error::OutOfDomain {
                    phase_deg: phi.to_f64_lossy(),
                    lo: MIN_PHASE_DEG,
                    hi: MAX_PHASE_DEG,
                });
            }
            if t < T::zero() {
                return Err(Error::Validation(format!("sample {i} has negative time {t}")));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    /// Samples sorted by phase with duplicate phases averaged.
    fn distinct(&self) -> Vec<(T, T)> {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let mut out: Vec<(T, T, usize)> = Vec::with_capacity(pts.len());
        for (phi, t) in pts {
            match out.last_mut() {
                Some(last) if last.0 == phi => {
                    last.1 = last.1 + t;
                    last.2 += 1;
                }
                _ => out.push((phi, t, 1)),
            }
        }
        out.into_iter()
            .map(|(phi, sum, n)| (phi, sum / T::from_count(n)))
            .collect()
    }
}

/// Linear interpolation through sorted points, extending the end segments
/// beyond the sampled range.
fn interpolate<T: Real>(pts: &[(T, T)], x: T) -> T {
    let k = pts.partition_point(|p| p.0 < x);
    if k < pts.len() && pts[k].0 == x {
        return pts[k].1;
    }
    let k = k.clamp(1, pts.len() - 1);
    let (x0, y0) = pts[k - 1];
    let (x1, y1) = pts[k];
    y0 + (x - x0) * (y1 - y0) / (x1 - x0)
}

/// Weighted pool-adjacent-violators: nondecreasing fit minimizing
/// `sum w_i (t_i - y_i)^2`.
pub(crate) fn pav_nondecreasing<T: Real>(values: &[T], weights: &[T]) -> Vec<T> {
    // (mean, total weight, run length)
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(values.len());
    for (&y, &w) in values.iter().zip(weights) {
        blocks.push((y, w, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (m1, w1, l1) = blocks[n - 2];
            let (m2, w2, l2) = blocks[n - 1];
            if m1 <= m2 {
                break;
            }
            let w = w1 + w2;
            blocks.truncate(n - 2);
            blocks.push(((m1 * w1 + m2 * w2) / w, w, l1 + l2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, len)| std::iter::repeat_n(m, len))
        .collect()
}

/// Fits a convex model with `breakpoint_count` breakpoints to raw samples.
///
/// Breakpoints are spread uniformly over `[-360, 360]` with one of them at 0.
/// Ordinates come from linear interpolation of the samples. The segment
/// slopes are then projected onto nondecreasing sequences that are `<= 0`
/// left of zero and `>= 0` right of it (weighted PAV followed by clipping),
/// and the ordinates are rebuilt from `w(0) = 0`.
pub fn fit_model<T: Real>(samples: &ResponseSamples<T>, breakpoint_count: usize) -> Result<ResponseTimeModel<T>> {
    let pts = samples.distinct();
    let has_neg = pts.iter().any(|p| p.0 < T::zero());
    let has_pos = pts.iter().any(|p| p.0 > T::zero());
    let has_zero = pts.iter().any(|p| p.0 == T::zero());
    if pts.len() < 3 || !((has_neg && has_pos) || has_zero) {
        return Err(Error::TooFewSamples(format!(
            "{} distinct phases; need at least 3 spanning both signs or including 0",
            pts.len()
        )));
    }
    if breakpoint_count < 3 || breakpoint_count > pts.len() + 2 {
        return Err(Error::TooFewSamples(format!(
            "breakpoint count {breakpoint_count} must lie in [3, {}]",
            pts.len() + 2
        )));
    }

    let lo = T::lit(MIN_PHASE_DEG);
    let span = T::lit(MAX_PHASE_DEG - MIN_PHASE_DEG);
    let last = breakpoint_count - 1;
    let mut grid: Vec<T> = (0..breakpoint_count)
        .map(|i| lo + span * T::from_count(i) / T::from_count(last))
        .collect();
    grid[last] = T::lit(MAX_PHASE_DEG);
    if !grid.contains(&T::zero()) {
        let nearest = (1..last)
            .min_by(|&i, &j| grid[i].abs().partial_cmp(&grid[j].abs()).expect("finite"))
            .expect("at least one interior breakpoint");
        grid[nearest] = T::zero();
    }
    let zero_at = grid.iter().position(|&c| c == T::zero()).expect("zero inserted");

    let y: Vec<T> = grid.iter().map(|&c| interpolate(&pts, c).max(T::zero())).collect();
    let widths: Vec<T> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    let raw_slopes: Vec<T> = y.windows(2).zip(&widths).map(|(w, &d)| (w[1] - w[0]) / d).collect();
    let slopes: Vec<T> = pav_nondecreasing(&raw_slopes, &widths)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            if i < zero_at {
                s.min(T::zero())
            } else {
                s.max(T::zero())
            }
        })
        .collect();

    let time_ms = if slopes == raw_slopes && y[zero_at] == T::zero() {
        y
    } else {
        let mut w = vec![T::zero(); breakpoint_count];
        for i in zero_at..last {
            w[i + 1] = w[i] + slopes[i] * widths[i];
        }
        for i in (0..zero_at).rev() {
            w[i] = (w[i + 1] - slopes[i] * widths[i]).max(T::zero());
        }
        w
    };

    ResponseTimeModel::new(
        grid.into_iter()
            .zip(time_ms)
            .map(|(phase_deg, time_ms)| Breakpoint { phase_deg, time_ms })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ResponseTimeModel<f64> {
        ResponseTimeModel::default_model()
    }

    /// Default-curve amplitude for the positive branch, computed by hand from
    /// the 315/360 deg chord through the +320 deg anchor.
    fn hand_pos_amp() -> f64 {
        let u = |p: f64| (p / 160.0).exp() - 1.0;
        let chord = u(315.0) + (5.0 / 45.0) * (u(360.0) - u(315.0));
        20.0 / chord
    }

    #[test]
    fn default_model_shape() {
        let m = model();
        assert_eq!(m.breakpoints().len(), 17);
        assert_eq!(m.segment_count(), 16);
        assert_eq!(m.domain(), (-360.0, 360.0));
    }

    #[test]
    fn default_model_anchors() {
        let m = model();
        assert!((m.eval_piecewise(320.0).unwrap() - 20.0).abs() < 1e-12);
        assert!((m.eval_piecewise(-320.0).unwrap() - 80.0).abs() < 1e-12);
        assert_eq!(m.eval_piecewise(0.0).unwrap(), 0.0);
        assert_eq!(m.eval_max_affine(0.0).unwrap(), 0.0);
    }

    #[test]
    fn default_model_chord_at_160() {
        let a = hand_pos_amp();
        let u = |p: f64| (p / 160.0).exp() - 1.0;
        let w135 = a * u(135.0);
        let w180 = a * u(180.0);
        let expected = w135 + (25.0 / 45.0) * (w180 - w135);
        let got = model().eval_piecewise(160.0).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn default_model_negative_breakpoint() {
        let b = 4.0 * hand_pos_amp();
        let expected = b * ((45.0f64 / 160.0).exp() - 1.0);
        let got = model().eval_piecewise(-45.0).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let m = model();
        assert!(matches!(m.eval_piecewise(360.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(m.eval_max_affine(-400.0), Err(Error::OutOfDomain { .. })));
        assert!(m.eval_piecewise(f64::NAN).is_err());
        assert!(m.eval_piecewise(360.0).is_ok());
        assert!(m.eval_piecewise(-360.0).is_ok());
    }

    #[test]
    fn breakpoints_use_lower_segment() {
        let m = model();
        for bp in m.breakpoints() {
            let v = m.eval_piecewise(bp.phase_deg).unwrap();
            assert!((v - bp.time_ms).abs() <= 1e-12 * bp.time_ms.max(1.0));
        }
    }

    #[test]
    fn invalid_models_rejected() {
        let bp = |p: f64, t: f64| Breakpoint {
            phase_deg: p,
            time_ms: t,
        };
        // concave
        let concave = vec![bp(-360.0, 10.0), bp(0.0, 0.0), bp(180.0, 50.0), bp(360.0, 60.0)];
        assert!(ResponseTimeModel::new(concave).is_err());
        // does not cover domain
        assert!(ResponseTimeModel::new(vec![bp(-300.0, 10.0), bp(0.0, 0.0), bp(360.0, 5.0)]).is_err());
        // no zero breakpoint
        assert!(ResponseTimeModel::new(vec![bp(-360.0, 10.0), bp(1.0, 0.0), bp(360.0, 5.0)]).is_err());
        // negative time
        assert!(ResponseTimeModel::new(vec![bp(-360.0, -1.0), bp(0.0, 0.0), bp(360.0, 5.0)]).is_err());
        // unsorted
        assert!(ResponseTimeModel::new(vec![bp(0.0, 0.0), bp(-360.0, 1.0), bp(360.0, 5.0)]).is_err());
    }

    #[test]
    fn transition_time_of_profiles() {
        let m = model();
        let cb = PhaseCodebook::new(36).unwrap();
        let p = PhaseProfile::new(cb, vec![4, 32]).unwrap();
        assert_eq!(m.profile_transition_time(&p, &p).unwrap(), 0.0);
        // deltas +320 and -320
        let a = PhaseProfile::new(cb, vec![0, 32]).unwrap();
        let b = PhaseProfile::new(cb, vec![32, 0]).unwrap();
        let t = m.profile_transition_time(&a, &b).unwrap();
        assert!((t - 80.0).abs() < 1e-12);
        let other = PhaseProfile::zeros(PhaseCodebook::new(8).unwrap(), 2);
        assert!(matches!(
            m.profile_transition_time(&a, &other),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn candidates_enumerate_single_control() {
        let m = model();
        let cb = PhaseCodebook::new(2).unwrap();
        let prev = PhaseProfile::zeros(cb, 1);
        let c = m.candidate_thresholds(&prev, cb).unwrap();
        assert_eq!(c, vec![0.0, m.eval_piecewise(180.0).unwrap()]);

        let cb4 = PhaseCodebook::new(4).unwrap();
        let prev = PhaseProfile::new(cb4, vec![2]).unwrap();
        let c = m.candidate_thresholds(&prev, cb4).unwrap();
        let mut expected: Vec<f64> = [-180.0, -90.0, 0.0, 90.0]
            .iter()
            .map(|&d| m.eval_piecewise(d).unwrap())
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(c, expected);
        assert!(m.eval_piecewise(-90.0).unwrap() > m.eval_piecewise(90.0).unwrap());
    }

    #[test]
    fn fit_three_points() {
        let s = ResponseSamples::<f64>::new(vec![(-360.0, 80.0), (0.0, 0.0), (360.0, 20.0)]).unwrap();
        let m = fit_model(&s, 3).unwrap();
        assert_eq!(m.segment_count(), 2);
        assert!((m.slopes()[0] - (-80.0 / 360.0)).abs() < 1e-15);
        assert!((m.slopes()[1] - 20.0 / 360.0).abs() < 1e-15);
    }

    #[test]
    fn fit_reproduces_convex_input() {
        let d = model();
        let s = ResponseSamples::new(d.breakpoints().iter().map(|b| (b.phase_deg, b.time_ms)).collect()).unwrap();
        let m = fit_model(&s, 17).unwrap();
        assert_eq!(m, d);
    }

    #[test]
    fn fit_rejects_bad_samples() {
        assert!(matches!(
            ResponseSamples::new(vec![(0.0, f64::NAN)]),
            Err(Error::NonFiniteSample(0))
        ));
        let two = ResponseSamples::new(vec![(-10.0, 1.0), (10.0, 1.0)]).unwrap();
        assert!(matches!(fit_model(&two, 3), Err(Error::TooFewSamples(_))));
        let one_side = ResponseSamples::new(vec![(10.0, 1.0), (20.0, 2.0), (30.0, 4.0)]).unwrap();
        assert!(matches!(fit_model(&one_side, 3), Err(Error::TooFewSamples(_))));
        let ok = ResponseSamples::new(vec![(0.0, 0.0), (90.0, 2.0), (180.0, 5.0)]).unwrap();
        assert!(matches!(fit_model(&ok, 6), Err(Error::TooFewSamples(_))));
        let m = fit_model(&ok, 4).unwrap();
        assert_eq!(m.breakpoints().len(), 4);
        assert!(m.breakpoints().iter().any(|b| b.phase_deg == 0.0));
    }

    #[test]
    fn pav_pools_violators() {
        let t = pav_nondecreasing(&[1.0, 3.0, 2.0, 4.0], &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(t, vec![1.0, 2.5, 2.5, 4.0]);
        let t = pav_nondecreasing(&[3.0, 1.0], &[1.0, 3.0]);
        assert_eq!(t, vec![1.5, 1.5]);
    }

    #[test]
    fn works_in_single_precision() {
        let m = ResponseTimeModel::<f32>::default_model();
        assert!((m.eval_piecewise(320.0).unwrap() - 20.0).abs() < 1e-3);
        assert_eq!(m.eval_piecewise(0.0).unwrap(), 0.0);
    }
}
