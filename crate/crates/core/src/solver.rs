//! Beam designers.
//!
//! * [`solve_legacy`] maximizes the real part of every beam independently and
//!   ignores switching time.
//! * [`solve_single_beam`] finds the fastest switch from a known profile that
//!   still meets an SNR threshold. The real-part constraint is separable per
//!   control and the response time only takes finitely many values over the
//!   codebook, so the minimum is found exactly by a binary search over those
//!   values.
//! * [`solve_joint`] designs a whole sequence of beams, minimizing the summed
//!   switching time. It warm-starts from the chained single-beam solution and
//!   then improves one beam at a time with an exact search over the pair of
//!   thresholds of its incoming and outgoing transitions.
//! * [`brute_force_single`] and [`brute_force_joint`] enumerate every profile
//!   and serve as oracles on small instances.
//!
//! An SNR threshold `alpha` is met when `(delta K / sigma) Re{sum_g C_g x_g}`
//! is at least `sqrt(alpha)`; `alpha = 0` means no requirement. Ties are
//! broken the same way everywhere: larger real part, then smaller response
//! time, then smaller codebook index.

use std::cmp::Ordering;

use num_complex::Complex;

use crate::channel::CouplingSet;
use crate::codebook::{PhaseCodebook, PhaseProfile};
use crate::error::{Error, Result};
use crate::response_model::{sorted_unique, ResponseTimeModel};
use crate::scalar::Real;

/// Largest `log2` of the search space the exhaustive oracles accept.
pub const MAX_BRUTE_FORCE_BITS: f64 = 24.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub profile: PhaseProfile,
    /// Switching time from the previous profile, in ms.
    pub tau_ms: T,
    /// `(delta K / sigma) Re{sum_g C_g x_g}`.
    pub achieved_re: T,
    pub achieved_snr: T,
    pub threshold_snr: T,
    pub feasible: bool,
}

impl<T: Real> SolveResult<T> {
    /// Scores an arbitrary profile against a threshold.
    pub fn evaluate(
        coupling: &CouplingSet<T>,
        model: &ResponseTimeModel<T>,
        prev: &PhaseProfile,
        profile: PhaseProfile,
        alpha: T,
    ) -> Result<Self> {
        let tau_ms = model.profile_transition_time(prev, &profile)?;
        let (feasible, achieved_re) = check_feasibility(coupling, &profile, alpha)?;
        Ok(Self {
            achieved_snr: coupling.snr(&profile)?,
            profile,
            tau_ms,
            achieved_re,
            threshold_snr: alpha,
            feasible,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSolveResult<T> {
    pub beams: Vec<SolveResult<T>>,
    pub total_ms: T,
}

impl<T: Real> JointSolveResult<T> {
    fn from_beams(beams: Vec<SolveResult<T>>) -> Self {
        let total_ms = beams.iter().fold(T::zero(), |acc, b| acc + b.tau_ms);
        Self { beams, total_ms }
    }

    pub fn profiles(&self) -> Vec<PhaseProfile> {
        self.beams.iter().map(|b| b.profile.clone()).collect()
    }

    pub fn tau_ms(&self) -> Vec<T> {
        self.beams.iter().map(|b| b.tau_ms).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointOptions {
    pub max_sweeps: usize,
}

impl Default for JointOptions {
    fn default() -> Self {
        Self { max_sweeps: 50 }
    }
}

fn meets_threshold<T: Real>(achieved_re: T, alpha: T) -> bool {
    alpha == T::zero() || achieved_re >= alpha.sqrt()
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(Error::Validation(format!(
            "SNR threshold must be finite and nonnegative (got {alpha})"
        )));
    }
    Ok(())
}

/// Whether `profile` satisfies the real-part form of the SNR constraint, and
/// the achieved `(delta K / sigma) Re{sum_g C_g x_g}`. A satisfied real-part
/// constraint implies the magnitude constraint `SNR >= alpha`.
pub fn check_feasibility<T: Real>(coupling: &CouplingSet<T>, profile: &PhaseProfile, alpha: T) -> Result<(bool, T)> {
    let re = coupling.real_part(profile)?;
    Ok((meets_threshold(re, alpha), re))
}

/// `re[g][q] = Re{C_g s_q}`, matching the arithmetic of
/// [`CouplingSet::real_part`].
fn real_table<T: Real>(coupling: &CouplingSet<T>, codebook: PhaseCodebook) -> Vec<Vec<T>> {
    let points: Vec<Complex<T>> = codebook.points();
    coupling
        .coeffs()
        .iter()
        .map(|&c| points.iter().map(|&s| (c * s).re).collect())
        .collect()
}

fn check_shapes<T: Real>(coupling: &CouplingSet<T>, codebook: PhaseCodebook, prev: &PhaseProfile) -> Result<()> {
    if prev.codebook() != codebook {
        return Err(Error::ShapeMismatch(format!(
            "profile over Q={} used with codebook Q={}",
            prev.codebook().len(),
            codebook.len()
        )));
    }
    if prev.len() != coupling.len() {
        return Err(Error::ShapeMismatch(format!(
            "profile has {} controls, link has {}",
            prev.len(),
            coupling.len()
        )));
    }
    Ok(())
}

/// Per-control choice of the admissible entry with the largest real part.
/// `cost` orders ties; `admissible` filters entries. Returns `None` when some
/// control has no admissible entry.
fn best_choice<T: Real>(
    re: &[Vec<T>],
    cost: impl Fn(usize, usize) -> T,
    admissible: impl Fn(usize, usize) -> bool,
) -> Option<(T, Vec<usize>)> {
    let mut sum = T::zero();
    let mut choice = Vec::with_capacity(re.len());
    for (g, row) in re.iter().enumerate() {
        let mut best: Option<usize> = None;
        for q in 0..row.len() {
            if !admissible(g, q) {
                continue;
            }
            best = match best {
                None => Some(q),
                Some(b) if row[q] > row[b] || (row[q] == row[b] && cost(g, q) < cost(g, b)) => Some(q),
                keep => keep,
            };
        }
        let q = best?;
        sum = sum + row[q];
        choice.push(q);
    }
    Some((sum, choice))
}

/// Largest `(delta K / sigma) sum_g max Re{C_g s_q}` over entries whose
/// response time from `prev` is at most `tau`. Nondecreasing in `tau`.
pub fn achievable_real_part<T: Real>(
    coupling: &CouplingSet<T>,
    model: &ResponseTimeModel<T>,
    codebook: PhaseCodebook,
    prev: &PhaseProfile,
    tau: T,
) -> Result<Option<T>> {
    check_shapes(coupling, codebook, prev)?;
    let costs = model.transition_costs(prev, codebook)?;
    let re = real_table(coupling, codebook);
    Ok(best_choice(&re, |g, q| costs[g][q], |g, q| costs[g][q] <= tau).map(|(s, _)| coupling.gain() * s))
}

/// Independent per-beam SNR maximization. Ties go to the entry that is
/// faster to reach from the previous Legacy profile (the first beam starts
/// from `initial`).
pub fn solve_legacy<T: Real, S: AsRef<CouplingSet<T>>>(
    links: &[S],
    model: &ResponseTimeModel<T>,
    codebook: PhaseCodebook,
    initial: &PhaseProfile,
) -> Result<Vec<PhaseProfile>> {
    let mut prev = initial.clone();
    let mut out = Vec::with_capacity(links.len());
    for link in links {
        let coupling = link.as_ref();
        check_shapes(coupling, codebook, &prev)?;
        let costs = model.transition_costs(&prev, codebook)?;
        let re = real_table(coupling, codebook);
        let (_, choice) = best_choice(&re, |g, q| costs[g][q], |_, _| true).expect("codebook is nonempty");
        let profile = PhaseProfile::new(codebook, choice)?;
        prev = profile.clone();
        out.push(profile);
    }
    Ok(out)
}

/// Fastest switch away from `prev` meeting SNR threshold `alpha`.
pub fn solve_single_beam<T: Real>(
    coupling: &CouplingSet<T>,
    model: &ResponseTimeModel<T>,
    codebook: PhaseCodebook,
    prev: &PhaseProfile,
    alpha: T,
) -> Result<SolveResult<T>> {
    check_shapes(coupling, codebook, prev)?;
    check_alpha(alpha)?;
    let costs = model.transition_costs(prev, codebook)?;
    let re = real_table(coupling, codebook);
    let gain = coupling.gain();
    let candidates = sorted_unique(costs.iter().flatten().copied());

    let at =
        |tau: T| best_choice(&re, |g, q| costs[g][q], |g, q| costs[g][q] <= tau).expect("prev is always admissible");
    let feasible = |tau: T| meets_threshold(gain * at(tau).0, alpha);

    let top = *candidates.last().expect("at least the zero-change cost");
    if !feasible(top) {
        return Err(Error::Infeasible {
            beam: 0,
            best_re: (gain * at(top).0).to_f64_lossy(),
            required: alpha.sqrt().to_f64_lossy(),
        });
    }
    // first feasible candidate
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let (_, choice) = at(candidates[lo]);
    SolveResult::evaluate(coupling, model, prev, PhaseProfile::new(codebook, choice)?, alpha)
}

fn search_bits(codebook: PhaseCodebook, variables: usize) -> f64 {
    variables as f64 * (codebook.len() as f64).log2()
}

/// Decodes a flat profile number into per-control indices (control 0 least
/// significant).
fn decode(mut code: usize, q: usize, controls: usize, out: &mut [usize]) {
    for slot in out.iter_mut().take(controls) {
        *slot = code % q;
        code /= q;
    }
}

/// Compares two profiles of equal switching time: larger real part first,
/// then per-control `(cost, index)` lexicographically.
fn tie_order<T: Real>(
    re_a: T,
    re_b: T,
    a: &[usize],
    b: &[usize],
    cost_a: impl Fn(usize, usize) -> T,
    cost_b: impl Fn(usize, usize) -> T,
) -> Ordering {
    match re_b.partial_cmp(&re_a).expect("finite") {
        Ordering::Equal => {}
        other => return other,
    }
    for (g, (&qa, &qb)) in a.iter().zip(b).enumerate() {
        let key = cost_a(g, qa)
            .partial_cmp(&cost_b(g, qb))
            .expect("finite")
            .then(qa.cmp(&qb));
        if key != Ordering::Equal {
            return key;
        }
    }
    Ordering::Equal
}

/// Exhaustive single-beam search over all `Q^G` profiles.
pub fn brute_force_single<T: Real>(
    coupling: &CouplingSet<T>,
    model: &ResponseTimeModel<T>,
    codebook: PhaseCodebook,
    prev: &PhaseProfile,
    alpha: T,
) -> Result<SolveResult<T>> {
    check_shapes(coupling, codebook, prev)?;
    check_alpha(alpha)?;
    let controls = coupling.len();
    let bits = search_bits(codebook, controls);
    if bits > MAX_BRUTE_FORCE_BITS {
        return Err(Error::InstanceTooLarge(format!(
            "{controls} controls x log2({}) = {bits:.1} bits",
            codebook.len()
        )));
    }
    let q = codebook.len();
    let costs = model.transition_costs(prev, codebook)?;
    let re = real_table(coupling, codebook);
    let gain = coupling.gain();
    let total = q.pow(controls as u32);

    let mut current = vec![0; controls];
    let mut best: Option<(T, T, Vec<usize>)> = None;
    let mut best_re_any = T::neg_infinity();
    for code in 0..total {
        decode(code, q, controls, &mut current);
        let sum = current
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (g, &qg)| acc + re[g][qg]);
        let achieved = gain * sum;
        best_re_any = best_re_any.max(achieved);
        if !meets_threshold(achieved, alpha) {
            continue;
        }
        let tau = current
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (g, &qg)| acc.max(costs[g][qg]));
        let better = match &best {
            None => true,
            Some((bt, bre, bp)) => match tau.partial_cmp(bt).expect("finite") {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    tie_order(achieved, *bre, &current, bp, |g, qg| costs[g][qg], |g, qg| costs[g][qg])
                        == Ordering::Less
                }
            },
        };
        if better {
            best = Some((tau, achieved, current.clone()));
        }
    }
    match best {
        Some((_, _, choice)) => {
            SolveResult::evaluate(coupling, model, prev, PhaseProfile::new(codebook, choice)?, alpha)
        }
        None => Err(Error::Infeasible {
            beam: 0,
            best_re: best_re_any.to_f64_lossy(),
            required: alpha.sqrt().to_f64_lossy(),
        }),
    }
}

fn check_joint_inputs<T: Real, S: AsRef<CouplingSet<T>>>(
    links: &[S],
    codebook: PhaseCodebook,
    initial: &PhaseProfile,
    alphas: &[T],
) -> Result<()> {
    if links.is_empty() {
        return Err(Error::Validation("joint design needs at least one beam".into()));
    }
    if alphas.len() != links.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} thresholds for {} beams",
            alphas.len(),
            links.len()
        )));
    }
    for (link, &alpha) in links.iter().zip(alphas) {
        check_shapes(link.as_ref(), codebook, initial)?;
        check_alpha(alpha)?;
    }
    Ok(())
}

fn with_beam(err: Error, beam: usize) -> Error {
    match err {
        Error::Infeasible { best_re, required, .. } => Error::Infeasible {
            beam,
            best_re,
            required,
        },
        other => other,
    }
}

/// Depth-first enumeration of feasible profile sequences.
struct JointSearch<'a, T> {
    /// feasible `(profile code, achieved real part)` per beam
    options: &'a [Vec<(usize, T)>],
    digits: &'a [Vec<usize>],
    /// `step[a][b] = f(r_b - r_a)`
    step: &'a [Vec<T>],
    initial: &'a [usize],
    chosen: Vec<usize>,
    re: Vec<T>,
    best: Option<(T, Vec<usize>, Vec<T>)>,
}

impl<T: Real> JointSearch<'_, T> {
    fn predecessor<'s>(&'s self, seq: &[usize], l: usize) -> &'s [usize] {
        if l == 0 {
            self.initial
        } else {
            &self.digits[seq[l - 1]]
        }
    }

    fn transition(&self, from: &[usize], to: &[usize]) -> T {
        from.iter()
            .zip(to)
            .fold(T::zero(), |acc, (&a, &b)| acc.max(self.step[a][b]))
    }

    /// Tie order between the current sequence and the incumbent, beam by beam.
    fn beats_incumbent(&self, seq: &[usize], re: &[T]) -> bool {
        let Some((_, best_seq, best_re)) = &self.best else {
            return true;
        };
        for l in 0..seq.len() {
            let from_a = self.predecessor(seq, l);
            let from_b = self.predecessor(best_seq, l);
            let ord = tie_order(
                re[l],
                best_re[l],
                &self.digits[seq[l]],
                &self.digits[best_seq[l]],
                |g, q| self.step[from_a[g]][q],
                |g, q| self.step[from_b[g]][q],
            );
            if ord != Ordering::Equal {
                return ord == Ordering::Less;
            }
        }
        false
    }

    fn descend(&mut self, partial: T) {
        if let Some((best_total, _, _)) = &self.best {
            if partial > *best_total {
                return;
            }
        }
        let l = self.chosen.len();
        if l == self.options.len() {
            let better = match &self.best {
                None => true,
                Some((best_total, _, _)) => {
                    partial < *best_total || (partial == *best_total && self.beats_incumbent(&self.chosen, &self.re))
                }
            };
            if better {
                self.best = Some((partial, self.chosen.clone(), self.re.clone()));
            }
            return;
        }
        let options = self.options;
        for &(code, re) in &options[l] {
            let tau = self.transition(self.predecessor(&self.chosen, l), &self.digits[code]);
            self.chosen.push(code);
            self.re.push(re);
            self.descend(partial + tau);
            self.chosen.pop();
            self.re.pop();
        }
    }
}

/// Exhaustive minimum of the summed switching time over all `Q^(G L)`
/// profile sequences meeting every threshold.
pub fn brute_force_joint<T: Real, S: AsRef<CouplingSet<T>>>(
    links: &[S],
    model: &ResponseTimeModel<T>,
    codebook: PhaseCodebook,
    initial: &PhaseProfile,
    alphas: &[T],
) -> Result<JointSolveResult<T>> {
    check_joint_inputs(links, codebook, initial, alphas)?;
    let controls = initial.len();
    let beams = links.len();
    let bits = search_bits(codebook, controls * beams);
    if bits > MAX_BRUTE_FORCE_BITS {
        return Err(Error::InstanceTooLarge(format!(
            "{beams} beams x {controls} controls x log2({}) = {bits:.1} bits",
            codebook.len()
        )));
    }
    let q = codebook.len();
    let per_beam = q.pow(controls as u32);
    let digits: Vec<Vec<usize>> = (0..per_beam)
        .map(|code| {
            let mut d = vec![0; controls];
            decode(code, q, controls, &mut d);
            d
        })
        .collect();
    // step[a][b] = f(r_b - r_a)
    let step: Vec<Vec<T>> = (0..q)
        .map(|a| {
            (0..q)
                .map(|b| model.eval_piecewise(codebook.delta_deg(a, b)))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    // feasible profiles and their real parts, per beam
    let mut options: Vec<Vec<(usize, T)>> = Vec::with_capacity(beams);
    for (l, (link, &alpha)) in links.iter().zip(alphas).enumerate() {
        let coupling = link.as_ref();
        let re = real_table(coupling, codebook);
        let mut best_re = T::neg_infinity();
        let feasible: Vec<(usize, T)> = digits
            .iter()
            .enumerate()
            .filter_map(|(code, d)| {
                let sum = d.iter().enumerate().fold(T::zero(), |acc, (g, &qg)| acc + re[g][qg]);
                let achieved = coupling.gain() * sum;
                best_re = best_re.max(achieved);
                meets_threshold(achieved, alpha).then_some((code, achieved))
            })
            .collect();
        if feasible.is_empty() {
            return Err(Error::Infeasible {
                beam: l,
                best_re: best_re.to_f64_lossy(),
                required: alpha.sqrt().to_f64_lossy(),
            });
        }
        options.push(feasible);
    }

    let mut search = JointSearch {
        options: &options,
        digits: &digits,
        step: &step,
        initial: initial.indices(),
        chosen: Vec::with_capacity(beams),
        re: Vec::with_capacity(beams),
        best: None,
    };
    search.descend(T::zero());
    let (_, seq, _) = search.best.expect("every beam has a feasible profile");

    let mut prev = initial.clone();
    let mut results = Vec::with_capacity(beams);
    for ((link, &alpha), code) in links.iter().zip(alphas).zip(seq) {
        let profile = PhaseProfile::new(codebook, digits[code].clone())?;
        let r = SolveResult::evaluate(link.as_ref(), model, &prev, profile, alpha)?;
        prev = r.profile.clone();
        results.push(r);
    }
    Ok(JointSolveResult::from_beams(results))
}

/// Re-optimizes interior beam `l` given its fixed neighbours: exact search
/// over pairs of incoming/outgoing thresholds. Returns the new profile when
/// it strictly lowers `tau_in + tau_out`.
fn improve_interior<T: Real>(
    coupling: &CouplingSet<T>,
    model: &ResponseTimeModel<T>,
    codebook: PhaseCodebook,
    prev: &PhaseProfile,
    next: &PhaseProfile,
    alpha: T,
    current_total: T,
) -> Result<Option<(PhaseProfile, T, T)>> {
    let q = codebook.len();
    let cin = model.transition_costs(prev, codebook)?;
    let cout: Vec<Vec<T>> = next
        .indices()
        .iter()
        .map(|&to| {
            (0..q)
                .map(|from| model.eval_piecewise(codebook.delta_deg(from, to)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let re = real_table(coupling, codebook);
    let gain = coupling.gain();
    let tin_cands = sorted_unique(cin.iter().flatten().copied());
    let tout_cands = sorted_unique(cout.iter().flatten().copied());
    let tout_max = *tout_cands.last().expect("nonempty");

    let pick = |tin: T, tout: T| {
        best_choice(
            &re,
            |g, qq| cin[g][qq] + cout[g][qq],
            |g, qq| cin[g][qq] <= tin && cout[g][qq] <= tout,
        )
    };
    let feasible = |tin: T, tout: T| pick(tin, tout).is_some_and(|(s, _)| meets_threshold(gain * s, alpha));

    let mut best_total = current_total;
    let mut best: Option<(PhaseProfile, T, T)> = None;
    for &tin in &tin_cands {
        if tin >= best_total {
            break;
        }
        if !feasible(tin, tout_max) {
            continue;
        }
        let (mut lo, mut hi) = (0, tout_cands.len() - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if feasible(tin, tout_cands[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if tin + tout_cands[lo] >= best_total {
            continue;
        }
        let (_, choice) = pick(tin, tout_cands[lo]).expect("feasible pair has a choice");
        let profile = PhaseProfile::new(codebook, choice)?;
        let tau_in = model.profile_transition_time(prev, &profile)?;
        let tau_out = model.profile_transition_time(&profile, next)?;
        if tau_in + tau_out < best_total {
            best_total = tau_in + tau_out;
            best = Some((profile, tau_in, tau_out));
        }
    }
    Ok(best)
}

/// Designs `L` consecutive beams minimizing the summed switching time.
///
/// The result never exceeds the chained single-beam total: moves are only
/// accepted when they strictly lower the objective.
pub fn solve_joint<T: Real, S: AsRef<CouplingSet<T>>>(
    links: &[S],
    model: &ResponseTimeModel<T>,
    codebook: PhaseCodebook,
    initial: &PhaseProfile,
    alphas: &[T],
    options: JointOptions,
) -> Result<JointSolveResult<T>> {
    check_joint_inputs(links, codebook, initial, alphas)?;
    let beams = links.len();

    let mut profiles: Vec<PhaseProfile> = Vec::with_capacity(beams);
    let mut taus: Vec<T> = Vec::with_capacity(beams);
    for (l, (link, &alpha)) in links.iter().zip(alphas).enumerate() {
        let prev = profiles.last().unwrap_or(initial);
        let r = solve_single_beam(link.as_ref(), model, codebook, prev, alpha).map_err(|e| with_beam(e, l))?;
        taus.push(r.tau_ms);
        profiles.push(r.profile);
    }

    for _ in 0..options.max_sweeps {
        let mut improved = false;
        for l in 0..beams {
            let prev = if l == 0 {
                initial.clone()
            } else {
                profiles[l - 1].clone()
            };
            if l + 1 < beams {
                let current = taus[l] + taus[l + 1];
                if let Some((p, tin, tout)) = improve_interior(
                    links[l].as_ref(),
                    model,
                    codebook,
                    &prev,
                    &profiles[l + 1],
                    alphas[l],
                    current,
                )? {
                    profiles[l] = p;
                    taus[l] = tin;
                    taus[l + 1] = tout;
                    improved = true;
                }
            } else {
                let r = solve_single_beam(links[l].as_ref(), model, codebook, &prev, alphas[l])
                    .map_err(|e| with_beam(e, l))?;
                if r.tau_ms < taus[l] {
                    taus[l] = r.tau_ms;
                    profiles[l] = r.profile;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }

    let mut prev = initial.clone();
    let mut results = Vec::with_capacity(beams);
    for ((link, &alpha), profile) in links.iter().zip(alphas).zip(profiles) {
        let r = SolveResult::evaluate(link.as_ref(), model, &prev, profile, alpha)?;
        prev = r.profile.clone();
        results.push(r);
    }
    Ok(JointSolveResult::from_beams(results))
}

/// Chained single-beam designs, each starting from the previous result.
pub fn solve_sequential<T: Real, S: AsRef<CouplingSet<T>>>(
    links: &[S],
    model: &ResponseTimeModel<T>,
    codebook: PhaseCodebook,
    initial: &PhaseProfile,
    alphas: &[T],
) -> Result<JointSolveResult<T>> {
    check_joint_inputs(links, codebook, initial, alphas)?;
    let mut prev = initial.clone();
    let mut results = Vec::with_capacity(links.len());
    for (l, (link, &alpha)) in links.iter().zip(alphas).enumerate() {
        let r = solve_single_beam(link.as_ref(), model, codebook, &prev, alpha).map_err(|e| with_beam(e, l))?;
        prev = r.profile.clone();
        results.push(r);
    }
    Ok(JointSolveResult::from_beams(results))
}
