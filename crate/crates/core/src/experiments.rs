//! Evaluation scenarios and their reports.
//!
//! Every scenario compares response-time-aware designs against the Legacy
//! (SNR-only) baseline on the same links. Design thresholds are
//! `alpha_l = kappa^2 * SNR_legacy(l)`.
//!
//! Reports are plain data: per-run rows plus aggregates, written as
//! `runs.csv`, `summary.json`, `hist_<method>.csv` and `cdf_<method>.csv`.
//! Identical inputs give byte-identical files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, DirectionAngles, LinkScenario, RadioParams};
use crate::codebook::{PhaseCodebook, PhaseProfile};
use crate::error::{Error, Result};
use crate::response_model::ResponseTimeModel;
use crate::solver::{self, JointOptions, JointSolveResult, SolveResult};

pub const SINGLE_BEAM_AODS: [f64; 4] = [140.0, 120.0, 60.0, 40.0];
pub const JOINT_BEAM_AODS: [f64; 4] = [135.0, 115.0, 65.0, 45.0];
pub const ANGULAR_SEPARATIONS: [f64; 4] = [5.0, 10.0, 15.0, 30.0];
pub const BEAM_COUNT_STEP_DEG: f64 = 5.0;
pub const MAX_BEAM_COUNT: usize = 10;
pub const QUANTIZATION_AOA_DEG: f64 = 45.0;
/// Threshold used for the "fraction of switches at or below" metric.
pub const FAST_SWITCH_MS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Single,
    Joint,
    Legacy,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Single => "single",
            Method::Joint => "joint",
            Method::Legacy => "legacy",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniform grid of `points` angles over `[lo_deg, hi_deg]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    pub lo_deg: f64,
    pub hi_deg: f64,
    pub points: usize,
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self {
            lo_deg: 40.0,
            hi_deg: 140.0,
            points: 21,
        }
    }
}

impl AngleGrid {
    pub fn angles(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo_deg];
        }
        let step = (self.hi_deg - self.lo_deg) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.hi_deg
                } else {
                    self.lo_deg + step * i as f64
                }
            })
            .collect()
    }
}

/// Everything a scenario needs besides its fixed angles.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    pub geometry: ArrayGeometry<f64>,
    pub radio: RadioParams<f64>,
    pub model: ResponseTimeModel<f64>,
    pub codebook: PhaseCodebook,
    /// Designs must reach `kappa^2` of the Legacy SNR.
    pub kappa: f64,
    pub workers: usize,
    pub bulk_grid: AngleGrid,
    pub quantization_levels: Vec<usize>,
    pub hist_bin_ms: f64,
    pub joint: JointOptions,
}

impl Default for ExperimentSetup {
    fn default() -> Self {
        Self {
            geometry: ArrayGeometry::default_prototype(),
            radio: RadioParams::default(),
            model: ResponseTimeModel::default_model(),
            codebook: PhaseCodebook::new(256).expect("valid"),
            kappa: 0.95,
            workers: 1,
            bulk_grid: AngleGrid::default(),
            quantization_levels: vec![32, 64, 128, 256, 1024],
            hist_bin_ms: 5.0,
            joint: JointOptions::default(),
        }
    }
}

impl ExperimentSetup {
    pub fn link(&self, aoa_deg: f64, aod_deg: f64) -> Result<LinkScenario<f64>> {
        LinkScenario::new(
            self.geometry.clone(),
            self.radio,
            DirectionAngles::azimuth(aoa_deg)?,
            DirectionAngles::azimuth(aod_deg)?,
        )
    }

    pub fn zero_profile(&self) -> PhaseProfile {
        PhaseProfile::zeros(self.codebook, self.geometry.control_count())
    }

    fn with_codebook(&self, codebook: PhaseCodebook) -> Self {
        Self {
            codebook,
            ..self.clone()
        }
    }
}

/// The designs of one scenario: Legacy, chained single-beam and optionally
/// joint, all from the zero profile.
#[derive(Debug, Clone)]
pub struct ReplicaDesign {
    pub aoa_deg: f64,
    pub aods_deg: Vec<f64>,
    pub links: Vec<LinkScenario<f64>>,
    pub alphas: Vec<f64>,
    pub legacy: JointSolveResult<f64>,
    pub single: JointSolveResult<f64>,
    pub joint: Option<JointSolveResult<f64>>,
}

/// Legacy chain from `initial` scored as a sequence, together with the
/// design thresholds it induces.
fn legacy_chain(
    setup: &ExperimentSetup,
    links: &[LinkScenario<f64>],
    initial: &PhaseProfile,
) -> Result<(JointSolveResult<f64>, Vec<f64>)> {
    let profiles = solver::solve_legacy(links, &setup.model, setup.codebook, initial)?;
    let mut prev = initial.clone();
    let mut beams = Vec::with_capacity(links.len());
    let mut alphas = Vec::with_capacity(links.len());
    for (link, profile) in links.iter().zip(profiles) {
        let snr = link.snr(&profile)?;
        let alpha = setup.kappa * setup.kappa * snr;
        let r = SolveResult::evaluate(link.coupling(), &setup.model, &prev, profile, alpha)?;
        prev = r.profile.clone();
        alphas.push(alpha);
        beams.push(r);
    }
    let total_ms = beams.iter().map(|b| b.tau_ms).sum();
    Ok((JointSolveResult { beams, total_ms }, alphas))
}

pub fn replica_design(
    setup: &ExperimentSetup,
    aoa_deg: f64,
    aods_deg: &[f64],
    with_joint: bool,
) -> Result<ReplicaDesign> {
    let links = aods_deg
        .iter()
        .map(|&aod| setup.link(aoa_deg, aod))
        .collect::<Result<Vec<_>>>()?;
    let initial = setup.zero_profile();
    let (legacy, alphas) = legacy_chain(setup, &links, &initial)?;
    let single = solver::solve_sequential(&links, &setup.model, setup.codebook, &initial, &alphas)?;
    let joint = if with_joint {
        Some(solver::solve_joint(
            &links,
            &setup.model,
            setup.codebook,
            &initial,
            &alphas,
            setup.joint,
        )?)
    } else {
        None
    };
    Ok(ReplicaDesign {
        aoa_deg,
        aods_deg: aods_deg.to_vec(),
        links,
        alphas,
        legacy,
        single,
        joint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub method: Method,
    pub beam: usize,
    pub aoa_deg: f64,
    pub aod_prev_deg: f64,
    pub aod_deg: f64,
    pub tau_ms: f64,
    pub snr_linear: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub runs: usize,
    pub total_tau_ms: f64,
    pub mean_tau_ms: f64,
    pub min_tau_ms: f64,
    pub max_tau_ms: f64,
    /// `100 (mean_legacy - mean) / mean_legacy`; absent without Legacy runs.
    pub reduction_vs_legacy_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub label: String,
    pub totals_ms: BTreeMap<Method, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistBin {
    pub bin_low_ms: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub tau_ms: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub kappa: f64,
    pub codebook_size: usize,
    pub methods: BTreeMap<Method, MethodStats>,
    pub groups: Vec<GroupStats>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub summary: Summary,
    pub records: Vec<RunRecord>,
    pub histograms: BTreeMap<Method, Vec<HistBin>>,
    pub cdfs: BTreeMap<Method, Vec<CdfPoint>>,
}

impl ExperimentReport {
    fn assemble(
        name: &str,
        setup: &ExperimentSetup,
        records: Vec<RunRecord>,
        groups: Vec<GroupStats>,
        metrics: BTreeMap<String, f64>,
    ) -> Self {
        let methods = method_stats(&records);
        let histograms = histograms(&records, setup.hist_bin_ms);
        let cdfs = cdfs(&records);
        Self {
            summary: Summary {
                experiment: name.to_string(),
                kappa: setup.kappa,
                codebook_size: setup.codebook.len(),
                methods,
                groups,
                metrics,
            },
            records,
            histograms,
            cdfs,
        }
    }

    pub fn records_for(&self, method: Method) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(move |r| r.method == method)
    }

    pub fn taus(&self, method: Method) -> Vec<f64> {
        self.records_for(method).map(|r| r.tau_ms).collect()
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("runs.csv"), runs_csv(&self.records))?;
        let mut json = serde_json::to_string_pretty(&self.summary).map_err(|e| Error::Parse {
            location: "summary.json".into(),
            message: e.to_string(),
        })?;
        json.push('\n');
        fs::write(dir.join("summary.json"), json)?;
        for (method, bins) in &self.histograms {
            let mut s = String::from("bin_low_ms,count\n");
            for b in bins {
                s.push_str(&format!("{},{}\n", b.bin_low_ms, b.count));
            }
            fs::write(dir.join(format!("hist_{method}.csv")), s)?;
        }
        for (method, points) in &self.cdfs {
            let mut s = String::from("tau_ms,fraction\n");
            for p in points {
                s.push_str(&format!("{},{}\n", p.tau_ms, p.fraction));
            }
            fs::write(dir.join(format!("cdf_{method}.csv")), s)?;
        }
        Ok(())
    }
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut s = String::from("run_id,method,beam,aoa_deg,aod_prev_deg,aod_deg,tau_ms,snr_linear,feasible\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.run_id, r.method, r.beam, r.aoa_deg, r.aod_prev_deg, r.aod_deg, r.tau_ms, r.snr_linear, r.feasible
        ));
    }
    s
}

fn method_stats(records: &[RunRecord]) -> BTreeMap<Method, MethodStats> {
    let mut by_method: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_method.entry(r.method).or_default().push(r.tau_ms);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let legacy_mean = by_method.get(&Method::Legacy).map(|v| mean(v));
    by_method
        .iter()
        .map(|(&m, taus)| {
            let total: f64 = taus.iter().sum();
            let mean_tau = mean(taus);
            let stats = MethodStats {
                runs: taus.len(),
                total_tau_ms: total,
                mean_tau_ms: mean_tau,
                min_tau_ms: taus.iter().copied().fold(f64::INFINITY, f64::min),
                max_tau_ms: taus.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                reduction_vs_legacy_pct: legacy_mean.map(|lm| percent_reduction(lm, mean_tau)),
            };
            (m, stats)
        })
        .collect()
}

/// `100 (baseline - value) / baseline`, or 0 when the baseline is 0.
pub fn percent_reduction(baseline: f64, value: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        100.0 * (baseline - value) / baseline
    }
}

/// Common-width bins starting at 0, shared by every method in the report.
fn histograms(records: &[RunRecord], bin_ms: f64) -> BTreeMap<Method, Vec<HistBin>> {
    let max = records.iter().map(|r| r.tau_ms).fold(0.0, f64::max);
    let bins = (max / bin_ms).floor() as usize + 1;
    let mut out: BTreeMap<Method, Vec<HistBin>> = BTreeMap::new();
    for r in records {
        let hist = out.entry(r.method).or_insert_with(|| {
            (0..bins)
                .map(|i| HistBin {
                    bin_low_ms: i as f64 * bin_ms,
                    count: 0,
                })
                .collect()
        });
        let i = ((r.tau_ms / bin_ms).floor() as usize).min(bins - 1);
        hist[i].count += 1;
    }
    out
}

/// Empirical CDF at every distinct response time of each method.
fn cdfs(records: &[RunRecord]) -> BTreeMap<Method, Vec<CdfPoint>> {
    let mut by_method: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_method.entry(r.method).or_default().push(r.tau_ms);
    }
    by_method
        .into_iter()
        .map(|(m, mut taus)| {
            taus.sort_by(f64::total_cmp);
            let n = taus.len() as f64;
            let mut points: Vec<CdfPoint> = Vec::new();
            for (i, &t) in taus.iter().enumerate() {
                let fraction = (i + 1) as f64 / n;
                match points.last_mut() {
                    Some(last) if last.tau_ms == t => last.fraction = fraction,
                    _ => points.push(CdfPoint { tau_ms: t, fraction }),
                }
            }
            (m, points)
        })
        .collect()
}

/// Fraction of `taus` at or below `x`.
pub fn cdf_at(taus: &[f64], x: f64) -> f64 {
    if taus.is_empty() {
        return 0.0;
    }
    taus.iter().filter(|&&t| t <= x).count() as f64 / taus.len() as f64
}

fn chain_records(
    out: &mut Vec<RunRecord>,
    prefix: &str,
    method: Method,
    design: &ReplicaDesign,
    result: &JointSolveResult<f64>,
) {
    let start = 180.0 - design.aoa_deg;
    for (l, beam) in result.beams.iter().enumerate() {
        out.push(RunRecord {
            run_id: format!("{prefix}b{l}"),
            method,
            beam: l,
            aoa_deg: design.aoa_deg,
            aod_prev_deg: if l == 0 { start } else { design.aods_deg[l - 1] },
            aod_deg: design.aods_deg[l],
            tau_ms: beam.tau_ms,
            snr_linear: beam.achieved_snr,
            feasible: beam.feasible,
        });
    }
}

fn design_records(prefix: &str, design: &ReplicaDesign) -> Vec<RunRecord> {
    let mut out = Vec::new();
    chain_records(&mut out, prefix, Method::Single, design, &design.single);
    if let Some(joint) = &design.joint {
        chain_records(&mut out, prefix, Method::Joint, design, joint);
    }
    chain_records(&mut out, prefix, Method::Legacy, design, &design.legacy);
    out
}

fn group(label: String, design: &ReplicaDesign) -> GroupStats {
    let mut totals_ms = BTreeMap::new();
    totals_ms.insert(Method::Single, design.single.total_ms);
    totals_ms.insert(Method::Legacy, design.legacy.total_ms);
    if let Some(j) = &design.joint {
        totals_ms.insert(Method::Joint, j.total_ms);
    }
    GroupStats { label, totals_ms }
}

/// Broadside incidence, departures 140, 120, 60 and 40 deg from the zero
/// profile; single-beam design against Legacy.
pub fn run_single_beam_scenario(setup: &ExperimentSetup) -> Result<ExperimentReport> {
    let design = replica_design(setup, 90.0, &SINGLE_BEAM_AODS, false)?;
    let mut metrics = BTreeMap::new();
    let mut step_reductions = Vec::new();
    for (l, (s, g)) in design.single.beams.iter().zip(&design.legacy.beams).enumerate() {
        let r = percent_reduction(g.tau_ms, s.tau_ms);
        metrics.insert(format!("step{l}_reduction_pct"), r);
        step_reductions.push(r);
    }
    metrics.insert(
        "step_reduction_min_pct".into(),
        step_reductions.iter().copied().fold(f64::INFINITY, f64::min),
    );
    metrics.insert(
        "step_reduction_max_pct".into(),
        step_reductions.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let records = design_records("", &design);
    Ok(ExperimentReport::assemble(
        "single-beam",
        setup,
        records,
        vec![group("replica".into(), &design)],
        metrics,
    ))
}

/// Broadside incidence, departures 135, 115, 65 and 45 deg designed jointly.
pub fn run_joint_scenario(setup: &ExperimentSetup) -> Result<ExperimentReport> {
    let design = replica_design(setup, 90.0, &JOINT_BEAM_AODS, true)?;
    let joint = design.joint.as_ref().expect("joint requested");
    let mut metrics = BTreeMap::new();
    metrics.insert(
        "joint_vs_legacy_pct".into(),
        percent_reduction(design.legacy.total_ms, joint.total_ms),
    );
    metrics.insert(
        "joint_vs_single_pct".into(),
        percent_reduction(design.single.total_ms, joint.total_ms),
    );
    let records = design_records("", &design);
    Ok(ExperimentReport::assemble(
        "joint-beam",
        setup,
        records,
        vec![group("replica".into(), &design)],
        metrics,
    ))
}

/// Three departures `90 - s, 90, 90 + s` for each separation `s`.
pub fn run_angular_separation(setup: &ExperimentSetup) -> Result<ExperimentReport> {
    run_angular_separation_with(setup, &ANGULAR_SEPARATIONS)
}

pub fn run_angular_separation_with(setup: &ExperimentSetup, separations: &[f64]) -> Result<ExperimentReport> {
    let mut records = Vec::new();
    let mut groups = Vec::new();
    let mut metrics = BTreeMap::new();
    for &sep in separations {
        let aods = [90.0 - sep, 90.0, 90.0 + sep];
        let design = replica_design(setup, 90.0, &aods, true)?;
        let joint = design.joint.as_ref().expect("joint requested");
        let label = format!("sep{sep}");
        metrics.insert(
            format!("{label}_single_vs_legacy_pct"),
            percent_reduction(design.legacy.total_ms, design.single.total_ms),
        );
        metrics.insert(
            format!("{label}_joint_vs_legacy_pct"),
            percent_reduction(design.legacy.total_ms, joint.total_ms),
        );
        metrics.insert(
            format!("{label}_joint_vs_single_pct"),
            percent_reduction(design.single.total_ms, joint.total_ms),
        );
        records.extend(design_records(&format!("{label}-"), &design));
        groups.push(group(label, &design));
    }
    Ok(ExperimentReport::assemble(
        "angular-separation",
        setup,
        records,
        groups,
        metrics,
    ))
}

/// `L = 1..=10` departures `90 + 5 l`, joint against chained single-beam.
pub fn run_beam_count_sweep(setup: &ExperimentSetup) -> Result<ExperimentReport> {
    let mut records = Vec::new();
    let mut groups = Vec::new();
    let mut metrics = BTreeMap::new();
    for count in 1..=MAX_BEAM_COUNT {
        let aods: Vec<f64> = (1..=count).map(|l| 90.0 + BEAM_COUNT_STEP_DEG * l as f64).collect();
        let mut design = replica_design(setup, 90.0, &aods, true)?;
        let joint = design.joint.as_ref().expect("joint requested");
        let label = format!("L{count}");
        metrics.insert(
            format!("{label}_joint_vs_single_pct"),
            percent_reduction(design.single.total_ms, joint.total_ms),
        );
        let mut g = group(label.clone(), &design);
        g.totals_ms.remove(&Method::Legacy);
        groups.push(g);
        // Legacy runs are not part of this comparison
        design.legacy.beams.clear();
        let mut recs = design_records(&format!("{label}-"), &design);
        recs.retain(|r| r.method != Method::Legacy);
        records.extend(recs);
    }
    Ok(ExperimentReport::assemble(
        "beam-count",
        setup,
        records,
        groups,
        metrics,
    ))
}

fn bulk_pair(
    setup: &ExperimentSetup,
    aoa: f64,
    prev_aod: f64,
    aod: f64,
    prev: &PhaseProfile,
) -> Result<(RunRecord, RunRecord)> {
    let link = setup.link(aoa, aod)?;
    let coupling = link.coupling();
    let legacy_profile = solver::solve_legacy(&[coupling], &setup.model, setup.codebook, prev)?
        .pop()
        .expect("one beam");
    let alpha = setup.kappa * setup.kappa * link.snr(&legacy_profile)?;
    let legacy = SolveResult::evaluate(coupling, &setup.model, prev, legacy_profile.clone(), alpha)?;
    let single = match solver::solve_single_beam(coupling, &setup.model, setup.codebook, prev, alpha) {
        Ok(r) => r,
        // reported as an infeasible run that falls back to the Legacy profile
        Err(Error::Infeasible { .. }) => SolveResult {
            feasible: false,
            ..legacy.clone()
        },
        Err(e) => return Err(e),
    };
    let run_id = format!("a{aoa}-p{prev_aod}-t{aod}");
    let record = |method: Method, r: &SolveResult<f64>| RunRecord {
        run_id: run_id.clone(),
        method,
        beam: 0,
        aoa_deg: aoa,
        aod_prev_deg: prev_aod,
        aod_deg: aod,
        tau_ms: r.tau_ms,
        snr_linear: r.achieved_snr,
        feasible: r.feasible,
    };
    Ok((record(Method::Single, &single), record(Method::Legacy, &legacy)))
}

/// Every (AoA, previous AoD, next AoD) triple of the bulk grid. Both methods
/// start from the Legacy profile of (AoA, previous AoD).
pub fn run_bulk_study(setup: &ExperimentSetup) -> Result<ExperimentReport> {
    let angles = setup.bulk_grid.angles();
    let zero = setup.zero_profile();
    let starts: Vec<Vec<PhaseProfile>> = angles
        .iter()
        .map(|&aoa| {
            angles
                .iter()
                .map(|&aod| {
                    let link = setup.link(aoa, aod)?;
                    Ok(
                        solver::solve_legacy(&[link.coupling()], &setup.model, setup.codebook, &zero)?
                            .pop()
                            .expect("one beam"),
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let n = angles.len();
    let triples: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|a| (0..n).flat_map(move |p| (0..n).map(move |t| (a, p, t))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(setup.workers.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("worker pool: {e}")))?;
    let pairs: Vec<(RunRecord, RunRecord)> = pool.install(|| {
        triples
            .par_iter()
            .map(|&(a, p, t)| bulk_pair(setup, angles[a], angles[p], angles[t], &starts[a][p]))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::with_capacity(pairs.len() * 2);
    let (singles, legacies): (Vec<RunRecord>, Vec<RunRecord>) = pairs.into_iter().unzip();
    records.extend(singles);
    records.extend(legacies);

    let mut report = ExperimentReport::assemble("bulk", setup, records, Vec::new(), BTreeMap::new());
    let single = report.taus(Method::Single);
    let legacy = report.taus(Method::Legacy);
    let metrics = &mut report.summary.metrics;
    metrics.insert("model_bound_ms".into(), setup.model.eval_piecewise(-360.0)?);
    metrics.insert("single_frac_le_fast_ms".into(), cdf_at(&single, FAST_SWITCH_MS));
    metrics.insert("legacy_frac_le_fast_ms".into(), cdf_at(&legacy, FAST_SWITCH_MS));
    let bins = &report.histograms[&Method::Single];
    let dominated = bins
        .iter()
        .filter(|b| {
            let edge = b.bin_low_ms + setup.hist_bin_ms;
            cdf_at(&single, edge) >= cdf_at(&legacy, edge)
        })
        .count();
    metrics.insert("cdf_dominance_fraction".into(), dominated as f64 / bins.len() as f64);
    Ok(report)
}

/// Incidence at 45 deg, departures 91..=179 deg, for every codebook size.
/// Each departure uses one threshold for all sizes, taken from the Legacy
/// design on the coarsest codebook, so finer codebooks can only help.
pub fn run_quantization_sweep(setup: &ExperimentSetup) -> Result<ExperimentReport> {
    let mut levels = setup.quantization_levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let coarsest = *levels
        .first()
        .ok_or_else(|| Error::Validation("no quantization levels".into()))?;
    let aoa = QUANTIZATION_AOA_DEG;
    let aods: Vec<f64> = (91..=179).map(f64::from).collect();
    let coarse = setup.with_codebook(PhaseCodebook::new(coarsest)?);
    let alphas = aods
        .iter()
        .map(|&aod| {
            let link = coarse.link(aoa, aod)?;
            let p = solver::solve_legacy(
                &[link.coupling()],
                &coarse.model,
                coarse.codebook,
                &coarse.zero_profile(),
            )?
            .pop()
            .expect("one beam");
            Ok(coarse.kappa * coarse.kappa * link.snr(&p)?)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut records = Vec::new();
    let mut groups = Vec::new();
    let mut per_aod: Vec<Vec<f64>> = vec![Vec::new(); aods.len()];
    for &q in &levels {
        let s = setup.with_codebook(PhaseCodebook::new(q)?);
        let zero = s.zero_profile();
        let mut total = 0.0;
        for (i, (&aod, &alpha)) in aods.iter().zip(&alphas).enumerate() {
            let link = s.link(aoa, aod)?;
            let r = solver::solve_single_beam(link.coupling(), &s.model, s.codebook, &zero, alpha)?;
            total += r.tau_ms;
            per_aod[i].push(r.tau_ms);
            records.push(RunRecord {
                run_id: format!("q{q}-aod{aod}"),
                method: Method::Single,
                beam: 0,
                aoa_deg: aoa,
                aod_prev_deg: 180.0 - aoa,
                aod_deg: aod,
                tau_ms: r.tau_ms,
                snr_linear: r.achieved_snr,
                feasible: r.feasible,
            });
        }
        let mut totals_ms = BTreeMap::new();
        totals_ms.insert(Method::Single, total);
        groups.push(GroupStats {
            label: format!("Q{q}"),
            totals_ms,
        });
    }
    let max_dev = per_aod
        .iter()
        .map(|v| {
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max);
    let mut metrics = BTreeMap::new();
    metrics.insert("max_deviation_across_q_ms".into(), max_dev);
    Ok(ExperimentReport::assemble(
        "quantization",
        setup,
        records,
        groups,
        metrics,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SingleBeam,
    JointBeam,
    AngularSeparation,
    BeamCount,
    Bulk,
    Quantization,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::SingleBeam,
        Experiment::JointBeam,
        Experiment::AngularSeparation,
        Experiment::BeamCount,
        Experiment::Bulk,
        Experiment::Quantization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SingleBeam => "single-beam",
            Experiment::JointBeam => "joint-beam",
            Experiment::AngularSeparation => "angular-separation",
            Experiment::BeamCount => "beam-count",
            Experiment::Bulk => "bulk",
            Experiment::Quantization => "quantization",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn run(self, setup: &ExperimentSetup) -> Result<ExperimentReport> {
        match self {
            Experiment::SingleBeam => run_single_beam_scenario(setup),
            Experiment::JointBeam => run_joint_scenario(setup),
            Experiment::AngularSeparation => run_angular_separation(setup),
            Experiment::BeamCount => run_beam_count_sweep(setup),
            Experiment::Bulk => run_bulk_study(setup),
            Experiment::Quantization => run_quantization_sweep(setup),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: Method, tau: f64) -> RunRecord {
        RunRecord {
            run_id: String::new(),
            method,
            beam: 0,
            aoa_deg: 90.0,
            aod_prev_deg: 90.0,
            aod_deg: 90.0,
            tau_ms: tau,
            snr_linear: 1.0,
            feasible: true,
        }
    }

    #[test]
    fn reduction_and_stats() {
        let records = vec![
            rec(Method::Legacy, 10.0),
            rec(Method::Legacy, 30.0),
            rec(Method::Single, 5.0),
            rec(Method::Single, 15.0),
        ];
        let stats = method_stats(&records);
        assert_eq!(stats[&Method::Legacy].mean_tau_ms, 20.0);
        assert_eq!(stats[&Method::Single].reduction_vs_legacy_pct, Some(50.0));
        assert_eq!(stats[&Method::Legacy].reduction_vs_legacy_pct, Some(0.0));
        assert_eq!(percent_reduction(0.0, 0.0), 0.0);
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one() {
        let records: Vec<RunRecord> = [3.0, 1.0, 3.0, 7.0, 0.0]
            .iter()
            .map(|&t| rec(Method::Single, t))
            .collect();
        let c = &cdfs(&records)[&Method::Single];
        assert_eq!(c.len(), 4);
        assert!(c
            .windows(2)
            .all(|w| w[0].tau_ms < w[1].tau_ms && w[0].fraction <= w[1].fraction));
        assert_eq!(c.last().unwrap().fraction, 1.0);
        assert_eq!(
            c[2],
            CdfPoint {
                tau_ms: 3.0,
                fraction: 0.8
            }
        );
    }

    #[test]
    fn histogram_counts_every_run() {
        let records: Vec<RunRecord> = [0.0, 4.9, 5.0, 12.0].iter().map(|&t| rec(Method::Legacy, t)).collect();
        let h = &histograms(&records, 5.0)[&Method::Legacy];
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![2, 1, 1]);
        assert_eq!(h[2].bin_low_ms, 10.0);
    }

    #[test]
    fn grid_angles() {
        let g = AngleGrid::default().angles();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 40.0);
        assert_eq!(g[10], 90.0);
        assert_eq!(g[20], 140.0);
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()), Some(e));
        }
        assert_eq!(Experiment::from_name("nope"), None);
    }
}
