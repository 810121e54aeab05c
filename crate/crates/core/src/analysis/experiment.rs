use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate::mallows_exact_marginals;
use super::stats::{chi_square_pooled, empirical_pmf, raw_moment, tv_distance, tv_half_width, ChiSquareTest};
use crate::densities::Density;
use crate::error::{Error, Result};
use crate::limits::{
    c_rho, diagonal_integral, lambda_n_cycle, lambda_n_overlap, mu_rho_along, poisson_moment, poisson_pmf,
    poisson_pmf_table, stein_tv_bound, PoissonSpec, Provenance, Regime, SteinBound,
};
use crate::perm::{functional_cycle_census, Permutation};
use crate::rng::{RandomStream, DEFAULT_SEED};
use crate::samplers::{IndependentZSampler, ModelSpec};

/// Replicates per forked stream. Fixed so results do not depend on the worker count.
pub const BATCH_SIZE: u64 = 4096;
/// Upper limit on replicates per run.
pub const MAX_REPLICATES: u64 = 1 << 40;
/// Significance level of the embedded χ² checks.
pub const CHI_SQUARE_ALPHA: f64 = 1e-3;
/// Moment z-scores at or above this fail the embedded check.
pub const MAX_MOMENT_Z: f64 = 5.0;
/// Kernel grid for `c_ρ(l)` references.
pub const REFERENCE_KERNEL_GRID: usize = 256;
/// Poisson reference pmfs are truncated once the upper tail is below this.
pub const REFERENCE_TAIL: f64 = 1e-12;

/// What to measure on each draw.
///
/// JSON: `"fixed_points"`, `{"overlap": [2,1,3]}`, `{"cycle_counts": 3}`,
/// `{"joint_cycle_moments": [1, 1]}` (exponents `k_1, …, k_l` of `Π_l C(l)^{k_l}`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    FixedPoints,
    Overlap(Permutation),
    CycleCounts(usize),
    JointCycleMoments(Vec<u32>),
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Self::FixedPoints => "fixed_points",
            Self::Overlap(_) => "overlap",
            Self::CycleCounts(_) => "cycle_counts",
            Self::JointCycleMoments(_) => "joint_cycle_moments",
        }
    }

    /// Labels of the integer components recorded per draw.
    pub fn components(&self) -> Vec<String> {
        match self {
            Self::FixedPoints => vec!["fixed_points".into()],
            Self::Overlap(_) => vec!["overlap".into()],
            Self::CycleCounts(l) => (1..=*l).map(|l| format!("C({l})")).collect(),
            Self::JointCycleMoments(k) => (1..=k.len()).map(|l| format!("C({l})")).collect(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Overlap(s) if s.len() != n => Err(Error::SizeMismatch { left: n, right: s.len() }),
            Self::CycleCounts(0) => Err(Error::Spec("cycle_counts needs l_max ≥ 1".into())),
            Self::JointCycleMoments(k) if k.is_empty() || k.iter().all(|&e| e == 0) => {
                Err(Error::Spec("joint_cycle_moments needs at least one positive exponent".into()))
            }
            Self::JointCycleMoments(k) if k.iter().sum::<u32>() > 12 => {
                Err(Error::Spec("joint moment order above 12 is not supported".into()))
            }
            _ => Ok(()),
        }
    }

    fn evaluate(&self, map: &[u32], out: &mut [usize]) {
        match self {
            Self::FixedPoints => {
                out[0] = map.iter().enumerate().filter(|&(i, &t)| i as u32 == t).count();
            }
            Self::Overlap(s) => {
                out[0] = map.iter().zip(s.as_zero_based()).filter(|(a, b)| a == b).count();
            }
            Self::CycleCounts(_) | Self::JointCycleMoments(_) => {
                let census = functional_cycle_census(map);
                for (l, slot) in out.iter_mut().enumerate() {
                    *slot = census.count(l + 1);
                }
            }
        }
    }

    fn overlap_target(&self, n: usize) -> Option<Permutation> {
        match self {
            Self::FixedPoints => Some(Permutation::identity(n)),
            Self::Overlap(s) => Some(s.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FixedPoints => write!(f, "fixed_points"),
            Self::Overlap(s) => write!(f, "overlap:{}", serde_json::to_string(s).map_err(|_| fmt::Error)?),
            Self::CycleCounts(l) => write!(f, "cycle_counts:{l}"),
            Self::JointCycleMoments(k) => {
                let ks: Vec<String> = k.iter().map(|e| e.to_string()).collect();
                write!(f, "joint_cycle_moments:{}", ks.join(","))
            }
        }
    }
}

/// Size-free command-line form: `fixed_points`, `overlap:[2,1,3]`,
/// `cycle_counts:3`, `joint_cycle_moments:1,1`, or the JSON form.
/// Named overlap targets need `n`; see [`parse_statistic`].
impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') || s.starts_with('"') {
            return serde_json::from_str(s).map_err(|e| Error::Spec(format!("statistic: {e}")));
        }
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let bad = |what: &str| Error::Spec(format!("statistic {s:?}: {what}"));
        match (name, arg) {
            ("fixed_points", None) => Ok(Self::FixedPoints),
            ("overlap", Some(json)) if json.trim_start().starts_with('[') => serde_json::from_str(json)
                .map(Self::Overlap)
                .map_err(|e| bad(&e.to_string())),
            ("overlap", _) => Err(bad("a named overlap target needs the permutation size")),
            ("cycle_counts", Some(l)) => l.parse().map(Self::CycleCounts).map_err(|_| bad("bad l_max")),
            ("joint_cycle_moments", Some(ks)) => ks
                .split(',')
                .map(|k| k.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Self::JointCycleMoments)
                .map_err(|_| bad("bad exponent list")),
            _ => Err(bad("unknown statistic")),
        }
    }
}

/// Parses a command-line statistic for size `n`; also accepts `overlap`,
/// `overlap:identity` and `overlap:reversal`.
pub fn parse_statistic(text: &str, n: usize) -> Result<Statistic> {
    match text.trim() {
        "overlap" | "overlap:identity" => Ok(Statistic::Overlap(Permutation::identity(n))),
        "overlap:reversal" => Ok(Statistic::Overlap(Permutation::reversal(n))),
        other => other.parse(),
    }
}

/// A JSON experiment document (schema: `schema/experiment_config.schema.json`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub statistic: Statistic,
    pub replicates: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Highest raw moment reported (default 4).
    #[serde(default)]
    pub max_moment: Option<u32>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        check_replicates(cfg.replicates)?;
        cfg.statistic.validate(cfg.model.n())?;
        Ok(cfg)
    }

    /// Mallows `n = 100`, `q = e^{−20/n}`, `10⁴` replicates, fixed points.
    pub fn mallows_fixed_point_preset() -> Self {
        Self {
            model: ModelSpec::mallows_scaled(100, 20.0),
            statistic: Statistic::FixedPoints,
            replicates: 10_000,
            seed: None,
            max_moment: None,
        }
    }

    /// Uniform `n = 1000`, `10⁵` replicates, fixed points.
    pub fn uniform_preset() -> Self {
        Self {
            model: ModelSpec::Uniform { n: 1000 },
            statistic: Statistic::FixedPoints,
            replicates: 100_000,
            seed: None,
            max_moment: None,
        }
    }

    pub fn run(&self) -> Result<ExperimentReport> {
        let stream = RandomStream::new(self.seed.unwrap_or(DEFAULT_SEED));
        run_experiment_with(&self.model, &self.statistic, self.replicates, &stream, self.max_moment.unwrap_or(4))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub order: u32,
    pub empirical: f64,
    pub standard_error: f64,
    pub reference: f64,
    pub z: f64,
}

/// Comparison of one component against one Poisson reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    pub reference: PoissonSpec,
    /// Whether `λ` is an exact finite-`n` mean (as opposed to a limit or a fit).
    pub finite_n: bool,
    pub mean_gap: f64,
    pub mean_gap_in_se: f64,
    pub tv_distance: f64,
    pub chi_square: ChiSquareTest,
    pub moments: Vec<MomentRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub label: String,
    pub counts: Vec<u64>,
    pub empirical_pmf: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub standard_error: f64,
    pub empirical_moments: Vec<f64>,
    /// Index into `comparisons` of the reference used for the pmf CSV and the embedded checks.
    pub primary: usize,
    pub comparisons: Vec<ReferenceComparison>,
}

impl ComponentReport {
    pub fn primary_comparison(&self) -> &ReferenceComparison {
        &self.comparisons[self.primary]
    }

    pub fn comparison(&self, provenance: Provenance) -> Option<&ReferenceComparison> {
        self.comparisons.iter().find(|c| c.reference.provenance == provenance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointMomentReport {
    pub exponents: Vec<u32>,
    pub empirical: f64,
    pub standard_error: f64,
    /// `Π_l E[Poi(λ_l)^{k_l}]` with each component's primary `λ_l`.
    pub independent_reference: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub replicates_per_second: f64,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub model: ModelSpec,
    pub statistic: Statistic,
    pub replicates: u64,
    pub seed_fingerprint: String,
    pub components: Vec<ComponentReport>,
    pub joint: Option<JointMomentReport>,
    pub stein: Option<Vec<SteinCheck>>,
    pub assertions: Vec<AssertionOutcome>,
    /// Not part of the reproducible content; see [`ExperimentReport::reproducible_json`].
    pub timing: Timing,
}

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failed(&self) -> Vec<&AssertionOutcome> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the timing block zeroed: identical bytes for identical seeds.
    pub fn reproducible_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.timing = Timing { wall_seconds: 0.0, replicates_per_second: 0.0, threads: 0 };
        copy.to_json()
    }

    /// pmf table `value,empirical_prob,poisson_prob` against each component's
    /// primary reference; a leading `component` column appears when there is
    /// more than one component.
    pub fn write_pmf_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = self.pmf_rows();
        write_pmf_csv(out, &rows, self.components.len() > 1)
    }

    pub fn pmf_rows(&self) -> Vec<PmfRow> {
        let mut rows = Vec::new();
        for c in &self.components {
            let lambda = c.primary_comparison().reference.lambda;
            let reference = poisson_pmf_table(lambda, REFERENCE_TAIL);
            let len = c.empirical_pmf.len().max(reference.len());
            for v in 0..len {
                rows.push(PmfRow {
                    component: c.label.clone(),
                    value: v,
                    empirical_prob: c.empirical_pmf.get(v).copied().unwrap_or(0.0),
                    poisson_prob: poisson_pmf(lambda, v),
                });
            }
        }
        rows
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmfRow {
    #[serde(default)]
    pub component: String,
    pub value: usize,
    pub empirical_prob: f64,
    pub poisson_prob: f64,
}

pub fn write_pmf_csv<W: Write>(out: W, rows: &[PmfRow], with_component: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Spec(format!("csv: {e}"));
    if with_component {
        w.write_record(["component", "value", "empirical_prob", "poisson_prob"]).map_err(csv_err)?;
    } else {
        w.write_record(["value", "empirical_prob", "poisson_prob"]).map_err(csv_err)?;
    }
    for r in rows {
        let mut rec = Vec::with_capacity(4);
        if with_component {
            rec.push(r.component.clone());
        }
        rec.push(r.value.to_string());
        rec.push(r.empirical_prob.to_string());
        rec.push(r.poisson_prob.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pmf_csv<R: Read>(input: R) -> Result<Vec<PmfRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Spec(format!("csv: {e}"))))
        .collect()
}

/// Integer accumulators for one batch of replicates.
#[derive(Clone, Debug, Default)]
struct Tally {
    hist: Vec<Vec<u64>>,
    joint_sum: u128,
    joint_sq: u128,
}

impl Tally {
    fn new(components: usize) -> Self {
        Self { hist: vec![Vec::new(); components], joint_sum: 0, joint_sq: 0 }
    }

    fn record(&mut self, values: &[usize], joint: Option<&[u32]>) {
        for (h, &v) in self.hist.iter_mut().zip(values) {
            if h.len() <= v {
                h.resize(v + 1, 0);
            }
            h[v] += 1;
        }
        if let Some(k) = joint {
            let prod: u128 = values.iter().zip(k).map(|(&v, &e)| (v as u128).pow(e)).product();
            self.joint_sum += prod;
            self.joint_sq += prod * prod;
        }
    }

    fn merge(&mut self, other: Tally) {
        for (h, o) in self.hist.iter_mut().zip(other.hist) {
            if h.len() < o.len() {
                h.resize(o.len(), 0);
            }
            for (a, b) in h.iter_mut().zip(o) {
                *a += b;
            }
        }
        self.joint_sum += other.joint_sum;
        self.joint_sq += other.joint_sq;
    }
}

/// Runs `replicates` draws in fixed-size batches, batch `b` on `stream.fork(b)`,
/// and merges the batch tallies in batch order.
fn tally_replicates<F>(replicates: u64, stream: &RandomStream, components: usize, joint: Option<&[u32]>, draw: F) -> Tally
where
    F: Fn(&mut RandomStream, &mut [usize]) + Sync,
{
    let batches = replicates.div_ceil(BATCH_SIZE);
    let parts: Vec<Tally> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut s = stream.fork(b);
            let size = BATCH_SIZE.min(replicates - b * BATCH_SIZE);
            let mut tally = Tally::new(components);
            let mut values = vec![0usize; components];
            for _ in 0..size {
                draw(&mut s, &mut values);
                tally.record(&values, joint);
            }
            tally
        })
        .collect();
    let mut total = Tally::new(components);
    for part in parts {
        total.merge(part);
    }
    total
}

fn check_replicates(replicates: u64) -> Result<()> {
    if replicates == 0 || replicates > MAX_REPLICATES {
        return Err(Error::Parameter(format!(
            "replicates must be in 1..={MAX_REPLICATES}, got {replicates}"
        )));
    }
    Ok(())
}

/// Runs an experiment with the default moment order (4).
pub fn run_experiment(
    spec: &ModelSpec,
    statistic: &Statistic,
    replicates: u64,
    stream: &RandomStream,
) -> Result<ExperimentReport> {
    run_experiment_with(spec, statistic, replicates, stream, 4)
}

pub fn run_experiment_with(
    spec: &ModelSpec,
    statistic: &Statistic,
    replicates: u64,
    stream: &RandomStream,
    max_moment: u32,
) -> Result<ExperimentReport> {
    check_replicates(replicates)?;
    let n = spec.n();
    statistic.validate(n)?;
    if max_moment == 0 || max_moment as usize > crate::limits::MAX_MOMENT_ORDER {
        return Err(Error::Parameter("max_moment must be in 1..=20".into()));
    }
    let sampler = spec.prepare()?;
    let labels = statistic.components();
    let joint = match statistic {
        Statistic::JointCycleMoments(k) => Some(k.as_slice()),
        _ => None,
    };
    let started = Instant::now();
    let tally = tally_replicates(replicates, stream, labels.len(), joint, |s, out| {
        let map = sampler.draw_map(s);
        statistic.evaluate(&map, out);
    });
    let wall = started.elapsed().as_secs_f64();

    let refs = References::for_model(spec)?;
    let mut components = Vec::with_capacity(labels.len());
    for (idx, (label, counts)) in labels.into_iter().zip(&tally.hist).enumerate() {
        let candidates = refs.candidates(statistic, idx, n)?;
        components.push(component_report(label, counts, candidates, max_moment));
    }
    let joint_report = joint.map(|k| {
        let r = replicates as f64;
        let mean = tally.joint_sum as f64 / r;
        let var = ((tally.joint_sq as f64 - r * mean * mean) / (r - 1.0).max(1.0)).max(0.0);
        let se = (var / r).sqrt();
        let reference: f64 = k
            .iter()
            .zip(&components)
            .map(|(&e, c)| poisson_moment(c.primary_comparison().reference.lambda, e as usize).unwrap_or(f64::NAN))
            .product();
        JointMomentReport {
            exponents: k.to_vec(),
            empirical: mean,
            standard_error: se,
            independent_reference: reference,
            z: z_score(mean, reference, se),
        }
    });

    let stein = match spec {
        ModelSpec::IndependentZ { density, .. } => {
            let d = density.build::<f64>()?;
            let mut checks = Vec::new();
            for c in &components {
                let regime = match statistic {
                    Statistic::FixedPoints | Statistic::Overlap(_) => Regime::Overlap,
                    _ => Regime::Cycle(c.label[2..c.label.len() - 1].parse().unwrap_or(1)),
                };
                let sigma = statistic.overlap_target(n);
                if let Ok(bound) = stein_tv_bound(&d, n, regime, sigma.as_ref()) {
                    checks.push(SteinCheck::from_counts(bound, &c.counts));
                }
            }
            Some(checks)
        }
        _ => None,
    };

    let mut assertions = Vec::new();
    for c in &components {
        let primary = c.primary_comparison();
        if primary.finite_n {
            let worst = primary.moments.iter().map(|m| m.z.abs()).fold(0.0, f64::max);
            assertions.push(AssertionOutcome {
                name: format!("{}: moment z-scores vs {}", c.label, primary.reference.provenance),
                passed: worst < MAX_MOMENT_Z,
                detail: format!("max |z| = {worst:.3} (limit {MAX_MOMENT_Z})"),
            });
        }
    }
    if let Some(checks) = &stein {
        for s in checks {
            assertions.push(AssertionOutcome {
                name: format!("stein bound ({:?})", s.bound.regime),
                passed: s.passed,
                detail: format!(
                    "tv {:.5} <= bound {:.5} + 3 x half-width {:.5}",
                    s.tv_estimate, s.bound.tv_bound, s.mc_half_width
                ),
            });
        }
    }

    Ok(ExperimentReport {
        model: spec.clone(),
        statistic: statistic.clone(),
        replicates,
        seed_fingerprint: format!("{:016x}", stream.clone().fork(u64::MAX).unit().to_bits()),
        components,
        joint: joint_report,
        stein,
        assertions,
        timing: Timing {
            wall_seconds: wall,
            replicates_per_second: replicates as f64 / wall.max(1e-9),
            threads: rayon::current_num_threads(),
        },
    })
}

fn z_score(value: f64, reference: f64, se: f64) -> f64 {
    if se > 0.0 {
        (value - reference) / se
    } else if value == reference {
        0.0
    } else {
        f64::INFINITY
    }
}

fn component_report(label: String, counts: &[u64], candidates: Vec<(PoissonSpec, bool)>, max_moment: u32) -> ComponentReport {
    let pmf = empirical_pmf(counts);
    let (mean, se) = raw_moment(counts, 1);
    let (second, _) = raw_moment(counts, 2);
    let r: u64 = counts.iter().sum();
    let variance = (second - mean * mean) * r as f64 / (r as f64 - 1.0).max(1.0);
    let emp_moments: Vec<(f64, f64)> = (1..=max_moment).map(|k| raw_moment(counts, k)).collect();

    let mut list = candidates;
    if mean > 0.0 {
        list.push((PoissonSpec { lambda: mean, provenance: Provenance::EmpiricalMean }, false));
    }
    let comparisons: Vec<ReferenceComparison> = list
        .into_iter()
        .map(|(reference, finite_n)| {
            let lambda = reference.lambda;
            let poi = poisson_pmf_table(lambda, REFERENCE_TAIL);
            let fitted = usize::from(reference.provenance == Provenance::EmpiricalMean);
            let moments = emp_moments
                .iter()
                .enumerate()
                .map(|(i, &(m, s))| {
                    let order = i as u32 + 1;
                    let reference = poisson_moment(lambda, order as usize).unwrap_or(f64::NAN);
                    MomentRow { order, empirical: m, standard_error: s, reference, z: z_score(m, reference, s) }
                })
                .collect();
            ReferenceComparison {
                reference,
                finite_n,
                mean_gap: mean - lambda,
                mean_gap_in_se: z_score(mean, lambda, se),
                tv_distance: tv_distance(&pmf, &poi),
                chi_square: chi_square_pooled(counts, |j| poisson_pmf(lambda, j), fitted),
                moments,
            }
        })
        .collect();
    ComponentReport {
        label,
        counts: counts.to_vec(),
        empirical_pmf: pmf,
        mean,
        variance,
        standard_error: se,
        empirical_moments: emp_moments.iter().map(|m| m.0).collect(),
        primary: 0,
        comparisons,
    }
}

/// Model-level inputs for reference parameters.
struct References {
    spec: ModelSpec,
    limit: Option<Density<f64>>,
}

impl References {
    fn for_model(spec: &ModelSpec) -> Result<Self> {
        let limit = match spec {
            ModelSpec::Uniform { .. } => Some(Density::uniform()),
            ModelSpec::Mallows { n, q } => {
                let beta = -(*n as f64) * q.ln();
                Density::frank(beta).ok()
            }
            ModelSpec::ExpFamily { score, theta, .. } => {
                Some(Density::fit_exp_family(score.clone(), *theta, crate::densities::DEFAULT_FIT_K)?)
            }
            ModelSpec::MuRandom { density, .. } | ModelSpec::IndependentZ { density, .. } => Some(density.build()?),
            ModelSpec::FixedPointTilt { .. } => None,
        };
        Ok(Self { spec: spec.clone(), limit })
    }

    /// Reference parameters for one component, most specific first; the bool marks exact finite-`n` means.
    fn candidates(&self, statistic: &Statistic, idx: usize, n: usize) -> Result<Vec<(PoissonSpec, bool)>> {
        let mut out: Vec<(PoissonSpec, bool)> = Vec::new();
        let mut push = |lambda: f64, p: Provenance, exact: bool| {
            if let Ok(spec) = PoissonSpec::new(lambda, p) {
                out.push((spec, exact));
            }
        };
        let target = statistic.overlap_target(n);
        let cycle_l = match statistic {
            Statistic::CycleCounts(_) | Statistic::JointCycleMoments(_) => Some(idx + 1),
            _ => None,
        };
        let is_identity = target.as_ref().is_some_and(|s| s.fixed_points() == n);
        // a fixed-point component is both an overlap with the identity and 1-cycles
        let sigma = match (&target, cycle_l) {
            (Some(s), _) => Some(s.clone()),
            (None, Some(1)) => Some(Permutation::identity(n)),
            _ => None,
        };

        match (&self.spec, &sigma) {
            (ModelSpec::Uniform { .. }, Some(_)) => push(1.0, Provenance::ExactMean, true),
            (ModelSpec::Uniform { .. }, None) => {
                let l = cycle_l.unwrap_or(1);
                if l <= n {
                    push(1.0 / l as f64, Provenance::ExactMean, true)
                }
            }
            (ModelSpec::Mallows { q, .. }, Some(s)) => {
                if let Ok(m) = mallows_exact_marginals(n, *q) {
                    let mean = s.as_zero_based().iter().enumerate().map(|(t, &j)| m[t * n + j as usize]).sum();
                    push(mean, Provenance::ExactMean, true);
                }
            }
            (ModelSpec::FixedPointTilt { theta, .. }, Some(s)) if s.fixed_points() == n => {
                let sampler = crate::samplers::FixedPointTiltSampler::new(n, *theta);
                let mean = sampler.fixed_count_pmf().iter().enumerate().map(|(k, p)| k as f64 * p).sum();
                push(mean, Provenance::ExactMean, true);
            }
            (ModelSpec::IndependentZ { .. }, Some(s)) => {
                if let Some(d) = &self.limit {
                    push(lambda_n_overlap(d, s), Provenance::LambdaNOverlap, true);
                }
            }
            (ModelSpec::IndependentZ { .. }, None) => {
                if let (Some(d), Some(l)) = (&self.limit, cycle_l) {
                    if let Ok(v) = lambda_n_cycle(d, n, l) {
                        push(v, Provenance::LambdaNCycle(l), true);
                    }
                }
            }
            _ => {}
        }

        if let ModelSpec::FixedPointTilt { theta, .. } = &self.spec {
            match (&sigma, cycle_l) {
                (Some(s), _) if s.fixed_points() == n => push(theta.exp(), Provenance::ExpTheta, false),
                (None, Some(l)) => push(1.0 / l as f64, Provenance::CRho(l), false),
                _ => {}
            }
        }
        if let Some(d) = &self.limit {
            if let Some(s) = &sigma {
                push(mu_rho_along(d, s), Provenance::MuRho, false);
                if is_identity || cycle_l == Some(1) {
                    push(diagonal_integral(d), Provenance::DiagonalIntegral, false);
                }
            }
            if let Some(l) = cycle_l {
                let c = if d.is_uniform() { Ok(1.0 / l as f64) } else { c_rho(d, l, REFERENCE_KERNEL_GRID) };
                if let Ok(c) = c {
                    push(c, Provenance::CRho(l), false);
                }
            }
        }
        Ok(out)
    }
}

/// Simulated Stein check for the independent model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinCheck {
    pub bound: SteinBound,
    pub replicates: u64,
    pub tv_estimate: f64,
    pub mc_half_width: f64,
    pub empirical_mean: f64,
    pub passed: bool,
}

impl SteinCheck {
    fn from_counts(bound: SteinBound, counts: &[u64]) -> Self {
        let pmf = empirical_pmf(counts);
        let poi = poisson_pmf_table(bound.lambda_n, REFERENCE_TAIL);
        let tv_estimate = tv_distance(&pmf, &poi);
        let mc_half_width = tv_half_width(counts);
        let (empirical_mean, _) = raw_moment(counts, 1);
        Self {
            bound,
            replicates: counts.iter().sum(),
            tv_estimate,
            mc_half_width,
            empirical_mean,
            passed: tv_estimate <= bound.tv_bound + 3.0 * mc_half_width,
        }
    }
}

/// Simulates `M_n(σ)` (`Regime::Overlap`) or `D_n(l)` from independent-model
/// draws and checks the TV distance to `Poi(λ_n)` against the Stein bound.
pub fn stein_check(
    density: &Density<f64>,
    regime: Regime,
    sigma: Option<&Permutation>,
    n: usize,
    replicates: u64,
    stream: &RandomStream,
) -> Result<SteinCheck> {
    Ok(stein_check_many(density, &[regime], sigma, n, replicates, stream)?.remove(0))
}

/// Several regimes evaluated on one shared set of independent-model draws.
pub fn stein_check_many(
    density: &Density<f64>,
    regimes: &[Regime],
    sigma: Option<&Permutation>,
    n: usize,
    replicates: u64,
    stream: &RandomStream,
) -> Result<Vec<SteinCheck>> {
    check_replicates(replicates)?;
    if regimes.is_empty() {
        return Err(Error::Parameter("no regime requested".into()));
    }
    let dev = density.marginal_deviation(512);
    if dev > crate::samplers::SAMPLER_MARGINAL_TOLERANCE {
        return Err(Error::Parameter(format!("density marginals deviate by {dev:e}")));
    }
    let identity;
    let sigma = match sigma {
        Some(s) => s,
        None => {
            identity = Permutation::identity(n);
            &identity
        }
    };
    if sigma.len() != n {
        return Err(Error::SizeMismatch { left: n, right: sigma.len() });
    }
    let bounds = regimes
        .iter()
        .map(|&r| stein_tv_bound(density, n, r, Some(sigma)))
        .collect::<Result<Vec<_>>>()?;
    let sampler = IndependentZSampler::new(density, n)?;
    let max_l = regimes
        .iter()
        .filter_map(|r| match r {
            Regime::Cycle(l) => Some(*l),
            Regime::Overlap => None,
        })
        .max()
        .unwrap_or(0);
    let target = sigma.as_zero_based();
    let tally = tally_replicates(replicates, stream, regimes.len(), None, |s, out| {
        let z = sampler.sample(s);
        let census = (max_l > 0).then(|| functional_cycle_census(&z));
        for (slot, regime) in out.iter_mut().zip(regimes) {
            *slot = match regime {
                Regime::Overlap => z.iter().zip(target).filter(|(a, b)| a == b).count(),
                Regime::Cycle(l) => census.as_ref().map_or(0, |c| c.count(*l)),
            };
        }
    });
    Ok(bounds
        .into_iter()
        .zip(&tally.hist)
        .map(|(b, counts)| SteinCheck::from_counts(b, counts))
        .collect())
}
