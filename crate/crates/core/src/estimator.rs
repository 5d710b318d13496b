//! Non-adaptive maximum-likelihood amplitude estimation.
//!
//! A run draws every round of an exponentially increasing schedule once per
//! repetition, then estimates `theta` from each prefix of the record, the
//! way an experimenter accumulating data would. The likelihood oscillates
//! with period about `pi / max N_q`, so the maximizer scans a dense grid of
//! angles before refining the best basins by golden-section search.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude_model::{
    check_theta, derive_seed, draw_binomial, outcome_probs_nq, EstimationProblem, Method, NoiseModel, Round,
    RoundOutcome, Schedule, SystemSize, survival,
};
use crate::error::{Error, Result};
use crate::fisher::{classical_fisher_unchecked, golden_section_max, quantum_unchecked};

/// Interior grid points scanned before refinement.
pub const GRID_POINTS: usize = 100_000;
/// Golden-section stopping width in `theta`.
pub const REFINE_TOLERANCE: f64 = 1e-10;
/// Grid local maxima within this many nats of the best grid value are refined.
const CANDIDATE_WINDOW: f64 = 2.0;
const MAX_CANDIDATES: usize = 16;

/// Parameters of a Monte-Carlo RMSE experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub targets: Vec<f64>,
    pub noise: NoiseModel,
    pub size: SystemSize,
    pub base: f64,
    pub rounds: usize,
    pub shots: u64,
    pub repetitions: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
}

pub const DEFAULT_TARGETS: [f64; 6] = [2.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 12.0, 1.0 / 24.0, 1.0 / 48.0];

impl Default for ExperimentConfig {
    /// 100 shots per round, `b = 6/5`, `r = 0.99`, `d = 2^100`, six targets,
    /// 200 repetitions, 37 rounds.
    fn default() -> Self {
        Self {
            targets: DEFAULT_TARGETS.to_vec(),
            noise: NoiseModel::depolarizing(0.99).expect("0.99 is a valid survival parameter"),
            size: SystemSize::Finite { log2_dim: 100 },
            base: 1.2,
            rounds: 37,
            shots: 100,
            repetitions: 200,
            master_seed: 1,
            methods: Method::ALL.to_vec(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.targets.is_empty() {
            return bad("no target amplitudes".into());
        }
        for &a in &self.targets {
            EstimationProblem::from_amplitude(a)?;
        }
        if !(self.base > 1.0 && self.base.is_finite()) {
            return bad(format!("schedule base {} must exceed 1", self.base));
        }
        if self.rounds == 0 || self.shots == 0 || self.repetitions == 0 {
            return bad("rounds, shots and repetitions must be positive".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        for &m in &self.methods {
            if build_eis_schedule(self.base, self.rounds, self.shots, m)?.is_empty() {
                return bad(format!("schedule for {m} is empty"));
            }
        }
        Ok(())
    }
}

/// `m_k = floor(b^(k-1))` for `k = 0..rounds`, `n_shot` shots each. The Q
/// schedule drops `k = 0`, whose outcome carries no information about theta.
pub fn build_eis_schedule(base: f64, rounds: usize, n_shot: u64, method: Method) -> Result<Schedule> {
    if !(base > 1.0 && base.is_finite()) {
        return Err(Error::InvalidSchedule(format!("base {base} must exceed 1")));
    }
    let first = match method {
        Method::GBased => 0,
        Method::QBased => 1,
    };
    let rounds = (first..rounds)
        .map(|k| {
            let m = base.powi(k as i32 - 1).floor();
            if m > f64::from(u32::MAX) {
                return Err(Error::InvalidSchedule(format!("m_{k} = {m} overflows")));
            }
            Ok(Round { k, m: m as u32, shots: n_shot })
        })
        .collect::<Result<Vec<_>>>()?;
    Schedule::new(rounds)
}

/// Outcomes of a sequence of rounds for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub method: Method,
    pub outcomes: Vec<RoundOutcome>,
}

impl MeasurementRecord {
    pub fn new(method: Method, outcomes: Vec<RoundOutcome>) -> Result<Self> {
        if method == Method::QBased && outcomes.iter().any(|o| o.m == 0) {
            return Err(Error::InvalidRecord("Q records cannot contain m = 0 rounds".into()));
        }
        if let Some(o) = outcomes.iter().find(|o| o.shots == 0 || o.hits > o.shots) {
            return Err(Error::InvalidRecord(format!("{} hits out of {} shots", o.hits, o.shots)));
        }
        Ok(Self { method, outcomes })
    }

    /// Draw every round of `schedule` at angle `theta`; round `k` of
    /// repetition `rep` uses the seed `derive_seed(master_seed, rep, k)`.
    pub fn sample(
        method: Method,
        theta: f64,
        schedule: &Schedule,
        noise: &NoiseModel,
        size: SystemSize,
        master_seed: u64,
        repetition: u64,
    ) -> Result<Self> {
        check_theta(theta)?;
        let inv_d = size.inv_d();
        let outcomes = schedule
            .rounds
            .iter()
            .map(|round| {
                let n_q = method.query_count(round.m) as f64;
                let (_, p1) = outcome_probs_nq(method, theta, n_q, noise.r(), inv_d);
                let seed = derive_seed(master_seed, repetition, round.k as u64);
                RoundOutcome { m: round.m, shots: round.shots, hits: draw_binomial(round.shots, p1, seed) }
            })
            .collect();
        Self::new(method, outcomes)
    }

    pub fn total_queries(&self) -> u64 {
        self.outcomes.iter().map(|o| o.shots * self.method.query_count(o.m)).sum()
    }
}

/// `count * ln(p)` with `0 * ln(0) = 0`.
fn xlogp(count: u64, ln_p: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * ln_p
    }
}

fn log_likelihood_unchecked(method: Method, outcomes: &[RoundOutcome], theta: f64, r: f64, inv_d: f64) -> f64 {
    outcomes
        .iter()
        .map(|o| {
            let n_q = method.query_count(o.m) as f64;
            let (p0, p1) = outcome_probs_nq(method, theta, n_q, r, inv_d);
            xlogp(o.hits, p1.ln()) + xlogp(o.misses(), p0.ln())
        })
        .sum()
}

/// `d/dθ` of [`log_likelihood_unchecked`]; `dp(1)/dθ = x N_q sin(2 N_q θ)`.
fn score_unchecked(method: Method, outcomes: &[RoundOutcome], theta: f64, r: f64, inv_d: f64) -> f64 {
    outcomes
        .iter()
        .map(|o| {
            let n_q = method.query_count(o.m) as f64;
            let (p0, p1) = outcome_probs_nq(method, theta, n_q, r, inv_d);
            let dp1 = survival(r, n_q) * n_q * (2.0 * n_q * theta).sin();
            let hit = if o.hits == 0 { 0.0 } else { o.hits as f64 * dp1 / p1 };
            let miss = if o.misses() == 0 { 0.0 } else { o.misses() as f64 * dp1 / p0 };
            hit - miss
        })
        .sum()
}

/// Root of a decreasing score on `[lo, hi]` by bisection, if it brackets one.
fn score_root<S: Fn(f64) -> f64>(score: &S, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (s_lo, s_hi) = (score(lo), score(hi));
    if !(s_lo.is_finite() && s_hi.is_finite() && s_lo > 0.0 && s_hi < 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = score(mid);
        if !s.is_finite() {
            return None;
        }
        if s > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `sum_k hits_k ln p(1) + (shots_k - hits_k) ln p(0)`.
pub fn log_likelihood(record: &MeasurementRecord, theta: f64, noise: &NoiseModel, size: SystemSize) -> Result<f64> {
    if record.outcomes.is_empty() {
        return Err(Error::InvalidRecord("empty record".into()));
    }
    check_theta(theta)?;
    Ok(log_likelihood_unchecked(record.method, &record.outcomes, theta, noise.r(), size.inv_d()))
}

/// The equally spaced interior angles `(i + 1) * h`, `h = (pi/2) / (N + 1)`.
#[derive(Debug, Clone, Copy)]
struct ThetaGrid {
    points: usize,
    step: f64,
}

impl ThetaGrid {
    fn new(points: usize) -> Self {
        Self { points, step: FRAC_PI_2 / (points + 1) as f64 }
    }

    fn theta(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.step
    }
}

/// `ln p(0)` and `ln p(1)` on the grid, one pair of columns per distinct `m`.
struct LogProbTable {
    grid: ThetaGrid,
    columns: BTreeMap<u32, (Vec<f64>, Vec<f64>)>,
}

impl LogProbTable {
    fn new(method: Method, ms: impl IntoIterator<Item = u32>, r: f64, inv_d: f64, grid: ThetaGrid) -> Self {
        let mut columns = BTreeMap::new();
        for m in ms {
            columns.entry(m).or_insert_with(|| {
                let n_q = method.query_count(m) as f64;
                let (mut ln0, mut ln1) = (Vec::with_capacity(grid.points), Vec::with_capacity(grid.points));
                for i in 0..grid.points {
                    let (p0, p1) = outcome_probs_nq(method, grid.theta(i), n_q, r, inv_d);
                    ln0.push(p0.ln());
                    ln1.push(p1.ln());
                }
                (ln0, ln1)
            });
        }
        Self { grid, columns }
    }

    fn accumulate(&self, acc: &mut [f64], o: &RoundOutcome) {
        let (ln0, ln1) = &self.columns[&o.m];
        let (h, miss) = (o.hits as f64, o.misses() as f64);
        match (o.hits, o.misses()) {
            (0, _) => acc.iter_mut().zip(ln0).for_each(|(a, l)| *a += miss * l),
            (_, 0) => acc.iter_mut().zip(ln1).for_each(|(a, l)| *a += h * l),
            _ => acc
                .iter_mut()
                .zip(ln0.iter().zip(ln1))
                .for_each(|(a, (l0, l1))| *a += h * l1 + miss * l0),
        }
    }
}

/// Grid scan followed by refinement of the best basins: bisection on the
/// score where it changes sign across the basin, golden section on the
/// likelihood otherwise. Equal refined likelihoods resolve to the smallest
/// angle.
fn maximize_on_grid<F, S>(acc: &[f64], grid: ThetaGrid, ll: F, score: S) -> Result<f64>
where
    F: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    let best = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(Error::DegenerateLikelihood);
    }
    let n = acc.len();
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let v = acc[i];
            v >= best - CANDIDATE_WINDOW
                && (i == 0 || v >= acc[i - 1])
                && (i + 1 == n || v >= acc[i + 1])
        })
        .collect();
    if candidates.len() > MAX_CANDIDATES {
        candidates.sort_by(|&a, &b| acc[b].total_cmp(&acc[a]).then(a.cmp(&b)));
        candidates.truncate(MAX_CANDIDATES);
        candidates.sort_unstable();
    }

    let mut chosen: Option<(f64, f64)> = None;
    for i in candidates {
        let lo = if i == 0 { 0.0 } else { grid.theta(i - 1) };
        let hi = if i + 1 == n { FRAC_PI_2 } else { grid.theta(i + 1) };
        let refined = score_root(&score, lo, hi).unwrap_or_else(|| golden_section_max(&ll, lo, hi, REFINE_TOLERANCE));
        let (theta, value) = {
            let (t0, v0) = (grid.theta(i), ll(grid.theta(i)));
            let v1 = ll(refined);
            if v1 >= v0 - 1e-12 * v0.abs().max(1.0) {
                (refined, v1)
            } else {
                (t0, v0)
            }
        };
        let tie = 1e-9 * value.abs().max(1.0);
        match chosen {
            Some((_, v)) if value <= v + tie => {}
            _ => chosen = Some((theta, value)),
        }
    }
    chosen.map(|(t, _)| t).ok_or(Error::DegenerateLikelihood)
}

/// Maximum-likelihood angle for a record.
pub fn mle_estimate(record: &MeasurementRecord, noise: &NoiseModel, size: SystemSize) -> Result<f64> {
    prefix_estimates(record, noise, size, GRID_POINTS)?
        .pop()
        .ok_or_else(|| Error::InvalidRecord("empty record".into()))
}

/// MLE from each prefix `outcomes[..=j]` of a record.
pub fn prefix_estimates(
    record: &MeasurementRecord,
    noise: &NoiseModel,
    size: SystemSize,
    grid_points: usize,
) -> Result<Vec<f64>> {
    if record.outcomes.is_empty() {
        return Err(Error::InvalidRecord("empty record".into()));
    }
    let grid = ThetaGrid::new(grid_points);
    let table = LogProbTable::new(record.method, record.outcomes.iter().map(|o| o.m), noise.r(), size.inv_d(), grid);
    estimates_with_table(record, &table, noise.r(), size.inv_d())
}

fn estimates_with_table(record: &MeasurementRecord, table: &LogProbTable, r: f64, inv_d: f64) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; table.grid.points];
    (0..record.outcomes.len())
        .map(|j| {
            table.accumulate(&mut acc, &record.outcomes[j]);
            let prefix = &record.outcomes[..=j];
            maximize_on_grid(
                &acc,
                table.grid,
                |t| log_likelihood_unchecked(record.method, prefix, t, r, inv_d),
                |t| score_unchecked(record.method, prefix, t, r, inv_d),
            )
        })
        .collect()
}

/// Cramer-Rao bounds on the RMSE of `theta` for one schedule prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrbRow {
    pub k: usize,
    pub n_q_tot: u64,
    /// From the method's own classical Fisher information.
    pub classical: f64,
    /// From the quantum Fisher information.
    pub quantum: f64,
    /// Noiseless Heisenberg reference, `4 N_q^2` per shot.
    pub noiseless: f64,
    /// Same query budget spent on single-query G shots.
    pub no_amplification: f64,
}

/// Bounds `1/sqrt(sum_j shots_j F(N_q(m_j)))` for every schedule prefix.
pub fn crb_curves(config: &ExperimentConfig, a: f64, method: Method) -> Result<Vec<CrbRow>> {
    let theta = EstimationProblem::from_amplitude(a)?.theta();
    let schedule = build_eis_schedule(config.base, config.rounds, config.shots, method)?;
    let (r, inv_d) = (config.noise.r(), config.size.inv_d());
    let per_query_single = classical_fisher_unchecked(Method::GBased, theta, 1.0, r, inv_d);
    let (mut fc, mut fq, mut f0, mut n_tot) = (0.0, 0.0, 0.0, 0u64);
    Ok(schedule
        .rounds
        .iter()
        .map(|round| {
            let n_q = method.query_count(round.m);
            let (nf, shots) = (n_q as f64, round.shots as f64);
            fc += shots * classical_fisher_unchecked(method, theta, nf, r, inv_d);
            fq += shots * quantum_unchecked(nf, r, inv_d);
            f0 += shots * 4.0 * nf * nf;
            n_tot += round.shots * n_q;
            CrbRow {
                k: round.k,
                n_q_tot: n_tot,
                classical: 1.0 / fc.sqrt(),
                quantum: 1.0 / fq.sqrt(),
                noiseless: 1.0 / f0.sqrt(),
                no_amplification: 1.0 / (n_tot as f64 * per_query_single).sqrt(),
            }
        })
        .collect())
}

/// One row of the RMSE-versus-queries table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub method: Method,
    pub a: f64,
    pub k: usize,
    pub n_q_tot: u64,
    pub rmse: f64,
    pub crb_classical: f64,
    pub crb_quantum: f64,
    pub crb_noiseless: f64,
    pub crb_no_amplification: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RmseTable {
    pub rows: Vec<RmseRow>,
}

impl RmseTable {
    /// Rows for one `(method, a)` cell, in prefix order.
    pub fn cell(&self, method: Method, a: f64) -> Vec<RmseRow> {
        self.rows.iter().filter(|r| r.method == method && r.a == a).copied().collect()
    }
}

/// Monte-Carlo RMSE of the prefix MLE for every method and target.
///
/// Repetition `i` of every cell draws its rounds from
/// `derive_seed(master_seed, i, k)`, so the table is identical for any
/// thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RmseTable> {
    run_experiment_with_grid(config, GRID_POINTS)
}

pub(crate) fn run_experiment_with_grid(config: &ExperimentConfig, grid_points: usize) -> Result<RmseTable> {
    config.validate()?;
    let (r, inv_d) = (config.noise.r(), config.size.inv_d());
    let grid = ThetaGrid::new(grid_points);
    let mut rows = Vec::new();
    for &method in &config.methods {
        let schedule = build_eis_schedule(config.base, config.rounds, config.shots, method)?;
        let table = LogProbTable::new(method, schedule.rounds.iter().map(|r| r.m), r, inv_d, grid);
        for &a in &config.targets {
            let theta = EstimationProblem::from_amplitude(a)?.theta();
            let crb = crb_curves(config, a, method)?;
            let per_rep: Vec<Vec<f64>> = (0..config.repetitions)
                .into_par_iter()
                .map(|rep| {
                    let record = MeasurementRecord::sample(
                        method,
                        theta,
                        &schedule,
                        &config.noise,
                        config.size,
                        config.master_seed,
                        rep as u64,
                    )?;
                    estimates_with_table(&record, &table, r, inv_d)
                })
                .collect::<Result<_>>()?;
            for (j, bound) in crb.iter().enumerate() {
                let mse = per_rep.iter().map(|est| (est[j] - theta).powi(2)).sum::<f64>() / per_rep.len() as f64;
                rows.push(RmseRow {
                    method,
                    a,
                    k: bound.k,
                    n_q_tot: bound.n_q_tot,
                    rmse: mse.sqrt(),
                    crb_classical: bound.classical,
                    crb_quantum: bound.quantum,
                    crb_noiseless: bound.noiseless,
                    crb_no_amplification: bound.no_amplification,
                });
            }
        }
    }
    Ok(RmseTable { rows })
}
