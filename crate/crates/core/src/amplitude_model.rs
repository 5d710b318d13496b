//! Closed-form outcome distributions for the G-based and Q-based estimators.
//!
//! The G-based method amplifies `A|0>` with `G = A U0 A† Uf` and reads the
//! ancilla; the Q-based method rotates `|0>` with `Q = U0 A† Uf A` and asks
//! whether every qubit reads zero. Under global depolarizing noise applied
//! after each use of `A` or `A†`, the state after `N_q` queries is
//! `x ρ_pure + (1 - x) I/d` with `x = r^N_q`, so both distributions stay in
//! closed form. Readout error only enters as an analytic Fisher-information
//! factor, see [`readout_factor`].

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitude-amplification operator used by an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Conventional Grover operator, ancilla readout.
    #[serde(rename = "G")]
    GBased,
    /// Modified operator acting on `|0>`, all-zero readout.
    #[serde(rename = "Q")]
    QBased,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::GBased, Method::QBased];

    /// Number of calls to `A` or `A†` made by `m` amplification steps.
    pub fn query_count(self, m: u32) -> u64 {
        let m = u64::from(m);
        match self {
            Method::GBased => 2 * m + 1,
            Method::QBased => 2 * m,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::GBased => "G",
            Method::QBased => "Q",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Free-function form of [`Method::query_count`].
pub fn query_count(method: Method, m: u32) -> u64 {
    method.query_count(m)
}

/// The unknown angle and the amplitude `a = sin^2(theta)` it encodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationProblem {
    theta: f64,
    a: f64,
}

impl EstimationProblem {
    pub fn from_theta(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let s = theta.sin();
        Ok(Self { theta, a: s * s })
    }

    pub fn from_amplitude(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::AmplitudeOutOfRange(a));
        }
        let theta = a.sqrt().asin();
        check_theta(theta)?;
        Ok(Self { theta, a })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn amplitude(&self) -> f64 {
        self.a
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange(theta))
    }
}

/// Depolarizing survival parameter `r` and per-qubit readout error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    r: f64,
    readout_eps: f64,
}

impl NoiseModel {
    pub fn new(r: f64, readout_eps: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidSurvival(r));
        }
        if !(0.0..1.0).contains(&readout_eps) {
            return Err(Error::InvalidReadoutError(readout_eps));
        }
        Ok(Self { r, readout_eps })
    }

    pub fn depolarizing(r: f64) -> Result<Self> {
        Self::new(r, 0.0)
    }

    pub fn noiseless() -> Self {
        Self { r: 1.0, readout_eps: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn readout_eps(&self) -> f64 {
        self.readout_eps
    }

    pub fn is_noiseless(&self) -> bool {
        self.r == 1.0
    }

    /// Weight `r^n_q` left on the noiseless state after `n_q` queries.
    pub fn survival(&self, n_q: f64) -> f64 {
        survival(self.r, n_q)
    }
}

/// `r^n_q`, evaluated as `exp(n_q ln r)`.
pub(crate) fn survival(r: f64, n_q: f64) -> f64 {
    (n_q * r.ln()).exp()
}

/// Register size, stored as the inverse Hilbert-space dimension `1/d`.
///
/// `d` itself is never materialized: for a 101-qubit register `1/d` is
/// about `3.9e-31`, which `f64` holds exactly as a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSize {
    /// A register of `log2_dim` qubits in total, `d = 2^log2_dim`.
    Finite { log2_dim: u32 },
    /// The `d -> infinity` limit, `1/d = 0`.
    Infinite,
}

impl SystemSize {
    /// Largest supported register width.
    pub const MAX_LOG2_DIM: u32 = 1000;

    /// `n` data qubits plus one ancilla, `d = 2^(n+1)`.
    pub fn qubits(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSystemSize(
                "need at least one data qubit".into(),
            ));
        }
        Self::from_log2_dim(n + 1)
    }

    /// A register whose total width is `log2_dim` qubits, `d = 2^log2_dim`.
    /// `from_log2_dim(1)` is the single-qubit case `d = 2`.
    pub fn from_log2_dim(log2_dim: u32) -> Result<Self> {
        if log2_dim == 0 || log2_dim > Self::MAX_LOG2_DIM {
            return Err(Error::InvalidSystemSize(format!(
                "register width {log2_dim} outside 1..={}",
                Self::MAX_LOG2_DIM
            )));
        }
        Ok(Self::Finite { log2_dim })
    }

    pub fn inv_d(&self) -> f64 {
        match *self {
            // Powers of one half are exact in binary floating point.
            SystemSize::Finite { log2_dim } => 0.5f64.powi(log2_dim as i32),
            SystemSize::Infinite => 0.0,
        }
    }

    pub fn log2_dim(&self) -> Option<u32> {
        match *self {
            SystemSize::Finite { log2_dim } => Some(log2_dim),
            SystemSize::Infinite => None,
        }
    }

    /// Data qubits `n` in the `d = 2^(n+1)` convention (0 for `d = 2`).
    pub fn data_qubits(&self) -> Option<u32> {
        self.log2_dim().map(|k| k - 1)
    }

    /// `d` as an integer, when it fits.
    pub fn dim(&self) -> Option<u64> {
        self.log2_dim().filter(|&k| k < 64).map(|k| 1u64 << k)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SystemSize::Infinite)
    }
}

impl fmt::Display for SystemSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemSize::Finite { log2_dim } => write!(f, "d=2^{log2_dim}"),
            SystemSize::Infinite => f.write_str("d=inf"),
        }
    }
}

/// One entry of an amplification schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    /// Position `k` in the generating sequence.
    pub k: usize,
    pub m: u32,
    pub shots: u64,
}

/// Ordered amplification rounds. Repeated `m` values are distinct rounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub rounds: Vec<Round>,
}

impl Schedule {
    pub fn new(rounds: Vec<Round>) -> Result<Self> {
        if let Some(r) = rounds.iter().find(|r| r.shots == 0) {
            return Err(Error::InvalidSchedule(format!(
                "round k={} has zero shots",
                r.k
            )));
        }
        Ok(Self { rounds })
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// `sum_k shots_k * N_q(m_k)`.
    pub fn total_queries(&self, method: Method) -> u64 {
        self.rounds
            .iter()
            .map(|r| r.shots * method.query_count(r.m))
            .sum()
    }
}

/// Sampled result of one round: `hits` counts the "good" outcomes (ancilla
/// reads 1 for G, anything but the all-zero string for Q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub m: u32,
    pub shots: u64,
    pub hits: u64,
}

impl RoundOutcome {
    pub fn new(m: u32, shots: u64, hits: u64) -> Result<Self> {
        if shots == 0 || hits > shots {
            return Err(Error::InvalidRecord(format!(
                "hits {hits} / shots {shots} is not a valid count"
            )));
        }
        Ok(Self { m, shots, hits })
    }

    pub fn misses(&self) -> u64 {
        self.shots - self.hits
    }
}

/// `(p(0), p(1))` on a real-valued query count; no argument checks.
pub(crate) fn outcome_probs_nq(
    method: Method,
    theta: f64,
    n_q: f64,
    r: f64,
    inv_d: f64,
) -> (f64, f64) {
    let x = survival(r, n_q);
    let (s, c) = (n_q * theta).sin_cos();
    let (s2, c2) = (s * s, c * c);
    let mixed = 1.0 - x;
    match method {
        Method::GBased => (x * c2 + mixed * 0.5, x * s2 + mixed * 0.5),
        Method::QBased => (x * c2 + mixed * inv_d, x * s2 + mixed * (1.0 - inv_d)),
    }
}

/// Both outcome probabilities `(p(0), p(1))` after `m` amplification steps.
pub fn outcome_probs(
    method: Method,
    theta: f64,
    m: u32,
    noise: &NoiseModel,
    size: SystemSize,
) -> Result<(f64, f64)> {
    check_theta(theta)?;
    let n_q = method.query_count(m) as f64;
    Ok(outcome_probs_nq(method, theta, n_q, noise.r(), size.inv_d()))
}

/// Probability of the "good" outcome after `m` amplification steps.
///
/// G: `x sin^2(N_q θ) + (1 - x)/2`; Q: `x sin^2(N_q θ) + (1 - x)(d-1)/d`,
/// with `x = r^N_q`. Readout error is not applied here.
pub fn prob_good(
    method: Method,
    theta: f64,
    m: u32,
    noise: &NoiseModel,
    size: SystemSize,
) -> Result<f64> {
    outcome_probs(method, theta, m, noise, size).map(|(_, p1)| p1)
}

/// Draw the number of good outcomes in `shots` repetitions.
///
/// The draw is a pure function of the arguments: `seed` keys a ChaCha8
/// stream that feeds a single binomial variate.
pub fn sample_round(
    method: Method,
    theta: f64,
    m: u32,
    shots: u64,
    noise: &NoiseModel,
    size: SystemSize,
    seed: u64,
) -> Result<RoundOutcome> {
    if shots == 0 {
        return Err(Error::InvalidRecord("a round needs at least one shot".into()));
    }
    let p = prob_good(method, theta, m, noise, size)?.clamp(0.0, 1.0);
    let hits = draw_binomial(shots, p, seed);
    Ok(RoundOutcome { m, shots, hits })
}

pub(crate) fn draw_binomial(shots: u64, p: f64, seed: u64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return shots;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Binomial::new(shots, p)
        .expect("p lies strictly inside (0, 1)")
        .sample(&mut rng)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Round-level seed `hash(master, repetition, round)`.
///
/// Each round gets its own stream, so results do not depend on the order
/// in which repetitions or rounds are evaluated.
pub fn derive_seed(master_seed: u64, repetition: u64, round: u64) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ splitmix64(repetition.wrapping_add(0x632B_E59B_D9B4_E019)));
    splitmix64(h ^ splitmix64(round.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// Fisher-information penalty `(1 - eps)^n` from independent readout flips
/// on `n` measured qubits.
pub fn readout_factor(n: u32, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidReadoutError(eps));
    }
    Ok((1.0 - eps).powi(n as i32))
}

/// Qubit count at which `(1 - eps)^n = 1/2`.
pub fn breakeven_qubits(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidReadoutError(eps));
    }
    Ok(0.5f64.ln() / (-eps).ln_1p())
}
