//! Classical and quantum Fisher information for both estimators.
//!
//! Everything here takes the query count `n_q` as a real number: envelopes
//! and the quantum Fisher information are plotted as continuous curves,
//! while the odd/even parity of physical query counts is enforced in
//! [`crate::amplitude_model`].
//!
//! With `x = r^n_q` and `u = 1/d`:
//!
//! * G envelope: `4 n_q^2 x^2`
//! * Q envelope: `4 n_q^2 x^2 / (x + 2u(1-u)(1-x)^2 + 2(1-x) sqrt(u(1-u)(1-u+ux)((1-u)x+u)))`
//! * quantum:    `4 n_q^2 x^2 / (2u + (1-2u) x)`
//!
//! The Q envelope is usually written as
//! `4N^2 x + 8N^2 (d-1)/d^2 (1-x)^2 - 8N^2 (1-x) sqrt((d-1)(d-1+x)((d-1)x+1))/d^2`.
//! Multiplying by the conjugate of the square-root term collapses the
//! numerator to `x^2`; the quotient form above avoids the cancellation
//! that otherwise destroys all significant digits once `x` is small.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::amplitude_model::{check_theta, survival, Method, NoiseModel, SystemSize};
use crate::error::{Error, Result};

fn check_nq(n_q: f64) -> Result<()> {
    if n_q.is_finite() && n_q >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidQueryCount(n_q))
    }
}

/// Fisher information of the two-outcome measurement at angle `theta`.
///
/// Where an outcome probability is exactly zero (only possible without
/// depolarization, or for Q with `d = infinity`) the value is the limit
/// in `theta`, which is finite.
pub fn classical_fisher(
    method: Method,
    theta: f64,
    n_q: f64,
    noise: &NoiseModel,
    size: SystemSize,
) -> Result<f64> {
    check_theta(theta)?;
    check_nq(n_q)?;
    Ok(classical_fisher_unchecked(method, theta, n_q, noise.r(), size.inv_d()))
}

pub(crate) fn classical_fisher_unchecked(
    method: Method,
    theta: f64,
    n_q: f64,
    r: f64,
    inv_d: f64,
) -> f64 {
    let x = survival(r, n_q);
    if x == 0.0 {
        return 0.0;
    }
    let (s, c) = (n_q * theta).sin_cos();
    let (s2, c2) = (s * s, c * c);
    let (floor0, floor1) = match method {
        Method::GBased => (0.5, 0.5),
        Method::QBased => (inv_d, 1.0 - inv_d),
    };
    let p0 = x * c2 + (1.0 - x) * floor0;
    let p1 = x * s2 + (1.0 - x) * floor1;
    // x c^2/p0 and x s^2/p1 lie in [0, 1] and tend to 1 where the
    // probability vanishes.
    let h0 = if p0 > 0.0 { x * c2 / p0 } else { 1.0 };
    let h1 = if p1 > 0.0 { x * s2 / p1 } else { 1.0 };
    4.0 * n_q * n_q * h0 * h1
}

/// Upper envelope over `theta` of [`classical_fisher`].
pub fn classical_fisher_envelope(
    method: Method,
    n_q: f64,
    noise: &NoiseModel,
    size: SystemSize,
) -> Result<f64> {
    check_nq(n_q)?;
    Ok(envelope_unchecked(method, n_q, noise.r(), size.inv_d()))
}

pub(crate) fn envelope_unchecked(method: Method, n_q: f64, r: f64, inv_d: f64) -> f64 {
    let x = survival(r, n_q);
    if x == 0.0 {
        return 0.0;
    }
    let scale = 4.0 * n_q * n_q * x;
    match method {
        Method::GBased => scale * x,
        Method::QBased => {
            let u = inv_d;
            let v = 1.0 - u;
            let y = 1.0 - x;
            let root = (u * v * (v + u * x) * (v * x + u)).sqrt();
            scale * (x / (x + 2.0 * u * v * y * y + 2.0 * y * root))
        }
    }
}

/// Quantum Fisher information of the noisy output state. It does not depend
/// on `theta` and is the same for both operators.
pub fn quantum_fisher(n_q: f64, noise: &NoiseModel, size: SystemSize) -> Result<f64> {
    check_nq(n_q)?;
    Ok(quantum_unchecked(n_q, noise.r(), size.inv_d()))
}

pub(crate) fn quantum_unchecked(n_q: f64, r: f64, inv_d: f64) -> f64 {
    let x = survival(r, n_q);
    if x == 0.0 {
        return 0.0;
    }
    let two_u = 2.0 * inv_d;
    4.0 * n_q * n_q * x * (x / (two_u + (1.0 - two_u) * x))
}

/// Location and height of an envelope maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePeak {
    pub n_q: f64,
    pub value: f64,
}

/// Absolute tolerance in `n_q` of the numerical peak search.
pub const PEAK_TOLERANCE: f64 = 1e-6;

/// Maximum of the classical envelope over real `n_q`.
///
/// G peaks at `-1/ln r` with height `4/(e^2 ln^2 r)` for every `d`; Q with
/// `d = infinity` peaks at `-2/ln r` with height `16/(e^2 ln^2 r)`. Finite-d
/// Q has no closed form and is maximized by golden-section search over
/// `(0, 10/(-ln r)]`.
pub fn envelope_peak(method: Method, r: f64, size: SystemSize) -> Result<EnvelopePeak> {
    let noise = NoiseModel::depolarizing(r)?;
    if noise.is_noiseless() {
        return Err(Error::NoInteriorPeak(
            "the noiseless envelope 4 n_q^2 grows without bound".into(),
        ));
    }
    let ln_r = r.ln();
    let e2l2 = E * E * ln_r * ln_r;
    let peak = match (method, size) {
        (Method::GBased, _) => EnvelopePeak { n_q: -1.0 / ln_r, value: 4.0 / e2l2 },
        (Method::QBased, SystemSize::Infinite) => {
            EnvelopePeak { n_q: -2.0 / ln_r, value: 16.0 / e2l2 }
        }
        (Method::QBased, _) => {
            let inv_d = size.inv_d();
            let f = |n: f64| envelope_unchecked(Method::QBased, n, r, inv_d);
            let n_q = golden_section_max(f, 0.0, -10.0 / ln_r, PEAK_TOLERANCE);
            EnvelopePeak { n_q, value: f(n_q) }
        }
    };
    Ok(peak)
}

/// Maximizer of a unimodal `f` on `[lo, hi]`, to within `tol`.
pub(crate) fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    if fa >= fb {
        a
    } else {
        b
    }
}

/// Which quantity a [`FisherCurve`] traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CurveKind {
    /// Classical Fisher information at a fixed angle.
    Classical { theta: f64 },
    ClassicalEnvelope,
    Quantum,
    /// `4 n_q^2`, the noiseless value shared by all four quantities.
    Noiseless,
    /// Single-query reference: the G envelope at `n_q = 1`, constant in `n_q`.
    NoAmplification,
}

impl CurveKind {
    pub fn label(&self, method: Method) -> String {
        match self {
            CurveKind::Classical { theta } => format!("classical_{method}_theta={theta}"),
            CurveKind::ClassicalEnvelope => format!("envelope_{method}"),
            CurveKind::Quantum => "quantum".to_string(),
            CurveKind::Noiseless => "noiseless".to_string(),
            CurveKind::NoAmplification => "no_amplification".to_string(),
        }
    }
}

/// A sampled Fisher-information series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherCurve {
    pub kind: CurveKind,
    pub method: Method,
    pub size: SystemSize,
    pub points: Vec<(f64, f64)>,
}

impl FisherCurve {
    pub fn label(&self) -> String {
        self.kind.label(self.method)
    }

    pub fn max_point(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .copied()
            .fold(None, |best, p| match best {
                Some(b) if b.1 >= p.1 => Some(b),
                _ => Some(p),
            })
    }
}

/// Evaluate `kind` on every point of a strictly increasing `n_q` grid.
pub fn curve(
    kind: CurveKind,
    method: Method,
    noise: &NoiseModel,
    size: SystemSize,
    n_q_grid: &[f64],
) -> Result<FisherCurve> {
    if n_q_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::InvalidConfig("n_q grid must be strictly increasing".into()));
    }
    let points = n_q_grid
        .iter()
        .map(|&n_q| {
            let q = FisherQuery { method, theta: None, n_q, noise: *noise, size };
            let value = match kind {
                CurveKind::Classical { theta } => FisherQuery { theta: Some(theta), ..q }.classical()?,
                CurveKind::ClassicalEnvelope => q.envelope()?,
                CurveKind::Quantum => q.quantum()?,
                CurveKind::Noiseless => {
                    check_nq(n_q)?;
                    4.0 * n_q * n_q
                }
                CurveKind::NoAmplification => {
                    check_nq(n_q)?;
                    envelope_unchecked(Method::GBased, 1.0, noise.r(), 0.0)
                }
            };
            Ok((n_q, value))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FisherCurve { kind, method, size, points })
}

/// Bundles the arguments shared by the Fisher-information functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherQuery {
    pub method: Method,
    pub theta: Option<f64>,
    pub n_q: f64,
    pub noise: NoiseModel,
    pub size: SystemSize,
}

impl FisherQuery {
    pub fn classical(&self) -> Result<f64> {
        let theta = self.theta.ok_or(Error::Undefined("classical Fisher information without an angle"))?;
        classical_fisher(self.method, theta, self.n_q, &self.noise, self.size)
    }

    pub fn envelope(&self) -> Result<f64> {
        classical_fisher_envelope(self.method, self.n_q, &self.noise, self.size)
    }

    pub fn quantum(&self) -> Result<f64> {
        quantum_fisher(self.n_q, &self.noise, self.size)
    }
}
