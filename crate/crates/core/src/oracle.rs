//! Small-register density-matrix reference simulator.
//!
//! Builds an explicit state-preparation unitary `A(θ) = W ⊗ R_y(2θ)` on `n`
//! data qubits plus an ancilla (the least significant bit of the
//! computational index), runs the G and Q protocols gate by gate with the
//! depolarizing channel after every `A` and `A†`, and recomputes the
//! measured probabilities, classical Fisher information and SLD quantum
//! Fisher information without using any of the closed forms.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::amplitude_model::{check_theta, Method, NoiseModel, SystemSize};
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest number of data qubits the oracle accepts (`d = 512`).
pub const MAX_DATA_QUBITS: u32 = 8;
/// Spectral cutoff on `λ_i + λ_j` in the SLD sum.
pub const SLD_CUTOFF: f64 = 1e-12;
/// Central-difference step of [`numeric_classical_fisher`].
pub const FD_STEP: f64 = 1e-5;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Seeded Haar-like unitary on `dim` levels: QR of a complex Ginibre
/// matrix with the phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn ry(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)])
}

fn ry_derivative(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_row_slice(2, 2, &[C64::new(-s, 0.0), C64::new(-c, 0.0), C64::new(c, 0.0), C64::new(-s, 0.0)])
}

/// Deterministic `A(θ)` with `A|0> = cosθ |w>|0> + sinθ |w>|1>`, `|w> = W|0>`.
#[derive(Debug, Clone)]
pub struct UnitaryFactory {
    n: u32,
    theta: f64,
    w_seed: u64,
    w: CMatrix,
}

impl UnitaryFactory {
    pub fn new(n: u32, theta: f64, w_seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_DATA_QUBITS {
            return Err(Error::RegisterTooLarge(n, MAX_DATA_QUBITS));
        }
        check_theta(theta)?;
        let w = random_unitary(1 << n, w_seed);
        Ok(Self { n, theta, w_seed, w })
    }

    /// Same `W`, different angle.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self { theta, ..self.clone() })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn w_seed(&self) -> u64 {
        self.w_seed
    }

    /// `2^(n+1)`.
    pub fn dim(&self) -> usize {
        2 << self.n
    }

    pub fn size(&self) -> SystemSize {
        SystemSize::Finite { log2_dim: self.n + 1 }
    }

    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    /// `(W ⊗ I)(I ⊗ R_y(2θ)) = W ⊗ R_y(2θ)`.
    pub fn a(&self) -> CMatrix {
        self.w.kronecker(&ry(self.theta))
    }

    /// `dA/dθ`; only the rotation depends on θ.
    pub fn a_derivative(&self) -> CMatrix {
        self.w.kronecker(&ry_derivative(self.theta))
    }
}

/// The reflections `U0 = -I + 2|0><0|` and `Uf = -I + 2 I_n ⊗ |0><0|`,
/// both diagonal in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionOps {
    pub u0: Vec<f64>,
    pub uf: Vec<f64>,
}

impl ReflectionOps {
    pub fn new(dim: usize) -> Self {
        let u0 = (0..dim).map(|i| if i == 0 { 1.0 } else { -1.0 }).collect();
        let uf = (0..dim).map(|i| if i & 1 == 0 { 1.0 } else { -1.0 }).collect();
        Self { u0, uf }
    }

    pub fn u0_matrix(&self) -> CMatrix {
        diag_matrix(&self.u0)
    }

    pub fn uf_matrix(&self) -> CMatrix {
        diag_matrix(&self.uf)
    }
}

fn diag_matrix(signs: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(signs.len(), signs.iter().map(|&s| C64::new(s, 0.0))))
}

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    /// Wrap `matrix` after checking it is Hermitian with unit trace and no
    /// eigenvalue below `-1e-10`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dev = hermitian_deviation(&matrix);
        if dev > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::Undefined("density matrix with trace other than 1"));
        }
        let rho = Self { matrix };
        if rho.min_eigenvalue() < -Self::PSD_TOL {
            return Err(Error::Undefined("density matrix with a negative eigenvalue"));
        }
        Ok(rho)
    }

    pub fn pure(state: &DVector<C64>) -> Result<Self> {
        Self::new(state * state.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// `max |M - M†|` over entries.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Where the depolarizing channel is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepolarizingOrder {
    /// After every `A` and `A†`.
    Interleaved,
    /// Once at the end with weight `r^N_q`; equivalent because the channel
    /// commutes with unitaries.
    Deferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    A,
    ADag,
    U0,
    Uf,
}

fn protocol(method: Method, m: u32) -> Vec<Step> {
    let mut steps = Vec::new();
    match method {
        Method::GBased => {
            steps.push(Step::A);
            for _ in 0..m {
                steps.extend([Step::Uf, Step::ADag, Step::U0, Step::A]);
            }
        }
        Method::QBased => {
            for _ in 0..m {
                steps.extend([Step::A, Step::Uf, Step::ADag, Step::U0]);
            }
        }
    }
    steps
}

/// `ρ` together with `dρ/dθ`.
struct Tracked {
    rho: CMatrix,
    drho: Option<CMatrix>,
}

impl Tracked {
    fn unitary(&mut self, u: &CMatrix, du: Option<&CMatrix>) {
        let u_adj = u.adjoint();
        if let Some(drho) = self.drho.as_mut() {
            let du = du.expect("derivative tracking needs dU");
            // d(UρU†) = dU ρ U† + U dρ U† + (dU ρ U†)†
            let x = du * &self.rho * &u_adj;
            *drho = u * &*drho * &u_adj + &x + x.adjoint();
        }
        self.rho = u * &self.rho * &u_adj;
    }

    fn reflect(&mut self, signs: &[f64]) {
        let flip = |m: &mut CMatrix| {
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    if signs[i] != signs[j] {
                        m[(i, j)] = -m[(i, j)];
                    }
                }
            }
        };
        flip(&mut self.rho);
        if let Some(d) = self.drho.as_mut() {
            flip(d);
        }
    }

    fn depolarize(&mut self, weight: f64) {
        let dim = self.rho.nrows();
        let floor = C64::new((1.0 - weight) / dim as f64, 0.0);
        self.rho *= C64::new(weight, 0.0);
        for i in 0..dim {
            self.rho[(i, i)] += floor;
        }
        if let Some(d) = self.drho.as_mut() {
            *d *= C64::new(weight, 0.0);
        }
    }
}

fn run_protocol(
    method: Method,
    m: u32,
    factory: &UnitaryFactory,
    r: f64,
    order: DepolarizingOrder,
    with_derivative: bool,
) -> Result<Tracked> {
    NoiseModel::depolarizing(r)?;
    let dim = factory.dim();
    let a = factory.a();
    let a_dag = a.adjoint();
    let (da, da_dag) = if with_derivative {
        let da = factory.a_derivative();
        let da_dag = da.adjoint();
        (Some(da), Some(da_dag))
    } else {
        (None, None)
    };
    let refl = ReflectionOps::new(dim);
    let mut rho = CMatrix::zeros(dim, dim);
    rho[(0, 0)] = ONE;
    let mut state = Tracked { rho, drho: with_derivative.then(|| CMatrix::from_element(dim, dim, ZERO)) };
    let mut queries = 0i32;
    for step in protocol(method, m) {
        match step {
            Step::A | Step::ADag => {
                if step == Step::A {
                    state.unitary(&a, da.as_ref());
                } else {
                    state.unitary(&a_dag, da_dag.as_ref());
                }
                queries += 1;
                if order == DepolarizingOrder::Interleaved {
                    state.depolarize(r);
                }
            }
            Step::U0 => state.reflect(&refl.u0),
            Step::Uf => state.reflect(&refl.uf),
        }
    }
    if order == DepolarizingOrder::Deferred {
        state.depolarize(r.powi(queries));
    }
    Ok(state)
}

/// Run `m` amplification steps of `method` on the explicit circuit, with
/// the depolarizing channel after every query.
pub fn evolve(method: Method, m: u32, factory: &UnitaryFactory, r: f64) -> Result<DensityMatrix> {
    evolve_ordered(method, m, factory, r, DepolarizingOrder::Interleaved)
}

pub fn evolve_ordered(
    method: Method,
    m: u32,
    factory: &UnitaryFactory,
    r: f64,
    order: DepolarizingOrder,
) -> Result<DensityMatrix> {
    let state = run_protocol(method, m, factory, r, order, false)?;
    DensityMatrix::new(state.rho)
}

/// `(ρ, dρ/dθ)` with the derivative propagated analytically through the
/// circuit.
pub fn evolve_with_derivative(
    method: Method,
    m: u32,
    factory: &UnitaryFactory,
    r: f64,
) -> Result<(DensityMatrix, CMatrix)> {
    let state = run_protocol(method, m, factory, r, DepolarizingOrder::Interleaved, true)?;
    let drho = state.drho.expect("derivative was tracked");
    Ok((DensityMatrix::new(state.rho)?, drho))
}

/// `(p0, p1)`: G reads the ancilla, Q asks whether every qubit is zero.
pub fn measure_probs(rho: &DensityMatrix, method: Method) -> (f64, f64) {
    let diag = rho.matrix().diagonal();
    let (mut p0, mut p1) = (0.0, 0.0);
    for (i, z) in diag.iter().enumerate() {
        let zero = match method {
            Method::GBased => i & 1 == 0,
            Method::QBased => i == 0,
        };
        if zero {
            p0 += z.re;
        } else {
            p1 += z.re;
        }
    }
    (p0, p1)
}

/// `‖Q^m|0> - cos(2mθ)|0> - sin(2mθ)|φ>‖` with `|φ> = (Q - cos2θ)|0>/sin2θ`.
pub fn rotation_check(factory: &UnitaryFactory, m: u32) -> Result<f64> {
    let theta = factory.theta();
    let (s2, c2) = (2.0 * theta).sin_cos();
    if s2.abs() < 1e-12 {
        return Err(Error::Undefined("rotation basis at sin 2θ = 0"));
    }
    let dim = factory.dim();
    let a = factory.a();
    let refl = ReflectionOps::new(dim);
    let q = refl.u0_matrix() * a.adjoint() * refl.uf_matrix() * &a;
    let mut zero = DVector::from_element(dim, ZERO);
    zero[0] = ONE;
    let phi = (&q * &zero - &zero * C64::new(c2, 0.0)) / C64::new(s2, 0.0);
    let mut psi = zero.clone();
    for _ in 0..m {
        psi = &q * psi;
    }
    let angle = 2.0 * f64::from(m) * theta;
    let expected = &zero * C64::new(angle.cos(), 0.0) + &phi * C64::new(angle.sin(), 0.0);
    Ok((psi - expected).norm())
}

/// SLD quantum Fisher information of `ρ` given `dρ/dθ`:
/// `Σ 2|<i|dρ|j>|² / (λ_i + λ_j)` over eigenpairs with `λ_i + λ_j > 1e-12`.
pub fn sld_fisher(rho: &DensityMatrix, drho: &CMatrix) -> Result<f64> {
    let dev = hermitian_deviation(drho);
    if dev > 1e-9 * drho.norm().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let eig = SymmetricEigen::new(rho.matrix().clone());
    let v = &eig.eigenvectors;
    let rotated = v.adjoint() * drho * v;
    let lambda = &eig.eigenvalues;
    let n = lambda.len();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = lambda[i] + lambda[j];
            if s > SLD_CUTOFF {
                f += 2.0 * rotated[(i, j)].norm_sqr() / s;
            }
        }
    }
    Ok(f)
}

/// Quantum Fisher information of the circuit's output state, from the SLD.
pub fn numeric_qfi(method: Method, m: u32, factory: &UnitaryFactory, r: f64) -> Result<f64> {
    let (rho, drho) = evolve_with_derivative(method, m, factory, r)?;
    sld_fisher(&rho, &drho)
}

/// Classical Fisher information of the two-outcome measurement, with
/// `dp/dθ` from a Richardson-extrapolated central difference.
pub fn numeric_classical_fisher(method: Method, m: u32, factory: &UnitaryFactory, r: f64) -> Result<f64> {
    let p1_at = |theta: f64| -> Result<f64> {
        let f = factory.with_theta(theta)?;
        Ok(measure_probs(&evolve(method, m, &f, r)?, method).1)
    };
    let theta = factory.theta();
    let central = |h: f64| -> Result<f64> { Ok((p1_at(theta + h)? - p1_at(theta - h)?) / (2.0 * h)) };
    let d_full = central(FD_STEP)?;
    let d_half = central(FD_STEP / 2.0)?;
    let slope = (4.0 * d_half - d_full) / 3.0;
    let (p0, p1) = measure_probs(&evolve(method, m, factory, r)?, method);
    if p0 <= 1e-12 || p1 <= 1e-12 {
        return Err(Error::Undefined("classical Fisher information at a deterministic outcome"));
    }
    Ok(slope * slope * (1.0 / p0 + 1.0 / p1))
}

/// Upper bound on the quantum Fisher information of `n_ops` sequential
/// θ-dependent unitaries with non-expansive derivatives, each followed by
/// depolarizing noise of strength `r_i`, on a `dim`-level system.
pub fn theorem_bound(n_ops: u64, dim: u64, r_list: &[f64]) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidSystemSize(format!("dimension {dim} below 2")));
    }
    let mut product = 1.0;
    for &r in r_list {
        product *= NoiseModel::depolarizing(r)?.r();
    }
    let n2 = 4.0 * (n_ops as f64).powi(2);
    let two_over_d = 2.0 / dim as f64;
    Ok(n2 * product * product / (two_over_d + (1.0 - two_over_d) * product))
}

/// Grid and tolerances of the oracle-versus-closed-form comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationConfig {
    /// Data-qubit counts `1..=max_n`.
    pub max_n: u32,
    /// Amplification steps `0..=max_m`.
    pub max_m: u32,
    pub r_values: Vec<f64>,
    pub seeds: u64,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    /// Added to `r` inside the oracle only; a harness self-test.
    pub fault: Option<f64>,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            max_n: 4,
            max_m: 5,
            r_values: vec![1.0, 0.9, 0.5],
            seeds: 20,
            methods: Method::ALL.to_vec(),
            master_seed: 1,
            fault: None,
        }
    }
}

pub const PROB_TOL: f64 = 1e-10;
pub const QFI_TOL: f64 = 1e-8;
pub const CLASSICAL_TOL: f64 = 1e-6;
pub const ROTATION_TOL: f64 = 1e-10;
pub const BOUND_SLACK: f64 = 1e-9;

/// One `(method, n, m, r, seed)` cell. Deviations are `None` where the check
/// does not apply (degenerate classical FI, rotation only at `r = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub method: Method,
    pub n: u32,
    pub m: u32,
    pub r: f64,
    pub seed: u64,
    pub theta: f64,
    pub prob_dev: f64,
    pub qfi_rel_dev: f64,
    pub bound_ratio: f64,
    pub bound_rel_dev: f64,
    pub classical_rel_dev: Option<f64>,
    pub rotation_dev: Option<f64>,
}

impl CaseResult {
    pub fn bound_holds(&self) -> bool {
        self.bound_ratio <= 1.0 + BOUND_SLACK
    }

    pub fn passed(&self) -> bool {
        self.prob_dev <= PROB_TOL
            && self.qfi_rel_dev <= QFI_TOL
            && self.bound_holds()
            && self.bound_rel_dev <= QFI_TOL
            && self.classical_rel_dev.is_none_or(|d| d <= CLASSICAL_TOL)
            && self.rotation_dev.is_none_or(|d| d <= ROTATION_TOL)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub cases: Vec<CaseResult>,
}

impl VerificationReport {
    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn max_prob_dev(&self) -> f64 {
        self.cases.iter().map(|c| c.prob_dev).fold(0.0, f64::max)
    }

    pub fn max_qfi_rel_dev(&self) -> f64 {
        self.cases.iter().map(|c| c.qfi_rel_dev).fold(0.0, f64::max)
    }
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Seeded angle in `(0.05, π/2 - 0.05)`.
pub fn case_theta(seed: u64) -> f64 {
    let u = (crate::amplitude_model::derive_seed(seed, 0, 0) >> 11) as f64 / (1u64 << 53) as f64;
    0.05 + u * (std::f64::consts::FRAC_PI_2 - 0.1)
}

/// Evaluate a single cell against the closed forms.
pub fn verify_case(method: Method, n: u32, m: u32, r: f64, seed: u64, fault: Option<f64>) -> Result<CaseResult> {
    let theta = case_theta(seed);
    let factory = UnitaryFactory::new(n, theta, seed)?;
    let size = factory.size();
    let noise = NoiseModel::depolarizing(r)?;
    let r_oracle = match fault {
        Some(delta) => (r - delta).clamp(f64::MIN_POSITIVE, 1.0),
        None => r,
    };

    let (rho, drho) = evolve_with_derivative(method, m, &factory, r_oracle)?;
    let (p0, p1) = measure_probs(&rho, method);
    let (c0, c1) = crate::amplitude_model::outcome_probs(method, theta, m, &noise, size)?;
    let prob_dev = (p0 - c0).abs().max((p1 - c1).abs());

    let n_q = method.query_count(m);
    let qfi = sld_fisher(&rho, &drho)?;
    let qfi_closed = crate::fisher::quantum_fisher(n_q as f64, &noise, size)?;
    let qfi_rel_dev = relative(qfi, qfi_closed);

    let dim = factory.dim() as u64;
    let bound = theorem_bound(n_q, dim, &vec![r; n_q as usize])?;
    let bound_ratio = if bound > 0.0 { qfi / bound } else if qfi == 0.0 { 0.0 } else { f64::INFINITY };
    let bound_rel_dev = relative(qfi, bound);

    // Degenerate points: an outcome (almost) certain, or dp/dθ ≈ 0 where
    // the classical information itself vanishes.
    let stationary = (2.0 * n_q as f64 * theta).sin().abs() < 1e-2;
    let classical_rel_dev = if c0.min(c1) > 1e-6 && !stationary {
        let numeric = numeric_classical_fisher(method, m, &factory.with_theta(theta)?, r_oracle)?;
        let closed = crate::fisher::classical_fisher(method, theta, n_q as f64, &noise, size)?;
        Some(relative(numeric, closed))
    } else {
        None
    };

    let rotation_dev = if r == 1.0 && (2.0 * theta).sin().abs() > 1e-6 {
        Some(rotation_check(&factory, m)?)
    } else {
        None
    };

    Ok(CaseResult {
        method,
        n,
        m,
        r,
        seed,
        theta,
        prob_dev,
        qfi_rel_dev,
        bound_ratio,
        bound_rel_dev,
        classical_rel_dev,
        rotation_dev,
    })
}

/// Run every cell of `config`. Cells are independent and evaluated in
/// parallel; the report order is method, n, m, r, seed.
pub fn run_verification(config: &VerificationConfig) -> Result<VerificationReport> {
    use rayon::prelude::*;
    if config.max_n == 0 || config.max_n > MAX_DATA_QUBITS {
        return Err(Error::RegisterTooLarge(config.max_n, MAX_DATA_QUBITS));
    }
    for &r in &config.r_values {
        NoiseModel::depolarizing(r)?;
    }
    let mut cells = Vec::new();
    for &method in &config.methods {
        for n in 1..=config.max_n {
            for m in 0..=config.max_m {
                for &r in &config.r_values {
                    for k in 0..config.seeds {
                        let seed = crate::amplitude_model::derive_seed(config.master_seed, u64::from(n), k);
                        cells.push((method, n, m, r, seed));
                    }
                }
            }
        }
    }
    let cases = cells
        .par_iter()
        .map(|&(method, n, m, r, seed)| verify_case(method, n, m, r, seed, config.fault))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport { cases })
}
