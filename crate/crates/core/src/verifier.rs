//! Numerical check that the Ψ-transform of any solution of the mode
//! equations is a solution of the per-mode wave equation Ψ″ + ω²Ψ = 0 with
//! ω² = (k² − K)/3, plus the δ → Ψ → δ round trip modulo gauge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::background::{Curvature, EtaRange};
use crate::error::{Error, Result};
use crate::fit;
use crate::mode_dynamics::{integrate, ModeParams, PerturbationState};
use crate::ode::Tolerances;
use crate::transform::{self, PsiInput};
use crate::wavefield;

/// Relative RMS residual allowed for the harmonic fit.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Relative error allowed between the recovered and predicted frequency.
pub const FREQUENCY_TOL: f64 = 1e-4;
/// max|Ψ| relative to max|δ| allowed when the data are pure gauge.
pub const KERNEL_TOL: f64 = 1e-8;
/// Fit amplitude relative to max|δ| below which the data count as pure gauge.
pub const DEGENERACY_FLOOR: f64 = 1e-10;
pub const DEFAULT_SAMPLES: usize = 2000;

/// Initial data at the start of the η window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// (λ, λ′, μ, μ′) drawn uniformly from [−1, 1]⁴.
    Seed(u64),
    State(PerturbationState),
}

impl InitialData {
    pub fn resolve(&self) -> PerturbationState {
        match *self {
            InitialData::Seed(seed) => seeded_state(seed),
            InitialData::State(s) => s,
        }
    }

    fn seed(&self) -> Option<u64> {
        match *self {
            InitialData::Seed(s) => Some(s),
            InitialData::State(_) => None,
        }
    }
}

pub fn seeded_state(seed: u64) -> PerturbationState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || rng.gen_range(-1.0..=1.0);
    PerturbationState::new(draw(), draw(), draw(), draw())
}

/// Settings of one theorem check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremCheck {
    pub params: ModeParams,
    pub initial: InitialData,
    pub eta_range: EtaRange,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub residual_tol: f64,
    pub frequency_tol: f64,
    pub kernel_tol: f64,
}

impl TheoremCheck {
    pub fn new(params: ModeParams, initial: InitialData) -> Self {
        Self {
            params,
            initial,
            eta_range: EtaRange::default_for(params.curvature),
            samples: DEFAULT_SAMPLES,
            tolerances: Tolerances::default(),
            residual_tol: RESIDUAL_TOL,
            frequency_tol: FREQUENCY_TOL,
            kernel_tol: KERNEL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitAmplitudes {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

/// Outcome of one theorem check.
///
/// Residuals are relative to the fit amplitude √(A² + B²); in the kernel
/// case (pure-gauge data, Ψ ≈ 0) they are relative to max|δ| instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub curvature: i32,
    pub k: f64,
    pub kappa2: f64,
    pub omega: f64,
    pub fit: FitAmplitudes,
    pub rms_residual: f64,
    pub max_residual: f64,
    pub freq_estimate: Option<f64>,
    pub kernel_case: bool,
    pub pass: bool,
    pub eta_min: f64,
    pub eta_max: f64,
    pub seed: Option<u64>,
    pub samples: usize,
    pub rtol: f64,
    pub atol: f64,
    pub delta_scale: f64,
    pub frequency_error: Option<f64>,
    pub accepted_steps: usize,
}

/// Integrates the mode, applies the Ψ-transform and fits the exact
/// solution space of the wave equation at the predicted frequency. The
/// frequency is also recovered from the samples alone and compared.
pub fn run_theorem_check(check: &TheoremCheck) -> Result<VerificationReport> {
    let params = check.params;
    let initial = check.initial.resolve();
    let traj = integrate(initial, &params, check.eta_range, check.tolerances, check.samples)?;
    let delta = traj.density_contrast()?;
    let psi = transform::psi_trajectory(&traj)?;
    let omega = wavefield::omega_from_kappa2(params.kappa2);

    let f = fit::harmonic_fit(&psi.grid, &psi.values, omega)?;
    let [a, b] = f.coef;
    let amplitude = a.hypot(b);
    let delta_scale = fit::max_abs(&delta);

    let kernel_case = amplitude < DEGENERACY_FLOOR * delta_scale || amplitude == 0.0;
    let (rms_residual, max_residual, freq_estimate, frequency_error, pass);
    if kernel_case {
        let norm = if delta_scale > 0.0 { delta_scale } else { 1.0 };
        rms_residual = fit::rms(&psi.values) / norm;
        max_residual = fit::max_abs(&psi.values) / norm;
        freq_estimate = None;
        frequency_error = None;
        pass = max_residual < check.kernel_tol && rms_residual < check.residual_tol;
    } else {
        rms_residual = fit::rms(&f.residual) / amplitude;
        max_residual = fit::max_abs(&f.residual) / amplitude;
        freq_estimate = fit::estimate_frequency(&psi.grid, &psi.values);
        if omega == 0.0 {
            frequency_error = None;
            pass = rms_residual < check.residual_tol;
        } else {
            frequency_error = freq_estimate.map(|w| (w - omega).abs() / omega);
            pass = rms_residual < check.residual_tol
                && frequency_error.is_some_and(|e| e < check.frequency_tol);
        }
    }

    Ok(VerificationReport {
        curvature: params.curvature.value(),
        k: params.k,
        kappa2: params.kappa2,
        omega,
        fit: FitAmplitudes { a, b },
        rms_residual,
        max_residual,
        freq_estimate,
        kernel_case,
        pass,
        eta_min: check.eta_range.min,
        eta_max: check.eta_range.max,
        seed: check.initial.seed(),
        samples: check.samples,
        rtol: check.tolerances.rtol,
        atol: check.tolerances.atol,
        delta_scale,
        frequency_error,
        accepted_steps: traj.diagnostics.accepted_steps,
    })
}

/// Outcome of a δ → Ψ → δ round trip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTripReport {
    pub curvature: i32,
    pub k: f64,
    pub kappa2: f64,
    pub seed: Option<u64>,
    /// Coefficients of (δ_g1, δ_g2) in reconstructed − original.
    pub gauge_coef: [f64; 2],
    /// max|residual after gauge projection| / max|δ|.
    pub relative_residual: f64,
    pub pass: bool,
}

/// Reconstructs δ from the Ψ-series of a trajectory and checks that the
/// difference from the original δ lies in the span of the gauge pair.
pub fn run_roundtrip_check(check: &TheoremCheck, tol: f64) -> Result<RoundTripReport> {
    let params = check.params;
    let traj = integrate(
        check.initial.resolve(),
        &params,
        check.eta_range,
        check.tolerances,
        check.samples,
    )?;
    let delta = traj.density_contrast()?;
    let psi = transform::psi_trajectory(&traj)?;
    let rebuilt = transform::reconstruct_delta(PsiInput::Series(&psi), 0.0, 0.0)?;
    let diff: Vec<f64> = rebuilt.values.iter().zip(&delta).map(|(r, d)| r - d).collect();
    let proj = transform::project_onto_gauge(params.curvature, &traj.grid, &diff)?;
    let scale = fit::max_abs(&delta);
    let relative_residual = if scale > 0.0 {
        proj.residual_max / scale
    } else {
        proj.residual_max
    };
    Ok(RoundTripReport {
        curvature: params.curvature.value(),
        k: params.k,
        kappa2: params.kappa2,
        seed: check.initial.seed(),
        gauge_coef: proj.coef,
        relative_residual,
        pass: relative_residual < tol,
    })
}

/// The (K, k) matrix exercised by the default suite.
pub const DEFAULT_CASES: [(i32, f64); 8] = [
    (0, 0.5),
    (0, 1.0),
    (0, 5.0),
    (-1, 0.5),
    (-1, 2.0),
    (1, 2.0),
    (1, 3.0),
    (1, 7.0),
];

/// A batch of theorem checks sharing seed and numerical settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub cases: Vec<ModeParams>,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub residual_tol: f64,
    /// Per-case η window; `None` uses the default window of each curvature.
    pub eta_range: Option<EtaRange>,
}

impl SuiteConfig {
    /// Validates every (K, k) pair; any invalid case rejects the whole suite.
    pub fn new(cases: &[(i32, f64)], seed: u64) -> Result<Self> {
        let cases = cases
            .iter()
            .map(|&(k, wn)| ModeParams::new(Curvature::try_from(k)?, wn))
            .collect::<Result<Vec<_>>>()?;
        if cases.is_empty() {
            return Err(Error::InvalidConfig("suite has no cases".into()));
        }
        Ok(Self {
            cases,
            seed,
            samples: DEFAULT_SAMPLES,
            tolerances: Tolerances::default(),
            residual_tol: RESIDUAL_TOL,
            eta_range: None,
        })
    }

    pub fn default_suite(seed: u64) -> Self {
        Self::new(&DEFAULT_CASES, seed).expect("default cases are valid")
    }

    pub fn checks(&self) -> Vec<TheoremCheck> {
        self.cases
            .iter()
            .map(|&p| {
                let mut c = TheoremCheck::new(p, InitialData::Seed(self.seed));
                c.samples = self.samples;
                c.tolerances = self.tolerances;
                c.residual_tol = self.residual_tol;
                if let Some(r) = self.eta_range {
                    c.eta_range = r;
                }
                c
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub cases: Vec<VerificationReport>,
    pub pass: bool,
}

/// Runs every case of the suite; cases execute in parallel and are
/// reported in configuration order.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let cases = config
        .checks()
        .par_iter()
        .map(run_theorem_check)
        .collect::<Result<Vec<_>>>()?;
    let pass = cases.iter().all(|c| c.pass);
    Ok(SuiteReport { cases, pass })
}
