//! Synchronous-gauge scalar perturbations of the radiation background,
//! reduced to a single eigenmode of the spatial Laplacian (△ → −κ²).
//!
//! Per mode the Lifshitz–Khalatnikov system reads
//!
//! ```text
//! λ″ = −2(a′/a) λ′ + (κ²/3)(λ + μ)
//! μ″ = −3(a′/a) μ′ + (2/3)(3K − κ²)(λ + μ)
//! ```
//!
//! and the density contrast is
//! δ = [3(a′/a) μ′ − (3K − κ²)(λ + μ)] / (3 ε a²).

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::background::{self, Curvature, EtaRange};
use crate::error::{Error, Result};
use crate::ode::{self, OdeSystem, Stats, Tolerances};

/// One Laplacian eigenmode: curvature, wave number and κ² = k² − K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeParams {
    pub curvature: Curvature,
    pub k: f64,
    pub kappa2: f64,
}

impl ModeParams {
    /// Validates the wave number for the given curvature.
    ///
    /// K = 0 and K = −1 need real k > 0; K = +1 needs an integer k ≥ 2.
    pub fn new(curvature: Curvature, k: f64) -> Result<Self> {
        Self::build(curvature, k, false)
    }

    /// Like [`ModeParams::new`], but also admits the homogeneous K = +1,
    /// k = 1 mode (κ² = 0).
    pub fn new_allow_degenerate(curvature: Curvature, k: f64) -> Result<Self> {
        Self::build(curvature, k, true)
    }

    fn build(curvature: Curvature, k: f64, allow_degenerate: bool) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidConfig(format!("wave number must be finite (got {k})")));
        }
        match curvature {
            Curvature::Flat if k <= 0.0 => {
                return Err(Error::InvalidConfig(format!("K=0 requires k > 0 (got {k})")))
            }
            Curvature::Open if k <= 0.0 => {
                return Err(Error::InvalidConfig(format!(
                    "K=-1 requires real k > 0; k^2 <= 0 is a supercurvature mode (got {k})"
                )))
            }
            Curvature::Closed => {
                let integral = k.fract() == 0.0;
                let ok = integral && (k >= 2.0 || (allow_degenerate && k == 1.0));
                if !ok {
                    return Err(Error::InvalidConfig(format!(
                        "K=+1 requires integer k >= 2 (got {k})"
                    )));
                }
            }
            _ => {}
        }
        Ok(Self {
            curvature,
            k,
            kappa2: k * k - curvature.as_f64(),
        })
    }

    /// The coefficient 3K − κ² multiplying (λ + μ) in the μ equation
    /// and in the density contrast.
    pub fn forcing(&self) -> f64 {
        3.0 * self.curvature.as_f64() - self.kappa2
    }

    pub fn is_degenerate(&self) -> bool {
        self.kappa2 == 0.0
    }
}

/// Mode amplitudes (λ, λ′, μ, μ′) at one conformal time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationState {
    pub lambda: f64,
    pub dlambda: f64,
    pub mu: f64,
    pub dmu: f64,
}

impl PerturbationState {
    pub const ZERO: Self = Self {
        lambda: 0.0,
        dlambda: 0.0,
        mu: 0.0,
        dmu: 0.0,
    };

    pub fn new(lambda: f64, dlambda: f64, mu: f64, dmu: f64) -> Self {
        Self {
            lambda,
            dlambda,
            mu,
            dmu,
        }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.lambda, self.dlambda, self.mu, self.dmu]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Add for PerturbationState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.lambda + o.lambda,
            self.dlambda + o.dlambda,
            self.mu + o.mu,
            self.dmu + o.dmu,
        )
    }
}

impl Mul<PerturbationState> for f64 {
    type Output = PerturbationState;
    fn mul(self, s: PerturbationState) -> PerturbationState {
        PerturbationState::new(self * s.lambda, self * s.dlambda, self * s.mu, self * s.dmu)
    }
}

/// Second derivatives (λ″, μ″) of the mode equations.
pub fn lk_rhs(state: &PerturbationState, eta: f64, params: &ModeParams) -> Result<(f64, f64)> {
    let h = background::conformal_expansion_rate(eta, params.curvature)?;
    Ok(second_derivs(state, h, params))
}

fn second_derivs(s: &PerturbationState, h: f64, p: &ModeParams) -> (f64, f64) {
    rhs_from_sum(s.dlambda, s.lambda + s.mu, s.dmu, h, p)
}

fn rhs_from_sum(dlambda: f64, sum: f64, dmu: f64, h: f64, p: &ModeParams) -> (f64, f64) {
    let ddlambda = -2.0 * h * dlambda + p.kappa2 / 3.0 * sum;
    let ddmu = -3.0 * h * dmu + 2.0 / 3.0 * p.forcing() * sum;
    (ddlambda, ddmu)
}

/// Per-integration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub evaluations: usize,
    pub rtol: f64,
    pub atol: f64,
}

/// Solution of one mode sampled on an equispaced conformal-time grid.
///
/// The integration runs in (λ, λ′, λ + μ, μ′). δ and its derivatives depend
/// on λ and μ only through their sum, which decays like 1/a² while each
/// term can stay O(1); `sums` keeps that sum at full relative precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModeParams,
    pub grid: Vec<f64>,
    pub states: Vec<PerturbationState>,
    /// λ + μ at each grid point, as integrated.
    pub sums: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// δ at every grid point.
    pub fn density_contrast(&self) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| Ok(self.density_contrast_derivs(i)?.0))
            .collect()
    }

    /// (δ, δ′, δ″) at grid point `i`.
    pub fn density_contrast_derivs(&self, i: usize) -> Result<(f64, f64, f64)> {
        let s = &self.states[i];
        contrast_derivs(s.dlambda, self.sums[i], s.dmu, self.grid[i], &self.params)
    }
}

/// Integrates the mode equations from `eta_range.min` with the given
/// initial state and samples the solution at `n_out` equispaced points.
pub fn integrate(
    initial: PerturbationState,
    params: &ModeParams,
    eta_range: EtaRange,
    tol: Tolerances,
    n_out: usize,
) -> Result<Trajectory> {
    if n_out < 2 {
        return Err(Error::InvalidConfig(format!("n_out must be >= 2 (got {n_out})")));
    }
    if !initial.is_finite() {
        return Err(Error::InvalidConfig("initial state must be finite".into()));
    }
    background::BackgroundModel::new(params.curvature, eta_range)?;
    let grid = eta_range.linspace(n_out);
    integrate_on_grid(initial, params, &grid, tol)
}

/// The mode equations in y = (λ, λ′, λ + μ, μ′).
struct LkSystem {
    params: ModeParams,
}

impl OdeSystem<4> for LkSystem {
    fn rhs(&self, eta: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let h = background::conformal_expansion_rate(eta, self.params.curvature)?;
        let (ddl, ddm) = rhs_from_sum(y[1], y[2], y[3], h, &self.params);
        Ok([y[1], ddl, y[1] + y[3], ddm])
    }

    // δ carries λ + μ and μ′ with a factor of order a², and λ′ feeds both.
    // Measuring their absolute error in units of δ keeps the contrast
    // accurate where a grows exponentially (K = −1).
    fn atol_scale(&self, eta: f64, i: usize) -> f64 {
        if i == 0 {
            return 1.0;
        }
        let a = background::curvature_trig(eta, self.params.curvature).map_or(1.0, |t| t.sk);
        1.0 / (a * a).max(1.0)
    }
}

/// As [`integrate`], on an arbitrary strictly increasing grid.
pub fn integrate_on_grid(
    initial: PerturbationState,
    params: &ModeParams,
    grid: &[f64],
    tol: Tolerances,
) -> Result<Trajectory> {
    for &eta in grid.iter().take(1).chain(grid.last()) {
        background::check_domain(eta, params.curvature)?;
    }
    let sys = LkSystem { params: *params };
    let y0 = [
        initial.lambda,
        initial.dlambda,
        initial.lambda + initial.mu,
        initial.dmu,
    ];
    let (ys, stats): (Vec<[f64; 4]>, Stats) = ode::solve_dense(&sys, y0, grid, tol)?;
    let mut states = Vec::with_capacity(ys.len());
    let mut sums = Vec::with_capacity(ys.len());
    for (i, y) in ys.iter().enumerate() {
        // the initial point keeps the caller's μ exactly
        let mu = if i == 0 { initial.mu } else { y[2] - y[0] };
        states.push(PerturbationState::new(y[0], y[1], mu, y[3]));
        sums.push(y[2]);
    }
    Ok(Trajectory {
        params: *params,
        grid: grid.to_vec(),
        states,
        sums,
        diagnostics: Diagnostics {
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            evaluations: stats.evaluations,
            rtol: tol.rtol,
            atol: tol.atol,
        },
    })
}

/// Energy-density contrast δ of one mode.
pub fn density_contrast(state: &PerturbationState, eta: f64, params: &ModeParams) -> Result<f64> {
    let h = background::conformal_expansion_rate(eta, params.curvature)?;
    let eps = background::energy_density(eta, params.curvature)?;
    let a = background::scale_factor(eta, params.curvature)?;
    let bracket = 3.0 * h * state.dmu - params.forcing() * (state.lambda + state.mu);
    Ok(bracket / (3.0 * eps * a * a))
}

/// (δ, δ′, δ″) from the state alone.
///
/// With ε a⁴ = 3 the contrast is δ = u μ′/3 − (3K − κ²) v (λ + μ)/9 where
/// u = a a′ and v = a². Both are differentiated with a″ = −K a, and μ″, μ‴,
/// (λ + μ)″ are eliminated with the mode equations.
pub fn density_contrast_derivs(
    state: &PerturbationState,
    eta: f64,
    params: &ModeParams,
) -> Result<(f64, f64, f64)> {
    contrast_derivs(state.dlambda, state.lambda + state.mu, state.dmu, eta, params)
}

fn contrast_derivs(
    dlambda: f64,
    sum: f64,
    dmu: f64,
    eta: f64,
    params: &ModeParams,
) -> Result<(f64, f64, f64)> {
    let t = background::curvature_trig(eta, params.curvature)?;
    let kc = params.curvature.as_f64();
    let (a, da) = (t.sk, t.ck);
    let h = da / a;
    let q = params.forcing();

    let (ddlambda, ddmu) = rhs_from_sum(dlambda, sum, dmu, h, params);
    let dsum = dlambda + dmu;
    let ddsum = ddlambda + ddmu;
    // d(a′/a)/dη = −K − (a′/a)²
    let dh = -kc - h * h;
    let dddmu = -3.0 * dh * dmu - 3.0 * h * ddmu + 2.0 / 3.0 * q * dsum;

    let u = a * da;
    let du = da * da - kc * a * a;
    let ddu = -4.0 * kc * u;
    let v = a * a;
    let dv = 2.0 * u;
    let ddv = 2.0 * du;

    let delta = u * dmu / 3.0 - q / 9.0 * v * sum;
    let ddelta = (du * dmu + u * ddmu) / 3.0 - q / 9.0 * (dv * sum + v * dsum);
    let dddelta = (ddu * dmu + 2.0 * du * ddmu + u * dddmu) / 3.0
        - q / 9.0 * (ddv * sum + 2.0 * dv * dsum + v * ddsum);
    Ok((delta, ddelta, dddelta))
}
