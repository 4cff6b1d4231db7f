//! The second-order Ψ-transform of the density contrast,
//!
//! ```text
//! Ψ = (1/cK) d/dη [ (1/tK2) d/dη ( tK2 · cK · δ ) ],
//! ```
//!
//! its two-dimensional kernel (the gauge pair) and the inverse map from Ψ
//! back to δ, which is defined only up to that kernel.

use std::f64::consts::FRAC_PI_2;

use crate::background::{self, Curvature, EtaRange};
use crate::error::{Error, Result};
use crate::fit::{self, least_squares_2};
use crate::mode_dynamics::{ModeParams, PerturbationState, Trajectory};
use crate::ode::{self, Tolerances};
use crate::quadrature;

/// Ψ from (δ, δ′, δ″) at one conformal time.
///
/// Expanding the nested derivatives with tK2 = (sK/cK)², cK′ = −K sK and
/// cK″ = −K cK gives
/// Ψ = δ″ + (m + 2cK′/cK) δ′ + (m′ + m cK′/cK + cK″/cK) δ
/// with m = tK2′/tK2 = 2(cK/sK + K sK/cK) and m′ = 2(K/cK² − 1/sK²).
pub fn psi_value(delta: f64, ddelta: f64, dddelta: f64, eta: f64, k: Curvature) -> Result<f64> {
    background::check_transform_domain(eta, k)?;
    let t = background::curvature_trig(eta, k)?;
    let kc = k.as_f64();
    let (s, c) = (t.sk, t.ck);
    if c == 0.0 || t.tk2 == 0.0 {
        return Err(Error::SingularPoint {
            eta,
            reason: "cK or tK2 vanishes",
        });
    }
    let m = 2.0 * (c / s + kc * s / c);
    let dm = 2.0 * (kc / (c * c) - 1.0 / (s * s));
    let dc_c = -kc * s / c;
    let ddc_c = -kc;
    Ok(dddelta + m * ddelta + 2.0 * dc_c * ddelta + (dm + m * dc_c + ddc_c) * delta)
}

/// Flat-space form Ψ = δ″ + 2δ′/η − 2δ/η².
pub fn psi_value_flat(delta: f64, ddelta: f64, dddelta: f64, eta: f64) -> Result<f64> {
    background::check_transform_domain(eta, Curvature::Flat)?;
    Ok(dddelta + (2.0 / eta) * ddelta - (2.0 / (eta * eta)) * delta)
}

/// Samples of Ψ on a conformal-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSeries {
    pub curvature: Curvature,
    /// Mode the series was computed from, when known.
    pub params: Option<ModeParams>,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl PsiSeries {
    pub fn new(curvature: Curvature, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Grid("grid and values differ in length".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Grid("grid must be strictly increasing".into()));
        }
        for &eta in &grid {
            background::check_transform_domain(eta, curvature)?;
        }
        check_no_straddle(&grid, curvature)?;
        Ok(Self {
            curvature,
            params: None,
            grid,
            values,
        })
    }
}

/// Samples of δ on a conformal-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSeries {
    pub curvature: Curvature,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_no_straddle(grid: &[f64], k: Curvature) -> Result<()> {
    if k == Curvature::Closed {
        if let (Some(&lo), Some(&hi)) = (grid.first(), grid.last()) {
            if lo < FRAC_PI_2 && hi > FRAC_PI_2 {
                return Err(Error::SingularPoint {
                    eta: FRAC_PI_2,
                    reason: "grid straddles cos(eta) = 0 at eta = pi/2",
                });
            }
        }
    }
    Ok(())
}

/// Applies the Ψ-transform pointwise along a trajectory.
pub fn psi_trajectory(traj: &Trajectory) -> Result<PsiSeries> {
    let k = traj.params.curvature;
    check_no_straddle(&traj.grid, k)?;
    let values = (0..traj.len())
        .map(|i| {
            let (d, dd, ddd) = traj.density_contrast_derivs(i)?;
            psi_value(d, dd, ddd, traj.grid[i], k)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PsiSeries {
        curvature: k,
        params: Some(traj.params),
        grid: traj.grid.clone(),
        values,
    })
}

/// The two independent solutions of Ψ[δ] = 0.
///
/// δ_g1 = (∫tK2 dη)/(tK2 cK) and δ_g2 = 1/(tK2 cK) = cK/sK², with the
/// antiderivative taken to vanish at η = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaugePair {
    pub curvature: Curvature,
}

pub fn gauge_modes(k: Curvature) -> GaugePair {
    GaugePair { curvature: k }
}

impl GaugePair {
    /// (δ_g1, δ_g1′, δ_g1″) at `eta`.
    pub fn first(&self, eta: f64) -> Result<(f64, f64, f64)> {
        let t = background::curvature_trig(eta, self.curvature)?;
        let kc = self.curvature.as_f64();
        let (s, c) = (t.sk, t.ck);
        let integral = background::tk2_integral(eta, self.curvature);
        let (g2, dg2, ddg2) = self.second(eta)?;
        let g1 = integral * g2;
        let dg1 = 1.0 / c + integral * dg2;
        let ddg1 = kc * s / (c * c) + t.tk2 * dg2 + integral * ddg2;
        Ok((g1, dg1, ddg1))
    }

    /// (δ_g2, δ_g2′, δ_g2″) at `eta`.
    pub fn second(&self, eta: f64) -> Result<(f64, f64, f64)> {
        let t = background::curvature_trig(eta, self.curvature)?;
        let kc = self.curvature.as_f64();
        let (s, c) = (t.sk, t.ck);
        let s2 = s * s;
        let g2 = c / s2;
        let dg2 = -(kc * s2 + 2.0 * c * c) / (s2 * s);
        let ddg2 = c * (5.0 * kc * s2 + 6.0 * c * c) / (s2 * s2);
        Ok((g2, dg2, ddg2))
    }

    pub fn g1(&self, eta: f64) -> Result<f64> {
        Ok(self.first(eta)?.0)
    }

    pub fn g2(&self, eta: f64) -> Result<f64> {
        Ok(self.second(eta)?.0)
    }
}

/// ∫ dη / a with the branch constant dropped.
fn inverse_scale_integral(eta: f64, k: Curvature) -> f64 {
    match k {
        Curvature::Flat => eta.ln(),
        Curvature::Closed => (0.5 * eta).tan().ln(),
        Curvature::Open => (0.5 * eta).tanh().ln(),
    }
}

/// Mode state generated by a residual coordinate change of the synchronous
/// gauge.
///
/// `temporal` is the amplitude ψ of the time shift ξ⁰ = ψ/a; it produces the
/// exact solution with δ = −4ψ a′/a², i.e. −4ψ δ_g2. `spatial` is a pure
/// relabelling of space that shifts λ and μ by opposite constants and leaves
/// δ ≡ 0.
pub fn synchronous_gauge_state(
    params: &ModeParams,
    eta: f64,
    temporal: f64,
    spatial: f64,
) -> Result<PerturbationState> {
    let k = params.curvature;
    let t = background::curvature_trig(eta, k)?;
    let kc = k.as_f64();
    let (a, da) = (t.sk, t.ck);
    let k2 = params.kappa2;
    let j = inverse_scale_integral(eta, k);
    let lambda = 2.0 * k2 * j;
    let dlambda = 2.0 * k2 / a;
    let mu = 6.0 * da / (a * a) - 2.0 * k2 * j;
    let dmu = -6.0 * (kc * a * a + 2.0 * da * da) / (a * a * a) - 2.0 * k2 / a;
    Ok(temporal * PerturbationState::new(lambda, dlambda, mu, dmu)
        + spatial * PerturbationState::new(1.0, 0.0, -1.0, 0.0))
}

/// Where Ψ comes from for [`reconstruct_delta`].
#[derive(Debug, Clone, Copy)]
pub enum PsiInput<'a> {
    /// Sampled Ψ on a uniform grid; integrals are anchored at the first node.
    Series(&'a PsiSeries),
    /// Ψ = A cos ωη + B sin ωη (A + Bη when ω = 0), sampled on `grid`;
    /// integrals are anchored at η = 0 whenever the grid lies below the
    /// first zero of cK.
    Harmonic {
        curvature: Curvature,
        grid: &'a [f64],
        a: f64,
        b: f64,
        omega: f64,
    },
}

/// Harmonic solution of the per-mode wave equation.
pub fn harmonic(a: f64, b: f64, omega: f64, eta: f64) -> f64 {
    if omega == 0.0 {
        a + b * eta
    } else {
        a * (omega * eta).cos() + b * (omega * eta).sin()
    }
}

/// Unchecked (sK, cK, tK2); valid from η = 0 up to the first zero of cK.
fn raw_trig(eta: f64, k: Curvature) -> (f64, f64, f64) {
    match k {
        Curvature::Flat => (eta, 1.0, eta * eta),
        Curvature::Closed => {
            let (s, c) = eta.sin_cos();
            (s, c, (s / c).powi(2))
        }
        Curvature::Open => (eta.sinh(), eta.cosh(), eta.tanh().powi(2)),
    }
}

/// Inverts the Ψ-transform by two nested quadratures:
/// (tK2 cK δ)′ / tK2 = ∫ cK Ψ dη + c1 and tK2 cK δ = ∫ tK2 (…) dη + c2.
///
/// Different (c1, c2), or a different anchor for the integrals, shift the
/// result by a combination of the gauge pair only.
pub fn reconstruct_delta(input: PsiInput<'_>, c1: f64, c2: f64) -> Result<DeltaSeries> {
    let (k, grid, outer) = match input {
        PsiInput::Series(series) => {
            let k = series.curvature;
            let h = quadrature::uniform_spacing(&series.grid)?;
            check_no_straddle(&series.grid, k)?;
            let trig: Vec<_> = series
                .grid
                .iter()
                .map(|&e| background::curvature_trig(e, k))
                .collect::<Result<_>>()?;
            let weighted: Vec<f64> = trig.iter().zip(&series.values).map(|(t, p)| t.ck * p).collect();
            let inner = quadrature::cumulative(&weighted, h)?;
            let integrand: Vec<f64> = trig.iter().zip(&inner).map(|(t, i)| t.tk2 * (i + c1)).collect();
            let outer = quadrature::cumulative(&integrand, h)?;
            (k, series.grid.clone(), outer)
        }
        PsiInput::Harmonic {
            curvature: k,
            grid,
            a,
            b,
            omega,
        } => {
            if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Grid("grid must be strictly increasing with >= 2 points".into()));
            }
            check_no_straddle(grid, k)?;
            for &eta in grid {
                background::check_transform_domain(eta, k)?;
            }
            let anchor_at_zero = !(k == Curvature::Closed && grid[0] > FRAC_PI_2);
            let sys = move |eta: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
                let (_, c, t2) = raw_trig(eta, k);
                Ok([c * harmonic(a, b, omega, eta), t2 * (y[0] + c1)])
            };
            let mut nodes = Vec::with_capacity(grid.len() + 1);
            if anchor_at_zero {
                nodes.push(0.0);
            }
            nodes.extend_from_slice(grid);
            let (ys, _) = ode::solve_dense(&sys, [0.0, 0.0], &nodes, Tolerances::new(1e-13, 1e-15)?)?;
            let skip = usize::from(anchor_at_zero);
            let outer: Vec<f64> = ys[skip..].iter().map(|y| y[1]).collect();
            (k, grid.to_vec(), outer)
        }
    };
    let values = grid
        .iter()
        .zip(&outer)
        .map(|(&eta, o)| {
            let t = background::curvature_trig(eta, k)?;
            Ok((o + c2) / (t.tk2 * t.ck))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DeltaSeries {
        curvature: k,
        grid,
        values,
    })
}

/// Least-squares decomposition of a δ-series against the gauge pair.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GaugeProjection {
    /// Coefficients of δ_g1 and δ_g2.
    pub coef: [f64; 2],
    /// The part of the input not explained by the gauge pair.
    #[serde(skip)]
    pub residual: Vec<f64>,
    pub residual_max: f64,
    pub residual_rms: f64,
}

/// Projects `values` sampled on `grid` onto span{δ_g1, δ_g2}.
pub fn project_onto_gauge(k: Curvature, grid: &[f64], values: &[f64]) -> Result<GaugeProjection> {
    let pair = gauge_modes(k);
    let g1: Vec<f64> = grid.iter().map(|&e| pair.g1(e)).collect::<Result<_>>()?;
    let g2: Vec<f64> = grid.iter().map(|&e| pair.g2(e)).collect::<Result<_>>()?;
    // Column scaling keeps the 1/η² growth of δ_g2 from dominating.
    let (n1, n2) = (fit::max_abs(&g1), fit::max_abs(&g2));
    let s1: Vec<f64> = g1.iter().map(|v| v / n1).collect();
    let s2: Vec<f64> = g2.iter().map(|v| v / n2).collect();
    let f = least_squares_2(&s1, &s2, values)?;
    Ok(GaugeProjection {
        coef: [f.coef[0] / n1, f.coef[1] / n2],
        residual_max: fit::max_abs(&f.residual),
        residual_rms: fit::rms(&f.residual),
        residual: f.residual,
    })
}

/// Default transform-safe window for a curvature.
pub fn default_window(k: Curvature) -> EtaRange {
    EtaRange::default_for(k)
}
