//! Per-mode solutions of the wave equation Ψ″ − △Ψ/3 = 0 in the static
//! Robertson–Walker space-time, its dispersion relation, and radial
//! eigenfunctions of the Beltrami–Laplace operator.

use std::f64::consts::PI;

use serde::Serialize;

use crate::background::{Curvature, SOUND_SPEED};
use crate::error::{Error, Result};

/// One point of the dispersion curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub k: f64,
    pub omega: f64,
    pub v_g: f64,
}

fn kappa2(k: f64, curv: Curvature) -> Result<f64> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "wave number must be finite and non-negative (got {k})"
        )));
    }
    let k2 = k * k - curv.as_f64();
    if k2 < 0.0 {
        return Err(Error::Supercurvature {
            curvature: curv.value(),
            kappa2: k2,
        });
    }
    Ok(k2)
}

/// ω = √((k² − K)/3).
pub fn omega(k: f64, curv: Curvature) -> Result<f64> {
    Ok((kappa2(k, curv)? / 3.0).sqrt())
}

/// Frequency of a mode given κ² directly.
pub fn omega_from_kappa2(kappa2: f64) -> f64 {
    (kappa2 / 3.0).sqrt()
}

/// v_g = dω/dk = k / (√3 √(k² − K)).
pub fn group_velocity(k: f64, curv: Curvature) -> Result<f64> {
    let k2 = kappa2(k, curv)?;
    if k2 == 0.0 {
        return Err(Error::Supercurvature {
            curvature: curv.value(),
            kappa2: k2,
        });
    }
    if curv == Curvature::Flat {
        return Ok(SOUND_SPEED);
    }
    Ok(k * SOUND_SPEED / k2.sqrt())
}

pub fn dispersion_point(k: f64, curv: Curvature) -> Result<DispersionPoint> {
    Ok(DispersionPoint {
        k,
        omega: omega(k, curv)?,
        v_g: group_velocity(k, curv)?,
    })
}

/// Ψ = A cos ωη + B sin ωη, degenerating to A + Bη at ω = 0.
pub fn analytic_psi(a: f64, b: f64, omega: f64, eta: f64) -> f64 {
    crate::transform::harmonic(a, b, omega, eta)
}

/// Radial eigenfunction of the Laplacian of the static 3-metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialMode {
    pub curvature: Curvature,
    pub k: f64,
    pub l: u32,
    pub chi: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialMode {
    pub fn sample(curv: Curvature, k: f64, l: u32, chi: Vec<f64>) -> Result<Self> {
        let values = chi
            .iter()
            .map(|&c| radial_mode(curv, k, l, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            curvature: curv,
            k,
            l,
            chi,
            values,
        })
    }

    /// Eigenvalue −(k² − K) of the Laplacian.
    pub fn eigenvalue(&self) -> f64 {
        -(self.k * self.k - self.curvature.as_f64())
    }
}

/// (sK, cK) at radial distance χ.
fn radial_trig(chi: f64, curv: Curvature) -> (f64, f64) {
    match curv {
        Curvature::Flat => (chi, 1.0),
        Curvature::Closed => chi.sin_cos(),
        Curvature::Open => (chi.sinh(), chi.cosh()),
    }
}

/// sin(kχ)/k, continuous at k = 0 (value χ).
fn sinc_k(k: f64, chi: f64) -> f64 {
    if k == 0.0 {
        chi
    } else {
        (k * chi).sin() / k
    }
}

/// Radial mode Φ_l(χ) with eigenvalue −(k² − K).
///
/// l = 0 is sin(kχ)/(k sK(χ)), normalised to Φ(0) = 1. l = 1 is
/// −3Φ₀′/(k² − K), normalised so that Φ ≈ χ near the origin.
pub fn radial_mode(curv: Curvature, k: f64, l: u32, chi: f64) -> Result<f64> {
    let max_chi = if curv == Curvature::Closed { PI } else { f64::INFINITY };
    if !(chi >= 0.0 && chi < max_chi) {
        return Err(Error::Domain {
            eta: chi,
            reason: "radial coordinate outside the regular chart",
        });
    }
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidConfig(format!("wave number must be >= 0 (got {k})")));
    }
    let (s, c) = radial_trig(chi, curv);
    match l {
        0 => {
            if chi == 0.0 {
                return Ok(1.0);
            }
            Ok(sinc_k(k, chi) / s)
        }
        1 => {
            let k2 = k * k - curv.as_f64();
            if k2 <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "l = 1 mode needs k^2 - K > 0 (got {k2})"
                )));
            }
            if chi < 1e-6 {
                return Ok(chi);
            }
            let dphi0 = (k * chi).cos() / s - sinc_k(k, chi) * c / (s * s);
            Ok(-3.0 * dphi0 / k2)
        }
        other => Err(Error::Unsupported(format!(
            "radial modes with l = {other} (only l = 0 and l = 1)"
        ))),
    }
}

/// Centred second-order finite-difference radial Laplacian
/// f″ + 2(cK/sK) f′ − l(l+1) f / sK² on a uniform χ grid starting at
/// `chi0` with spacing `h`. Returns values at the interior nodes 1..n−1.
pub fn radial_laplacian_fd(
    values: &[f64],
    chi0: f64,
    h: f64,
    curv: Curvature,
    l: u32,
) -> Result<Vec<f64>> {
    if values.len() < 5 {
        return Err(Error::Grid(format!(
            "radial Laplacian needs at least 5 samples (got {})",
            values.len()
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Grid("radial grid spacing must be positive".into()));
    }
    if chi0 + h <= 0.0 {
        return Err(Error::Grid("radial grid interior must lie at chi > 0".into()));
    }
    let ll = f64::from(l * (l + 1));
    Ok((1..values.len() - 1)
        .map(|i| {
            let chi = chi0 + h * i as f64;
            let (s, c) = radial_trig(chi, curv);
            let d2 = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
            let d1 = (values[i + 1] - values[i - 1]) / (2.0 * h);
            d2 + 2.0 * c / s * d1 - ll * values[i] / (s * s)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn omega_examples() {
        assert!((omega(1.0, Curvature::Flat).unwrap() - 0.5773503).abs() < 1e-7);
        assert!((omega(1e-8, Curvature::Open).unwrap() - SOUND_SPEED).abs() < 1e-15);
        assert!((omega(2.0, Curvature::Closed).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(omega(0.5, Curvature::Closed), Err(Error::Supercurvature { .. })));
        assert!(omega(-1.0, Curvature::Flat).is_err());
    }

    #[test]
    fn group_velocity_examples() {
        for k in [0.01, 1.0, 100.0] {
            assert_eq!(group_velocity(k, Curvature::Flat).unwrap(), 1.0 / 3f64.sqrt());
        }
        let v = group_velocity(1e-4, Curvature::Open).unwrap();
        assert!((v - 5.7735e-5).abs() < 1e-9);
        assert!((group_velocity(1.0, Curvature::Open).unwrap() - 0.4082483).abs() < 1e-7);
        assert!(group_velocity(1.0, Curvature::Closed).is_err());
        assert!(group_velocity(0.0, Curvature::Flat).is_err());
    }

    #[test]
    fn group_velocity_is_derivative_of_omega() {
        for curv in Curvature::ALL {
            for k in [1.5, 2.0, 4.0] {
                let h = 1e-5;
                let fd = (omega(k + h, curv).unwrap() - omega(k - h, curv).unwrap()) / (2.0 * h);
                assert!((group_velocity(k, curv).unwrap() - fd).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn analytic_psi_examples() {
        assert_eq!(analytic_psi(1.0, 0.0, 1.0, 0.0), 1.0);
        let w = 1.0 / 3f64.sqrt();
        assert!((analytic_psi(0.0, 1.0, w, PI * 3f64.sqrt() / 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(analytic_psi(2.0, 3.0, 0.0, 4.0), 14.0);
    }

    #[test]
    fn radial_mode_examples() {
        assert_eq!(radial_mode(Curvature::Flat, 3.0, 0, 0.0).unwrap(), 1.0);
        assert!((radial_mode(Curvature::Flat, 3.0, 0, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!((radial_mode(Curvature::Closed, 2.0, 0, FRAC_PI_3).unwrap() - 0.5).abs() < 1e-15);
        assert!((radial_mode(Curvature::Open, 1.0, 0, 1.0).unwrap() - 0.7160229).abs() < 1e-7);
        assert!(matches!(radial_mode(Curvature::Flat, 1.0, 2, 1.0), Err(Error::Unsupported(_))));
        assert!(radial_mode(Curvature::Closed, 2.0, 0, PI).is_err());
    }

    fn eigen_error(curv: Curvature, k: f64, l: u32, h: f64) -> f64 {
        let chi0 = 0.2;
        let n = (0.8 / h).round() as usize + 1;
        let chi: Vec<f64> = (0..n).map(|i| chi0 + h * i as f64).collect();
        let m = RadialMode::sample(curv, k, l, chi).unwrap();
        let lap = radial_laplacian_fd(&m.values, chi0, h, curv, l).unwrap();
        let mid = n / 2;
        lap[mid - 1] - m.eigenvalue() * m.values[mid]
    }

    #[test]
    fn l1_modes_are_eigenfunctions() {
        for (curv, k) in [(Curvature::Flat, 1.5), (Curvature::Closed, 3.0), (Curvature::Open, 1.0)] {
            let e1 = eigen_error(curv, k, 1, 0.02);
            let e2 = eigen_error(curv, k, 1, 0.01);
            assert!(e2.abs() < 1e-3, "{curv}: {e2}");
            let order = (e1 / e2).log2();
            assert!((order - 2.0).abs() < 0.2, "{curv}: order {order}");
        }
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let lap = radial_laplacian_fd(&[2.0; 9], 0.5, 0.1, Curvature::Open, 0).unwrap();
        assert!(lap.iter().all(|v| v.abs() < 1e-12));
        assert!(radial_laplacian_fd(&[1.0; 4], 0.5, 0.1, Curvature::Flat, 0).is_err());
    }
}
