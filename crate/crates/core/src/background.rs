//! Exact background of the radiation-filled (p = ε/3) Robertson–Walker
//! universe in conformal time, for curvature index K ∈ {−1, 0, +1}.
//!
//! Every formula written with √K is evaluated on one of three real
//! branches (hyperbolic, polynomial, circular) instead of through complex
//! arithmetic, so K = 0 is the exact limit rather than a 0/0.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial curvature index of the background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Curvature {
    Open,
    Flat,
    Closed,
}

impl Curvature {
    pub const ALL: [Curvature; 3] = [Curvature::Open, Curvature::Flat, Curvature::Closed];

    pub fn value(self) -> i32 {
        match self {
            Curvature::Open => -1,
            Curvature::Flat => 0,
            Curvature::Closed => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }
}

impl TryFrom<i32> for Curvature {
    type Error = Error;

    fn try_from(k: i32) -> Result<Self> {
        match k {
            -1 => Ok(Curvature::Open),
            0 => Ok(Curvature::Flat),
            1 => Ok(Curvature::Closed),
            other => Err(Error::InvalidConfig(format!(
                "curvature must be one of -1, 0, +1 (got {other})"
            ))),
        }
    }
}

impl From<Curvature> for i32 {
    fn from(k: Curvature) -> i32 {
        k.value()
    }
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// Real-valued curvature trigonometry at one conformal time.
///
/// `sk = sin(√K η)/√K`, `ck = cos(√K η)`, `tk2 = tan²(√K η)/K` and
/// `dtk2 = d tk2 / dη`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureTrig {
    pub sk: f64,
    pub ck: f64,
    pub tk2: f64,
    pub dtk2: f64,
}

/// Distance below which `eta` counts as sitting on a singular point.
const SINGULAR_EPS: f64 = 1e-12;

fn check_background_domain(eta: f64, k: Curvature) -> Result<()> {
    if !eta.is_finite() {
        return Err(Error::Domain {
            eta,
            reason: "eta must be finite",
        });
    }
    if eta <= SINGULAR_EPS {
        return Err(Error::Domain {
            eta,
            reason: "a(eta) vanishes at eta = 0 (big bang)",
        });
    }
    if k == Curvature::Closed && eta >= PI - SINGULAR_EPS {
        return Err(Error::Domain {
            eta,
            reason: "a(eta) vanishes at eta = pi for K = +1 (recollapse)",
        });
    }
    Ok(())
}

/// Checks that `eta` is inside the open interval where a(η) > 0.
pub fn check_domain(eta: f64, k: Curvature) -> Result<()> {
    check_background_domain(eta, k)
}

/// Checks the narrower domain on which the Ψ-transform is defined
/// (cos(√K η) ≠ 0 in addition to a(η) > 0).
pub fn check_transform_domain(eta: f64, k: Curvature) -> Result<()> {
    check_background_domain(eta, k).map_err(|e| match e {
        Error::Domain { eta, reason } => Error::SingularPoint { eta, reason },
        other => other,
    })?;
    if k == Curvature::Closed && (eta - FRAC_PI_2).abs() < 1e-9 {
        return Err(Error::SingularPoint {
            eta,
            reason: "cos(eta) = 0 at eta = pi/2 for K = +1",
        });
    }
    Ok(())
}

/// Curvature-dependent sine, cosine and squared tangent at `eta`.
pub fn curvature_trig(eta: f64, k: Curvature) -> Result<CurvatureTrig> {
    check_domain(eta, k)?;
    let (sk, ck, tk2, dtk2) = match k {
        Curvature::Flat => (eta, 1.0, eta * eta, 2.0 * eta),
        Curvature::Closed => {
            let (s, c) = eta.sin_cos();
            let t = s / c;
            (s, c, t * t, 2.0 * t / (c * c))
        }
        Curvature::Open => {
            let (s, c) = (eta.sinh(), eta.cosh());
            let t = eta.tanh();
            (s, c, t * t, 2.0 * t / (c * c))
        }
    };
    Ok(CurvatureTrig { sk, ck, tk2, dtk2 })
}

/// Antiderivative of `tk2` vanishing at η = 0.
pub(crate) fn tk2_integral(eta: f64, k: Curvature) -> f64 {
    match k {
        Curvature::Flat => eta * eta * eta / 3.0,
        Curvature::Closed => eta.tan() - eta,
        Curvature::Open => eta - eta.tanh(),
    }
}

/// Radiation-era scale factor a(η) = sin(√K η)/√K.
pub fn scale_factor(eta: f64, k: Curvature) -> Result<f64> {
    Ok(curvature_trig(eta, k)?.sk)
}

/// a′(η) = cos(√K η).
pub fn scale_factor_rate(eta: f64, k: Curvature) -> Result<f64> {
    Ok(curvature_trig(eta, k)?.ck)
}

/// Conformal expansion rate a′/a: coth η, 1/η or cot η.
pub fn conformal_expansion_rate(eta: f64, k: Curvature) -> Result<f64> {
    check_domain(eta, k)?;
    Ok(match k {
        Curvature::Flat => 1.0 / eta,
        Curvature::Closed => 1.0 / eta.tan(),
        Curvature::Open => 1.0 / eta.tanh(),
    })
}

/// Background energy density ε = 3K/a² + 3(a′/a²)² in units 8πG = 1.
pub fn energy_density(eta: f64, k: Curvature) -> Result<f64> {
    let t = curvature_trig(eta, k)?;
    let a2 = t.sk * t.sk;
    Ok(3.0 * friedmann_constraint(eta, k, &t) / (a2 * a2))
}

/// a′² + K a², which the radiation background keeps at 1.
///
/// For K = −1 the difference cosh² − sinh² is taken as
/// (cosh − sinh)(cosh + sinh) with cosh − sinh = e^{−η}; the direct
/// subtraction loses all digits once η ≳ 8.
fn friedmann_constraint(eta: f64, k: Curvature, t: &CurvatureTrig) -> f64 {
    match k {
        Curvature::Flat => t.ck * t.ck,
        Curvature::Closed => t.ck * t.ck + t.sk * t.sk,
        Curvature::Open => (-eta).exp() * (t.ck + t.sk),
    }
}

/// Sound speed of the radiation fluid, c = 1/√3.
pub fn sound_speed() -> f64 {
    SOUND_SPEED
}

/// Squared sound speed, exactly 1/3 in f64.
pub const SOUND_SPEED_SQUARED: f64 = 1.0 / 3.0;
pub const SOUND_SPEED: f64 = 0.577_350_269_189_625_8;

/// Conformal-time interval on which a background is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRange {
    pub min: f64,
    pub max: f64,
}

impl EtaRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// Default evaluation window: [0.1, 1.2] for K = +1, [0.1, 10] otherwise.
    pub fn default_for(k: Curvature) -> Self {
        match k {
            Curvature::Closed => Self::new(0.1, 1.2),
            _ => Self::new(0.1, 10.0),
        }
    }

    pub fn len(&self) -> f64 {
        self.max - self.min
    }

    /// `n` equispaced points including both ends.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        let step = self.len() / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.max
                } else {
                    self.min + step * i as f64
                }
            })
            .collect()
    }
}

/// Radiation-era Robertson–Walker background restricted to a window of
/// conformal time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundModel {
    curvature: Curvature,
    eta_domain: EtaRange,
}

impl BackgroundModel {
    pub fn new(curvature: Curvature, eta_domain: EtaRange) -> Result<Self> {
        if !(eta_domain.min < eta_domain.max) {
            return Err(Error::InvalidConfig(format!(
                "eta range requires eta_min < eta_max (got [{}, {}])",
                eta_domain.min, eta_domain.max
            )));
        }
        for eta in [eta_domain.min, eta_domain.max] {
            check_domain(eta, curvature)
                .map_err(|e| Error::InvalidConfig(format!("invalid eta range: {e}")))?;
        }
        Ok(Self {
            curvature,
            eta_domain,
        })
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn eta_domain(&self) -> EtaRange {
        self.eta_domain
    }

    /// True when the window avoids cos(√K η) = 0 as well.
    pub fn is_transform_safe(&self) -> bool {
        match self.curvature {
            Curvature::Closed => {
                let r = self.eta_domain;
                !(r.min <= FRAC_PI_2 && FRAC_PI_2 <= r.max)
            }
            _ => true,
        }
    }

    pub fn scale_factor(&self, eta: f64) -> Result<f64> {
        scale_factor(eta, self.curvature)
    }

    pub fn conformal_expansion_rate(&self, eta: f64) -> Result<f64> {
        conformal_expansion_rate(eta, self.curvature)
    }

    pub fn energy_density(&self, eta: f64) -> Result<f64> {
        energy_density(eta, self.curvature)
    }
}
