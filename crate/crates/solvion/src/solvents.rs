//! Temperature-dependent dielectric models for polar solvents, the Wertheim
//! polarization parameter, and the MSA radius shift δ_s = R_s/λ_s.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Closed-form dielectric constant as a function of temperature in °C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DielectricLaw {
    /// ε(T) = c3·T³ + c2·T² + c1·T + c0.
    CubicPoly { c3: f64, c2: f64, c1: f64, c0: f64 },
    /// log₁₀ ε(T) = log₁₀ ε_T0 − â·(T − T0).
    LogLinear { eps_t0: f64, a_hat: f64, t0: f64 },
    /// ε(T) = ε_T0 − a·(T − T0).
    Linear { eps_t0: f64, a: f64, t0: f64 },
}

impl DielectricLaw {
    /// Evaluate ε at temperature T (°C).  Range checking is the caller's job.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            DielectricLaw::CubicPoly { c3, c2, c1, c0 } => ((c3 * t + c2) * t + c1) * t + c0,
            DielectricLaw::LogLinear { eps_t0, a_hat, t0 } => {
                eps_t0 * 10f64.powf(-a_hat * (t - t0))
            }
            DielectricLaw::Linear { eps_t0, a, t0 } => eps_t0 - a * (t - t0),
        }
    }

    /// Analytic dε/dT (per kelvin; °C and K slopes are identical).
    pub fn deriv(&self, t: f64) -> f64 {
        match *self {
            DielectricLaw::CubicPoly { c3, c2, c1, .. } => (3.0 * c3 * t + 2.0 * c2) * t + c1,
            DielectricLaw::LogLinear { a_hat, .. } => {
                -a_hat * std::f64::consts::LN_10 * self.eval(t)
            }
            DielectricLaw::Linear { a, .. } => -a,
        }
    }
}

/// A named solvent: molecule radius plus a dielectric law with its validity
/// window in °C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolventModel {
    pub name: String,
    /// Solvent molecule radius in Å.
    pub r_s: f64,
    pub law: DielectricLaw,
    /// Inclusive validity window (T_min, T_max) in °C.
    pub valid_range: (f64, f64),
}

impl SolventModel {
    fn check_range(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.valid_range;
        if t < lo || t > hi {
            return Err(Error::TemperatureOutOfRange {
                solvent: self.name.clone(),
                t,
                t_min: lo,
                t_max: hi,
            });
        }
        Ok(())
    }

    /// Dielectric constant at T (°C); errors outside the validity window.
    pub fn eps(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        Ok(self.law.eval(t))
    }

    /// Analytic dε/dT at T (per K).
    pub fn deps_dt(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        Ok(self.law.deriv(t))
    }

    /// MSA shift δ_s = R_s/λ_s and its temperature derivative at T.
    pub fn msa_shift(&self, t: f64) -> Result<MsaShift> {
        let eps = self.eps(t)?;
        let deps = self.law.deriv(t);
        let lambda = wertheim_lambda(eps)?;
        // Implicit differentiation of λ²(1+λ)⁴ = 16ε:
        //   d/dλ [λ²(1+λ)⁴] = 2λ(1+λ)³(1+3λ)
        let dlambda = 16.0 * deps / (2.0 * lambda * (1.0 + lambda).powi(3) * (1.0 + 3.0 * lambda));
        Ok(MsaShift {
            lambda,
            delta_s: self.r_s / lambda,
            d_delta_s_dt: -self.r_s * dlambda / (lambda * lambda),
        })
    }
}

/// MSA polarization parameter and radius shift at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsaShift {
    /// Wertheim polarization parameter λ_s.
    pub lambda: f64,
    /// Radius shift R_s/λ_s in Å.
    pub delta_s: f64,
    /// dδ_s/dT in Å/K.
    pub d_delta_s_dt: f64,
}

/// Solve λ²(1+λ)⁴ = 16ε for the unique positive root.
///
/// Bracketed bisection on (1e−8, 64] refined by Newton; the left-hand side is
/// strictly increasing for λ > 0 so the root is unique.
pub fn wertheim_lambda(eps: f64) -> Result<f64> {
    if !(eps >= 1.0) {
        return Err(Error::Domain(format!(
            "Wertheim relation needs eps >= 1, got {eps}"
        )));
    }
    let target = 16.0 * eps;
    let f = |l: f64| l * l * (1.0 + l).powi(4) - target;
    let (mut lo, mut hi) = (1e-8_f64, 64.0_f64);
    debug_assert!(f(hi) > 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut l = 0.5 * (lo + hi);
    for _ in 0..4 {
        let df = 2.0 * l * (1.0 + l).powi(3) * (1.0 + 3.0 * l);
        l -= f(l) / df;
    }
    Ok(l)
}

/// The five solvents of the reference tables with their dielectric laws and
/// validity windows.
///
/// The methanol log-linear slope is stored as 0.00264 per °C (the unrounded
/// NBS coefficient); the rounded 0.0026 misreproduces the methanol entropy
/// columns by ~2 J/(mol·K).
pub fn builtin_solvents() -> Vec<SolventModel> {
    vec![
        SolventModel {
            name: "W".into(),
            r_s: 1.420,
            law: DielectricLaw::CubicPoly {
                c3: -1.410e-6,
                c2: 9.398e-4,
                c1: -0.40008,
                c0: 87.740,
            },
            valid_range: (0.0, 100.0),
        },
        SolventModel {
            name: "MeOH".into(),
            r_s: 1.855,
            law: DielectricLaw::LogLinear {
                eps_t0: 32.63,
                a_hat: 0.00264,
                t0: 25.0,
            },
            valid_range: (5.0, 55.0),
        },
        SolventModel {
            name: "F".into(),
            r_s: 1.725,
            law: DielectricLaw::Linear {
                eps_t0: 109.0,
                a: 0.72,
                t0: 20.0,
            },
            valid_range: (18.0, 25.0),
        },
        SolventModel {
            name: "AN".into(),
            r_s: 2.135,
            law: DielectricLaw::Linear {
                eps_t0: 37.50,
                a: 0.16,
                t0: 20.0,
            },
            valid_range: (15.0, 25.0),
        },
        SolventModel {
            name: "DMF".into(),
            r_s: 2.585,
            law: DielectricLaw::CubicPoly {
                c3: -1.000389e-6,
                c2: 7.718531e-4,
                c1: -0.2204448,
                c0: 42.04569,
            },
            valid_range: (-60.0, 120.0),
        },
    ]
}

/// Look up a built-in solvent by name.
pub fn builtin_solvent(name: &str) -> Result<SolventModel> {
    builtin_solvents()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownSolvent(name.to_string()))
}

fn validate_solvent(s: &SolventModel) -> Result<()> {
    if s.r_s <= 0.0 {
        return Err(Error::Validation(format!(
            "solvent {}: R_s must be positive, got {}",
            s.name, s.r_s
        )));
    }
    let (lo, hi) = s.valid_range;
    if !(lo < hi) {
        return Err(Error::Validation(format!(
            "solvent {}: empty valid range ({lo}, {hi})",
            s.name
        )));
    }
    // ε must stay > 1 on the validity window.
    let n = 64;
    for i in 0..=n {
        let t = lo + (hi - lo) * i as f64 / n as f64;
        let eps = s.law.eval(t);
        if !(eps > 1.0) {
            return Err(Error::Validation(format!(
                "solvent {}: dielectric law gives eps = {eps} <= 1 at T = {t} °C",
                s.name
            )));
        }
    }
    Ok(())
}

/// Load custom solvents from a JSON file (a list of [`SolventModel`]).
pub fn load_solvents(path: &Path) -> Result<Vec<SolventModel>> {
    let text = std::fs::read_to_string(path)?;
    let models: Vec<SolventModel> = serde_json::from_str(&text)?;
    for m in &models {
        validate_solvent(m)?;
    }
    Ok(models)
}

/// Dump solvent models to the same JSON format accepted by [`load_solvents`].
pub fn save_solvents(models: &[SolventModel], path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(models)?;
    std::fs::write(path, text)?;
    Ok(())
}
