//! Spherical-ion solvation thermodynamics: Born and MSA free energies,
//! reduced surface charges, the nonlinear boundary-condition fixed point, and
//! entropies by temperature differentiation.
//!
//! Surface charge densities are reduced (e₀/Å²); with a converged density σ
//! on a sphere of radius R the free energy is `4π·K_B·R·q·σ`, a prefactor
//! fixed by requiring that α = 0 reproduce the Born energy exactly.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ions::IonSpec;
use crate::solvents::SolventModel;
use crate::units::UnitSystem;

/// Which solvation model produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Born,
    Msa,
    Hsbc,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::Born => write!(f, "Born"),
            Model::Msa => write!(f, "MSA"),
            Model::Hsbc => write!(f, "HSBC"),
        }
    }
}

/// How the boundary-condition parameter α depends on temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSource {
    /// A single α in Å, used at every temperature.
    Fixed(f64),
    /// α(T) = a1 + a2·T with T in °C.
    Line { a1: f64, a2: f64 },
}

impl AlphaSource {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            AlphaSource::Fixed(a) => a,
            AlphaSource::Line { a1, a2 } => a1 + a2 * t,
        }
    }
}

/// Free energy, entropy, and boundary-charge state for one (model, ion,
/// solvent, T) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoResult {
    pub model: Model,
    /// Gibbs solvation free energy, kJ/mol.
    pub dg: f64,
    /// Solvation entropy, J/(mol·K).
    pub ds: f64,
    /// Reduced surface charge density, e₀/Å².
    pub sigma: f64,
    /// Reduced normal field at the converged state, e₀/Å².
    pub e_n: f64,
    /// Perturbation value h at the converged state (0 for Born).
    pub h: f64,
}

/// Born solvation free energy, kJ/mol.
pub fn born_energy(ion: &IonSpec, eps_out: f64, units: &UnitSystem) -> f64 {
    let z2 = (ion.valence as f64).powi(2);
    -units.k_born * z2 * (1.0 / units.eps_in - 1.0 / eps_out) / ion.radius
}

/// MSA solvation free energy, kJ/mol.
pub fn msa_energy(ion: &IonSpec, solvent: &SolventModel, t: f64, units: &UnitSystem) -> Result<f64> {
    let eps = solvent.eps(t)?;
    let shift = solvent.msa_shift(t)?;
    let z2 = (ion.valence as f64).powi(2);
    Ok(-units.k_born * z2 * (1.0 / units.eps_in - 1.0 / eps) / (ion.radius + shift.delta_s))
}

/// Reduced Born surface charge, σ = −ε̂ q/(4πR²).
pub fn born_sigma(ion: &IonSpec, eps_out: f64, units: &UnitSystem) -> f64 {
    let e_hat = units.contrast(eps_out);
    -e_hat * ion.charge() / (4.0 * PI * ion.radius * ion.radius)
}

/// Reduced MSA surface charge, σ = −(ε̂/4π) q/(R(R+δ_s)).
pub fn msa_sigma(ion: &IonSpec, solvent: &SolventModel, t: f64, units: &UnitSystem) -> Result<f64> {
    let eps = solvent.eps(t)?;
    let shift = solvent.msa_shift(t)?;
    let e_hat = units.contrast(eps);
    Ok(-(e_hat / (4.0 * PI)) * ion.charge() / (ion.radius * (ion.radius + shift.delta_s)))
}

/// Boundary-condition perturbation h = α·√|E_n| (even in E_n).
pub fn h_model(e_n: f64, alpha: f64) -> f64 {
    alpha * e_n.abs().sqrt()
}

/// Reduced normal field just inside a sphere carrying surface charge σ:
/// E_n = −q/R² − 2πσ (bare Coulomb field plus the induced-charge term, with
/// the sphere eigenvalue Kσ = σ/2).
pub fn normal_field(ion: &IonSpec, sigma: f64) -> f64 {
    -ion.charge() / (ion.radius * ion.radius) - 2.0 * PI * sigma
}

/// Free energy from a reduced surface charge on a sphere of radius R.
pub fn energy_from_sigma(ion: &IonSpec, sigma: f64, units: &UnitSystem) -> f64 {
    4.0 * PI * units.k_born * ion.radius * ion.charge() * sigma
}

const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITER: usize = 500;

/// Solve the spherical nonlinear boundary condition
/// (1 + h(E_n(σ)))·σ = σ^Born by damped fixed-point iteration.
pub fn hsbc_solve(
    ion: &IonSpec,
    solvent: &SolventModel,
    t: f64,
    alpha: f64,
    units: &UnitSystem,
) -> Result<ThermoResult> {
    if alpha < 0.0 {
        return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
    }
    let eps = solvent.eps(t)?;
    let sigma_born = born_sigma(ion, eps, units);
    let scale = sigma_born.abs().max(f64::MIN_POSITIVE);

    let residual_of = |sigma: f64| {
        let h = h_model(normal_field(ion, sigma), alpha);
        ((1.0 + h) * sigma - sigma_born).abs() / scale
    };

    let mut sigma = sigma_born;
    let mut res = residual_of(sigma);
    let mut iterations = 0;
    while res > FIXED_POINT_TOL {
        if iterations >= FIXED_POINT_MAX_ITER {
            return Err(Error::NoConvergence {
                context: "hsbc fixed point".into(),
                iterations,
                residual: res,
            });
        }
        let h = h_model(normal_field(ion, sigma), alpha);
        let mut next = sigma_born / (1.0 + h);
        let mut next_res = residual_of(next);
        if next_res > res {
            // Damp only when the plain update would move away.
            next = 0.5 * (sigma + next);
            next_res = residual_of(next);
        }
        sigma = next;
        res = next_res;
        iterations += 1;
    }

    let e_n = normal_field(ion, sigma);
    let h = h_model(e_n, alpha);
    Ok(ThermoResult {
        model: Model::Hsbc,
        dg: energy_from_sigma(ion, sigma, units),
        ds: f64::NAN, // filled by `evaluate`
        sigma,
        e_n,
        h,
    })
}

/// Free energy of `model` at temperature t, with α drawn from `alpha` for the
/// nonlinear model.
pub fn model_energy(
    model: Model,
    ion: &IonSpec,
    solvent: &SolventModel,
    t: f64,
    alpha: &AlphaSource,
    units: &UnitSystem,
) -> Result<f64> {
    match model {
        Model::Born => Ok(born_energy(ion, solvent.eps(t)?, units)),
        Model::Msa => msa_energy(ion, solvent, t, units),
        Model::Hsbc => Ok(hsbc_solve(ion, solvent, t, alpha.at(t), units)?.dg),
    }
}

/// Default temperature step for model-level entropy differences, K.
pub const ENTROPY_DT: f64 = 0.1;

/// Solvation entropy ΔS = −∂ΔG/∂T in J/(mol·K) by a symmetric temperature
/// difference.  At the edges of a solvent's validity window the stencil is
/// shifted inward so both evaluations stay in range.
pub fn entropy(
    model: Model,
    ion: &IonSpec,
    solvent: &SolventModel,
    t: f64,
    alpha: &AlphaSource,
    units: &UnitSystem,
    dt: f64,
) -> Result<f64> {
    let (lo, hi) = solvent.valid_range;
    if hi - lo < 2.0 * dt {
        return Err(Error::Domain(format!(
            "validity window of {} narrower than entropy stencil 2·{dt}",
            solvent.name
        )));
    }
    solvent.eps(t)?;
    let t_hi = (t + dt).min(hi);
    let t_lo = (t_hi - 2.0 * dt).max(lo);
    let t_hi = t_lo + 2.0 * dt;
    let g_hi = model_energy(model, ion, solvent, t_hi, alpha, units)?;
    let g_lo = model_energy(model, ion, solvent, t_lo, alpha, units)?;
    Ok(-(g_hi - g_lo) / (t_hi - t_lo) * 1000.0)
}

/// Analytic Born entropy (temperature dependence through ε_out only).
pub fn born_entropy_analytic(
    ion: &IonSpec,
    solvent: &SolventModel,
    t: f64,
    units: &UnitSystem,
) -> Result<f64> {
    let eps = solvent.eps(t)?;
    let deps = solvent.deps_dt(t)?;
    let z2 = (ion.valence as f64).powi(2);
    // d/dT (1/eps_in - 1/eps_out) = eps'/eps².
    Ok(1000.0 * units.k_born * z2 * (deps / (eps * eps)) / ion.radius)
}

/// Analytic MSA entropy using dδ_s/dT from implicit differentiation of the
/// Wertheim relation.
pub fn msa_entropy_analytic(
    ion: &IonSpec,
    solvent: &SolventModel,
    t: f64,
    units: &UnitSystem,
) -> Result<f64> {
    let eps = solvent.eps(t)?;
    let deps = solvent.deps_dt(t)?;
    let shift = solvent.msa_shift(t)?;
    let z2 = (ion.valence as f64).powi(2);
    let f = 1.0 / units.eps_in - 1.0 / eps;
    let df = deps / (eps * eps);
    let reff = ion.radius + shift.delta_s;
    Ok(1000.0 * units.k_born * z2 * (df / reff - f * shift.d_delta_s_dt / (reff * reff)))
}

/// HSBC entropy in the differentiated-boundary-condition form: the converged
/// σ = σ^Born/(1+h) is differentiated analytically in ε̂ and numerically in h.
pub fn hsbc_entropy_bc_form(
    ion: &IonSpec,
    solvent: &SolventModel,
    t: f64,
    alpha: &AlphaSource,
    units: &UnitSystem,
) -> Result<f64> {
    let eps = solvent.eps(t)?;
    let deps = solvent.deps_dt(t)?;
    let sb = born_sigma(ion, eps, units);
    // dσ^Born/dT through ε̂.
    let dsb = sb * units.contrast_deriv(eps, deps) / units.contrast(eps);
    let h = hsbc_solve(ion, solvent, t, alpha.at(t), units)?.h;
    // dh/dT from converged solves on a short stencil.
    let dt_h = 0.01;
    let (lo, hi) = solvent.valid_range;
    let t_hi = (t + dt_h).min(hi);
    let t_lo = (t_hi - 2.0 * dt_h).max(lo);
    let t_hi = t_lo + 2.0 * dt_h;
    let h_hi = hsbc_solve(ion, solvent, t_hi, alpha.at(t_hi), units)?.h;
    let h_lo = hsbc_solve(ion, solvent, t_lo, alpha.at(t_lo), units)?.h;
    let dh = (h_hi - h_lo) / (t_hi - t_lo);
    let denom = (1.0 + h) * (1.0 + h);
    let dsigma = (dsb * (1.0 + h) - sb * dh) / denom;
    Ok(-1000.0 * 4.0 * PI * units.k_born * ion.radius * ion.charge() * dsigma)
}

/// Full evaluation of one model: free energy, entropy, and charge state.
pub fn evaluate(
    model: Model,
    ion: &IonSpec,
    solvent: &SolventModel,
    t: f64,
    alpha: &AlphaSource,
    units: &UnitSystem,
) -> Result<ThermoResult> {
    let ds = entropy(model, ion, solvent, t, alpha, units, ENTROPY_DT)?;
    match model {
        Model::Born => {
            let eps = solvent.eps(t)?;
            let sigma = born_sigma(ion, eps, units);
            Ok(ThermoResult {
                model,
                dg: born_energy(ion, eps, units),
                ds,
                sigma,
                e_n: normal_field(ion, sigma),
                h: 0.0,
            })
        }
        Model::Msa => {
            let shift = solvent.msa_shift(t)?;
            let sigma = msa_sigma(ion, solvent, t, units)?;
            Ok(ThermoResult {
                model,
                dg: msa_energy(ion, solvent, t, units)?,
                ds,
                sigma,
                e_n: normal_field(ion, sigma),
                h: shift.delta_s / ion.radius,
            })
        }
        Model::Hsbc => {
            let mut r = hsbc_solve(ion, solvent, t, alpha.at(t), units)?;
            r.ds = ds;
            Ok(r)
        }
    }
}

/// Adaptive Simpson quadrature with absolute tolerance.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Ratio of the nonlinear charging free energy to the linear-response value,
/// 2(1+h₁)·∫₀¹ q dq/(1 + h₁√q), where h₁ is the perturbation at full charge.
pub fn charging_ratio(h1: f64) -> f64 {
    let integral = adaptive_simpson(&|q: f64| q / (1.0 + h1 * q.sqrt()), 0.0, 1.0, 1e-10);
    2.0 * (1.0 + h1) * integral
}
