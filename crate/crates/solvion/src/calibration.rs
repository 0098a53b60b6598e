//! Least-squares calibration of the boundary-condition parameter α against
//! the exact MSA perturbation, and its linear temperature regression.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ions::IonSpec;
use crate::solvents::SolventModel;
use crate::thermo::{h_model, msa_sigma, normal_field};
use crate::units::UnitSystem;

/// One calibrated α sample at a temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSample {
    /// Temperature, °C.
    pub t: f64,
    /// Fitted α, Å.
    pub alpha: f64,
    /// Sum of squared residuals of the fit at this temperature.
    pub sse: f64,
}

/// Per-solvent α samples with their linear temperature fit α(T) = a1 + a2·T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSet {
    pub solvent: String,
    pub samples: Vec<AlphaSample>,
    /// Intercept, Å.
    pub a1: f64,
    /// Slope, Å/K.
    pub a2: f64,
    pub r_squared: f64,
    /// Radii grid (Å) the samples were fitted on.
    pub fitted_at_grid: Vec<f64>,
    /// Largest |a1 + a2·T − α| over the samples, recorded at fit time.
    pub line_tolerance: f64,
}

impl CalibrationSet {
    pub fn alpha_at(&self, t: f64) -> f64 {
        self.a1 + self.a2 * t
    }

    pub fn alpha_source(&self) -> crate::thermo::AlphaSource {
        crate::thermo::AlphaSource::Line {
            a1: self.a1,
            a2: self.a2,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples.iter().any(|s| !(s.alpha > 0.0)) {
            return Err(Error::Validation(format!(
                "calibration set for {}: every sampled alpha must be positive",
                self.solvent
            )));
        }
        if !(0.0..=1.0).contains(&self.r_squared) {
            return Err(Error::Validation(format!(
                "calibration set for {}: r_squared {} outside [0, 1]",
                self.solvent, self.r_squared
            )));
        }
        for s in &self.samples {
            let line_err = (self.a1 + self.a2 * s.t - s.alpha).abs();
            if line_err > self.line_tolerance + 1e-12 {
                return Err(Error::Validation(format!(
                    "calibration set for {}: line misses sample at T={} by {line_err}",
                    self.solvent, s.t
                )));
            }
        }
        Ok(())
    }
}

/// Default radii grid: 0.8 Å to 3.0 Å in 0.1 Å steps, spanning the reference
/// ion radii (0.88–2.06 Å) with margin.
pub fn default_radii_grid() -> Vec<f64> {
    (0..=22).map(|i| 0.8 + 0.1 * i as f64).collect()
}

/// Exact perturbation for a Born ion of radius R: σ^Born/σ^MSA − 1 = δ_s/R.
pub fn h_exact(radius: f64, solvent: &SolventModel, t: f64) -> Result<f64> {
    if radius <= 0.0 {
        return Err(Error::Domain(format!("radius must be > 0, got {radius}")));
    }
    Ok(solvent.msa_shift(t)?.delta_s / radius)
}

/// Normal field of a unit test charge at the MSA surface charge, for a cavity
/// of radius R.
fn calibration_field(radius: f64, solvent: &SolventModel, t: f64, units: &UnitSystem) -> Result<f64> {
    let ion = IonSpec::new("probe", 1, radius)?;
    let sigma = msa_sigma(&ion, solvent, t, units)?;
    Ok(normal_field(&ion, sigma))
}

/// Fit α at one temperature by least squares of α√|E_n| against the exact
/// perturbation over a radii grid.  The normal equation gives the closed form
/// α* = Σ h√|E| / Σ|E|.
pub fn fit_alpha(
    solvent: &SolventModel,
    t: f64,
    radii_grid: &[f64],
    units: &UnitSystem,
) -> Result<(f64, f64)> {
    if radii_grid.is_empty() {
        return Err(Error::Fit("empty radii grid".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut points = Vec::with_capacity(radii_grid.len());
    for &r in radii_grid {
        let h = h_exact(r, solvent, t)?;
        let e = calibration_field(r, solvent, t, units)?.abs();
        num += h * e.sqrt();
        den += e;
        points.push((h, e));
    }
    if den == 0.0 {
        return Err(Error::Fit("degenerate grid: all normal fields vanish".into()));
    }
    let alpha = num / den;
    let sse = points
        .iter()
        .map(|&(h, e)| (h - alpha * e.sqrt()).powi(2))
        .sum();
    Ok((alpha, sse))
}

/// Default temperature grid: five evenly spaced points across the solvent's
/// validity window.
pub fn default_temperature_grid(solvent: &SolventModel) -> Vec<f64> {
    let (lo, hi) = solvent.valid_range;
    (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect()
}

/// Fit α at each temperature, then regress α(T) = a1 + a2·T by ordinary least
/// squares.
pub fn fit_alpha_line(
    solvent: &SolventModel,
    t_grid: &[f64],
    radii_grid: &[f64],
    units: &UnitSystem,
) -> Result<CalibrationSet> {
    if t_grid.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 temperatures for a line, got {}",
            t_grid.len()
        )));
    }
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (alpha, sse) = fit_alpha(solvent, t, radii_grid, units)?;
        samples.push(AlphaSample { t, alpha, sse });
    }
    let n = samples.len() as f64;
    let mean_t = samples.iter().map(|s| s.t).sum::<f64>() / n;
    let mean_a = samples.iter().map(|s| s.alpha).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.t - mean_t).powi(2)).sum();
    let sxy: f64 = samples
        .iter()
        .map(|s| (s.t - mean_t) * (s.alpha - mean_a))
        .sum();
    let (a1, a2) = if sxx == 0.0 {
        return Err(Error::Fit("all temperatures identical".into()));
    } else {
        let a2 = sxy / sxx;
        (mean_a - a2 * mean_t, a2)
    };
    let ss_res: f64 = samples
        .iter()
        .map(|s| (s.alpha - (a1 + a2 * s.t)).powi(2))
        .sum();
    let ss_tot: f64 = samples.iter().map(|s| (s.alpha - mean_a).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    let line_tolerance = samples
        .iter()
        .map(|s| (a1 + a2 * s.t - s.alpha).abs())
        .fold(0.0, f64::max);
    Ok(CalibrationSet {
        solvent: solvent.name.clone(),
        samples,
        a1,
        a2,
        r_squared,
        fitted_at_grid: radii_grid.to_vec(),
        line_tolerance,
    })
}

/// Persist calibration sets as JSON.
pub fn save_params(sets: &[CalibrationSet], path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(sets)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Load calibration sets, enforcing the set invariants.
pub fn load_params(path: &Path) -> Result<Vec<CalibrationSet>> {
    let text = std::fs::read_to_string(path)?;
    let sets: Vec<CalibrationSet> = serde_json::from_str(&text)?;
    for s in &sets {
        s.validate()?;
    }
    Ok(sets)
}

/// One sampled point for the perturbation-function plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub radius: f64,
    pub e_n: f64,
    pub h_exact: f64,
    pub h_model: f64,
}

/// Sample the exact perturbation and the α√|E_n| model over a radii grid at
/// one temperature, with the perturbation strength supplied by the caller
/// (per-temperature fit or line model).
pub fn figure_data(
    solvent: &SolventModel,
    t: f64,
    alpha: f64,
    radii_grid: &[f64],
    units: &UnitSystem,
) -> Result<Vec<FigureRow>> {
    radii_grid
        .iter()
        .map(|&r| {
            let e_n = calibration_field(r, solvent, t, units)?;
            Ok(FigureRow {
                radius: r,
                e_n,
                h_exact: h_exact(r, solvent, t)?,
                h_model: h_model(e_n, alpha),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvents::{builtin_solvent, builtin_solvents};
    use approx::assert_relative_eq;

    fn units() -> UnitSystem {
        UnitSystem::default()
    }

    /// Golden-section scan over α, independent of the closed form.
    fn scan_alpha(solvent: &SolventModel, t: f64, grid: &[f64], units: &UnitSystem) -> f64 {
        let obj = |alpha: f64| -> f64 {
            grid.iter()
                .map(|&r| {
                    let h = h_exact(r, solvent, t).unwrap();
                    let e = calibration_field(r, solvent, t, units).unwrap().abs();
                    (h - alpha * e.sqrt()).powi(2)
                })
                .sum()
        };
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0, 5.0);
        while b - a > 1e-12 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if obj(c) < obj(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn h_exact_reference_points() {
        let w = builtin_solvent("W").unwrap();
        let delta = w.msa_shift(25.0).unwrap().delta_s;
        assert_relative_eq!(h_exact(delta, &w, 25.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(h_exact(0.880, &w, 25.0).unwrap(), 0.608, max_relative = 2e-3);
        assert!(h_exact(1e9, &w, 25.0).unwrap() < 1e-8);
    }

    #[test]
    fn closed_form_matches_scan() {
        let u = units();
        let grid = default_radii_grid();
        for s in builtin_solvents() {
            let t = 0.5 * (s.valid_range.0 + s.valid_range.1);
            let (alpha, _) = fit_alpha(&s, t, &grid, &u).unwrap();
            let scanned = scan_alpha(&s, t, &grid, &u);
            assert!((alpha - scanned).abs() <= 1e-8, "{}: {alpha} vs {scanned}", s.name);
        }
    }

    #[test]
    fn water_alpha_reference_values() {
        let u = units();
        let w = builtin_solvent("W").unwrap();
        let grid = default_radii_grid();
        let (a25, _) = fit_alpha(&w, 25.0, &grid, &u).unwrap();
        assert!((a25 - 0.685195).abs() / 0.685195 < 0.05, "alpha(25) = {a25}");
        let (a0, _) = fit_alpha(&w, 0.0, &grid, &u).unwrap();
        assert!((a0 - 0.670785).abs() / 0.670785 < 0.05, "alpha(0) = {a0}");
    }

    #[test]
    fn single_point_grid_interpolates() {
        let u = units();
        let w = builtin_solvent("W").unwrap();
        let (alpha, sse) = fit_alpha(&w, 25.0, &[1.3], &u).unwrap();
        let h = h_exact(1.3, &w, 25.0).unwrap();
        let e = calibration_field(1.3, &w, 25.0, &u).unwrap().abs();
        assert_relative_eq!(alpha, h / e.sqrt(), max_relative = 1e-12);
        assert!(sse < 1e-25);
    }

    #[test]
    fn empty_grid_is_fit_error() {
        let u = units();
        let w = builtin_solvent("W").unwrap();
        assert!(fit_alpha(&w, 25.0, &[], &u).is_err());
    }

    #[test]
    fn water_line_reference() {
        let u = units();
        let w = builtin_solvent("W").unwrap();
        let set =
            fit_alpha_line(&w, &[0.0, 25.0, 50.0, 75.0, 100.0], &default_radii_grid(), &u).unwrap();
        assert!((set.a1 - 0.670476).abs() / 0.670476 < 0.05, "a1 = {}", set.a1);
        assert!((set.a2 - 0.000594).abs() / 0.000594 < 0.05, "a2 = {}", set.a2);
        assert!(set.r_squared >= 0.99);
    }

    #[test]
    fn all_solvent_lines_increase_with_temperature() {
        let u = units();
        for s in builtin_solvents() {
            let set =
                fit_alpha_line(&s, &default_temperature_grid(&s), &default_radii_grid(), &u).unwrap();
            assert!(set.a2 > 0.0, "{}: a2 = {}", s.name, set.a2);
            assert!(set.r_squared >= 0.99, "{}: r2 = {}", s.name, set.r_squared);
        }
    }

    #[test]
    fn flat_line_from_identical_samples() {
        // Two identical alphas at distinct temperatures give slope 0.
        let set = CalibrationSet {
            solvent: "X".into(),
            samples: vec![
                AlphaSample { t: 10.0, alpha: 0.7, sse: 0.0 },
                AlphaSample { t: 20.0, alpha: 0.7, sse: 0.0 },
            ],
            a1: 0.7,
            a2: 0.0,
            r_squared: 1.0,
            fitted_at_grid: vec![],
            line_tolerance: 0.0,
        };
        assert!(set.validate().is_ok());
        assert_eq!(set.alpha_at(33.0), 0.7);
    }

    #[test]
    fn too_few_temperatures_is_an_error() {
        let u = units();
        let w = builtin_solvent("W").unwrap();
        assert!(fit_alpha_line(&w, &[25.0], &default_radii_grid(), &u).is_err());
    }

    #[test]
    fn params_roundtrip_and_validation() {
        let u = units();
        let w = builtin_solvent("W").unwrap();
        let set =
            fit_alpha_line(&w, &default_temperature_grid(&w), &default_radii_grid(), &u).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.json");
        save_params(std::slice::from_ref(&set), &path).unwrap();
        let back = load_params(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0], set);

        let mut bad = set;
        bad.samples[0].alpha = -1.0;
        save_params(std::slice::from_ref(&bad), &path).unwrap();
        assert!(load_params(&path).is_err());
    }

    #[test]
    fn figure_data_rows() {
        let u = units();
        let w = builtin_solvent("W").unwrap();
        let grid = default_radii_grid();
        let (alpha, _) = fit_alpha(&w, 25.0, &grid, &u).unwrap();
        let rows = figure_data(&w, 25.0, alpha, &grid, &u).unwrap();
        assert_eq!(rows.len(), grid.len());
        // Per-temperature fit tracks the exact curve closely.
        for r in &rows {
            assert!((r.h_model - r.h_exact).abs() / r.h_exact <= 0.09, "{r:?}");
        }
        let one = figure_data(&w, 25.0, alpha, &[1.0], &u).unwrap();
        assert_eq!(one.len(), 1);
    }
}
