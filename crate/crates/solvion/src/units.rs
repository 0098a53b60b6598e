//! Unit conventions and physical constants.
//!
//! All energies are in kJ/mol, lengths in Å, charges in units of the
//! elementary charge e₀, and surface charge densities in e₀/Å².  In these
//! units the pairwise Coulomb energy of two unit charges at 1 Å is
//! `2 * BORN_CONSTANT` and the Born energy of a unit charge in a cavity of
//! radius R is `-BORN_CONSTANT * (1/ε_in - 1/ε_out) / R`.

/// Avogadro's constant, 1/mol (CODATA 2018, exact).
pub const AVOGADRO: f64 = 6.02214076e23;
/// Elementary charge, C (CODATA 2018, exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Vacuum permittivity, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

/// Born constant N_L e₀² / (8π ε₀) in kJ·Å/mol, ≈ 694.7.
pub const BORN_CONSTANT: f64 = {
    // N_L e0^2 / (8 pi eps0) in J*m/mol, then J*m -> kJ*Å is *1e10/1e3.
    AVOGADRO * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE
        / (8.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY)
        * 1e7
};

/// Unit system for the energy formulas: the Born constant together with the
/// solute dielectric constant ε_in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// Born constant in kJ·Å/mol.
    pub k_born: f64,
    /// Solute (interior) dielectric constant.
    pub eps_in: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            k_born: BORN_CONSTANT,
            eps_in: 1.0,
        }
    }
}

impl UnitSystem {
    /// Dielectric contrast ε̂ = (ε_out − ε_in)/ε_out.
    pub fn contrast(&self, eps_out: f64) -> f64 {
        (eps_out - self.eps_in) / eps_out
    }

    /// Temperature derivative of ε̂ given ε_out and dε_out/dT.
    pub fn contrast_deriv(&self, eps_out: f64, deps_out: f64) -> f64 {
        self.eps_in * deps_out / (eps_out * eps_out)
    }

    /// Conversion factor turning ½·q·φ (q in e₀, φ = ∫σG dA in e₀/Å with
    /// G = 1/(4π|r−r'|)) into kJ/mol.  Equals N_L e₀²/ε₀ in these units.
    pub fn charge_potential_to_energy(&self) -> f64 {
        8.0 * std::f64::consts::PI * self.k_born
    }
}
