//! Ion definitions, cavity radii derived from the reference Born column, and
//! ingestion of the reference tables used by the golden-file comparisons.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solvents::builtin_solvent;
use crate::units::UnitSystem;

/// A spherical monoatomic ion.
#[derive(Debug, Clone, PartialEq)]
pub struct IonSpec {
    pub name: String,
    /// Signed valence z_i.
    pub valence: i32,
    /// Cavity radius in Å.
    pub radius: f64,
}

impl IonSpec {
    pub fn new(name: impl Into<String>, valence: i32, radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::Validation(format!("ion radius must be > 0, got {radius}")));
        }
        if valence == 0 {
            return Err(Error::Validation("ion valence must be nonzero".into()));
        }
        Ok(Self {
            name: name.into(),
            valence,
            radius,
        })
    }

    /// Signed charge in e₀.
    pub fn charge(&self) -> f64 {
        self.valence as f64
    }
}

/// Invert the Born equation: R = K_B·(1/ε_in − 1/ε_out)·z² / |ΔG|.
pub fn radius_from_born(dg_born: f64, eps_out: f64, valence: i32, units: &UnitSystem) -> Result<f64> {
    if dg_born >= 0.0 {
        return Err(Error::Domain(format!(
            "Born energy must be negative to invert for a radius, got {dg_born}"
        )));
    }
    if eps_out <= units.eps_in {
        return Err(Error::Domain(format!(
            "need eps_out > eps_in to invert the Born equation, got {eps_out}"
        )));
    }
    let z2 = (valence as f64).powi(2);
    Ok(units.k_born * (1.0 / units.eps_in - 1.0 / eps_out) * z2 / dg_born.abs())
}

/// Table 2's water Born column, embedded so the ion set needs no runtime files.
const TABLE2_W: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/table2_W.csv"));

/// The nine reference ions with radii derived from the water Born column at
/// 25 °C.  A single solvent-independent radius per ion reproduces the Born
/// columns of the other solvents.
pub fn builtin_ion_set() -> Vec<IonSpec> {
    let units = UnitSystem::default();
    let water = builtin_solvent("W").expect("water is built in");
    let eps = water.eps(25.0).expect("25 °C is in range for water");
    let rows = parse_reference(TABLE2_W, "<builtin table 2>").expect("embedded table parses");
    let mut ions = Vec::new();
    for name in ["Li+", "Na+", "K+", "Rb+", "Cs+", "F-", "Cl-", "Br-", "I-"] {
        let valence = if name.ends_with('+') { 1 } else { -1 };
        let dg = rows
            .iter()
            .find(|r| r.ion == name && r.quantity == Quantity::GibbsBorn)
            .and_then(|r| r.value)
            .expect("embedded table has Born column");
        let radius = radius_from_born(dg, eps, valence, &units).expect("table Born values are negative");
        ions.push(IonSpec {
            name: name.to_string(),
            valence,
            radius,
        });
    }
    ions
}

/// Look up one of the nine built-in ions by name.
pub fn builtin_ion(name: &str) -> Result<IonSpec> {
    builtin_ion_set()
        .into_iter()
        .find(|i| i.name == name)
        .ok_or_else(|| Error::UnknownIon(name.to_string()))
}

/// One tabulated quantity in a reference table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    GibbsExpt,
    GibbsBorn,
    GibbsMsa,
    GibbsHsbc,
    EntropyExpt,
    EntropyBorn,
    EntropyMsa,
    EntropyHsbc,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::GibbsExpt,
        Quantity::GibbsBorn,
        Quantity::GibbsMsa,
        Quantity::GibbsHsbc,
        Quantity::EntropyExpt,
        Quantity::EntropyBorn,
        Quantity::EntropyMsa,
        Quantity::EntropyHsbc,
    ];

    /// Column name in the CSV schema.
    pub fn column(&self) -> &'static str {
        match self {
            Quantity::GibbsExpt => "dG_expt",
            Quantity::GibbsBorn => "dG_born",
            Quantity::GibbsMsa => "dG_msa",
            Quantity::GibbsHsbc => "dG_hsbc",
            Quantity::EntropyExpt => "dS_expt",
            Quantity::EntropyBorn => "dS_born",
            Quantity::EntropyMsa => "dS_msa",
            Quantity::EntropyHsbc => "dS_hsbc",
        }
    }
}

/// One cell of a reference table; `value` is `None` where the source reports
/// N/R.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub ion: String,
    pub solvent: String,
    pub quantity: Quantity,
    /// kJ/mol for Gibbs energies, J/(mol·K) for entropies.
    pub value: Option<f64>,
}

const KNOWN_IONS: [&str; 9] = ["Li+", "Na+", "K+", "Rb+", "Cs+", "F-", "Cl-", "Br-", "I-"];
const KNOWN_SOLVENTS: [&str; 5] = ["W", "MeOH", "F", "AN", "DMF"];

fn parse_reference(text: &str, origin: &str) -> Result<Vec<ReferenceRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let expected = [
        "ion", "solvent", "dG_expt", "dG_born", "dG_msa", "dG_hsbc", "dS_expt", "dS_born",
        "dS_msa", "dS_hsbc",
    ];
    if !text.trim().is_empty() {
        let headers = rdr.headers()?.clone();
        let got: Vec<_> = headers.iter().collect();
        if got != expected {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: 1,
                message: format!("unexpected header {got:?}"),
            });
        }
    }
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record = record?;
        if record.len() != 10 {
            return Err(Error::Parse {
                path: origin.to_string(),
                line,
                message: format!("expected 10 fields, got {}", record.len()),
            });
        }
        let ion = record[0].to_string();
        let solvent = record[1].to_string();
        if !KNOWN_IONS.contains(&ion.as_str()) {
            return Err(Error::Validation(format!("{origin}:{line}: unknown ion '{ion}'")));
        }
        if !KNOWN_SOLVENTS.contains(&solvent.as_str()) {
            return Err(Error::Validation(format!(
                "{origin}:{line}: unknown solvent '{solvent}'"
            )));
        }
        for (col, quantity) in Quantity::ALL.iter().enumerate() {
            let cell = &record[col + 2];
            let value = if cell == "N/R" {
                None
            } else {
                Some(cell.parse::<f64>().map_err(|_| Error::Parse {
                    path: origin.to_string(),
                    line,
                    message: format!("column {}: cannot parse '{cell}' as a number", quantity.column()),
                })?)
            };
            if !seen.insert((ion.clone(), solvent.clone(), *quantity)) {
                return Err(Error::Validation(format!(
                    "{origin}:{line}: duplicate key ({ion}, {solvent}, {})",
                    quantity.column()
                )));
            }
            rows.push(ReferenceRow {
                ion: ion.clone(),
                solvent: solvent.clone(),
                quantity: *quantity,
                value,
            });
        }
    }
    Ok(rows)
}

/// Load a reference table CSV (schema `ion,solvent,dG_*,dS_*`, `N/R` for
/// missing cells).
pub fn load_reference(path: &Path) -> Result<Vec<ReferenceRow>> {
    let text = std::fs::read_to_string(path)?;
    parse_reference(&text, &path.display().to_string())
}

/// Look up one cell in a loaded dataset.
pub fn reference_value(
    rows: &[ReferenceRow],
    ion: &str,
    solvent: &str,
    quantity: Quantity,
) -> Option<Option<f64>> {
    rows.iter()
        .find(|r| r.ion == ion && r.solvent == solvent && r.quantity == quantity)
        .map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::born_energy;
    use approx::assert_relative_eq;

    #[test]
    fn radius_inversion_reference_points() {
        let units = UnitSystem::default();
        let r = radius_from_born(-779.0, 78.283, 1, &units).unwrap();
        assert_relative_eq!(r, 0.880, max_relative = 1e-3);
        let r = radius_from_born(-591.0, 78.283, 1, &units).unwrap();
        assert_relative_eq!(r, 1.160, max_relative = 1e-3);
        // Unit radius by construction.
        let eps = 78.283;
        let dg = -units.k_born * (1.0 - 1.0 / eps);
        assert_relative_eq!(radius_from_born(dg, eps, 1, &units).unwrap(), 1.0, max_relative = 1e-14);
        assert!(radius_from_born(10.0, eps, 1, &units).is_err());
    }

    #[test]
    fn builtin_ions_have_expected_radii() {
        let ions = builtin_ion_set();
        assert_eq!(ions.len(), 9);
        let get = |n: &str| ions.iter().find(|i| i.name == n).unwrap().radius;
        assert_relative_eq!(get("Li+"), 0.880, max_relative = 1e-3);
        assert_relative_eq!(get("Cl-"), 1.668, max_relative = 1e-3);
        assert_relative_eq!(get("I-"), 2.059, max_relative = 1e-3);
        assert!(ions.iter().all(|i| i.valence.abs() == 1));
    }

    #[test]
    fn radius_energy_roundtrip() {
        let units = UnitSystem::default();
        let eps = 37.001;
        for i in 0..60 {
            let r = 0.3 + (20.0 - 0.3) * i as f64 / 59.0;
            let ion = IonSpec::new("x", 1, r).unwrap();
            let dg = born_energy(&ion, eps, &units);
            let back = radius_from_born(dg, eps, 1, &units).unwrap();
            assert_relative_eq!(back, r, max_relative = 1e-12);
        }
    }

    #[test]
    fn load_reference_full_table() {
        let rows = parse_reference(TABLE2_W, "table2").unwrap();
        assert_eq!(rows.len(), 72); // 9 ions x 8 quantities
        assert!(rows.iter().all(|r| r.value.is_some()));
        assert_eq!(
            reference_value(&rows, "Li+", "W", Quantity::GibbsMsa),
            Some(Some(-485.0))
        );
    }

    #[test]
    fn load_reference_not_reported_cells() {
        let text = "ion,solvent,dG_expt,dG_born,dG_msa,dG_hsbc,dS_expt,dS_born,dS_msa,dS_hsbc\n\
                    F-,MeOH,N/R,-566,-332,-325,N/R,-109,-239,-241\n";
        let rows = parse_reference(text, "t").unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(reference_value(&rows, "F-", "MeOH", Quantity::GibbsExpt), Some(None));
        assert_eq!(
            reference_value(&rows, "F-", "MeOH", Quantity::EntropyBorn),
            Some(Some(-109.0))
        );
    }

    #[test]
    fn load_reference_rejects_bad_input() {
        let header = "ion,solvent,dG_expt,dG_born,dG_msa,dG_hsbc,dS_expt,dS_born,dS_msa,dS_hsbc\n";
        let bad_num = format!("{header}Li+,W,xx,-779,-485,-472,-164,-46,-198,-206\n");
        match parse_reference(&bad_num, "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_ion = format!("{header}Xx+,W,-529,-779,-485,-472,-164,-46,-198,-206\n");
        assert!(matches!(parse_reference(&bad_ion, "t"), Err(Error::Validation(_))));
        let dup = format!(
            "{header}Li+,W,-529,-779,-485,-472,-164,-46,-198,-206\nLi+,W,-529,-779,-485,-472,-164,-46,-198,-206\n"
        );
        assert!(matches!(parse_reference(&dup, "t"), Err(Error::Validation(_))));
    }

    #[test]
    fn load_reference_empty_file() {
        assert!(parse_reference("", "t").unwrap().is_empty());
    }
}
