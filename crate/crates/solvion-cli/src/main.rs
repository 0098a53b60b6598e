//! `solvion` — reproduce the solvation-thermodynamics tables and figure
//! datasets, calibrate the nonlinear boundary-condition strength, and drive
//! the boundary-element solver.

mod output;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use output::{emit, Format, Table};
use solvion::bem::{icosphere, load_charges, PanelSystem, PointCharge, SurfaceMesh};
use solvion::calibration::{
    default_radii_grid, default_temperature_grid, figure_data, fit_alpha, fit_alpha_line,
    load_params, save_params,
};
use solvion::ions::{builtin_ion, builtin_ion_set, load_reference, Quantity, ReferenceRow};
use solvion::solvents::{builtin_solvent, builtin_solvents};
use solvion::thermo::{evaluate, AlphaSource, Model};
use solvion::units::UnitSystem;
use solvion::SolventModel;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "solvion",
    about = "Born, MSA, and nonlinear boundary-condition solvation thermodynamics",
    version
)]
struct Cli {
    /// Directory holding reference tables (table*.csv).
    #[arg(long, global = true, default_value = "data")]
    data_dir: PathBuf,
    /// Calibration parameter file (JSON) providing α(T) lines.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Output format for tabular commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout when omitted; prefix for `bem`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the 9-ion free-energy/entropy table for a solvent.
    Tables(TablesArgs),
    /// Fit the α(T) line for a solvent and write a parameter file.
    Fit(FitArgs),
    /// Temperature sweep of ΔG and ΔS for one ion and model.
    Sweep(SweepArgs),
    /// Emit plot-ready datasets for the perturbation function and α(T).
    Figdata(FigdataArgs),
    /// Run the boundary-element solver on a mesh and charge set.
    Bem(BemArgs),
    /// Compare every computed column against the reference tables.
    Validate,
}

#[derive(Args)]
struct TablesArgs {
    /// Solvent name (W, MeOH, F, AN, DMF) or `all`.
    #[arg(long)]
    solvent: String,
    /// Temperature, °C.
    #[arg(long, default_value_t = 25.0)]
    temp: f64,
    /// Explicit α overriding fit/parameter file.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    solvent: String,
    /// Comma-separated temperatures, °C (default: five even points in range).
    #[arg(long, value_delimiter = ',')]
    temps: Option<Vec<f64>>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    solvent: String,
    #[arg(long)]
    ion: String,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct FigdataArgs {
    /// Which dataset: the h(E_n) curves or the α(T) lines.
    #[arg(long, value_enum)]
    which: Figure,
    /// Comma-separated solvents (may be empty for a header-only file).
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "W")]
    solvents: Vec<String>,
    /// Temperatures for the h(E_n) curves, °C.
    #[arg(long, value_delimiter = ',', default_values_t = [25.0, 75.0])]
    temps: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    /// (E_n, h_exact, h_model) rows per radius and temperature.
    Perturbation,
    /// (T, fitted α, line α) rows per solvent.
    AlphaLines,
}

#[derive(Args)]
struct BemArgs {
    /// OFF mesh file; mutually exclusive with --demo-radius.
    #[arg(long, conflicts_with = "demo_radius")]
    mesh: Option<PathBuf>,
    /// Generate an icosphere of this radius (Å) instead of reading a mesh.
    #[arg(long)]
    demo_radius: Option<f64>,
    /// Icosphere subdivision level for --demo-radius.
    #[arg(long, default_value_t = 3)]
    demo_subdiv: u32,
    /// Charge file (`x y z q` per line); default: unit charge at the origin.
    #[arg(long)]
    charges: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    eps_in: f64,
    #[arg(long, default_value_t = 78.283)]
    eps_out: f64,
    /// Boundary-condition perturbation strength, Å.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Solve the nonlinear equation instead of the linear one.
    #[arg(long)]
    nonlinear: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Born,
    Msa,
    Hsbc,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Born => Model::Born,
            ModelArg::Msa => Model::Msa,
            ModelArg::Hsbc => Model::Hsbc,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let units = UnitSystem::default();
    match &cli.command {
        Command::Tables(args) => cmd_tables(&cli, args, &units),
        Command::Fit(args) => cmd_fit(&cli, args, &units),
        Command::Sweep(args) => cmd_sweep(&cli, args, &units),
        Command::Figdata(args) => cmd_figdata(&cli, args, &units),
        Command::Bem(args) => cmd_bem(&cli, args, &units),
        Command::Validate => cmd_validate(&cli, &units),
    }
}

/// Integer rounding used by the published tables.
fn fmt_int(x: f64) -> String {
    let r = x.round();
    // Avoid the "-0" artifact.
    format!("{:.0}", if r == 0.0 { 0.0 } else { r })
}

fn fmt_opt_int(x: Option<f64>) -> String {
    x.map(fmt_int).unwrap_or_else(|| "N/R".into())
}

fn solvent_list(selector: &str) -> Result<Vec<SolventModel>> {
    if selector.eq_ignore_ascii_case("all") {
        Ok(builtin_solvents())
    } else {
        Ok(vec![builtin_solvent(selector)?])
    }
}

/// Resolve exactly one α source for HSBC computations.
fn resolve_alpha(
    cli: &Cli,
    explicit: Option<f64>,
    solvent: &SolventModel,
    units: &UnitSystem,
) -> Result<AlphaSource> {
    match (explicit, &cli.params) {
        (Some(_), Some(_)) => bail!("--alpha and --params are mutually exclusive"),
        (Some(a), None) => Ok(AlphaSource::Fixed(a)),
        (None, Some(path)) => {
            let sets = load_params(path)
                .with_context(|| format!("loading parameters from {}", path.display()))?;
            let set = sets
                .iter()
                .find(|s| s.solvent == solvent.name)
                .with_context(|| format!("no parameters for solvent {} in file", solvent.name))?;
            Ok(set.alpha_source())
        }
        (None, None) => {
            let set = fit_alpha_line(
                solvent,
                &default_temperature_grid(solvent),
                &default_radii_grid(),
                units,
            )?;
            Ok(set.alpha_source())
        }
    }
}

/// Load every reference row found in data-dir/table*.csv.
fn load_all_reference(data_dir: &Path) -> Vec<ReferenceRow> {
    let mut rows = Vec::new();
    let Ok(entries) = std::fs::read_dir(data_dir) else {
        return rows;
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "csv")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("table"))
        })
        .collect();
    paths.sort();
    for p in paths {
        if let Ok(mut r) = load_reference(&p) {
            rows.append(&mut r);
        }
    }
    rows
}

fn cmd_tables(cli: &Cli, args: &TablesArgs, units: &UnitSystem) -> Result<()> {
    let reference = load_all_reference(&cli.data_dir);
    let mut out = String::new();
    for solvent in solvent_list(&args.solvent)? {
        let has_expt = reference.iter().any(|r| r.solvent == solvent.name);
        if !has_expt {
            eprintln!(
                "warning: no reference table for {} in {}; Expt columns omitted",
                solvent.name,
                cli.data_dir.display()
            );
        }
        let alpha = resolve_alpha(cli, args.alpha, &solvent, units)?;
        let mut headers = vec!["ion", "solvent"];
        if has_expt {
            headers.push("dG_expt");
        }
        headers.extend(["dG_born", "dG_msa", "dG_hsbc", "dG_err_pct"]);
        if has_expt {
            headers.push("dS_expt");
        }
        headers.extend(["dS_born", "dS_msa", "dS_hsbc", "dS_err_pct"]);
        let mut table = Table::new(&headers);
        for ion in builtin_ion_set() {
            let born = evaluate(Model::Born, &ion, &solvent, args.temp, &alpha, units)?;
            let msa = evaluate(Model::Msa, &ion, &solvent, args.temp, &alpha, units)?;
            let hsbc = evaluate(Model::Hsbc, &ion, &solvent, args.temp, &alpha, units)?;
            // Relative error of the nonlinear model against the MSA, from
            // unrounded values, one decimal.
            let err_dg = 100.0 * (hsbc.dg - msa.dg).abs() / msa.dg.abs();
            let err_ds = 100.0 * (hsbc.ds - msa.ds).abs() / msa.ds.abs();
            let lookup = |q: Quantity| {
                solvion::ions::reference_value(&reference, &ion.name, &solvent.name, q).flatten()
            };
            let mut row = vec![ion.name.clone(), solvent.name.clone()];
            if has_expt {
                row.push(fmt_opt_int(lookup(Quantity::GibbsExpt)));
            }
            row.extend([
                fmt_int(born.dg),
                fmt_int(msa.dg),
                fmt_int(hsbc.dg),
                format!("{err_dg:.1}"),
            ]);
            if has_expt {
                row.push(fmt_opt_int(lookup(Quantity::EntropyExpt)));
            }
            row.extend([
                fmt_int(born.ds),
                fmt_int(msa.ds),
                fmt_int(hsbc.ds),
                format!("{err_ds:.1}"),
            ]);
            table.push(row);
        }
        out.push_str(&table.render(cli.format));
    }
    emit(cli.out.as_deref(), &out)
}

fn cmd_fit(cli: &Cli, args: &FitArgs, units: &UnitSystem) -> Result<()> {
    let solvent = builtin_solvent(&args.solvent)?;
    let grid = default_radii_grid();
    let temps = args
        .temps
        .clone()
        .unwrap_or_else(|| default_temperature_grid(&solvent));
    if temps.len() == 1 {
        let (alpha, sse) = fit_alpha(&solvent, temps[0], &grid, units)?;
        println!(
            "{}: alpha({} °C) = {alpha:.6} (sse {sse:.3e}); single temperature, no line fitted",
            solvent.name, temps[0]
        );
        return Ok(());
    }
    let set = fit_alpha_line(&solvent, &temps, &grid, units)?;
    println!(
        "{}: a1 = {:.6}, a2 = {:.6}, r² = {:.6}",
        set.solvent, set.a1, set.a2, set.r_squared
    );
    if let Some(path) = &cli.out {
        save_params(std::slice::from_ref(&set), path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs, units: &UnitSystem) -> Result<()> {
    let solvent = builtin_solvent(&args.solvent)?;
    let ion = builtin_ion(&args.ion)?;
    if args.step <= 0.0 {
        bail!("--step must be > 0");
    }
    let (lo, hi) = solvent.valid_range;
    let (mut from, mut to) = (args.from, args.to);
    if from < lo || to > hi {
        from = from.max(lo);
        to = to.min(hi);
        eprintln!(
            "warning: requested range clipped to the validity range {lo}–{hi} °C of {}",
            solvent.name
        );
    }
    if from > to {
        bail!("empty sweep range after clipping");
    }
    let model: Model = args.model.into();
    let alpha = match model {
        Model::Hsbc => resolve_alpha(cli, args.alpha, &solvent, units)?,
        _ => AlphaSource::Fixed(0.0),
    };
    let mut table = Table::new(&["temp_C", "dG_kJ_mol", "dS_J_mol_K"]);
    let mut i = 0usize;
    loop {
        let t = from + i as f64 * args.step;
        if t > to + 1e-9 {
            break;
        }
        let r = evaluate(model, &ion, &solvent, t.min(to), &alpha, units)?;
        table.push(vec![format!("{t}"), format!("{:.6}", r.dg), format!("{:.6}", r.ds)]);
        i += 1;
    }
    emit(cli.out.as_deref(), &table.render(cli.format))
}

fn cmd_figdata(cli: &Cli, args: &FigdataArgs, units: &UnitSystem) -> Result<()> {
    let grid = default_radii_grid();
    let solvents: Vec<String> = args
        .solvents
        .iter()
        .filter(|s| !s.is_empty())
        .cloned()
        .collect();
    let table = match args.which {
        Figure::Perturbation => {
            let mut table =
                Table::new(&["solvent", "temp_C", "radius_A", "e_n", "h_exact", "h_model"]);
            for name in &solvents {
                let solvent = builtin_solvent(name)?;
                for &t in &args.temps {
                    let (alpha, _) = fit_alpha(&solvent, t, &grid, units)?;
                    for row in figure_data(&solvent, t, alpha, &grid, units)? {
                        table.push(vec![
                            name.clone(),
                            format!("{t}"),
                            format!("{:.1}", row.radius),
                            format!("{:.6}", row.e_n),
                            format!("{:.6}", row.h_exact),
                            format!("{:.6}", row.h_model),
                        ]);
                    }
                }
            }
            table
        }
        Figure::AlphaLines => {
            let mut table = Table::new(&["solvent", "temp_C", "alpha_fitted", "alpha_line"]);
            for name in &solvents {
                let solvent = builtin_solvent(name)?;
                let set = fit_alpha_line(
                    &solvent,
                    &default_temperature_grid(&solvent),
                    &grid,
                    units,
                )?;
                for s in &set.samples {
                    table.push(vec![
                        name.clone(),
                        format!("{}", s.t),
                        format!("{:.6}", s.alpha),
                        format!("{:.6}", set.alpha_at(s.t)),
                    ]);
                }
            }
            table
        }
    };
    emit(cli.out.as_deref(), &table.render(cli.format))
}

#[derive(serde::Serialize)]
#[allow(non_snake_case)]
struct BemSummary {
    energy_kJ_mol: f64,
    iterations: usize,
    residual: f64,
    panels: usize,
    total_induced_charge: f64,
}

fn cmd_bem(cli: &Cli, args: &BemArgs, units: &UnitSystem) -> Result<()> {
    let mesh = match (&args.mesh, args.demo_radius) {
        (Some(path), None) => SurfaceMesh::from_off(path)?,
        (None, Some(radius)) => icosphere(radius, args.demo_subdiv)?,
        (None, None) => bail!("provide --mesh or --demo-radius"),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let charges = match &args.charges {
        Some(path) => load_charges(path)?,
        None => vec![PointCharge {
            position: Vector3::zeros(),
            charge: 1.0,
        }],
    };
    let system = PanelSystem::new(mesh, charges, args.eps_in, args.eps_out, args.alpha)?;
    let solution = if args.nonlinear {
        system.solve_nonlinear()?
    } else {
        system.solve_linear()?
    };
    let summary = BemSummary {
        energy_kJ_mol: system.reaction_energy(&solution.sigma, units),
        iterations: solution.iterations,
        residual: solution.residual,
        panels: system.mesh.panel_count(),
        total_induced_charge: system.total_charge(&solution.sigma),
    };
    let summary_json = serde_json::to_string_pretty(&summary)?;
    if let Some(prefix) = &cli.out {
        let mut sigma_csv = String::from("panel,area_A2,sigma_e_A2,e_n\n");
        for (k, (s, e)) in solution.sigma.iter().zip(&solution.e_n).enumerate() {
            sigma_csv.push_str(&format!(
                "{k},{:.9},{s:.12e},{e:.12e}\n",
                system.mesh.areas[k]
            ));
        }
        let sigma_path = prefix.with_extension("sigma.csv");
        let summary_path = prefix.with_extension("summary.json");
        std::fs::write(&sigma_path, sigma_csv)?;
        std::fs::write(&summary_path, format!("{summary_json}\n"))?;
        eprintln!("wrote {} and {}", sigma_path.display(), summary_path.display());
    }
    println!("{summary_json}");
    Ok(())
}

fn cmd_validate(cli: &Cli, units: &UnitSystem) -> Result<()> {
    let reference = load_all_reference(&cli.data_dir);
    if reference.is_empty() {
        bail!("no reference tables found in {}", cli.data_dir.display());
    }
    let grid = default_radii_grid();
    let mut failures = 0usize;
    let mut check = |label: String, ok: bool, detail: String| {
        if ok {
            println!("PASS {label}: {detail}");
        } else {
            failures += 1;
            println!("FAIL {label}: {detail}");
        }
    };

    for solvent in builtin_solvents() {
        let set = fit_alpha_line(&solvent, &default_temperature_grid(&solvent), &grid, units)?;
        let alpha = set.alpha_source();
        let mut worst_abs: f64 = 0.0;
        let mut worst_rel: f64 = 0.0;
        let mut missing = 0usize;
        let mut ok = true;
        for ion in builtin_ion_set() {
            let born = evaluate(Model::Born, &ion, &solvent, 25.0, &alpha, units)?;
            let msa = evaluate(Model::Msa, &ion, &solvent, 25.0, &alpha, units)?;
            let hsbc = evaluate(Model::Hsbc, &ion, &solvent, 25.0, &alpha, units)?;
            let cells = [
                (Quantity::GibbsBorn, born.dg, 1.0),
                (Quantity::GibbsMsa, msa.dg, 1.0),
                (Quantity::EntropyBorn, born.ds, 1.0),
                (Quantity::EntropyMsa, msa.ds, 1.0),
            ];
            for (q, value, tol) in cells {
                match solvion::ions::reference_value(&reference, &ion.name, &solvent.name, q)
                    .flatten()
                {
                    Some(expected) => {
                        let abs = (value - expected).abs();
                        worst_abs = worst_abs.max(abs);
                        ok &= abs <= tol;
                    }
                    None => missing += 1,
                }
            }
            if let Some(expected) = solvion::ions::reference_value(
                &reference,
                &ion.name,
                &solvent.name,
                Quantity::GibbsHsbc,
            )
            .flatten()
            {
                let abs = (hsbc.dg - expected).abs();
                let rel = abs / expected.abs();
                worst_rel = worst_rel.max(rel);
                ok &= abs <= (0.03 * expected.abs()).max(10.0);
            }
        }
        check(
            format!("{} table", solvent.name),
            ok,
            format!(
                "worst linear-model |Δ| = {worst_abs:.2}, worst nonlinear-model deviation {:.1}% ({missing} cells N/R)",
                100.0 * worst_rel
            ),
        );
        check(
            format!("{} α(T) line", solvent.name),
            set.r_squared >= 0.99,
            format!("r² = {:.5}", set.r_squared),
        );
    }

    if failures > 0 {
        bail!("{failures} validation checks failed");
    }
    println!("all validation checks passed");
    Ok(())
}
