use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;
use serde_json::json;
use specdegen::domains::{
    compare_spectra, sector_spectrum, triangle_spectrum, TriangleMesh, MIN_ACROSS,
};

use super::OutputArgs;
use crate::config::check_t_grid;
use crate::emit::{write_out, Envelope, Provenance, Table};
use crate::error::CliError;

#[derive(Subcommand, Debug)]
pub enum DomainCommand {
    /// First n Dirichlet eigenvalues of the right triangle with legs 1 and t.
    Triangle(TriangleArgs),
    /// First n Dirichlet eigenvalues of the sector of opening arctan t.
    Sector(SectorArgs),
    /// Hausdorff distance of the renormalized spectra along a t-grid.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct TriangleArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Coarse mesh size; the fine mesh halves it.
    #[arg(long)]
    pub h: f64,
    /// Write the coarse mesh as vertices.csv and elements.csv here.
    #[arg(long)]
    #[serde(skip)]
    pub mesh_dir: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SectorArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub t_grid: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Coarse cells across the triangle's height (h = t/across).
    #[arg(long, default_value_t = 16)]
    pub across: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Rows t,hausdorff,hausdorff_over_t,max_error_estimate plus a per-t report.
pub fn compare_table(
    t_grid: &[f64],
    n: usize,
    across: usize,
) -> Result<(Table, serde_json::Value), CliError> {
    check_t_grid(t_grid)?;
    if across < MIN_ACROSS {
        return Err(CliError::Refusal(format!(
            "{across} cells across is below the minimum of {MIN_ACROSS}"
        )));
    }
    let mut table = Table::new(&["t", "hausdorff", "hausdorff_over_t", "max_error_estimate"]);
    let mut per_t = Vec::new();
    for &t in t_grid {
        let tri = triangle_spectrum(t, n, t / across as f64)?;
        let sec = sector_spectrum(t, n)?;
        let c = compare_spectra(&tri.renormalized, &sec.renormalized(), n)?;
        let err = tri
            .error_estimate
            .iter()
            .map(|e| e * t * t)
            .fold(0.0f64, f64::max);
        table.push(vec![
            t.into(),
            c.hausdorff.into(),
            (c.hausdorff / t).into(),
            err.into(),
        ]);
        per_t.push(json!({
            "t": t,
            "hausdorff": c.hausdorff,
            "hausdorff_over_t": c.hausdorff / t,
            "max_error_estimate": err,
            "triangle": tri.renormalized,
            "sector": sec.renormalized(),
            "warnings": sec.warnings,
        }));
    }
    Ok((table, serde_json::Value::Array(per_t)))
}

pub fn run(cmd: &DomainCommand) -> Result<(), CliError> {
    match cmd {
        DomainCommand::Triangle(a) => {
            let s = triangle_spectrum(a.t, a.n, a.h)?;
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "domains",
                    operation: "triangle_spectrum",
                    inputs: json!({
                        "t": a.t, "n": a.n, "h": a.h,
                        "coarse": [s.coarse.nx, s.coarse.ny], "fine": [s.fine.nx, s.fine.ny],
                    }),
                }],
            );
            if let Some(dir) = &a.mesh_dir {
                let mesh = TriangleMesh::new(a.t, a.h)?;
                write_out(
                    Some(&dir.join("vertices.csv")),
                    &(env.header() + &mesh.vertex_csv()),
                )?;
                write_out(
                    Some(&dir.join("elements.csv")),
                    &(env.header() + &mesh.element_csv()),
                )?;
            }
            let mut table = Table::new(&[
                "index",
                "lambda_coarse",
                "lambda_fine",
                "lambda_extrap",
                "error_estimate",
                "renormalized",
            ]);
            for i in 0..s.lambda_extrap.len() {
                table.push(vec![
                    (i + 1).into(),
                    s.coarse.values[i].into(),
                    s.fine.values[i].into(),
                    s.lambda_extrap[i].into(),
                    s.error_estimate[i].into(),
                    s.renormalized[i].into(),
                ]);
            }
            a.output.write(&env, &table, None)
        }
        DomainCommand::Sector(a) => {
            let s = sector_spectrum(a.t, a.n)?;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            let mut table = Table::new(&["index", "ell", "k", "nu", "lambda", "renormalized"]);
            for (i, e) in s.entries.iter().enumerate() {
                table.push(vec![
                    (i + 1).into(),
                    e.ell.into(),
                    e.k.into(),
                    e.nu.into(),
                    e.lambda.into(),
                    e.renormalized.into(),
                ]);
            }
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "domains",
                    operation: "sector_spectrum",
                    inputs: json!({ "t": a.t, "n": a.n }),
                }],
            );
            a.output.write(&env, &table, None)
        }
        DomainCommand::Compare(a) => {
            let (table, report) = compare_table(&a.t_grid, a.n, a.across)?;
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "domains",
                    operation: "compare_spectra",
                    inputs: json!({ "t_grid": a.t_grid, "n": a.n, "across": a.across }),
                }],
            );
            a.output.write(&env, &table, Some(report))
        }
    }
}
