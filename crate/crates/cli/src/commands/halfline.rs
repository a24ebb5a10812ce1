use std::path::PathBuf;

use clap::{Args, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use specdegen::halfline::{self, superseparation, HalfLineProblem, SuperseparationReport};
use specdegen::profile::WeightProfile;
use specdegen::Boundary;

use super::{to_json, OutputArgs};
use crate::config::{check_t_grid, parse_scalar};
use crate::emit::{write_out, Envelope, Provenance, Table};
use crate::error::CliError;

#[derive(Subcommand, Debug)]
pub enum HalfLineCommand {
    /// Eigenvalues of −t²w″ + μw = λσw at one t.
    Solve(SolveArgs),
    /// The same over a decreasing t-grid and several μ.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    #[arg(long, default_value = "exp2")]
    pub profile: String,
    /// Number, `pi2`, `4pi2` or a constant expression.
    #[arg(long, default_value = "pi2")]
    pub mu: String,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value = "dirichlet")]
    pub bc: Boundary,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Write each eigenfunction as `eigenfunction_k<k>.csv` (columns x,w).
    #[arg(long)]
    #[serde(skip)]
    pub dump_dir: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value = "exp2")]
    pub profile: String,
    #[arg(long, default_value = "pi2", value_delimiter = ',')]
    pub mu: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub t_grid: Vec<f64>,
    #[arg(long, default_value = "dirichlet")]
    pub bc: Boundary,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub const SPECTRUM_COLUMNS: [&str; 5] = ["t", "mu", "k", "lambda", "residual"];

pub fn load_profile(name: &str) -> Result<WeightProfile, CliError> {
    Ok(WeightProfile::named(name)?)
}

/// Rows t,mu,k,lambda,residual for k in `k_range`, sorted by (t, μ, k) with t
/// in the order of the grid.
pub fn sweep_table(
    profile: &WeightProfile,
    mus: &[f64],
    t_grid: &[f64],
    bc: Boundary,
    k_range: [usize; 2],
) -> Result<Table, CliError> {
    check_t_grid(t_grid)?;
    let template = HalfLineProblem::new(t_grid[0], mus[0], profile.clone(), bc)?;
    let mut rows = halfline::sweep(&template, t_grid, mus, k_range[1])?;
    rows.sort_by(|a, b| {
        b.t.total_cmp(&a.t)
            .then(a.mu.total_cmp(&b.mu))
            .then(a.k.cmp(&b.k))
    });
    let mut table = Table::new(&SPECTRUM_COLUMNS);
    for r in rows.iter().filter(|r| r.k >= k_range[0]) {
        table.push(vec![
            r.t.into(),
            r.mu.into(),
            r.k.into(),
            r.lambda.into(),
            r.residual.into(),
        ]);
    }
    for &t in t_grid {
        for &mu in mus {
            let have = rows.iter().filter(|r| r.t == t && r.mu == mu).count();
            if have < k_range[1] {
                return Err(CliError::Refusal(format!(
                    "t = {t}, mu = {mu}: only {have} of {} eigenvalues resolved",
                    k_range[1]
                )));
            }
        }
    }
    Ok(table)
}

/// Gap records for every k in range; one report per k.
pub fn superseparation_table(
    profile: &WeightProfile,
    mus: &[f64],
    t_grid: &[f64],
    bc: Boundary,
    k_range: [usize; 2],
) -> Result<(Table, Vec<(f64, usize, SuperseparationReport)>), CliError> {
    check_t_grid(t_grid)?;
    let jobs: Vec<(f64, usize)> = mus
        .iter()
        .flat_map(|&mu| (k_range[0]..=k_range[1]).map(move |k| (mu, k)))
        .collect();
    let reports: Vec<(f64, usize, SuperseparationReport)> = jobs
        .par_iter()
        .map(|&(mu, k)| -> Result<_, CliError> {
            let p = HalfLineProblem::new(t_grid[0], mu, profile.clone(), bc)?;
            Ok((mu, k, superseparation(&p, t_grid, k)?))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "mu",
        "k",
        "t",
        "lambda_k",
        "lambda_next",
        "gap",
        "gap_over_t",
        "airy_prediction",
    ]);
    for (mu, k, r) in &reports {
        for g in &r.records {
            table.push(vec![
                (*mu).into(),
                (*k).into(),
                g.t.into(),
                g.lambda_k.into(),
                g.lambda_next.into(),
                g.gap.into(),
                g.gap_over_t.into(),
                g.airy_prediction.into(),
            ]);
        }
    }
    Ok((table, reports))
}

pub fn run(cmd: &HalfLineCommand) -> Result<(), CliError> {
    match cmd {
        HalfLineCommand::Solve(a) => {
            let profile = load_profile(&a.profile)?;
            let mu = parse_scalar(&a.mu)?;
            let p = HalfLineProblem::new(a.t, mu, profile, a.bc)?;
            let s = halfline::solve(&p, a.k)?;
            let mut table = Table::new(&SPECTRUM_COLUMNS);
            for e in &s.pairs {
                table.push(vec![
                    a.t.into(),
                    mu.into(),
                    e.k.into(),
                    e.lambda.into(),
                    e.residual.into(),
                ]);
            }
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "halfline",
                    operation: "solve",
                    inputs: json!({
                        "t": a.t, "mu": mu, "profile": p.profile.name(), "bc": a.bc,
                        "k": a.k, "x_max": p.x_max, "h": p.h,
                    }),
                }],
            );
            if let Some(dir) = &a.dump_dir {
                for e in &s.pairs {
                    let mut w = Table::new(&["x", "w"]);
                    for (i, v) in e.w.values.iter().enumerate() {
                        w.push(vec![e.w.x(i).into(), (*v).into()]);
                    }
                    let path = dir.join(format!("eigenfunction_k{}.csv", e.k));
                    write_out(Some(&path), &env.csv(&w))?;
                }
            }
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            a.output.write(&env, &table, Some(to_json(&s)))?;
            if s.is_partial() {
                return Err(CliError::Refusal(format!(
                    "resolved {} of {} eigenvalues",
                    s.resolved_count, s.requested
                )));
            }
            Ok(())
        }
        HalfLineCommand::Sweep(a) => {
            let profile = load_profile(&a.profile)?;
            let mus: Vec<f64> =
                a.mu.iter()
                    .map(|m| parse_scalar(m))
                    .collect::<Result<_, _>>()?;
            let table = sweep_table(&profile, &mus, &a.t_grid, a.bc, [1, a.k])?;
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "halfline",
                    operation: "sweep",
                    inputs: json!({
                        "profile": profile.name(), "mu": mus, "t_grid": a.t_grid,
                        "bc": a.bc, "k": a.k,
                    }),
                }],
            );
            a.output.write(&env, &table, None)
        }
    }
}
