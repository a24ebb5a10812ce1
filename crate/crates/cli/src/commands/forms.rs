use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;
use serde_json::json;
use specdegen::forms::{
    quasimode_campaign, track_branches, CampaignReport, TabulatedFamily, TrackOptions,
};

use super::{to_json, OutputArgs};
use crate::emit::{Envelope, Provenance, Table};
use crate::error::CliError;

#[derive(Subcommand, Debug)]
pub enum FormsCommand {
    /// Seeded random (A, Q, M, I, E) trials through the quasimode inequalities.
    QuasimodeCampaign(CampaignArgs),
    /// Analytic eigenbranches of a tabulated family.
    Track(TrackArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct CampaignArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct TrackArgs {
    /// Blocks of `dim=<n> t=<value>` followed by n rows of A and n rows of M.
    #[arg(long)]
    pub family: PathBuf,
    /// Increasing t values inside the tabulated range.
    #[arg(long, value_delimiter = ',', required = true)]
    pub t_grid: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn campaign_table(report: &CampaignReport) -> Table {
    let mut table = Table::new(&["inequality", "violations", "worst_ratio"]);
    for (name, v) in &report.violations {
        let worst = report.worst_ratio.get(name).copied().unwrap_or(0.0);
        table.push(vec![name.as_str().into(), (*v).into(), worst.into()]);
    }
    table
}

pub fn run(cmd: &FormsCommand) -> Result<(), CliError> {
    match cmd {
        FormsCommand::QuasimodeCampaign(a) => {
            let report = quasimode_campaign(a.n, a.trials, a.seed)?;
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "forms",
                    operation: "quasimode_campaign",
                    inputs: json!({ "n": a.n, "trials": a.trials, "seed": a.seed }),
                }],
            );
            a.output
                .write(&env, &campaign_table(&report), Some(to_json(&report)))
        }
        FormsCommand::Track(a) => {
            let text =
                std::fs::read_to_string(&a.family).map_err(|e| CliError::io(&a.family, e))?;
            let family = TabulatedFamily::parse(&text)?;
            let (lo, hi) = family.t_range();
            if a.t_grid.iter().any(|t| *t < lo || *t > hi) {
                return Err(CliError::Validation(format!(
                    "t-grid must lie inside the tabulated range [{lo}, {hi}]"
                )));
            }
            let branches = track_branches(&family, &a.t_grid, &TrackOptions::default())?;
            let mut table = Table::new(&["branch", "t", "lambda", "overlap", "uncertain"]);
            for b in &branches {
                for (i, (t, l)) in b.t_grid.iter().zip(&b.values).enumerate() {
                    let (overlap, uncertain) = if i == 0 {
                        (1.0, false)
                    } else {
                        (b.overlaps[i - 1], b.uncertain.contains(&(i - 1)))
                    };
                    table.push(vec![
                        b.index.into(),
                        (*t).into(),
                        (*l).into(),
                        overlap.into(),
                        (uncertain as usize).into(),
                    ]);
                }
            }
            let crossings: Vec<_> = branches
                .iter()
                .map(|b| json!({ "branch": b.index, "crossing_intervals": b.crossing_intervals() }))
                .collect();
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "forms",
                    operation: "track_branches",
                    inputs: json!({ "family": a.family.display().to_string(), "t_grid": a.t_grid }),
                }],
            );
            a.output.write(&env, &table, Some(to_json(crossings)))
        }
    }
}
