use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Value};

use super::domain::compare_table;
use super::forms::campaign_table;
use super::halfline::{load_profile, superseparation_table, sweep_table};
use super::product::product_table;
use super::to_json;
use crate::config::{CampaignConfig, CampaignKind};
use crate::emit::{write_out, Envelope, Provenance, Table};
use crate::error::CliError;
use specdegen::forms::quasimode_campaign;
use specdegen::separation::simplicity_scan;

#[derive(Args, Debug)]
pub struct CampaignArgs {
    #[arg(long)]
    pub config: PathBuf,
}

/// Result of running a campaign in memory.
pub struct Produced {
    pub envelope: Envelope,
    pub table: Table,
    pub report: Option<Value>,
}

pub fn produce(c: &CampaignConfig) -> Result<Produced, CliError> {
    let profile = || load_profile(&c.profile);
    let (module, operation, table, report) = match c.kind {
        CampaignKind::Sweep => {
            let mus = c.mu_values()?;
            let table = sweep_table(&profile()?, &mus, &c.t_grid, c.bc, c.k)?;
            ("halfline", "sweep", table, None)
        }
        CampaignKind::Superseparation => {
            let mus = c.mu_values()?;
            let (table, reports) = superseparation_table(&profile()?, &mus, &c.t_grid, c.bc, c.k)?;
            let summary: Vec<Value> = reports
                .iter()
                .map(|(mu, k, r)| {
                    json!({ "mu": mu, "k": k, "exponent": r.exponent, "warnings": r.warnings })
                })
                .collect();
            (
                "halfline",
                "superseparation",
                table,
                Some(Value::Array(summary)),
            )
        }
        CampaignKind::Product => {
            let transverse = c.transverse.as_deref().unwrap_or_default();
            let lambda_max = c.lambda_max.unwrap_or_default();
            let (table, spectra) =
                product_table(&profile()?, transverse, &c.t_grid, lambda_max, c.bc)?;
            let scan = simplicity_scan(&spectra, 1e-8);
            ("separation", "product_spectrum", table, Some(to_json(scan)))
        }
        CampaignKind::Quasimode => {
            let seed = c.seed.expect("validated");
            let r = quasimode_campaign(c.n.unwrap_or(8), c.trials.unwrap_or(0), seed)?;
            (
                "forms",
                "quasimode_campaign",
                campaign_table(&r),
                Some(to_json(r)),
            )
        }
        CampaignKind::DomainCompare => {
            let (table, report) =
                compare_table(&c.t_grid, c.n.unwrap_or(10), c.across.unwrap_or(16))?;
            ("domains", "compare_spectra", table, Some(report))
        }
    };
    let envelope = Envelope::new(
        c,
        vec![Provenance {
            module,
            operation,
            inputs: json!({ "kind": c.kind, "t_grid": c.t_grid, "k": c.k }),
        }],
    );
    Ok(Produced {
        envelope,
        table,
        report,
    })
}

pub fn run(a: &CampaignArgs) -> Result<(), CliError> {
    let c = CampaignConfig::load(&a.config)?;
    let p = produce(&c)?;
    let csv = p.envelope.csv(&p.table);
    if let Some(path) = &c.output.csv {
        write_out(Some(&c.resolve(path)), &csv)?;
    }
    if let Some(path) = &c.output.json {
        write_out(
            Some(&c.resolve(path)),
            &p.envelope.json(Some(&p.table), p.report),
        )?;
    }
    if c.output.csv.is_none() && c.output.json.is_none() {
        write_out(None, &csv)?;
    }
    Ok(())
}
