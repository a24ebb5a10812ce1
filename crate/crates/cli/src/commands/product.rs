use clap::{Args, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use specdegen::profile::WeightProfile;
use specdegen::separation::{
    cylinder_spectrum, product_spectrum, simplicity_scan, threshold_table, LabeledSpectrum,
    TransverseSpectrum,
};
use specdegen::Boundary;

use super::halfline::load_profile;
use super::{to_json, OutputArgs};
use crate::config::check_t_grid;
use crate::emit::{Envelope, Provenance, Table};
use crate::error::CliError;

#[derive(Subcommand, Debug)]
pub enum ProductCommand {
    /// Separated spectrum below a cap, labelled by (ℓ, k).
    Spectrum(SpectrumArgs),
    /// Levels and multiplicities of the cylinder π²(k² + ℓ²/t²).
    Cylinder(CylinderArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, default_value = "exp2")]
    pub profile: String,
    /// `dirichlet-interval:L=<length>` or `list:<mu1>,<mu2>,...`.
    #[arg(long, default_value = "dirichlet-interval:L=1")]
    pub b: String,
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub lambda_max: f64,
    #[arg(long, default_value = "dirichlet")]
    pub bc: Boundary,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct CylinderArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Also report the simplicity threshold for the first n ≤ this.
    #[arg(long, default_value_t = 10)]
    pub thresholds: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Rows t,lambda,ell,k over the grid, plus the labelled spectra.
pub fn product_table(
    profile: &WeightProfile,
    transverse: &str,
    t_grid: &[f64],
    lambda_max: f64,
    bc: Boundary,
) -> Result<(Table, Vec<(f64, LabeledSpectrum)>), CliError> {
    check_t_grid(t_grid)?;
    let b = TransverseSpectrum::parse(transverse, profile.sigma0() * lambda_max)?;
    let spectra: Vec<(f64, LabeledSpectrum)> = t_grid
        .par_iter()
        .map(|&t| Ok((t, product_spectrum(t, profile, &b, lambda_max, bc)?)))
        .collect::<Result<_, CliError>>()?;
    let mut table = Table::new(&["t", "lambda", "ell", "k"]);
    for (t, s) in &spectra {
        for e in &s.entries {
            table.push(vec![(*t).into(), e.lambda.into(), e.ell.into(), e.k.into()]);
        }
    }
    Ok((table, spectra))
}

pub fn run(cmd: &ProductCommand) -> Result<(), CliError> {
    match cmd {
        ProductCommand::Spectrum(a) => {
            let profile = load_profile(&a.profile)?;
            if !(a.t > 0.0) {
                return Err(CliError::Validation(format!(
                    "t must be positive, got {}",
                    a.t
                )));
            }
            let b = TransverseSpectrum::parse(&a.b, profile.sigma0() * a.lambda_max)?;
            let s = product_spectrum(a.t, &profile, &b, a.lambda_max, a.bc)?;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            let mut table = Table::new(&["lambda", "ell", "k"]);
            for e in &s.entries {
                table.push(vec![e.lambda.into(), e.ell.into(), e.k.into()]);
            }
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "separation",
                    operation: "product_spectrum",
                    inputs: json!({
                        "t": a.t, "profile": profile.name(), "transverse": b.label(),
                        "lambda_max": a.lambda_max, "bc": a.bc,
                    }),
                }],
            );
            let scan = simplicity_scan(&[(a.t, s.clone())], 1e-8);
            a.output.write(
                &env,
                &table,
                Some(json!({ "warnings": s.warnings, "simplicity": to_json(&scan) })),
            )
        }
        ProductCommand::Cylinder(a) => {
            let c = cylinder_spectrum(a.t, a.n)?;
            let mut table = Table::new(&["level", "lambda", "multiplicity", "modes"]);
            for (i, l) in c.levels.iter().enumerate() {
                let modes: Vec<String> = l.modes.iter().map(|(k, e)| format!("{k}:{e}")).collect();
                table.push(vec![
                    (i + 1).into(),
                    l.value.into(),
                    l.multiplicity.into(),
                    modes.join(" ").into(),
                ]);
            }
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "separation",
                    operation: "cylinder_spectrum",
                    inputs: json!({ "t": a.t, "n": a.n }),
                }],
            );
            a.output.write(
                &env,
                &table,
                Some(json!({ "thresholds": to_json(threshold_table(a.thresholds)) })),
            )
        }
    }
}
