pub mod airy;
pub mod campaign;
pub mod domain;
pub mod forms;
pub mod golden;
pub mod halfline;
pub mod product;

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use crate::emit::{write_out, Emit, Envelope, Table};
use crate::error::CliError;

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Emit::Csv)]
    pub emit: Emit,
    /// Write here instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl OutputArgs {
    pub fn write(
        &self,
        env: &Envelope,
        table: &Table,
        report: Option<serde_json::Value>,
    ) -> Result<(), CliError> {
        write_out(self.out.as_deref(), &env.render(self.emit, table, report))
    }
}

fn to_json(v: impl Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize")
}
