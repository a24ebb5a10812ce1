use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use specdegen::airy::{airy_eval, airy_zeros};
use specdegen::Boundary;

use super::OutputArgs;
use crate::emit::{Emit, Envelope, Provenance, Table};
use crate::error::CliError;

#[derive(Subcommand, Debug)]
pub enum AiryCommand {
    /// A₊, A₋ and their derivatives at one point.
    Eval(EvalArgs),
    /// Zeros of A₋ (dirichlet) or A₋′ (neumann).
    Zeros(ZerosArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub u: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Dirichlet,
    Neumann,
}

#[derive(Args, Debug, Serialize)]
pub struct ZerosArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Kind::Dirichlet)]
    pub kind: Kind,
    /// Same as --emit.
    #[arg(long, value_enum)]
    pub format: Option<Emit>,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn run(cmd: &AiryCommand) -> Result<(), CliError> {
    match cmd {
        AiryCommand::Eval(a) => {
            let p = airy_eval(a.u)?;
            let mut t = Table::new(&["u", "a_plus", "a_minus", "d_plus", "d_minus", "wronskian"]);
            t.push(vec![
                p.u.into(),
                p.a_plus.into(),
                p.a_minus.into(),
                p.d_plus.into(),
                p.d_minus.into(),
                p.wronskian().into(),
            ]);
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "airy",
                    operation: "airy_eval",
                    inputs: json!({ "u": a.u }),
                }],
            );
            a.output.write(&env, &t, None)
        }
        AiryCommand::Zeros(a) => {
            let bc = match a.kind {
                Kind::Dirichlet => Boundary::Dirichlet,
                Kind::Neumann => Boundary::Neumann,
            };
            let zeros = airy_zeros(a.n, bc)?;
            let mut t = Table::new(&["index", "zero"]);
            for (i, z) in zeros.iter().enumerate() {
                t.push(vec![(i + 1).into(), (*z).into()]);
            }
            let env = Envelope::new(
                a,
                vec![Provenance {
                    module: "airy",
                    operation: "airy_zeros",
                    inputs: json!({ "n": a.n, "kind": a.kind }),
                }],
            );
            let mut output = a.output.clone();
            if let Some(f) = a.format {
                output.emit = f;
            }
            output.write(&env, &t, None)
        }
    }
}
