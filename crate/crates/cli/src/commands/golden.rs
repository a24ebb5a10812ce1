//! Field-by-field comparison of a fresh campaign run against a stored CSV.

use std::path::PathBuf;

use clap::Args;

use super::campaign::produce;
use crate::config::{CampaignConfig, Tolerances};
use crate::emit::{fmt_num, Cell, Table};
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct GoldenArgs {
    /// Campaign config with a `[golden]` table.
    #[arg(long)]
    pub config: PathBuf,
    /// Golden CSV to use instead of the one named in the config.
    #[arg(long)]
    pub golden: Option<PathBuf>,
    /// Per-field tolerance override, `field=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected field=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{s}: {e}"))?;
    if !(v >= 0.0) {
        return Err(format!("{s}: tolerance must be non-negative"));
    }
    Ok((k.trim().to_string(), v))
}

/// Header and rows of a CSV, skipping `#` lines.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), String> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .ok_or("no header line")?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(|s| s.trim().to_string()).collect())
        .collect();
    if let Some((i, r)) = rows
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != header.len())
    {
        return Err(format!(
            "row {} has {} fields, header has {}",
            i + 1,
            r.len(),
            header.len()
        ));
    }
    Ok((header, rows))
}

const KEY_FIELDS: [&str; 7] = ["t", "mu", "k", "ell", "index", "level", "inequality"];

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(v) => fmt_num(*v),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

/// |a − b| ≤ tol·max(|a|, |b|); equal values always match.
fn within(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Every mismatch between `golden` and `actual`, one line each.
pub fn compare(
    header: &[String],
    golden: &[Vec<String>],
    actual: &Table,
    tol: &Tolerances,
) -> Vec<String> {
    let mut problems = Vec::new();
    let mut columns = Vec::new();
    for name in header {
        match actual.column(name) {
            Some(i) => columns.push(i),
            None => problems.push(format!("field `{name}` is not produced by this campaign")),
        }
    }
    if !problems.is_empty() {
        return problems;
    }
    if golden.len() != actual.rows.len() {
        problems.push(format!(
            "row count: golden has {}, campaign produced {}",
            golden.len(),
            actual.rows.len()
        ));
    }
    for (r, (g, a)) in golden.iter().zip(&actual.rows).enumerate() {
        let key: Vec<String> = header
            .iter()
            .zip(g)
            .filter(|(h, _)| KEY_FIELDS.contains(&h.as_str()))
            .map(|(h, v)| format!("{h}={v}"))
            .collect();
        for ((name, gv), &ci) in header.iter().zip(g).zip(&columns) {
            let av = &a[ci];
            let ok = match (gv.parse::<f64>(), av) {
                (Ok(x), Cell::Num(y)) => within(*y, x, tol.for_field(name)),
                (Ok(x), Cell::Int(y)) => x == *y as f64,
                _ => *gv == cell_text(av),
            };
            if !ok {
                problems.push(format!(
                    "row {} [{}]: field `{name}` expected {gv}, got {} (tolerance {:e})",
                    r + 1,
                    key.join(", "),
                    cell_text(av),
                    tol.for_field(name)
                ));
            }
        }
    }
    problems
}

pub fn run(a: &GoldenArgs) -> Result<(), CliError> {
    let mut c = CampaignConfig::load(&a.config)?;
    let path = match (&a.golden, &c.golden) {
        (Some(p), _) => p.clone(),
        (None, Some(g)) => c.resolve(&g.file),
        (None, None) => {
            return Err(CliError::Validation(format!(
                "{}: no [golden] table and no --golden given",
                a.config.display()
            )))
        }
    };
    if !path.exists() {
        let how = c
            .golden
            .as_ref()
            .and_then(|g| g.generator.clone())
            .map(|g| format!("regenerate it with `{g}`"))
            .unwrap_or_else(|| {
                format!(
                    "generate it with `specdegen campaign --config {}` after checking the output against an independent oracle, then copy the CSV to that path",
                    a.config.display()
                )
            });
        return Err(CliError::GoldenMismatch(format!(
            "golden file {} is missing; {how}",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let (header, rows) =
        read_csv(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    for (k, v) in &a.tol {
        c.tolerances.fields.insert(k.clone(), *v);
    }
    let produced = produce(&c)?;
    let problems = compare(&header, &rows, &produced.table, &c.tolerances);
    if problems.is_empty() {
        println!(
            "PASS golden-check {}: {} rows, {} fields",
            path.display(),
            rows.len(),
            header.len()
        );
        Ok(())
    } else {
        for p in &problems {
            eprintln!("{p}");
        }
        Err(CliError::GoldenMismatch(format!(
            "FAIL golden-check {}: {} mismatches",
            path.display(),
            problems.len()
        )))
    }
}
