//! `wayfinder eval` — Table-style metrics from a predictions CSV.

use std::path::PathBuf;

use wayfinder_core::clseval::{compute_metrics, matrix_from_pairs, read_predictions_csv, report};

use crate::util::{domain, read_input, write_output, CliError};

#[derive(clap::Args)]
pub struct Args {
    /// CSV with header `true,predicted` (an id column is allowed)
    #[arg(long)]
    predictions: PathBuf,
    /// Output JSON report (full precision)
    #[arg(long)]
    out: PathBuf,
    /// Restrict the class list; labels outside it become errors
    #[arg(long, value_delimiter = ',')]
    classes: Option<Vec<String>>,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let bytes = read_input(&args.predictions)?;
    let pairs = read_predictions_csv(bytes.as_slice()).map_err(|e| domain(e.to_string()))?;
    if pairs.is_empty() {
        return Err(domain("predictions CSV contains no rows"));
    }
    let matrix = matrix_from_pairs(&pairs, args.classes).map_err(|e| domain(e.to_string()))?;
    let metrics = compute_metrics(&matrix).map_err(|e| domain(e.to_string()))?;
    let rendered = report(&metrics);

    let json = serde_json::to_vec_pretty(&rendered.record)
        .map_err(|e| domain(format!("cannot serialize report: {e}")))?;
    write_output(&args.out, &json)?;
    print!("{}", rendered.text);
    Ok(())
}
