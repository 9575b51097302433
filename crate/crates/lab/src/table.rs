//! CSV output of Monte Carlo estimates.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use mmwc_core::walk::McEstimate;

/// One output row: parameter values followed by an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub params: Vec<String>,
    pub estimate: McEstimate,
}

impl EstimateRow {
    pub fn new(params: impl IntoIterator<Item = String>, estimate: McEstimate) -> Self {
        Self { params: params.into_iter().collect(), estimate }
    }
}

/// Open `path` for writing, or stdout when `path` is `None` or `-`.
pub fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => Box::new(io::BufWriter::new(File::create(p)?)),
        _ => Box::new(io::stdout().lock()),
    })
}

/// Columns: `param_names…, estimate, std_error, samples, acceptance_rate`.
pub fn write_estimates<W: Write>(out: W, param_names: &[&str], rows: &[EstimateRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = param_names.to_vec();
    header.extend(["estimate", "std_error", "samples", "acceptance_rate"]);
    w.write_record(&header)?;
    for row in rows {
        let e = &row.estimate;
        let mut rec = row.params.clone();
        rec.push(e.value.to_string());
        rec.push(e.std_error.to_string());
        rec.push(e.samples.to_string());
        rec.push(e.acceptance_rate.map(|a| a.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
