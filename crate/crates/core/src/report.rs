//! Run reports as JSON and per-iteration traces as flat CSV.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::solvers::{Method, SolveReport, Termination, TraceEntry};
use crate::Result;

/// JSON schema for a single solver run.
///
/// `explained_variance` is set for covariance problems and `density` for
/// subgraph problems; the other is `null`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub kappa: usize,
    pub iterations: usize,
    pub explained_variance: Option<f64>,
    pub density: Option<f64>,
    pub dataset: String,
    /// Final `xᵀΣx`.
    pub variance: f64,
    pub termination: Termination,
    pub evaluations: usize,
    pub support: Vec<usize>,
    pub x: Vec<f64>,
    pub trace: Vec<TraceEntry>,
}

impl RunReport {
    pub fn new(dataset: impl Into<String>, run: &SolveReport) -> Self {
        RunReport {
            method: run.method,
            kappa: run.kappa,
            iterations: run.iterations,
            explained_variance: None,
            density: None,
            dataset: dataset.into(),
            variance: -run.final_objective(),
            termination: run.termination,
            evaluations: run.evaluations,
            support: run.x_final.support(),
            x: run.x_final.as_slice().to_vec(),
            trace: run.trace.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        writeln!(file)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

/// Header of the trace CSV.
pub const TRACE_HEADER: [&str; 4] = ["k", "f", "gap", "alpha"];

/// Writes `k,f,gap,alpha` rows, one per trace entry; missing values are
/// empty fields.
pub fn write_trace_csv<W: Write>(out: W, trace: &[TraceEntry]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(TRACE_HEADER)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for t in trace {
        writer.write_record([t.k.to_string(), t.f.to_string(), opt(t.gap), opt(t.alpha)])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_trace_csv_file(path: impl AsRef<Path>, trace: &[TraceEntry]) -> Result<()> {
    write_trace_csv(std::fs::File::create(path)?, trace)
}
