//! Experiment harness for the `sparsepca` solvers: single runs, cardinality
//! and sample-size sweeps over random data, the full-cardinality eigenvalue
//! study, and the densest-k-subgraph relaxation.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sparsepca::datasets::{self, Dataset};
use sparsepca::linops::SparseAdjacency;
use sparsepca::report::RunReport;
use sparsepca::{metrics, rng, solvers};
use sparsepca::{BbVariant, Method, Objective, SolverConfig, SparseSphere, SymmetricOperator, Termination};

/// Iteration budget used by sweeps when `--max-iter` is not given.
pub fn default_budget(method: Method) -> usize {
    match method {
        Method::Gpu | Method::Tpower => 6000,
        Method::Gpbb | Method::MonotoneNewton => 200,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSelector {
    PitProps,
    Random,
    Identity,
    MatrixMarket(PathBuf),
    Csv(PathBuf),
}

impl FromStr for DatasetSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(p) = s.strip_prefix("mtx:") {
            return Ok(DatasetSelector::MatrixMarket(p.into()));
        }
        if let Some(p) = s.strip_prefix("csv:") {
            return Ok(DatasetSelector::Csv(p.into()));
        }
        match s {
            "pitprops" => Ok(DatasetSelector::PitProps),
            "random" => Ok(DatasetSelector::Random),
            "identity" => Ok(DatasetSelector::Identity),
            _ => Err(format!(
                "unknown dataset {s:?}; expected pitprops, random, identity, mtx:<path> or csv:<path>"
            )),
        }
    }
}

/// Shape and seed for the generated datasets.
#[derive(Debug, Clone, Copy)]
pub struct DataParams {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub csv_header: bool,
}

impl Default for DataParams {
    fn default() -> Self {
        DataParams {
            m: 250,
            n: 500,
            seed: 1,
            csv_header: false,
        }
    }
}

impl DatasetSelector {
    pub fn load(&self, p: &DataParams) -> Result<Dataset> {
        let ds = match self {
            DatasetSelector::PitProps => datasets::pit_props(),
            DatasetSelector::Random => datasets::random_gaussian(p.m, p.n, p.seed)?,
            DatasetSelector::Identity => datasets::identity(p.n),
            DatasetSelector::MatrixMarket(path) => datasets::read_matrix_market(path)
                .with_context(|| format!("loading {}", path.display()))?,
            DatasetSelector::Csv(path) => datasets::read_dense_matrix(path, p.csv_header)
                .with_context(|| format!("loading {}", path.display()))?,
        };
        Ok(ds)
    }
}

/// Solver settings given on the command line; `None` keeps the default.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub bb_variant: Option<BbVariant>,
    pub shift: Option<f64>,
    pub step_size: Option<f64>,
}

impl Overrides {
    pub fn config(&self, method: Method, default_max_iter: usize) -> Result<SolverConfig> {
        let mut c = SolverConfig::new(method).with_max_iter(self.max_iter.unwrap_or(default_max_iter));
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.sigma {
            c.sigma = v;
        }
        if let Some(v) = self.alpha_min {
            c.alpha_min = v;
        }
        if let Some(v) = self.alpha_max {
            c.alpha_max = v;
        }
        if let Some(v) = self.bb_variant {
            c.bb_variant = v;
        }
        if let Some(v) = self.shift {
            c.shift = v;
        }
        if let Some(v) = self.step_size {
            c.step_size = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn adjacency_of(op: &SymmetricOperator) -> Option<&SparseAdjacency> {
    match op {
        SymmetricOperator::Adjacency(a) => Some(a),
        _ => None,
    }
}

/// One run on `ds`; graphs are routed through [`dks`].
pub fn run_solve(ds: &Dataset, method: Method, kappa: usize, overrides: &Overrides) -> Result<RunReport> {
    let n = ds.dim();
    ensure!(kappa >= 1 && kappa <= n, "kappa {kappa} must lie in [1, {n}]");
    if adjacency_of(&ds.operator).is_some() {
        let out = dks(ds, kappa, method, overrides)?;
        return Ok(out.run);
    }
    let config = overrides.config(method, SolverConfig::default().max_iter)?;
    let obj = Objective::new(ds.operator.clone());
    let sphere = SparseSphere::new(n, kappa)?;
    let run = solvers::solve(&obj, &sphere, &config)?;
    let ev = metrics::explained_variance(&ds.operator, &run.x_final)?;
    log::info!(
        "{} {method} kappa={kappa}: explained variance {:.6} after {} iterations ({:?})",
        ds.name,
        ev.ratio,
        run.iterations,
        run.termination
    );
    let mut report = RunReport::new(&ds.name, &run);
    report.explained_variance = Some(ev.ratio);
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub methods: Vec<Method>,
    pub kappas: Vec<usize>,
    pub ms: Vec<usize>,
    pub n: usize,
    pub seeds: Vec<u64>,
    pub overrides: Overrides,
}

/// Mean explained variance of one `(method, m, κ)` cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub method: Method,
    pub m: usize,
    pub n: usize,
    pub kappa: usize,
    pub mean_ev: f64,
    pub std_ev: f64,
    pub runs: usize,
    pub failed: usize,
}

/// Data seed of replicate `seed` at sample size `m`; shared by every method
/// and κ so that cells compare the same matrices.
pub fn replicate_seed(seed: u64, m: usize) -> u64 {
    rng::derive_seed(seed, m as u64)
}

/// Runs every method and κ on `|seeds|` random matrices per `m`.
///
/// Replicates run in parallel; the result does not depend on the thread
/// count. A failed run is counted in its cell and excluded from the mean.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    ensure!(!spec.seeds.is_empty(), "the seed list is empty");
    ensure!(!spec.methods.is_empty(), "no methods given");
    for &k in &spec.kappas {
        ensure!(k >= 1 && k <= spec.n, "kappa {k} must lie in [1, {}]", spec.n);
    }
    let configs: Vec<SolverConfig> = spec
        .methods
        .iter()
        .map(|&m| spec.overrides.config(m, default_budget(m)))
        .collect::<Result<_>>()?;

    let replicates: Vec<(usize, u64)> = spec
        .ms
        .iter()
        .flat_map(|&m| spec.seeds.iter().map(move |&s| (m, s)))
        .collect();
    // per replicate: explained variance for each (method, κ), or None on failure
    let results: Vec<Vec<Option<f64>>> = replicates
        .par_iter()
        .map(|&(m, seed)| {
            let cells = spec.methods.len() * spec.kappas.len();
            let ds = match datasets::random_gaussian(m, spec.n, replicate_seed(seed, m)) {
                Ok(ds) => ds,
                Err(e) => {
                    log::error!("m={m} seed={seed}: {e}");
                    return vec![None; cells];
                }
            };
            let lambda1 = match metrics::dense_component(&ds.operator) {
                Ok(e) => e.value,
                Err(e) => {
                    log::error!("m={m} seed={seed}: {e}");
                    return vec![None; cells];
                }
            };
            let obj = Objective::new(ds.operator.clone());
            let mut out = Vec::with_capacity(cells);
            for config in &configs {
                for &kappa in &spec.kappas {
                    let sphere = SparseSphere::new(spec.n, kappa).expect("kappa checked above");
                    let ev = solvers::solve(&obj, &sphere, config).and_then(|run| {
                        metrics::explained_variance_with(&ds.operator, &run.x_final, lambda1)
                    });
                    match ev {
                        Ok(r) => out.push(Some(r.ratio)),
                        Err(e) => {
                            log::error!("{} m={m} seed={seed} kappa={kappa}: {e}", config.method);
                            out.push(None);
                        }
                    }
                }
            }
            log::debug!("replicate m={m} seed={seed} done");
            out
        })
        .collect();

    let mut cells = Vec::new();
    for (mi, &m) in spec.ms.iter().enumerate() {
        let rows = &results[mi * spec.seeds.len()..(mi + 1) * spec.seeds.len()];
        for (ci, &method) in spec.methods.iter().enumerate() {
            for (ki, &kappa) in spec.kappas.iter().enumerate() {
                let idx = ci * spec.kappas.len() + ki;
                let values: Vec<f64> = rows.iter().filter_map(|r| r[idx]).collect();
                let runs = values.len();
                let mean = values.iter().sum::<f64>() / runs as f64;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / runs.saturating_sub(1).max(1) as f64;
                cells.push(SweepCell {
                    method,
                    m,
                    n: spec.n,
                    kappa,
                    mean_ev: mean,
                    std_ev: var.sqrt(),
                    runs,
                    failed: spec.seeds.len() - runs,
                });
            }
        }
    }
    Ok(cells)
}

pub fn write_sweep_csv<W: Write>(out: W, cells: &[SweepCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in cells {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct EigstudySpec {
    pub methods: Vec<Method>,
    pub m: usize,
    pub n: usize,
    pub seeds: Vec<u64>,
    pub overrides: Overrides,
    /// Relative error reported as reached in the summary.
    pub threshold: f64,
}

/// Default budget and stopping tolerance of the eigenvalue study: long runs
/// and no early stop on small objective changes.
pub const EIGSTUDY_MAX_ITER: usize = 6000;
pub const EIGSTUDY_TOL: f64 = 0.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigRow {
    pub seed: u64,
    pub method: Method,
    pub k: usize,
    /// Objective evaluations spent up to and including iterate `k`.
    pub evaluations: usize,
    pub f: f64,
    pub rel_err: f64,
    pub log10_rel_err: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigSummary {
    pub seed: u64,
    pub method: Method,
    pub lambda1: f64,
    /// First iteration with relative error at most the threshold.
    pub first_hit: Option<usize>,
    pub evaluations_at_hit: Option<usize>,
    pub iterations: usize,
    pub evaluations: usize,
    pub final_rel_err: f64,
    pub termination: Termination,
}

/// `κ = n` runs on random data, with the relative error of `−f_k` against
/// the dominant eigenvalue at every iterate.
pub fn eigstudy(spec: &EigstudySpec) -> Result<(Vec<EigRow>, Vec<EigSummary>)> {
    ensure!(!spec.seeds.is_empty(), "the seed list is empty");
    let mut overrides = spec.overrides.clone();
    overrides.tol = overrides.tol.or(Some(EIGSTUDY_TOL));
    let configs: Vec<SolverConfig> = spec
        .methods
        .iter()
        .map(|&m| overrides.config(m, EIGSTUDY_MAX_ITER))
        .collect::<Result<_>>()?;

    let per_seed: Vec<Result<(Vec<EigRow>, Vec<EigSummary>)>> = spec
        .seeds
        .par_iter()
        .map(|&seed| {
            let ds = datasets::random_gaussian(spec.m, spec.n, replicate_seed(seed, spec.m))?;
            let lambda1 = metrics::dense_component(&ds.operator)?.value;
            let obj = Objective::new(ds.operator);
            let sphere = SparseSphere::new(spec.n, spec.n)?;
            let mut rows = Vec::new();
            let mut summaries = Vec::new();
            for config in &configs {
                let run = solvers::solve(&obj, &sphere, config)?;
                let mut evaluations = 1;
                let mut hit = None;
                for t in &run.trace {
                    if t.k > 0 {
                        evaluations += 1 + t.backtracks;
                    }
                    let rel_err = metrics::relative_error(lambda1, -t.f)?;
                    if hit.is_none() && rel_err <= spec.threshold {
                        hit = Some((t.k, evaluations));
                    }
                    rows.push(EigRow {
                        seed,
                        method: config.method,
                        k: t.k,
                        evaluations,
                        f: t.f,
                        rel_err,
                        log10_rel_err: rel_err.log10(),
                    });
                }
                let last = rows.last().expect("trace has the starting point");
                summaries.push(EigSummary {
                    seed,
                    method: config.method,
                    lambda1,
                    first_hit: hit.map(|h| h.0),
                    evaluations_at_hit: hit.map(|h| h.1),
                    iterations: run.iterations,
                    evaluations: run.evaluations,
                    final_rel_err: last.rel_err,
                    termination: run.termination,
                });
                log::info!(
                    "seed={seed} {}: first hit {:?}, {} iterations",
                    config.method,
                    hit,
                    run.iterations
                );
            }
            Ok((rows, summaries))
        })
        .collect();

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for r in per_seed {
        let (a, b) = r?;
        rows.extend(a);
        summaries.extend(b);
    }
    Ok((rows, summaries))
}

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DksReport {
    pub graph: String,
    pub vertices: usize,
    pub edges: usize,
    pub k: usize,
    pub shift: f64,
    /// `xᵀAx` at the relaxed solution.
    pub relaxed_value: f64,
    pub lambda1: f64,
    /// `xᵀAx / λ₁`; absent for graphs without edges.
    pub ratio: Option<f64>,
    /// Carries `density = 2|E(S)|/k` for the support `S` of the solution.
    #[serde(flatten)]
    pub run: RunReport,
}

impl DksReport {
    pub fn density(&self) -> f64 {
        self.run.density.expect("set by dks")
    }

    pub fn support(&self) -> &[usize] {
        &self.run.support
    }
}

/// Densest-k-subgraph relaxation: `max xᵀAx` over `Ω` with `κ = k`.
///
/// Iterates on `A + cI` with `c = 1 + max degree` unless a shift is given,
/// starting from a vertex of maximum degree.
pub fn dks(ds: &Dataset, k: usize, method: Method, overrides: &Overrides) -> Result<DksReport> {
    let Some(adj) = adjacency_of(&ds.operator) else {
        bail!("{} is not a graph; use a Matrix Market dataset (mtx:<path>)", ds.name);
    };
    let n = adj.num_vertices();
    ensure!(k >= 1 && k <= n, "k {k} must lie in [1, {n}]");
    let shift = overrides.shift.unwrap_or(1.0 + ds.operator.gershgorin_bound());
    let mut overrides = overrides.clone();
    overrides.shift = Some(shift);
    let config = overrides.config(method, SolverConfig::default().max_iter)?;

    let sphere = SparseSphere::new(n, k)?;
    let start = (0..n).max_by_key(|&v| (adj.degree(v), std::cmp::Reverse(v))).unwrap_or(0);
    let obj = Objective::new(ds.operator.clone());
    let run = solvers::solve_from(&obj, &sphere, &config, sphere.basis(start)?)?;

    let support = run.x_final.support();
    let inside = support
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| support[i + 1..].iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| adj.has_edge(a, b))
        .count();
    let density = 2.0 * inside as f64 / k as f64;
    let relaxed_value = metrics::dks_density(&ds.operator, &run.x_final, k);

    let lambda1 = if adj.num_edges() == 0 {
        0.0
    } else {
        let shifted = ds.operator.shifted(shift);
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        shifted.power_method_from(ones, 1e-12, 1_000_000)?.value - shift
    };
    let ratio = (lambda1 > 0.0).then(|| relaxed_value / lambda1);
    log::info!(
        "{} k={k} {method}: density {density} (relaxed {relaxed_value:.6}), support {support:?}",
        ds.name
    );
    let mut report = RunReport::new(&ds.name, &run);
    report.density = Some(density);
    Ok(DksReport {
        graph: ds.name.clone(),
        vertices: n,
        edges: adj.num_edges(),
        k,
        shift,
        relaxed_value,
        lambda1,
        ratio,
        run: report,
    })
}

/// A seed list as given on the command line; see [`parse_seeds`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_seeds(s).map(SeedList)
    }
}

/// Parses `1,2,5`, `3..7` (end excluded) or `3..=7`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let bad = |e: std::num::ParseIntError| format!("bad seed list {s:?}: {e}");
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(bad)?;
        let (b, inclusive) = match b.strip_prefix('=') {
            Some(b) => (b, true),
            None => (b, false),
        };
        let b: u64 = b.trim().parse().map_err(bad)?;
        let seeds: Vec<u64> = if inclusive { (a..=b).collect() } else { (a..b).collect() };
        if seeds.is_empty() {
            return Err(format!("seed range {s:?} is empty"));
        }
        return Ok(seeds);
    }
    s.split(',').map(|t| t.trim().parse().map_err(bad)).collect()
}
