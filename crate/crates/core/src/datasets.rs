//! Built-in datasets and loaders.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::linops::SparseAdjacency;
use crate::{rng, Error, Result, SymmetricOperator};

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub operator: SymmetricOperator,
    pub provenance: String,
    /// Non-fatal issues found while loading, e.g. dropped self-loops.
    pub warnings: Vec<String>,
}

impl Dataset {
    fn new(name: impl Into<String>, operator: SymmetricOperator, provenance: impl Into<String>) -> Self {
        Dataset {
            name: name.into(),
            operator,
            provenance: provenance.into(),
            warnings: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }
}

/// Lower triangle of the pit props correlation matrix, row by row.
///
/// Variables: topdiam, length, moist, testsg, ovensg, ringtop, ringbut,
/// bowmax, bowdist, whorls, clear, knots, diaknot.
const PIT_PROPS_LOWER: [&[f64]; 13] = [
    &[1.000],
    &[0.954, 1.000],
    &[0.364, 0.297, 1.000],
    &[0.342, 0.284, 0.882, 1.000],
    &[-0.129, -0.118, -0.148, 0.220, 1.000],
    &[0.313, 0.291, 0.153, 0.381, 0.364, 1.000],
    &[0.496, 0.503, -0.029, 0.174, 0.296, 0.813, 1.000],
    &[0.424, 0.419, -0.054, -0.059, 0.004, 0.090, 0.372, 1.000],
    &[0.592, 0.648, 0.125, 0.137, -0.039, 0.211, 0.465, 0.482, 1.000],
    &[0.545, 0.569, -0.081, -0.014, 0.037, 0.274, 0.679, 0.557, 0.526, 1.000],
    &[0.084, 0.076, 0.162, 0.097, -0.091, -0.036, -0.113, 0.061, 0.085, -0.319, 1.000],
    &[-0.019, -0.036, 0.220, 0.169, -0.145, 0.024, -0.232, -0.357, -0.127, -0.368, 0.029, 1.000],
    &[0.134, 0.144, 0.126, 0.015, -0.208, -0.329, -0.424, -0.202, -0.076, -0.291, 0.007, 0.184, 1.000],
];

/// The 13-variable pit props correlation matrix (180 observations).
pub fn pit_props() -> Dataset {
    let n = PIT_PROPS_LOWER.len();
    let mut data = vec![0.0; n * n];
    for (i, row) in PIT_PROPS_LOWER.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    let op = SymmetricOperator::dense(n, data).expect("embedded matrix is symmetric");
    Dataset::new(
        "pitprops",
        op,
        "Jeffers (1967), pit props correlation matrix: 180 observations, 13 variables; \
         values as tabulated in the sparse PCA literature (3 decimals)",
    )
}

/// `I_n`; every unit vector is optimal.
pub fn identity(n: usize) -> Dataset {
    Dataset::new("identity", SymmetricOperator::identity(n), format!("identity, n={n}"))
}

/// Gram operator `AᵀA` of an `m × n` matrix of standard normals.
///
/// Entry `(i, j)` of `A` is normal number `i·n + j` of [`rng`] stream `seed`.
pub fn random_gaussian(m: usize, n: usize, seed: u64) -> Result<Dataset> {
    let mut data = vec![0.0; m * n];
    rng::fill_normal(seed, &mut data);
    let op = SymmetricOperator::gram(m, n, data)?;
    Ok(Dataset::new(
        "random",
        op,
        format!("A ~ N(0,1)^({m}x{n}), splitmix64/box-muller seed={seed}, Sigma = A^T A"),
    ))
}

/// Erdős–Rényi graph: edge `{i, j}` (`i < j`) is present when uniform number
/// `i·n + j` of stream `seed` is below `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Dataset {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
    let edges: Vec<_> = edges
        .filter(|&(i, j)| rng::uniform(seed, (i * n + j) as u64) < p)
        .collect();
    graph(format!("gnp-{n}-{p}-{seed}"), n, edges)
}

pub fn complete_graph(n: usize) -> Dataset {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    graph(format!("complete-{n}"), n, edges)
}

pub fn path_graph(n: usize) -> Dataset {
    graph(format!("path-{n}"), n, (1..n).map(|i| (i - 1, i)).collect())
}

pub fn cycle_graph(n: usize) -> Dataset {
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    if n > 2 {
        edges.push((n - 1, 0));
    }
    graph(format!("cycle-{n}"), n, edges)
}

fn graph(name: String, n: usize, edges: Vec<(usize, usize)>) -> Dataset {
    let (adj, _) = SparseAdjacency::from_edges(n, edges).expect("generated edges are in range");
    let provenance = format!("{name}: {} vertices, {} edges", n, adj.num_edges());
    Dataset::new(name, SymmetricOperator::adjacency(adj), provenance)
}

/// Reads a Matrix Market coordinate file as a simple undirected graph.
///
/// Pattern, real and integer fields are accepted with general or symmetric
/// storage. Nonzero entries become unit-weight edges, `(i, j)` and `(j, i)`
/// are merged, duplicates collapse and self-loops are dropped with a
/// warning.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, format!("not a Matrix Market header: {header:?}")));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format {:?}", tokens[2])));
    }
    let has_values = match tokens[3].as_str() {
        "pattern" => false,
        "real" | "integer" => true,
        other => return Err(parse_err(1, format!("unsupported field {other:?}"))),
    };
    match tokens[4].as_str() {
        "general" | "symmetric" => {}
        other => return Err(parse_err(1, format!("unsupported symmetry {other:?}"))),
    }

    let mut size: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut entries = 0;
    let mut zero_entries = 0;
    let mut last_line = 1;
    for (lineno, line) in lines {
        let line = line?;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let Some((n, nnz)) = size else {
            if fields.len() != 3 {
                return Err(parse_err(lineno, format!("expected 'rows cols entries', found {trimmed:?}")));
            }
            let nums: Vec<usize> = fields
                .iter()
                .map(|f| f.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(lineno, format!("bad size line: {e}")))?;
            if nums[0] != nums[1] {
                return Err(parse_err(lineno, format!("adjacency must be square, got {}x{}", nums[0], nums[1])));
            }
            size = Some((nums[0], nums[2]));
            continue;
        };
        let expected = if has_values { 3 } else { 2 };
        if fields.len() != expected {
            return Err(parse_err(lineno, format!("expected {expected} fields, found {}", fields.len())));
        }
        let index = |s: &str| -> Result<usize> {
            let i: usize = s
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad index {s:?}: {e}")))?;
            if i == 0 || i > n {
                return Err(parse_err(lineno, format!("index {i} outside 1..={n}")));
            }
            Ok(i - 1)
        };
        let i = index(fields[0])?;
        let j = index(fields[1])?;
        entries += 1;
        if entries > nnz {
            return Err(parse_err(lineno, format!("more than the declared {nnz} entries")));
        }
        if has_values {
            let v: f64 = fields[2]
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad value {:?}: {e}", fields[2])))?;
            if v == 0.0 {
                zero_entries += 1;
                continue;
            }
        }
        edges.push((i, j));
    }
    let (n, nnz) = size.ok_or_else(|| parse_err(last_line, "missing size line".into()))?;
    if entries != nnz {
        return Err(parse_err(last_line, format!("declared {nnz} entries, found {entries}")));
    }

    let (adj, self_loops) = SparseAdjacency::from_edges(n, edges)?;
    let mut warnings = Vec::new();
    if self_loops > 0 {
        warnings.push(format!("dropped {self_loops} self-loop entries"));
    }
    if zero_entries > 0 {
        warnings.push(format!("ignored {zero_entries} explicit zero entries"));
    }
    for w in &warnings {
        log::warn!("{}: {w}", path.display());
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into());
    let provenance = format!(
        "Matrix Market file {}: {n} vertices, {} edges",
        path.display(),
        adj.num_edges()
    );
    let mut ds = Dataset::new(name, SymmetricOperator::adjacency(adj), provenance);
    ds.warnings = warnings;
    Ok(ds)
}

/// Reads a square symmetric matrix from comma-separated text.
pub fn read_dense_matrix(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut data = Vec::new();
    let mut rows = 0;
    let mut width = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("ragged row: {} fields, expected {}", record.len(), width.unwrap()),
            });
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("bad number {field:?}: {e}"),
            })?;
            data.push(v);
        }
        rows += 1;
    }
    if width != Some(rows) {
        return Err(Error::InvalidMatrix(format!(
            "{}: expected a square matrix, found {rows} rows of {} columns",
            path.display(),
            width.unwrap_or(0)
        )));
    }
    let op = SymmetricOperator::dense(rows, data)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".into());
    Ok(Dataset::new(name, op, format!("CSV file {}, {rows}x{rows}", path.display())))
}

/// Writes a dense matrix as comma-separated text with shortest round-trip
/// formatting.
pub fn write_dense_matrix(path: impl AsRef<Path>, n: usize, data: &[f64]) -> Result<()> {
    if data.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: data.len(),
        });
    }
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in data.chunks_exact(n.max(1)) {
        writer.write_record(row.iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
