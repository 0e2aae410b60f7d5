//! Symmetric linear operators `Σ` and the products the solvers need.

use std::sync::Arc;

use crate::{Error, Result};

/// Row-major `n × n` symmetric matrix.
#[derive(Debug, Clone)]
pub struct DenseSymmetric {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Data matrix `A` (`m × n`, row-major) standing for `AᵀA`.
///
/// The product `AᵀA` is never formed; squared column norms are cached
/// since they are the diagonal of `AᵀA`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    col_sq_norms: Vec<f64>,
}

impl GramMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The data matrix, row-major.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn col_sq_norms(&self) -> &[f64] {
        &self.col_sq_norms
    }
}

/// Simple undirected graph in compressed sparse row form with implicit unit
/// weights and no self-loops.
#[derive(Debug, Clone)]
pub struct SparseAdjacency {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl SparseAdjacency {
    /// Builds the adjacency of the undirected graph with the given edges.
    ///
    /// Edges are symmetrized and deduplicated. Self-loops are dropped and
    /// counted in the second return value.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<(Self, usize)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut self_loops = 0;
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidMatrix(format!(
                    "edge ({i}, {j}) out of range for {n} vertices"
                )));
            }
            if i == j {
                self_loops += 1;
                continue;
            }
            lists[i].push(j);
            lists[j].push(i);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for mut list in lists {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        Ok((
            SparseAdjacency {
                n,
                offsets,
                neighbors,
            },
            self_loops,
        ))
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }
}

/// `(I − xxᵀ) Σ (I − xxᵀ)` for a unit vector `x`.
#[derive(Debug, Clone)]
pub struct Deflation {
    base: SymmetricOperator,
    direction: Vec<f64>,
    base_times_direction: Vec<f64>,
    rayleigh: f64,
}

impl Deflation {
    pub fn base(&self) -> &SymmetricOperator {
        &self.base
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }
}

/// A symmetric operator `Σ`, cheap to clone and safe to share between
/// threads.
#[derive(Debug, Clone)]
pub enum SymmetricOperator {
    Dense(Arc<DenseSymmetric>),
    Gram(Arc<GramMatrix>),
    Adjacency(Arc<SparseAdjacency>),
    Shifted {
        base: Arc<SymmetricOperator>,
        shift: f64,
    },
    Deflated(Arc<Deflation>),
}

/// Dominant eigenpair returned by [`SymmetricOperator::power_method`].
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Relative asymmetry accepted by [`SymmetricOperator::dense`].
pub const SYMMETRY_TOL: f64 = 1e-8;

impl SymmetricOperator {
    /// Dense symmetric matrix from row-major data.
    ///
    /// Entries differing from their transpose by more than `1e-8` (relative)
    /// are rejected; smaller discrepancies are averaged away.
    pub fn dense(n: usize, mut data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        if data.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {n}x{n} matrix, found {}",
                n * n,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                bad / n,
                bad % n
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric entries at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let mean = 0.5 * (a + b);
                data[i * n + j] = mean;
                data[j * n + i] = mean;
            }
        }
        Ok(SymmetricOperator::Dense(Arc::new(DenseSymmetric { n, data })))
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        SymmetricOperator::Dense(Arc::new(DenseSymmetric { n, data }))
    }

    /// `AᵀA` for the row-major `rows × cols` data matrix `A`.
    pub fn gram(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("empty data matrix".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {rows}x{cols} data matrix, found {}",
                rows * cols,
                data.len()
            )));
        }
        let mut col_sq_norms = vec![0.0; cols];
        for row in data.chunks_exact(cols) {
            for (acc, &a) in col_sq_norms.iter_mut().zip(row) {
                *acc += a * a;
            }
        }
        Ok(SymmetricOperator::Gram(Arc::new(GramMatrix {
            rows,
            cols,
            data,
            col_sq_norms,
        })))
    }

    pub fn adjacency(adj: SparseAdjacency) -> Self {
        SymmetricOperator::Adjacency(Arc::new(adj))
    }

    /// `Σ + cI`.
    pub fn shifted(&self, shift: f64) -> Self {
        SymmetricOperator::Shifted {
            base: Arc::new(self.clone()),
            shift,
        }
    }

    /// `(I − xxᵀ) Σ (I − xxᵀ)`; `x` must be a unit vector.
    pub fn deflated(&self, direction: &[f64]) -> Result<Self> {
        let base_times_direction = self.matvec(direction)?;
        let rayleigh = dot(direction, &base_times_direction);
        Ok(SymmetricOperator::Deflated(Arc::new(Deflation {
            base: self.clone(),
            direction: direction.to_vec(),
            base_times_direction,
            rayleigh,
        })))
    }

    pub fn dim(&self) -> usize {
        match self {
            SymmetricOperator::Dense(d) => d.n,
            SymmetricOperator::Gram(g) => g.cols,
            SymmetricOperator::Adjacency(a) => a.n,
            SymmetricOperator::Shifted { base, .. } => base.dim(),
            SymmetricOperator::Deflated(d) => d.base.dim(),
        }
    }

    /// Returns `Σv`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    /// Writes `Σv` into `out`.
    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        if out.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: out.len(),
            });
        }
        self.apply(v, out);
        Ok(())
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        match self {
            SymmetricOperator::Dense(d) => {
                for (o, row) in out.iter_mut().zip(d.data.chunks_exact(d.n)) {
                    *o = dot(row, v);
                }
            }
            SymmetricOperator::Gram(g) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for row in g.data.chunks_exact(g.cols) {
                    let av = dot(row, v);
                    if av != 0.0 {
                        axpy(av, row, out);
                    }
                }
            }
            SymmetricOperator::Adjacency(a) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = a.neighbors(i).iter().map(|&j| v[j]).sum();
                }
            }
            SymmetricOperator::Shifted { base, shift } => {
                base.apply(v, out);
                axpy(*shift, v, out);
            }
            SymmetricOperator::Deflated(d) => {
                let x = &d.direction;
                let mut w = v.to_vec();
                axpy(-dot(x, v), x, &mut w);
                d.base.apply(&w, out);
                let c = dot(x, out);
                axpy(-c, x, out);
            }
        }
    }

    /// Diagonal entries `Σ_ii`.
    pub fn diagonal_entries(&self) -> Vec<f64> {
        match self {
            SymmetricOperator::Dense(d) => (0..d.n).map(|i| d.get(i, i)).collect(),
            SymmetricOperator::Gram(g) => g.col_sq_norms.clone(),
            SymmetricOperator::Adjacency(a) => vec![0.0; a.n],
            SymmetricOperator::Shifted { base, shift } => {
                base.diagonal_entries().into_iter().map(|d| d + shift).collect()
            }
            SymmetricOperator::Deflated(d) => {
                let x = &d.direction;
                let sx = &d.base_times_direction;
                d.base
                    .diagonal_entries()
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| s - 2.0 * x[i] * sx[i] + x[i] * x[i] * d.rayleigh)
                    .collect()
            }
        }
    }

    /// Smallest index maximizing `Σ_ii`.
    pub fn largest_diag_index(&self) -> usize {
        let diag = self.diagonal_entries();
        let mut best = 0;
        for (i, &d) in diag.iter().enumerate() {
            if d > diag[best] {
                best = i;
            }
        }
        best
    }

    /// Power iteration from `e_i`, `i` the largest diagonal index.
    ///
    /// Converged when `‖Σy − λy‖ ≤ tol·|λ|` with `λ = yᵀΣy`.
    pub fn power_method(&self, tol: f64, max_iter: usize) -> Result<Eigenpair> {
        let mut start = vec![0.0; self.dim()];
        start[self.largest_diag_index()] = 1.0;
        self.power_method_from(start, tol, max_iter)
    }

    /// Power iteration from an explicit nonzero starting vector.
    pub fn power_method_from(
        &self,
        start: Vec<f64>,
        tol: f64,
        max_iter: usize,
    ) -> Result<Eigenpair> {
        if !(tol > 0.0) {
            return Err(Error::InvalidConfig(format!("power method tol {tol} must be positive")));
        }
        let n = self.dim();
        if start.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: start.len(),
            });
        }
        let mut y = start;
        let norm = norm2(&y);
        if norm == 0.0 {
            return Err(Error::InvalidConfig("power method start vector is zero".into()));
        }
        scale(1.0 / norm, &mut y);

        let mut sy = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for iterations in 0..=max_iter {
            self.apply(&y, &mut sy);
            let value = dot(&y, &sy);
            residual = sy
                .iter()
                .zip(&y)
                .map(|(s, v)| (s - value * v).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= tol * value.abs() {
                return Ok(Eigenpair {
                    value,
                    vector: y,
                    iterations,
                    residual,
                });
            }
            let norm = norm2(&sy);
            if norm == 0.0 {
                break;
            }
            for (yi, si) in y.iter_mut().zip(&sy) {
                *yi = si / norm;
            }
        }
        Err(Error::PowerMethodNotConverged {
            iterations: max_iter,
            residual,
        })
    }

    /// Upper bound on the spectral radius from Gershgorin discs.
    pub fn gershgorin_bound(&self) -> f64 {
        match self {
            SymmetricOperator::Dense(d) => (0..d.n)
                .map(|i| d.row(i).iter().map(|a| a.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            SymmetricOperator::Adjacency(a) => a.max_degree() as f64,
            SymmetricOperator::Shifted { base, shift } => base.gershgorin_bound() + shift.abs(),
            // ‖AᵀA‖ ≤ ‖A‖₁‖A‖∞
            SymmetricOperator::Gram(g) => {
                let max_row = g
                    .data
                    .chunks_exact(g.cols)
                    .map(|r| r.iter().map(|a| a.abs()).sum::<f64>())
                    .fold(0.0, f64::max);
                let mut col_sums = vec![0.0; g.cols];
                for row in g.data.chunks_exact(g.cols) {
                    for (c, a) in col_sums.iter_mut().zip(row) {
                        *c += a.abs();
                    }
                }
                max_row * col_sums.into_iter().fold(0.0, f64::max)
            }
            // projection onto a hyperplane does not increase the norm
            SymmetricOperator::Deflated(d) => d.base.gershgorin_bound(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn dense_identity_matvec() {
        let op = SymmetricOperator::identity(3);
        assert_eq!(op.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn gram_matvec_small() {
        // AᵀA = diag(1, 4)
        let op = SymmetricOperator::gram(2, 2, vec![1.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(op.matvec(&[1.0, 1.0]).unwrap(), vec![1.0, 4.0]);
    }

    #[test]
    fn shifted_zero_matrix() {
        let op = SymmetricOperator::dense(2, vec![0.0; 4]).unwrap().shifted(2.0);
        assert_eq!(op.matvec(&[1.0, -1.0]).unwrap(), vec![2.0, -2.0]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let op = SymmetricOperator::identity(3);
        assert!(matches!(
            op.matvec(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn largest_diag_cases() {
        assert_eq!(SymmetricOperator::diagonal(&[1.0, 5.0, 3.0]).largest_diag_index(), 1);
        assert_eq!(SymmetricOperator::diagonal(&[2.0, 2.0]).largest_diag_index(), 0);
        // column norms 9 and 1
        let g = SymmetricOperator::gram(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(g.largest_diag_index(), 0);
        assert_eq!(g.diagonal_entries(), vec![9.0, 1.0]);
    }

    #[test]
    fn power_method_diagonal() {
        let e = SymmetricOperator::diagonal(&[3.0, 1.0])
            .power_method(1e-10, 100)
            .unwrap();
        assert_eq!(e.value, 3.0);
        assert!((e.vector[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_method_degenerate_top() {
        let op = SymmetricOperator::diagonal(&[2.0, 2.0]);
        let e = op.power_method(1e-12, 100).unwrap();
        assert_eq!(e.value, 2.0);
        let sy = op.matvec(&e.vector).unwrap();
        let r: f64 = sy.iter().zip(&e.vector).map(|(s, y)| (s - 2.0 * y).powi(2)).sum();
        assert!(r.sqrt() <= 1e-12 * 2.0);
    }

    #[test]
    fn power_method_complete_graph() {
        let edges = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j)));
        let (adj, _) = SparseAdjacency::from_edges(5, edges).unwrap();
        let e = SymmetricOperator::adjacency(adj)
            .power_method(1e-12, 1000)
            .unwrap();
        assert!((e.value - 4.0).abs() < 1e-10);
    }

    #[test]
    fn power_method_reports_failure() {
        // ±1 eigenvalues of equal magnitude make the iteration oscillate
        let op = SymmetricOperator::dense(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        match op.power_method(1e-12, 50) {
            Err(Error::PowerMethodNotConverged { iterations, residual }) => {
                assert_eq!(iterations, 50);
                assert!(residual > 0.5);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn adjacency_construction() {
        let (adj, loops) =
            SparseAdjacency::from_edges(3, [(0, 1), (1, 0), (1, 2), (2, 2)]).unwrap();
        assert_eq!(loops, 1);
        assert_eq!(adj.num_edges(), 2);
        assert_eq!(adj.degree(1), 2);
        assert!(adj.has_edge(2, 1));
        assert!(!adj.has_edge(0, 2));
        let op = SymmetricOperator::adjacency(adj);
        assert_eq!(op.matvec(&[1.0; 3]).unwrap(), vec![1.0, 2.0, 1.0]);
        assert!(SparseAdjacency::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn dense_rejects_asymmetry() {
        assert!(SymmetricOperator::dense(2, vec![1.0, 2.0, 3.0, 1.0]).is_err());
        assert!(SymmetricOperator::dense(2, vec![1.0, 2.0, 2.0]).is_err());
        assert!(SymmetricOperator::dense(1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn deflated_diag_matches_probes() {
        let op = SymmetricOperator::dense(3, vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0])
            .unwrap();
        let s = 1.0 / 3f64.sqrt();
        let d = op.deflated(&[s, s, s]).unwrap();
        let diag = d.diagonal_entries();
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            let col = d.matvec(&e).unwrap();
            assert!((col[i] - diag[i]).abs() < 1e-12);
        }
        assert!(close(&d.matvec(&[s, s, s]).unwrap(), &[0.0; 3], 1e-12));
    }

    #[test]
    fn gershgorin_bounds_spectrum() {
        let op = SymmetricOperator::dense(2, vec![1.0, -2.0, -2.0, 1.0]).unwrap();
        assert_eq!(op.gershgorin_bound(), 3.0);
        let g = SymmetricOperator::gram(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        // AᵀA = [[2,2],[2,2]], λmax = 4
        assert!(g.gershgorin_bound() >= 4.0);
    }
}
