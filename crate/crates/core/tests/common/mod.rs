#![allow(dead_code)]

use sparsepca::linops::SparseAdjacency;
use sparsepca::{rng, SymmetricOperator};

pub fn normals(seed: u64, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    rng::fill_normal(seed, &mut v);
    v
}

/// Symmetric matrix with standard normal entries (not PSD).
pub fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
    let raw = normals(seed, n * n);
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = 0.5 * (raw[i * n + j] + raw[j * n + i]);
        }
    }
    data
}

pub fn random_gram(m: usize, n: usize, seed: u64) -> (SymmetricOperator, Vec<f64>) {
    let a = normals(seed, m * n);
    (SymmetricOperator::gram(m, n, a.clone()).unwrap(), a)
}

pub fn random_adjacency(n: usize, p: f64, seed: u64) -> SparseAdjacency {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng::uniform(seed, (i * n + j) as u64) < p {
                edges.push((i, j));
            }
        }
    }
    SparseAdjacency::from_edges(n, edges).unwrap().0
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Dense materialization through matvecs with basis vectors.
pub fn materialize(op: &SymmetricOperator) -> nalgebra::DMatrix<f64> {
    let n = op.dim();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = op.matvec(&e).unwrap();
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}

pub fn eigenvalues(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// One operator of every variant, dimension `n`.
pub fn all_variants(n: usize, seed: u64) -> Vec<(&'static str, SymmetricOperator)> {
    let dense = SymmetricOperator::dense(n, random_symmetric(n, seed)).unwrap();
    let (gram, _) = random_gram(n + 3, n, seed ^ 1);
    let adj = SymmetricOperator::adjacency(random_adjacency(n, 0.3, seed ^ 2));
    let shifted = dense.shifted(2.5);
    let dir = unit(&normals(seed ^ 3, n));
    let deflated = gram.deflated(&dir).unwrap();
    vec![
        ("dense", dense),
        ("gram", gram),
        ("adjacency", adj),
        ("shifted", shifted),
        ("deflated", deflated),
    ]
}
