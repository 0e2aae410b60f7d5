//! The feasible set `Ω = {x : ‖x‖ = 1, ‖x‖₀ ≤ κ}`.
//!
//! Nearest and farthest points in `Ω` both come from the hard-thresholding
//! operator `T_κ`, which keeps the `κ` largest-magnitude entries. Ties in
//! magnitude keep the lowest indices so every operation here is a
//! deterministic function of its input.

use std::cmp::Ordering;

use crate::linops::norm2;
use crate::{Error, Result};

/// Enumeration oracles refuse dimensions above this.
pub const ORACLE_MAX_DIM: usize = 25;

/// Tolerance on `|‖x‖ − 1|` for a feasible point.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparseSphere {
    n: usize,
    kappa: usize,
}

impl SparseSphere {
    pub fn new(n: usize, kappa: usize) -> Result<Self> {
        if kappa < 1 || kappa > n {
            return Err(Error::InvalidCardinality { kappa, n });
        }
        Ok(SparseSphere { n, kappa })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn truncate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        truncate(x, self.kappa)
    }

    /// `T_κ(x)/‖T_κ(x)‖`, a nearest point of `Ω` to `x`.
    pub fn project(&self, x: &[f64]) -> Result<UnitSparseVector> {
        let t = self.truncate(x)?;
        normalize(t, 1.0).ok_or(Error::DegenerateProjection)
    }

    /// `−T_κ(x)/‖T_κ(x)‖`, a farthest point of `Ω` from `x`.
    pub fn antiproject(&self, x: &[f64]) -> Result<UnitSparseVector> {
        let t = self.truncate(x)?;
        normalize(t, -1.0).ok_or(Error::DegenerateAntiProjection)
    }

    /// Nearest point by enumerating every support of size `κ`.
    pub fn oracle_project(&self, x: &[f64]) -> Result<UnitSparseVector> {
        self.oracle(x, 1.0).map_err(|e| match e {
            Error::DegenerateAntiProjection => Error::DegenerateProjection,
            e => e,
        })
    }

    /// Farthest point by enumerating every support of size `κ`.
    pub fn oracle_antiproject(&self, x: &[f64]) -> Result<UnitSparseVector> {
        self.oracle(x, -1.0)
    }

    // On a fixed support S the extremal unit vectors are ±x_S/‖x_S‖ with
    // ‖x − y‖² = ‖x‖² + 1 ∓ 2‖x_S‖, so both problems reduce to maximizing
    // ‖x_S‖ over supports.
    fn oracle(&self, x: &[f64], sign: f64) -> Result<UnitSparseVector> {
        self.check_dim(x)?;
        if self.n > ORACLE_MAX_DIM {
            return Err(Error::OracleTooLarge {
                n: self.n,
                limit: ORACLE_MAX_DIM,
            });
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for support in Combinations::new(self.n, self.kappa) {
            let mut y = vec![0.0; self.n];
            for &i in &support {
                y[i] = x[i];
            }
            let Some(y) = normalize(y, sign) else { continue };
            let dist = distance(x, y.as_slice());
            let better = match &best {
                None => true,
                Some((d, _)) => {
                    if sign > 0.0 {
                        dist < *d
                    } else {
                        dist > *d
                    }
                }
            };
            if better {
                best = Some((dist, y.into_inner()));
            }
        }
        match best {
            Some((_, values)) => Ok(UnitSparseVector { values }),
            None => Err(Error::DegenerateAntiProjection),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Checks that `values` is a point of this set.
    pub fn point(&self, values: Vec<f64>) -> Result<UnitSparseVector> {
        self.check_dim(&values)?;
        let norm = norm2(&values);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Infeasible(format!("norm {norm} is not 1")));
        }
        let nnz = values.iter().filter(|v| **v != 0.0).count();
        if nnz > self.kappa {
            return Err(Error::Infeasible(format!(
                "{nnz} nonzeros exceed cardinality {}",
                self.kappa
            )));
        }
        Ok(UnitSparseVector { values })
    }

    /// The basis vector `e_i`.
    pub fn basis(&self, i: usize) -> Result<UnitSparseVector> {
        if i >= self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: i + 1,
            });
        }
        let mut values = vec![0.0; self.n];
        values[i] = 1.0;
        Ok(UnitSparseVector { values })
    }
}

/// A unit vector with at most `κ` nonzeros.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSparseVector {
    values: Vec<f64>,
}

impl UnitSparseVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Indices of nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        support(&self.values)
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

impl std::ops::Neg for UnitSparseVector {
    type Output = UnitSparseVector;

    fn neg(mut self) -> Self::Output {
        self.values.iter_mut().for_each(|v| *v = -*v);
        self
    }
}

impl AsRef<[f64]> for UnitSparseVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// `T_κ(x)`: zeroes the `n − κ` smallest-magnitude entries of `x`.
///
/// Kept entries are copied exactly. Among equal magnitudes the lower
/// indices are kept. Runs in expected `O(n)` time.
pub fn truncate(x: &[f64], kappa: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if kappa < 1 || kappa > n {
        return Err(Error::InvalidCardinality { kappa, n });
    }
    if kappa == n {
        return Ok(x.to_vec());
    }
    let mut order: Vec<usize> = (0..n).collect();
    // total order: larger magnitude first, then lower index
    let by_priority = |&a: &usize, &b: &usize| -> Ordering {
        x[b].abs()
            .total_cmp(&x[a].abs())
            .then_with(|| a.cmp(&b))
    };
    order.select_nth_unstable_by(kappa - 1, by_priority);
    let mut out = vec![0.0; n];
    for &i in &order[..kappa] {
        out[i] = x[i];
    }
    Ok(out)
}

/// Indices of nonzero entries, ascending.
pub fn support(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn normalize(mut t: Vec<f64>, sign: f64) -> Option<UnitSparseVector> {
    let mut norm = norm2(&t);
    if norm == 0.0 || !norm.is_finite() {
        // rescale before squaring when the plain norm under- or overflows
        let peak = t.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if peak == 0.0 || !peak.is_finite() {
            return None;
        }
        norm = peak * t.iter().map(|v| (v / peak).powi(2)).sum::<f64>().sqrt();
    }
    for v in t.iter_mut() {
        *v = sign * (*v / norm);
    }
    Some(UnitSparseVector { values: t })
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
