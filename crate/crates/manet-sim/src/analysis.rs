//! Walk-length mathematics and the exact hitting-time oracle.
//!
//! The expected-edges series is reported verbatim as a diagnostic,
//! terms exactly as defined: term k is `(1/E(n))^(k-1) * F(k*r) * k`.
//! It is not a normalized expectation and is never used inside the
//! protocol; the absorbing-chain oracle below is the ground truth for
//! walk length.

use thiserror::Error;

use crate::engine::SimTime;
use crate::packet::NodeId;
use crate::world::{Position, World};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("deployment needs at least 2 nodes")]
    TooFewNodes,
    #[error("expected neighbor count must be positive")]
    NonPositiveExpectedNeighbors,
    #[error("destination unreachable from source")]
    Unreachable,
    #[error("singular hitting-time system")]
    Singular,
}

/// A frozen snapshot of node positions under a unit-disk radio.
#[derive(Clone, Debug)]
pub struct StaticDeployment {
    pub positions: Vec<Position>,
    pub range_m: f64,
}

impl StaticDeployment {
    pub fn new(positions: Vec<Position>, range_m: f64) -> Self {
        assert!(range_m > 0.0, "range must be positive");
        StaticDeployment { positions, range_m }
    }

    /// Symmetric distance matrix with zero diagonal.
    #[allow(clippy::needless_range_loop)]
    pub fn distances(&self) -> Vec<Vec<f64>> {
        let n = self.positions.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dist = self.positions[i].distance(self.positions[j]);
                d[i][j] = dist;
                d[j][i] = dist;
            }
        }
        d
    }

    /// Boolean adjacency: `X[i][j]` iff `distance(i, j) <= range`,
    /// false on the diagonal.
    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let n = self.positions.len();
        let d = self.distances();
        let mut x = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                x[i][j] = i != j && d[i][j] <= self.range_m;
            }
        }
        x
    }
}

/// Neighbor count of `focal` in a static deployment.
pub fn expected_neighbors(dep: &StaticDeployment, focal: NodeId) -> Result<f64, AnalysisError> {
    if dep.positions.len() < 2 {
        return Err(AnalysisError::TooFewNodes);
    }
    let adj = dep.adjacency();
    Ok(adj[focal].iter().filter(|&&v| v).count() as f64)
}

/// Mobile-case expected neighbor count: the sum over other nodes of the
/// probability each is within range.
pub fn expected_neighbors_from_probs(in_range_probs: &[f64]) -> Result<f64, AnalysisError> {
    if in_range_probs.is_empty() {
        return Err(AnalysisError::TooFewNodes);
    }
    Ok(in_range_probs.iter().sum())
}

/// Partial sums `S_1..S_K` of the expected-edges-traversed series.
///
/// `cdf_values[k-1]` is `F(X <= k*r)`. Partial sums are returned as-is,
/// monotone nondecreasing, with no convergence claim.
pub fn expected_walk_length_series(
    expected_neighbors: f64,
    cdf_values: &[f64],
) -> Result<Vec<f64>, AnalysisError> {
    if expected_neighbors.is_nan() || expected_neighbors <= 0.0 {
        return Err(AnalysisError::NonPositiveExpectedNeighbors);
    }
    let ratio = 1.0 / expected_neighbors;
    let mut sums = Vec::with_capacity(cdf_values.len());
    let mut acc = 0.0;
    let mut weight = 1.0; // (1/E(n))^(k-1)
    for (i, &f) in cdf_values.iter().enumerate() {
        let k = (i + 1) as f64;
        acc += weight * f * k;
        sums.push(acc);
        weight *= ratio;
    }
    Ok(sums)
}

/// Exact expected absorption step count of the simple random walk from
/// `src` to `dst`: solves `h_v = 1 + mean of h over neighbors of v`
/// with `h_dst = 0` by dense Gaussian elimination with partial
/// pivoting.
pub fn hitting_time_oracle(
    adjacency: &[Vec<bool>],
    src: NodeId,
    dst: NodeId,
) -> Result<f64, AnalysisError> {
    let n = adjacency.len();
    assert!(src < n && dst < n, "node id out of range");
    if src == dst {
        return Ok(0.0);
    }

    // Restrict to the connected component containing src.
    let mut component = vec![false; n];
    let mut stack = vec![src];
    component[src] = true;
    while let Some(v) = stack.pop() {
        for u in 0..n {
            if adjacency[v][u] && !component[u] {
                component[u] = true;
                stack.push(u);
            }
        }
    }
    if !component[dst] {
        return Err(AnalysisError::Unreachable);
    }

    let unknowns: Vec<NodeId> = (0..n).filter(|&v| component[v] && v != dst).collect();
    let index: Vec<Option<usize>> = {
        let mut idx = vec![None; n];
        for (i, &v) in unknowns.iter().enumerate() {
            idx[v] = Some(i);
        }
        idx
    };
    let m = unknowns.len();
    let mut a = vec![vec![0.0f64; m]; m];
    let mut b = vec![0.0f64; m];
    for (row, &v) in unknowns.iter().enumerate() {
        let deg = (0..n).filter(|&u| adjacency[v][u]).count() as f64;
        a[row][row] = deg;
        b[row] = deg;
        for u in (0..n).filter(|&u| adjacency[v][u]) {
            if let Some(col) = index[u] {
                a[row][col] -= 1.0;
            }
        }
    }
    let h = solve_dense(&mut a, &mut b).ok_or(AnalysisError::Singular)?;
    Ok(h[index[src].unwrap()])
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        let (b_upper, b_lower) = b.split_at_mut(col + 1);
        for (row, rhs) in lower.iter_mut().zip(b_lower.iter_mut()) {
            let factor = row[col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (cell, &p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *cell -= factor * p;
            }
            *rhs -= factor * b_upper[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Empirical distance CDF on a grid: the fraction of drawn samples at
/// or below each `d`. All grid points are evaluated over the same
/// sample set, so monotonicity in `d` holds by construction. For
/// deterministic motion every sample is identical and the result is
/// the 0/1 indicator of the closed-form distance.
pub fn estimate_distance_cdf(
    mut sample_distance: impl FnMut() -> f64,
    d_grid: &[f64],
    samples: usize,
) -> Vec<f64> {
    assert!(samples >= 1, "need at least one sample");
    let drawn: Vec<f64> = (0..samples).map(|_| sample_distance()).collect();
    d_grid
        .iter()
        .map(|&d| drawn.iter().filter(|&&s| s <= d).count() as f64 / samples as f64)
        .collect()
}

/// Distance between two nodes at an instant under their motion plans.
pub fn distance_at(world: &World, i: NodeId, j: NodeId, t: SimTime) -> f64 {
    world.position_at(i, t).distance(world.position_at(j, t))
}
