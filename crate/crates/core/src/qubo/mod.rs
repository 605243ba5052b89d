//! Maximum independent set as QUBO: workloads, cost machinery, solvers and
//! the BKS-gap benchmark.
//!
//! `Q` uses the symmetric convention: diagonal `-1`, and each undirected edge
//! puts `4` at both `(u, v)` and `(v, u)`, so selecting both endpoints of an
//! edge costs `+8`.

mod bench;
mod bks;
mod solvers;

pub use bench::*;
pub use bks::*;
pub use solvers::*;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub const EDGE_PENALTY: i64 = 4;
pub const NODE_REWARD: i64 = -1;

/// Node counts and edge densities of the reference grid.
pub const REFERENCE_SIZES: [usize; 5] = [10, 25, 50, 100, 250];
pub const REFERENCE_DENSITIES: [f64; 4] = [0.01, 0.05, 0.10, 0.25];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MisWorkload {
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    /// Sorted `(u, v)` pairs with `u < v`.
    pub edges: Vec<(usize, usize)>,
}

/// Seeded Erdos-Renyi graph: pairs `u < v` are visited in lexicographic
/// order and each is kept when one `uniform()` draw is below `density`.
pub fn generate_mis_workload(n: usize, density: f64, seed: u64) -> Result<MisWorkload> {
    if n == 0 {
        return Err(Error::InvalidParameter("node count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!(
            "density must lie in [0, 1], got {density}"
        )));
    }
    let mut rng = Rng::new(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.bernoulli(density) {
                edges.push((u, v));
            }
        }
    }
    Ok(MisWorkload {
        n,
        density,
        seed,
        edges,
    })
}

impl MisWorkload {
    pub fn id(&self) -> String {
        format!("n{}_d{}_s{}", self.n, self.density, self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("workload has no nodes".into()));
        }
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            if u >= v || v >= self.n {
                return Err(Error::InvalidInput(format!(
                    "edge {k} ({u}, {v}) must satisfy u < v < n"
                )));
            }
            if k > 0 && self.edges[k - 1] >= (u, v) {
                return Err(Error::InvalidInput(format!(
                    "edge {k} ({u}, {v}) is duplicated or out of order"
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let w: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::parse(e.path().to_string(), e.inner()))?;
        w.validate()?;
        Ok(w)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("workload serializes");
        std::fs::write(path.as_ref(), text + "\n").map_err(|e| Error::io(&path, e))
    }
}

/// Sparse symmetric integer QUBO matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    diag: Vec<i64>,
    /// `adj[i]` lists `(j, q_ij)` for `j != i`; `q_ij == q_ji`.
    adj: Vec<Vec<(usize, i64)>>,
}

pub fn build_q(w: &MisWorkload) -> QMatrix {
    let mut adj = vec![Vec::new(); w.n];
    for &(u, v) in &w.edges {
        adj[u].push((v, EDGE_PENALTY));
        adj[v].push((u, EDGE_PENALTY));
    }
    QMatrix {
        diag: vec![NODE_REWARD; w.n],
        adj,
    }
}

impl QMatrix {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        if i == j {
            self.diag[i]
        } else {
            self.adj[i]
                .iter()
                .find(|(k, _)| *k == j)
                .map_or(0, |&(_, q)| q)
        }
    }

    pub fn diag(&self, i: usize) -> i64 {
        self.diag[i]
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, i64)] {
        &self.adj[i]
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> i64 {
        self.diag
            .iter()
            .map(|d| d.abs())
            .chain(self.adj.iter().flatten().map(|(_, q)| q.abs()))
            .max()
            .unwrap_or(0)
    }

    fn check_len(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Dimension(format!(
                "assignment of length {}, Q is {}x{}",
                x.len(),
                self.n(),
                self.n()
            )));
        }
        Ok(())
    }

    /// `f_i = q_ii + sum_j (q_ij + q_ji) x_j`; flipping `i` changes the cost
    /// by `(1 - 2 x_i) f_i`.
    pub fn local_fields(&self, x: &[u8]) -> Vec<i64> {
        (0..self.n())
            .map(|i| {
                self.diag[i]
                    + self.adj[i]
                        .iter()
                        .map(|&(j, q)| 2 * q * x[j] as i64)
                        .sum::<i64>()
            })
            .collect()
    }
}

/// `x^T Q x` in integer arithmetic.
pub fn qubo_cost(q: &QMatrix, x: &[u8]) -> Result<i64> {
    q.check_len(x)?;
    let mut cost = 0i64;
    for i in 0..q.n() {
        if x[i] == 0 {
            continue;
        }
        cost += q.diag[i];
        cost += q.adj[i]
            .iter()
            .map(|&(j, v)| v * x[j] as i64)
            .sum::<i64>();
    }
    Ok(cost)
}

/// Cost change from flipping bit `i`.
pub fn delta_cost(q: &QMatrix, x: &[u8], i: usize) -> Result<i64> {
    q.check_len(x)?;
    if i >= q.n() {
        return Err(Error::InvalidInput(format!(
            "flip index {i} out of range for n = {}",
            q.n()
        )));
    }
    let field = q.diag[i]
        + q.adj[i]
            .iter()
            .map(|&(j, v)| 2 * v * x[j] as i64)
            .sum::<i64>();
    Ok((1 - 2 * x[i] as i64) * field)
}

/// Binary assignment with its cost and per-bit local fields kept current.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    x: Vec<u8>,
    cost: i64,
    fields: Vec<i64>,
}

impl Assignment {
    pub fn new(q: &QMatrix, x: Vec<u8>) -> Result<Self> {
        let cost = qubo_cost(q, &x)?;
        let fields = q.local_fields(&x);
        Ok(Self { x, cost, fields })
    }

    pub fn zeros(q: &QMatrix) -> Self {
        Self {
            x: vec![0; q.n()],
            cost: 0,
            fields: q.diag.clone(),
        }
    }

    pub fn random(q: &QMatrix, rng: &mut Rng) -> Self {
        let x = (0..q.n()).map(|_| (rng.next_u64() >> 63) as u8).collect();
        Self::new(q, x).expect("length matches")
    }

    pub fn x(&self) -> &[u8] {
        &self.x
    }

    pub fn cost(&self) -> i64 {
        self.cost
    }

    #[inline]
    pub fn delta(&self, i: usize) -> i64 {
        (1 - 2 * self.x[i] as i64) * self.fields[i]
    }

    #[inline]
    pub fn flip(&mut self, q: &QMatrix, i: usize) {
        self.cost += self.delta(i);
        let sign = 1 - 2 * self.x[i] as i64;
        self.x[i] ^= 1;
        for &(j, v) in &q.adj[i] {
            self.fields[j] += 2 * v * sign;
        }
    }
}

/// `(c - target) / |target|`: positive when worse than the target, negative
/// when better.
pub fn bks_gap(c: i64, target: i64) -> Result<f64> {
    if target == 0 {
        return Err(Error::InvalidInput("BKS-gap is undefined for a zero target cost".into()));
    }
    Ok((c - target) as f64 / target.abs() as f64)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn graph(n: usize, edges: &[(usize, usize)]) -> QMatrix {
        build_q(&MisWorkload {
            n,
            density: 0.0,
            seed: 0,
            edges: edges.to_vec(),
        })
    }

    #[test]
    fn generator_extremes_and_determinism() {
        assert!(generate_mis_workload(12, 0.0, 3).unwrap().edges.is_empty());
        assert_eq!(generate_mis_workload(12, 1.0, 3).unwrap().edges.len(), 66);
        let a = generate_mis_workload(30, 0.25, 7).unwrap();
        assert_eq!(a, generate_mis_workload(30, 0.25, 7).unwrap());
        assert!(a.validate().is_ok());
        assert!(generate_mis_workload(0, 0.1, 0).is_err());
        assert!(generate_mis_workload(3, 1.1, 0).is_err());
    }

    #[test]
    fn q_examples() {
        assert_eq!(graph(2, &[(0, 1)]).to_dense(), vec![vec![-1, 4], vec![4, -1]]);
        assert_eq!(
            graph(3, &[]).to_dense(),
            vec![vec![-1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]
        );
        let p = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(p.get(0, 1), 4);
        assert_eq!(p.get(2, 1), 4);
        assert_eq!(p.get(0, 2), 0);
        assert_eq!(p.max_abs(), 4);
    }

    #[test]
    fn cost_and_delta_examples() {
        let q = graph(2, &[(0, 1)]);
        assert_eq!(qubo_cost(&q, &[0, 0]).unwrap(), 0);
        assert_eq!(qubo_cost(&q, &[1, 0]).unwrap(), -1);
        assert_eq!(qubo_cost(&q, &[1, 1]).unwrap(), 6);
        assert_eq!(delta_cost(&q, &[1, 0], 1).unwrap(), 7);
        assert!(delta_cost(&q, &[1, 0], 2).is_err());
        assert!(qubo_cost(&q, &[1]).is_err());
        let iso = graph(3, &[(0, 1)]);
        assert_eq!(delta_cost(&iso, &[0, 0, 0], 2).unwrap(), -1);
    }

    #[test]
    fn assignment_tracks_cost() {
        let w = generate_mis_workload(15, 0.3, 1).unwrap();
        let q = build_q(&w);
        let mut rng = Rng::new(5);
        let mut a = Assignment::random(&q, &mut rng);
        for _ in 0..500 {
            let i = rng.below(q.n());
            let d = a.delta(i);
            assert_eq!(d, delta_cost(&q, a.x(), i).unwrap());
            let before = a.cost();
            a.flip(&q, i);
            assert_eq!(a.cost(), before + d);
            assert_eq!(a.cost(), qubo_cost(&q, a.x()).unwrap());
        }
    }

    #[test]
    fn gap_examples() {
        assert_eq!(bks_gap(-10, -10).unwrap(), 0.0);
        assert!((bks_gap(-8, -10).unwrap() - 0.2).abs() < 1e-15);
        assert!((bks_gap(-11, -10).unwrap() + 0.1).abs() < 1e-15);
        assert!(bks_gap(3, 0).is_err());
    }

    #[test]
    fn workload_validation() {
        let mut w = generate_mis_workload(5, 0.5, 2).unwrap();
        w.edges = vec![(1, 0)];
        assert!(w.validate().is_err());
        w.edges = vec![(0, 1), (0, 1)];
        assert!(w.validate().is_err());
        w.edges = vec![(0, 5)];
        assert!(w.validate().is_err());
    }
}
