//! Best-known solutions: exhaustive enumeration for small graphs, repeated
//! long tabu runs above the enumeration bound.

use serde::{Deserialize, Serialize};

use super::{tabu_search, Assignment, QMatrix, StopRule, TabuParams};
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_N: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BksMethod {
    BruteForce,
    LongTabu,
}

impl BksMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BksMethod::BruteForce => "brute_force",
            BksMethod::LongTabu => "long_tabu",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bks {
    pub cost: i64,
    pub x: Vec<u8>,
    pub method: BksMethod,
}

/// Gray-code enumeration of all `2^n` assignments with incremental costs.
/// The first optimum in enumeration order is returned.
pub fn brute_force_bks(q: &QMatrix) -> Result<Bks> {
    let n = q.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::InvalidInput(format!(
            "brute force is limited to n <= {BRUTE_FORCE_MAX_N} (got {n}); use the long-tabu BKS mode"
        )));
    }
    let mut a = Assignment::zeros(q);
    let mut best = (a.cost(), a.x().to_vec());
    for k in 1u64..(1u64 << n) {
        a.flip(q, k.trailing_zeros() as usize);
        if a.cost() < best.0 {
            best = (a.cost(), a.x().to_vec());
        }
    }
    Ok(Bks {
        cost: best.0,
        x: best.1,
        method: BksMethod::BruteForce,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LongTabuConfig {
    pub restarts: u64,
    pub iterations: u64,
    pub seed: u64,
}

impl Default for LongTabuConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            iterations: 200_000,
            seed: 0,
        }
    }
}

/// Best of `restarts` independent iteration-budgeted tabu runs.
pub fn long_tabu_bks(q: &QMatrix, cfg: &LongTabuConfig) -> Result<Bks> {
    let mut best: Option<Bks> = None;
    for r in 0..cfg.restarts.max(1) {
        let run = tabu_search(
            q,
            cfg.seed.wrapping_add(r),
            &TabuParams::default(),
            StopRule::iterations(cfg.iterations),
        )?;
        if best.as_ref().is_none_or(|b| run.best_cost < b.cost) {
            best = Some(Bks {
                cost: run.best_cost,
                x: run.best_x,
                method: BksMethod::LongTabu,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Brute force when feasible, long tabu otherwise.
pub fn compute_bks(q: &QMatrix, long: &LongTabuConfig) -> Result<Bks> {
    if q.n() <= BRUTE_FORCE_MAX_N {
        brute_force_bks(q)
    } else {
        long_tabu_bks(q, long)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::graph;
    use super::*;

    #[test]
    fn brute_force_examples() {
        let b = brute_force_bks(&graph(1, &[])).unwrap();
        assert_eq!((b.cost, b.x.clone()), (-1, vec![1]));
        assert_eq!(brute_force_bks(&graph(3, &[(0, 1), (1, 2)])).unwrap().cost, -2);
        let c5 = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
        assert_eq!(brute_force_bks(&c5).unwrap().cost, -2);
        assert!(brute_force_bks(&graph(25, &[])).is_err());
    }

    #[test]
    fn long_tabu_matches_brute_force_on_small_graph() {
        let q = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let cfg = LongTabuConfig {
            restarts: 2,
            iterations: 500,
            seed: 0,
        };
        assert_eq!(long_tabu_bks(&q, &cfg).unwrap().cost, -3);
        assert_eq!(compute_bks(&graph(30, &[]), &cfg).unwrap().cost, -30);
    }
}
