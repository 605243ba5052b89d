//! Simulated annealing and tabu search over single-bit flips.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Assignment, QMatrix};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// When a solver stops; the first condition reached wins.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StopRule {
    /// Wall-clock budget, measured from the solver call (Q already built).
    pub deadline: Option<Duration>,
    /// Number of proposals (annealing) or moves (tabu).
    pub max_iterations: Option<u64>,
    /// Stop once this cost is reached. Experimental threshold mode.
    pub target_cost: Option<i64>,
}

impl StopRule {
    pub fn iterations(n: u64) -> Self {
        Self {
            max_iterations: Some(n),
            ..Self::default()
        }
    }

    pub fn deadline(d: Duration) -> Self {
        Self {
            deadline: Some(d),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.deadline.is_none() && self.max_iterations.is_none() && self.target_cost.is_none() {
            return Err(Error::InvalidParameter("solver needs a stop condition".into()));
        }
        if self.deadline.is_some_and(|d| d.is_zero()) {
            return Err(Error::InvalidParameter("deadline must be positive".into()));
        }
        Ok(())
    }
}

struct Clock {
    rule: StopRule,
    start: Instant,
}

impl Clock {
    fn new(rule: StopRule) -> Self {
        Self {
            rule,
            start: Instant::now(),
        }
    }

    #[inline]
    fn done(&self, iterations: u64, best: i64) -> bool {
        if self.rule.max_iterations.is_some_and(|m| iterations >= m) {
            return true;
        }
        if self.rule.target_cost.is_some_and(|t| best <= t) {
            return true;
        }
        // reading the clock every step would dominate small instances
        iterations.is_multiple_of(256)
            && self
                .rule
                .deadline
                .is_some_and(|d| self.start.elapsed() >= d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRun {
    pub solver: String,
    pub seed: u64,
    pub best_x: Vec<u8>,
    pub best_cost: i64,
    pub iterations: u64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaSchedule {
    pub t0: f64,
    /// Multiplier applied after every sweep of `n` proposals.
    pub cooling: f64,
    pub t_min: f64,
}

impl Default for SaSchedule {
    fn default() -> Self {
        Self {
            t0: 8.0,
            cooling: 0.999,
            t_min: 1e-3,
        }
    }
}

impl SaSchedule {
    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) || !(self.t_min > 0.0) || !(0.0 < self.cooling && self.cooling < 1.0)
        {
            return Err(Error::InvalidParameter(
                "annealing needs t0 > 0, t_min > 0 and cooling in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Metropolis rule: downhill always, uphill with probability `exp(-delta/temp)`.
#[inline]
pub fn metropolis_accept(delta: i64, temp: f64, u: f64) -> bool {
    delta <= 0 || u < (-(delta as f64) / temp).exp()
}

pub fn simulated_annealing(
    q: &QMatrix,
    seed: u64,
    schedule: &SaSchedule,
    stop: StopRule,
) -> Result<SolverRun> {
    schedule.validate()?;
    stop.validate()?;
    let clock = Clock::new(stop);
    let n = q.n();
    let mut rng = Rng::new(seed);
    let mut a = Assignment::random(q, &mut rng);
    let mut best_x = a.x().to_vec();
    let mut best = a.cost();
    let mut temp = schedule.t0;
    let mut it = 0u64;
    'outer: loop {
        for _ in 0..n {
            if clock.done(it, best) {
                break 'outer;
            }
            let i = rng.below(n);
            let d = a.delta(i);
            if d <= 0 || metropolis_accept(d, temp, rng.uniform()) {
                a.flip(q, i);
                if a.cost() < best {
                    best = a.cost();
                    best_x.copy_from_slice(a.x());
                }
            }
            it += 1;
        }
        temp *= schedule.cooling;
        if temp < schedule.t_min {
            a = Assignment::random(q, &mut rng);
            if a.cost() < best {
                best = a.cost();
                best_x.copy_from_slice(a.x());
            }
            temp = schedule.t0;
        }
    }
    Ok(SolverRun {
        solver: "sa".into(),
        seed,
        best_x,
        best_cost: best,
        iterations: it,
        elapsed_s: clock.start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TabuParams {
    /// Iterations a flipped bit stays tabu; `None` uses `clamp(n / 4, 1, 20)`.
    pub tenure: Option<usize>,
    /// Moves without a new best before a random restart; `None` uses `max(100, 10 n)`.
    pub stagnation: Option<u64>,
}

impl TabuParams {
    pub fn tenure_for(&self, n: usize) -> usize {
        self.tenure.unwrap_or((n / 4).clamp(1, 20))
    }

    pub fn stagnation_for(&self, n: usize) -> u64 {
        self.stagnation.unwrap_or((10 * n as u64).max(100))
    }
}

/// Steepest-descent tabu search. A flipped bit is tabu for `tenure` moves
/// unless flipping it would beat the best cost so far. Ties between equally
/// good moves are broken uniformly at random. If every move is tabu the best
/// move is taken regardless.
pub fn tabu_search(q: &QMatrix, seed: u64, params: &TabuParams, stop: StopRule) -> Result<SolverRun> {
    stop.validate()?;
    if params.tenure == Some(0) {
        return Err(Error::InvalidParameter("tabu tenure must be at least 1".into()));
    }
    let clock = Clock::new(stop);
    let n = q.n();
    let tenure = params.tenure_for(n) as u64;
    let window = params.stagnation_for(n);
    let mut rng = Rng::new(seed);
    let mut a = Assignment::random(q, &mut rng);
    let mut best_x = a.x().to_vec();
    let mut best = a.cost();
    let mut tabu_until = vec![0u64; n];
    let mut last_improvement = 0u64;
    let mut it = 0u64;
    while !clock.done(it, best) {
        let mut chosen: Option<(usize, i64)> = None;
        let mut ties = 0usize;
        let mut fallback: Option<(usize, i64)> = None;
        for i in 0..n {
            let d = a.delta(i);
            if fallback.is_none_or(|(_, fd)| d < fd) {
                fallback = Some((i, d));
            }
            let allowed = tabu_until[i] <= it || a.cost() + d < best;
            if !allowed {
                continue;
            }
            match chosen {
                Some((_, cd)) if d > cd => {}
                Some((_, cd)) if d == cd => {
                    ties += 1;
                    if rng.below(ties) == 0 {
                        chosen = Some((i, d));
                    }
                }
                _ => {
                    chosen = Some((i, d));
                    ties = 1;
                }
            }
        }
        let (i, _) = chosen.or(fallback).expect("n >= 1");
        a.flip(q, i);
        tabu_until[i] = it + 1 + tenure;
        it += 1;
        if a.cost() < best {
            best = a.cost();
            best_x.copy_from_slice(a.x());
            last_improvement = it;
        } else if it - last_improvement > window {
            a = Assignment::random(q, &mut rng);
            tabu_until.iter_mut().for_each(|t| *t = 0);
            last_improvement = it;
            if a.cost() < best {
                best = a.cost();
                best_x.copy_from_slice(a.x());
            }
        }
    }
    Ok(SolverRun {
        solver: "tabu".into(),
        seed,
        best_x,
        best_cost: best,
        iterations: it,
        elapsed_s: clock.start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::graph;
    use super::super::{build_q, generate_mis_workload, qubo_cost};
    use super::*;

    fn k4() -> QMatrix {
        graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    }

    #[test]
    fn metropolis_limits() {
        assert!(metropolis_accept(-3, 1e-300, 0.999));
        assert!(metropolis_accept(0, 1e-300, 0.999));
        assert!(!metropolis_accept(1, 1e-300, 0.0));
        assert!(metropolis_accept(1, 1e300, 0.5));
    }

    #[test]
    fn annealing_small_graphs() {
        let stop = StopRule::iterations(20_000);
        let s = SaSchedule::default();
        let r = simulated_annealing(&graph(2, &[(0, 1)]), 1, &s, stop).unwrap();
        assert_eq!(r.best_cost, -1);
        let r = simulated_annealing(&graph(3, &[(0, 1), (1, 2)]), 1, &s, stop).unwrap();
        assert_eq!(r.best_cost, -2);
        assert_eq!(r.best_x, vec![1, 0, 1]);
        assert_eq!(r.iterations, 20_000);
    }

    #[test]
    fn tabu_small_graphs() {
        let stop = StopRule::iterations(2_000);
        let p = TabuParams::default();
        assert_eq!(tabu_search(&graph(2, &[(0, 1)]), 3, &p, stop).unwrap().best_cost, -1);
        let r = tabu_search(&k4(), 3, &p, stop).unwrap();
        assert_eq!(r.best_cost, -1);
        assert_eq!(r.best_x.iter().filter(|&&b| b == 1).count(), 1);
    }

    #[test]
    fn tabu_with_long_tenure_still_improves() {
        let p = TabuParams {
            tenure: Some(10),
            stagnation: Some(1_000_000),
        };
        for seed in 0..10 {
            let r = tabu_search(&k4(), seed, &p, StopRule::iterations(50)).unwrap();
            assert_eq!(r.best_cost, -1);
        }
        assert!(tabu_search(&k4(), 0, &TabuParams { tenure: Some(0), stagnation: None }, StopRule::iterations(5)).is_err());
    }

    #[test]
    fn best_cost_matches_best_assignment() {
        let q = build_q(&generate_mis_workload(30, 0.2, 4).unwrap());
        let sa = simulated_annealing(&q, 9, &SaSchedule::default(), StopRule::iterations(30_000)).unwrap();
        assert_eq!(qubo_cost(&q, &sa.best_x).unwrap(), sa.best_cost);
        let tb = tabu_search(&q, 9, &TabuParams::default(), StopRule::iterations(3_000)).unwrap();
        assert_eq!(qubo_cost(&q, &tb.best_x).unwrap(), tb.best_cost);
    }

    #[test]
    fn longer_budget_is_never_worse() {
        let q = build_q(&generate_mis_workload(40, 0.1, 2).unwrap());
        let s = SaSchedule::default();
        let short = simulated_annealing(&q, 1, &s, StopRule::iterations(2_000)).unwrap();
        let long = simulated_annealing(&q, 1, &s, StopRule::iterations(20_000)).unwrap();
        assert!(long.best_cost <= short.best_cost);
        let p = TabuParams::default();
        let short = tabu_search(&q, 1, &p, StopRule::iterations(100)).unwrap();
        let long = tabu_search(&q, 1, &p, StopRule::iterations(1_000)).unwrap();
        assert!(long.best_cost <= short.best_cost);
    }

    #[test]
    fn stop_rules() {
        let q = k4();
        assert!(simulated_annealing(&q, 0, &SaSchedule::default(), StopRule::default()).is_err());
        let target = StopRule {
            target_cost: Some(-1),
            max_iterations: Some(1_000_000),
            ..StopRule::default()
        };
        let r = tabu_search(&q, 0, &TabuParams::default(), target).unwrap();
        assert!(r.iterations < 1_000_000);
        let timed = StopRule::deadline(Duration::from_millis(20));
        let r = simulated_annealing(&q, 0, &SaSchedule::default(), timed).unwrap();
        assert!(r.elapsed_s >= 0.02);
    }
}
