//! Property tests for metric, forecasting, FSCIL and QUBO invariants.

use nmbench_core::fscil::{extend_classifier, replace_readout, run_fscil, synthetic_clusters, FscilMode, IdentityExtractor, SessionPlan, SyntheticConfig};
use nmbench_core::mackeyglass::{integrate_mg, make_instances, MgParams};
use nmbench_core::metrics::{activation_sparsity, connection_sparsity, smape, synaptic_ops};
use nmbench_core::model::{build_model, LayerDescription, ModelDescription, NeuronSpec};
use nmbench_core::neurons::LifDelayedResetParams;
use nmbench_core::qubo::{build_q, qubo_cost, MisWorkload};
use nmbench_core::reservoir::{autoregressive_forecast, train_readout, EsnConfig, EsnModel};
use nmbench_core::trace::LayerRole;
use nmbench_core::{Matrix, ModelGraph, Tensor};
use proptest::prelude::*;

fn sparse_value() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), Just(-1.0), -3.0f64..3.0]
}

/// Linear -> LIF -> Linear network with arbitrary (often zero) weights.
fn network(w1: &[f64], w2: &[f64], scale: f64) -> ModelGraph {
    build_model(&ModelDescription {
        precision_bytes: 4,
        input_size: None,
        layers: vec![
            LayerDescription::Linear {
                name: "fc1".into(),
                in_dim: 3,
                out_dim: 4,
                weights: w1.iter().map(|w| w * scale).collect(),
                bias: None,
            },
            LayerDescription::Neuron {
                name: "lif".into(),
                size: 4,
                neuron: NeuronSpec::LifDelayedReset(LifDelayedResetParams {
                    beta: 0.8,
                    v_th: 0.5,
                    v_reset: 0.0,
                }),
            },
            LayerDescription::Linear {
                name: "fc2".into(),
                in_dim: 4,
                out_dim: 2,
                weights: w2.iter().map(|w| w * scale).collect(),
                bias: Some(vec![0.3, -0.3]),
            },
        ],
        buffers: vec![],
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synops_bounded_and_scale_invariant(
        w1 in prop::collection::vec(sparse_value(), 12),
        w2 in prop::collection::vec(sparse_value(), 8),
        xs in prop::collection::vec(prop::collection::vec(sparse_value(), 3), 1..6),
        scale in prop_oneof![0.5f64..4.0, -4.0f64..-0.5],
    ) {
        let inputs: Vec<Tensor> = xs.iter().map(|x| Tensor::vector(x.clone())).collect();
        let mut a = network(&w1, &w2, 1.0);
        let (_, ta) = a.forward(&inputs).unwrap();
        let oa = synaptic_ops(&a, &ta).unwrap();
        prop_assert!(oa.eff_mac >= 0.0 && oa.eff_ac >= 0.0);
        prop_assert!(oa.eff_mac + oa.eff_ac <= oa.dense);

        // scaling only the weights: sparsity and dense ops fixed
        let b = network(&w1, &w2, scale);
        prop_assert_eq!(connection_sparsity(&a).ok(), connection_sparsity(&b).ok());
        let ob = synaptic_ops(&b, &ta).unwrap();
        prop_assert_eq!(oa.dense, ob.dense);
        prop_assert_eq!(oa.effective(), ob.effective());
    }

    #[test]
    fn trace_metrics_match_brute_recount(
        w1 in prop::collection::vec(sparse_value(), 12),
        w2 in prop::collection::vec(sparse_value(), 8),
        samples in prop::collection::vec(
            prop::collection::vec(prop::collection::vec(sparse_value(), 3), 1..5), 1..4),
    ) {
        let mut m = network(&w1, &w2, 1.0);
        let batch: Vec<Vec<Tensor>> = samples
            .iter()
            .map(|s| s.iter().map(|x| Tensor::vector(x.clone())).collect())
            .collect();
        let (_, trace) = m.run_workload(&batch).unwrap();

        let (mut zeros, mut total) = (0usize, 0usize);
        for (li, l) in trace.layers().iter().enumerate() {
            if l.role != LayerRole::Activation { continue; }
            for r in trace.layer_records(li) {
                zeros += r.output.data().iter().filter(|v| **v == 0.0).count();
                total += r.output.len();
            }
        }
        prop_assert_eq!(activation_sparsity(&trace).unwrap(), zeros as f64 / total as f64);

        let mut eff = 0usize;
        let mut dense = 0usize;
        for (li, layer) in m.layers().iter().enumerate() {
            let Some(w) = layer.weights() else { continue };
            for r in trace.layer_records(li) {
                let x = r.input.data();
                dense += w.rows() * w.cols();
                for i in 0..w.rows() {
                    for j in 0..w.cols() {
                        eff += (w.get(i, j) != 0.0 && x[j] != 0.0) as usize;
                    }
                }
            }
        }
        let ops = synaptic_ops(&m, &trace).unwrap();
        let execs = trace.executions() as f64;
        prop_assert_eq!(ops.dense, dense as f64 / execs);
        prop_assert!((ops.effective() - eff as f64 / execs).abs() < 1e-12);
    }

    #[test]
    fn smape_symmetric_and_bounded(
        pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..20),
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let ab = smape(&a, &b).unwrap();
        let ba = smape(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!((0.0..=200.0).contains(&ab));
    }

    #[test]
    fn qubo_cost_invariant_under_relabeling(
        n in 2usize..14,
        density in 0.0f64..1.0,
        seed in any::<u64>(),
        xbits in any::<u64>(),
        perm_seed in any::<u64>(),
    ) {
        let w = nmbench_core::qubo::generate_mis_workload(n, density, seed).unwrap();
        let x: Vec<u8> = (0..n).map(|i| ((xbits >> i) & 1) as u8).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = nmbench_core::rng::Rng::new(perm_seed);
        for i in (1..n).rev() {
            perm.swap(i, rng.below(i + 1));
        }
        let mut edges: Vec<(usize, usize)> = w
            .edges
            .iter()
            .map(|&(u, v)| (perm[u].min(perm[v]), perm[u].max(perm[v])))
            .collect();
        edges.sort();
        let relabeled = MisWorkload { edges, ..w.clone() };
        let mut y = vec![0u8; n];
        for i in 0..n {
            y[perm[i]] = x[i];
        }
        prop_assert_eq!(
            qubo_cost(&build_q(&w), &x).unwrap(),
            qubo_cost(&build_q(&relabeled), &y).unwrap()
        );
    }

    #[test]
    fn extending_keeps_existing_scores(
        base in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..5),
        extra in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 0..5),
        e in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let b: Vec<(usize, Vec<f64>)> = base.into_iter().enumerate().collect();
        let x: Vec<(usize, Vec<f64>)> = extra.into_iter().enumerate().map(|(i, c)| (100 + i, c)).collect();
        let c = replace_readout(&b, None).unwrap();
        let ext = extend_classifier(&c, &x).unwrap();
        prop_assert_eq!(ext.len(), c.len() + x.len());
        let before = c.scores(&e).unwrap();
        let after = ext.scores(&e).unwrap();
        prop_assert_eq!(&after[..before.len()], &before[..]);
    }
}

#[test]
fn ridge_solution_is_least_squares_minimum() {
    let mut rng = nmbench_core::rng::Rng::new(3);
    let (rows, cols) = (40, 5);
    let h = Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.normal()).collect()).unwrap();
    let y = Matrix::new(rows, 2, (0..rows * 2).map(|_| rng.normal()).collect()).unwrap();
    let w = train_readout(&h, &y, 0.0).unwrap();
    let residual = |w: &Matrix| -> f64 {
        (0..rows)
            .map(|t| {
                let pred = w.matvec(h.row(t)).unwrap();
                pred.iter()
                    .zip(y.row(t))
                    .map(|(p, v)| (p - v) * (p - v))
                    .sum::<f64>()
            })
            .sum()
    };
    let best = residual(&w);
    for _ in 0..200 {
        let u: Vec<f64> = (0..2).map(|_| rng.normal()).collect();
        let v: Vec<f64> = (0..cols).map(|_| rng.normal()).collect();
        let eps = 10f64.powf(rng.uniform_in(-4.0, 0.0));
        let mut p = w.clone();
        for i in 0..2 {
            for j in 0..cols {
                p.set(i, j, p.get(i, j) + eps * u[i] * v[j]);
            }
        }
        assert!(residual(&p) >= best - 1e-9);
    }
}

#[test]
fn teacher_forcing_beats_free_running_on_training_half() {
    let series = integrate_mg(&MgParams::from_table(17.0).unwrap(), 21).unwrap();
    let inst = &make_instances(&series, 1, 0.0).unwrap()[0];
    let cfg = EsnConfig::default();
    let mut m = EsnModel::from_config(1, &cfg).unwrap();
    let n = inst.train.len() - 1;
    let inputs: Vec<Vec<f64>> = inst.train[..n].iter().map(|&v| vec![v]).collect();
    let targets: Vec<Vec<f64>> = inst.train[1..].iter().map(|&v| vec![v]).collect();
    m.fit_sequence(&inputs, &targets, cfg.washout, cfg.lambda).unwrap();

    let tf: Vec<f64> = m.teacher_forced(&inputs).unwrap().into_iter().map(|v| v[0]).collect();
    let tf_err = smape(&tf[cfg.washout..], &inst.train[1 + cfg.washout..]).unwrap();

    // free-running from the same warm-up, then predicting the rest of the half
    m.reset_state();
    m.harvest_states(&inputs[..cfg.washout], 0).unwrap();
    let free = autoregressive_forecast(&mut m, &[inst.train[cfg.washout]], n - cfg.washout).unwrap();
    let free_err = smape(&free.values, &inst.train[1 + cfg.washout..]).unwrap();
    assert!(tf_err <= free_err, "{tf_err} vs {free_err}");
}

#[test]
fn classifier_grows_by_session_size() {
    let data = synthetic_clusters(&SyntheticConfig {
        classes: 16,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let plan = SessionPlan::contiguous(6, 5, 2, 5);
    let ext = IdentityExtractor { dim: 16 };
    let r = run_fscil(&ext, &plan, &data.train, &data.test, FscilMode::Prototypical, None).unwrap();
    for (t, s) in r.sessions.iter().enumerate() {
        assert_eq!(s.classes, 6 + 2 * t);
    }
}
