//! Forward thinking: greedy layer-wise training with frozen prefixes, plus
//! the automated width-searching variant and its over-build-then-prune step.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{build_layered, forward_hidden, Layer, LayeredNetwork, Network};
use crate::numerics::{Activation, Rng};
use crate::training::{evaluate, fit, Monitor, RunRecord, TrainConfig};

use super::types::{LayerPerformanceCurve, LayerPoint};

/// Replaces the inputs with the frozen prefix's top activations; labels stay.
/// Training a fresh head on the result is mathematically identical to
/// training the full network with the prefix frozen.
pub fn push_through(data: &Dataset, prefix: &[Layer]) -> Result<Dataset> {
    if prefix.iter().any(|l| !l.frozen) {
        return Err(Error::contract("push_through: prefix must be frozen"));
    }
    if prefix.is_empty() {
        return Ok(data.clone());
    }
    let inputs = forward_hidden(prefix, &data.inputs);
    Dataset::new(inputs, data.labels.clone(), data.class_count)
}

/// Early-stop patience while a layer trains with its temporary head: 2, and 3
/// for the last planned layer.
fn layer_patience(is_last: bool) -> usize {
    if is_last {
        3
    } else {
        2
    }
}

/// Trains one hidden layer plus a temporary softmax head on the pushed data.
/// Returns the (frozen) hidden layer, the head, and the run record.
fn train_layer(
    pushed_train: &Dataset,
    pushed_val: &Dataset,
    width: usize,
    activation: Activation,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<(Layer, Layer, RunRecord)> {
    let mut net = build_layered(
        pushed_train.input_dim(),
        &[(width, activation)],
        pushed_train.class_count,
    )?;
    net.init_weights(rng);
    let record = fit(&mut net, pushed_train, pushed_val, cfg, rng)?;
    let mut layers = net.layers.into_iter();
    let mut hidden = layers.next().expect("hidden layer");
    let head = layers.next().expect("head layer");
    hidden.frozen = true;
    Ok((hidden, head, record))
}

/// Greedy layer-wise training over a fixed plan. Each planned layer trains
/// with a fresh temporary head on the pushed dataset (validation loss,
/// patience 2; 3 for the last layer), is frozen, and the head is discarded —
/// except the last head, which becomes the final output layer.
pub fn forward_thinking_train(
    train: &Dataset,
    val: &Dataset,
    layer_plan: &[(usize, Activation)],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(LayeredNetwork, Vec<RunRecord>)> {
    if layer_plan.is_empty() {
        return Err(Error::contract("forward_thinking_train: empty layer plan"));
    }
    let master = Rng::new(seed);
    let mut pushed_train = train.clone();
    let mut pushed_val = val.clone();
    let mut stack: Vec<Layer> = Vec::with_capacity(layer_plan.len() + 1);
    let mut records = Vec::with_capacity(layer_plan.len());
    let mut last_head = None;

    for (i, &(width, activation)) in layer_plan.iter().enumerate() {
        let is_last = i + 1 == layer_plan.len();
        let layer_cfg = cfg
            .clone()
            .with_early_stop(Monitor::ValLoss, layer_patience(is_last));
        let mut rng = master.derive(i as u64);
        let (hidden, head, record) = train_layer(
            &pushed_train,
            &pushed_val,
            width,
            activation,
            &layer_cfg,
            &mut rng,
        )?;
        pushed_train = push_through(&pushed_train, std::slice::from_ref(&hidden))?;
        pushed_val = push_through(&pushed_val, std::slice::from_ref(&hidden))?;
        stack.push(hidden);
        records.push(record);
        last_head = Some(head);
    }
    stack.push(last_head.expect("plan is nonempty"));
    Ok((LayeredNetwork { layers: stack }, records))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AftConfig {
    pub pool_size: usize,
    pub width_min: usize,
    pub width_max: usize,
    pub width_step: usize,
    pub candidate_epochs: usize,
    /// Cap each layer's width at the previous layer's width.
    pub monotone: bool,
    pub max_layers: usize,
    pub activation: Activation,
}

impl Default for AftConfig {
    /// Pool of 8 candidate layers, widths multiples of 50 in [50, 1000],
    /// 2 audition epochs, monotone widths, built to 10 layers.
    fn default() -> AftConfig {
        AftConfig {
            pool_size: 8,
            width_min: 50,
            width_max: 1000,
            width_step: 50,
            candidate_epochs: 2,
            monotone: true,
            max_layers: 10,
            activation: Activation::Relu,
        }
    }
}

impl AftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size == 0 || self.max_layers == 0 || self.candidate_epochs == 0 {
            return Err(Error::config(
                "pool_size, max_layers, candidate_epochs must be >= 1",
            ));
        }
        if self.width_step == 0 || self.width_min == 0 || self.width_max < self.width_min {
            return Err(Error::config("invalid width range"));
        }
        Ok(())
    }

    fn allowed_widths(&self, cap: Option<usize>) -> Vec<usize> {
        let max = cap.map_or(self.width_max, |c| c.min(self.width_max));
        (self.width_min..=max).step_by(self.width_step).collect()
    }
}

/// Automated forward thinking: at each depth a pool of candidate layers with
/// sampled widths auditions briefly on the pushed data; the best is trained
/// to convergence, frozen, and pushed through. Construction always runs to
/// `max_layers`; pruning happens afterwards in [`prune_to_tradeoff`].
pub fn auto_forward_thinking(
    train: &Dataset,
    val: &Dataset,
    aft: &AftConfig,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(LayeredNetwork, LayerPerformanceCurve, Vec<RunRecord>)> {
    aft.validate()?;
    let master = Rng::new(seed);
    let mut pushed_train = train.clone();
    let mut pushed_val = val.clone();
    let mut stack: Vec<Layer> = Vec::new();
    let mut curve = LayerPerformanceCurve::default();
    let mut records = Vec::new();
    let mut last_head: Option<Layer> = None;
    let mut prev_width: Option<usize> = None;

    for depth in 1..=aft.max_layers {
        let cap = if aft.monotone { prev_width } else { None };
        let widths = aft.allowed_widths(cap);
        if widths.is_empty() {
            curve.stopped_early = true;
            break;
        }
        let mut sample_rng = master.derive(1000 + depth as u64);
        let candidate_widths: Vec<usize> = (0..aft.pool_size)
            .map(|_| *sample_rng.choose(&widths))
            .collect();

        // Audition each candidate width briefly on the pushed data.
        let audition_cfg = TrainConfig {
            early_stop: None,
            max_epochs: aft.candidate_epochs,
            ..cfg.clone()
        };
        let mut best: Option<(usize, f64)> = None;
        for (id, &width) in candidate_widths.iter().enumerate() {
            let mut rng = master.derive((depth as u64) * 100 + id as u64);
            let (_, _, record) = train_layer(
                &pushed_train,
                &pushed_val,
                width,
                aft.activation,
                &audition_cfg,
                &mut rng,
            )?;
            let acc = record.final_val_acc();
            if best.is_none_or(|(_, b)| acc > b) {
                best = Some((id, acc));
            }
        }
        let (winner, _) = best.expect("pool is nonempty");
        let width = candidate_widths[winner];

        // Re-train the winner to convergence from its audition seed.
        let converge_cfg = cfg.clone().with_early_stop(Monitor::ValLoss, 2);
        let mut rng = master.derive((depth as u64) * 100 + winner as u64);
        let (hidden, head, record) = train_layer(
            &pushed_train,
            &pushed_val,
            width,
            aft.activation,
            &converge_cfg,
            &mut rng,
        )?;
        pushed_train = push_through(&pushed_train, std::slice::from_ref(&hidden))?;
        pushed_val = push_through(&pushed_val, std::slice::from_ref(&hidden))?;
        stack.push(hidden);
        prev_width = Some(width);

        let param_count: usize = stack
            .iter()
            .chain(std::iter::once(&head))
            .map(|l| l.weight.len() + l.bias.len())
            .sum();
        let (val_loss, val_accuracy) = {
            let full = LayeredNetwork {
                layers: stack.iter().cloned().chain(std::iter::once(head.clone())).collect(),
            };
            let (l, a) = evaluate(&full, val, cfg.batch_size)?;
            (l, a)
        };
        let (_, train_accuracy) = evaluate(
            &LayeredNetwork {
                layers: vec![head.clone()],
            },
            &pushed_train,
            cfg.batch_size,
        )?;
        curve.points.push(LayerPoint {
            depth,
            width,
            val_accuracy,
            val_loss,
            train_accuracy,
            param_count,
        });
        records.push(record);
        last_head = Some(head);
    }

    let mut layers = stack;
    layers.push(last_head.ok_or_else(|| Error::contract("no layer was built"))?);
    Ok((LayeredNetwork { layers }, curve, records))
}

/// Keeps the smallest depth whose validation accuracy is within `epsilon` of
/// the curve's maximum, drops the layers beyond it, and retrains a fresh head
/// on the truncated stack.
pub fn prune_to_tradeoff(
    curve: &LayerPerformanceCurve,
    net: &LayeredNetwork,
    epsilon: f64,
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(LayeredNetwork, usize)> {
    if curve.points.is_empty() {
        return Err(Error::contract("prune_to_tradeoff: empty curve"));
    }
    for (i, p) in curve.points.iter().enumerate() {
        if p.depth != i + 1 {
            return Err(Error::contract("prune_to_tradeoff: curve depths not contiguous"));
        }
    }
    let best = curve
        .points
        .iter()
        .map(|p| p.val_accuracy)
        .fold(f64::NEG_INFINITY, f64::max);
    let chosen_depth = curve
        .points
        .iter()
        .find(|p| p.val_accuracy >= best - epsilon)
        .expect("max is attained")
        .depth;

    let stack: Vec<Layer> = net.layers[..chosen_depth].to_vec();
    let pushed_train = push_through(train, &stack)?;
    let pushed_val = push_through(val, &stack)?;
    let mut head_net = build_layered(pushed_train.input_dim(), &[], train.class_count)?;
    let mut rng = Rng::new(seed).derive(0xDEAD);
    head_net.init_weights(&mut rng);
    let head_cfg = cfg.clone().with_early_stop(Monitor::ValLoss, 2);
    fit(&mut head_net, &pushed_train, &pushed_val, &head_cfg, &mut rng)?;

    let mut layers = stack;
    layers.push(head_net.layers.into_iter().next().expect("head"));
    Ok((LayeredNetwork { layers }, chosen_depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_polygons;
    use crate::numerics::Matrix;

    fn setup() -> (Dataset, Dataset) {
        let data = synthetic_polygons(300, 23).unwrap();
        data.split(0.8, &mut Rng::new(23)).unwrap()
    }

    #[test]
    fn push_through_dimensions_and_identity() {
        let (train, _) = setup();
        assert_eq!(
            push_through(&train, &[]).unwrap().inputs.as_slice(),
            train.inputs.as_slice()
        );
        let mut net = build_layered(2, &[(5, Activation::Tanh)], 2).unwrap();
        net.init_weights(&mut Rng::new(1));
        let mut hidden = net.layers[0].clone();
        assert!(push_through(&train, std::slice::from_ref(&hidden)).is_err()); // not frozen
        hidden.frozen = true;
        let pushed = push_through(&train, std::slice::from_ref(&hidden)).unwrap();
        assert_eq!(pushed.input_dim(), 5);
        assert_eq!(pushed.labels, train.labels);
    }

    #[test]
    fn push_through_training_equivalence() {
        // Training a fresh head on pushed data must match training the full
        // network with a frozen prefix, step for step.
        let (train, val) = setup();
        let mut prefix_net = build_layered(2, &[(6, Activation::Tanh)], 2).unwrap();
        prefix_net.init_weights(&mut Rng::new(2));
        let mut hidden = prefix_net.layers[0].clone();
        hidden.frozen = true;

        let cfg = TrainConfig::rmsprop().with_max_epochs(3);

        // Path A: full network, frozen prefix.
        let mut full = LayeredNetwork {
            layers: vec![hidden.clone(), Layer::new(6, 2, None)],
        };
        let head_init = {
            let mut rng = Rng::new(3);
            let mut tmp = build_layered(6, &[], 2).unwrap();
            tmp.init_weights(&mut rng);
            tmp.layers[0].clone()
        };
        full.layers[1] = head_init.clone();
        fit(&mut full, &train, &val, &cfg, &mut Rng::new(4)).unwrap();

        // Path B: head alone on the pushed dataset.
        let pushed_train = push_through(&train, std::slice::from_ref(&hidden)).unwrap();
        let pushed_val = push_through(&val, std::slice::from_ref(&hidden)).unwrap();
        let mut head_net = LayeredNetwork {
            layers: vec![head_init],
        };
        fit(&mut head_net, &pushed_train, &pushed_val, &cfg, &mut Rng::new(4)).unwrap();

        for (a, b) in full.layers[1]
            .weight
            .as_slice()
            .iter()
            .zip(head_net.layers[0].weight.as_slice())
        {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn forward_thinking_builds_frozen_stack() {
        let (train, val) = setup();
        let cfg = TrainConfig::rmsprop().with_max_epochs(4);
        let plan = [(6, Activation::Tanh), (4, Activation::Tanh)];
        let (net, records) = forward_thinking_train(&train, &val, &plan, &cfg, 5).unwrap();
        assert_eq!(net.layers.len(), 3);
        assert!(net.layers[0].frozen && net.layers[1].frozen);
        assert!(!net.layers[2].frozen);
        assert_eq!(net.layers[0].out_dim(), 6);
        assert_eq!(net.layers[1].in_dim(), 6);
        assert_eq!(net.layers[1].out_dim(), 4);
        assert_eq!(net.layers[2].out_dim(), 2);
        assert_eq!(records.len(), 2);
        // The assembled network's accuracy matches the last pushed-head run.
        let (_, acc) = evaluate(&net, &val, cfg.batch_size).unwrap();
        assert!((0.0..=1.0).contains(&acc));
    }

    #[test]
    fn single_layer_plan_matches_plain_fit() {
        let (train, val) = setup();
        let cfg = TrainConfig::rmsprop().with_max_epochs(5);
        let (ft_net, _) =
            forward_thinking_train(&train, &val, &[(6, Activation::Tanh)], &cfg, 9).unwrap();

        // Replicate by hand with the same derived seed and stopping rule.
        let mut rng = Rng::new(9).derive(0);
        let mut net = build_layered(2, &[(6, Activation::Tanh)], 2).unwrap();
        net.init_weights(&mut rng);
        let manual_cfg = cfg.with_early_stop(Monitor::ValLoss, 3);
        fit(&mut net, &train, &val, &manual_cfg, &mut rng).unwrap();

        assert_eq!(
            ft_net.layers[0].weight.as_slice(),
            net.layers[0].weight.as_slice()
        );
        assert_eq!(
            ft_net.layers[1].weight.as_slice(),
            net.layers[1].weight.as_slice()
        );
    }

    fn quick_aft() -> AftConfig {
        AftConfig {
            pool_size: 2,
            width_min: 2,
            width_max: 8,
            width_step: 2,
            candidate_epochs: 1,
            monotone: true,
            max_layers: 3,
            activation: Activation::Tanh,
        }
    }

    #[test]
    fn aft_monotone_widths_and_contiguous_curve() {
        let (train, val) = setup();
        let cfg = TrainConfig::rmsprop().with_max_epochs(3);
        let (net, curve, records) =
            auto_forward_thinking(&train, &val, &quick_aft(), &cfg, 1).unwrap();
        assert_eq!(curve.points.len(), 3);
        assert_eq!(records.len(), 3);
        assert!(!curve.stopped_early);
        for (i, p) in curve.points.iter().enumerate() {
            assert_eq!(p.depth, i + 1);
            assert!(p.width % 2 == 0 && (2..=8).contains(&p.width));
        }
        for pair in curve.points.windows(2) {
            assert!(pair[1].width <= pair[0].width, "widths must be non-increasing");
        }
        assert_eq!(net.layers.len(), 4); // 3 hidden + head
        assert!(net.layers[..3].iter().all(|l| l.frozen));
    }

    #[test]
    fn prune_picks_first_depth_near_peak() {
        let mk = |depth, val_accuracy| LayerPoint {
            depth,
            width: 10,
            val_accuracy,
            val_loss: 0.0,
            train_accuracy: 0.0,
            param_count: 0,
        };
        let curve = LayerPerformanceCurve {
            points: vec![
                mk(1, 0.95),
                mk(2, 0.974),
                mk(3, 0.9745),
                mk(4, 0.9746),
                mk(5, 0.9747),
            ],
            stopped_early: false,
        };
        // Build a matching 5-hidden-layer frozen net over the toy task.
        let (train, val) = setup();
        let mut net = build_layered(
            2,
            &[(4, Activation::Tanh); 5],
            2,
        )
        .unwrap();
        net.init_weights(&mut Rng::new(6));
        for l in net.layers.iter_mut().take(5) {
            l.frozen = true;
        }
        let cfg = TrainConfig::rmsprop().with_max_epochs(2);
        // Peak 0.9747, epsilon 0.001: depth 2 (0.974) is the first point
        // within 0.0007 <= 0.001 of the peak.
        let (pruned, depth) =
            prune_to_tradeoff(&curve, &net, 0.001, &train, &val, &cfg, 2).unwrap();
        assert_eq!(depth, 2);
        assert_eq!(pruned.layers.len(), 3);
        // A tighter tolerance moves the cut to depth 3 (0.9745).
        let (_, depth) =
            prune_to_tradeoff(&curve, &net, 0.0003, &train, &val, &cfg, 2).unwrap();
        assert_eq!(depth, 3);
        // The kept prefix is the original frozen prefix, untouched.
        for (a, b) in pruned.layers[..2].iter().zip(&net.layers[..2]) {
            assert_eq!(a.weight.as_slice(), b.weight.as_slice());
        }
    }

    #[test]
    fn prune_keeps_everything_when_strictly_increasing() {
        let mk = |depth, val_accuracy| LayerPoint {
            depth,
            width: 4,
            val_accuracy,
            val_loss: 0.0,
            train_accuracy: 0.0,
            param_count: 0,
        };
        let curve = LayerPerformanceCurve {
            points: vec![mk(1, 0.5), mk(2, 0.7), mk(3, 0.9)],
            stopped_early: false,
        };
        let (train, val) = setup();
        let mut net = build_layered(2, &[(4, Activation::Tanh); 3], 2).unwrap();
        net.init_weights(&mut Rng::new(8));
        for l in net.layers.iter_mut().take(3) {
            l.frozen = true;
        }
        let cfg = TrainConfig::rmsprop().with_max_epochs(2);
        let (_, depth) = prune_to_tradeoff(&curve, &net, 0.001, &train, &val, &cfg, 3).unwrap();
        assert_eq!(depth, 3);
    }

    #[test]
    fn empty_plan_rejected() {
        let (train, val) = setup();
        let cfg = TrainConfig::rmsprop();
        assert!(forward_thinking_train(&train, &val, &[], &cfg, 1).is_err());
        let _ = Matrix::zeros(1, 1);
    }
}
