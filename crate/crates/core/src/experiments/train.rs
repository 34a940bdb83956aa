use rand::seq::SliceRandom;

use super::metrics::{evaluate_prepared, Metrics, PreparedSamples};
use crate::dataset::{DatasetSplit, Label};
use crate::error::{Error, Result};
use crate::gcn::{backward, forward, init_model, GcnConfig, GcnModel};
use crate::rng::rng_for;
use crate::sensor_graph::{load_layout, normalize_adjacency, EdgeMode, EdgeSet, NormalizedAdjacency, TAXEL_COUNT};
use crate::tensor::{adam_step, softmax_cross_entropy, AdamConfig, AdamState, Matrix};

const SHUFFLE_STREAM: u64 = 0x5348_5546; // "SHUF"

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub seed: u64,
    pub edge_mode: EdgeMode,
    pub gcn: GcnConfig,
    pub positive_class: Label,
}

impl TrainConfig {
    /// Defaults: 512 epochs, batch 32, lr 0.01, weight decay 5e-4, manual
    /// edges, depth-5 network initialized from `seed`, Slippery positive.
    pub fn new(seed: u64) -> Self {
        Self {
            epochs: 512,
            batch_size: 32,
            lr: 0.01,
            weight_decay: 5e-4,
            seed,
            edge_mode: EdgeMode::Manual,
            gcn: GcnConfig::for_depth(5, seed).expect("depth 5 is valid"),
            positive_class: Label::Slippery,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gcn.validate()?;
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("epochs and batch size must be positive".into()));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) || !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lr {} and weight decay {} must be finite and non-negative",
                self.lr, self.weight_decay
            )));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            weight_decay: self.weight_decay,
            ..AdamConfig::default()
        }
    }
}

/// The concrete graph structure behind an [`EdgeMode`].
#[derive(Debug, Clone)]
pub struct Topology {
    pub mode: EdgeMode,
    pub edges: EdgeSet,
    pub a_norm: NormalizedAdjacency,
}

impl Topology {
    pub fn new(mode: EdgeMode, manual: &EdgeSet) -> Result<Self> {
        let edges = mode.resolve(&load_layout(), manual)?;
        let a_norm = normalize_adjacency(&edges, TAXEL_COUNT)?;
        Ok(Self { mode, edges, a_norm })
    }

    pub fn fingerprint(&self) -> String {
        self.edges.fingerprint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val: Option<Metrics>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters after the last epoch.
    pub model: GcnModel,
    pub history: Vec<EpochRecord>,
}

impl TrainOutcome {
    /// First epoch (1-based) with the highest validation accuracy.
    pub fn best_epoch(&self) -> Option<&EpochRecord> {
        let mut best: Option<&EpochRecord> = None;
        for r in &self.history {
            if let Some(m) = &r.val {
                if best.is_none_or(|b| m.accuracy > b.val.as_ref().expect("has val").accuracy) {
                    best = Some(r);
                }
            }
        }
        best
    }

    pub fn final_epoch(&self) -> Option<&EpochRecord> {
        self.history.last()
    }
}

/// Mini-batch ADAM on mean cross-entropy, shuffling with a stream derived
/// from `config.seed` every epoch. Validation metrics, when a validation set
/// is given, are recorded after each epoch.
pub fn train(
    config: &TrainConfig,
    topology: &Topology,
    train_set: &DatasetSplit,
    val_set: Option<&DatasetSplit>,
) -> Result<TrainOutcome> {
    let train_data = PreparedSamples::from_split(train_set)?;
    let val_data = val_set.map(PreparedSamples::from_split).transpose()?;
    train_prepared(config, &topology.a_norm, &train_data, val_data.as_ref())
}

pub(crate) fn train_prepared(
    config: &TrainConfig,
    a_norm: &NormalizedAdjacency,
    train_data: &PreparedSamples,
    val_data: Option<&PreparedSamples>,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if train_data.classes.iter().all(|&c| c == train_data.classes[0]) {
        return Err(Error::InvalidArgument(format!(
            "training set has only {} samples",
            Label::from_class_id(train_data.classes[0]).expect("valid class")
        )));
    }
    if val_data.is_some_and(|v| v.is_empty()) {
        return Err(Error::InvalidArgument("validation set is empty".into()));
    }

    let mut model = init_model(&config.gcn)?;
    let mut adam = AdamState::new(config.adam(), model.params());
    let mut rng = rng_for(config.seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..train_data.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            let (loss, grads) = batch_gradients(&model, a_norm, train_data, batch)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_index + 1,
                });
            }
            loss_sum += loss * batch.len() as f64;
            adam_step(&mut model.params_mut(), &grads, &mut adam)?;
        }
        let val = val_data
            .map(|v| evaluate_prepared(&model, v, a_norm, config.positive_class))
            .transpose()?;
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train_data.len() as f64,
            val,
        });
    }
    Ok(TrainOutcome { model, history })
}

/// Mean loss over the batch and its parameter gradients.
fn batch_gradients(
    model: &GcnModel,
    a_norm: &NormalizedAdjacency,
    data: &PreparedSamples,
    batch: &[usize],
) -> Result<(f64, Vec<Matrix>)> {
    let scale = 1.0 / batch.len() as f64;
    let mut total = model
        .params()
        .iter()
        .map(|p| Matrix::zeros(p.rows(), p.cols()))
        .collect::<Vec<_>>();
    let mut loss = 0.0;
    for &i in batch {
        let (logits, cache) = forward(model, &data.features[i], a_norm)?;
        let (l, grad_logits) = softmax_cross_entropy(&logits, &[data.classes[i]])?;
        loss += l;
        for (acc, g) in total.iter_mut().zip(backward(model, &cache, &grad_logits)?) {
            acc.add_scaled(&g, scale)?;
        }
    }
    Ok((loss * scale, total))
}
