//! Mini-batch training with seeded initialization.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::backprop::{backward, visit_tensors_mut, BatchSample};
use super::cell::CellKind;
use super::model::RnnModel;
use crate::error::{Error, Result};
use crate::featurize::{FeatureSequence, Standardizer};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<S> {
    pub cell: CellKind,
    pub hidden_width: usize,
    pub learning_rate: S,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub beta1: S,
    pub beta2: S,
    pub epsilon: S,
}

impl<S: Scalar> Default for TrainConfig<S> {
    fn default() -> Self {
        let adam = AdamConfig::<S>::default();
        TrainConfig {
            cell: CellKind::Lstm,
            hidden_width: 64,
            learning_rate: adam.learning_rate,
            epochs: 50,
            batch_size: 32,
            seed: 42,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
        }
    }
}

impl<S: Scalar> TrainConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= S::zero() {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.hidden_width < 1 {
            return Err(Error::Config("hidden_width must be at least 1".into()));
        }
        let one = S::one();
        if self.beta1 <= S::zero() || self.beta1 >= one || self.beta2 <= S::zero() || self.beta2 >= one
        {
            return Err(Error::Config("adam betas must lie in (0, 1)".into()));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig<S> {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// A raw training sample: standardization (if any) already applied.
#[derive(Debug, Clone)]
pub struct TrainSample<S> {
    pub vectors: Vec<Vec<S>>,
    pub malicious: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutput<S> {
    pub model: RnnModel<S>,
    /// Mean BCE per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Initialize all parameters uniformly in [−1/√hidden, +1/√hidden].
pub fn init_model<S: Scalar>(
    cell: CellKind,
    schema_id: crate::featurize::SchemaId,
    hidden_width: usize,
    seed: u64,
) -> RnnModel<S> {
    let mut model = RnnModel::zeros(cell, schema_id, hidden_width);
    let bound = 1.0 / (hidden_width as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    visit_tensors_mut(&mut model.params, &mut model.output, &mut |slice| {
        for v in slice {
            *v = S::from_f64(rng.random_range(-bound..bound));
        }
    });
    model
}

/// Train on pre-encoded samples sharing one schema.
///
/// Each epoch shuffles the dataset, groups sequences into length buckets,
/// and splits buckets into mini-batches padded to the bucket's longest
/// sequence; padded steps are masked out of both the forward pass and
/// the gradients. Single-threaded and seeded, so two runs with the same
/// inputs produce identical parameters.
pub fn train_samples<S: Scalar>(
    samples: &[TrainSample<S>],
    schema_id: crate::featurize::SchemaId,
    config: &TrainConfig<S>,
) -> Result<TrainOutput<S>> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::Partition("training set is empty".into()));
    }
    let n_malicious = samples.iter().filter(|s| s.malicious).count();
    if n_malicious == 0 || n_malicious == samples.len() {
        return Err(Error::Partition(format!(
            "training needs both classes; got {n_malicious} malicious of {}",
            samples.len()
        )));
    }
    let width = schema_id.width();
    for sample in samples {
        if sample.vectors.is_empty() {
            return Err(Error::Shape("training sample has no vectors".into()));
        }
        if sample.vectors.iter().any(|v| v.len() != width) {
            return Err(Error::Shape(format!(
                "training vector width does not match schema {schema_id}"
            )));
        }
    }

    let mut model = init_model(config.cell, schema_id, config.hidden_width, config.seed);
    let mut optimizer = AdamState::new(&model);
    let adam = config.adam();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..samples.len()).collect();

    for epoch in 0..config.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive_seed(config.seed, epoch as u64));
        order.shuffle(&mut rng);
        // Stable sort by length bucket keeps the shuffle order within a
        // bucket while letting batches pad against similar lengths.
        order.sort_by_key(|&i| length_bucket(samples[i].vectors.len()));
        let mut batches: Vec<&[usize]> = order.chunks(config.batch_size).collect();
        batches.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut batch_count = 0.0;
        for batch_idx in batches {
            let max_len = batch_idx
                .iter()
                .map(|&i| samples[i].vectors.len())
                .max()
                .expect("non-empty batch");
            let padded: Vec<(Vec<Vec<S>>, Vec<bool>, bool)> = batch_idx
                .iter()
                .map(|&i| {
                    let sample = &samples[i];
                    let mut vectors = sample.vectors.clone();
                    let mut mask = vec![true; vectors.len()];
                    vectors.resize(max_len, vec![S::zero(); width]);
                    mask.resize(max_len, false);
                    (vectors, mask, sample.malicious)
                })
                .collect();
            let batch: Vec<BatchSample<'_, S>> = padded
                .iter()
                .map(|(vectors, mask, malicious)| BatchSample {
                    vectors,
                    mask: Some(mask),
                    malicious: *malicious,
                })
                .collect();
            let (grads, loss) = backward(&model, &batch)?;
            optimizer.step(&mut model, &grads, &adam);
            loss_sum += loss.to_f64_lossy();
            batch_count += 1.0;
        }
        let epoch_loss = loss_sum / batch_count;
        if !epoch_loss.is_finite() {
            return Err(Error::Numeric(format!(
                "training diverged at epoch {epoch}: loss is not finite"
            )));
        }
        epoch_losses.push(epoch_loss);
    }

    Ok(TrainOutput {
        model,
        epoch_losses,
    })
}

/// Power-of-two length buckets: 1, 2, 3-4, 5-8, 9-16, ...
fn length_bucket(len: usize) -> u32 {
    usize::BITS - len.next_power_of_two().leading_zeros()
}

/// Train on feature sequences; the machine schema additionally fits
/// standardization statistics on this (training) data and stores them in
/// the model.
pub fn train(dataset: &[FeatureSequence], config: &TrainConfig<f64>) -> Result<TrainOutput<f64>> {
    let schema_id = match dataset.first() {
        Some(seq) => seq.schema_id,
        None => return Err(Error::Partition("training set is empty".into())),
    };
    if dataset.iter().any(|s| s.schema_id != schema_id) {
        return Err(Error::Schema("training set mixes schemas".into()));
    }

    let normalization = if schema_id == crate::featurize::SchemaId::Machine10 {
        let rows: Vec<Vec<f64>> = dataset
            .iter()
            .flat_map(|seq| seq.vectors.iter().cloned())
            .collect();
        Some(Standardizer::fit(&rows)?)
    } else {
        None
    };

    let samples: Vec<TrainSample<f64>> = dataset
        .iter()
        .map(|seq| {
            let mut vectors = seq.vectors.clone();
            if let Some(stats) = &normalization {
                for row in &mut vectors {
                    stats.apply(row);
                }
            }
            TrainSample {
                vectors,
                malicious: seq.label.is_malicious(),
            }
        })
        .collect();

    let mut output = train_samples(&samples, schema_id, config)?;
    output.model.normalization = normalization;
    Ok(output)
}
