use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{batch_loss, Batch, BatchStats, ModelParams, Weights};
use super::{Seq2SeqError, TrainingConfig};
use crate::charcodec::{self, build_alphabet, Side};
use crate::lexicon::ParallelLexicon;

/// Keras-style RMSprop: `acc ← ρ·acc + (1−ρ)·g²`, `w ← w − lr·g / (√acc + ε)`.
#[derive(Debug, Clone)]
pub struct RmsProp {
    lr: f64,
    rho: f64,
    eps: f64,
    acc: Vec<Vec<f64>>,
}

impl RmsProp {
    pub fn new(weights: &Weights, lr: f64, rho: f64, eps: f64) -> Self {
        Self {
            lr,
            rho,
            eps,
            acc: weights
                .tensors()
                .iter()
                .map(|t| vec![0.0; t.len()])
                .collect(),
        }
    }

    pub fn step(&mut self, weights: &mut Weights, grads: &Weights) {
        for ((w, g), acc) in weights
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(&mut self.acc)
        {
            for ((w, &g), a) in w.iter_mut().zip(g).zip(acc.iter_mut()) {
                *a = self.rho * *a + (1.0 - self.rho) * g * g;
                *w -= self.lr * g / (a.sqrt() + self.eps);
            }
        }
    }
}

/// Per-epoch metrics. Accuracies are teacher-forced: a position is correct
/// when the argmax prediction equals the gold symbol, a sequence when all of
/// its non-PAD positions are. Training metrics are accumulated over the
/// epoch's batches, each measured before its own update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub char_accuracy: f64,
    pub sequence_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_char_accuracy: Option<f64>,
    pub val_sequence_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingTrace {
    /// One JSON object per line, one line per epoch.
    pub fn to_jsonl(&self) -> String {
        self.epochs
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

/// Encoded pairs plus the alphabets and length they were encoded with.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub source: Vec<Vec<usize>>,
    pub target: Vec<Vec<usize>>,
    pub source_alphabet: charcodec::Alphabet,
    pub target_alphabet: charcodec::Alphabet,
    pub max_len: usize,
}

impl PreparedData {
    pub fn from_lexicon(pl: &ParallelLexicon) -> Result<Self, Seq2SeqError> {
        if pl.is_empty() {
            return Err(Seq2SeqError::EmptyLexicon);
        }
        let sources: Vec<&str> = pl.entries().iter().map(|e| e.source.as_str()).collect();
        let targets: Vec<&str> = pl.entries().iter().map(|e| e.target.as_str()).collect();
        let source_alphabet = build_alphabet(&sources, Side::Source)?;
        let target_alphabet = build_alphabet(&targets, Side::Target)?;
        let max_len = sources
            .iter()
            .chain(&targets)
            .map(|w| w.chars().count())
            .max()
            .unwrap_or(0);
        let encode_all = |words: &[&str], alphabet| -> Result<Vec<Vec<usize>>, Seq2SeqError> {
            words
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    charcodec::encode(w, alphabet, max_len)
                        .map(|e| e.indices)
                        .map_err(|source| Seq2SeqError::Entry { index: i, source })
                })
                .collect()
        };
        Ok(Self {
            source: encode_all(&sources, &source_alphabet)?,
            target: encode_all(&targets, &target_alphabet)?,
            source_alphabet,
            target_alphabet,
            max_len,
        })
    }

    fn batch(&self, rows: &[usize]) -> Batch {
        Batch {
            source: rows.iter().map(|&i| self.source[i].clone()).collect(),
            target: rows.iter().map(|&i| self.target[i].clone()).collect(),
        }
    }
}

pub fn train(
    pl: &ParallelLexicon,
    cfg: &TrainingConfig,
) -> Result<(ModelParams, TrainingTrace), Seq2SeqError> {
    train_with(pl, cfg, |_| {})
}

/// [`train`], calling `on_epoch` after every completed epoch.
pub fn train_with(
    pl: &ParallelLexicon,
    cfg: &TrainingConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(ModelParams, TrainingTrace), Seq2SeqError> {
    cfg.validate()?;
    let data = PreparedData::from_lexicon(pl)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut weights = Weights::initialized(
        data.source_alphabet.len(),
        data.target_alphabet.len(),
        cfg.hidden_dim,
        cfg.num_layers,
        cfg.init,
        &mut rng,
    );

    let mut order: Vec<usize> = (0..data.source.len()).collect();
    order.shuffle(&mut rng);
    let n_val = (order.len() as f64 * cfg.validation_fraction).floor() as usize;
    let n_val = n_val.min(order.len() - 1);
    let validation = order[..n_val].to_vec();
    let mut train_rows = order[n_val..].to_vec();

    let mut opt = RmsProp::new(&weights, cfg.learning_rate, cfg.rho, cfg.epsilon);
    let mut trace = TrainingTrace::default();
    for epoch in 1..=cfg.epochs {
        train_rows.shuffle(&mut rng);
        let mut stats = BatchStats::default();
        for chunk in train_rows.chunks(cfg.batch_size) {
            let mut grads = weights.zeros_like();
            let s = batch_loss(&weights, &data.batch(chunk), Some(&mut grads));
            opt.step(&mut weights, &grads);
            stats.merge(&s);
        }
        let val = (!validation.is_empty()).then(|| {
            let mut v = BatchStats::default();
            for chunk in validation.chunks(cfg.batch_size) {
                v.merge(&batch_loss(&weights, &data.batch(chunk), None));
            }
            v
        });
        let record = EpochRecord {
            epoch,
            loss: stats.mean_loss(),
            char_accuracy: ratio(stats.correct_positions, stats.positions),
            sequence_accuracy: ratio(stats.correct_sequences, stats.sequences),
            val_loss: val.map(|v| v.mean_loss()),
            val_char_accuracy: val.map(|v| ratio(v.correct_positions, v.positions)),
            val_sequence_accuracy: val.map(|v| ratio(v.correct_sequences, v.sequences)),
        };
        on_epoch(&record);
        trace.epochs.push(record);
    }

    let params = ModelParams {
        weights,
        source_alphabet: data.source_alphabet,
        target_alphabet: data.target_alphabet,
        max_len: data.max_len,
        config: cfg.clone(),
    };
    Ok((params, trace))
}
