//! Fixtures shared by the integration test targets.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use translit_norm::charcodec::{self, Alphabet, Side};
use translit_norm::seq2seq::{batch_loss, Batch, ModelParams, TrainingConfig, Weights};

pub fn tiny_alphabets() -> (Alphabet, Alphabet) {
    // 5 symbols each: source PAD + 4 letters, target PAD/START/END + 2 letters
    let src = Alphabet::from_symbols(Side::Source, vec!['a', 'b', 'c', 'd']).unwrap();
    let tgt = Alphabet::from_symbols(Side::Target, vec!['x', 'y']).unwrap();
    (src, tgt)
}

pub fn random_model(seed: u64, hidden: usize, layers: usize, scale: f64) -> ModelParams {
    let (source_alphabet, target_alphabet) = tiny_alphabets();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Weights::uniform(
        source_alphabet.len(),
        target_alphabet.len(),
        hidden,
        layers,
        0.08,
        &mut rng,
    );
    for t in weights.tensors_mut() {
        t.iter_mut().for_each(|v| *v *= scale);
    }
    ModelParams {
        weights,
        source_alphabet,
        target_alphabet,
        max_len: 5,
        config: TrainingConfig {
            hidden_dim: hidden,
            num_layers: layers,
            ..Default::default()
        },
    }
}

pub fn tiny_batch(model: &ModelParams) -> Batch {
    let pairs = [("abc", "xy"), ("d", "yyxyx"), ("", "x"), ("abcda", "")];
    Batch {
        source: pairs
            .iter()
            .map(|(s, _)| {
                charcodec::encode(s, &model.source_alphabet, 5)
                    .unwrap()
                    .indices
            })
            .collect(),
        target: pairs
            .iter()
            .map(|(_, t)| {
                charcodec::encode(t, &model.target_alphabet, 5)
                    .unwrap()
                    .indices
            })
            .collect(),
    }
}

/// Central finite differences (step 1e-5) against the analytic gradient of
/// the full masked loss, for every parameter. Returns the worst relative
/// error and the number of parameters checked.
pub fn gradient_check(model: &mut ModelParams, batch: &Batch) -> (f64, usize) {
    let mut grads = model.weights.zeros_like();
    batch_loss(&model.weights, batch, Some(&mut grads));
    let analytic: Vec<f64> = grads.tensors().iter().flat_map(|t| t.to_vec()).collect();

    let step = 1e-5;
    let mut worst: f64 = 0.0;
    let mut k = 0;
    for t in 0..model.weights.tensors().len() {
        for j in 0..model.weights.tensors()[t].len() {
            let orig = model.weights.tensors()[t][j];
            model.weights.tensors_mut()[t][j] = orig + step;
            let up = batch_loss(&model.weights, batch, None).mean_loss();
            model.weights.tensors_mut()[t][j] = orig - step;
            let down = batch_loss(&model.weights, batch, None).mean_loss();
            model.weights.tensors_mut()[t][j] = orig;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic[k];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
            k += 1;
        }
    }
    (worst, k)
}
