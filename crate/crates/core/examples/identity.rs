//! Trains the copy task: 500 random lowercase words mapped to themselves,
//! with default hyperparameters.
//!
//! ```text
//! cargo run --release --example identity [EPOCHS=100] [MAX_WORD_LEN=6] [SEED=1]
//! ```

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use translit_norm::lexicon::{LexiconEntry, ParallelLexicon};
use translit_norm::seq2seq::{self, TrainingConfig};

fn main() {
    let arg = |i: usize, d: u64| {
        std::env::args()
            .nth(i)
            .and_then(|s| s.parse().ok())
            .unwrap_or(d)
    };
    let (epochs, hi, seed) = (arg(1, 100) as usize, arg(2, 6) as usize, arg(3, 1));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let words: Vec<String> = (0..500)
        .map(|_| {
            let n = rng.gen_range(3..=hi);
            (0..n).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
        })
        .collect();
    let pl = ParallelLexicon::new(
        words
            .iter()
            .map(|w| LexiconEntry {
                source: w.clone(),
                target: w.clone(),
            })
            .collect(),
    )
    .unwrap();
    let cfg = TrainingConfig {
        epochs,
        validation_fraction: 0.0,
        seed,
        ..Default::default()
    };
    let start = Instant::now();
    let (model, trace) = seq2seq::train_with(&pl, &cfg, |r| {
        eprintln!(
            "epoch {:3} loss {:.4} char {:.3} seq {:.3} ({:.1}s)",
            r.epoch,
            r.loss,
            r.char_accuracy,
            r.sequence_accuracy,
            start.elapsed().as_secs_f64()
        )
    })
    .unwrap();
    let correct = words
        .iter()
        .filter(|w| seq2seq::infer(&model, w).unwrap() == **w)
        .count();
    println!(
        "exact {}/500, loss {:.4} -> {:.4}, {:.1}s",
        correct,
        trace.epochs[0].loss,
        trace.epochs.last().unwrap().loss,
        start.elapsed().as_secs_f64()
    );
}
