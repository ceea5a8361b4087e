//! Reference run of the synthetic benchmark: generate the seeded corpus,
//! train with default hyperparameters and evaluate all four setups.
//!
//! ```text
//! cargo run --release --example synthetic [SEED=7] [EPOCHS=100]
//! ```

use std::time::Instant;

use translit_norm::eval::synth::{generate, SynthConfig};
use translit_norm::eval::{evaluate, render_table};
use translit_norm::pipeline::prenormalize_lexicon;
use translit_norm::{seq2seq, DigitPhoneTable, EquivalenceClasses, SetupId, TrainingConfig};

fn main() {
    let arg = |i: usize, d: u64| {
        std::env::args()
            .nth(i)
            .and_then(|s| s.parse().ok())
            .unwrap_or(d)
    };
    let (seed, epochs) = (arg(1, 7), arg(2, 100) as usize);
    let corpus = generate(&SynthConfig {
        seed,
        ..Default::default()
    });
    let lexicon = prenormalize_lexicon(&corpus.lexicon, &DigitPhoneTable::default());
    let cfg = TrainingConfig {
        seed,
        epochs,
        ..Default::default()
    };
    let start = Instant::now();
    let (model, trace) = seq2seq::train_with(&lexicon, &cfg, |r| {
        eprintln!(
            "epoch {:3} loss {:.4} seq {:.3} val_seq {:.3} ({:.0}s)",
            r.epoch,
            r.loss,
            r.sequence_accuracy,
            r.val_sequence_accuracy.unwrap_or(0.0),
            start.elapsed().as_secs_f64()
        )
    })
    .unwrap();
    let eq = EquivalenceClasses::default_pairs();
    let reports: Vec<_> = SetupId::ALL
        .iter()
        .map(|&s| evaluate(&corpus.testset, Some(&model), &corpus.dictionary, &eq, s).unwrap())
        .collect();
    print!("{}", render_table(&reports));
    println!(
        "loss {:.4} -> {:.4}, {:.0}s",
        trace.epochs[0].loss,
        trace.epochs.last().unwrap().loss,
        start.elapsed().as_secs_f64()
    );
}
