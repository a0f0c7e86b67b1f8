//! Synthetic inputs for the benchmarks.

use gbspam_core::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` rows of `p` features, about 40% positive. Features are mostly
/// zero-inflated like word-frequency columns; the label depends on a handful
/// of them plus noise.
pub fn spam_like(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p)
            .map(|_| {
                if rng.gen_bool(0.7) {
                    0.0
                } else {
                    (rng.gen_range(0.0f64..4.0) * 100.0).round() / 100.0
                }
            })
            .collect();
        let signal: f64 = row.iter().take(5).sum::<f64>() - row.iter().skip(5).take(5).sum::<f64>();
        labels.push(u8::from(signal + rng.gen_range(-1.0..1.0) > 0.3));
        rows.push(row);
    }
    Dataset::from_rows(&rows, labels).expect("synthetic rows are well formed")
}
