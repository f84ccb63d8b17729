//! Seeded random one-ports shared by the integration tests.

#![allow(dead_code)]

use alphaport::circuit::CircuitBuilder;
use alphaport::{Characteristic, Circuit};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected one-port on `3..=max_nodes` nodes: a path `a → … → b` through
/// every internal node in random order plus a few random chords.
pub fn random_circuit(rng: &mut ChaCha8Rng, max_nodes: usize) -> Circuit {
    let n = rng.random_range(3..=max_nodes);
    let mut internal: Vec<String> = (1..n - 1).map(|k| format!("n{k}")).collect();
    internal.shuffle(rng);
    let mut order = vec!["a".to_string()];
    order.extend(internal);
    order.push("b".to_string());

    let mut b = CircuitBuilder::new("a", "b");
    for pair in order.windows(2) {
        let w = rng.random_range(1..=2);
        b.branch_with(&pair[0], &pair[1], w).expect("positive multiplicity");
    }
    let extra = rng.random_range(1..=n);
    for _ in 0..extra {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n);
        while j == i {
            j = rng.random_range(0..n);
        }
        b.branch(&order[i], &order[j]);
    }
    b.build()
}

/// `D₁ v^{α₁} + D₂ v^{α₂}` with `α₁ ∈ [lo, hi]` and a gap in `[gap_lo, gap_hi]`.
pub fn random_two_term(
    rng: &mut ChaCha8Rng,
    (lo, hi): (f64, f64),
    (gap_lo, gap_hi): (f64, f64),
) -> Characteristic {
    let a1 = rng.random_range(lo..=hi);
    let a2 = a1 + rng.random_range(gap_lo..=gap_hi);
    let d1 = rng.random_range(0.5..=2.0);
    let d2 = rng.random_range(0.5..=2.0);
    Characteristic::from_pairs(&[(d1, a1), (d2, a2)]).expect("positive terms")
}
