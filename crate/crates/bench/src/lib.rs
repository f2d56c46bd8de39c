//! Seeded workloads shared by the benchmarks.

use factorgm::{fixtures, GraphicalModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random-unary grid with a shared truncated absolute difference coupling.
pub fn grid(rows: usize, cols: usize, labels: usize, seed: u64) -> GraphicalModel {
    fixtures::random_grid(&mut ChaCha8Rng::seed_from_u64(seed), rows, cols, labels)
}

/// Small mixed-encoding model the oracle can enumerate quickly.
pub fn small_model(seed: u64) -> GraphicalModel {
    let config = fixtures::RandomModelConfig {
        max_variables: 10,
        max_labels: 3,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = fixtures::random_model(&mut rng, factorgm::Semiring::MinSum, &config);
        if m.num_variables() >= 8 {
            return m;
        }
    }
}
