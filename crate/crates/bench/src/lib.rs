//! Instance generators shared by the criterion benchmarks in `benches/`.

use mpisp_core::instance::{Instance, PeriodGrid, Supplier, TravelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Clustered Euclidean instance with 100-unit periods and Solomon-like
/// window widths.
pub fn instance(n: usize, w: usize, m: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let length = 240.0;
    let horizon = length * w as f64;
    let centres: Vec<(f64, f64)> = (0..8).map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect();
    let suppliers = (1..=n)
        .map(|id| {
            let (cx, cy) = centres[rng.gen_range(0..centres.len())];
            let mid = rng.gen_range(0.0..horizon);
            let half = rng.gen_range(15.0..90.0);
            Supplier {
                id,
                x: (cx + rng.gen_range(-8.0..8.0)).clamp(0.0, 100.0),
                y: (cy + rng.gen_range(-8.0..8.0)).clamp(0.0, 100.0),
                workload: (rng.gen_range(1..=5) * 10) as f64,
                service: 10.0,
                ready: (mid - half).max(0.0),
                due: (mid + half).min(horizon),
            }
        })
        .collect();
    Instance::new(
        format!("bench-{n}-w{w}-m{m}"),
        (50.0, 50.0),
        suppliers,
        m,
        200.0,
        PeriodGrid::new(w, length).expect("positive period length"),
        TravelSpec::Euclidean { round_to: None },
    )
    .expect("generated instance is valid")
}
