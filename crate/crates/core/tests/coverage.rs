//! One-sided Clopper–Pearson bounds cover the true rate at least 1 - alpha
//! of the time.

use adds_core::stats::clopper_pearson_lower;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lower_bound_exceeds_truth_rarely() {
    let trials = 1000usize;
    let n = 100u64;
    for (alpha, p) in [(0.05, 0.7), (0.05, 0.95), (0.1, 0.5), (0.01, 0.85)] {
        let mut rng = ChaCha8Rng::seed_from_u64((alpha * 1e4) as u64 ^ (p * 1e4) as u64);
        let misses = (0..trials)
            .filter(|_| {
                let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                clopper_pearson_lower(k, n, alpha).unwrap() > p
            })
            .count();
        let rate = misses as f64 / trials as f64;
        let limit = alpha + 3.0 * (alpha / trials as f64).sqrt();
        assert!(
            rate <= limit,
            "alpha={alpha} p={p}: miss rate {rate} > {limit}"
        );
    }
}
