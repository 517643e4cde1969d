//! Deterministic random substreams.
//!
//! Every Monte Carlo draw in the crate is addressed by a path of integers
//! (master seed, point, method, phase, sample index, ...). The path is mixed
//! into a ChaCha8 seed, so a draw never depends on which worker produced it
//! or in what order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type SampleRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A position in the substream tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(master_seed: u64) -> Self {
        StreamKey(splitmix64(master_seed))
    }

    /// Descend one level in the tree.
    pub fn child(self, index: u64) -> Self {
        StreamKey(splitmix64(
            self.0 ^ splitmix64(index.wrapping_add(0x6A09_E667_F3BC_C909)),
        ))
    }

    pub fn path(master_seed: u64, indices: &[u64]) -> Self {
        indices
            .iter()
            .fold(StreamKey::new(master_seed), |key, &i| key.child(i))
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> SampleRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Split `count` independent generators off `rng` (used when a trajectory
/// forks into vote branches). Consumes one draw from `rng`.
pub fn fork(rng: &mut SampleRng, count: usize) -> Vec<SampleRng> {
    let base = StreamKey(rng.next_u64());
    (0..count as u64).map(|j| base.child(j).rng()).collect()
}

pub fn standard_normal_vec<R: rand::Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

/// A uniformly random direction on the unit sphere in `d` dimensions.
pub fn unit_direction<R: rand::Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v = standard_normal_vec(rng, d);
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn paths_are_deterministic_and_distinct() {
        let a = StreamKey::path(7, &[1, 2, 3]);
        assert_eq!(a, StreamKey::path(7, &[1, 2, 3]));
        assert_ne!(a, StreamKey::path(7, &[1, 2, 4]));
        assert_ne!(a, StreamKey::path(8, &[1, 2, 3]));
        assert_ne!(StreamKey::path(7, &[1, 0]), StreamKey::path(7, &[0, 1]));
        let x: f64 = a.rng().random();
        let y: f64 = StreamKey::path(7, &[1, 2, 3]).rng().random();
        assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn unit_direction_has_unit_norm() {
        let mut rng = StreamKey::new(3).rng();
        for d in 1..6 {
            let u = unit_direction(&mut rng, d);
            let n: f64 = u.iter().map(|a| a * a).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
