//! Small synthetic datasets whose labels are fixed by a single reading.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tactile_gcn::dataset::{DatasetSplit, GraspSample, Label, Orientation, SplitKind};

/// Balanced set of `n` grasps. Index electrode 1 reads around 3000 for
/// slippery grasps and around 1000 for stable ones; every other electrode is
/// uniform noise, so the classes are linearly separable on one feature.
pub fn separable_split(n: usize, seed: u64, kind: SplitKind) -> DatasetSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|i| {
            let label = if i % 2 == 0 { Label::Stable } else { Label::Slippery };
            let mut readings = [0i64; 72];
            for r in readings.iter_mut() {
                *r = rng.random_range(1500..2500);
            }
            let centre = if label == Label::Slippery { 3000 } else { 1000 };
            readings[0] = centre + rng.random_range(-300..=300);
            GraspSample {
                object_id: format!("obj{}", i % 7),
                orientation: Orientation::ALL[(i / 2) % 3],
                readings,
                label,
            }
        })
        .collect();
    DatasetSplit::new(samples, kind)
}
