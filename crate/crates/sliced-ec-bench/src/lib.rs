//! Shared fixtures for the benchmarks.

use rand::Rng;

use sliced_ec::quantizer::IntervalPartition;
use sliced_ec::slicing::{SliceDesign, SliceSystem};
use sliced_ec::ChannelParams;

/// The optimized SNR 3, 16-interval ladder, pinned so benchmarks do not
/// time the optimizer while setting up.
pub fn snr3_partition() -> IntervalPartition {
    let upper = [
        0.254237, 0.514218, 0.786682, 1.080856, 1.411559, 1.807692, 2.347211,
    ];
    let mut thresholds: Vec<f64> = upper.iter().rev().map(|&u| -u).collect();
    thresholds.push(0.0);
    thresholds.extend_from_slice(&upper);
    IntervalPartition::new(thresholds).expect("fixed ladder is valid")
}

pub fn snr3_system() -> SliceSystem {
    let params = ChannelParams::from_snr(3.0).expect("snr 3 is valid");
    SliceSystem::build(SliceDesign::new(params, snr3_partition()).expect("t = 16"))
        .expect("system builds")
}

/// A BSC(e) pair of bit strings for correction benchmarks.
pub fn bsc_pair(len: usize, error_rate: f64, seed: u64) -> (Vec<u8>, Vec<u8>) {
    let mut rng = sliced_ec::rng::seeded(seed);
    let alice: Vec<u8> = (0..len).map(|_| rng.gen_range(0..=1u8)).collect();
    let bob = alice
        .iter()
        .map(|&b| if rng.gen_bool(error_rate) { b ^ 1 } else { b })
        .collect();
    (alice, bob)
}
