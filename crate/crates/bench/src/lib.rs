//! Shared inputs for the criterion benches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use visnet::imagecore::synth::random_scene;
use visnet::imagecore::{BitDepth, Image};
use visnet::scenario::ScenarioConfig;

/// A reproducible 8-bit test scene.
pub fn scene(size: usize, seed: u64) -> Image {
    random_scene(size, size, BitDepth::Eight, 255, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A small connected scenario that finishes in well under a second.
pub fn small_scenario() -> ScenarioConfig {
    let mut config = ScenarioConfig::default();
    for (key, value) in [
        ("num_nodes", "6"),
        ("comm_radius_m", "100"),
        ("node_battery_mv", "1000"),
        ("image_size", "32"),
    ] {
        config.set(key, value).expect("valid setting");
    }
    config
}
