//! Per-round sensor frames, ground truth and critical templates.
//!
//! A directory feed holds PGM files and a `manifest.txt` with lines
//!
//! ```text
//! frame <round> <node> <file>
//! truth <round> <file>
//! template <file>
//! ```
//!
//! Round 0 is the reference capture; rounds `1..` follow the sensing
//! schedule.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{io_err, Result, ScenarioConfig, ScenarioError};
use crate::imagecore::synth::{defocus_outside, random_scene, texture_overlay, FocusRegion};
use crate::imagecore::{load_pgm, save_pgm, BitDepth, Image};
use crate::netsim::NodeId;

pub const MANIFEST: &str = "manifest.txt";

/// Gray levels of the base scene and of every change pattern stay at or
/// below this, so one signed step always fits in 8 bits.
const HALF_RANGE: u32 = 127;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ImageFeed {
    frames: BTreeMap<(usize, NodeId), Image>,
    truths: BTreeMap<usize, Image>,
    pub templates: Vec<Image>,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

/// Adds `change` where the sum fits, subtracts it elsewhere, so the
/// absolute difference to the input is exactly `change`.
fn apply_change(frame: &Image, change: &Image) -> Image {
    let max = frame.depth().max_value();
    Image::from_fn(frame.width(), frame.height(), frame.depth(), |x, y| {
        let (p, e) = (frame.get(x, y), change.get(x, y));
        if p + e <= max {
            p + e
        } else {
            p - e
        }
    })
    .expect("same shape as frame")
}

impl ImageFeed {
    /// Builds the in-memory feed for `config`.
    ///
    /// Every sensor sees a shared base scene, sharp in one quadrant-half
    /// and blurred elsewhere. Each scheduled round brings one scene change:
    /// a critical template with probability `critical_fraction`, otherwise
    /// a random texture of 3 to 7 bits. Each sensor notices a change
    /// independently with probability `active_fraction`. Draws are keyed
    /// by round and node id, so adding nodes leaves existing frames alone.
    pub fn synthetic(config: &ScenarioConfig, seed: u64) -> Self {
        let size = config.image_size;
        let depth = BitDepth::Eight;
        let rounds = config.schedule().len();
        let base = random_scene(size, size, depth, HALF_RANGE, &mut stream(seed, 10));
        let mut template_rng = stream(seed, 11);
        let templates: Vec<Image> = (0..config.critical_templates)
            .map(|_| texture_overlay(size, size, depth, 7, &mut template_rng))
            .collect();

        let mut event_rng = stream(seed, 12);
        let changes: Vec<Image> = (0..rounds)
            .map(|_| {
                let critical = !templates.is_empty() && event_rng.gen_bool(config.critical_fraction);
                if critical {
                    templates[event_rng.gen_range(0..templates.len())].clone()
                } else {
                    let bits = event_rng.gen_range(3..=7);
                    texture_overlay(size, size, depth, bits, &mut event_rng)
                }
            })
            .collect();

        let mut feed = ImageFeed {
            templates,
            ..ImageFeed::default()
        };
        let mut truth = base.clone();
        feed.truths.insert(0, truth.clone());
        for (r, change) in changes.iter().enumerate() {
            truth = apply_change(&truth, change);
            feed.truths.insert(r + 1, truth.clone());
        }
        for node in 1..config.num_nodes {
            let region = FocusRegion::ALL[node % FocusRegion::ALL.len()];
            let mut frame = defocus_outside(&base, region, config.blur_sigma);
            feed.frames.insert((0, node), frame.clone());
            for (r, change) in changes.iter().enumerate() {
                let mut vis = ChaCha8Rng::seed_from_u64(mix(seed ^ mix(((r as u64 + 1) << 32) | node as u64)));
                if vis.gen_bool(config.active_fraction) {
                    frame = apply_change(&frame, change);
                }
                feed.frames.insert((r + 1, node), frame.clone());
            }
        }
        feed
    }

    pub fn frame(&self, round: usize, node: NodeId) -> Result<&Image> {
        self.frames
            .get(&(round, node))
            .ok_or(ScenarioError::MissingFrame { round, node })
    }

    pub fn truth(&self, round: usize) -> Option<&Image> {
        self.truths.get(&round)
    }

    pub fn insert_frame(&mut self, round: usize, node: NodeId, image: Image) {
        self.frames.insert((round, node), image);
    }

    pub fn insert_truth(&mut self, round: usize, image: Image) {
        self.truths.insert(round, image);
    }

    /// Checks that every round of the schedule has a frame for every
    /// sensor.
    pub fn check_covers(&self, config: &ScenarioConfig) -> Result<()> {
        for round in 0..=config.schedule().len() {
            for node in 1..config.num_nodes {
                self.frame(round, node)?;
            }
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&manifest).map_err(io_err(&manifest))?;
        let mut feed = ImageFeed::default();
        let bad = |n: usize, line: &str| {
            ScenarioError::Feed(format!("{}:{}: cannot parse {line:?}", manifest.display(), n + 1))
        };
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let int = |s: &str| s.parse::<usize>().map_err(|_| bad(n, raw));
            match fields.as_slice() {
                ["frame", round, node, file] => {
                    let image = load_pgm(dir.join(file))?;
                    feed.frames.insert((int(round)?, int(node)?), image);
                }
                ["truth", round, file] => {
                    let image = load_pgm(dir.join(file))?;
                    feed.truths.insert(int(round)?, image);
                }
                ["template", file] => feed.templates.push(load_pgm(dir.join(file))?),
                _ => return Err(bad(n, raw)),
            }
        }
        if feed.frames.is_empty() {
            return Err(ScenarioError::Feed(format!("{} lists no frames", manifest.display())));
        }
        Ok(feed)
    }

    /// Writes every image as PGM plus the manifest.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut manifest = String::from("# round 0 is the reference capture\n");
        for (&(round, node), image) in &self.frames {
            let file = format!("frame_r{round:03}_n{node:03}.pgm");
            save_pgm(image, dir.join(&file))?;
            let _ = writeln!(manifest, "frame {round} {node} {file}");
        }
        for (&round, image) in &self.truths {
            let file = format!("truth_r{round:03}.pgm");
            save_pgm(image, dir.join(&file))?;
            let _ = writeln!(manifest, "truth {round} {file}");
        }
        for (k, image) in self.templates.iter().enumerate() {
            let file = format!("template_{k:02}.pgm");
            save_pgm(image, dir.join(&file))?;
            let _ = writeln!(manifest, "template {file}");
        }
        let path = dir.join(MANIFEST);
        std::fs::write(&path, manifest).map_err(io_err(&path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::difference;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            image_size: 16,
            num_nodes: 4,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn change_difference_is_exact() {
        let frame = Image::new(2, 2, BitDepth::Eight, vec![0, 200, 128, 255]).unwrap();
        let change = Image::new(2, 2, BitDepth::Eight, vec![127, 100, 127, 0]).unwrap();
        let next = apply_change(&frame, &change);
        assert_eq!(next.pixels(), &[127, 100, 255, 255]);
        assert_eq!(difference(&next, &frame).unwrap(), change);
    }

    #[test]
    fn synthetic_feed_covers_schedule() {
        let c = small();
        let feed = ImageFeed::synthetic(&c, 3);
        feed.check_covers(&c).unwrap();
        assert_eq!(feed.templates.len(), 2);
        assert!(feed.truth(4).is_some());
        assert!(feed.frame(0, 0).is_err());
    }

    #[test]
    fn frames_change_by_whole_events() {
        let c = ScenarioConfig {
            critical_fraction: 1.0,
            active_fraction: 1.0,
            ..small()
        };
        let feed = ImageFeed::synthetic(&c, 5);
        for node in 1..4 {
            for r in 1..=4 {
                let d = difference(feed.frame(r, node).unwrap(), feed.frame(r - 1, node).unwrap()).unwrap();
                assert!(feed.templates.contains(&d), "round {r} node {node}");
            }
        }
    }

    #[test]
    fn adding_nodes_keeps_existing_frames() {
        let a = ImageFeed::synthetic(&small(), 9);
        let b = ImageFeed::synthetic(
            &ScenarioConfig {
                num_nodes: 7,
                ..small()
            },
            9,
        );
        for r in 0..=4 {
            for n in 1..4 {
                assert_eq!(a.frame(r, n).unwrap(), b.frame(r, n).unwrap());
            }
        }
    }

    #[test]
    fn directory_round_trip() {
        let c = small();
        let feed = ImageFeed::synthetic(&c, 1);
        let dir = tempfile::tempdir().unwrap();
        feed.save(dir.path()).unwrap();
        assert_eq!(ImageFeed::load(dir.path()).unwrap(), feed);
    }

    #[test]
    fn broken_manifest_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(MANIFEST), "frame x\n").unwrap();
        assert!(matches!(ImageFeed::load(dir.path()), Err(ScenarioError::Feed(_))));
        assert!(matches!(
            ImageFeed::load(dir.path().join("nope")),
            Err(ScenarioError::Io { .. })
        ));
    }
}
