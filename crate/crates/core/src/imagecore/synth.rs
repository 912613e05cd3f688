//! Synthetic imagery: ground-truth scenes, Gaussian defocus, split-blur
//! sensor pairs, and change overlays.

use rand::Rng;

use super::{BitDepth, Image};

/// Separable Gaussian blur with edge clamping, rounded back to integers.
pub fn gaussian_blur(image: &Image, sigma: f64) -> Image {
    if sigma <= 0.0 {
        return image.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= norm);

    let (w, h) = (image.width(), image.height());
    let src = image.to_reals();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &c)| c * src[y * w + clamp(x as isize + k as isize - radius, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &c)| c * tmp[clamp(y as isize + k as isize - radius, h) * w + x])
                .sum();
        }
    }
    Image::from_reals(w, h, image.depth(), out).expect("blur preserves shape")
}

/// Which part of the frame a sensor sees in focus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FocusRegion {
    Left,
    Right,
    Top,
    Bottom,
}

impl FocusRegion {
    pub const ALL: [FocusRegion; 4] = [
        FocusRegion::Left,
        FocusRegion::Right,
        FocusRegion::Top,
        FocusRegion::Bottom,
    ];

    fn in_focus(self, x: usize, y: usize, w: usize, h: usize) -> bool {
        match self {
            FocusRegion::Left => x < w / 2,
            FocusRegion::Right => x >= w / 2,
            FocusRegion::Top => y < h / 2,
            FocusRegion::Bottom => y >= h / 2,
        }
    }
}

/// Keeps `region` sharp and replaces the rest with a blurred copy.
pub fn defocus_outside(truth: &Image, region: FocusRegion, sigma: f64) -> Image {
    let blurred = gaussian_blur(truth, sigma);
    let (w, h) = (truth.width(), truth.height());
    Image::from_fn(w, h, truth.depth(), |x, y| {
        if region.in_focus(x, y, w, h) {
            truth.get(x, y)
        } else {
            blurred.get(x, y)
        }
    })
    .expect("same shape as truth")
}

/// Two partially informative views of `truth`: the first is sharp on the
/// left half and blurred on the right, the second the reverse.
pub fn split_blur_pair(truth: &Image, sigma: f64) -> (Image, Image) {
    (
        defocus_outside(truth, FocusRegion::Left, sigma),
        defocus_outside(truth, FocusRegion::Right, sigma),
    )
}

/// A piecewise-smooth scene with edges and fine texture, with gray levels in
/// `[0, max_level]`.
pub fn random_scene<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    depth: BitDepth,
    max_level: u32,
    rng: &mut R,
) -> Image {
    let max_level = f64::from(max_level.min(depth.max_value()));
    let (wf, hf) = (width as f64, height as f64);
    let base = rng.gen_range(0.2..0.5) * max_level;
    let gx = rng.gen_range(-0.2..0.2) * max_level / wf;
    let gy = rng.gen_range(-0.2..0.2) * max_level / hf;
    let mut field: Vec<f64> = (0..height)
        .flat_map(|y| (0..width).map(move |x| base + gx * x as f64 + gy * y as f64))
        .collect();

    let shapes = rng.gen_range(6..12);
    for _ in 0..shapes {
        let cx = rng.gen_range(0.0..wf);
        let cy = rng.gen_range(0.0..hf);
        let rx = rng.gen_range(0.05..0.3) * wf;
        let ry = rng.gen_range(0.05..0.3) * hf;
        let amp = rng.gen_range(-0.4..0.4) * max_level;
        let ellipse = rng.gen_bool(0.5);
        for y in 0..height {
            for x in 0..width {
                let dx = (x as f64 - cx) / rx;
                let dy = (y as f64 - cy) / ry;
                let inside = if ellipse {
                    dx * dx + dy * dy <= 1.0
                } else {
                    dx.abs() <= 1.0 && dy.abs() <= 1.0
                };
                if inside {
                    field[y * width + x] += amp;
                }
            }
        }
    }

    // stripes and speckle give every region some high-frequency content
    let period = rng.gen_range(3.0..7.0);
    let stripe_amp = rng.gen_range(0.03..0.08) * max_level;
    let angle: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let (s, c) = angle.sin_cos();
    for y in 0..height {
        for x in 0..width {
            let t = (x as f64 * c + y as f64 * s) * std::f64::consts::TAU / period;
            field[y * width + x] += stripe_amp * t.sin() + rng.gen_range(-0.04..0.04) * max_level;
        }
    }

    let clamped = field.into_iter().map(|v| v.clamp(0.0, max_level));
    Image::from_reals(width, height, depth, clamped).expect("generated shape is valid")
}

/// Uniform random levels in `[0, 2^bits)`: a change pattern whose
/// difference-image entropy is close to `bits`.
pub fn texture_overlay<R: Rng + ?Sized>(width: usize, height: usize, depth: BitDepth, bits: u32, rng: &mut R) -> Image {
    let levels = 1u32 << bits.min(depth.bits());
    Image::from_fn(width, height, depth, |_, _| rng.gen_range(0..levels)).expect("overlay shape is valid")
}

/// Pixel-wise saturating sum.
pub fn overlay(base: &Image, top: &Image) -> Image {
    let max = base.depth().max_value();
    Image::from_fn(base.width(), base.height(), base.depth(), |x, y| {
        (base.get(x, y) + top.get(x, y)).min(max)
    })
    .expect("same shape as base")
}
