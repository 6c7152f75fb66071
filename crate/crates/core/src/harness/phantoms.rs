//! Procedural test images shipped in place of copyrighted photographs.
//!
//! The natural-scene surrogate is a dead-leaves model: occluding shapes with
//! power-law sizes, smooth shading and a little oriented texture. Such images reproduce the edge statistics and
//! approximate 1/f spectrum of photographs. The brain phantom is a set of
//! nested ellipses with a folded cortical band on a zero background.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linops::Image;

/// Seed of the shipped natural-scene image.
pub const NATURAL_SEED: u64 = 20120901;

enum Shape {
    Disc {
        cx: f64,
        cy: f64,
        r: f64,
    },
    Ellipse {
        cx: f64,
        cy: f64,
        a: f64,
        b: f64,
        cos: f64,
        sin: f64,
    },
    Rect {
        cx: f64,
        cy: f64,
        a: f64,
        b: f64,
        cos: f64,
        sin: f64,
    },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Disc { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Ellipse { cx, cy, a, b, cos, sin } => {
                let (u, v) = rotate(x - cx, y - cy, cos, sin);
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            }
            Shape::Rect { cx, cy, a, b, cos, sin } => {
                let (u, v) = rotate(x - cx, y - cy, cos, sin);
                u.abs() <= a && v.abs() <= b
            }
        }
    }

    fn center(&self) -> (f64, f64) {
        match *self {
            Shape::Disc { cx, cy, .. } | Shape::Ellipse { cx, cy, .. } | Shape::Rect { cx, cy, .. } => (cx, cy),
        }
    }
}

fn rotate(x: f64, y: f64, cos: f64, sin: f64) -> (f64, f64) {
    (x * cos + y * sin, -x * sin + y * cos)
}

struct Leaf {
    shape: Shape,
    base: f64,
    grad: (f64, f64),
    texture: Option<(f64, f64, f64)>,
}

impl Leaf {
    fn value(&self, x: f64, y: f64) -> f64 {
        let (cx, cy) = self.shape.center();
        let mut v = self.base + self.grad.0 * (x - cx) + self.grad.1 * (y - cy);
        if let Some((kx, ky, amp)) = self.texture {
            v += amp * (kx * x + ky * y).sin();
        }
        v
    }
}

impl Shape {
    /// Half-extent of an axis-aligned box containing the shape.
    fn radius(&self) -> f64 {
        match *self {
            Shape::Disc { r, .. } => r,
            Shape::Ellipse { a, .. } => a,
            Shape::Rect { a, b, .. } => a.hypot(b),
        }
    }
}

fn random_leaf(rng: &mut ChaCha8Rng, s: f64) -> Leaf {
    let (rmin, rmax) = (0.02 * s, 0.35 * s);
    // Inverse-CDF sample from density ~ r^-3 on [rmin, rmax].
    let u: f64 = rng.random();
    let r = 1.0 / ((1.0 - u) / (rmin * rmin) + u / (rmax * rmax)).sqrt();
    let cx = rng.random_range(0.0..s);
    let cy = rng.random_range(0.0..s);
    let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (cos, sin) = (angle.cos(), angle.sin());
    let aspect: f64 = rng.random_range(0.35..1.0);
    let shape = match rng.random_range(0..3) {
        0 => Shape::Disc { cx, cy, r },
        1 => Shape::Ellipse {
            cx,
            cy,
            a: r,
            b: r * aspect,
            cos,
            sin,
        },
        _ => Shape::Rect {
            cx,
            cy,
            a: r,
            b: r * aspect,
            cos,
            sin,
        },
    };
    let base = rng.random_range(20.0..235.0);
    let slope = rng.random_range(0.0..40.0) / r.max(1.0);
    let dir: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let texture = if rng.random_bool(0.15) {
        let period = rng.random_range(3.0..9.0) * s / 256.0;
        let k = std::f64::consts::TAU / period.max(2.5);
        let td: f64 = rng.random_range(0.0..std::f64::consts::PI);
        Some((k * td.cos(), k * td.sin(), rng.random_range(4.0..14.0)))
    } else {
        None
    };
    Leaf {
        shape,
        base,
        grad: (slope * dir.cos(), slope * dir.sin()),
        texture,
    }
}

/// Dead-leaves natural-scene surrogate of size `size`x`size`, values in [0, 255].
///
/// Leaves are drawn front to back; each one only paints samples that are
/// still uncovered, until the plane is full.
pub fn natural_scene(size: usize, seed: u64) -> Image {
    const SUB: usize = 3;
    const MAX_LEAVES: usize = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let side = size * SUB;
    let mut samples: Vec<Option<f64>> = vec![None; side * side];
    let mut uncovered = samples.len();
    let mut drawn = 0;
    while uncovered > 0 && drawn < MAX_LEAVES {
        drawn += 1;
        let leaf = random_leaf(&mut rng, s);
        let (cx, cy) = leaf.shape.center();
        let r = leaf.shape.radius();
        let lo = |c: f64| (((c - r) * SUB as f64).floor().max(0.0)) as usize;
        let hi = |c: f64| ((((c + r) * SUB as f64).ceil()) as usize).min(side);
        for i in lo(cy)..hi(cy) {
            let y = (i as f64 + 0.5) / SUB as f64;
            for j in lo(cx)..hi(cx) {
                let cell = &mut samples[i * side + j];
                if cell.is_some() {
                    continue;
                }
                let x = (j as f64 + 0.5) / SUB as f64;
                if leaf.shape.contains(x, y) {
                    *cell = Some(leaf.value(x, y));
                    uncovered -= 1;
                }
            }
        }
    }

    let mut pixels = vec![0.0; size * size];
    for row in 0..size {
        for col in 0..size {
            let mut acc = 0.0;
            for i in 0..SUB {
                for j in 0..SUB {
                    acc += samples[(row * SUB + i) * side + col * SUB + j].unwrap_or(128.0);
                }
            }
            pixels[row * size + col] = (acc / (SUB * SUB) as f64).clamp(0.0, 255.0);
        }
    }
    Image::new(size, size, pixels).expect("finite pixels")
}

/// Brain-like phantom: skull ring, tissue with a folded cortical band,
/// ventricles and a few small lesions, on a zero background.
pub fn brain_phantom(width: usize, height: usize) -> Image {
    let (w, h) = (width as f64, height as f64);
    let mut pixels = vec![0.0; width * height];
    let ell = |x: f64, y: f64, cx: f64, cy: f64, a: f64, b: f64| ((x - cx) / a).powi(2) + ((y - cy) / b).powi(2);
    let sub = 3;
    for row in 0..height {
        for col in 0..width {
            let mut acc = 0.0;
            for i in 0..sub {
                for j in 0..sub {
                    // Normalized coordinates in [-1, 1].
                    let x = 2.0 * (col as f64 + (j as f64 + 0.5) / sub as f64) / w - 1.0;
                    let y = 2.0 * (row as f64 + (i as f64 + 0.5) / sub as f64) / h - 1.0;
                    let outer = ell(x, y, 0.0, 0.0, 0.78, 0.92);
                    let mut v = 0.0;
                    if outer <= 1.0 {
                        v = 210.0; // skull
                        let inner = ell(x, y, 0.0, 0.02, 0.70, 0.84);
                        if inner <= 1.0 {
                            // Cortex: a folded band near the inner boundary.
                            let theta = y.atan2(x);
                            let fold = 0.06 * (11.0 * theta).sin();
                            let depth = 1.0 - inner.sqrt();
                            v = if depth < 0.18 + fold.max(-0.05) { 150.0 } else { 110.0 };
                            v += 12.0 * (2.5 * x).cos() * (1.5 * y).cos();
                            if ell(x, y, -0.17, -0.05, 0.10, 0.28) <= 1.0 || ell(x, y, 0.17, -0.05, 0.10, 0.28) <= 1.0 {
                                v = 40.0; // ventricles
                            }
                            if ell(x, y, 0.0, 0.45, 0.22, 0.12) <= 1.0 {
                                v = 135.0;
                            }
                            if ell(x, y, 0.35, 0.35, 0.05, 0.05) <= 1.0 {
                                v = 230.0;
                            }
                            if ell(x, y, -0.38, 0.30, 0.04, 0.06) <= 1.0 {
                                v = 70.0;
                            }
                            if ell(x, y, 0.05, -0.55, 0.03, 0.03) <= 1.0 {
                                v = 200.0;
                            }
                        }
                    }
                    acc += v;
                }
            }
            pixels[row * width + col] = acc / (sub * sub) as f64;
        }
    }
    Image::new(width, height, pixels).expect("finite pixels")
}

/// The shipped natural-scene image at 256x256.
pub fn natural_256() -> Image {
    natural_scene(256, NATURAL_SEED)
}

/// The 128x128 substitute (2x2 block average of the 256x256 scene).
pub fn natural_128() -> Image {
    natural_256().downsample(2).expect("even size")
}

/// Central 64x64 crop of the 128x128 substitute.
pub fn natural_crop_64() -> Result<Image> {
    natural_128().crop(32, 32, 64, 64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_scene_is_deterministic_and_in_range() {
        let a = natural_scene(32, 5);
        let b = natural_scene(32, 5);
        assert_eq!(a, b);
        assert!(a.pixels().iter().all(|&p| (0.0..=255.0).contains(&p)));
        let mean = a.pixels().iter().sum::<f64>() / 1024.0;
        let var = a.pixels().iter().map(|p| (p - mean).powi(2)).sum::<f64>() / 1024.0;
        assert!(var > 100.0, "image should have contrast");
    }

    #[test]
    fn brain_has_zero_background() {
        let b = brain_phantom(56, 42);
        assert_eq!(b.get(0, 0), 0.0);
        assert!(b.get(21, 28) > 0.0);
        assert!(b.is_nonnegative());
    }
}
