//! Deterministic synthetic imagery: textures with known motion, used by the
//! tests, the runnable examples and the benchmark fixtures.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::Frame;

struct Wave {
    fx: f64,
    fy: f64,
    phase: f64,
    amp: f64,
}

fn eval_waves(waves: &[Wave], x: f64, y: f64) -> f64 {
    0.5 + waves
        .iter()
        .map(|w| w.amp * (TAU * (w.fx * x + w.fy * y) + w.phase).sin())
        .sum::<f64>()
}

fn random_waves(
    rng: &mut ChaCha8Rng,
    count: usize,
    mut freq: impl FnMut(&mut ChaCha8Rng) -> (f64, f64),
) -> Vec<Wave> {
    let amp = 0.38 / count as f64;
    (0..count)
        .map(|_| {
            let (fx, fy) = freq(rng);
            Wave {
                fx,
                fy,
                phase: rng.gen_range(0.0..TAU),
                amp,
            }
        })
        .collect()
}

/// Smooth texture of random oblique sinusoids (wavelengths 6–32 px), values
/// in `[0.12, 0.88]`.
pub fn smooth_texture(width: usize, height: usize, channels: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_channel: Vec<Vec<Wave>> = (0..channels)
        .map(|_| {
            random_waves(&mut rng, 6, |r| {
                let wavelength = r.gen_range(6.0..32.0);
                let angle = r.gen_range(0.0..TAU);
                (angle.cos() / wavelength, angle.sin() / wavelength)
            })
        })
        .collect();
    Frame::from_fn(width, height, channels, |x, y, c| {
        eval_waves(&per_channel[c], x as f64, y as f64)
    })
    .expect("texture values stay in range")
}

/// Texture that tiles seamlessly: every wave completes an integer number of
/// cycles across the frame, so circular shifts are exact translations.
pub fn periodic_texture(width: usize, height: usize, channels: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_channel: Vec<Vec<Wave>> = (0..channels)
        .map(|_| {
            random_waves(&mut rng, 6, |r| {
                let kx = r.gen_range(-5i32..=5) as f64;
                let mut ky = r.gen_range(-5i32..=5) as f64;
                if kx == 0.0 && ky == 0.0 {
                    ky = 3.0;
                }
                (kx / width as f64, ky / height as f64)
            })
        })
        .collect();
    Frame::from_fn(width, height, channels, |x, y, c| {
        eval_waves(&per_channel[c], x as f64, y as f64)
    })
    .expect("texture values stay in range")
}

/// Photo-like RGB scene: a smooth background with soft-edged discs and a
/// brighter rectangle, all band-limited enough for gradient-based flow.
pub fn natural_scene(width: usize, height: usize, seed: u64) -> Frame {
    let background = smooth_texture(width, height, 3, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let discs: Vec<(f64, f64, f64, [f64; 3])> = (0..5)
        .map(|_| {
            (
                rng.gen_range(0.0..width as f64),
                rng.gen_range(0.0..height as f64),
                rng.gen_range(0.08..0.2) * width.min(height) as f64,
                [
                    rng.gen_range(0.1..0.9),
                    rng.gen_range(0.1..0.9),
                    rng.gen_range(0.1..0.9),
                ],
            )
        })
        .collect();
    let (rx0, ry0) = (width as f64 * 0.55, height as f64 * 0.2);
    let (rx1, ry1) = (width as f64 * 0.8, height as f64 * 0.45);
    Frame::from_fn(width, height, 3, |x, y, c| {
        let (xf, yf) = (x as f64, y as f64);
        let mut value = background.get(x, y, c);
        for &(cx, cy, r, color) in &discs {
            let d = ((xf - cx).powi(2) + (yf - cy).powi(2)).sqrt();
            let alpha = 1.0 / (1.0 + ((d - r) / 1.5).exp());
            value = alpha * color[c] + (1.0 - alpha) * value;
        }
        let soft = |t: f64| 1.0 / (1.0 + (-t / 1.2).exp());
        let inside = soft(xf - rx0) * soft(rx1 - xf) * soft(yf - ry0) * soft(ry1 - yf);
        value = inside * 0.95 + (1.0 - inside) * value;
        value.clamp(0.0, 1.0)
    })
    .expect("scene values stay in range")
}

/// Moves content by `(dx, dy)` with wrap-around: `out(p) = in(p - d)`.
pub fn circular_shift(frame: &Frame, dx: isize, dy: isize) -> Frame {
    let (w, h) = (frame.width() as isize, frame.height() as isize);
    Frame::from_fn(frame.width(), frame.height(), frame.channels(), |x, y, c| {
        let sx = (x as isize - dx).rem_euclid(w) as usize;
        let sy = (y as isize - dy).rem_euclid(h) as usize;
        frame.get(sx, sy, c)
    })
    .expect("shift preserves range")
}

/// `width x height` window of `frame` whose top-left corner is `(x0, y0)`.
pub fn translate_crop(frame: &Frame, x0: usize, y0: usize, width: usize, height: usize) -> Frame {
    assert!(x0 + width <= frame.width() && y0 + height <= frame.height());
    Frame::from_fn(width, height, frame.channels(), |x, y, c| {
        frame.get(x + x0, y + y0, c)
    })
    .expect("crop preserves range")
}

/// Three frames of a scene translating by `(dx, dy)` pixels per frame step,
/// cut from `base` without wrap-around. The true flow from the first to the
/// last frame is `(2dx, 2dy)`.
pub fn translating_triple(
    base: &Frame,
    width: usize,
    height: usize,
    dx: usize,
    dy: usize,
) -> (Frame, Frame, Frame) {
    let first = translate_crop(base, 2 * dx, 2 * dy, width, height);
    let middle = translate_crop(base, dx, dy, width, height);
    let last = translate_crop(base, 0, 0, width, height);
    (first, middle, last)
}

/// Adds seeded zero-mean Gaussian noise of standard deviation `sigma`, clamped.
pub fn add_noise(frame: &Frame, sigma: f64, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = frame
        .data()
        .iter()
        .map(|&s| (s + sigma * standard_normal(&mut rng)).clamp(0.0, 1.0))
        .collect();
    Frame::new(frame.width(), frame.height(), frame.channels(), data).expect("clamped")
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(smooth_texture(16, 8, 3, 4), smooth_texture(16, 8, 3, 4));
        assert_ne!(smooth_texture(16, 8, 1, 4), smooth_texture(16, 8, 1, 5));
        assert_eq!(natural_scene(20, 20, 1), natural_scene(20, 20, 1));
    }

    #[test]
    fn periodic_texture_tiles() {
        let t = periodic_texture(32, 16, 1, 3);
        let back = circular_shift(&circular_shift(&t, 5, -3), -5, 3);
        assert_eq!(back, t);
    }

    #[test]
    fn triple_is_a_translation() {
        let base = smooth_texture(40, 30, 1, 8);
        let (f1, f2, f3) = translating_triple(&base, 30, 20, 2, 1);
        // f3(p) = f1(p - (4, 2)) and f2(p) = f1(p - (2, 1))
        assert_eq!(f3.get(10, 10, 0), f1.get(6, 8, 0));
        assert_eq!(f2.get(10, 10, 0), f1.get(8, 9, 0));
    }
}
