//! Synthetic scene generation: a static textured background, a moving
//! bright square, and per-pixel Gaussian sensor noise.
//!
//! The generator exists so background-model quality can be measured against
//! a background that is known exactly rather than estimated. Frames that
//! carry the square are labeled foreground and spread evenly through the
//! sequence; the square slides from the top-left corner to the bottom-right
//! corner across its appearances.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::frames::{FrameLabel, FrameSequence};

/// Inputs for [`generate_scene`].
#[derive(Debug, Clone)]
pub struct SceneParams {
    pub height: usize,
    pub width: usize,
    /// Total frames in the sequence.
    pub n_frames: usize,
    /// How many of the frames carry the moving square.
    pub n_object_frames: usize,
    /// Square area as a fraction of the frame area, in (0, 1).
    pub object_fraction: f64,
    /// Gray level of the square before noise, in [0, 1].
    pub object_intensity: f64,
    /// Standard deviation of the per-pixel Gaussian noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SceneParams {
    /// The reference configuration used by the evaluation suite: 121
    /// frames of 120×160, four object appearances, a 10% bright square,
    /// and mild sensor noise.
    pub fn reference(seed: u64) -> SceneParams {
        SceneParams {
            height: 120,
            width: 160,
            n_frames: 121,
            n_object_frames: 4,
            object_fraction: 0.10,
            object_intensity: 0.85,
            noise_sigma: 0.035,
            seed,
        }
    }
}

/// A generated sequence together with the exact noise-free background and
/// the square's placement in each frame (`None` on background frames).
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub sequence: FrameSequence,
    pub true_background: Vec<f64>,
    /// Per frame: `(row, col, height, width)` of the square, if present.
    pub object_boxes: Vec<Option<(usize, usize, usize, usize)>>,
}

/// The noise-free background texture: a mid-gray field modulated by two
/// incommensurate sinusoids, ranging over [0.1, 0.7].
pub fn background_texture(r: usize, c: usize) -> f64 {
    0.4 + 0.18 * (TAU * r as f64 / 31.0).sin() * (TAU * c as f64 / 23.0).cos()
        + 0.12 * (TAU * (r + c) as f64 / 47.0).sin()
}

/// Renders the scene. Deterministic in `params.seed`.
pub fn generate_scene(params: &SceneParams) -> Result<SyntheticScene> {
    validate(params)?;
    let (h, w) = (params.height, params.width);
    let true_background: Vec<f64> = (0..h * w)
        .map(|p| background_texture(p / w, p % w))
        .collect();

    let side = object_side(params);
    let object_frames = object_frame_indices(params.n_frames, params.n_object_frames);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise_sigma)
        .map_err(|e| Error::InvalidInput(format!("noise distribution: {e}")))?;

    let mut frames = Vec::with_capacity(params.n_frames);
    let mut labels = Vec::with_capacity(params.n_frames);
    let mut object_boxes = Vec::with_capacity(params.n_frames);
    for i in 0..params.n_frames {
        let object_box = object_frames.iter().position(|&f| f == i).map(|j| {
            let t = if params.n_object_frames > 1 {
                j as f64 / (params.n_object_frames - 1) as f64
            } else {
                0.5
            };
            let r0 = (t * (h - side) as f64).round() as usize;
            let c0 = (t * (w - side) as f64).round() as usize;
            (r0, c0, side, side)
        });
        let mut frame = true_background.clone();
        if let Some((r0, c0, bh, bw)) = object_box {
            for r in r0..r0 + bh {
                frame[r * w + c0..r * w + c0 + bw].fill(params.object_intensity);
            }
        }
        if params.noise_sigma > 0.0 {
            for v in &mut frame {
                *v += noise.sample(&mut rng);
            }
        }
        for v in &mut frame {
            *v = v.clamp(0.0, 1.0);
        }
        frames.push(frame);
        labels.push(if object_box.is_some() {
            FrameLabel::Foreground
        } else {
            FrameLabel::Background
        });
        object_boxes.push(object_box);
    }

    let sequence = FrameSequence::new(
        h,
        w,
        frames,
        Some(labels),
        format!("synthetic:{}", params.seed),
    )?;
    Ok(SyntheticScene {
        sequence,
        true_background,
        object_boxes,
    })
}

/// Side length of the square: the closest integer realization of the
/// requested area fraction, at least 1 and at most the frame's short side.
pub fn object_side(params: &SceneParams) -> usize {
    let ideal = (params.object_fraction * (params.height * params.width) as f64).sqrt();
    (ideal.round() as usize).clamp(1, params.height.min(params.width))
}

/// Frame indices that carry the object: `n_object` positions spread evenly
/// (stratified) over `0..n_frames`.
fn object_frame_indices(n_frames: usize, n_object: usize) -> Vec<usize> {
    (0..n_object)
        .map(|j| ((j as f64 + 0.5) * n_frames as f64 / n_object as f64) as usize)
        .collect()
}

fn validate(params: &SceneParams) -> Result<()> {
    if params.height == 0 || params.width == 0 {
        return Err(Error::InvalidInput(
            "frame dimensions must be positive".into(),
        ));
    }
    if params.n_frames == 0 {
        return Err(Error::InvalidInput("at least one frame is required".into()));
    }
    if params.n_object_frames > params.n_frames {
        return Err(Error::InvalidInput(format!(
            "{} object frames exceed {} total frames",
            params.n_object_frames, params.n_frames
        )));
    }
    if !(params.object_fraction > 0.0 && params.object_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "object fraction {} outside (0, 1)",
            params.object_fraction
        )));
    }
    if !(0.0..=1.0).contains(&params.object_intensity) {
        return Err(Error::InvalidInput(format!(
            "object intensity {} outside [0, 1]",
            params.object_intensity
        )));
    }
    if !(params.noise_sigma >= 0.0 && params.noise_sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise sigma {} must be finite and non-negative",
            params.noise_sigma
        )));
    }
    Ok(())
}
