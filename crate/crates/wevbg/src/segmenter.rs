//! Block-based background modeling: tiling frames into blocks, training a
//! base model per block, stitching per-block background estimates back
//! into frames, and thresholding residuals into foreground masks.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigenmodel::{build_base_model, BaseModel, Selection};
use crate::error::{Error, Result};
use crate::frames::FrameSequence;
use crate::linalg::{snapshot_eigenbasis, EigenBasis};

/// A tiling of a frame into equally shaped blocks. When the block size
/// does not divide the frame size, the final block in that direction is
/// shifted inward so it ends flush with the frame edge, overlapping its
/// neighbor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGrid {
    pub frame_shape: (usize, usize),
    pub block_shape: (usize, usize),
    /// Top-left corners in row-major order (rows outer, columns inner).
    pub origins: Vec<(usize, usize)>,
}

/// Computes the block tiling for a frame. Block dimensions must be
/// positive and no larger than the frame.
pub fn tile_blocks(frame_shape: (usize, usize), block_shape: (usize, usize)) -> Result<BlockGrid> {
    let (fh, fw) = frame_shape;
    let (bh, bw) = block_shape;
    if bh == 0 || bw == 0 {
        return Err(Error::InvalidBlockSize(
            "block dimensions must be positive".into(),
        ));
    }
    if bh > fh || bw > fw {
        return Err(Error::InvalidBlockSize(format!(
            "block {bh}x{bw} exceeds frame {fh}x{fw}"
        )));
    }
    let row_starts = axis_starts(fh, bh);
    let col_starts = axis_starts(fw, bw);
    let mut origins = Vec::with_capacity(row_starts.len() * col_starts.len());
    for &r in &row_starts {
        for &c in &col_starts {
            origins.push((r, c));
        }
    }
    Ok(BlockGrid {
        frame_shape,
        block_shape,
        origins,
    })
}

/// Start offsets along one axis: multiples of `block` while a full block
/// fits, plus a final edge-flush start when a remainder would otherwise
/// be left uncovered.
fn axis_starts(frame: usize, block: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut pos = 0;
    while pos + block <= frame {
        starts.push(pos);
        pos += block;
    }
    if pos < frame {
        starts.push(frame - block);
    }
    starts
}

impl BlockGrid {
    pub fn n_blocks(&self) -> usize {
        self.origins.len()
    }

    /// Copies block `idx` out of a frame, row-major within the block.
    pub fn extract(&self, frame: &[f64], idx: usize) -> Vec<f64> {
        let (r0, c0) = self.origins[idx];
        let (bh, bw) = self.block_shape;
        let fw = self.frame_shape.1;
        let mut out = Vec::with_capacity(bh * bw);
        for r in r0..r0 + bh {
            out.extend_from_slice(&frame[r * fw + c0..r * fw + c0 + bw]);
        }
        out
    }

    fn check_frame(&self, frame: &[f64]) -> Result<()> {
        let want = self.frame_shape.0 * self.frame_shape.1;
        if frame.len() != want {
            return Err(Error::Dimension(format!(
                "frame has {} pixels, grid expects {want}",
                frame.len()
            )));
        }
        Ok(())
    }
}

/// Trains one eigenbasis per block over all frames of the sequence.
/// Requires at least two frames so the scatter is meaningful.
pub fn train_block_bases(seq: &FrameSequence, grid: &BlockGrid) -> Result<Vec<EigenBasis>> {
    if (seq.height, seq.width) != grid.frame_shape {
        return Err(Error::Dimension(format!(
            "sequence is {}x{}, grid expects {}x{}",
            seq.height, seq.width, grid.frame_shape.0, grid.frame_shape.1
        )));
    }
    if seq.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} frame(s) cannot support a scatter model",
            seq.len()
        )));
    }
    (0..grid.n_blocks())
        .into_par_iter()
        .map(|b| {
            let columns: Vec<Vec<f64>> = (0..seq.len())
                .map(|i| grid.extract(seq.frame(i), b))
                .collect();
            let d = columns[0].len();
            let n = columns.len() as f64;
            let mut mean = vec![0.0; d];
            for col in &columns {
                for (m, v) in mean.iter_mut().zip(col) {
                    *m += v;
                }
            }
            for m in &mut mean {
                *m /= n;
            }
            let centered: Vec<Vec<f64>> = columns
                .iter()
                .map(|col| col.iter().zip(&mean).map(|(v, m)| v - m).collect())
                .collect();
            snapshot_eigenbasis(&centered, &mean)
        })
        .collect()
}

/// Resolves one selection against every block basis.
pub fn models_from_bases(
    bases: &[EigenBasis],
    grid: &BlockGrid,
    selection: &Selection,
) -> Result<ModelSet> {
    let models = bases
        .iter()
        .map(|basis| build_base_model(basis, selection, grid.block_shape))
        .collect::<Result<Vec<_>>>()?;
    ModelSet::new(grid.clone(), models)
}

/// Trains bases and applies a selection in one step.
pub fn train_block_models(
    seq: &FrameSequence,
    grid: &BlockGrid,
    selection: &Selection,
) -> Result<ModelSet> {
    let bases = train_block_bases(seq, grid)?;
    models_from_bases(&bases, grid, selection)
}

/// A full-frame background model: one [`BaseModel`] per grid block.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    pub grid: BlockGrid,
    pub models: Vec<BaseModel>,
}

impl ModelSet {
    /// Pairs a grid with its block models, checking that counts and
    /// shapes line up.
    pub fn new(grid: BlockGrid, models: Vec<BaseModel>) -> Result<ModelSet> {
        if models.len() != grid.n_blocks() {
            return Err(Error::Dimension(format!(
                "{} models for a {}-block grid",
                models.len(),
                grid.n_blocks()
            )));
        }
        for (i, model) in models.iter().enumerate() {
            if model.block_shape != grid.block_shape {
                return Err(Error::Dimension(format!(
                    "model {i} has block shape {:?}, grid uses {:?}",
                    model.block_shape, grid.block_shape
                )));
            }
        }
        Ok(ModelSet { grid, models })
    }

    /// Background estimate for a frame: each block's subspace estimate,
    /// stitched in origin order so the row-major-last block wins where
    /// edge blocks overlap, then clamped to [0, 1].
    pub fn estimate_background(&self, frame: &[f64]) -> Result<Vec<f64>> {
        self.grid.check_frame(frame)?;
        let (bh, bw) = self.grid.block_shape;
        let fw = self.grid.frame_shape.1;
        let mut out = vec![0.0; frame.len()];
        for (idx, model) in self.models.iter().enumerate() {
            let block = self.grid.extract(frame, idx);
            let estimate = model.estimate_background(&block)?;
            let (r0, c0) = self.grid.origins[idx];
            for br in 0..bh {
                let dst = (r0 + br) * fw + c0;
                out[dst..dst + bw].copy_from_slice(&estimate[br * bw..(br + 1) * bw]);
            }
        }
        for v in &mut out {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(out)
    }

    /// Background, absolute residual, and thresholded foreground mask for
    /// one frame. A pixel is foreground when its residual strictly
    /// exceeds `tau`.
    pub fn segment(&self, frame: &[f64], tau: f64) -> Result<Segmentation> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "threshold {tau} must be finite and non-negative"
            )));
        }
        let background = self.estimate_background(frame)?;
        let residual: Vec<f64> = frame
            .iter()
            .zip(&background)
            .map(|(x, b)| (x - b).abs())
            .collect();
        let mask: Vec<bool> = residual.iter().map(|&r| r > tau).collect();
        Ok(Segmentation {
            background,
            residual,
            mask,
        })
    }

    /// Writes the model set into a directory: a JSON manifest plus one
    /// binary container per block (`block_000.bm`, ...).
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let manifest = Manifest {
            frame_shape: [self.grid.frame_shape.0, self.grid.frame_shape.1],
            block_shape: [self.grid.block_shape.0, self.grid.block_shape.1],
            n_blocks: self.grid.n_blocks(),
        };
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail"),
        )?;
        for (i, model) in self.models.iter().enumerate() {
            model.save(&dir.join(block_file_name(i)))?;
        }
        Ok(())
    }

    /// Loads a directory written by [`ModelSet::save`], re-deriving the
    /// grid from the manifest and validating every block container.
    pub fn load(dir: &Path) -> Result<ModelSet> {
        let manifest_path = dir.join("manifest.json");
        if !manifest_path.is_file() {
            return Err(Error::NotFound(format!(
                "no manifest.json under {}",
                dir.display()
            )));
        }
        let manifest: Manifest = serde_json::from_slice(&fs::read(&manifest_path)?)
            .map_err(|e| Error::Format(format!("bad manifest: {e}")))?;
        let grid = tile_blocks(
            (manifest.frame_shape[0], manifest.frame_shape[1]),
            (manifest.block_shape[0], manifest.block_shape[1]),
        )?;
        if grid.n_blocks() != manifest.n_blocks {
            return Err(Error::Format(format!(
                "manifest declares {} blocks, tiling gives {}",
                manifest.n_blocks,
                grid.n_blocks()
            )));
        }
        let models = (0..manifest.n_blocks)
            .map(|i| BaseModel::load(&dir.join(block_file_name(i))))
            .collect::<Result<Vec<_>>>()?;
        ModelSet::new(grid, models)
    }
}

/// The per-frame outputs of [`ModelSet::segment`].
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub background: Vec<f64>,
    pub residual: Vec<f64>,
    pub mask: Vec<bool>,
}

fn block_file_name(i: usize) -> String {
    format!("block_{i:03}.bm")
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    frame_shape: [usize; 2],
    block_shape: [usize; 2],
    n_blocks: usize,
}
