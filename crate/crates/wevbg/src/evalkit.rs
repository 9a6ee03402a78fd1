//! Evaluation tooling: ground-truth construction, RMSE metrics, selection
//! sweeps, held-out evaluation, and 2-D subspace projections.
//!
//! Two error notions are reported for every (frame, selection) pair:
//! reconstruction RMSE, measured against the frame itself (how much of the
//! frame the subspace can express), and background RMSE, measured against
//! the ground-truth background (how clean the background estimate is).
//! A selection can score perfectly on the first and badly on the second —
//! that divergence is exactly what separates strongest- from
//! weakest-eigenvector models on frames containing foreground.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::eigenmodel::Selection;
use crate::error::{Error, Result};
use crate::frames::{FrameLabel, FrameSequence};
use crate::linalg::{dot, EigenBasis};
use crate::segmenter::{models_from_bases, train_block_bases, BlockGrid, ModelSet};

// ---------------------------------------------------------------------
// Metrics and ground truth
// ---------------------------------------------------------------------

/// Root-mean-square difference between two equally sized images, in the
/// same normalized [0, 1] units as the pixels.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "images have {} and {} pixels",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("empty images have no error".into()));
    }
    let sum_sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sum_sq / a.len() as f64).sqrt())
}

/// The reference background: a pixelwise mean of hand-labeled empty
/// frames, along with which frames contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub pixels: Vec<f64>,
    pub source_indices: Vec<usize>,
}

/// Averages the background-labeled frames of a sequence into a
/// ground-truth background image.
pub fn build_ground_truth(seq: &FrameSequence) -> Result<GroundTruth> {
    let indices = seq
        .indices_with(FrameLabel::Background)
        .ok_or_else(|| Error::Label("ground truth needs per-frame labels".into()))?;
    if indices.is_empty() {
        return Err(Error::InsufficientData(
            "no frames are labeled as background".into(),
        ));
    }
    let mut pixels = vec![0.0; seq.pixels()];
    for &i in &indices {
        for (p, v) in pixels.iter_mut().zip(seq.frame(i)) {
            *p += v;
        }
    }
    let n = indices.len() as f64;
    for p in &mut pixels {
        *p /= n;
    }
    Ok(GroundTruth {
        pixels,
        source_indices: indices,
    })
}

// ---------------------------------------------------------------------
// Selection sweeps and held-out evaluation
// ---------------------------------------------------------------------

/// One (frame, selection) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub frame_index: usize,
    pub selection_id: String,
    /// RMSE between the background estimate and the frame itself.
    pub recon_rmse: f64,
    /// RMSE between the background estimate and the ground truth.
    pub bg_rmse: f64,
}

/// A complete evaluation: every frame crossed with every selection.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Rows grouped by selection (in `selections` order), frames
    /// ascending within each group.
    pub rows: Vec<EvalRow>,
    pub selections: Vec<String>,
    /// Frame indices the ground truth was averaged from.
    pub gt_source: Vec<usize>,
}

impl EvalReport {
    /// The rows of one selection, in frame order.
    pub fn column(&self, selection_id: &str) -> Vec<&EvalRow> {
        self.rows
            .iter()
            .filter(|r| r.selection_id == selection_id)
            .collect()
    }
}

/// Trains block bases once on `seq`, then scores every selection against
/// every frame. Selections must be non-empty and the ground truth must
/// match the frame shape.
pub fn sweep_selections(
    seq: &FrameSequence,
    grid: &BlockGrid,
    selections: &[Selection],
    gt: &GroundTruth,
) -> Result<EvalReport> {
    if selections.is_empty() {
        return Err(Error::InvalidInput("no selections to evaluate".into()));
    }
    check_gt(gt, seq.pixels())?;
    let bases = train_block_bases(seq, grid)?;
    let mut rows = Vec::with_capacity(seq.len() * selections.len());
    for selection in selections {
        let set = models_from_bases(&bases, grid, selection)?;
        rows.extend(eval_model_set(&set, seq, gt)?);
    }
    Ok(EvalReport {
        rows,
        selections: selections.iter().map(Selection::descriptor).collect(),
        gt_source: gt.source_indices.clone(),
    })
}

/// Scores already trained model sets against frames the models never saw.
/// All sets must share one grid, and that grid must match the frames.
pub fn holdout_eval(
    model_sets: &[ModelSet],
    frames: &FrameSequence,
    gt: &GroundTruth,
) -> Result<EvalReport> {
    if model_sets.is_empty() {
        return Err(Error::InvalidInput("no model sets to evaluate".into()));
    }
    let grid = &model_sets[0].grid;
    for set in &model_sets[1..] {
        if set.grid != *grid {
            return Err(Error::Dimension("model sets use different grids".into()));
        }
    }
    if (frames.height, frames.width) != grid.frame_shape {
        return Err(Error::Dimension(format!(
            "frames are {}x{}, models expect {}x{}",
            frames.height, frames.width, grid.frame_shape.0, grid.frame_shape.1
        )));
    }
    check_gt(gt, frames.pixels())?;
    let mut rows = Vec::with_capacity(frames.len() * model_sets.len());
    for set in model_sets {
        rows.extend(eval_model_set(set, frames, gt)?);
    }
    Ok(EvalReport {
        rows,
        selections: model_sets
            .iter()
            .map(|s| s.models[0].selection.descriptor())
            .collect(),
        gt_source: gt.source_indices.clone(),
    })
}

fn check_gt(gt: &GroundTruth, pixels: usize) -> Result<()> {
    if gt.pixels.len() != pixels {
        return Err(Error::Dimension(format!(
            "ground truth has {} pixels, frames have {pixels}",
            gt.pixels.len()
        )));
    }
    Ok(())
}

/// Per-frame scores for one model set, parallel across frames, merged in
/// frame order.
fn eval_model_set(
    set: &ModelSet,
    frames: &FrameSequence,
    gt: &GroundTruth,
) -> Result<Vec<EvalRow>> {
    let selection_id = set.models[0].selection.descriptor();
    (0..frames.len())
        .into_par_iter()
        .map(|i| {
            let estimate = set.estimate_background(frames.frame(i))?;
            Ok(EvalRow {
                frame_index: i,
                selection_id: selection_id.clone(),
                recon_rmse: rmse(&estimate, frames.frame(i))?,
                bg_rmse: rmse(&estimate, &gt.pixels)?,
            })
        })
        .collect()
}

/// Writes an evaluation report as CSV with the schema
/// `frame_index,selection_id,recon_rmse,bg_rmse`.
pub fn write_eval_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let mut out = String::from("frame_index,selection_id,recon_rmse,bg_rmse\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.frame_index, r.selection_id, r.recon_rmse, r.bg_rmse
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------
// 2-D subspace projection
// ---------------------------------------------------------------------

/// One frame's coordinates in a chosen eigenvector pair's plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePoint {
    pub frame_index: usize,
    pub coord_i: f64,
    pub coord_j: f64,
    pub label: Option<FrameLabel>,
    /// Whether this frame is the nearest to at least one grid vertex.
    pub is_vertex_representative: bool,
}

/// All frames projected onto one component pair, with grid-vertex
/// representatives marked.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePoints {
    pub points: Vec<SubspacePoint>,
    /// 1-based component positions in descending-eigenvalue order.
    pub component_pair: (usize, usize),
    pub grid_n: usize,
}

/// Projects every frame onto the plane of components `i` and `j` (1-based
/// positions in the basis's descending order), then lays a `grid_n` ×
/// `grid_n` grid over the points' bounding box and marks the frame
/// nearest to each vertex (ties go to the lower frame index).
pub fn subspace_grid(
    seq: &FrameSequence,
    basis: &EigenBasis,
    component_pair: (usize, usize),
    grid_n: usize,
) -> Result<SubspacePoints> {
    let (i, j) = component_pair;
    if i == j || i == 0 || j == 0 || i > basis.len() || j > basis.len() {
        return Err(Error::Selection(format!(
            "component pair ({i}, {j}) invalid for a basis of {} vectors",
            basis.len()
        )));
    }
    if grid_n < 2 {
        return Err(Error::InvalidInput(format!("grid size {grid_n} below 2")));
    }
    if basis.dim() != seq.pixels() {
        return Err(Error::Dimension(format!(
            "basis dimension {} does not match {}-pixel frames",
            basis.dim(),
            seq.pixels()
        )));
    }
    if seq.is_empty() {
        return Err(Error::InsufficientData("no frames to project".into()));
    }
    let vi = &basis.pairs[i - 1].vector;
    let vj = &basis.pairs[j - 1].vector;
    let coords: Vec<(f64, f64)> = (0..seq.len())
        .map(|k| {
            let centered: Vec<f64> = seq
                .frame(k)
                .iter()
                .zip(&basis.mean)
                .map(|(v, m)| v - m)
                .collect();
            (dot(&centered, vi), dot(&centered, vj))
        })
        .collect();

    let (mut lo_i, mut hi_i, mut lo_j, mut hi_j) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(ci, cj) in &coords {
        lo_i = lo_i.min(ci);
        hi_i = hi_i.max(ci);
        lo_j = lo_j.min(cj);
        hi_j = hi_j.max(cj);
    }
    let step = |lo: f64, hi: f64, t: usize| lo + (hi - lo) * t as f64 / (grid_n - 1) as f64;
    let mut representative = vec![false; coords.len()];
    for ti in 0..grid_n {
        for tj in 0..grid_n {
            let (gx, gy) = (step(lo_i, hi_i, ti), step(lo_j, hi_j, tj));
            let mut best = 0usize;
            let mut best_d = f64::MAX;
            for (k, &(ci, cj)) in coords.iter().enumerate() {
                let d = (ci - gx) * (ci - gx) + (cj - gy) * (cj - gy);
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            representative[best] = true;
        }
    }

    let points = coords
        .iter()
        .enumerate()
        .map(|(k, &(ci, cj))| SubspacePoint {
            frame_index: k,
            coord_i: ci,
            coord_j: cj,
            label: seq.labels.as_ref().map(|l| l[k]),
            is_vertex_representative: representative[k],
        })
        .collect();
    Ok(SubspacePoints {
        points,
        component_pair,
        grid_n,
    })
}

/// Sum of the coordinate variances (the trace of the 2-D covariance) over
/// the points carrying the given label. `None` when no point matches.
pub fn labeled_spread(points: &SubspacePoints, label: FrameLabel) -> Option<f64> {
    let selected: Vec<(f64, f64)> = points
        .points
        .iter()
        .filter(|p| p.label == Some(label))
        .map(|p| (p.coord_i, p.coord_j))
        .collect();
    if selected.is_empty() {
        return None;
    }
    let n = selected.len() as f64;
    let (mi, mj) = selected
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    Some(
        selected
            .iter()
            .map(|&(x, y)| (x - mi) * (x - mi) + (y - mj) * (y - mj))
            .sum::<f64>()
            / n,
    )
}

/// Writes subspace points as CSV with the schema
/// `frame_index,coord_i,coord_j,label,is_vertex_representative`; the
/// label field is empty for unlabeled sequences.
pub fn write_subspace_csv(path: &Path, points: &SubspacePoints) -> Result<()> {
    let mut out = String::from("frame_index,coord_i,coord_j,label,is_vertex_representative\n");
    for p in &points.points {
        let label = p.label.map(|l| l.as_str()).unwrap_or("");
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.frame_index, p.coord_i, p.coord_j, label, p.is_vertex_representative
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
