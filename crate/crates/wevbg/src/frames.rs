//! Ordered grayscale frame sequences with optional per-frame class labels.

use std::fmt;

use crate::error::{Error, Result};

/// Whether a frame shows only the static scene or contains a moving object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameLabel {
    Background,
    Foreground,
}

impl FrameLabel {
    /// Parses the two-letter form used in label CSVs.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bg" => Ok(FrameLabel::Background),
            "fg" => Ok(FrameLabel::Foreground),
            other => Err(Error::Label(format!(
                "unknown label {other:?} (expected \"bg\" or \"fg\")"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FrameLabel::Background => "bg",
            FrameLabel::Foreground => "fg",
        }
    }
}

impl fmt::Display for FrameLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered grayscale frames, all `height * width` pixels in `[0,1]`,
/// row-major. Labels, when present, cover every frame. `source` records
/// where the data came from (a path pattern or `synthetic:<seed>`).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub height: usize,
    pub width: usize,
    pub frames: Vec<Vec<f64>>,
    pub labels: Option<Vec<FrameLabel>>,
    pub source: String,
}

impl FrameSequence {
    /// Validates shape uniformity, pixel range, and label coverage.
    pub fn new(
        height: usize,
        width: usize,
        frames: Vec<Vec<f64>>,
        labels: Option<Vec<FrameLabel>>,
        source: String,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput(format!(
                "frame shape {height}x{width} has no pixels"
            )));
        }
        let pixels = height * width;
        for (i, frame) in frames.iter().enumerate() {
            if frame.len() != pixels {
                return Err(Error::Dimension(format!(
                    "frame {i} has {} pixels, expected {pixels}",
                    frame.len()
                )));
            }
            if frame.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidInput(format!(
                    "frame {i} has pixel values outside [0,1]"
                )));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != frames.len() {
                return Err(Error::Label(format!(
                    "{} labels for {} frames",
                    labels.len(),
                    frames.len()
                )));
            }
        }
        Ok(FrameSequence {
            height,
            width,
            frames,
            labels,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Pixels per frame.
    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.frames[i]
    }

    /// Attaches labels after the fact (e.g. loaded from a separate CSV).
    pub fn set_labels(&mut self, labels: Vec<FrameLabel>) -> Result<()> {
        if labels.len() != self.frames.len() {
            return Err(Error::Label(format!(
                "{} labels for {} frames",
                labels.len(),
                self.frames.len()
            )));
        }
        self.labels = Some(labels);
        Ok(())
    }

    /// Frame indices carrying the given label, or `None` when unlabeled.
    pub fn indices_with(&self, label: FrameLabel) -> Option<Vec<usize>> {
        self.labels.as_ref().map(|labels| {
            labels
                .iter()
                .enumerate()
                .filter(|(_, l)| **l == label)
                .map(|(i, _)| i)
                .collect()
        })
    }

    /// The sub-sequence of frames `start..end`, labels included, e.g. for
    /// splitting a sequence into training and held-out parts.
    pub fn window(&self, start: usize, end: usize) -> Result<FrameSequence> {
        if start > end || end > self.len() {
            return Err(Error::InvalidInput(format!(
                "window {start}..{end} outside 0..{}",
                self.len()
            )));
        }
        Ok(FrameSequence {
            height: self.height,
            width: self.width,
            frames: self.frames[start..end].to_vec(),
            labels: self.labels.as_ref().map(|l| l[start..end].to_vec()),
            source: format!("{}[{start}..{end}]", self.source),
        })
    }
}
