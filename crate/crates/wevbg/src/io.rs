//! Frame and label file I/O.
//!
//! Images move through PGM (P2/P5, hand-rolled codec) or 8-bit PNG
//! (grayscale or RGB, decoded via the `image` crate). Every 8-bit value is
//! mapped `v / 255` into `[0,1]`; RGB collapses to luma with the ITU-R
//! BT.601 weights first. Synthetic 1-row vector streams use a CSV format
//! instead, because quantizing small-variance Gaussian samples to 8 bits
//! would destroy them; the CSV stores `f64` values exactly (Rust's shortest
//! round-trip formatting).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frames::{FrameLabel, FrameSequence};

/// Glob-lite matcher: `*` matches any run of characters (including empty),
/// everything else is literal. No other metacharacters.
pub fn wildcard_match(pattern: &str, name: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let n: Vec<char> = name.chars().collect();
    // classic two-pointer scan with backtracking to the last star
    let (mut pi, mut ni) = (0usize, 0usize);
    let mut star: Option<(usize, usize)> = None;
    while ni < n.len() {
        if pi < p.len() && (p[pi] == n[ni]) {
            pi += 1;
            ni += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ni));
            pi += 1;
        } else if let Some((sp, sn)) = star {
            pi = sp + 1;
            ni = sn + 1;
            star = Some((sp, sn + 1));
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '*' {
        pi += 1;
    }
    pi == p.len()
}

// ---------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------

struct PgmCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> PgmCursor<'a> {
    fn skip_separators(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("truncated image header".into()));
        }
        Ok(&self.data[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad {what} token")))
    }
}

/// Reads a P2 (ASCII) or P5 (binary) grayscale image. Values are mapped
/// `v / 255`; the declared maxval must lie in `1..=255` and every sample
/// must respect it. Trailing bytes beyond the pixel payload are an error.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let data = fs::read(path)?;
    let mut cur = PgmCursor {
        data: &data,
        pos: 0,
    };
    let magic = cur.token()?;
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        other => {
            return Err(Error::Format(format!(
                "not a PGM file (magic {:?})",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!(
            "degenerate image size {width}x{height}"
        )));
    }
    if !(1..=255).contains(&maxval) {
        return Err(Error::Format(format!(
            "maxval {maxval} unsupported (expected 1..=255)"
        )));
    }
    let count = width * height;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // exactly one separator byte after the maxval token, then raw bytes
        if cur.pos >= data.len() || !data[cur.pos].is_ascii_whitespace() {
            return Err(Error::Format(
                "missing separator before binary pixel data".into(),
            ));
        }
        cur.pos += 1;
        let payload = &data[cur.pos..];
        if payload.len() != count {
            return Err(Error::Format(format!(
                "expected {count} pixel bytes, found {}",
                payload.len()
            )));
        }
        for &b in payload {
            if usize::from(b) > maxval {
                return Err(Error::Format(format!("sample {b} exceeds maxval {maxval}")));
            }
            pixels.push(f64::from(b) / 255.0);
        }
    } else {
        for _ in 0..count {
            let v = cur.number("pixel")?;
            if v > maxval {
                return Err(Error::Format(format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as f64 / 255.0);
        }
        cur.skip_separators();
        if cur.pos != data.len() {
            return Err(Error::Format("trailing data after pixel samples".into()));
        }
    }
    Ok((height, width, pixels))
}

/// Writes a binary P5 image with maxval 255; values are clamped to `[0,1]`
/// and denormalized by `round(v * 255)`.
pub fn write_pgm(path: &Path, height: usize, width: usize, pixels: &[f64]) -> Result<()> {
    if pixels.len() != height * width {
        return Err(Error::Dimension(format!(
            "{} pixels for a {height}x{width} image",
            pixels.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(
        pixels
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    fs::write(path, out)?;
    Ok(())
}

/// Writes a binary mask as P5 with values 0 (background) and 255
/// (foreground).
pub fn write_mask_pgm(path: &Path, height: usize, width: usize, mask: &[bool]) -> Result<()> {
    if mask.len() != height * width {
        return Err(Error::Dimension(format!(
            "{} mask entries for a {height}x{width} image",
            mask.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(mask.iter().map(|&m| if m { 255u8 } else { 0u8 }));
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------

fn read_png(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::from(io),
        other => Error::Format(format!("PNG decode failed: {other}")),
    })?;
    match img {
        image::DynamicImage::ImageLuma8(gray) => {
            let (w, h) = (gray.width() as usize, gray.height() as usize);
            let pixels = gray
                .as_raw()
                .iter()
                .map(|&v| f64::from(v) / 255.0)
                .collect();
            Ok((h, w, pixels))
        }
        image::DynamicImage::ImageRgb8(rgb) => {
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let pixels = rgb
                .as_raw()
                .chunks_exact(3)
                .map(|c| {
                    let luma =
                        0.299 * f64::from(c[0]) + 0.587 * f64::from(c[1]) + 0.114 * f64::from(c[2]);
                    (luma / 255.0).clamp(0.0, 1.0)
                })
                .collect();
            Ok((h, w, pixels))
        }
        other => Err(Error::Format(format!(
            "unsupported PNG pixel format {:?} (expected 8-bit grayscale or RGB)",
            other.color()
        ))),
    }
}

// ---------------------------------------------------------------------
// directory loading
// ---------------------------------------------------------------------

/// Loads every file in `dir` whose name matches `pattern`, sorted
/// lexicographically by name — that ordering *is* the frame order, which
/// matters for every streaming experiment. Dispatches on the lowercased
/// extension: `.pgm` and `.png` are supported.
pub fn load_frames(dir: &Path, pattern: &str) -> Result<FrameSequence> {
    let mut names: Vec<String> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if !entry.file_type()?.is_file() {
            continue;
        }
        if let Some(name) = entry.file_name().to_str() {
            if wildcard_match(pattern, name) {
                names.push(name.to_string());
            }
        }
    }
    if names.is_empty() {
        return Err(Error::NotFound(format!(
            "no files matching {pattern:?} in {}",
            dir.display()
        )));
    }
    names.sort();

    let mut shape: Option<(usize, usize)> = None;
    let mut frames = Vec::with_capacity(names.len());
    for name in &names {
        let path = dir.join(name);
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .unwrap_or_default();
        let (h, w, pixels) = match ext.as_str() {
            "pgm" => read_pgm(&path)?,
            "png" => read_png(&path)?,
            other => {
                return Err(Error::Format(format!(
                    "unsupported image extension {other:?} for {name}"
                )))
            }
        };
        match shape {
            None => shape = Some((h, w)),
            Some((eh, ew)) if (eh, ew) != (h, w) => {
                return Err(Error::Dimension(format!(
                    "{name} is {h}x{w}, previous frames are {eh}x{ew}"
                )));
            }
            _ => {}
        }
        frames.push(pixels);
    }
    let (height, width) = shape.expect("at least one frame was loaded");
    FrameSequence::new(
        height,
        width,
        frames,
        None,
        format!("{}:{pattern}", dir.display()),
    )
}

// ---------------------------------------------------------------------
// label CSV
// ---------------------------------------------------------------------

/// Reads a `frame,label` CSV covering exactly the frames `0..n_frames`,
/// each exactly once, with labels `bg`/`fg`.
pub fn load_labels(path: &Path, n_frames: usize) -> Result<Vec<FrameLabel>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some("frame,label") => {}
        other => {
            return Err(Error::Label(format!(
                "expected header \"frame,label\", found {other:?}"
            )))
        }
    }
    let mut labels: Vec<Option<FrameLabel>> = vec![None; n_frames];
    for (lineno, raw) in lines.enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (idx_str, label_str) = line.split_once(',').ok_or_else(|| {
            Error::Label(format!("line {}: expected \"frame,label\"", lineno + 2))
        })?;
        let idx: usize = idx_str.trim().parse().map_err(|_| {
            Error::Label(format!("line {}: bad frame index {idx_str:?}", lineno + 2))
        })?;
        if idx >= n_frames {
            return Err(Error::Label(format!(
                "frame index {idx} out of range for {n_frames} frames"
            )));
        }
        if labels[idx].is_some() {
            return Err(Error::Label(format!("duplicate label for frame {idx}")));
        }
        labels[idx] = Some(FrameLabel::parse(label_str.trim())?);
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::Label(format!("missing label for frame {i}"))))
        .collect()
}

/// Writes the `frame,label` CSV consumed by [`load_labels`].
pub fn write_labels(path: &Path, labels: &[FrameLabel]) -> Result<()> {
    let mut out = String::from("frame,label\n");
    for (i, label) in labels.iter().enumerate() {
        writeln!(out, "{i},{label}").expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------
// vector-stream CSV
// ---------------------------------------------------------------------

/// Writes a 1-row-per-frame CSV (`frame,c0,...,c{D-1}`) holding each
/// component as an exact `f64`.
pub fn write_vector_csv(path: &Path, seq: &FrameSequence) -> Result<()> {
    let dim = seq.pixels();
    let mut out = String::from("frame");
    for j in 0..dim {
        write!(out, ",c{j}").expect("string write");
    }
    out.push('\n');
    for (i, frame) in seq.frames.iter().enumerate() {
        write!(out, "{i}").expect("string write");
        for v in frame {
            write!(out, ",{v}").expect("string write");
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads the CSV written by [`write_vector_csv`] into a 1×D sequence.
pub fn read_vector_csv(path: &Path) -> Result<FrameSequence> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty vector CSV".into()))?;
    let mut cols = header.split(',');
    if cols.next() != Some("frame") {
        return Err(Error::Format(
            "vector CSV header must start with \"frame\"".into(),
        ));
    }
    let dim = cols.count();
    if dim == 0 {
        return Err(Error::Format("vector CSV has no component columns".into()));
    }
    let mut frames = Vec::new();
    for (lineno, raw) in lines.enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let idx: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("line {}: bad frame index", lineno + 2)))?;
        if idx != frames.len() {
            return Err(Error::Format(format!(
                "line {}: frame index {idx} out of order (expected {})",
                lineno + 2,
                frames.len()
            )));
        }
        let values: Vec<f64> = fields
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Format(format!("line {}: bad component value", lineno + 2)))?;
        if values.len() != dim {
            return Err(Error::Format(format!(
                "line {}: {} components, header declares {dim}",
                lineno + 2,
                values.len()
            )));
        }
        frames.push(values);
    }
    FrameSequence::new(1, dim, frames, None, path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    #[test]
    fn wildcard_basics() {
        assert!(wildcard_match("*", ""));
        assert!(wildcard_match("*", "anything.pgm"));
        assert!(wildcard_match("*.pgm", "frame_000.pgm"));
        assert!(!wildcard_match("*.pgm", "frame_000.png"));
        assert!(wildcard_match("frame_*.png", "frame_12.png"));
        assert!(!wildcard_match("frame_*.png", "other_12.png"));
        assert!(wildcard_match("a*b*c", "aXXbYYc"));
        assert!(wildcard_match("a*b*c", "abc"));
        assert!(!wildcard_match("a*b*c", "acb"));
        assert!(wildcard_match("exact.pgm", "exact.pgm"));
        assert!(!wildcard_match("exact.pgm", "exact.pgm.bak"));
        assert!(!wildcard_match("", "x"));
        assert!(wildcard_match("", ""));
    }

    #[test]
    fn pgm_ascii_with_comments_and_small_maxval() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("a.pgm");
        fs::write(&path, "P2 # magic\n# a comment line\n2 2\n16\n0 8\n16 4\n").unwrap();
        let (h, w, px) = read_pgm(&path).unwrap();
        assert_eq!((h, w), (2, 2));
        // 8-bit values map v/255 regardless of the declared maxval
        assert_eq!(px, vec![0.0, 8.0 / 255.0, 16.0 / 255.0, 4.0 / 255.0]);
    }

    #[test]
    fn pgm_ascii_rejects_malformed_inputs() {
        let dir = TempDir::new().unwrap();
        let write = |name: &str, contents: &str| {
            let p = dir.path().join(name);
            fs::write(&p, contents).unwrap();
            p
        };
        let cases = [
            ("magic.pgm", "P3\n1 1\n255\n0\n"),
            ("over.pgm", "P2\n1 1\n100\n101\n"),
            ("short.pgm", "P2\n2 1\n255\n7\n"),
            ("long.pgm", "P2\n1 1\n255\n7 7\n"),
            ("maxval0.pgm", "P2\n1 1\n0\n0\n"),
            ("maxval16bit.pgm", "P2\n1 1\n65535\n0\n"),
            ("zero.pgm", "P2\n0 1\n255\n"),
        ];
        for (name, contents) in cases {
            let err = read_pgm(&write(name, contents)).unwrap_err();
            assert!(matches!(err, Error::Format(_)), "{name} gave {err:?}");
        }
    }

    #[test]
    fn pgm_binary_payload_is_strict() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("b.pgm");
        let mut bytes = b"P5\n2 1\n255\n".to_vec();
        bytes.extend([10u8, 250u8]);
        fs::write(&path, &bytes).unwrap();
        let (h, w, px) = read_pgm(&path).unwrap();
        assert_eq!((h, w), (1, 2));
        assert_eq!(px, vec![10.0 / 255.0, 250.0 / 255.0]);

        bytes.push(0); // trailing byte
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_pgm(&path), Err(Error::Format(_))));

        fs::write(&path, b"P5\n2 1\n255\n\x0a").unwrap(); // one byte short
        assert!(matches!(read_pgm(&path), Err(Error::Format(_))));
    }

    #[test]
    fn pgm_max_value_frame_is_all_ones() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("white.pgm");
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend([255u8; 6]);
        fs::write(&path, bytes).unwrap();
        let (_, _, px) = read_pgm(&path).unwrap();
        assert!(px.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn pgm_load_save_load_round_trip() {
        let dir = TempDir::new().unwrap();
        let original = dir.path().join("orig.pgm");
        let mut bytes = b"P5\n4 3\n255\n".to_vec();
        bytes.extend((0u8..12).map(|i| i * 20));
        fs::write(&original, bytes).unwrap();

        let (h, w, px) = read_pgm(&original).unwrap();
        let copy = dir.path().join("copy.pgm");
        write_pgm(&copy, h, w, &px).unwrap();
        let (h2, w2, px2) = read_pgm(&copy).unwrap();
        assert_eq!((h, w), (h2, w2));
        assert_eq!(px, px2);

        // a second save must be byte-identical
        let again = dir.path().join("again.pgm");
        write_pgm(&again, h2, w2, &px2).unwrap();
        assert_eq!(fs::read(&copy).unwrap(), fs::read(&again).unwrap());
    }

    #[test]
    fn mask_writer_uses_full_contrast() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.pgm");
        write_mask_pgm(&path, 1, 3, &[true, false, true]).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.ends_with(&[255, 0, 255]));
        let (_, _, px) = read_pgm(&path).unwrap();
        assert_eq!(px, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn png_grayscale_and_rgb_luma() {
        let dir = TempDir::new().unwrap();
        let gray_path = dir.path().join("g.png");
        image::GrayImage::from_raw(2, 1, vec![0, 128])
            .unwrap()
            .save(&gray_path)
            .unwrap();
        let (h, w, px) = read_png(&gray_path).unwrap();
        assert_eq!((h, w), (1, 2));
        assert_eq!(px, vec![0.0, 128.0 / 255.0]);

        let rgb_path = dir.path().join("c.png");
        image::RgbImage::from_raw(1, 1, vec![10, 100, 200])
            .unwrap()
            .save(&rgb_path)
            .unwrap();
        let (_, _, px) = read_png(&rgb_path).unwrap();
        let want = (0.299 * 10.0 + 0.587 * 100.0 + 0.114 * 200.0) / 255.0;
        assert!((px[0] - want).abs() < 1e-15);

        let rgba_path = dir.path().join("a.png");
        image::RgbaImage::from_raw(1, 1, vec![1, 2, 3, 4])
            .unwrap()
            .save(&rgba_path)
            .unwrap();
        assert!(matches!(read_png(&rgba_path), Err(Error::Format(_))));
    }

    #[test]
    fn load_frames_sorts_and_validates() {
        let dir = TempDir::new().unwrap();
        for (name, level) in [("b.pgm", 100u8), ("a.pgm", 0), ("c.pgm", 200)] {
            let mut bytes = b"P5\n2 1\n255\n".to_vec();
            bytes.extend([level, level]);
            fs::write(dir.path().join(name), bytes).unwrap();
        }
        let seq = load_frames(dir.path(), "*.pgm").unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!((seq.height, seq.width), (1, 2));
        // lexicographic name order, not directory order
        assert_eq!(seq.frames[0][0], 0.0);
        assert_eq!(seq.frames[1][0], 100.0 / 255.0);
        assert_eq!(seq.frames[2][0], 200.0 / 255.0);

        assert!(matches!(
            load_frames(dir.path(), "*.tif"),
            Err(Error::NotFound(_))
        ));

        let mut other = b"P5\n3 1\n255\n".to_vec();
        other.extend([1, 2, 3]);
        fs::write(dir.path().join("d.pgm"), other).unwrap();
        assert!(matches!(
            load_frames(dir.path(), "*.pgm"),
            Err(Error::Dimension(_))
        ));

        fs::write(dir.path().join("e.bmp"), b"junk").unwrap();
        assert!(matches!(
            load_frames(dir.path(), "e.*"),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn labels_round_trip_and_validation() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("labels.csv");
        // the canonical 121-frame split: 92 background, 29 foreground
        let labels: Vec<FrameLabel> = (0..121)
            .map(|i| {
                if i % 4 == 1 && i < 116 {
                    FrameLabel::Foreground
                } else {
                    FrameLabel::Background
                }
            })
            .collect();
        assert_eq!(
            labels
                .iter()
                .filter(|l| **l == FrameLabel::Foreground)
                .count(),
            29
        );
        write_labels(&path, &labels).unwrap();
        let loaded = load_labels(&path, 121).unwrap();
        assert_eq!(loaded, labels);
        assert_eq!(
            loaded
                .iter()
                .filter(|l| **l == FrameLabel::Background)
                .count(),
            92
        );

        let write_case = |contents: &str| {
            let p = dir.path().join("bad.csv");
            fs::write(&p, contents).unwrap();
            load_labels(&p, 2).unwrap_err()
        };
        for (name, contents) in [
            ("no header", "0,bg\n1,fg\n"),
            ("duplicate", "frame,label\n0,bg\n0,fg\n1,bg\n"),
            ("out of range", "frame,label\n0,bg\n2,fg\n"),
            ("missing frame", "frame,label\n0,bg\n"),
            ("unknown label", "frame,label\n0,bg\n1,xx\n"),
            ("bad index", "frame,label\nx,bg\n1,fg\n"),
        ] {
            let err = write_case(contents);
            assert!(matches!(err, Error::Label(_)), "{name}: {err:?}");
        }
    }

    #[test]
    fn vector_csv_round_trips_exact_bits() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("stream.csv");
        let frames = vec![
            vec![0.1, 0.2f64.sqrt(), 1.0 / 3.0],
            vec![1e-12, 0.999999999999, 0.0],
        ];
        let seq = FrameSequence::new(1, 3, frames, None, "synthetic:7".into()).unwrap();
        write_vector_csv(&path, &seq).unwrap();
        let loaded = read_vector_csv(&path).unwrap();
        assert_eq!(loaded.height, 1);
        assert_eq!(loaded.width, 3);
        for (a, b) in loaded
            .frames
            .iter()
            .flatten()
            .zip(seq.frames.iter().flatten())
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        fs::write(&path, "frame,c0\n1,0.5\n").unwrap();
        assert!(matches!(read_vector_csv(&path), Err(Error::Format(_))));
        fs::write(&path, "c0,c1\n0,0.5\n").unwrap();
        assert!(matches!(read_vector_csv(&path), Err(Error::Format(_))));
    }
}
