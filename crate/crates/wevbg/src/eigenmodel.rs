//! Base-model construction: picking eigenvector subsets and using them to
//! project, reconstruct, and estimate backgrounds.
//!
//! A selection names positions in the descending-eigenvalue order, so
//! `strongest:k` is the classic eigen-background choice and `weakest:k`
//! takes the directions the training motion barely touched. "Weakest" is
//! defined over the eigenvectors actually computed for the block (at most
//! one per training frame), not over the full pixel-space null space.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, EigenBasis};

/// A subset of eigenvector positions in descending-eigenvalue order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    /// The `k` largest-eigenvalue directions.
    Strongest(usize),
    /// The `k` smallest-eigenvalue directions.
    Weakest(usize),
    /// Explicit 1-based positions, strictly increasing.
    Indices(Vec<usize>),
    /// Every computed eigenvector.
    All,
}

impl Selection {
    /// Parses the selection mini-grammar: `strongest:k`, `weakest:k`,
    /// `idx:1,3,30`, or `all`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "all" {
            return Ok(Selection::All);
        }
        if let Some(k) = s.strip_prefix("strongest:") {
            return Ok(Selection::Strongest(parse_count(k)?));
        }
        if let Some(k) = s.strip_prefix("weakest:") {
            return Ok(Selection::Weakest(parse_count(k)?));
        }
        if let Some(list) = s.strip_prefix("idx:") {
            let mut indices = Vec::new();
            for part in list.split(',') {
                let idx: usize = part
                    .trim()
                    .parse()
                    .map_err(|_| Error::Selection(format!("bad index {part:?} in {s:?}")))?;
                if idx == 0 {
                    return Err(Error::Selection("indices are 1-based; 0 is invalid".into()));
                }
                if let Some(&last) = indices.last() {
                    if idx <= last {
                        return Err(Error::Selection(format!(
                            "indices must be strictly increasing, got {idx} after {last}"
                        )));
                    }
                }
                indices.push(idx);
            }
            if indices.is_empty() {
                return Err(Error::Selection("empty index list".into()));
            }
            return Ok(Selection::Indices(indices));
        }
        Err(Error::Selection(format!(
            "cannot parse {s:?} (expected strongest:k, weakest:k, idx:i,j,..., or all)"
        )))
    }

    /// Canonical grammar string; `parse(descriptor())` round-trips.
    pub fn descriptor(&self) -> String {
        match self {
            Selection::Strongest(k) => format!("strongest:{k}"),
            Selection::Weakest(k) => format!("weakest:{k}"),
            Selection::Indices(idx) => {
                let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                format!("idx:{}", parts.join(","))
            }
            Selection::All => "all".to_string(),
        }
    }

    /// Resolves to 0-based positions into a basis of `m` eigenpairs.
    pub fn apply(&self, m: usize) -> Result<Vec<usize>> {
        if m == 0 {
            return Err(Error::Selection("selection over an empty basis".into()));
        }
        match self {
            Selection::Strongest(k) => {
                check_count(*k, m)?;
                Ok((0..*k).collect())
            }
            Selection::Weakest(k) => {
                check_count(*k, m)?;
                Ok((m - *k..m).collect())
            }
            Selection::Indices(indices) => {
                for &idx in indices {
                    if idx > m {
                        return Err(Error::Selection(format!(
                            "index {idx} exceeds basis size {m}"
                        )));
                    }
                }
                Ok(indices.iter().map(|i| i - 1).collect())
            }
            Selection::All => Ok((0..m).collect()),
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

fn parse_count(s: &str) -> Result<usize> {
    let k: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::Selection(format!("bad count {s:?}")))?;
    if k == 0 {
        return Err(Error::Selection("count must be at least 1".into()));
    }
    Ok(k)
}

fn check_count(k: usize, m: usize) -> Result<()> {
    if k > m {
        return Err(Error::Selection(format!(
            "{k} eigenvectors requested, basis has {m}"
        )));
    }
    Ok(())
}

/// The mean image plus a selected orthonormal eigenvector subset of one
/// block, with the matching eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseModel {
    pub mean: Vec<f64>,
    /// Selected unit eigenvectors, one column per selected position, in
    /// selection order.
    pub basis: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub selection: Selection,
    pub block_shape: (usize, usize),
}

/// Builds the model for one block by resolving `selection` against the
/// basis. The basis mean is carried over; `block_shape` must cover exactly
/// the basis dimensionality.
pub fn build_base_model(
    basis: &EigenBasis,
    selection: &Selection,
    block_shape: (usize, usize),
) -> Result<BaseModel> {
    let d = basis.dim();
    let (h, w) = block_shape;
    if h * w != d {
        return Err(Error::Dimension(format!(
            "block shape {h}x{w} covers {} pixels, basis has {d}",
            h * w
        )));
    }
    let positions = selection.apply(basis.len())?;
    let columns: Vec<Vec<f64>> = positions
        .iter()
        .map(|&p| basis.pairs[p].vector.clone())
        .collect();
    let eigenvalues: Vec<f64> = positions.iter().map(|&p| basis.pairs[p].value).collect();
    Ok(BaseModel {
        mean: basis.mean.clone(),
        basis: columns,
        eigenvalues,
        selection: selection.clone(),
        block_shape,
    })
}

impl BaseModel {
    /// Pixel dimensionality `D`.
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Number of selected eigenvectors `M`.
    pub fn m(&self) -> usize {
        self.basis.len()
    }

    /// Coefficients of the centered image in the selected subspace:
    /// the dot of each basis column with `image - mean`.
    pub fn project(&self, image: &[f64]) -> Result<Vec<f64>> {
        if image.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "image has {} pixels, model expects {}",
                image.len(),
                self.dim()
            )));
        }
        let centered: Vec<f64> = image.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        Ok(self.basis.iter().map(|col| dot(col, &centered)).collect())
    }

    /// Maps coefficients back to pixel space: basis times coefficients,
    /// plus the mean.
    pub fn reconstruct(&self, coefficients: &[f64]) -> Result<Vec<f64>> {
        if coefficients.len() != self.m() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a {}-vector model",
                coefficients.len(),
                self.m()
            )));
        }
        let mut out = self.mean.clone();
        for (c, col) in coefficients.iter().zip(&self.basis) {
            if *c != 0.0 {
                for (o, b) in out.iter_mut().zip(col) {
                    *o += c * b;
                }
            }
        }
        Ok(out)
    }

    /// Background estimate: the image's orthogonal projection onto the
    /// selected subspace, shifted by the mean. No range clamping happens
    /// here — estimates are clamped where frames are assembled.
    pub fn estimate_background(&self, image: &[f64]) -> Result<Vec<f64>> {
        let coeffs = self.project(image)?;
        self.reconstruct(&coeffs)
    }

    /// Serializes to the flat binary container (see `docs/model_format.md`):
    /// an 8-byte magic, a little-endian `u32` header length, a JSON header,
    /// then little-endian `f64`s — mean, basis columns in order, eigenvalues.
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&Header {
            d: self.dim(),
            m: self.m(),
            block_shape: [self.block_shape.0, self.block_shape.1],
            selection: self.selection.descriptor(),
        })
        .expect("header serialization cannot fail");
        let mut out = Vec::with_capacity(
            MAGIC.len() + 4 + header.len() + 8 * (self.dim() * (1 + self.m()) + self.m()),
        );
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for v in self
            .mean
            .iter()
            .chain(self.basis.iter().flatten())
            .chain(self.eigenvalues.iter())
        {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses the binary container, validating the layout strictly:
    /// magic, header consistency, exact float payload length, finite
    /// values, and orthonormal basis columns.
    pub fn from_bytes(bytes: &[u8]) -> Result<BaseModel> {
        let after_magic = bytes
            .strip_prefix(MAGIC)
            .ok_or_else(|| Error::Format("not a base-model container (bad magic)".into()))?;
        if after_magic.len() < 4 {
            return Err(Error::Format("truncated header length".into()));
        }
        let (len_bytes, rest) = after_magic.split_at(4);
        let header_len = u32::from_le_bytes(len_bytes.try_into().expect("4 bytes")) as usize;
        if rest.len() < header_len {
            return Err(Error::Format("truncated header".into()));
        }
        let (header_bytes, payload) = rest.split_at(header_len);
        let header: Header = serde_json::from_slice(header_bytes)
            .map_err(|e| Error::Format(format!("bad container header: {e}")))?;
        let [h, w] = header.block_shape;
        if h * w != header.d {
            return Err(Error::Format(format!(
                "header block shape {h}x{w} does not cover d={}",
                header.d
            )));
        }
        if header.m == 0 {
            return Err(Error::Format("header declares an empty basis".into()));
        }
        let selection = Selection::parse(&header.selection)
            .map_err(|e| Error::Format(format!("bad selection descriptor in header: {e}")))?;

        let float_count = header.d * (1 + header.m) + header.m;
        if payload.len() != float_count * 8 {
            return Err(Error::Format(format!(
                "expected {} payload bytes, found {}",
                float_count * 8,
                payload.len()
            )));
        }
        let mut floats = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        let mut take = |n: usize| -> Result<Vec<f64>> {
            let vals: Vec<f64> = floats.by_ref().take(n).collect();
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(
                    "non-finite value in container payload".into(),
                ));
            }
            Ok(vals)
        };
        let mean = take(header.d)?;
        let basis: Vec<Vec<f64>> = (0..header.m)
            .map(|_| take(header.d))
            .collect::<Result<_>>()?;
        let eigenvalues = take(header.m)?;

        for i in 0..basis.len() {
            for j in i..basis.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot(&basis[i], &basis[j]) - want).abs() > 1e-8 {
                    return Err(Error::Format(format!(
                        "basis columns {i} and {j} are not orthonormal"
                    )));
                }
            }
        }
        Ok(BaseModel {
            mean,
            basis,
            eigenvalues,
            selection,
            block_shape: (h, w),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<BaseModel> {
        BaseModel::from_bytes(&fs::read(path)?)
    }
}

const MAGIC: &[u8; 8] = b"WEVBGBM1";

#[derive(Serialize, Deserialize)]
struct Header {
    d: usize,
    m: usize,
    block_shape: [usize; 2],
    selection: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_sym, norm, snapshot_eigenbasis};
    use crate::streamstats::batch_scatter;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // ---------------------------------------------------------------
    // Independent oracle: least-squares projection onto the selected
    // columns via explicitly formed normal equations and Gaussian
    // elimination. Shares nothing with project/reconstruct.
    // ---------------------------------------------------------------

    fn least_squares_projection(model: &BaseModel, image: &[f64]) -> Vec<f64> {
        let m = model.m();
        // normal matrix G = BᵀB and right-hand side Bᵀ(image - mean)
        let mut g = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        let centered: Vec<f64> = image
            .iter()
            .zip(&model.mean)
            .map(|(v, mu)| v - mu)
            .collect();
        for i in 0..m {
            for j in 0..m {
                g[i * m + j] = dot(&model.basis[i], &model.basis[j]);
            }
            rhs[i] = dot(&model.basis[i], &centered);
        }
        // gaussian elimination with partial pivoting
        for col in 0..m {
            let mut piv = col;
            for r in col + 1..m {
                if g[r * m + col].abs() > g[piv * m + col].abs() {
                    piv = r;
                }
            }
            for j in 0..m {
                g.swap(col * m + j, piv * m + j);
            }
            rhs.swap(col, piv);
            for r in col + 1..m {
                let f = g[r * m + col] / g[col * m + col];
                for j in col..m {
                    g[r * m + j] -= f * g[col * m + j];
                }
                rhs[r] -= f * rhs[col];
            }
        }
        let mut a = vec![0.0; m];
        for row in (0..m).rev() {
            let mut acc = rhs[row];
            for j in row + 1..m {
                acc -= g[row * m + j] * a[j];
            }
            a[row] = acc / g[row * m + row];
        }
        // map back to pixel space
        let mut out = model.mean.clone();
        for (coef, col) in a.iter().zip(&model.basis) {
            for (o, b) in out.iter_mut().zip(col) {
                *o += coef * b;
            }
        }
        out
    }

    fn rmse(a: &[f64], b: &[f64]) -> f64 {
        let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        (s / a.len() as f64).sqrt()
    }

    fn random_columns(d: usize, n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect();
        let mut mean = vec![0.0; d];
        for col in &raw {
            for (m, v) in mean.iter_mut().zip(col) {
                *m += v / n as f64;
            }
        }
        let centered = raw
            .iter()
            .map(|c| c.iter().zip(&mean).map(|(v, m)| v - m).collect())
            .collect();
        (centered, mean)
    }

    // ---------------------------------------------------------------
    // Selection
    // ---------------------------------------------------------------

    #[test]
    fn selection_grammar_round_trips() {
        for s in [
            "strongest:1",
            "strongest:10",
            "weakest:7",
            "idx:1,3,30",
            "all",
        ] {
            let sel = Selection::parse(s).unwrap();
            assert_eq!(sel.descriptor(), s);
            assert_eq!(Selection::parse(&sel.descriptor()).unwrap(), sel);
        }
        assert_eq!(Selection::parse(" all ").unwrap(), Selection::All);
    }

    #[test]
    fn selection_rejects_malformed_specs() {
        for s in [
            "strongest:0",
            "weakest:0",
            "strongest:",
            "strongest:abc",
            "weakest:-3",
            "idx:",
            "idx:0",
            "idx:3,1",
            "idx:2,2",
            "idx:1,,3",
            "bogus",
            "",
            "idx",
        ] {
            assert!(
                matches!(Selection::parse(s), Err(Error::Selection(_))),
                "{s:?} should be rejected"
            );
        }
    }

    #[test]
    fn selection_positions() {
        assert_eq!(Selection::Strongest(2).apply(5).unwrap(), vec![0, 1]);
        assert_eq!(Selection::Weakest(2).apply(5).unwrap(), vec![3, 4]);
        assert_eq!(
            Selection::Indices(vec![1, 3, 5]).apply(5).unwrap(),
            vec![0, 2, 4]
        );
        assert_eq!(Selection::All.apply(3).unwrap(), vec![0, 1, 2]);
        assert!(matches!(
            Selection::Strongest(6).apply(5),
            Err(Error::Selection(_))
        ));
        assert!(matches!(
            Selection::Weakest(6).apply(5),
            Err(Error::Selection(_))
        ));
        assert!(matches!(
            Selection::Indices(vec![1, 6]).apply(5),
            Err(Error::Selection(_))
        ));
        assert!(matches!(Selection::All.apply(0), Err(Error::Selection(_))));
    }

    #[test]
    fn weakest_full_equals_strongest_full() {
        let (cols, mean) = random_columns(6, 4, 0xe16e_0001);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        let a = build_base_model(&basis, &Selection::Strongest(basis.len()), (1, 6)).unwrap();
        let b = build_base_model(&basis, &Selection::Weakest(basis.len()), (1, 6)).unwrap();
        assert_eq!(a.basis, b.basis);
        assert_eq!(a.eigenvalues, b.eigenvalues);
    }

    // ---------------------------------------------------------------
    // build_base_model
    // ---------------------------------------------------------------

    #[test]
    fn strongest_one_aligns_with_dominant_scatter_direction() {
        // data spread along a known direction plus small isotropic noise
        let mut rng = ChaCha8Rng::seed_from_u64(0xe16e_0002);
        let d = 8;
        let u: Vec<f64> = {
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            let n = norm(&raw);
            raw.iter().map(|v| v / n).collect()
        };
        let raw: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let along = 4.0 * (rng.random::<f64>() - 0.5);
                (0..d)
                    .map(|j| along * u[j] + 0.05 * (rng.random::<f64>() - 0.5))
                    .collect()
            })
            .collect();
        let state = batch_scatter(&raw).unwrap();
        let centered: Vec<Vec<f64>> = raw
            .iter()
            .map(|x| x.iter().zip(&state.mean).map(|(v, m)| v - m).collect())
            .collect();
        let basis = snapshot_eigenbasis(&centered, &state.mean).unwrap();
        let model = build_base_model(&basis, &Selection::Strongest(1), (2, 4)).unwrap();

        // oracle: dominant eigenvector of the directly formed scatter
        let oracle = &eig_sym(&state.scatter).unwrap()[0].vector;
        assert!(dot(&model.basis[0], oracle).abs() > 0.999);
        assert_eq!(model.m(), 1);
        assert_eq!(model.selection, Selection::Strongest(1));
    }

    #[test]
    fn build_validates_block_shape() {
        let (cols, mean) = random_columns(6, 4, 0xe16e_0003);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        assert!(matches!(
            build_base_model(&basis, &Selection::All, (2, 4)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            build_base_model(&basis, &Selection::Strongest(5), (2, 3)),
            Err(Error::Selection(_))
        ));
    }

    // ---------------------------------------------------------------
    // project / reconstruct / estimate_background
    // ---------------------------------------------------------------

    #[test]
    fn project_mean_is_origin_and_columns_are_axes() {
        let (cols, mean) = random_columns(5, 4, 0xe16e_0004);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        let model = build_base_model(&basis, &Selection::All, (1, 5)).unwrap();

        let coeffs = model.project(&model.mean).unwrap();
        assert!(coeffs.iter().all(|c| c.abs() < 1e-12));

        for j in 0..model.m() {
            let image: Vec<f64> = model
                .mean
                .iter()
                .zip(&model.basis[j])
                .map(|(m, b)| m + b)
                .collect();
            let coeffs = model.project(&image).unwrap();
            for (i, c) in coeffs.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c - want).abs() < 1e-9, "coefficient {i} of column {j}");
            }
        }
    }

    #[test]
    fn complete_basis_preserves_norms_and_round_trips() {
        // d <= n gives a complete orthonormal basis of pixel space
        let (cols, mean) = random_columns(4, 9, 0xe16e_0005);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        assert_eq!(basis.len(), 4);
        let model = build_base_model(&basis, &Selection::All, (2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0xe16e_0006);
        for _ in 0..50 {
            let image: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let coeffs = model.project(&image).unwrap();
            let centered_norm = {
                let c: Vec<f64> = image.iter().zip(&model.mean).map(|(v, m)| v - m).collect();
                norm(&c)
            };
            assert!((norm(&coeffs) - centered_norm).abs() < 1e-9);
            let back = model.reconstruct(&coeffs).unwrap();
            for (a, b) in back.iter().zip(&image) {
                assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn zero_coefficients_reconstruct_the_mean() {
        let (cols, mean) = random_columns(5, 3, 0xe16e_0007);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        let model = build_base_model(&basis, &Selection::Strongest(2), (1, 5)).unwrap();
        assert_eq!(model.reconstruct(&[0.0, 0.0]).unwrap(), model.mean);
    }

    #[test]
    fn partial_round_trip_matches_least_squares_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xe16e_0008);
        let (cols, mean) = random_columns(12, 8, 0xe16e_0009);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        for sel in [
            Selection::Strongest(3),
            Selection::Weakest(3),
            Selection::Indices(vec![2, 5]),
        ] {
            let model = build_base_model(&basis, &sel, (3, 4)).unwrap();
            for _ in 0..20 {
                let image: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
                let ours = model.estimate_background(&image).unwrap();
                let oracle = least_squares_projection(&model, &image);
                for (a, b) in ours.iter().zip(&oracle) {
                    assert!((a - b).abs() < 1e-9, "{sel}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn estimate_background_is_idempotent_with_orthogonal_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xe16e_000a);
        let (cols, mean) = random_columns(10, 6, 0xe16e_000b);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        let model = build_base_model(&basis, &Selection::Strongest(3), (2, 5)).unwrap();
        for _ in 0..20 {
            let image: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
            let once = model.estimate_background(&image).unwrap();
            let twice = model.estimate_background(&once).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                assert!((a - b).abs() < 1e-9);
            }
            // the un-modeled remainder is orthogonal to every basis column
            let residual: Vec<f64> = image.iter().zip(&once).map(|(v, e)| v - e).collect();
            for col in &model.basis {
                assert!(dot(col, &residual).abs() < 1e-8);
            }
        }
        let mean_est = model.estimate_background(&model.mean).unwrap();
        for (a, b) in mean_est.iter().zip(&model.mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn nested_strongest_reconstruction_error_is_monotone() {
        let (cols, mean) = random_columns(16, 10, 0xe16e_000c);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        let frames: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| c.iter().zip(&mean).map(|(v, m)| v + m).collect())
            .collect();
        let mut previous = f64::MAX;
        for k in 1..=basis.len() {
            let model = build_base_model(&basis, &Selection::Strongest(k), (4, 4)).unwrap();
            let mean_rmse = frames
                .iter()
                .map(|f| rmse(&model.estimate_background(f).unwrap(), f))
                .sum::<f64>()
                / frames.len() as f64;
            assert!(
                mean_rmse <= previous + 1e-12,
                "k={k}: rmse {mean_rmse} exceeds {previous}"
            );
            previous = mean_rmse;
        }
        // the complete selection reconstructs training frames exactly
        assert!(previous < 1e-10);
    }

    #[test]
    fn dimension_errors_on_mismatched_inputs() {
        let (cols, mean) = random_columns(5, 3, 0xe16e_000d);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        let model = build_base_model(&basis, &Selection::Strongest(2), (1, 5)).unwrap();
        assert!(matches!(model.project(&[0.0; 4]), Err(Error::Dimension(_))));
        assert!(matches!(
            model.reconstruct(&[0.0; 3]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            model.estimate_background(&[0.0; 6]),
            Err(Error::Dimension(_))
        ));
    }

    // ---------------------------------------------------------------
    // serialization
    // ---------------------------------------------------------------

    #[test]
    fn container_round_trip_is_bit_exact() {
        let (cols, mean) = random_columns(6, 5, 0xe16e_000e);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        let model = build_base_model(&basis, &Selection::Weakest(3), (2, 3)).unwrap();
        let bytes = model.to_bytes();
        let loaded = BaseModel::from_bytes(&bytes).unwrap();
        assert_eq!(loaded.selection, model.selection);
        assert_eq!(loaded.block_shape, model.block_shape);
        for (a, b) in loaded.mean.iter().zip(&model.mean) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (ca, cb) in loaded.basis.iter().zip(&model.basis) {
            for (a, b) in ca.iter().zip(cb) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        for (a, b) in loaded.eigenvalues.iter().zip(&model.eigenvalues) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // serialization is deterministic
        assert_eq!(bytes, loaded.to_bytes());
    }

    #[test]
    fn container_save_load_via_files() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("block.bm");
        let (cols, mean) = random_columns(4, 3, 0xe16e_000f);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        let model = build_base_model(&basis, &Selection::All, (2, 2)).unwrap();
        model.save(&path).unwrap();
        assert_eq!(BaseModel::load(&path).unwrap(), model);
    }

    #[test]
    fn container_rejects_corruption() {
        let (cols, mean) = random_columns(4, 3, 0xe16e_0010);
        let basis = snapshot_eigenbasis(&cols, &mean).unwrap();
        let model = build_base_model(&basis, &Selection::All, (2, 2)).unwrap();
        let good = model.to_bytes();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            BaseModel::from_bytes(&bad_magic),
            Err(Error::Format(_))
        ));

        let truncated = &good[..good.len() - 8];
        assert!(matches!(
            BaseModel::from_bytes(truncated),
            Err(Error::Format(_))
        ));

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(matches!(
            BaseModel::from_bytes(&trailing),
            Err(Error::Format(_))
        ));

        // flip one basis byte hard enough to break orthonormality
        let mut skewed = good.clone();
        let float_base = skewed.len() - 8 * (model.m() + model.dim() * model.m());
        skewed[float_base..float_base + 8].copy_from_slice(&10.0f64.to_le_bytes());
        assert!(matches!(
            BaseModel::from_bytes(&skewed),
            Err(Error::Format(_))
        ));

        assert!(matches!(
            BaseModel::from_bytes(b"short"),
            Err(Error::Format(_))
        ));
    }
}
