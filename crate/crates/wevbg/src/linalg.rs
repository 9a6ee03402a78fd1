//! Dense symmetric eigendecomposition and the small matrix/vector kit the
//! rest of the crate builds on.
//!
//! The eigensolver is a cyclic Jacobi iteration: it is compact, numerically
//! robust for the modest dimensions used here (block Gram matrices of a few
//! hundred rows at most), and produces orthonormal vectors as a by-product of
//! the accumulated rotations. Large pixel-space decompositions never touch a
//! full scatter matrix; [`snapshot_eigenbasis`] routes them through the
//! column Gram matrix instead.

use crate::error::{Error, Result};

/// Dot product. Panics on length mismatch; callers validate shapes at their
/// own boundaries.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot of unequal lengths");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Plain dense row-major matrix. Only the handful of operations the crate
/// needs; this is not a general linear-algebra type.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds from row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension(format!(
                    "ragged rows: expected {c} entries, found {}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Sum of the diagonal. Panics if the matrix is not square.
    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "trace of a non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }
}

/// Symmetric matrix with validated, exactly mirrored storage.
///
/// Construction checks finiteness and symmetry (entries must agree within
/// `1e-12`), then canonicalizes the lower triangle from the upper one so the
/// stored data is exactly symmetric no matter how it was assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Validates and canonicalizes a row-major `dim * dim` buffer.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for &x in &entries {
            if !x.is_finite() {
                return Err(Error::InvalidMatrix("non-finite entry".into()));
            }
        }
        let mut data = entries;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let upper = data[i * dim + j];
                let lower = data[j * dim + i];
                if (upper - lower).abs() > 1e-12 {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({i},{j}) and ({j},{i}) differ by {:e}",
                        (upper - lower).abs()
                    )));
                }
                data[j * dim + i] = upper;
            }
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    /// Builds from `f(i, j)` evaluated only for `i <= j`; the result is
    /// symmetric by construction.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::InvalidMatrix("non-finite entry".into()));
                }
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Ok(SymMatrix { dim, data })
    }

    /// Diagonal matrix from the given values. Panics on non-finite input.
    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            assert!(v.is_finite(), "non-finite diagonal value");
            data[i * dim + i] = v;
        }
        SymMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "matvec length mismatch");
        let mut out = vec![0.0; self.dim];
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.data[i * self.dim..(i + 1) * self.dim], x);
        }
        out
    }

    /// Adds `y yᵀ` in place. Each product is written to both triangles so the
    /// result stays exactly symmetric. Panics on length mismatch.
    pub fn add_outer(&mut self, y: &[f64]) {
        assert_eq!(y.len(), self.dim, "add_outer length mismatch");
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = y[i] * y[j];
                self.data[i * self.dim + j] += v;
                if i != j {
                    self.data[j * self.dim + i] = self.data[i * self.dim + j];
                }
            }
        }
    }
}

/// One eigenvalue with its unit eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Eigenpairs of a scatter matrix, sorted by non-increasing eigenvalue,
/// together with the mean the data was centered by and the number of data
/// columns the scatter was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub mean: Vec<f64>,
    pub pairs: Vec<EigenPair>,
    /// Number of data columns behind the scatter; bounds the rank.
    pub source_rank: usize,
}

impl EigenBasis {
    /// Pixel-space dimensionality.
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Number of eigenpairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Flips a vector so its first component with magnitude above `1e-10` is
/// positive. Gives every eigensolver output a deterministic sign.
fn normalize_sign(v: &mut [f64]) {
    for &x in v.iter() {
        if x.abs() > 1e-10 {
            if x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            return;
        }
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-12 * ||m||_F`, with a hard budget of 100 sweeps. Returned pairs are
/// sorted by non-increasing eigenvalue; vectors are orthonormal and
/// sign-normalized (first component with magnitude above `1e-10` is
/// positive).
pub fn eig_sym(m: &SymMatrix) -> Result<Vec<EigenPair>> {
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = m.entries().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let threshold = 1e-12 * m.frobenius_norm();
    let mut sweeps = 0;
    while off_diagonal_norm(&a, n) > threshold {
        if sweeps == 100 {
            return Err(Error::Convergence(format!(
                "jacobi sweep budget exhausted on a {n}x{n} matrix"
            )));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // t is tan of the rotation angle; the guarded branch avoids
                // overflowing theta^2 when the pivot is already tiny.
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let nrp = arp - s * (arq + tau * arp);
                    let nrq = arq + s * (arp - tau * arq);
                    a[r * n + p] = nrp;
                    a[p * n + r] = nrp;
                    a[r * n + q] = nrq;
                    a[q * n + r] = nrq;
                }
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = vrp - s * (vrq + tau * vrp);
                    v[r * n + q] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        sweeps += 1;
    }

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|j| {
            let mut vector: Vec<f64> = (0..n).map(|r| v[r * n + j]).collect();
            normalize_sign(&mut vector);
            EigenPair {
                value: a[j * n + j],
                vector,
            }
        })
        .collect();
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));
    Ok(pairs)
}

/// Spectral norm (largest eigenvalue magnitude) of a symmetric matrix.
pub fn spectral_norm(m: &SymMatrix) -> Result<f64> {
    let pairs = eig_sym(m)?;
    Ok(pairs.iter().map(|p| p.value.abs()).fold(0.0, f64::max))
}

/// Outer product `u vᵀ` of two equal-length vectors.
pub fn outer(u: &[f64], v: &[f64]) -> Result<Matrix> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "outer product of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let n = u.len();
    let mut m = Matrix::zeros(n, n);
    for (i, &ui) in u.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            m.set(i, j, ui * vj);
        }
    }
    Ok(m)
}

/// The single eigenvalue of `u vᵀ` that can differ from zero, namely `v·u`.
/// A rank-one outer product has eigenvalue zero with multiplicity `n - 1`;
/// the remaining one equals the trace.
pub fn outer_nonzero_eigenvalue(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "outer product of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    if norm(u) == 0.0 || norm(v) == 0.0 {
        return Err(Error::DegenerateInput(
            "outer product with a zero vector has no distinguished eigendirection".into(),
        ));
    }
    Ok(dot(v, u))
}

/// Smallest eigenvalue magnitude (relative to the largest) still treated as
/// genuinely non-zero by [`snapshot_eigenbasis`].
const NULL_EIGENVALUE_RATIO: f64 = 1e-10;

fn clamp_small_eigenvalues(pairs: &mut [EigenPair]) {
    let lmax = pairs.first().map_or(0.0, |p| p.value.max(0.0));
    let cutoff = NULL_EIGENVALUE_RATIO * lmax;
    for p in pairs.iter_mut() {
        if p.value < cutoff {
            p.value = 0.0;
        }
    }
}

/// Deterministic unit vector orthogonal to every vector in `existing`.
///
/// Coordinate axes are tried in order and orthogonalized twice against the
/// accepted vectors; the first candidate keeping more than half its norm
/// wins. If no axis clears that bar (possible when the span leaves only a
/// sliver of the space), the best candidate seen is used instead.
fn orthogonal_completion(existing: &[EigenPair], dim: usize) -> Result<Vec<f64>> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for axis in 0..dim {
        let mut cand = vec![0.0; dim];
        cand[axis] = 1.0;
        for _ in 0..2 {
            for p in existing {
                let proj = dot(&cand, &p.vector);
                if proj != 0.0 {
                    for (c, b) in cand.iter_mut().zip(&p.vector) {
                        *c -= proj * b;
                    }
                }
            }
        }
        let nrm = norm(&cand);
        if nrm > 0.5 {
            for c in cand.iter_mut() {
                *c /= nrm;
            }
            normalize_sign(&mut cand);
            return Ok(cand);
        }
        if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
            best = Some((nrm, cand));
        }
    }
    match best {
        Some((nrm, mut cand)) if nrm > 1e-6 => {
            for c in cand.iter_mut() {
                *c /= nrm;
            }
            normalize_sign(&mut cand);
            Ok(cand)
        }
        _ => Err(Error::DegenerateInput(
            "no orthogonal direction left for a null eigenvector".into(),
        )),
    }
}

/// Eigenbasis of the scatter `sum_k c_k c_kᵀ` of centered columns, without
/// ever forming the full pixel-space scatter when it would be large.
///
/// `columns` are the centered data vectors (length `D` each) and `mean` is
/// the vector they were centered by; the mean is carried into the returned
/// basis. When `D` exceeds the column count `n`, the decomposition runs on
/// the `n x n` Gram matrix and maps its eigenvectors back through the data;
/// otherwise the `D x D` scatter is decomposed directly. Either way the
/// result has `min(D, n)` pairs, eigenvalues clamped to zero below
/// `1e-10` of the largest, sorted non-increasing.
///
/// Gram eigenvectors with clamped eigenvalues cannot be mapped through the
/// data (the image of a null direction is pure cancellation noise), so their
/// slots are filled with deterministic unit vectors orthogonal to everything
/// already returned. Those vectors lie in the scatter's null space, which is
/// exactly what a zero eigenvalue calls for.
pub fn snapshot_eigenbasis(columns: &[Vec<f64>], mean: &[f64]) -> Result<EigenBasis> {
    let n = columns.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "snapshot basis needs at least 2 columns, got {n}"
        )));
    }
    let d = mean.len();
    if d == 0 {
        return Err(Error::Dimension("empty mean vector".into()));
    }
    for &x in mean {
        if !x.is_finite() {
            return Err(Error::InvalidInput("non-finite mean entry".into()));
        }
    }
    for (k, col) in columns.iter().enumerate() {
        if col.len() != d {
            return Err(Error::Dimension(format!(
                "column {k} has length {}, expected {d}",
                col.len()
            )));
        }
        if col.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry in column {k}"
            )));
        }
    }

    if d <= n {
        let mut scatter = SymMatrix::zeros(d);
        for col in columns {
            scatter.add_outer(col);
        }
        let mut pairs = eig_sym(&scatter)?;
        clamp_small_eigenvalues(&mut pairs);
        return Ok(EigenBasis {
            mean: mean.to_vec(),
            pairs,
            source_rank: n,
        });
    }

    let gram = SymMatrix::from_fn(n, |i, j| dot(&columns[i], &columns[j]))?;
    let gram_pairs = eig_sym(&gram)?;
    let lmax = gram_pairs.first().map_or(0.0, |p| p.value.max(0.0));
    let cutoff = NULL_EIGENVALUE_RATIO * lmax;

    let mut pairs: Vec<EigenPair> = Vec::with_capacity(n);
    for gp in &gram_pairs {
        if gp.value > 0.0 && gp.value >= cutoff {
            let mut mapped = vec![0.0; d];
            for (w, col) in gp.vector.iter().zip(columns) {
                if *w != 0.0 {
                    for (m_i, c_i) in mapped.iter_mut().zip(col) {
                        *m_i += w * c_i;
                    }
                }
            }
            let nrm = norm(&mapped);
            if !(nrm.is_finite() && nrm > 0.0) {
                return Err(Error::DegenerateInput(
                    "gram eigenvector mapped to an unnormalizable direction".into(),
                ));
            }
            for x in mapped.iter_mut() {
                *x /= nrm;
            }
            normalize_sign(&mut mapped);
            pairs.push(EigenPair {
                value: gp.value,
                vector: mapped,
            });
        } else {
            let vector = orthogonal_completion(&pairs, d)?;
            pairs.push(EigenPair { value: 0.0, vector });
        }
    }
    Ok(EigenBasis {
        mean: mean.to_vec(),
        pairs,
        source_rank: n,
    })
}
