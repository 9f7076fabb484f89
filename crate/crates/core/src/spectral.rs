//! Dense spectral utilities: a reproducible singular value decomposition of
//! the adjacency matrix and the scattering unitary built from it.
//!
//! Factorization is `A = P · diag(Λ) · Q`, where `Q` is the *adjoint* of the
//! usual right-singular-vector matrix. The scattering unitary is
//! `U = P · diag(e^{iλ}) · Q`.
//!
//! SVD factors are not unique, so the decomposition is normalized:
//!
//! * singular values are sorted in descending order;
//! * each column of `P` has its largest-magnitude entry (lowest index on
//!   ties) made positive, with the sign carried into the matching row of `Q`;
//! * columns inside a block of equal singular values are ordered by a
//!   lexicographic comparison of their rounded entries;
//! * the rows of `Q` belonging to the zero singular value are re-paired with
//!   the columns of `P` canonically (see [`pair_null_space`]).
//!
//! The first three rules leave `U` unchanged. The last one matters: on the
//! null space, `P₀·Q₀` is any isometry from `ker A` onto `ker Aᵀ`, and a raw
//! SVD routine picks one arbitrarily. Fixing it makes `U` a function of `A`
//! alone, independent of the SVD algorithm, and equivariant under node
//! relabelings that preserve the graph.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use faer::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Singular values at or below this fraction of `max(1, σ_max)` are treated
/// as exact zeros.
pub const NULL_TOLERANCE: f64 = 1e-9;
/// Relative gap below which two singular values count as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

const SIGN_TIE_TOLERANCE: f64 = 1e-12;
const ORDER_ROUNDING: f64 = 1e8;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("singular value decomposition did not converge")]
    NoConvergence,
    #[error("cannot write spectral dump to {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// `A = left · diag(singular_values) · right`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdTriple {
    /// `P`: columns are left singular vectors.
    pub left: RealMatrix,
    /// `Λ`, descending, non-negative.
    pub singular_values: Vec<f64>,
    /// `Q`: rows are (conjugated) right singular vectors.
    pub right: RealMatrix,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> RealMatrix {
        let mut scaled = self.left.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * &self.right
    }

    /// Number of singular values treated as zero.
    pub fn nullity(&self) -> usize {
        let cutoff = null_cutoff(&self.singular_values);
        self.singular_values
            .iter()
            .filter(|&&s| s <= cutoff)
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryCheck {
    pub unitary: bool,
    /// `max |(M·M† − I)_{ij}|`.
    pub deviation: f64,
}

fn check_square<T>(m: &DMatrix<T>) -> Result<usize, SpectralError> {
    if m.nrows() != m.ncols() {
        return Err(SpectralError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn null_cutoff(sv: &[f64]) -> f64 {
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    NULL_TOLERANCE * max.max(1.0)
}

/// Normalized singular value decomposition of a real square matrix.
pub fn svd(a: &RealMatrix) -> Result<SvdTriple, SpectralError> {
    let n = check_square(a)?;
    if a.iter().any(|x| !x.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let (u, v_t, sv) = raw_svd(a)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));

    let mut left = RealMatrix::zeros(n, n);
    let mut right = RealMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        left.set_column(k, &u.column(src));
        right.set_row(k, &v_t.row(src));
        values.push(sv[src].max(0.0));
    }

    fix_signs(&mut left, &mut right);
    order_degenerate_blocks(&mut left, &mut right, &values);
    pair_null_space(a, &left, &mut right, &values);

    Ok(SvdTriple {
        left,
        singular_values: values,
        right,
    })
}

/// Unnormalized `(U, Vᵀ, σ)` from faer. nalgebra's bidiagonal SVD returns
/// wrong factors for some rank-deficient inputs, so it is not used here.
fn raw_svd(a: &RealMatrix) -> Result<(RealMatrix, RealMatrix, Vec<f64>), SpectralError> {
    let (rows, cols) = a.shape();
    let m = Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let svd = m.svd().map_err(|_| SpectralError::NoConvergence)?;
    let (u, v) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    let left = RealMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]);
    let right_t = RealMatrix::from_fn(v.ncols(), v.nrows(), |i, j| v[(j, i)]);
    let values = (0..s.nrows()).map(|i| s[i]).collect();
    Ok((left, right_t, values))
}

fn fix_signs(left: &mut RealMatrix, right: &mut RealMatrix) {
    for j in 0..left.ncols() {
        let col = left.column(j);
        let max = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let pivot = col
            .iter()
            .position(|x| x.abs() >= max - SIGN_TIE_TOLERANCE)
            .unwrap_or(0);
        if col[pivot] < 0.0 {
            left.column_mut(j).neg_mut();
            right.row_mut(j).neg_mut();
        }
    }
}

fn order_degenerate_blocks(left: &mut RealMatrix, right: &mut RealMatrix, values: &[f64]) {
    let n = values.len();
    let scale = values.first().copied().unwrap_or(0.0).max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end - 1] - values[end] <= DEGENERACY_TOLERANCE * scale {
            end += 1;
        }
        if end - start > 1 {
            let key = |j: usize| -> Vec<i64> {
                left.column(j)
                    .iter()
                    .map(|x| (x * ORDER_ROUNDING).round() as i64)
                    .collect()
            };
            let mut block: Vec<usize> = (start..end).collect();
            block.sort_by(|&i, &j| key(j).cmp(&key(i)).then(i.cmp(&j)));
            let cols: Vec<_> = block.iter().map(|&j| left.column(j).into_owned()).collect();
            let rows: Vec<_> = block.iter().map(|&j| right.row(j).into_owned()).collect();
            for (offset, (c, r)) in cols.into_iter().zip(rows).enumerate() {
                left.set_column(start + offset, &c);
                right.set_row(start + offset, &r);
            }
        }
        start = end;
    }
}

/// Canonical partner rows of `Q` for the zero singular value.
///
/// With `C` the null columns of `P` (a basis of `ker Aᵀ`) and `K` the null
/// rows of `Q` transposed (a basis of `ker A`), the null block of `U` is
/// `C·Z·Kᵀ` for some orthogonal `Z`. `Z` is taken as the orthogonal polar
/// factor of `Cᵀ·(I − εAᵀ)⁻¹·K`, which carries each direction of `ker A`
/// backwards along paths of the graph onto `ker Aᵀ`. The product `C·Z·Kᵀ`
/// does not depend on the bases chosen for either null space.
///
/// `ε = 1 / (1 + max column sum of |A|)` keeps `I − εAᵀ` invertible. If the
/// transport matrix is singular, its polar factor (and so the pairing) is
/// only as canonical as the SVD of that small matrix.
fn pair_null_space(a: &RealMatrix, left: &RealMatrix, right: &mut RealMatrix, values: &[f64]) {
    let n = values.len();
    let cutoff = null_cutoff(values);
    let Some(first_null) = values.iter().position(|&s| s <= cutoff) else {
        return;
    };
    let k = n - first_null;
    let c = left.columns(first_null, k).into_owned();
    let basis = right.rows(first_null, k).transpose();

    let max_col_sum = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let eps = 1.0 / (1.0 + max_col_sum);
    let resolvent = RealMatrix::identity(n, n) - a.transpose() * eps;
    let transported = match resolvent.lu().solve(&basis) {
        Some(x) => x,
        // unreachable: ‖εAᵀ‖∞ < 1
        None => return,
    };
    let overlap = c.transpose() * transported;
    let Ok((pu, pvt, _)) = raw_svd(&overlap) else {
        return;
    };
    let z = pu * pvt;
    let paired = z * basis.transpose();
    for r in 0..k {
        right.set_row(first_null + r, &paired.row(r));
    }
}

/// `U = P · diag(e^{iλ}) · Q` for the normalized SVD of `a`.
pub fn scattering_unitary(a: &RealMatrix) -> Result<ComplexMatrix, SpectralError> {
    let triple = svd(a)?;
    Ok(unitary_from_svd(&triple))
}

pub fn unitary_from_svd(triple: &SvdTriple) -> ComplexMatrix {
    let n = triple.singular_values.len();
    let mut phased = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let phase = Complex64::from_polar(1.0, triple.singular_values[j]);
        for i in 0..n {
            phased[(i, j)] = phase * triple.left[(i, j)];
        }
    }
    phased * triple.right.map(|x| Complex64::new(x, 0.0))
}

pub fn unitary_deviation(m: &ComplexMatrix) -> Result<f64, SpectralError> {
    let n = check_square(m)?;
    let prod = m * m.adjoint();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(dev)
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> Result<UnitaryCheck, SpectralError> {
    let deviation = unitary_deviation(m)?;
    Ok(UnitaryCheck {
        unitary: deviation <= tol,
        deviation,
    })
}

/// Same as [`unitary_deviation`] for a real matrix (`M·Mᵀ − I`).
pub fn orthogonal_deviation(m: &RealMatrix) -> Result<f64, SpectralError> {
    let n = check_square(m)?;
    let prod = m * m.transpose();
    Ok((prod - RealMatrix::identity(n, n)).amax())
}

/// Writes `P.csv`, `Q.csv`, `singular_values.csv` and `U.csv` (real and
/// imaginary parts interleaved per entry) into `dir`.
pub fn dump_csv(
    triple: &SvdTriple,
    unitary: &ComplexMatrix,
    dir: impl AsRef<Path>,
) -> Result<(), SpectralError> {
    let dir = dir.as_ref();
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| SpectralError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;

    let real_csv = |m: &RealMatrix| {
        let mut s = String::new();
        for i in 0..m.nrows() {
            let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    };
    let mut sv = String::from("index,singular_value\n");
    for (k, s) in triple.singular_values.iter().enumerate() {
        let _ = writeln!(sv, "{k},{s:?}");
    }
    let mut u = String::new();
    for i in 0..unitary.nrows() {
        let row: Vec<String> = unitary
            .row(i)
            .iter()
            .map(|z| format!("{:?},{:?}", z.re, z.im))
            .collect();
        let _ = writeln!(u, "{}", row.join(","));
    }
    for (name, body) in [
        ("P.csv", real_csv(&triple.left)),
        ("Q.csv", real_csv(&triple.right)),
        ("singular_values.csv", sv),
        ("U.csv", u),
    ] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io(&path))?;
    }
    Ok(())
}
