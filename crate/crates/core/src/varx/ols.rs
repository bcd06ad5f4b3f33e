//! Multi-response least squares through an unpivoted Householder QR.
//!
//! Columns are processed left to right, so a column whose remaining norm
//! falls under the rank tolerance is linearly dependent on the columns before
//! it and is reported by index.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LeastSquaresError {
    #[error("design has {rows} rows but {cols} columns")]
    Underdetermined { rows: usize, cols: usize },
    #[error("response has {response} rows but design has {design}")]
    RowMismatch { design: usize, response: usize },
    #[error("design column {column} is linearly dependent on earlier columns")]
    RankDeficient { column: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone)]
pub struct LeastSquaresFit {
    /// `m × k`: column `i` holds the coefficients of response `i`.
    pub coefficients: DMatrix<f64>,
    pub fitted: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    /// Diagonal of `(XᵀX)⁻¹`.
    pub inverse_gram_diagonal: Vec<f64>,
}

/// Rank tolerance on `|R_jj|`: machine epsilon × largest column norm × rows.
pub fn rank_tolerance(x: &DMatrix<f64>) -> f64 {
    let max_norm = x.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    f64::EPSILON * max_norm * x.nrows() as f64
}

/// Solves `min ‖X β − Y‖` column by column of `Y`.
pub fn least_squares(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<LeastSquaresFit, LeastSquaresError> {
    let (n, m) = x.shape();
    if y.nrows() != n {
        return Err(LeastSquaresError::RowMismatch {
            design: n,
            response: y.nrows(),
        });
    }
    if n < m {
        return Err(LeastSquaresError::Underdetermined { rows: n, cols: m });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LeastSquaresError::NonFinite("design"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LeastSquaresError::NonFinite("response"));
    }

    let tol = rank_tolerance(x);
    let k = y.ncols();
    let mut a = x.clone();
    let mut b = y.clone();
    let mut v = vec![0.0; n];
    for j in 0..m {
        let norm = (j..n).map(|i| a[(i, j)].powi(2)).sum::<f64>().sqrt();
        if norm <= tol {
            return Err(LeastSquaresError::RankDeficient { column: j });
        }
        // Reflect a[j.., j] onto -sign(a_jj)·norm·e_1.
        let alpha = if a[(j, j)] >= 0.0 { -norm } else { norm };
        for i in j..n {
            v[i] = a[(i, j)];
        }
        v[j] -= alpha;
        let vnorm2: f64 = (j..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 > 0.0 {
            for c in j..m {
                let s = (j..n).map(|i| v[i] * a[(i, c)]).sum::<f64>() * 2.0 / vnorm2;
                for i in j..n {
                    a[(i, c)] -= s * v[i];
                }
            }
            for c in 0..k {
                let s = (j..n).map(|i| v[i] * b[(i, c)]).sum::<f64>() * 2.0 / vnorm2;
                for i in j..n {
                    b[(i, c)] -= s * v[i];
                }
            }
        }
        a[(j, j)] = alpha;
    }

    // Back substitution R β = (Qᵀ Y)[..m].
    let mut beta = DMatrix::zeros(m, k);
    for c in 0..k {
        for j in (0..m).rev() {
            let s: f64 = ((j + 1)..m).map(|l| a[(j, l)] * beta[(l, c)]).sum();
            beta[(j, c)] = (b[(j, c)] - s) / a[(j, j)];
        }
    }

    // R⁻¹ by columns; diag((XᵀX)⁻¹) = squared row norms of R⁻¹.
    let mut rinv = DMatrix::zeros(m, m);
    for c in 0..m {
        for j in (0..=c).rev() {
            let rhs = if j == c { 1.0 } else { 0.0 };
            let s: f64 = ((j + 1)..=c).map(|l| a[(j, l)] * rinv[(l, c)]).sum();
            rinv[(j, c)] = (rhs - s) / a[(j, j)];
        }
    }
    let inverse_gram_diagonal = (0..m)
        .map(|j| (0..m).map(|c| rinv[(j, c)].powi(2)).sum())
        .collect();

    let fitted = x * &beta;
    let residuals = y - &fitted;
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(LeastSquaresError::NonFinite("coefficients"));
    }
    Ok(LeastSquaresFit {
        coefficients: beta,
        fitted,
        residuals,
        inverse_gram_diagonal,
    })
}
