use super::{Mat, NumericsError, Result};

/// Relative pivot threshold below which a system is declared singular.
const SINGULAR_RTOL: f64 = 1e-12;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "solve {}x{} with rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut m = a.clone();
    let mut x = b.to_vec();

    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(piv_abs > SINGULAR_RTOL * scale) {
            return Err(NumericsError::SingularSystem {
                column: col,
                pivot: piv_abs,
            });
        }
        if piv_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv_row, j)];
                m[(piv_row, j)] = tmp;
            }
            x.swap(col, piv_row);
        }
        let pivot = m[(col, col)];
        for r in (col + 1)..n {
            let factor = m[(r, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                m[(r, j)] -= factor * m[(col, j)];
            }
            x[r] -= factor * x[col];
        }
    }

    for row in (0..n).rev() {
        let tail: f64 = ((row + 1)..n).map(|j| m[(row, j)] * x[j]).sum();
        x[row] = (x[row] - tail) / m[(row, row)];
    }
    Ok(x)
}

fn determinant(a: &Mat) -> f64 {
    let n = a.rows();
    let mut m = a.clone();
    let mut det = 1.0;
    for col in 0..n {
        let piv_row = (col..n)
            .max_by(|&r1, &r2| m[(r1, col)].abs().total_cmp(&m[(r2, col)].abs()))
            .unwrap_or(col);
        let pivot = m[(piv_row, col)];
        if pivot == 0.0 {
            return 0.0;
        }
        if piv_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv_row, j)];
                m[(piv_row, j)] = tmp;
            }
            det = -det;
        }
        det *= pivot;
        for r in (col + 1)..n {
            let factor = m[(r, col)] / pivot;
            for j in col..n {
                m[(r, j)] -= factor * m[(col, j)];
            }
        }
    }
    det
}

/// Determinants of the leading `k x k` submatrices, `k = 1..=n`.
pub fn leading_minors(a: &Mat) -> Vec<f64> {
    (1..=a.rows().min(a.cols()))
        .map(|k| {
            let mut sub = Mat::zeros(k, k);
            for i in 0..k {
                for j in 0..k {
                    sub[(i, j)] = a[(i, j)];
                }
            }
            determinant(&sub)
        })
        .collect()
}
