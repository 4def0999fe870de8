use super::{solve_linear, Mat, NumericsError, Result};

/// Acceptance bound on the relative residual of a returned solution.
const RESIDUAL_RTOL: f64 = 1e-9;

/// `Acl^T P + P Acl + Q`.
pub fn lyapunov_residual(acl: &Mat, p: &Mat, q: &Mat) -> Result<Mat> {
    let atp = acl.transpose().mul(p)?;
    let pa = p.mul(acl)?;
    atp.add(&pa)?.add(q)
}

/// Solves the continuous Lyapunov equation `Acl^T P + P Acl = -Q`.
///
/// The equation is vectorised into an `n^2 x n^2` linear system (the Kronecker
/// form `(I ⊗ Acl^T + Acl^T ⊗ I) vec(P) = -vec(Q)`) and solved by Gaussian
/// elimination with partial pivoting. The result is symmetrised, then checked
/// for residual and positive definiteness; the latter is what certifies that
/// `Acl` was Hurwitz.
pub fn solve_lyapunov(acl: &Mat, q: &Mat) -> Result<Mat> {
    let n = acl.rows();
    if !acl.is_square() || q.shape() != (n, n) {
        return Err(NumericsError::DimensionMismatch(format!(
            "lyapunov with Acl {:?} and Q {:?}",
            acl.shape(),
            q.shape()
        )));
    }
    if !q.is_symmetric() {
        return Err(NumericsError::NotSymmetric);
    }
    q.check_positive_definite()?;

    // Row (i, j) of the system: sum_k Acl[k,i] P[k,j] + sum_k P[i,k] Acl[k,j] = -Q[i,j],
    // with unknown P[a,b] stored at a*n + b.
    let nn = n * n;
    let mut kron = Mat::zeros(nn, nn);
    let mut rhs = vec![0.0; nn];
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                kron[(row, k * n + j)] += acl[(k, i)];
                kron[(row, i * n + k)] += acl[(k, j)];
            }
            rhs[row] = -q[(i, j)];
        }
    }
    let vec_p = solve_linear(&kron, &rhs)?;
    let raw = Mat::from_row_major(n, n, vec_p)?;
    let p = raw.add(&raw.transpose())?.scale(0.5);

    let residual = lyapunov_residual(acl, &p, q)?.inf_norm();
    let bound = RESIDUAL_RTOL * q.inf_norm();
    if !(residual <= bound) {
        // ill-conditioned beyond what elimination could resolve
        return Err(NumericsError::SingularSystem {
            column: nn,
            pivot: residual,
        });
    }
    p.check_positive_definite()?;
    Ok(p)
}
