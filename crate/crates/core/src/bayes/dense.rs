//! Tiny row-major dense routines for the ≤ 4-parameter Gibbs updates; these
//! run millions of times per rolling backtest so they stay allocation-free.

pub(crate) const MAX_DIM: usize = 4;

pub(crate) type Square = [f64; MAX_DIM * MAX_DIM];
pub(crate) type Vector = [f64; MAX_DIM];

/// Lower Cholesky factor of a symmetric positive-definite `p × p` matrix.
pub(crate) fn cholesky(m: &Square, p: usize) -> Option<Square> {
    let mut l = [0.0; MAX_DIM * MAX_DIM];
    for i in 0..p {
        for j in 0..=i {
            let mut sum = m[i * MAX_DIM + j];
            for k in 0..j {
                sum -= l[i * MAX_DIM + k] * l[j * MAX_DIM + k];
            }
            if i == j {
                if sum.is_nan() || sum <= 0.0 {
                    return None;
                }
                l[i * MAX_DIM + i] = sum.sqrt();
            } else {
                l[i * MAX_DIM + j] = sum / l[j * MAX_DIM + j];
            }
        }
    }
    Some(l)
}

/// Solves `L x = b`.
pub(crate) fn forward(l: &Square, b: &Vector, p: usize) -> Vector {
    let mut x = [0.0; MAX_DIM];
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * MAX_DIM + k] * x[k];
        }
        x[i] = s / l[i * MAX_DIM + i];
    }
    x
}

/// Solves `Lᵀ x = b`.
pub(crate) fn backward(l: &Square, b: &Vector, p: usize) -> Vector {
    let mut x = [0.0; MAX_DIM];
    for i in (0..p).rev() {
        let mut s = b[i];
        for k in i + 1..p {
            s -= l[k * MAX_DIM + i] * x[k];
        }
        x[i] = s / l[i * MAX_DIM + i];
    }
    x
}
