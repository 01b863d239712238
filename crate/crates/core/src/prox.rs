//! Proximal operators of the nuclear norm and the entrywise ℓ1 norm.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Singular value thresholding: `argmin_J tau‖J‖_* + ½‖J − M‖_F²`.
pub fn svt(m: &Matrix, tau: f64) -> Result<Matrix> {
    svt_with_rank(m, tau).map(|(j, _)| j)
}

/// Like [`svt`], also returning the rank of the result.
pub fn svt_with_rank(m: &Matrix, tau: f64) -> Result<(Matrix, usize)> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("threshold must be finite and >= 0, got {tau}")));
    }
    if tau == 0.0 {
        return Ok((m.clone(), linalg::svd(m, 0.0)?.rank()));
    }
    let f = linalg::svd(m, 0.0)?;
    let kept = f.sigma.iter().take_while(|&&s| s - tau > 0.0).count();
    if kept == 0 {
        return Ok((Matrix::zeros(m.nrows(), m.ncols()), 0));
    }
    let mut us = f.u.columns(0, kept).into_owned();
    for j in 0..kept {
        us.column_mut(j).scale_mut(f.sigma[j] - tau);
    }
    Ok((us * f.v.columns(0, kept).transpose(), kept))
}

/// Entrywise shrinkage `sign(x)·max(|x| − tau, 0)`.
pub fn soft_threshold(m: &Matrix, tau: f64) -> Matrix {
    debug_assert!(tau >= 0.0);
    m.map(|x| shrink(x, tau))
}

#[inline]
fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}
