//! Column-scaled ordinary least squares with conditioning diagnostics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LsqFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    /// Condition number of the design matrix after scaling columns to unit norm.
    pub condition: f64,
}

/// Fits `y ≈ X c`. Columns of `X` are scaled to unit norm before the SVD;
/// reported coefficients and standard errors are in the original units.
pub fn least_squares(design: &DMatrix<f64>, y: &[f64], max_condition: f64) -> Result<LsqFit> {
    let (rows, cols) = design.shape();
    if rows != y.len() {
        return Err(Error::invalid("design rows and data length differ"));
    }
    if rows < cols {
        return Err(Error::invalid(format!(
            "under-determined fit: {rows} samples for {cols} coefficients"
        )));
    }
    let mut scaled = design.clone();
    let mut scales = vec![1.0; cols];
    for (j, scale) in scales.iter_mut().enumerate() {
        let norm = scaled.column(j).norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Conditioning {
                condition: f64::INFINITY,
                suggestion: format!("basis column {j} vanishes on the sampling grid"),
            });
        }
        *scale = norm;
        scaled.column_mut(j).scale_mut(1.0 / norm);
    }
    let svd = scaled.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if !(condition <= max_condition) {
        return Err(Error::Conditioning {
            condition,
            suggestion: "widen the sampling window or use more, better spread sample points"
                .to_string(),
        });
    }
    let rhs = DVector::from_column_slice(y);
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NumericalFailure(format!("least-squares solve failed: {e}")))?;
    let residual = &rhs - &scaled * &solution;
    let residual_norm = residual.norm();
    let dof = rows - cols;
    let sigma2 = if dof > 0 {
        residual_norm * residual_norm / dof as f64
    } else {
        0.0
    };
    // cov(scaled) = V Σ^{-2} Vᵀ σ²
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut standard_errors = vec![0.0; cols];
    for (j, se) in standard_errors.iter_mut().enumerate() {
        let mut var = 0.0;
        for (k, s) in svd.singular_values.iter().enumerate() {
            let v = v_t[(k, j)];
            var += v * v / (s * s);
        }
        *se = (var * sigma2).sqrt() / scales[j];
    }
    let coefficients = solution
        .iter()
        .zip(&scales)
        .map(|(c, s)| c / s)
        .collect();
    Ok(LsqFit {
        coefficients,
        standard_errors,
        residual_norm,
        condition,
    })
}
