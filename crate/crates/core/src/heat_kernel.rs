//! Heat traces, Seeley–DeWitt fits and divergence fits of regularized sums.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::asymptotics::{check_grid, fit_omega, log_grid, Term};
use crate::error::{Error, Result};
use crate::lsq::least_squares;
use crate::regularization::RegularizedSweep;
use crate::special::sum_compensated;
use crate::spectra::ModeSpectrum;

/// `ω_max² t` must reach this for a truncated spectrum to give a faithful trace.
pub const TRACE_SAFETY: f64 = 30.0;

/// Condition-number ceiling for Seeley–DeWitt fits.
pub const MAX_SDW_CONDITION: f64 = 1e8;

fn min_usable_t(spectrum: &ModeSpectrum) -> f64 {
    let c = spectrum.coverage();
    if c.is_infinite() {
        0.0
    } else if c > 0.0 {
        TRACE_SAFETY / (c * c)
    } else {
        f64::INFINITY
    }
}

/// `K(t) = Σ mult·e^{−ω²t}` over the trusted modes.
pub fn heat_trace(spectrum: &ModeSpectrum, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("heat trace needs t > 0, got {t}")));
    }
    let min_t = min_usable_t(spectrum);
    if t < min_t {
        return Err(Error::HeatTruncation { t, min_t });
    }
    Ok(sum_compensated(
        spectrum
            .trusted()
            .iter()
            .map(|m| m.multiplicity as f64 * (-m.omega * m.omega * t).exp()),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdwExpansion {
    pub dimension: u32,
    /// Coefficients `a_{i/2}` of `t^{i/2}`, `i = 0..=N`.
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub fit_residual: f64,
    pub condition: f64,
    pub t_window: (f64, f64),
}

/// Default fitting window: 24 log-spaced points from the truncation limit up
/// to `ℓ²/160`, where `ℓ = π N^{1/d} / ω_top` is the Weyl length of the
/// trusted modes. For an interval `ℓ` is its length, and the exponentially
/// small Poisson remainder (`e^{−ℓ²/4t}` for a periodic interval, `e^{−ℓ²/t}`
/// with walls) stays below `e^{−40}`.
pub fn default_t_grid(spectrum: &ModeSpectrum) -> Result<Vec<f64>> {
    let trusted = spectrum.trusted();
    let top = trusted.last().map_or(0.0, |m| m.omega);
    let count: u64 = trusted.iter().map(|m| m.multiplicity).sum();
    if !(top > 0.0) || count < 8 {
        return Err(Error::invalid("spectrum too small for a heat-kernel fit"));
    }
    let d = spectrum.dimension() as f64;
    let length = PI * (count as f64).powf(1.0 / d) / top;
    let t_max = length * length / 160.0;
    let t_min = min_usable_t(spectrum).max(t_max * 1e-6);
    if !(t_min * 100.0 <= t_max) {
        return Err(Error::Truncation {
            available: spectrum.coverage(),
            required: (TRACE_SAFETY * 100.0 / t_max).sqrt(),
            required_modes: trusted.len() * 2,
        });
    }
    Ok(log_grid(t_min, t_max, 24))
}

/// Least-squares fit of `(4πt)^{d/2} K(t)` in powers `t^{i/2}`, `i = 0..=n`.
pub fn sdw_fit(spectrum: &ModeSpectrum, d: u32, n: u32, t_grid: &[f64]) -> Result<SdwExpansion> {
    if n > d + 1 {
        return Err(Error::invalid(format!("fit order {n} exceeds d + 1 = {}", d + 1)));
    }
    let cols = n as usize + 1;
    if t_grid.len() < 2 * cols {
        return Err(Error::invalid(format!(
            "fit of order {n} needs at least {} t values, got {}",
            2 * cols,
            t_grid.len()
        )));
    }
    check_grid(t_grid)?;
    let values = t_grid
        .par_iter()
        .map(|&t| Ok((4.0 * PI * t).powf(0.5 * d as f64) * heat_trace(spectrum, t)?))
        .collect::<Result<Vec<f64>>>()?;
    let design = DMatrix::from_fn(t_grid.len(), cols, |r, c| t_grid[r].powf(0.5 * c as f64));
    let fit = least_squares(&design, &values, MAX_SDW_CONDITION)?;
    Ok(SdwExpansion {
        dimension: d,
        coefficients: fit.coefficients,
        standard_errors: fit.standard_errors,
        fit_residual: fit.residual_norm,
        condition: fit.condition,
        t_window: (t_grid[0], t_grid[t_grid.len() - 1]),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceFit {
    /// Coefficients of `Ω^{d+1−i}`, `i = 0..=d`.
    pub power_coefficients: Vec<f64>,
    pub log_coefficient: f64,
    pub constant: f64,
    pub standard_errors: Vec<(Term, f64)>,
    pub residual: f64,
    pub condition: f64,
}

impl DivergenceFit {
    /// The divergent term with the largest magnitude at scale `omega`.
    pub fn dominant(&self, omega: f64) -> Term {
        let d = self.power_coefficients.len() as u32 - 1;
        let mut best = (Term::Log, (self.log_coefficient * Term::Log.eval(omega)).abs());
        for (i, c) in self.power_coefficients.iter().enumerate() {
            let t = Term::Power(d + 1 - i as u32);
            let size = (c * t.eval(omega)).abs();
            if size > best.1 {
                best = (t, size);
            }
        }
        best.0
    }
}

/// Fits a sweep to `Σ_i c_i Ω^{d+1−i} + c_log ln Ω² + c_0` (plus decaying terms).
pub fn divergence_fit(sweep: &RegularizedSweep, d: u32) -> Result<DivergenceFit> {
    let grid = &sweep.omega_grid;
    check_grid(grid)?;
    let needed = d as usize + 5;
    if grid.len() < needed {
        return Err(Error::invalid(format!(
            "divergence fit in d = {d} needs at least {needed} samples, got {}",
            grid.len()
        )));
    }
    if grid[grid.len() - 1] / grid[0] < 10f64.powf(1.5) {
        return Err(Error::invalid("divergence fit grid must span at least 1.5 decades"));
    }
    let fit = fit_omega(grid, &sweep.values, d)?;
    Ok(DivergenceFit {
        power_coefficients: (0..=d).map(|i| fit.coefficient(Term::Power(d + 1 - i))).collect(),
        log_coefficient: fit.coefficient(Term::Log),
        constant: fit.coefficient(Term::Constant),
        standard_errors: fit
            .terms
            .iter()
            .zip(&fit.fit.standard_errors)
            .map(|(t, e)| (*t, *e))
            .collect(),
        residual: fit.fit.residual_norm,
        condition: fit.fit.condition,
    })
}
