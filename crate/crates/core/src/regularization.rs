//! Integral identities, regularized mode sums, sweeps over the cutoff scale
//! and extraction of finite parts.
//!
//! Sums are raw: `S(Ω) = Σ ω·mult·f(ω/Ω)`. The Casimir energy is `S/2`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::asymptotics::{check_grid, fit_omega, log_grid, neville_to_zero, OmegaFit, Term};
use crate::cutoffs::CutoffSpec;
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::special::{erfc, sum_compensated};
use crate::spectra::ModeSpectrum;

fn identity_quadrature() -> Quadrature {
    Quadrature::with_tolerances(1e-13, 1e-12)
}

/// `∫_T^∞ t^{−3/2} e^{−ct} dt`.
fn tail_integral(c: f64, t: f64) -> f64 {
    if c == 0.0 {
        2.0 / t.sqrt()
    } else {
        2.0 * (-c * t).exp() / t.sqrt() - 2.0 * (PI * c).sqrt() * erfc((c * t).sqrt())
    }
}

/// Residual of `ω − ω* = (4π)^{−1/2} ∫₀^∞ t^{−3/2} (e^{−ω*²t} − e^{−ω²t}) dt`.
pub fn verify_lemma1(omega: f64, omega_star: f64) -> Result<f64> {
    if !(omega >= 0.0 && omega_star >= 0.0) || !omega.is_finite() || !omega_star.is_finite() {
        return Err(Error::invalid("frequencies must be finite and nonnegative"));
    }
    if omega == omega_star {
        return Ok(0.0);
    }
    let (a, b) = (omega_star * omega_star, omega * omega);
    let top = a.max(b);
    // Near t = 0 the integrand is (b − a) t^{−1/2} + O(t^{1/2}).
    let t0 = 1e-24 / top;
    let head = 2.0 * (b - a) * t0.sqrt() - (b * b - a * a) * t0.powf(1.5) / 3.0;
    let t1 = 50.0 / top;
    let body = identity_quadrature()
        .integrate_log(
            |t| {
                // e^{−at} − e^{−bt} = e^{−at}(1 − e^{−(b−a)t})
                -(-a * t).exp() * (-(b - a) * t).exp_m1() * t.powf(-1.5)
            },
            t0,
            t1,
        )
        .map_err(|e| Error::NumericalFailure(format!("lemma 1 at ({omega}, {omega_star}): {e}")))?;
    let tail = tail_integral(a, t1) - tail_integral(b, t1);
    let rhs = (head + body.value + tail) / (4.0 * PI).sqrt();
    Ok(((omega - omega_star) - rhs).abs())
}

/// Residual of `ω erfc(ω/Ω) = (Ω/√π) e^{−ω²/Ω²} − (4π)^{−1/2} ∫_{Ω⁻²}^∞ t^{−3/2} e^{−ω²t} dt`.
pub fn verify_erfc_identity(omega: f64, cutoff_scale: f64) -> Result<f64> {
    if !(omega >= 0.0 && omega.is_finite()) || !(cutoff_scale > 0.0 && cutoff_scale.is_finite()) {
        return Err(Error::invalid("need omega >= 0 and Omega > 0"));
    }
    let lhs = omega * erfc(omega / cutoff_scale);
    let c = omega * omega;
    let t0 = 1.0 / (cutoff_scale * cutoff_scale);
    let t1 = if c > 0.0 { t0 + 50.0 / c } else { 1e4 * t0 };
    let body = identity_quadrature()
        .integrate_log(|t| (-c * t).exp() * t.powf(-1.5), t0, t1)
        .map_err(|e| {
            Error::NumericalFailure(format!("erfc identity at ({omega}, {cutoff_scale}): {e}"))
        })?;
    let integral = body.value + tail_integral(c, t1);
    let rhs = cutoff_scale / PI.sqrt() * (-c * t0).exp() - integral / (4.0 * PI).sqrt();
    Ok((lhs - rhs).abs())
}

fn check_truncation(spectrum: &ModeSpectrum, cutoff: &CutoffSpec, cutoff_scale: f64) -> Result<()> {
    let required = cutoff.tail_abscissa()? * cutoff_scale;
    let available = spectrum.coverage();
    if available >= required {
        return Ok(());
    }
    let have = spectrum.trusted().iter().map(|m| m.multiplicity).sum::<u64>().max(1) as f64;
    let ratio = if available > 0.0 { required / available } else { f64::INFINITY };
    let estimate = have * ratio.powi(spectrum.dimension() as i32);
    Err(Error::Truncation {
        available,
        required,
        required_modes: if estimate.is_finite() {
            estimate.ceil() as usize
        } else {
            usize::MAX
        },
    })
}

/// `Σ ω·mult·erfc(ω/Ω)` over the trusted modes.
pub fn erfc_regularized_sum(spectrum: &ModeSpectrum, cutoff_scale: f64) -> Result<f64> {
    f_regularized_sum(spectrum, &CutoffSpec::PureErfc, cutoff_scale)
}

/// `Σ ω·mult·f(ω/Ω)` over the trusted modes.
pub fn f_regularized_sum(spectrum: &ModeSpectrum, cutoff: &CutoffSpec, cutoff_scale: f64) -> Result<f64> {
    if !(cutoff_scale > 0.0 && cutoff_scale.is_finite()) {
        return Err(Error::invalid(format!("cutoff scale must be positive, got {cutoff_scale}")));
    }
    if spectrum.trusted().is_empty() {
        return Ok(0.0);
    }
    check_truncation(spectrum, cutoff, cutoff_scale)?;
    match cutoff {
        CutoffSpec::PureErfc => Ok(sum_compensated(
            spectrum
                .trusted()
                .iter()
                .map(|m| m.omega * m.multiplicity as f64 * erfc(m.omega / cutoff_scale)),
        )),
        CutoffSpec::Exponential => Ok(sum_compensated(
            spectrum
                .trusted()
                .iter()
                .map(|m| m.omega * m.multiplicity as f64 * (-m.omega / cutoff_scale).exp()),
        )),
        CutoffSpec::Gaussian => Ok(sum_compensated(spectrum.trusted().iter().map(|m| {
            let x = m.omega / cutoff_scale;
            m.omega * m.multiplicity as f64 * (-x * x).exp()
        }))),
        _ => {
            // Expensive evaluations: skip modes past the tail and parallelize.
            let x_tail = cutoff.tail_abscissa()?;
            let terms: Vec<f64> = spectrum
                .trusted()
                .par_iter()
                .map(|m| {
                    let x = m.omega / cutoff_scale;
                    if x > x_tail {
                        Ok(0.0)
                    } else {
                        Ok(m.omega * m.multiplicity as f64 * cutoff.eval(x)?)
                    }
                })
                .collect::<Result<_>>()?;
            Ok(sum_compensated(terms))
        }
    }
}

/// A weighted combination `Σ_j w_j S_j` of spectra, for comparisons against
/// averaged reference problems.
pub type Combination<'a> = [(f64, &'a ModeSpectrum)];

#[derive(Debug, Clone)]
pub struct RegularizedSweep {
    pub omega_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub cutoff: CutoffSpec,
    pub spectrum_labels: String,
}

fn combination_sum(parts: &Combination<'_>, cutoff: &CutoffSpec, scale: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (w, s) in parts {
        acc += w * f_regularized_sum(s, cutoff, scale)?;
    }
    Ok(acc)
}

fn labels(parts: &Combination<'_>) -> String {
    parts
        .iter()
        .map(|(w, s)| if *w == 1.0 { s.label().to_string() } else { format!("{w}*[{}]", s.label()) })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// `S(Ω)` of one spectrum on a grid.
pub fn sweep(spectrum: &ModeSpectrum, cutoff: &CutoffSpec, omega_grid: &[f64]) -> Result<RegularizedSweep> {
    combination_sweep(&[(1.0, spectrum)], &[], cutoff, omega_grid)
}

/// `ΔS(Ω) = S_a(Ω) − S_b(Ω)` on a grid.
pub fn difference_sweep(
    spectrum_a: &ModeSpectrum,
    spectrum_b: &ModeSpectrum,
    cutoff: &CutoffSpec,
    omega_grid: &[f64],
) -> Result<RegularizedSweep> {
    combination_sweep(&[(1.0, spectrum_a)], &[(1.0, spectrum_b)], cutoff, omega_grid)
}

/// `Σ_j w_j S_{a,j}(Ω) − Σ_k v_k S_{b,k}(Ω)` on a grid.
pub fn combination_sweep(
    side_a: &Combination<'_>,
    side_b: &Combination<'_>,
    cutoff: &CutoffSpec,
    omega_grid: &[f64],
) -> Result<RegularizedSweep> {
    check_grid(omega_grid)?;
    let mut dims = side_a.iter().chain(side_b).map(|(_, s)| s.dimension());
    if let Some(first) = dims.next() {
        if dims.any(|d| d != first) {
            return Err(Error::invalid("spectra in a sweep must share the space dimension"));
        }
    }
    let values = omega_grid
        .par_iter()
        .map(|&w| Ok(combination_sum(side_a, cutoff, w)? - combination_sum(side_b, cutoff, w)?))
        .collect::<Result<Vec<f64>>>()?;
    let spectrum_labels = if side_b.is_empty() {
        labels(side_a)
    } else {
        format!("{} - ({})", labels(side_a), labels(side_b))
    };
    Ok(RegularizedSweep {
        omega_grid: omega_grid.to_vec(),
        values,
        cutoff: cutoff.clone(),
        spectrum_labels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationResult {
    pub finite_part: f64,
    pub error_estimate: f64,
    pub converged: bool,
    /// Fitted coefficients of the divergent terms, `Ω^{d+1}` down to `ln Ω²`.
    pub divergent_slots: Vec<(Term, f64)>,
    pub fit: OmegaFit,
    /// Divergent terms count as negligible below this size at the top of the grid.
    pub threshold: f64,
}

/// Relative size below which a divergent term counts as absent.
pub const NEGLIGIBLE: f64 = 1e-6;

/// Fits the sweep to the large-Ω expansion and reports the constant term.
///
/// `converged` is true when every divergent term, evaluated at the largest Ω
/// of the grid, is below `1e-6 × max|values|`.
pub fn extrapolate_finite_part(sweep: &RegularizedSweep, d: u32) -> Result<ExtrapolationResult> {
    extrapolate_finite_part_with(sweep, d, NEGLIGIBLE)
}

/// [`extrapolate_finite_part`] with a custom relative threshold for
/// negligible divergent terms.
pub fn extrapolate_finite_part_with(sweep: &RegularizedSweep, d: u32, negligible: f64) -> Result<ExtrapolationResult> {
    if !(negligible > 0.0 && negligible.is_finite()) {
        return Err(Error::invalid(format!("negligible threshold must be positive, got {negligible}")));
    }
    let grid = &sweep.omega_grid;
    check_grid(grid)?;
    let needed = d as usize + 4;
    if grid.len() < needed {
        return Err(Error::invalid(format!(
            "extrapolation in d = {d} needs at least {needed} samples, got {}",
            grid.len()
        )));
    }
    let top = grid[grid.len() - 1];
    if top / grid[0] < 10.0 {
        return Err(Error::invalid("extrapolation grid must span at least one decade"));
    }
    let fit = fit_omega(grid, &sweep.values, d)?;
    let scale = sweep.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = negligible * scale;
    let divergent_slots: Vec<(Term, f64)> = fit
        .terms
        .iter()
        .zip(&fit.fit.coefficients)
        .filter(|(t, _)| t.is_divergent())
        .map(|(t, c)| (*t, *c))
        .collect();
    let converged = divergent_slots
        .iter()
        .all(|(t, c)| (c * t.eval(top)).abs() <= threshold);
    let finite_part = fit.coefficient(Term::Constant);
    let mut error_estimate = fit.standard_error(Term::Constant);
    // Stability against dropping the lowest quarter of the grid.
    let skip = grid.len() / 4;
    if grid.len() - skip >= fit.terms.len() + 2 && top / grid[skip] >= 10.0 {
        if let Ok(sub) = crate::asymptotics::fit_terms(&grid[skip..], &sweep.values[skip..], &fit.terms) {
            let shift = sub.coefficient(Term::Constant) - finite_part;
            error_estimate = error_estimate.hypot(shift);
        }
    }
    if !error_estimate.is_finite() {
        error_estimate = f64::INFINITY;
    }
    Ok(ExtrapolationResult {
        finite_part,
        error_estimate,
        converged: converged && error_estimate.is_finite(),
        divergent_slots,
        fit,
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResumMethod {
    ErfcExtrapolate,
    Abel,
    RieszMean(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resummed {
    pub value: f64,
    pub error_estimate: f64,
}

/// Index-paired frequencies `(ω_a,n, ω_b,n)` below the common coverage.
fn paired_modes(a: &ModeSpectrum, b: &ModeSpectrum) -> Vec<(f64, f64)> {
    let cov = a.coverage().min(b.coverage());
    let ea: Vec<f64> = a.expanded_trusted().into_iter().filter(|w| *w <= cov).collect();
    let eb: Vec<f64> = b.expanded_trusted().into_iter().filter(|w| *w <= cov).collect();
    ea.into_iter().zip(eb).collect()
}

fn weighted_pair_sum(pairs: &[(f64, f64)], weight: impl Fn(f64) -> f64) -> f64 {
    sum_compensated(pairs.iter().map(|(x, y)| (x - y) * weight(0.5 * (x + y))))
}

fn accept(value: f64, error: f64, scale: f64, method: &str) -> Result<Resummed> {
    let tolerance = 1e-3 * value.abs().max(scale);
    if !(value.is_finite() && error.is_finite()) || error > tolerance {
        return Err(Error::NonConvergence(format!(
            "{method}: accelerated sums are not Cauchy (value {value:e}, spread {error:e})"
        )));
    }
    Ok(Resummed {
        value,
        error_estimate: error,
    })
}

/// `Σ_n (ω_a,n − ω_b,n)` by a regular summation method.
///
/// Modes are expanded by multiplicity and paired by index. The caller is
/// responsible for the difference being finite; divergent differences are
/// usually, but not always, reported as non-convergence.
pub fn resum_difference(a: &ModeSpectrum, b: &ModeSpectrum, method: ResumMethod) -> Result<Resummed> {
    if a.dimension() != b.dimension() {
        return Err(Error::invalid("resummation needs spectra of the same dimension"));
    }
    if a.modes() == b.modes() {
        return Ok(Resummed {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    match method {
        ResumMethod::ErfcExtrapolate => {
            let cov = a.coverage().min(b.coverage());
            let top = if cov.is_finite() {
                cov / CutoffSpec::PureErfc.tail_abscissa()?
            } else {
                let w = a.modes().last().map_or(1.0, |m| m.omega).max(b.modes().last().map_or(1.0, |m| m.omega));
                return Ok(Resummed {
                    value: erfc_regularized_sum(a, 1e3 * w)? - erfc_regularized_sum(b, 1e3 * w)?,
                    error_estimate: 0.0,
                });
            };
            let grid = log_grid(top / 30.0, top, 24);
            let sweep = difference_sweep(a, b, &CutoffSpec::PureErfc, &grid)?;
            let r = extrapolate_finite_part(&sweep, a.dimension())?;
            if !r.converged {
                return Err(Error::NonConvergence(format!(
                    "erfc extrapolation: divergent terms remain ({})",
                    r.divergent_slots
                        .iter()
                        .map(|(t, c)| format!("{t}: {c:e}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
            Ok(Resummed {
                value: r.finite_part,
                error_estimate: r.error_estimate,
            })
        }
        ResumMethod::Abel => {
            let pairs = paired_modes(a, b);
            let top = pairs.last().map_or(0.0, |(x, y)| 0.5 * (x + y));
            if top <= 0.0 {
                return Err(Error::invalid("no paired modes to resum"));
            }
            let eps0 = 40.0 / top;
            let eps: Vec<f64> = (0..6).map(|k| eps0 * 2f64.powi(5 - k)).collect();
            let values: Vec<f64> = eps
                .iter()
                .map(|&e| weighted_pair_sum(&pairs, |w| (-e * w).exp()))
                .collect();
            let (value, error) = neville_to_zero(&eps, &values);
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            accept(value, error, 1e-3 * scale, "Abel")
        }
        ResumMethod::RieszMean(k) => {
            let pairs = paired_modes(a, b);
            let top = pairs.last().map_or(0.0, |(x, y)| 0.5 * (x + y));
            if top <= 0.0 {
                return Err(Error::invalid("no paired modes to resum"));
            }
            let widths: Vec<f64> = (0..6).map(|j| top / 2f64.powi(5 - j)).collect();
            let values: Vec<f64> = widths
                .iter()
                .map(|&wmax| {
                    weighted_pair_sum(&pairs, |w| {
                        if w >= wmax {
                            0.0
                        } else {
                            (1.0 - w / wmax).powi(k as i32)
                        }
                    })
                })
                .collect();
            let h: Vec<f64> = widths.iter().map(|w| 1.0 / w).collect();
            // Riesz means converge like W^{-k} (k ≥ 1); extrapolate a short table.
            let (value, error) = neville_to_zero(&h[2..], &values[2..]);
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            accept(value, error, 1e-3 * scale, "Riesz")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{interval_spectrum, BoundaryCondition};

    #[test]
    fn lemma1_examples() {
        assert_eq!(verify_lemma1(1.0, 1.0).unwrap(), 0.0);
        assert!(verify_lemma1(1.0, 0.0).unwrap() < 1e-10);
        assert!(verify_lemma1(3.7, 1.2).unwrap() < 1e-10);
    }

    #[test]
    fn erfc_identity_examples() {
        assert!(verify_erfc_identity(0.0, 1.0).unwrap() < 1e-12);
        assert!(verify_erfc_identity(1.0, 1.0).unwrap() < 1e-10);
        assert!(verify_erfc_identity(5.0, 0.5).unwrap() < 1e-10);
    }

    #[test]
    fn erfc_sum_examples() {
        let empty = ModeSpectrum::from_frequencies(&[], 1).unwrap();
        assert_eq!(erfc_regularized_sum(&empty, 3.0).unwrap(), 0.0);
        let s = ModeSpectrum::from_frequencies(&[1.0, 2.0], 1).unwrap();
        let v = erfc_regularized_sum(&s, 2.0).unwrap();
        assert!((v - 0.794_098_536_287_523_7).abs() < 1e-12, "{v}");
    }

    #[test]
    fn exponential_sum_example() {
        let s = ModeSpectrum::from_frequencies(&[1.0], 1).unwrap();
        let v = f_regularized_sum(&s, &CutoffSpec::Exponential, 1.0).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn truncation_is_detected() {
        let s = interval_spectrum(1.0, BoundaryCondition::Dirichlet, 10).unwrap();
        match erfc_regularized_sum(&s, 10.0) {
            Err(Error::Truncation { required_modes, .. }) => assert!(required_modes >= 19),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identical_spectra_give_zero_sweep() {
        let s = interval_spectrum(1.0, BoundaryCondition::Dirichlet, 400).unwrap();
        let sw = difference_sweep(&s, &s, &CutoffSpec::PureErfc, &[1.0, 10.0, 100.0]).unwrap();
        assert!(sw.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_sweep_extrapolates_to_zero() {
        let sw = RegularizedSweep {
            omega_grid: log_grid(1.0, 100.0, 12),
            values: vec![0.0; 12],
            cutoff: CutoffSpec::PureErfc,
            spectrum_labels: String::new(),
        };
        let r = extrapolate_finite_part(&sw, 1).unwrap();
        assert_eq!(r.finite_part, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn grids_are_validated() {
        let s = ModeSpectrum::from_frequencies(&[1.0], 1).unwrap();
        assert!(sweep(&s, &CutoffSpec::PureErfc, &[2.0, 1.0]).is_err());
        assert!(sweep(&s, &CutoffSpec::PureErfc, &[0.0, 1.0]).is_err());
        let t = ModeSpectrum::from_frequencies(&[1.0], 3).unwrap();
        assert!(difference_sweep(&s, &t, &CutoffSpec::PureErfc, &[1.0]).is_err());
    }
}
