//! Large-cutoff fits of regularized sums and extrapolation helpers.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lsq::{least_squares, LsqFit};

/// Condition-number ceiling for fits in powers of the cutoff scale.
pub const MAX_OMEGA_CONDITION: f64 = 1e12;

/// A basis function of the large-Ω expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// `Ω^p`, `p ≥ 1`: divergent.
    Power(u32),
    /// `ln Ω²`: divergent.
    Log,
    /// `Ω⁰`: the finite part.
    Constant,
    /// `Ω^{−p}`: decaying remainder.
    Decay(u32),
}

impl Term {
    pub fn eval(&self, omega: f64) -> f64 {
        match *self {
            Term::Power(p) => omega.powi(p as i32),
            Term::Log => (omega * omega).ln(),
            Term::Constant => 1.0,
            Term::Decay(p) => omega.powi(-(p as i32)),
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Term::Power(_) | Term::Log)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Power(p) => write!(f, "Omega^{p}"),
            Term::Log => f.write_str("ln(Omega^2)"),
            Term::Constant => f.write_str("1"),
            Term::Decay(p) => write!(f, "Omega^-{p}"),
        }
    }
}

/// `Ω^{d+1}, …, Ω, ln Ω², 1`, plus `Ω⁻¹, Ω⁻²` when the grid has room.
pub fn omega_basis(d: u32, samples: usize) -> Vec<Term> {
    let mut terms: Vec<Term> = (0..=d).map(|i| Term::Power(d + 1 - i)).collect();
    terms.push(Term::Log);
    terms.push(Term::Constant);
    if samples >= terms.len() + 5 {
        terms.push(Term::Decay(1));
        terms.push(Term::Decay(2));
    }
    terms
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaFit {
    pub terms: Vec<Term>,
    pub fit: LsqFit,
}

impl OmegaFit {
    pub fn coefficient(&self, term: Term) -> f64 {
        self.terms
            .iter()
            .position(|t| *t == term)
            .map_or(0.0, |i| self.fit.coefficients[i])
    }

    pub fn standard_error(&self, term: Term) -> f64 {
        self.terms
            .iter()
            .position(|t| *t == term)
            .map_or(0.0, |i| self.fit.standard_errors[i])
    }
}

pub fn fit_terms(grid: &[f64], values: &[f64], terms: &[Term]) -> Result<OmegaFit> {
    let design = DMatrix::from_fn(grid.len(), terms.len(), |r, c| terms[c].eval(grid[r]));
    let fit = least_squares(&design, values, MAX_OMEGA_CONDITION)?;
    Ok(OmegaFit {
        terms: terms.to_vec(),
        fit,
    })
}

pub fn fit_omega(grid: &[f64], values: &[f64], d: u32) -> Result<OmegaFit> {
    fit_terms(grid, values, &omega_basis(d, grid.len()))
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "log_grid({lo}, {hi}, {n})");
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k + 1 == n {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("empty cutoff grid"));
    }
    if grid.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::invalid("cutoff grid values must be positive and finite"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("cutoff grid must be strictly increasing"));
    }
    Ok(())
}

/// Polynomial extrapolation of samples `(h_k, y_k)` to `h = 0` (Neville).
/// Returns the value and the change contributed by the last sample.
pub fn neville_to_zero(h: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(h.len(), y.len());
    assert!(!h.is_empty());
    let n = h.len();
    let mut p = y.to_vec();
    let mut prev_diag = p[0];
    let mut diag = p[0];
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
        }
        prev_diag = diag;
        diag = p[0];
    }
    let change = if n > 1 { (diag - prev_diag).abs() } else { f64::INFINITY };
    (diag, change)
}
