//! Operator spectra: analytic interval and box spectra, finite-difference
//! Schrödinger spectra, and constant mass shifts.
//!
//! A [`ModeSpectrum`] stores angular frequencies with integer multiplicities.
//! Two markers say how far it can be trusted:
//!
//! * `uv_valid_count`: the number of leading entries that represent the
//!   continuum operator. Sums and traces only ever read these entries.
//! * `coverage`: the frequency up to which the trusted entries are the
//!   *complete* spectrum. Truncation checks compare it against the cutoff.
//!   Finite operators given mode by mode have infinite coverage.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tridiag::JacobiMatrix;

/// Default cap on enumerated box modes (distinct lattice points).
pub const DEFAULT_MODE_CAP: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Periodic,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Periodic => "periodic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub omega: f64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    modes: Vec<Mode>,
    /// Frequencies before the accumulated mass shift.
    base: Vec<f64>,
    mass_shift: f64,
    dimension: u32,
    uv_valid_count: usize,
    coverage: f64,
    label: String,
}

fn validate_modes(modes: &[Mode]) -> Result<()> {
    for (i, m) in modes.iter().enumerate() {
        if !(m.omega.is_finite() && m.omega >= 0.0) {
            return Err(Error::invalid(format!(
                "mode {i}: frequency {} must be finite and nonnegative",
                m.omega
            )));
        }
        if m.multiplicity == 0 {
            return Err(Error::invalid(format!("mode {i}: multiplicity must be >= 1")));
        }
    }
    Ok(())
}

impl ModeSpectrum {
    /// Builds a spectrum, sorting modes by frequency.
    pub fn new(
        mut modes: Vec<Mode>,
        dimension: u32,
        uv_valid_count: usize,
        coverage: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        validate_modes(&modes)?;
        if dimension == 0 {
            return Err(Error::invalid("spectrum dimension must be positive"));
        }
        if uv_valid_count > modes.len() {
            return Err(Error::invalid(format!(
                "uv_valid_count {uv_valid_count} exceeds the {} stored modes",
                modes.len()
            )));
        }
        if coverage.is_nan() || coverage < 0.0 {
            return Err(Error::invalid("coverage must be nonnegative"));
        }
        modes.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        let base = modes.iter().map(|m| m.omega).collect();
        Ok(Self {
            modes,
            base,
            mass_shift: 0.0,
            dimension,
            uv_valid_count,
            coverage,
            label: label.into(),
        })
    }

    /// A finite operator given by its frequencies (each multiplicity 1); the
    /// list is the whole spectrum, so coverage is infinite.
    pub fn from_frequencies(omegas: &[f64], dimension: u32) -> Result<Self> {
        let modes: Vec<Mode> = omegas
            .iter()
            .map(|&omega| Mode {
                omega,
                multiplicity: 1,
            })
            .collect();
        let n = modes.len();
        Self::new(modes, dimension, n, f64::INFINITY, "finite")
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// The leading `uv_valid_count` modes.
    pub fn trusted(&self) -> &[Mode] {
        &self.modes[..self.uv_valid_count]
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn uv_valid_count(&self) -> usize {
        self.uv_valid_count
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn mass_shift(&self) -> f64 {
        self.mass_shift
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.modes.iter().map(|m| m.multiplicity).sum()
    }

    /// Trusted frequencies with multiplicities expanded, in sorted order.
    pub fn expanded_trusted(&self) -> Vec<f64> {
        self.trusted()
            .iter()
            .flat_map(|m| std::iter::repeat_n(m.omega, m.multiplicity as usize))
            .collect()
    }

    /// Number of trusted zero modes (counted with multiplicity).
    pub fn zero_modes(&self) -> u64 {
        self.trusted()
            .iter()
            .filter(|m| m.omega == 0.0)
            .map(|m| m.multiplicity)
            .sum()
    }

    /// Disjoint union of spectra of the same dimension; equal frequencies merge.
    pub fn union(parts: &[&ModeSpectrum], label: impl Into<String>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::invalid("union of zero spectra"));
        };
        let dimension = first.dimension;
        if parts.iter().any(|p| p.dimension != dimension) {
            return Err(Error::invalid("union of spectra with different dimensions"));
        }
        let coverage = parts
            .iter()
            .map(|p| p.coverage)
            .fold(f64::INFINITY, f64::min);
        let mut all: Vec<Mode> = parts
            .iter()
            .flat_map(|p| p.trusted().iter().copied())
            .collect();
        all.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        let mut merged: Vec<Mode> = Vec::with_capacity(all.len());
        for m in all {
            match merged.last_mut() {
                Some(last) if last.omega == m.omega => last.multiplicity += m.multiplicity,
                _ => merged.push(m),
            }
        }
        let trusted = merged.iter().filter(|m| m.omega <= coverage).count();
        Self::new(merged, dimension, trusted, coverage, label)
    }
}

/// Exact spectrum of `-d²/dx²` on an interval of length `length`.
///
/// `count` is the number of distinct frequencies returned: Dirichlet gives
/// `nπ/L, n = 1..=count`, Neumann `n = 0..count`, Periodic `2πn/L, n = 0..count`
/// with multiplicity 2 for `n ≥ 1`.
pub fn interval_spectrum(length: f64, bc: BoundaryCondition, count: usize) -> Result<ModeSpectrum> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid(format!("interval length must be positive, got {length}")));
    }
    if count == 0 {
        return Err(Error::invalid("mode count must be at least 1"));
    }
    let modes: Vec<Mode> = match bc {
        BoundaryCondition::Dirichlet => (1..=count)
            .map(|n| Mode {
                omega: n as f64 * PI / length,
                multiplicity: 1,
            })
            .collect(),
        BoundaryCondition::Neumann => (0..count)
            .map(|n| Mode {
                omega: n as f64 * PI / length,
                multiplicity: 1,
            })
            .collect(),
        BoundaryCondition::Periodic => (0..count)
            .map(|n| Mode {
                omega: 2.0 * PI * n as f64 / length,
                multiplicity: if n == 0 { 1 } else { 2 },
            })
            .collect(),
    };
    let coverage = modes.last().map_or(0.0, |m| m.omega);
    ModeSpectrum::new(
        modes,
        1,
        count,
        coverage,
        format!("interval L={length} {bc}"),
    )
}

/// Disjoint union of intervals, each carrying every mode up to `omega_max`.
///
/// A piston is `interval_union(&[a, L - a], ..)`.
pub fn interval_union(lengths: &[f64], bc: BoundaryCondition, omega_max: f64) -> Result<ModeSpectrum> {
    if lengths.is_empty() {
        return Err(Error::invalid("interval union needs at least one length"));
    }
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::invalid(format!("omega_max must be positive, got {omega_max}")));
    }
    let parts = lengths
        .iter()
        .map(|&l| {
            let step = match bc {
                BoundaryCondition::Periodic => 2.0 * PI / l,
                _ => PI / l,
            };
            let count = match bc {
                BoundaryCondition::Dirichlet => (omega_max / step).floor() as usize,
                _ => (omega_max / step).floor() as usize + 1,
            };
            let mut part = interval_spectrum(l, bc, count.max(1))?;
            // All modes up to omega_max are present; the next one lies above it.
            part.coverage = part.coverage.max(omega_max);
            Ok(part)
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&ModeSpectrum> = parts.iter().collect();
    ModeSpectrum::union(&refs, format!("intervals {lengths:?} {bc}"))
}

fn axis_wavenumbers(length: f64, bc: BoundaryCondition, k_max: f64) -> Vec<(f64, u64)> {
    let (step, start) = match bc {
        BoundaryCondition::Dirichlet => (PI / length, 1usize),
        BoundaryCondition::Neumann => (PI / length, 0),
        BoundaryCondition::Periodic => (2.0 * PI / length, 0),
    };
    let mut out = Vec::new();
    let mut n = start;
    loop {
        let k = n as f64 * step;
        if k > k_max {
            break;
        }
        let mult = if bc == BoundaryCondition::Periodic && n > 0 { 2 } else { 1 };
        out.push((k, mult));
        n += 1;
    }
    out
}

/// All modes of `-∇²` on a box with frequency `≤ omega_max`.
pub fn box_spectrum_3d(lengths: [f64; 3], bc: BoundaryCondition, omega_max: f64) -> Result<ModeSpectrum> {
    box_spectrum_3d_with_cap(lengths, bc, omega_max, DEFAULT_MODE_CAP)
}

pub fn box_spectrum_3d_with_cap(
    lengths: [f64; 3],
    bc: BoundaryCondition,
    omega_max: f64,
    mode_cap: usize,
) -> Result<ModeSpectrum> {
    if lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::invalid(format!("box lengths must be positive, got {lengths:?}")));
    }
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::invalid(format!("omega_max must be positive, got {omega_max}")));
    }
    let axes: Vec<Vec<(f64, u64)>> = lengths
        .iter()
        .map(|&l| axis_wavenumbers(l, bc, omega_max))
        .collect();
    let limit = omega_max * omega_max;
    let mut raw: Vec<Mode> = Vec::new();
    for &(k1, m1) in &axes[0] {
        let s1 = k1 * k1;
        if s1 > limit {
            break;
        }
        for &(k2, m2) in &axes[1] {
            let s2 = k2 * k2;
            if s1 + s2 > limit {
                break;
            }
            for &(k3, m3) in &axes[2] {
                let s3 = k3 * k3;
                // Sum the squares in sorted order so permuted triples give identical bits.
                let mut sq = [s1, s2, s3];
                sq.sort_by(f64::total_cmp);
                let total = (sq[0] + sq[1]) + sq[2];
                if total > limit {
                    break;
                }
                if raw.len() >= mode_cap {
                    return Err(Error::ResourceLimit { cap: mode_cap });
                }
                raw.push(Mode {
                    omega: total.sqrt(),
                    multiplicity: m1 * m2 * m3,
                });
            }
        }
    }
    raw.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    let mut modes: Vec<Mode> = Vec::with_capacity(raw.len());
    for m in raw {
        match modes.last_mut() {
            Some(last) if last.omega == m.omega => last.multiplicity += m.multiplicity,
            _ => modes.push(m),
        }
    }
    let n = modes.len();
    ModeSpectrum::new(
        modes,
        3,
        n,
        omega_max,
        format!("box {lengths:?} {bc} omega<={omega_max}"),
    )
}

pub type Potential1D = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `D = -d²/dx² + V(x)` on `[0, L]`, discretized on `grid_points` nodes.
#[derive(Clone)]
pub struct OperatorSpec1D {
    pub length: f64,
    pub potential: Potential1D,
    pub bc: BoundaryCondition,
    pub grid_points: usize,
}

impl fmt::Debug for OperatorSpec1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec1D")
            .field("length", &self.length)
            .field("bc", &self.bc)
            .field("grid_points", &self.grid_points)
            .finish_non_exhaustive()
    }
}

impl OperatorSpec1D {
    pub fn new(
        length: f64,
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
        bc: BoundaryCondition,
        grid_points: usize,
    ) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(format!("operator length must be positive, got {length}")));
        }
        if grid_points < 16 {
            return Err(Error::invalid(format!(
                "grid_points must be at least 16, got {grid_points}"
            )));
        }
        Ok(Self {
            length,
            potential: Arc::new(potential),
            bc,
            grid_points,
        })
    }

    /// Grid spacing and node positions of the discretization.
    ///
    /// Dirichlet uses interior vertices `x_i = (i+1)h`, `h = L/(N+1)`; Neumann
    /// and Periodic use cell centres `x_i = (i+½)h`, `h = L/N`.
    pub fn nodes(&self) -> (f64, Vec<f64>) {
        let n = self.grid_points;
        match self.bc {
            BoundaryCondition::Dirichlet => {
                let h = self.length / (n + 1) as f64;
                (h, (0..n).map(|i| (i + 1) as f64 * h).collect())
            }
            BoundaryCondition::Neumann | BoundaryCondition::Periodic => {
                let h = self.length / n as f64;
                (h, (0..n).map(|i| (i as f64 + 0.5) * h).collect())
            }
        }
    }

    /// Second-order central-difference matrix of `-d²/dx² + V`.
    pub fn matrix(&self) -> Result<JacobiMatrix> {
        let (h, xs) = self.nodes();
        let inv_h2 = 1.0 / (h * h);
        let mut diag = Vec::with_capacity(xs.len());
        for (i, &x) in xs.iter().enumerate() {
            let v = (self.potential)(x);
            if !v.is_finite() {
                return Err(Error::invalid(format!("potential is not finite at x = {x}")));
            }
            let kinetic = match self.bc {
                BoundaryCondition::Neumann if i == 0 || i + 1 == xs.len() => inv_h2,
                _ => 2.0 * inv_h2,
            };
            diag.push(kinetic + v);
        }
        let off = vec![-inv_h2; xs.len() - 1];
        let corner = (self.bc == BoundaryCondition::Periodic).then_some(-inv_h2);
        Ok(JacobiMatrix::new(diag, off, corner))
    }

    pub fn max_trusted_modes(&self) -> usize {
        self.grid_points / 4
    }
}

/// Lowest `count` frequencies `ω_n = sqrt(λ_n)` of the discretized operator.
///
/// Only the lowest `grid_points / 4` eigenvalues are accepted. Eigenvalues
/// within rounding of zero (from exact zero modes) are set to zero.
pub fn schrodinger_spectrum_1d(spec: &OperatorSpec1D, count: usize) -> Result<ModeSpectrum> {
    if count == 0 {
        return Err(Error::invalid("mode count must be at least 1"));
    }
    let limit = spec.max_trusted_modes();
    if count > limit {
        return Err(Error::UvValidity {
            requested: count,
            grid_points: spec.grid_points,
            limit,
        });
    }
    let matrix = spec.matrix()?;
    let lambdas = matrix.lowest(count);
    let (h, _) = spec.nodes();
    let zero_tol = 256.0 * f64::EPSILON * 4.0 / (h * h);
    let mut modes = Vec::with_capacity(count);
    for (index, &lambda) in lambdas.iter().enumerate() {
        let lambda = if lambda.abs() <= zero_tol { 0.0 } else { lambda };
        if lambda < 0.0 {
            return Err(Error::ImaginaryFrequency { index, lambda });
        }
        modes.push(Mode {
            omega: lambda.sqrt(),
            multiplicity: 1,
        });
    }
    let coverage = modes.last().map_or(0.0, |m| m.omega);
    ModeSpectrum::new(
        modes,
        1,
        count,
        coverage,
        format!(
            "schrodinger L={} {} N={}",
            spec.length, spec.bc, spec.grid_points
        ),
    )
}

/// Shifts every mode by a constant mass term, `ω → sqrt(ω² + m²)`.
///
/// The shift accumulates on top of the stored base frequencies, so applying
/// `a` then `b` gives bit-identical frequencies to applying `a + b` once.
pub fn massive_spectrum(base: &ModeSpectrum, m_squared: f64) -> Result<ModeSpectrum> {
    if !m_squared.is_finite() {
        return Err(Error::invalid("mass term must be finite"));
    }
    let shift = base.mass_shift + m_squared;
    let mut modes = Vec::with_capacity(base.modes.len());
    for (index, (b, m)) in base.base.iter().zip(&base.modes).enumerate() {
        let lambda = b * b + shift;
        if lambda < 0.0 {
            return Err(Error::ImaginaryFrequency { index, lambda });
        }
        let omega = if shift == 0.0 { *b } else { lambda.sqrt() };
        modes.push(Mode {
            omega,
            multiplicity: m.multiplicity,
        });
    }
    let coverage = if base.coverage.is_infinite() {
        f64::INFINITY
    } else {
        let c2 = base.coverage * base.coverage + shift;
        if c2 < 0.0 {
            0.0
        } else {
            c2.sqrt()
        }
    };
    Ok(ModeSpectrum {
        modes,
        base: base.base.clone(),
        mass_shift: shift,
        dimension: base.dimension,
        uv_valid_count: base.uv_valid_count,
        coverage,
        label: format!("{} m2={m_squared}", base.label),
    })
}
