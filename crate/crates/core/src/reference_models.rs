//! Reference problems with constant potentials.
//!
//! In one dimension, `-d²/dx² + V(x)` on a periodic interval is compared with
//! `-d²/dx² + V̄`, where `V̄` is the spatial average. In three dimensions one
//! constant mass cannot match both `∫V` and `∫V²`, so two masses are used with
//! weight ½ each:
//!
//! ```text
//! m₁² + m₂² = 2 V̄,    m₁⁴ + m₂⁴ = 2 mean(V²)
//! ```
//!
//! Mode convention: the periodic interval carries `n = 0` once and each
//! `±n`, `n ≥ 1`, as a doubly degenerate level.

use crate::certifier::SlotMap;
use crate::error::{Error, Result};
use crate::spectra::{
    box_spectrum_3d, interval_spectrum, massive_spectrum, schrodinger_spectrum_1d, BoundaryCondition, ModeSpectrum,
    OperatorSpec1D,
};

pub const MIN_QUADRATURE_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedPotential {
    pub v_bar: f64,
    pub v2_bar: f64,
    pub volume: f64,
    pub dimension: u32,
}

impl AveragedPotential {
    /// Checks `v2_bar ≥ v_bar²`, allowing for rounding in the averages.
    pub fn new(v_bar: f64, v2_bar: f64, volume: f64, dimension: u32) -> Result<Self> {
        if !(v_bar.is_finite() && v2_bar.is_finite()) {
            return Err(Error::invalid("potential averages must be finite"));
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::invalid("averaging volume must be positive"));
        }
        let slack = 1e-12 * v2_bar.abs().max(v_bar * v_bar);
        if v2_bar < v_bar * v_bar - slack {
            return Err(Error::invalid(format!(
                "mean(V^2) = {v2_bar} is below mean(V)^2 = {}",
                v_bar * v_bar
            )));
        }
        Ok(Self {
            v_bar,
            v2_bar: v2_bar.max(v_bar * v_bar),
            volume,
            dimension,
        })
    }

    pub fn variance(&self) -> f64 {
        self.v2_bar - self.v_bar * self.v_bar
    }

    /// `{volume, ∫V dV, ∫V² dV}` of the averaged operator's target.
    pub fn slot_map(&self) -> Result<SlotMap> {
        SlotMap::bulk(self.dimension, self.volume, self.v_bar * self.volume, self.v2_bar * self.volume)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassPair {
    pub m1_squared: f64,
    pub m2_squared: f64,
}

impl MassPair {
    pub fn is_tachyonic(&self) -> bool {
        self.m2_squared < 0.0
    }

    /// Slot map of the constant-mass problem `-∇² + m²` on `volume`.
    pub fn slot_maps(&self, dimension: u32, volume: f64) -> Result<[SlotMap; 2]> {
        let one = |m2: f64| SlotMap::bulk(dimension, volume, m2 * volume, m2 * m2 * volume);
        Ok([one(self.m1_squared)?, one(self.m2_squared)?])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval(f64),
    Box([f64; 3]),
}

impl Domain {
    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Interval(l) => l,
            Domain::Box([a, b, c]) => a * b * c,
        }
    }

    pub fn dimension(&self) -> u32 {
        match self {
            Domain::Interval(_) => 1,
            Domain::Box(_) => 3,
        }
    }
}

/// Composite-midpoint averages of `V` and `V²`, with `quadrature_points`
/// cells per axis.
///
/// On an interval the nodes coincide with the cell centres of a periodic
/// [`OperatorSpec1D`] with as many grid points.
pub fn average_potential<F>(v: F, domain: Domain, quadrature_points: usize) -> Result<AveragedPotential>
where
    F: Fn(&[f64]) -> f64,
{
    if quadrature_points < MIN_QUADRATURE_POINTS {
        return Err(Error::invalid(format!(
            "quadrature_points must be at least {MIN_QUADRATURE_POINTS}, got {quadrature_points}"
        )));
    }
    let n = quadrature_points;
    let mid = |l: f64, i: usize| (i as f64 + 0.5) * l / n as f64;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut count = 0usize;
    let mut push = |x: &[f64]| -> Result<()> {
        let value = v(x);
        if !value.is_finite() {
            return Err(Error::NumericalFailure(format!("potential is not finite at {x:?}")));
        }
        s1 += value;
        s2 += value * value;
        count += 1;
        Ok(())
    };
    match domain {
        Domain::Interval(l) => {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid("interval length must be positive"));
            }
            for i in 0..n {
                push(&[mid(l, i)])?;
            }
        }
        Domain::Box(ls) => {
            if ls.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return Err(Error::invalid("box lengths must be positive"));
            }
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        push(&[mid(ls[0], i), mid(ls[1], j), mid(ls[2], k)])?;
                    }
                }
            }
        }
    }
    let c = count as f64;
    AveragedPotential::new(s1 / c, s2 / c, domain.volume(), domain.dimension())
}

/// Exact periodic spectrum `sqrt((2πn/L)² + V̄)`, `n = 0..count`.
pub fn reference_operator_1d(avg: &AveragedPotential, length: f64, count: usize) -> Result<ModeSpectrum> {
    if avg.v_bar < 0.0 {
        return Err(Error::ImaginaryFrequency {
            index: 0,
            lambda: avg.v_bar,
        });
    }
    let free = interval_spectrum(length, BoundaryCondition::Periodic, count)?;
    Ok(massive_spectrum(&free, avg.v_bar)?.with_label(format!("reference L={length} V={}", avg.v_bar)))
}

/// The constant-potential operator discretized exactly like `spec`.
///
/// Comparing `spec` against this reference cancels the discretization error
/// of the kinetic term, leaving only the effect of `V − V̄`.
pub fn reference_operator_fd(avg: &AveragedPotential, spec: &OperatorSpec1D, count: usize) -> Result<ModeSpectrum> {
    let v_bar = avg.v_bar;
    let reference = OperatorSpec1D::new(spec.length, move |_| v_bar, spec.bc, spec.grid_points)?;
    Ok(schrodinger_spectrum_1d(&reference, count)?.with_label(format!("reference fd N={} V={v_bar}", spec.grid_points)))
}

/// Roots of `y² − 2V̄y + (2V̄² − mean(V²))`, larger first.
pub fn solve_masses(avg: &AveragedPotential) -> MassPair {
    let root = avg.variance().max(0.0).sqrt();
    MassPair {
        m1_squared: avg.v_bar + root,
        m2_squared: avg.v_bar - root,
    }
}

/// Periodic box spectra of `-∇² + m₁²` and `-∇² + m₂²`.
pub fn reference_pair_3d(
    lengths: [f64; 3],
    masses: &MassPair,
    omega_max: f64,
) -> Result<(ModeSpectrum, ModeSpectrum)> {
    if masses.is_tachyonic() {
        return Err(Error::ImaginaryFrequency {
            index: 0,
            lambda: masses.m2_squared,
        });
    }
    let free = box_spectrum_3d(lengths, BoundaryCondition::Periodic, omega_max)?;
    let d1 = massive_spectrum(&free, masses.m1_squared)?;
    let d2 = massive_spectrum(&free, masses.m2_squared)?;
    Ok((d1, d2))
}
