//! Seeley–DeWitt bookkeeping for boundary configurations and finiteness
//! certificates for Casimir energy differences.
//!
//! Bodies are described by their invariant integrals, never by meshes. Slot
//! `k` collects the integrals feeding the heat-kernel coefficient `a_{k/2}`:
//!
//! | slot | coefficient | integrals |
//! |------|-------------|-----------|
//! | 0 | `a_0` | volume |
//! | 1 | `a_1/2` | boundary area |
//! | 2 | `a_1` | `∫K dA`, `∫V dV` |
//! | 3 | `a_3/2` | `∫K² dA`, `∫K_ij K^ij dA`, `∫V dA` |
//! | 4 | `a_2` | `∫K³ dA`, `∫tr(K²)K dA`, `∫tr(K³) dA`, `∫V² dV`, `∫VK dA` |
//!
//! Since the species-dependent weights inside each coefficient are unknown, a
//! slot only counts as cancelled when every one of its integrals cancels.
//! Total-derivative terms such as `K_{ij:ij}` integrate to zero on closed
//! boundaries and are not tracked.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for integrals that are not closed-form constants.
pub const NUMERIC_TOLERANCE: f64 = 1e-12;

/// Highest slot tracked (`a_2`); certificates are available for `d ≤ 3`.
pub const MAX_SLOT: u32 = 4;

pub fn slot_name(slot: u32) -> String {
    if slot % 2 == 0 {
        format!("a_{}", slot / 2)
    } else {
        format!("a_{}/2", slot)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyGeometry {
    pub label: String,
    pub volume: f64,
    pub surface_area: f64,
    #[serde(default)]
    pub k_integral: f64,
    /// `(∫K² dA, ∫K_ij K^ij dA)`
    #[serde(default)]
    pub k2_integrals: (f64, f64),
    /// `(∫K³ dA, ∫tr(K²)K dA, ∫tr(K³) dA)`
    #[serde(default)]
    pub k3_integrals: (f64, f64, f64),
    /// `(∫V dV, ∫V² dV)`
    #[serde(default)]
    pub potential_integrals: (f64, f64),
    /// `(∫V dA, ∫VK dA)` over the boundary.
    #[serde(default)]
    pub boundary_potential_integrals: (f64, f64),
    #[serde(default)]
    pub is_thin_shell: bool,
    #[serde(default)]
    pub spherical: bool,
    /// Integrals are closed-form constants and compare exactly.
    #[serde(default)]
    pub exact: bool,
    /// Placement; never enters an invariant.
    #[serde(default)]
    pub position: [f64; 3],
}

impl BodyGeometry {
    /// A body with user-supplied volume and area and no curvature or potential.
    pub fn new(label: impl Into<String>, volume: f64, surface_area: f64) -> Result<Self> {
        let body = Self {
            label: label.into(),
            volume,
            surface_area,
            k_integral: 0.0,
            k2_integrals: (0.0, 0.0),
            k3_integrals: (0.0, 0.0, 0.0),
            potential_integrals: (0.0, 0.0),
            boundary_potential_integrals: (0.0, 0.0),
            is_thin_shell: false,
            spherical: false,
            exact: false,
            position: [0.0; 3],
        };
        body.validate()?;
        Ok(body)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.volume,
            self.surface_area,
            self.k_integral,
            self.k2_integrals.0,
            self.k2_integrals.1,
            self.k3_integrals.0,
            self.k3_integrals.1,
            self.k3_integrals.2,
            self.potential_integrals.0,
            self.potential_integrals.1,
            self.boundary_potential_integrals.0,
            self.boundary_potential_integrals.1,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid(format!("body {}: integrals must be finite", self.label)));
        }
        if self.volume < 0.0 {
            return Err(Error::invalid(format!("body {}: negative volume", self.label)));
        }
        if !(self.surface_area > 0.0) {
            return Err(Error::invalid(format!("body {}: surface area must be positive", self.label)));
        }
        Ok(())
    }

    /// Solid ball of radius `r`; principal curvatures `1/r`.
    pub fn sphere(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("sphere radius must be positive, got {radius}")));
        }
        let r = radius;
        Ok(Self {
            label: format!("sphere r={r}"),
            volume: 4.0 * PI * r * r * r / 3.0,
            surface_area: 4.0 * PI * r * r,
            k_integral: 8.0 * PI * r,
            k2_integrals: (16.0 * PI, 8.0 * PI),
            k3_integrals: (32.0 * PI / r, 16.0 * PI / r, 8.0 * PI / r),
            potential_integrals: (0.0, 0.0),
            boundary_potential_integrals: (0.0, 0.0),
            is_thin_shell: false,
            spherical: true,
            exact: true,
            position: [0.0; 3],
        })
    }

    /// Infinitely thin spherical shell of radius `r`.
    pub fn thin_sphere(radius: f64) -> Result<Self> {
        let mut s = Self::sphere(radius)?.with_thin_shell(true);
        s.label = format!("thin sphere r={radius}");
        Ok(s)
    }

    /// Rectangular box with flat faces (edges and corners are not tracked).
    pub fn cuboid(lengths: [f64; 3]) -> Result<Self> {
        if lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::invalid(format!("box lengths must be positive, got {lengths:?}")));
        }
        let [a, b, c] = lengths;
        let mut body = Self::new(format!("box {lengths:?}"), a * b * c, 2.0 * (a * b + b * c + c * a))?;
        body.exact = true;
        Ok(body)
    }

    /// Flat slab of face area `area` and thickness `thickness`, periodic in
    /// the transverse directions so only the two faces count.
    pub fn plate(area: f64, thickness: f64) -> Result<Self> {
        if !(area > 0.0 && thickness >= 0.0) {
            return Err(Error::invalid("plate needs positive area and nonnegative thickness"));
        }
        let mut body = Self::new(format!("plate A={area} t={thickness}"), area * thickness, 2.0 * area)?;
        body.exact = true;
        body.is_thin_shell = thickness == 0.0;
        Ok(body)
    }

    /// One-dimensional interval: the "area" counts boundary points.
    pub fn interval(length: f64) -> Result<Self> {
        let mut body = Self::new(format!("interval L={length}"), length, 2.0)?;
        if !(length > 0.0) {
            return Err(Error::invalid("interval length must be positive"));
        }
        body.exact = true;
        Ok(body)
    }

    /// A zero-width Dirichlet wall in one dimension (two boundary points).
    pub fn wall_1d() -> Self {
        Self {
            label: "wall".into(),
            volume: 0.0,
            surface_area: 2.0,
            k_integral: 0.0,
            k2_integrals: (0.0, 0.0),
            k3_integrals: (0.0, 0.0, 0.0),
            potential_integrals: (0.0, 0.0),
            boundary_potential_integrals: (0.0, 0.0),
            is_thin_shell: true,
            spherical: false,
            exact: true,
            position: [0.0; 3],
        }
    }

    /// Sets the thin-shell flag. Thin shells occupy no volume, and the
    /// integrals odd in `K` cancel between the two sides.
    pub fn with_thin_shell(mut self, thin: bool) -> Self {
        self.is_thin_shell = thin;
        if thin {
            self.volume = 0.0;
        }
        self
    }

    pub fn with_potential(mut self, integral_v: f64, integral_v2: f64) -> Self {
        self.potential_integrals = (integral_v, integral_v2);
        self
    }

    pub fn at(mut self, position: [f64; 3]) -> Self {
        self.position = position;
        self
    }

    /// Invariants with positions stripped, for comparing IR boxes.
    fn shape_key(&self) -> BodyGeometry {
        BodyGeometry {
            position: [0.0; 3],
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Configuration {
    pub dimension: u32,
    pub ir_box: BodyGeometry,
    #[serde(default)]
    pub bodies: Vec<BodyGeometry>,
    #[serde(default)]
    pub te_tm_paired: bool,
}

impl Configuration {
    pub fn new(dimension: u32, ir_box: BodyGeometry, bodies: Vec<BodyGeometry>, te_tm_paired: bool) -> Result<Self> {
        let c = Self {
            dimension,
            ir_box,
            bodies,
            te_tm_paired,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.dimension + 1 > MAX_SLOT {
            return Err(Error::invalid(format!(
                "certificates are available for 1 <= d <= {}, got d = {}",
                MAX_SLOT - 1,
                self.dimension
            )));
        }
        self.ir_box.validate()?;
        for b in &self.bodies {
            b.validate()?;
        }
        if self.te_tm_paired {
            if let Some(b) = self.bodies.iter().find(|b| b.is_thin_shell && !b.spherical) {
                return Err(Error::invalid(format!(
                    "TE/TM pairing is only established for spherical shells; body {} is not spherical",
                    b.label
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotEntry {
    pub name: &'static str,
    pub value: f64,
    pub exact: bool,
}

/// Per-slot invariant values of a problem, slots `0..=d+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotMap {
    pub dimension: u32,
    pub slots: BTreeMap<u32, Vec<SlotEntry>>,
    /// Rule applications recorded while building the map.
    pub notes: Vec<String>,
}

const SLOT_NAMES: [&[&str]; 5] = [
    &["volume"],
    &["area"],
    &["int K dA", "int V dV"],
    &["int K^2 dA", "int K_ij K^ij dA", "int V dA"],
    &["int K^3 dA", "int tr(K^2) K dA", "int tr(K^3) dA", "int V^2 dV", "int V K dA"],
];

impl SlotMap {
    fn empty(dimension: u32) -> Self {
        let slots = (0..=dimension + 1)
            .map(|k| {
                let entries = SLOT_NAMES[k as usize]
                    .iter()
                    .map(|name| SlotEntry {
                        name,
                        value: 0.0,
                        exact: true,
                    })
                    .collect();
                (k, entries)
            })
            .collect();
        Self {
            dimension,
            slots,
            notes: Vec::new(),
        }
    }

    fn add(&mut self, slot: u32, name: &str, value: f64, exact: bool) {
        if let Some(entries) = self.slots.get_mut(&slot) {
            let e = entries.iter_mut().find(|e| e.name == name).expect("known entry");
            e.value += value;
            e.exact &= exact;
        }
    }

    /// Bulk-only problem on a periodic box: `-∇² + V` with the given integrals.
    pub fn bulk(dimension: u32, volume: f64, integral_v: f64, integral_v2: f64) -> Result<Self> {
        if dimension == 0 || dimension + 1 > MAX_SLOT {
            return Err(Error::invalid(format!("unsupported dimension {dimension}")));
        }
        let mut m = Self::empty(dimension);
        m.add(0, "volume", volume, false);
        m.add(2, "int V dV", integral_v, false);
        m.add(4, "int V^2 dV", integral_v2, false);
        Ok(m)
    }

    pub fn get(&self, slot: u32, name: &str) -> Option<f64> {
        self.slots.get(&slot)?.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

/// Aggregates per-slot invariants over the IR box and all bodies.
pub fn slot_invariants(config: &Configuration) -> Result<SlotMap> {
    config.validate()?;
    let mut m = SlotMap::empty(config.dimension);
    for body in std::iter::once(&config.ir_box).chain(&config.bodies) {
        let ex = body.exact;
        let thin = body.is_thin_shell;
        m.add(0, "volume", if thin { 0.0 } else { body.volume }, ex);
        m.add(1, "area", body.surface_area, ex);
        m.add(2, "int K dA", if thin { 0.0 } else { body.k_integral }, ex);
        m.add(2, "int V dV", body.potential_integrals.0, ex);
        m.add(3, "int K^2 dA", body.k2_integrals.0, ex);
        m.add(3, "int K_ij K^ij dA", body.k2_integrals.1, ex);
        m.add(3, "int V dA", body.boundary_potential_integrals.0, ex);
        let odd = |v: f64| if thin { 0.0 } else { v };
        m.add(4, "int K^3 dA", odd(body.k3_integrals.0), ex);
        m.add(4, "int tr(K^2) K dA", odd(body.k3_integrals.1), ex);
        m.add(4, "int tr(K^3) dA", odd(body.k3_integrals.2), ex);
        m.add(4, "int V^2 dV", body.potential_integrals.1, ex);
        m.add(4, "int V K dA", odd(body.boundary_potential_integrals.1), ex);
        if thin {
            m.notes.push(format!(
                "{}: thin shell, zero volume; K_inside = -K_outside cancels the odd-in-K integrals",
                body.label
            ));
        }
    }
    if config.te_tm_paired {
        if let Some(entries) = m.slots.get_mut(&1) {
            for e in entries.iter_mut() {
                e.value = 0.0;
                e.exact = true;
            }
        }
        m.notes.push(
            "TE/TM pairing: equal and opposite a_1/2 contributions cancel the area slot (spherical symmetry assumed)"
                .into(),
        );
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotDelta {
    /// `(integral, difference)` pairs.
    pub entries: Vec<(&'static str, f64)>,
    pub all_zero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinitenessCertificate {
    pub dimension: u32,
    pub delta_slots: BTreeMap<u32, SlotDelta>,
    pub required_slots: Vec<u32>,
    pub certified: bool,
    pub narrative: Vec<String>,
    pub warnings: Vec<String>,
}

impl FinitenessCertificate {
    pub fn failing_slots(&self) -> Vec<u32> {
        self.delta_slots
            .iter()
            .filter(|(_, d)| !d.all_zero)
            .map(|(k, _)| *k)
            .collect()
    }
}

impl fmt::Display for FinitenessCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "certified: {}", self.certified)?;
        writeln!(f, "dimension: {}", self.dimension)?;
        for (k, d) in &self.delta_slots {
            writeln!(
                f,
                "slot {}: {}",
                slot_name(*k),
                if d.all_zero { "cancels" } else { "DOES NOT cancel" }
            )?;
            for (name, v) in &d.entries {
                writeln!(f, "  delta {name} = {v:.16e}")?;
            }
        }
        for line in &self.narrative {
            writeln!(f, "rule: {line}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

fn entry_tolerance(exact: bool, scale: f64, tolerance: f64) -> f64 {
    if exact {
        0.0
    } else {
        tolerance * scale.max(1.0)
    }
}

fn certificate_from(
    a: &SlotMap,
    b: &SlotMap,
    relative: bool,
    tolerance: f64,
    mut narrative: Vec<String>,
    warnings: Vec<String>,
) -> FinitenessCertificate {
    let mut delta_slots = BTreeMap::new();
    for (k, ea) in &a.slots {
        let eb = &b.slots[k];
        let mut entries = Vec::with_capacity(ea.len());
        let mut all_zero = true;
        let mut failing = Vec::new();
        for (x, y) in ea.iter().zip(eb) {
            let diff = x.value - y.value;
            let scale = if relative { x.value.abs().max(y.value.abs()) } else { 1.0 };
            if diff.abs() > entry_tolerance(x.exact && y.exact, scale, tolerance) {
                all_zero = false;
                failing.push(format!("{} differs by {diff:e}", x.name));
            }
            entries.push((x.name, diff));
        }
        if all_zero {
            narrative.push(format!("{}: every integral cancels", slot_name(*k)));
        } else {
            narrative.push(format!("{}: {}", slot_name(*k), failing.join("; ")));
        }
        delta_slots.insert(*k, SlotDelta { entries, all_zero });
    }
    let required_slots: Vec<u32> = (0..=a.dimension + 1).collect();
    let certified = required_slots.iter().all(|k| delta_slots[k].all_zero);
    FinitenessCertificate {
        dimension: a.dimension,
        delta_slots,
        required_slots,
        certified,
        narrative,
        warnings,
    }
}

fn check_comparable(a: &Configuration, b: &Configuration) -> Result<()> {
    if a.dimension != b.dimension {
        return Err(Error::InvalidComparison(format!(
            "dimensions differ: {} vs {}",
            a.dimension, b.dimension
        )));
    }
    if a.ir_box.shape_key() != b.ir_box.shape_key() {
        return Err(Error::InvalidComparison(
            "the IR regulator box must be held fixed between compared configurations".into(),
        ));
    }
    if a.te_tm_paired != b.te_tm_paired {
        return Err(Error::InvalidComparison("TE/TM pairing must agree".into()));
    }
    Ok(())
}

/// Slot-wise differences `a − b`.
pub fn delta_slots(a: &Configuration, b: &Configuration) -> Result<FinitenessCertificate> {
    delta_slots_with(a, b, NUMERIC_TOLERANCE)
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be finite and nonnegative, got {tolerance}")));
    }
    Ok(())
}

/// [`delta_slots`] with a custom tolerance for numeric integrals.
pub fn delta_slots_with(a: &Configuration, b: &Configuration, tolerance: f64) -> Result<FinitenessCertificate> {
    check_tolerance(tolerance)?;
    check_comparable(a, b)?;
    let (ma, mb) = (slot_invariants(a)?, slot_invariants(b)?);
    let mut narrative: Vec<String> = ma.notes.iter().map(|n| format!("A: {n}")).collect();
    narrative.extend(mb.notes.iter().map(|n| format!("B: {n}")));
    Ok(certificate_from(&ma, &mb, false, tolerance, narrative, Vec::new()))
}

/// Certifies the energy difference finite when every integral in slots
/// `0..=d+1` cancels.
pub fn certify_finiteness(a: &Configuration, b: &Configuration) -> Result<FinitenessCertificate> {
    certify_finiteness_with(a, b, NUMERIC_TOLERANCE)
}

pub fn certify_finiteness_with(a: &Configuration, b: &Configuration, tolerance: f64) -> Result<FinitenessCertificate> {
    let mut cert = delta_slots_with(a, b, tolerance)?;
    cert.narrative.push(if cert.certified {
        "all required slots cancel: the difference is finite".into()
    } else {
        format!(
            "slots {} do not cancel: no finiteness certificate",
            cert.failing_slots().iter().map(|k| slot_name(*k)).collect::<Vec<_>>().join(", ")
        )
    });
    Ok(cert)
}

/// Moves one body without changing its shape.
pub fn rigid_motion(config: &Configuration, body_index: usize, displacement: [f64; 3]) -> Result<Configuration> {
    if body_index >= config.bodies.len() {
        return Err(Error::invalid(format!(
            "body index {body_index} out of range ({} bodies)",
            config.bodies.len()
        )));
    }
    let mut moved = config.clone();
    let p = &mut moved.bodies[body_index].position;
    for (x, dx) in p.iter_mut().zip(displacement) {
        *x += dx;
    }
    Ok(moved)
}

/// Compares a target against `Σ w_j ref_j`, slot by slot.
pub fn combination_check(target: &SlotMap, references: &[SlotMap], weights: &[f64]) -> Result<FinitenessCertificate> {
    combination_check_with(target, references, weights, NUMERIC_TOLERANCE)
}

/// [`combination_check`] with a custom relative tolerance.
pub fn combination_check_with(
    target: &SlotMap,
    references: &[SlotMap],
    weights: &[f64],
    tolerance: f64,
) -> Result<FinitenessCertificate> {
    check_tolerance(tolerance)?;
    if references.is_empty() || references.len() != weights.len() {
        return Err(Error::invalid("need one weight per reference problem"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("combination weights sum to {total}, not 1")));
    }
    if references.iter().any(|r| r.dimension != target.dimension) {
        return Err(Error::invalid("reference slot maps must share the dimension"));
    }
    let mut combined = SlotMap::empty(target.dimension);
    for (r, w) in references.iter().zip(weights) {
        for (k, entries) in &r.slots {
            for e in entries {
                combined.add(*k, e.name, w * e.value, false);
            }
        }
    }
    let mut warnings = Vec::new();
    let distinct = references.iter().skip(1).any(|r| r.slots != references[0].slots);
    if distinct {
        warnings.push(
            "the references differ from one another: a matched combination is an analytically continued \
             comparison and need not be a physical energy difference"
                .into(),
        );
    }
    if weights.iter().any(|w| *w < 0.0) {
        warnings.push("negative weights: the combination has no direct physical reading".into());
    }
    let narrative = vec![format!(
        "target compared with weights {:?} over {} reference problems",
        weights,
        references.len()
    )];
    Ok(certificate_from(target, &combined, true, tolerance, narrative, warnings))
}
