//! Experiment configuration files.
//!
//! Every subcommand reads one TOML file. Unknown keys are rejected, and every
//! value is checked before any computation starts.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use zeropoint::certifier::{BodyGeometry, Configuration};
use zeropoint::cutoffs::{CutoffSpec, WeightFunction};
use zeropoint::io::{read_potential, read_spectrum, read_weight_table};
use zeropoint::spectra::{
    box_spectrum_3d_with_cap, interval_spectrum, interval_union, massive_spectrum, schrodinger_spectrum_1d,
    BoundaryCondition, ModeSpectrum, OperatorSpec1D, Potential1D, DEFAULT_MODE_CAP,
};
use zeropoint::{Error, Result};

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Relative paths inside a config resolve against the config's directory.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn values(&self, what: &str) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) || self.points < 2 {
            return Err(Error::InvalidArgument(format!(
                "{what} grid needs 0 < min < max and at least 2 points"
            )));
        }
        Ok(zeropoint::asymptotics::log_grid(self.min, self.max, self.points))
    }
}

#[derive(Debug, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Constant { value: f64 },
    /// `amplitude · sin²(2π x / period)`.
    SineSquared { amplitude: f64, period: f64 },
    /// `Σ c_k x^k`.
    Polynomial { coefficients: Vec<f64> },
    /// `values[i]` on `[breaks[i], breaks[i+1])`; `breaks` has one more entry.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation of an `x,V` table.
    Table { path: PathBuf },
}

impl PotentialSpec {
    pub fn build(&self, base: &Path) -> Result<Potential1D> {
        use std::sync::Arc;
        let bad = |m: &str| Error::InvalidArgument(format!("potential: {m}"));
        Ok(match self.clone() {
            PotentialSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(bad("value must be finite"));
                }
                Arc::new(move |_| value)
            }
            PotentialSpec::SineSquared { amplitude, period } => {
                if !(amplitude.is_finite() && period > 0.0) {
                    return Err(bad("sine-squared needs a finite amplitude and a positive period"));
                }
                Arc::new(move |x: f64| amplitude * (2.0 * PI * x / period).sin().powi(2))
            }
            PotentialSpec::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(bad("polynomial needs finite coefficients"));
                }
                Arc::new(move |x: f64| coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c))
            }
            PotentialSpec::PiecewiseConstant { breaks, values } => {
                if breaks.len() != values.len() + 1 || values.is_empty() {
                    return Err(bad("piecewise-constant needs one more break than values"));
                }
                if breaks.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(bad("breaks must increase"));
                }
                Arc::new(move |x: f64| {
                    let i = breaks.partition_point(|b| *b <= x).clamp(1, values.len());
                    values[i - 1]
                })
            }
            PotentialSpec::Table { path } => read_potential(&resolve(base, &path))?,
        })
    }
}

#[derive(Debug, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectrumSpec {
    /// Disjoint intervals with every mode up to `omega_max`, or the lowest
    /// `count` levels of a single interval.
    Interval {
        lengths: Vec<f64>,
        bc: BoundaryCondition,
        omega_max: Option<f64>,
        count: Option<usize>,
        #[serde(default)]
        mass_squared: f64,
    },
    Box {
        lengths: [f64; 3],
        bc: BoundaryCondition,
        omega_max: f64,
        mode_cap: Option<usize>,
        #[serde(default)]
        mass_squared: f64,
    },
    Schrodinger {
        length: f64,
        bc: BoundaryCondition,
        grid_points: usize,
        count: usize,
        potential: PotentialSpec,
        #[serde(default)]
        mass_squared: f64,
    },
    File {
        path: PathBuf,
        #[serde(default)]
        mass_squared: f64,
    },
}

impl SpectrumSpec {
    fn mass_squared(&self) -> f64 {
        match self {
            SpectrumSpec::Interval { mass_squared, .. }
            | SpectrumSpec::Box { mass_squared, .. }
            | SpectrumSpec::Schrodinger { mass_squared, .. }
            | SpectrumSpec::File { mass_squared, .. } => *mass_squared,
        }
    }

    pub fn build(&self, base: &Path) -> Result<ModeSpectrum> {
        let s = match self {
            SpectrumSpec::Interval {
                lengths,
                bc,
                omega_max,
                count,
                ..
            } => match (omega_max, count) {
                (Some(w), None) => interval_union(lengths, *bc, *w)?,
                (None, Some(n)) if lengths.len() == 1 => interval_spectrum(lengths[0], *bc, *n)?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "interval spectrum needs either omega_max, or count with a single length".into(),
                    ))
                }
            },
            SpectrumSpec::Box {
                lengths,
                bc,
                omega_max,
                mode_cap,
                ..
            } => box_spectrum_3d_with_cap(*lengths, *bc, *omega_max, mode_cap.unwrap_or(DEFAULT_MODE_CAP))?,
            SpectrumSpec::Schrodinger {
                length,
                bc,
                grid_points,
                count,
                potential,
                ..
            } => {
                let v = potential.build(base)?;
                let spec = OperatorSpec1D::new(*length, move |x| v(x), *bc, *grid_points)?;
                schrodinger_spectrum_1d(&spec, *count)?
            }
            SpectrumSpec::File { path, .. } => read_spectrum(&resolve(base, path))?,
        };
        match self.mass_squared() {
            0.0 => Ok(s),
            m2 => massive_spectrum(&s, m2),
        }
    }
}

/// `erfc`, `exp`, `gauss` or `weighted:<xi,g table>`.
pub fn cutoff(name: &str, base: &Path) -> Result<CutoffSpec> {
    match name.strip_prefix("weighted:") {
        Some(file) => {
            let (xi, g) = read_weight_table(&resolve(base, Path::new(file)))?;
            CutoffSpec::weighted(WeightFunction::from_table(xi, g)?)
        }
        None => CutoffSpec::from_name(name),
    }
}

#[derive(Debug, Deserialize, Clone)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodySpec {
    Sphere {
        radius: f64,
        #[serde(default)]
        thin: bool,
        #[serde(default)]
        position: [f64; 3],
    },
    Box {
        lengths: [f64; 3],
        #[serde(default)]
        position: [f64; 3],
    },
    Plate {
        area: f64,
        #[serde(default)]
        thickness: f64,
        #[serde(default)]
        position: [f64; 3],
    },
    Interval {
        length: f64,
    },
    Wall {
        #[serde(default)]
        position: [f64; 3],
    },
    Custom(BodyGeometry),
}

impl BodySpec {
    pub fn build(&self) -> Result<BodyGeometry> {
        Ok(match self {
            BodySpec::Sphere { radius, thin, position } => {
                let s = if *thin {
                    BodyGeometry::thin_sphere(*radius)?
                } else {
                    BodyGeometry::sphere(*radius)?
                };
                s.at(*position)
            }
            BodySpec::Box { lengths, position } => BodyGeometry::cuboid(*lengths)?.at(*position),
            BodySpec::Plate {
                area,
                thickness,
                position,
            } => BodyGeometry::plate(*area, *thickness)?.at(*position),
            BodySpec::Interval { length } => BodyGeometry::interval(*length)?,
            BodySpec::Wall { position } => BodyGeometry::wall_1d().at(*position),
            BodySpec::Custom(b) => {
                b.validate()?;
                b.clone()
            }
        })
    }
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationSpec {
    pub dimension: u32,
    pub ir_box: BodySpec,
    #[serde(default)]
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub te_tm_paired: bool,
}

impl ConfigurationSpec {
    pub fn build(&self) -> Result<Configuration> {
        let bodies = self.bodies.iter().map(BodySpec::build).collect::<Result<Vec<_>>>()?;
        Configuration::new(self.dimension, self.ir_box.build()?, bodies, self.te_tm_paired)
    }
}

fn default_identity_tolerance() -> f64 {
    1e-9
}

fn default_points() -> usize {
    20
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityConfig {
    /// Output directory; `--out` and `ZEROPOINT_OUT` take precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub omega_min: f64,
    pub omega_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_identity_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Output directory; `--out` and `ZEROPOINT_OUT` take precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cutoff")]
    pub cutoff: String,
    pub grid: LogGrid,
    pub spectrum: SpectrumSpec,
    /// Subtracted from `spectrum` when present.
    pub reference: Option<SpectrumSpec>,
    #[serde(default = "default_true")]
    pub extrapolate: bool,
    #[serde(default = "default_negligible")]
    pub negligible: f64,
    /// Also write the spectra as `omega,multiplicity` tables.
    #[serde(default)]
    pub save_spectra: bool,
}

fn default_cutoff() -> String {
    "erfc".into()
}

fn default_true() -> bool {
    true
}

fn default_negligible() -> f64 {
    zeropoint::regularization::NEGLIGIBLE
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatFitConfig {
    /// Output directory; `--out` and `ZEROPOINT_OUT` take precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub spectrum: SpectrumSpec,
    /// Highest half-integer index; defaults to `d + 1`.
    pub order: Option<u32>,
    /// Defaults to a window derived from the spectrum.
    pub t_grid: Option<LogGrid>,
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivFitConfig {
    /// Output directory; `--out` and `ZEROPOINT_OUT` take precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cutoff")]
    pub cutoff: String,
    pub grid: LogGrid,
    pub spectrum: SpectrumSpec,
    pub reference: Option<SpectrumSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    /// Output directory; `--out` and `ZEROPOINT_OUT` take precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub a: ConfigurationSpec,
    pub b: ConfigurationSpec,
    #[serde(default = "default_certify_tolerance")]
    pub tolerance: f64,
    /// Extra seeded random rigid motions of `a`, each certified against `a`.
    #[serde(default)]
    pub rigid_motion_trials: usize,
}

fn default_certify_tolerance() -> f64 {
    zeropoint::certifier::NUMERIC_TOLERANCE
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval { length: f64 },
    Box { lengths: [f64; 3] },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefModelConfig {
    /// Output directory; `--out` and `ZEROPOINT_OUT` take precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub potential: PotentialSpec,
    pub domain: DomainSpec,
    #[serde(default = "default_quadrature")]
    pub quadrature_points: usize,
    /// Interval: compare the operator with its averaged reference on this grid.
    pub grid_points: Option<usize>,
    /// Box: build the two reference spectra up to this frequency.
    pub omega_max: Option<f64>,
    #[serde(default = "default_certify_tolerance")]
    pub tolerance: f64,
}

fn default_quadrature() -> usize {
    256
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffInvertConfig {
    /// Output directory; `--out` and `ZEROPOINT_OUT` take precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub cutoff: String,
    #[serde(default = "default_order")]
    pub order: u32,
    pub z_grid: LogGrid,
    /// Round-trip check range `x ∈ [min, max]`.
    pub check: Option<LogGrid>,
}

fn default_order() -> u32 {
    40
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PistonConfig {
    /// Output directory; `--out` and `ZEROPOINT_OUT` take precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub a: f64,
    pub length: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: String,
    /// Largest cutoff scale of the sweep; defaults to 2000.
    #[serde(default = "default_piston_top")]
    pub omega_top: f64,
    #[serde(default = "default_piston_points")]
    pub points: usize,
    /// Extra resummations of the same pair: `abel`, `riesz:<k>`, `erfc`.
    #[serde(default)]
    pub methods: Vec<String>,
    #[serde(default = "default_oracle_tolerance")]
    pub oracle_tolerance: f64,
    #[serde(default = "default_negligible")]
    pub negligible: f64,
}

fn default_piston_top() -> f64 {
    2000.0
}

fn default_piston_points() -> usize {
    24
}

fn default_oracle_tolerance() -> f64 {
    5e-3
}
