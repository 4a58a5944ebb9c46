//! Cutoff functions `f(ω/Ω)` as weighted superpositions of erfc profiles,
//!
//! ```text
//! f(x) = ∫₀^∞ g(ξ) erfc(x/ξ) dξ,
//! ```
//!
//! and recovery of the weight `g` by Post's inversion formula.
//!
//! With `χ = ξ⁻²` and `s = x²`, `G(s) = −√π f′(√s)` is the Laplace transform
//! of `h(χ) = g(χ^{-1/2})/χ`, so `g(ξ) = χ h(χ)`. Post's formula approximates
//! `h(χ)` by the term `Tₙ(n/χ)` where
//!
//! ```text
//! Tₙ(s) = (−1)ⁿ sⁿ⁺¹ G⁽ⁿ⁾(s) / n!.
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::special::{erfc, ln_gamma, sum_compensated};

/// Width of the Gaussian used in place of a point-mass weight.
pub const DELTA_WIDTH: f64 = 1e-3;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Integrates `f` over `[lo, hi]` split at `breaks`; an infinite `hi` is
/// handled by mapping the last panel through `ξ = a + u/(1 − u)`.
fn integrate_support<F: Fn(f64) -> f64>(
    quad: &Quadrature,
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
) -> Result<f64> {
    let mut points: Vec<f64> = std::iter::once(lo)
        .chain(breaks.iter().copied().filter(|b| *b > lo && *b < hi))
        .collect();
    points.dedup();
    let mut total = 0.0;
    if hi.is_finite() {
        points.push(hi);
        total += quad.integrate_breaks(&f, &points)?.value;
    } else {
        let last = *points.last().expect("non-empty");
        if points.len() >= 2 {
            total += quad.integrate_breaks(&f, &points)?.value;
        }
        let tail = quad.integrate_breaks(
            |u: f64| {
                let w = 1.0 - u;
                let xi = last + u / w;
                let v = f(xi) / (w * w);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            &[0.0, 0.5, 0.9, 0.99, 1.0],
        )?;
        total += tail.value;
    }
    Ok(total)
}

#[derive(Clone)]
pub struct WeightFunction {
    eval: ScalarFn,
    support: (f64, f64),
    breaks: Vec<f64>,
    mass: f64,
    signed: bool,
    normalization_checked: bool,
    label: String,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("mass", &self.mass)
            .field("signed", &self.signed)
            .finish_non_exhaustive()
    }
}

fn weight_quadrature() -> Quadrature {
    Quadrature::with_tolerances(1e-14, 1e-13)
}

impl WeightFunction {
    /// A nonnegative weight on `support`, which must integrate to 1 within 1e-9.
    pub fn new(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
        breaks: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        Self::build(Arc::new(g), support, breaks, false, label.into(), true)
    }

    fn build(
        eval: ScalarFn,
        support: (f64, f64),
        mut breaks: Vec<f64>,
        signed: bool,
        label: String,
        check_mass: bool,
    ) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo >= 0.0 && hi > lo) || lo.is_infinite() {
            return Err(Error::InvalidCutoff(format!("bad weight support ({lo}, {hi})")));
        }
        breaks.sort_by(f64::total_cmp);
        if !signed {
            let top = if hi.is_finite() { hi } else { lo.max(1.0) * 1e3 };
            for k in 0..=200 {
                let xi = lo + (top - lo) * (k as f64 + 0.5) / 201.0;
                let v = eval(xi);
                if !(v >= 0.0) {
                    return Err(Error::InvalidCutoff(format!(
                        "weight {label} is negative or undefined at ξ = {xi}: {v}"
                    )));
                }
            }
        }
        let g = eval.clone();
        let mass = integrate_support(&weight_quadrature(), |x| g(x), lo, hi, &breaks)?;
        if check_mass && (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCutoff(format!(
                "weight {label} integrates to {mass}, not 1"
            )));
        }
        Ok(Self {
            eval,
            support,
            breaks,
            mass,
            signed,
            normalization_checked: check_mass,
            label,
        })
    }

    /// Narrow Gaussian of width [`DELTA_WIDTH`] standing in for a point mass.
    pub fn delta(center: f64) -> Result<Self> {
        Self::gaussian(center, DELTA_WIDTH)
    }

    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        if !(center > 12.0 * width && width > 0.0) {
            return Err(Error::InvalidCutoff(format!(
                "gaussian weight at {center} with width {width} leaks below ξ = 0"
            )));
        }
        let norm = 1.0 / (width * (2.0 * PI).sqrt());
        let lo = center - 12.0 * width;
        let hi = center + 12.0 * width;
        let breaks = (-4..=4).map(|k| center + k as f64 * width).collect();
        Self::build(
            Arc::new(move |xi| {
                let u = (xi - center) / width;
                norm * (-0.5 * u * u).exp()
            }),
            (lo, hi),
            breaks,
            false,
            format!("gaussian({center}, {width})"),
            true,
        )
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b > a && b.is_finite()) {
            return Err(Error::InvalidCutoff(format!("uniform weight needs 0 <= a < b, got [{a}, {b}]")));
        }
        let height = 1.0 / (b - a);
        Self::build(
            Arc::new(move |xi| if (a..=b).contains(&xi) { height } else { 0.0 }),
            (a, b),
            vec![],
            false,
            format!("uniform({a}, {b})"),
            true,
        )
    }

    /// Piecewise-linear weight through tabulated points, zero outside them.
    pub fn from_table(xi: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if xi.len() != g.len() || xi.len() < 2 {
            return Err(Error::InvalidCutoff("weight table needs at least two (xi, g) rows".into()));
        }
        if xi.windows(2).any(|w| !(w[1] > w[0])) || xi[0] < 0.0 {
            return Err(Error::InvalidCutoff("weight table abscissas must increase from >= 0".into()));
        }
        let support = (xi[0], xi[xi.len() - 1]);
        let breaks = xi.clone();
        let eval = move |x: f64| {
            if x < xi[0] || x > xi[xi.len() - 1] {
                return 0.0;
            }
            let j = xi.partition_point(|v| *v <= x).clamp(1, xi.len() - 1);
            let t = (x - xi[j - 1]) / (xi[j] - xi[j - 1]);
            g[j - 1] + t * (g[j] - g[j - 1])
        };
        Self::build(Arc::new(eval), support, breaks, false, "table".into(), true)
    }

    pub fn eval(&self, xi: f64) -> f64 {
        if xi < self.support.0 || xi > self.support.1 {
            0.0
        } else {
            (self.eval)(xi) / self.mass
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn normalization_checked(&self) -> bool {
        self.normalization_checked
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `∫ g(ξ) φ(ξ) dξ` over the support.
    pub fn integrate<F: Fn(f64) -> f64>(&self, phi: F) -> Result<f64> {
        let g = &self.eval;
        let v = integrate_support(
            &weight_quadrature(),
            |xi| g(xi) * phi(xi),
            self.support.0,
            self.support.1,
            &self.breaks,
        )?;
        Ok(v / self.mass)
    }
}

/// Supplies Post terms `Tₙ(s) = (−1)ⁿ sⁿ⁺¹ G⁽ⁿ⁾(s)/n!` of a Laplace transform `G`.
pub trait LaplaceDerivatives: Send + Sync {
    fn post_term(&self, n: u32, s: f64) -> Result<f64>;
}

/// Adapts a plain derivative provider `(n, s) ↦ G⁽ⁿ⁾(s)`.
pub struct PlainDerivatives<F>(pub F);

impl<F> LaplaceDerivatives for PlainDerivatives<F>
where
    F: Fn(u32, f64) -> Result<f64> + Send + Sync,
{
    fn post_term(&self, n: u32, s: f64) -> Result<f64> {
        let d = (self.0)(n, s)?;
        if d == 0.0 {
            return Ok(0.0);
        }
        let sign = if n % 2 == 1 { -d.signum() } else { d.signum() };
        let log = d.abs().ln() + (n as f64 + 1.0) * s.ln() - ln_gamma(n as f64 + 1.0);
        Ok(sign * log.exp())
    }
}

/// Rational transforms with closed-form Post terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RationalTransform {
    /// `1/s`, inverse of `g ≡ 1`.
    Inverse,
    /// `1/(s + a)`, inverse of `e^{−az}`.
    Shifted(f64),
    /// `1/s²`, inverse of `z`.
    InverseSquare,
}

impl LaplaceDerivatives for RationalTransform {
    fn post_term(&self, n: u32, s: f64) -> Result<f64> {
        Ok(match *self {
            RationalTransform::Inverse => 1.0,
            RationalTransform::Shifted(a) => (s / (s + a)).powi(n as i32 + 1),
            RationalTransform::InverseSquare => (n as f64 + 1.0) / s,
        })
    }
}

/// The `n`-th Post approximant of the inverse Laplace transform at `z`.
pub fn post_invert(g: &dyn LaplaceDerivatives, z: f64, n: u32) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid(format!("Post inversion needs z > 0, got {z}")));
    }
    if n == 0 {
        return Err(Error::invalid("Post inversion needs n >= 1"));
    }
    let s = n as f64 / z;
    let value = g.post_term(n, s).map_err(|e| Error::Derivative {
        order: n,
        point: s,
        message: e.to_string(),
    })?;
    if !value.is_finite() {
        return Err(Error::Derivative {
            order: n,
            point: s,
            message: format!("provider returned {value}"),
        });
    }
    Ok(value)
}

struct ErfcTransform;

impl LaplaceDerivatives for ErfcTransform {
    // G(s) = 2e^{−s}
    fn post_term(&self, n: u32, s: f64) -> Result<f64> {
        let n = n as f64;
        Ok(2.0 * ((n + 1.0) * s.ln() - s - ln_gamma(n + 1.0)).exp())
    }
}

struct ExponentialTransform;

impl LaplaceDerivatives for ExponentialTransform {
    // G(s) = √π e^{−√s};  dⁿ/dsⁿ e^{−√s} = (−1)ⁿ e^{−√s} Σₖ c_{n,k} s^{−(n+k)/2}.
    fn post_term(&self, n: u32, s: f64) -> Result<f64> {
        if n == 0 {
            return Ok(PI.sqrt() * s * (-s.sqrt()).exp());
        }
        let nf = n as f64;
        let ln_s = s.ln();
        let base = -s.sqrt() - ln_gamma(nf + 1.0);
        let terms = (0..n).map(|k| {
            let k = k as f64;
            let ln_c = ln_gamma(nf + k) - ln_gamma(k + 1.0) - ln_gamma(nf - k)
                - (nf + k) * std::f64::consts::LN_2;
            (ln_c + (nf + 1.0 - 0.5 * (nf + k)) * ln_s + base).exp()
        });
        Ok(PI.sqrt() * sum_compensated(terms))
    }
}

struct GaussianTransform;

impl LaplaceDerivatives for GaussianTransform {
    // G(s) = 2√π √s e^{−s}; Leibniz expansion of dⁿ(s^{1/2} e^{−s}).
    fn post_term(&self, n: u32, s: f64) -> Result<f64> {
        let nf = n as f64;
        let ln_s = s.ln();
        let ln_pre = -s - ln_gamma(nf + 1.0);
        let lead = ((nf + 1.5) * ln_s + ln_pre).exp();
        let rest = (1..=n).map(|j| {
            let j = j as f64;
            let ln_binom = ln_gamma(nf + 1.0) - ln_gamma(j + 1.0) - ln_gamma(nf - j + 1.0);
            let ln_ff = ln_gamma(j - 0.5) - (2.0 * PI.sqrt()).ln();
            -(ln_binom + ln_ff + (nf + 1.5 - j) * ln_s + ln_pre).exp()
        });
        let sum = sum_compensated(std::iter::once(lead).chain(rest));
        Ok(2.0 * PI.sqrt() * sum)
    }
}

/// Post terms of a cutoff given through its weight, by direct quadrature:
/// `Tₙ(s) = ∫ g(ξ) (2/ξ) (sχ)ⁿ e^{−sχ} s / n! dξ` with `χ = ξ⁻²`.
struct WeightTransform(WeightFunction);

impl LaplaceDerivatives for WeightTransform {
    fn post_term(&self, n: u32, s: f64) -> Result<f64> {
        let nf = n as f64;
        let lg = ln_gamma(nf + 1.0);
        self.0.integrate(|xi| {
            let chi = 1.0 / (xi * xi);
            let sc = s * chi;
            if sc == 0.0 {
                return 0.0;
            }
            2.0 / xi * (nf * sc.ln() - sc - lg + s.ln()).exp()
        })
    }
}

#[derive(Clone)]
pub struct CustomCutoff {
    pub f: ScalarFn,
    pub derivatives: Option<Arc<dyn LaplaceDerivatives>>,
    pub label: String,
}

#[derive(Clone)]
pub enum CutoffSpec {
    PureErfc,
    Exponential,
    Gaussian,
    WeightedErfc(WeightFunction),
    Custom(CustomCutoff),
}

impl fmt::Debug for CutoffSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl CutoffSpec {
    pub fn weighted(weight: WeightFunction) -> Result<Self> {
        let c = CutoffSpec::WeightedErfc(weight);
        c.validate()?;
        Ok(c)
    }

    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivatives: Option<Arc<dyn LaplaceDerivatives>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let c = CutoffSpec::Custom(CustomCutoff {
            f: Arc::new(f),
            derivatives,
            label: label.into(),
        });
        c.validate()?;
        Ok(c)
    }

    /// Catalog lookup: `erfc`, `exp`, `gauss`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "erfc" => Ok(CutoffSpec::PureErfc),
            "exp" => Ok(CutoffSpec::Exponential),
            "gauss" => Ok(CutoffSpec::Gaussian),
            other => Err(Error::UnsupportedCutoff(format!("unknown catalog cutoff `{other}`"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            CutoffSpec::PureErfc => "erfc".into(),
            CutoffSpec::Exponential => "exp".into(),
            CutoffSpec::Gaussian => "gauss".into(),
            CutoffSpec::WeightedErfc(w) => format!("weighted:{}", w.label()),
            CutoffSpec::Custom(c) => format!("custom:{}", c.label),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::invalid(format!("cutoff argument must be >= 0, got {x}")));
        }
        Ok(match self {
            CutoffSpec::PureErfc => erfc(x),
            CutoffSpec::Exponential => (-x).exp(),
            CutoffSpec::Gaussian => (-x * x).exp(),
            CutoffSpec::WeightedErfc(w) => {
                if x == 0.0 {
                    w.integrate(|_| 1.0)?
                } else {
                    w.integrate(|xi| erfc(x / xi))?
                }
            }
            CutoffSpec::Custom(c) => (c.f)(x),
        })
    }

    /// Smallest `x` beyond which `x·f(x)` stays below 1e-17.
    pub fn tail_abscissa(&self) -> Result<f64> {
        match self {
            CutoffSpec::PureErfc => Ok(6.0),
            CutoffSpec::Gaussian => Ok(6.5),
            CutoffSpec::Exponential => Ok(42.0),
            _ => {
                let mut x = 1.0;
                while x < 1e6 {
                    if (x * self.eval(x)?).abs() < 1e-17 && (2.0 * x * self.eval(2.0 * x)?).abs() < 1e-17 {
                        return Ok(x);
                    }
                    x *= 1.25;
                }
                Err(Error::InvalidCutoff(format!(
                    "cutoff {} does not decay below 1e-17 before x = 1e6",
                    self.name()
                )))
            }
        }
    }

    /// Checks `f(0) = 1`, monotone decrease on a 100-point log grid, `f(20) < 1e-6`.
    pub fn validate(&self) -> Result<()> {
        let f0 = self.eval(0.0)?;
        if (f0 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidCutoff(format!("{}: f(0) = {f0}, not 1", self.name())));
        }
        let grid: Vec<f64> = (0..100)
            .map(|k| 10f64.powf(-3.0 + (20f64.log10() + 3.0) * k as f64 / 99.0))
            .collect();
        let values: Vec<f64> = grid.iter().map(|&x| self.eval(x)).collect::<Result<_>>()?;
        let mut prev = f0;
        for (x, v) in grid.iter().zip(&values) {
            if !(*v <= prev + 1e-12) || !(*v >= -1e-12) {
                return Err(Error::InvalidCutoff(format!(
                    "{}: not monotone nonincreasing in [0, 1] near x = {x}",
                    self.name()
                )));
            }
            prev = *v;
        }
        let tail = self.eval(20.0)?;
        if !(tail < 1e-6) {
            return Err(Error::InvalidCutoff(format!("{}: f(20) = {tail} does not vanish", self.name())));
        }
        Ok(())
    }

    /// Post-term provider for `G(s) = −√π f′(√s)`.
    pub fn laplace(&self) -> Result<Arc<dyn LaplaceDerivatives>> {
        match self {
            CutoffSpec::PureErfc => Ok(Arc::new(ErfcTransform)),
            CutoffSpec::Exponential => Ok(Arc::new(ExponentialTransform)),
            CutoffSpec::Gaussian => Ok(Arc::new(GaussianTransform)),
            CutoffSpec::WeightedErfc(w) => Ok(Arc::new(WeightTransform(w.clone()))),
            CutoffSpec::Custom(c) => c.derivatives.clone().ok_or_else(|| {
                Error::UnsupportedCutoff(format!(
                    "cutoff {} has no derivative provider; finite differences are refused above order 8",
                    c.label
                ))
            }),
        }
    }

    pub fn weight(&self) -> Option<WeightFunction> {
        match self {
            CutoffSpec::WeightedErfc(w) => Some(w.clone()),
            _ => None,
        }
    }
}

pub fn eval_cutoff(cutoff: &CutoffSpec, x: f64) -> Result<f64> {
    cutoff.eval(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMoments {
    /// `∫ g ξ^{d+1−i} dξ` for `i = 0..=d`.
    pub moments: Vec<f64>,
    /// `∫ g ln ξ dξ`.
    pub log_moment: f64,
}

fn check_tail(weight: &WeightFunction, power: i32) -> Result<()> {
    let (_, hi) = weight.support();
    if hi.is_finite() {
        return Ok(());
    }
    let probe = |r: f64| r.powi(power + 1) * weight.eval(r).abs();
    let (near, far) = (probe(1e6), probe(1e9));
    if far > 0.0 && far >= 0.01 * near {
        return Err(Error::DivergentMoment { power });
    }
    Ok(())
}

pub fn weight_moments(weight: &WeightFunction, d: u32) -> Result<WeightMoments> {
    let mut moments = Vec::with_capacity(d as usize + 1);
    for i in 0..=d {
        let p = (d + 1 - i) as i32;
        check_tail(weight, p)?;
        moments.push(weight.integrate(|xi| xi.powi(p))?);
    }
    check_tail(weight, 0)?;
    let log_moment = weight.integrate(|xi| if xi > 0.0 { xi.ln() } else { 0.0 })?;
    Ok(WeightMoments { moments, log_moment })
}

/// A weight recovered by Post inversion, with the raw approximant samples.
#[derive(Debug, Clone)]
pub struct RecoveredWeight {
    pub weight: WeightFunction,
    pub order: u32,
    pub z_grid: Vec<f64>,
    /// Unclipped, unnormalized approximant on `z_grid`.
    pub raw: Vec<f64>,
    /// Final weight on `z_grid`.
    pub values: Vec<f64>,
    pub negative_mass: f64,
    pub clipped: bool,
}

/// Negative mass below this fraction of the positive mass is clipped away.
const CLIP_FRACTION: f64 = 1e-3;

/// Recovers `g` from a cutoff with an analytic Laplace-side provider.
///
/// The approximant is clipped at zero and renormalized when its negative part
/// is negligible; cutoffs whose weight is genuinely signed (the Gaussian) keep
/// the signed approximant.
pub fn recover_weight(cutoff: &CutoffSpec, z_grid: &[f64], n: u32) -> Result<RecoveredWeight> {
    if n < 10 {
        return Err(Error::invalid(format!("weight recovery needs n >= 10, got {n}")));
    }
    if z_grid.iter().any(|z| !(*z > 0.0)) {
        return Err(Error::invalid("z grid must be positive"));
    }
    let provider = cutoff.laplace()?;
    let p = provider.clone();
    let approximant = move |xi: f64| -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        let chi = 1.0 / (xi * xi);
        post_invert(p.as_ref(), chi, n).map_or(f64::NAN, |h| chi * h)
    };
    let raw: Vec<f64> = z_grid.par_iter().map(|&z| approximant(z)).collect();
    if raw.iter().any(|v| !v.is_finite()) {
        let bad = z_grid[raw.iter().position(|v| !v.is_finite()).expect("exists")];
        return Err(Error::Derivative {
            order: n,
            point: n as f64 / (bad * bad),
            message: "non-finite Post term".into(),
        });
    }
    let quad = weight_quadrature();
    let breaks = [0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.85, 1.0, 1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0];
    let integrate = |f: &dyn Fn(f64) -> f64| integrate_support(&quad, f, 0.0, f64::INFINITY, &breaks);
    let a = approximant.clone();
    let positive = integrate(&|x| a(x).max(0.0))?;
    let negative = -integrate(&|x| a(x).min(0.0))?;
    let clipped = negative <= CLIP_FRACTION * positive;
    let label = format!("post({}, n={n})", cutoff.name());
    let eval: ScalarFn = if clipped {
        Arc::new(move |x| approximant(x).max(0.0))
    } else {
        Arc::new(approximant)
    };
    let weight = WeightFunction::build(
        eval,
        (0.0, f64::INFINITY),
        breaks.to_vec(),
        !clipped,
        label,
        false,
    )?;
    let values = z_grid.iter().map(|&z| weight.eval(z)).collect();
    Ok(RecoveredWeight {
        weight,
        order: n,
        z_grid: z_grid.to_vec(),
        raw,
        values,
        negative_mass: negative,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        assert!((CutoffSpec::PureErfc.eval(1.0).unwrap() - 0.157_299_207_050_285_1).abs() < 1e-15);
        for c in [CutoffSpec::PureErfc, CutoffSpec::Exponential, CutoffSpec::Gaussian] {
            assert_eq!(c.eval(0.0).unwrap(), 1.0);
            c.validate().unwrap();
        }
    }

    #[test]
    fn narrow_weight_sifts() {
        let c = CutoffSpec::weighted(WeightFunction::delta(2.0).unwrap()).unwrap();
        for x in [0.3, 1.0, 2.5] {
            let v = c.eval(x).unwrap();
            assert!((v - erfc(x / 2.0)).abs() < 1e-5, "{x}: {v}");
        }
        assert_eq!(c.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn uniform_moments_closed_form() {
        let m = weight_moments(&WeightFunction::uniform(1.0, 2.0).unwrap(), 1).unwrap();
        assert!((m.moments[0] - 7.0 / 3.0).abs() < 1e-12);
        assert!((m.moments[1] - 1.5).abs() < 1e-12);
        assert!((m.log_moment - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn delta_moments_are_one() {
        let m = weight_moments(&WeightFunction::delta(1.0).unwrap(), 3).unwrap();
        for v in &m.moments {
            assert!((v - 1.0).abs() < 1e-4);
        }
        assert!(m.log_moment.abs() < 1e-5);
    }

    #[test]
    fn fat_tail_moment_diverges() {
        let w = WeightFunction::new(|x| if x >= 1.0 { 1.0 / (x * x) } else { 0.0 }, (1.0, f64::INFINITY), vec![], "fat")
            .unwrap();
        assert!(matches!(weight_moments(&w, 1), Err(Error::DivergentMoment { power: 2 })));
    }

    #[test]
    fn unnormalized_weight_is_rejected() {
        assert!(WeightFunction::new(|_| 2.0, (0.0, 1.0), vec![], "two").is_err());
    }

    #[test]
    fn post_canaries() {
        for n in 1..=60 {
            for z in [0.1, 0.5, 1.0, 3.0, 17.0] {
                assert_eq!(post_invert(&RationalTransform::Inverse, z, n).unwrap(), 1.0);
            }
        }
        let e = (-1f64).exp();
        let errs: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&n| (post_invert(&RationalTransform::Shifted(1.0), 1.0, n).unwrap() - e).abs() / e)
            .collect();
        assert!(errs[2] < 0.05 && errs[0] > errs[1] && errs[1] > errs[2]);
        let v = post_invert(&RationalTransform::InverseSquare, 2.0, 30).unwrap();
        assert!((v - 2.0).abs() / 2.0 < 0.05);
    }

    #[test]
    fn plain_derivatives_agree_with_closed_form() {
        let plain = PlainDerivatives(|n: u32, s: f64| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            Ok(sign * (ln_gamma(n as f64 + 1.0) - (n as f64 + 1.0) * (s + 1.0).ln()).exp())
        });
        let a = post_invert(&plain, 1.0, 25).unwrap();
        let b = post_invert(&RationalTransform::Shifted(1.0), 1.0, 25).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn provider_failure_carries_order_and_point() {
        let bad = PlainDerivatives(|_: u32, _: f64| Err(Error::NumericalFailure("boom".into())));
        match post_invert(&bad, 2.0, 7) {
            Err(Error::Derivative { order: 7, point, .. }) => assert_eq!(point, 3.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weight_transform_matches_uniform_closed_form() {
        let w = WeightFunction::uniform(1.0, 2.0).unwrap();
        let t = WeightTransform(w);
        for (n, s) in [(10u32, 5.0), (40, 30.0), (40, 12.0)] {
            let nf = n as f64;
            let exact = s / nf * (crate::special::gamma_p(nf, s) - crate::special::gamma_p(nf, s / 4.0));
            let got = t.post_term(n, s).unwrap();
            assert!((got - exact).abs() < 1e-10 * exact.abs().max(1e-3), "{n} {s}: {got} vs {exact}");
        }
    }

    #[test]
    fn custom_without_provider_is_unsupported() {
        let c = CutoffSpec::custom(|x| 1.0 / (1.0 + x.powi(8)), None, "rational").unwrap();
        assert!(matches!(recover_weight(&c, &[1.0], 20), Err(Error::UnsupportedCutoff(_))));
    }

    #[test]
    fn non_monotone_cutoff_is_rejected() {
        assert!(CutoffSpec::custom(|x| (-x).exp() * (1.0 + 0.5 * (5.0 * x).sin()), None, "wiggle").is_err());
    }
}
