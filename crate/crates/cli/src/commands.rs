use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeropoint::asymptotics::{log_grid, Term};
use zeropoint::certifier::{certify_finiteness_with, combination_check_with, rigid_motion, slot_name, FinitenessCertificate};
use zeropoint::cutoffs::{recover_weight, CutoffSpec};
use zeropoint::heat_kernel::{default_t_grid, divergence_fit, heat_trace, sdw_fit};
use zeropoint::io::render_spectrum;
use zeropoint::reference_models::{
    average_potential, reference_operator_fd, reference_pair_3d, solve_masses, Domain,
};
use zeropoint::regularization::{
    difference_sweep, extrapolate_finite_part_with, resum_difference, sweep, verify_erfc_identity, verify_lemma1,
    RegularizedSweep, ResumMethod,
};
use zeropoint::special::erfc;
use zeropoint::spectra::{interval_union, schrodinger_spectrum_1d, BoundaryCondition, ModeSpectrum, OperatorSpec1D};
use zeropoint::{Error, Result};

use crate::config::{
    self, CertifyConfig, CutoffInvertConfig, DivFitConfig, DomainSpec, HeatFitConfig, IdentityConfig, PistonConfig,
    RefModelConfig, SpectrumSpec, SweepConfig,
};
use crate::report::{Report, Table, Value};

/// A report plus the verdict of any pass/fail check it carries.
pub struct Outcome {
    pub report: Report,
    /// Set when a numerical check failed; artifacts are still written.
    pub failed_check: Option<String>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Self {
            report,
            failed_check: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn sweep_table(s: &RegularizedSweep) -> Table {
    let mut t = Table::new(&["omega_cutoff", "value"]);
    for (w, v) in s.omega_grid.iter().zip(&s.values) {
        t.push(vec![Value::from(*w), Value::from(*v)]);
    }
    t
}

fn build_sweep(
    spectrum: &ModeSpectrum,
    reference: Option<&ModeSpectrum>,
    cutoff: &CutoffSpec,
    grid: &[f64],
) -> Result<RegularizedSweep> {
    match reference {
        Some(r) => difference_sweep(spectrum, r, cutoff, grid),
        None => sweep(spectrum, cutoff, grid),
    }
}

fn spectra(spec: &SpectrumSpec, reference: Option<&SpectrumSpec>, base: &Path) -> Result<(ModeSpectrum, Option<ModeSpectrum>)> {
    let a = spec.build(base)?;
    let b = reference.map(|r| r.build(base)).transpose()?;
    if let Some(b) = &b {
        if b.dimension() != a.dimension() {
            return Err(invalid("spectrum and reference must have the same dimension"));
        }
    }
    Ok((a, b))
}

fn attach_spectrum(report: &mut Report, name: &str, s: &ModeSpectrum) {
    let (csv, meta) = render_spectrum(s);
    report.attachments.push((format!("{name}.csv"), csv));
    report.attachments.push((format!("{name}.meta.toml"), meta));
}

pub fn identity_check(cfg: &IdentityConfig) -> Result<Outcome> {
    positive("omega_min", cfg.omega_min)?;
    positive("tolerance", cfg.tolerance)?;
    if !(cfg.omega_max > cfg.omega_min && cfg.omega_max.is_finite()) || cfg.points < 2 {
        return Err(invalid("identity grid needs omega_min < omega_max and at least 2 points"));
    }
    let grid = log_grid(cfg.omega_min, cfg.omega_max, cfg.points);
    let mut table = Table::new(&["omega", "omega_other", "lemma1_residual", "erfc_residual"]);
    let (mut worst_lemma, mut worst_erfc) = (0.0f64, 0.0f64);
    for &w in &grid {
        for &v in &grid {
            let l = verify_lemma1(w, v)?;
            let e = verify_erfc_identity(w, v)?;
            worst_lemma = worst_lemma.max(l);
            worst_erfc = worst_erfc.max(e);
            table.push(vec![w.into(), v.into(), l.into(), e.into()]);
        }
    }
    let passed = worst_lemma < cfg.tolerance && worst_erfc < cfg.tolerance;
    let mut r = Report::new("identity-check");
    r.set("seed", cfg.seed);
    r.set("points", cfg.points);
    r.set("max_lemma1_residual", worst_lemma);
    r.set("max_erfc_residual", worst_erfc);
    r.set("tolerance", cfg.tolerance);
    r.set("passed", passed);
    r.table("residuals", table);
    Ok(Outcome {
        report: r,
        failed_check: (!passed).then(|| {
            format!("identity residual {:e} exceeds tolerance {:e}", worst_lemma.max(worst_erfc), cfg.tolerance)
        }),
    })
}

fn report_extrapolation(r: &mut Report, s: &RegularizedSweep, d: u32, negligible: f64) -> Result<()> {
    let x = extrapolate_finite_part_with(s, d, negligible)?;
    r.set("finite_part", x.finite_part);
    r.set("energy", 0.5 * x.finite_part);
    r.set("error_estimate", x.error_estimate);
    r.set("converged", x.converged);
    r.set("threshold", x.threshold);
    r.set("fit_residual", x.fit.fit.residual_norm);
    r.set("fit_condition", x.fit.fit.condition);
    let mut t = Table::new(&["term", "coefficient", "standard_error"]);
    for (term, c) in x.fit.terms.iter().zip(&x.fit.fit.coefficients) {
        t.push(vec![term.to_string().into(), (*c).into(), x.fit.standard_error(*term).into()]);
    }
    r.table("fit", t);
    Ok(())
}

pub fn run_sweep(cfg: &SweepConfig, base: &Path) -> Result<Outcome> {
    let cutoff = config::cutoff(&cfg.cutoff, base)?;
    let grid = cfg.grid.values("omega")?;
    positive("negligible", cfg.negligible)?;
    let (a, b) = spectra(&cfg.spectrum, cfg.reference.as_ref(), base)?;
    let s = build_sweep(&a, b.as_ref(), &cutoff, &grid)?;
    let mut r = Report::new("sweep");
    r.set("seed", cfg.seed);
    r.set("cutoff", cutoff.name());
    r.set("spectra", s.spectrum_labels.clone());
    r.set("dimension", a.dimension());
    if cfg.extrapolate {
        report_extrapolation(&mut r, &s, a.dimension(), cfg.negligible)?;
    }
    r.table("sweep", sweep_table(&s));
    if cfg.save_spectra {
        attach_spectrum(&mut r, "spectrum", &a);
        if let Some(b) = &b {
            attach_spectrum(&mut r, "reference", b);
        }
    }
    Ok(r.into())
}

pub fn heat_fit(cfg: &HeatFitConfig, base: &Path) -> Result<Outcome> {
    let s = cfg.spectrum.build(base)?;
    let d = s.dimension();
    let order = cfg.order.unwrap_or(d + 1);
    let grid = match &cfg.t_grid {
        Some(g) => g.values("t")?,
        None => default_t_grid(&s)?,
    };
    let fit = sdw_fit(&s, d, order, &grid)?;
    let mut r = Report::new("heat-fit");
    r.set("seed", cfg.seed);
    r.set("dimension", d);
    r.set("order", order);
    r.set("t_min", fit.t_window.0);
    r.set("t_max", fit.t_window.1);
    r.set("fit_residual", fit.fit_residual);
    r.set("condition", fit.condition);
    let mut t = Table::new(&["index", "coefficient", "standard_error"]);
    for (i, (c, e)) in fit.coefficients.iter().zip(&fit.standard_errors).enumerate() {
        let name = slot_name(i as u32);
        r.set(format!("coefficient[{name}]"), *c);
        t.push(vec![name.into(), (*c).into(), (*e).into()]);
    }
    r.table("coefficients", t);
    if cfg.trace {
        let mut tr = Table::new(&["t", "K"]);
        for &tt in &grid {
            tr.push(vec![tt.into(), heat_trace(&s, tt)?.into()]);
        }
        r.table("trace", tr);
    }
    Ok(r.into())
}

pub fn div_fit(cfg: &DivFitConfig, base: &Path) -> Result<Outcome> {
    let cutoff = config::cutoff(&cfg.cutoff, base)?;
    let grid = cfg.grid.values("omega")?;
    let (a, b) = spectra(&cfg.spectrum, cfg.reference.as_ref(), base)?;
    let d = a.dimension();
    let s = build_sweep(&a, b.as_ref(), &cutoff, &grid)?;
    let fit = divergence_fit(&s, d)?;
    let top = grid[grid.len() - 1];
    let mut r = Report::new("div-fit");
    r.set("seed", cfg.seed);
    r.set("cutoff", cutoff.name());
    r.set("dimension", d);
    r.set("dominant_term", fit.dominant(top).to_string());
    r.set("log_coefficient", fit.log_coefficient);
    r.set("constant", fit.constant);
    r.set("fit_residual", fit.residual);
    r.set("condition", fit.condition);
    let mut t = Table::new(&["term", "coefficient", "standard_error"]);
    for (term, err) in &fit.standard_errors {
        let c = match term {
            Term::Power(p) => fit.power_coefficients[(d + 1 - p) as usize],
            Term::Log => fit.log_coefficient,
            Term::Constant => fit.constant,
            Term::Decay(_) => continue,
        };
        t.push(vec![term.to_string().into(), c.into(), (*err).into()]);
    }
    r.table("coefficients", t);
    r.table("sweep", sweep_table(&s));
    Ok(r.into())
}

fn certificate_report(r: &mut Report, cert: &FinitenessCertificate) {
    r.set("certified", cert.certified);
    r.set("dimension", cert.dimension);
    let failing: Vec<String> = cert.failing_slots().iter().map(|k| slot_name(*k)).collect();
    r.set("failing_slots", failing.join(" "));
    let mut t = Table::new(&["slot", "integral", "difference", "cancels"]);
    for (k, d) in &cert.delta_slots {
        for (name, v) in &d.entries {
            t.push(vec![slot_name(*k).into(), (*name).into(), (*v).into(), d.all_zero.into()]);
        }
    }
    r.table("slots", t);
    for l in &cert.narrative {
        r.line(format!("rule: {l}"));
    }
    for w in &cert.warnings {
        r.line(format!("warning: {w}"));
    }
}

pub fn certify(cfg: &CertifyConfig) -> Result<Outcome> {
    let a = cfg.a.build()?;
    let b = cfg.b.build()?;
    let cert = certify_finiteness_with(&a, &b, cfg.tolerance)?;
    let mut r = Report::new("certify");
    r.set("seed", cfg.seed);
    certificate_report(&mut r, &cert);
    if cfg.rigid_motion_trials > 0 {
        if a.bodies.is_empty() {
            return Err(invalid("rigid_motion_trials needs at least one body in configuration a"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut certified = 0usize;
        for _ in 0..cfg.rigid_motion_trials {
            let index = rng.random_range(0..a.bodies.len());
            let shift = [0; 3].map(|_| rng.random_range(-10.0..10.0));
            let moved = rigid_motion(&a, index, shift)?;
            if certify_finiteness_with(&a, &moved, cfg.tolerance)?.certified {
                certified += 1;
            }
        }
        r.set("rigid_motion_trials", cfg.rigid_motion_trials);
        r.set("rigid_motion_certified", certified);
    }
    Ok(r.into())
}

pub fn refmodel(cfg: &RefModelConfig, base: &Path) -> Result<Outcome> {
    let v = cfg.potential.build(base)?;
    let domain = match cfg.domain {
        DomainSpec::Interval { length } => Domain::Interval(length),
        DomainSpec::Box { lengths } => Domain::Box(lengths),
    };
    let profile = v.clone();
    let avg = average_potential(move |x| profile(x[0]), domain, cfg.quadrature_points)?;
    let masses = solve_masses(&avg);
    let mut r = Report::new("refmodel");
    r.set("seed", cfg.seed);
    r.set("v_bar", avg.v_bar);
    r.set("v2_bar", avg.v2_bar);
    r.set("volume", avg.volume);
    r.set("m1_squared", masses.m1_squared);
    r.set("m2_squared", masses.m2_squared);
    r.set("tachyonic", masses.is_tachyonic());
    let refs = masses.slot_maps(avg.dimension, avg.volume)?;
    let cert = combination_check_with(&avg.slot_map()?, &refs, &[0.5, 0.5], cfg.tolerance)?;
    r.set("two_mass_slots_match", cert.certified);
    for w in &cert.warnings {
        r.line(format!("warning: {w}"));
    }
    match (cfg.domain, cfg.grid_points, cfg.omega_max) {
        (DomainSpec::Interval { length }, Some(n), None) => {
            let spec = OperatorSpec1D::new(length, move |x| v(x), BoundaryCondition::Periodic, n)?;
            let count = spec.max_trusted_modes();
            let a = schrodinger_spectrum_1d(&spec, count)?;
            let b = reference_operator_fd(&avg, &spec, count)?;
            let top = 0.99 * a.coverage().min(b.coverage()) / CutoffSpec::PureErfc.tail_abscissa()?;
            let grid = log_grid(top / 100.0, top, 21);
            let s = difference_sweep(&a, &b, &CutoffSpec::PureErfc, &grid)?;
            let sup = s.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let mid = s.values[s.values.len() / 2].abs();
            r.set("sweep_sup", sup);
            r.set("sweep_midpoint", mid);
            r.set("sweep_bounded", sup < 2.0 * mid);
            r.table("sweep", sweep_table(&s));
        }
        (DomainSpec::Box { lengths }, None, Some(w)) => {
            let (d1, d2) = reference_pair_3d(lengths, &masses, w)?;
            r.set("reference_modes", d1.total_multiplicity());
            attach_spectrum(&mut r, "reference_1", &d1);
            attach_spectrum(&mut r, "reference_2", &d2);
        }
        (_, None, None) => {}
        _ => {
            return Err(invalid(
                "grid_points applies to interval domains and omega_max to box domains",
            ))
        }
    }
    Ok(r.into())
}

pub fn cutoff_invert(cfg: &CutoffInvertConfig, base: &Path) -> Result<Outcome> {
    let cutoff = config::cutoff(&cfg.cutoff, base)?;
    let z = cfg.z_grid.values("z")?;
    let rec = recover_weight(&cutoff, &z, cfg.order)?;
    let mut r = Report::new("cutoff-invert");
    r.set("seed", cfg.seed);
    r.set("cutoff", cutoff.name());
    r.set("order", cfg.order);
    r.set("negative_mass", rec.negative_mass);
    r.set("clipped", rec.clipped);
    r.set("signed", rec.weight.is_signed());
    let mut t = Table::new(&["xi", "g"]);
    for (x, g) in rec.z_grid.iter().zip(&rec.values) {
        t.push(vec![(*x).into(), (*g).into()]);
    }
    r.table("weight", t);
    if let Some(check) = &cfg.check {
        let mut sup = 0.0f64;
        for x in check.values("check")? {
            let forward = rec.weight.integrate(|xi| erfc(x / xi))?;
            sup = sup.max((forward - cutoff.eval(x)?).abs());
        }
        r.set("round_trip_sup_error", sup);
    }
    Ok(r.into())
}

fn parse_method(name: &str) -> Result<ResumMethod> {
    match name {
        "erfc" => Ok(ResumMethod::ErfcExtrapolate),
        "abel" => Ok(ResumMethod::Abel),
        other => match other.strip_prefix("riesz:").map(str::parse::<u32>) {
            Some(Ok(k)) if k >= 1 => Ok(ResumMethod::RieszMean(k)),
            _ => Err(invalid(format!("unknown resummation method `{other}` (erfc, abel, riesz:<k>)"))),
        },
    }
}

/// Zeta-regularized energy difference of the piston against the symmetric split.
pub fn piston_oracle(a: f64, l: f64) -> f64 {
    let interval = |len: f64| -std::f64::consts::PI / (24.0 * len);
    interval(a) + interval(l - a) - 2.0 * interval(l / 2.0)
}

pub fn piston(cfg: &PistonConfig, base: &Path) -> Result<Outcome> {
    positive("a", cfg.a)?;
    positive("length", cfg.length)?;
    positive("omega_top", cfg.omega_top)?;
    positive("oracle_tolerance", cfg.oracle_tolerance)?;
    positive("negligible", cfg.negligible)?;
    if cfg.a >= cfg.length {
        return Err(invalid("the wall must sit inside the interval: 0 < a < length"));
    }
    if cfg.points < 8 {
        return Err(invalid("piston sweep needs at least 8 points"));
    }
    let methods = cfg.methods.iter().map(|m| parse_method(m)).collect::<Result<Vec<_>>>()?;
    let cutoff = config::cutoff(&cfg.cutoff, base)?;
    let cover = cutoff.tail_abscissa()? * cfg.omega_top * (1.0 + 1e-9);
    let (l, a) = (cfg.length, cfg.a);
    let split = interval_union(&[a, l - a], BoundaryCondition::Dirichlet, cover)?;
    let symmetric = interval_union(&[l / 2.0, l / 2.0], BoundaryCondition::Dirichlet, cover)?;
    let grid = log_grid(cfg.omega_top / 30.0, cfg.omega_top, cfg.points);
    let s = difference_sweep(&split, &symmetric, &cutoff, &grid)?;
    let mut r = Report::new("piston");
    r.set("seed", cfg.seed);
    r.set("a", a);
    r.set("length", l);
    r.set("cutoff", cutoff.name());
    report_extrapolation(&mut r, &s, 1, cfg.negligible)?;
    let energy = 0.5 * extrapolate_finite_part_with(&s, 1, cfg.negligible)?.finite_part;
    let oracle = piston_oracle(a, l);
    let rel = (energy - oracle).abs() / oracle.abs();
    r.set("energy_difference", energy);
    r.set("zeta_oracle", oracle);
    r.set("relative_error", rel);
    r.set("oracle_tolerance", cfg.oracle_tolerance);
    let passed = rel < cfg.oracle_tolerance;
    r.set("passed", passed);
    for (name, m) in cfg.methods.iter().zip(methods) {
        let v = resum_difference(&split, &symmetric, m)?;
        r.set(format!("energy[{name}]"), 0.5 * v.value);
        r.set(format!("error_estimate[{name}]"), 0.5 * v.error_estimate);
    }
    r.table("sweep", sweep_table(&s));
    Ok(Outcome {
        report: r,
        failed_check: (!passed).then(|| format!("piston energy {energy} misses the zeta oracle {oracle} (relative error {rel:e})")),
    })
}
