//! Acceptance criteria 1 to 8. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeropoint::asymptotics::{log_grid, Term};
use zeropoint::certifier::{certify_finiteness, combination_check, rigid_motion, BodyGeometry, Configuration};
use zeropoint::cutoffs::{post_invert, recover_weight, CutoffSpec, RationalTransform};
use zeropoint::heat_kernel::{default_t_grid, divergence_fit, sdw_fit};
use zeropoint::reference_models::{
    average_potential, reference_operator_fd, solve_masses, AveragedPotential, Domain,
};
use zeropoint::regularization::{
    combination_sweep, difference_sweep, resum_difference, verify_erfc_identity, verify_lemma1, ResumMethod,
};
use zeropoint::special::erfc;
use zeropoint::spectra::{interval_union, massive_spectrum, schrodinger_spectrum_1d, BoundaryCondition, OperatorSpec1D};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Zeta-regularized Dirichlet interval energy: `(π/2L) ζ(−1)` with `ζ(−1) = −1/12`.
fn zeta_interval_energy(length: f64) -> f64 {
    let zeta_minus_one = -1.0 / 12.0;
    PI / (2.0 * length) * zeta_minus_one
}

fn piston_oracle(a: f64, l: f64) -> f64 {
    zeta_interval_energy(a) + zeta_interval_energy(l - a) - 2.0 * zeta_interval_energy(l / 2.0)
}

fn piston_pair(a: f64, l: f64, cover: f64) -> (zeropoint::spectra::ModeSpectrum, zeropoint::spectra::ModeSpectrum) {
    (
        interval_union(&[a, l - a], BoundaryCondition::Dirichlet, cover).unwrap(),
        interval_union(&[l / 2.0, l / 2.0], BoundaryCondition::Dirichlet, cover).unwrap(),
    )
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let oracle = piston_oracle(1.0, 10.0);
    let (a, b) = piston_pair(1.0, 10.0, 20_000.0);
    let r = resum_difference(&a, &b, ResumMethod::ErfcExtrapolate).map_err(|e| e.to_string())?;
    let energy = 0.5 * r.value;
    let rel = (energy - oracle).abs() / oracle.abs();
    let secs = start.elapsed().as_secs_f64();
    check(
        rel < 5e-3 && secs < 10.0,
        format!("piston dE = {energy:.10} vs zeta oracle {oracle:.10}, rel err {rel:.2e}, {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let grid = log_grid(1e-2, 1e2, 20);
    let mut worst: f64 = 0.0;
    for &w in &grid {
        for &v in &grid {
            worst = worst.max(verify_lemma1(w, v).map_err(|e| e.to_string())?);
            worst = worst.max(verify_erfc_identity(w, v).map_err(|e| e.to_string())?);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst < 1e-9 && secs < 30.0, format!("max residual {worst:.2e} over 20x20 grid, {secs:.2} s"))
}

fn criterion_3() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for l in [1.0, PI, 2.0 * PI] {
        let s = interval_union(&[l], BoundaryCondition::Dirichlet, 4000.0).unwrap();
        let fit = sdw_fit(&s, 1, 2, &default_t_grid(&s).unwrap()).map_err(|e| e.to_string())?;
        let e0 = (fit.coefficients[0] - l).abs() / l;
        let e1 = (fit.coefficients[1] + PI.sqrt()).abs() / PI.sqrt();
        ok &= e0 < 1e-4 && e1 < 1e-3;
        lines.push(format!("L={l:.4}: a0 rel {e0:.1e}, a1/2 rel {e1:.1e}"));
    }
    let p = interval_union(&[1.0], BoundaryCondition::Periodic, 4000.0).unwrap();
    let fit = sdw_fit(&p, 1, 2, &default_t_grid(&p).unwrap()).map_err(|e| e.to_string())?;
    let half = fit.coefficients[1].abs();
    ok &= half < 1e-6;
    lines.push(format!("periodic |a1/2| {half:.1e}"));
    check(ok, lines.join("; "))
}

fn criterion_4() -> Outcome {
    let base = interval_union(&[1.0], BoundaryCondition::Periodic, 90_000.0).unwrap();
    let s = massive_spectrum(&base, 1.0).unwrap();
    let grid = log_grid(20.0, 2000.0, 24);
    let mut fits = Vec::new();
    for name in ["erfc", "exp", "gauss"] {
        let cut = CutoffSpec::from_name(name).unwrap();
        let sw = zeropoint::regularization::sweep(&s, &cut, &grid).map_err(|e| e.to_string())?;
        fits.push(divergence_fit(&sw, 1).map_err(|e| e.to_string())?);
    }
    let logs: Vec<f64> = fits.iter().map(|f| f.log_coefficient).collect();
    let mut log_agree = true;
    let mut power_differs = false;
    for i in 0..3 {
        for j in i + 1..3 {
            log_agree &= (logs[i] - logs[j]).abs() <= 0.02 * logs[i].abs().max(logs[j].abs());
            for (p, q) in fits[i].power_coefficients.iter().zip(&fits[j].power_coefficients) {
                power_differs |= (p - q).abs() > 0.1 * p.abs().max(q.abs());
            }
        }
    }
    check(
        log_agree && power_differs,
        format!(
            "log coefficients {:.6} {:.6} {:.6}; Omega^2 coefficients {:.4} {:.4} {:.4}",
            logs[0],
            logs[1],
            logs[2],
            fits[0].power_coefficients[0],
            fits[1].power_coefficients[0],
            fits[2].power_coefficients[0]
        ),
    )
}

fn criterion_5() -> Outcome {
    // (a) rigid motions and TE/TM-paired thin spheres.
    let ir = BodyGeometry::cuboid([40.0, 40.0, 40.0]).unwrap();
    let conductors = vec![
        BodyGeometry::sphere(1.0).unwrap(),
        BodyGeometry::cuboid([1.0, 2.0, 3.0]).unwrap().at([5.0, 0.0, 0.0]),
    ];
    let before = Configuration::new(3, ir.clone(), conductors, false).unwrap();
    let after = rigid_motion(&before, 1, [-2.0, 3.0, 1.0]).unwrap();
    let shells = |r: f64| Configuration::new(3, ir.clone(), vec![BodyGeometry::thin_sphere(r).unwrap()], true).unwrap();
    let a_ok = certify_finiteness(&before, &after).unwrap().certified
        && certify_finiteness(&shells(1.0), &shells(2.5)).unwrap().certified;

    // (b) certified pairs with spectra: the piston and a matched mass combination.
    let w = 2000.0;
    let (pa, pb) = piston_pair(1.0, 10.0, 12.0 * w + 10.0);
    let piston = difference_sweep(&pa, &pb, &CutoffSpec::PureErfc, &[w, 2.0 * w]).unwrap();
    let base = interval_union(&[1.0], BoundaryCondition::Periodic, 12.0 * w + 10.0).unwrap();
    let m = |m2: f64| massive_spectrum(&base, m2).unwrap();
    let (lo, mid, hi) = (m(0.5), m(1.0), m(1.5));
    let masses =
        combination_sweep(&[(1.0, &mid)], &[(0.5, &lo), (0.5, &hi)], &CutoffSpec::PureErfc, &[w, 2.0 * w]).unwrap();
    let mut b_ok = true;
    let mut b_detail = Vec::new();
    for s in [&piston, &masses] {
        let change = (s.values[1] - s.values[0]).abs();
        let scale = s.values[0].abs().max(s.values[1].abs());
        b_ok &= change < 1e-4 * scale;
        b_detail.push(format!("{change:.1e}/{scale:.1e}"));
    }

    // (c) single-slot violations: volume (slot 0) or ∫V (slot 2) perturbed.
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let grid = log_grid(20.0, 2000.0, 24);
    let cover = 6.0 * 2000.0 + 10.0;
    let mut hits = 0;
    for case in 0..40 {
        let l: f64 = rng.random_range(0.5..3.0);
        let m2: f64 = rng.random_range(0.2..2.0);
        let mut delta: f64 = rng.random_range(0.05..0.5);
        if rng.random_bool(0.5) {
            delta = -delta;
        }
        let (l2, m22, expected) = if case % 2 == 0 {
            let l2 = l * (1.0 + delta);
            (l2, m2 * l / l2, Term::Power(2))
        } else {
            (l, m2 * (1.0 + delta), Term::Log)
        };
        let sa = massive_spectrum(&interval_union(&[l], BoundaryCondition::Periodic, cover).unwrap(), m2).unwrap();
        let sb = massive_spectrum(&interval_union(&[l2], BoundaryCondition::Periodic, cover).unwrap(), m22).unwrap();
        let sweep = difference_sweep(&sa, &sb, &CutoffSpec::PureErfc, &grid).unwrap();
        let fit = divergence_fit(&sweep, 1).map_err(|e| e.to_string())?;
        if fit.dominant(grid[grid.len() - 1]) == expected {
            hits += 1;
        }
    }
    let c_ok = hits as f64 >= 0.95 * 40.0;
    check(
        a_ok && b_ok && c_ok,
        format!(
            "(a) {}; (b) |dS(2W)-dS(W)|/scale {}; (c) {hits}/40 dominant terms matched",
            if a_ok { "certified" } else { "NOT certified" },
            b_detail.join(", ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let exact = (1..=60).all(|n| {
        log_grid(0.01, 100.0, 15)
            .iter()
            .all(|&z| post_invert(&RationalTransform::Inverse, z, n).unwrap() == 1.0)
    });
    let e = (-1f64).exp();
    let errs: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&n| (post_invert(&RationalTransform::Shifted(1.0), 1.0, n).unwrap() - e).abs() / e)
        .collect();
    let shifted_ok = errs[2] < 0.05 && errs[0] > errs[1] && errs[1] > errs[2];
    let xs = log_grid(0.1, 10.0, 60);
    let mut sups = Vec::new();
    for name in ["erfc", "exp", "gauss"] {
        let cut = CutoffSpec::from_name(name).unwrap();
        let rec = recover_weight(&cut, &log_grid(0.05, 20.0, 50), 40).map_err(|e| e.to_string())?;
        let mut sup: f64 = 0.0;
        for &x in &xs {
            let forward = rec.weight.integrate(|xi| erfc(x / xi)).map_err(|e| e.to_string())?;
            sup = sup.max((forward - cut.eval(x).unwrap()).abs());
        }
        sups.push(sup);
    }
    let round_ok = sups.iter().all(|s| *s < 0.02);
    check(
        exact && shifted_ok && round_ok,
        format!(
            "1/s exact: {exact}; 1/(s+1) rel err n=10,20,40: {:.3} {:.3} {:.3}; round-trip sup err erfc {:.4} exp {:.4} gauss {:.4}",
            errs[0], errs[1], errs[2], sups[0], sups[1], sups[2]
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cs_ok = true;
    for _ in 0..500 {
        let k = rng.random_range(1..10usize);
        let levels: Vec<f64> = (0..k).map(|_| rng.random_range(-5.0..5.0)).collect();
        let avg = average_potential(|x| levels[((x[0] * k as f64) as usize).min(k - 1)], Domain::Interval(1.0), 64 * k)
            .map_err(|e| e.to_string())?;
        cs_ok &= avg.variance() >= 0.0 && solve_masses(&avg).m1_squared >= solve_masses(&avg).m2_squared;
    }

    let mut worst: f64 = 0.0;
    let mut slots_ok = true;
    for _ in 0..100 {
        let v = rng.random_range(-2.0..4.0);
        let avg = AveragedPotential::new(v, v * v + rng.random_range(0.0..3.0), rng.random_range(0.5..10.0), 3).unwrap();
        let refs = solve_masses(&avg).slot_maps(3, avg.volume).unwrap();
        let cert = combination_check(&avg.slot_map().unwrap(), &refs, &[0.5, 0.5]).unwrap();
        slots_ok &= cert.certified;
        for d in cert.delta_slots.values() {
            for (_, x) in &d.entries {
                worst = worst.max(x.abs());
            }
        }
    }

    let l = 1.0;
    let n = 1024;
    let v = move |x: f64| (2.0 * PI * x / l).sin().powi(2);
    let spec = OperatorSpec1D::new(l, v, BoundaryCondition::Periodic, n).unwrap();
    let avg = average_potential(|x| v(x[0]), Domain::Interval(l), n).unwrap();
    let a = schrodinger_spectrum_1d(&spec, n / 4).map_err(|e| e.to_string())?;
    let b = reference_operator_fd(&avg, &spec, n / 4).map_err(|e| e.to_string())?;
    let top = 0.99 * a.coverage().min(b.coverage()) / 6.0;
    let grid = log_grid(top / 100.0, top, 21);
    let s = difference_sweep(&a, &b, &CutoffSpec::PureErfc, &grid).map_err(|e| e.to_string())?;
    let sup = s.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let at_mid = s.values[10].abs();
    let bounded = sup < 2.0 * at_mid;
    check(
        cs_ok && slots_ok && worst <= 1e-12 && bounded,
        format!(
            "Cauchy-Schwarz on 500 potentials: {cs_ok}; worst slot residual {worst:.1e}; sin^2 sweep sup {sup:.3e} vs midpoint {at_mid:.3e}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let (a, b) = piston_pair(1.0, 10.0, 20_000.0);
    let mut values = Vec::new();
    for method in [ResumMethod::ErfcExtrapolate, ResumMethod::Abel, ResumMethod::RieszMean(2)] {
        values.push(resum_difference(&a, &b, method).map_err(|e| format!("{method:?}: {e}"))?.value);
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / lo.abs().max(hi.abs());
    check(
        spread < 0.01,
        format!(
            "erfc {:.9}, Abel {:.9}, Riesz(2) {:.9}, spread {spread:.1e}",
            values[0], values[1], values[2]
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("piston benchmark", criterion_1),
        ("identity suite", criterion_2),
        ("Seeley-DeWitt recovery", criterion_3),
        ("cutoff-independent log coefficient", criterion_4),
        ("certifier soundness", criterion_5),
        ("Post inversion", criterion_6),
        ("reference models", criterion_7),
        ("resummation consistency", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
