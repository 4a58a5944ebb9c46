use std::f64::consts::PI;

use zeropoint::asymptotics::{log_grid, Term};
use zeropoint::certifier::{certify_finiteness, combination_check, delta_slots, BodyGeometry, Configuration, SlotMap};
use zeropoint::cutoffs::CutoffSpec;
use zeropoint::heat_kernel::{default_t_grid, divergence_fit, sdw_fit};
use zeropoint::reference_models::{solve_masses, AveragedPotential};
use zeropoint::regularization::{difference_sweep, sweep};
use zeropoint::spectra::{interval_union, massive_spectrum, BoundaryCondition};

#[test]
fn massive_periodic_interval_has_a1_equal_to_minus_mass_volume() {
    for (l, m2) in [(1.0, 1.0), (2.0, 0.5)] {
        let s = massive_spectrum(&interval_union(&[l], BoundaryCondition::Periodic, 4000.0).unwrap(), m2).unwrap();
        let fit = sdw_fit(&s, 1, 2, &default_t_grid(&s).unwrap()).unwrap();
        let expect = -l * m2;
        assert!((fit.coefficients[2] - expect).abs() < 0.01 * expect.abs(), "{:?}", fit.coefficients);
        assert!((fit.coefficients[0] - l).abs() < 1e-5 * l);
    }
}

#[test]
fn leading_divergence_tracks_volume() {
    // Ω² coefficient over a_0 is the same for every interval length.
    let ratios: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&l| {
            let s = interval_union(&[l], BoundaryCondition::Dirichlet, 12_100.0).unwrap();
            let a0 = sdw_fit(&s, 1, 2, &default_t_grid(&s).unwrap()).unwrap().coefficients[0];
            let sw = sweep(&s, &CutoffSpec::PureErfc, &log_grid(20.0, 2000.0, 24)).unwrap();
            divergence_fit(&sw, 1).unwrap().power_coefficients[0] / a0
        })
        .collect();
    for r in &ratios {
        assert!((r / ratios[0] - 1.0).abs() < 0.05, "{ratios:?}");
    }
    // erfc: Σ ω erfc(ω/Ω) over a density L/π gives L Ω²/(4π), so the ratio is 1/(4π).
    assert!((ratios[0] - 1.0 / (4.0 * PI)).abs() < 1e-4);
}

#[test]
fn mass_mismatch_shows_up_as_a_log() {
    let base = interval_union(&[1.0], BoundaryCondition::Periodic, 12_100.0).unwrap();
    let a = massive_spectrum(&base, 2.0).unwrap();
    let b = massive_spectrum(&base, 1.0).unwrap();
    let sw = difference_sweep(&a, &b, &CutoffSpec::PureErfc, &log_grid(20.0, 2000.0, 24)).unwrap();
    let fit = divergence_fit(&sw, 1).unwrap();
    assert_eq!(fit.dominant(2000.0), Term::Log);
    // Δ∫V = 1 feeds −Δa_1/(4π) into the ln Ω² coefficient.
    assert!((fit.log_coefficient - 1.0 / (4.0 * PI)).abs() < 1e-3 / (4.0 * PI));
}

#[test]
fn plates_in_a_fixed_box_certify() {
    let ir = BodyGeometry::cuboid([10.0, 10.0, 10.0]).unwrap();
    let plates = |s: f64| {
        vec![
            BodyGeometry::plate(100.0, 0.1).unwrap().at([0.0, 0.0, -s / 2.0]),
            BodyGeometry::plate(100.0, 0.1).unwrap().at([0.0, 0.0, s / 2.0]),
        ]
    };
    let a = Configuration::new(3, ir.clone(), plates(1.0), false).unwrap();
    let b = Configuration::new(3, ir, plates(2.5), false).unwrap();
    let cert = certify_finiteness(&a, &b).unwrap();
    assert!(cert.certified, "{cert}");
    assert_eq!(cert.required_slots, vec![0, 1, 2, 3, 4]);
}

#[test]
fn unpaired_spheres_fail_on_area() {
    let ir = BodyGeometry::cuboid([10.0, 10.0, 10.0]).unwrap();
    let shell = |r: f64| Configuration::new(3, ir.clone(), vec![BodyGeometry::thin_sphere(r).unwrap()], false).unwrap();
    let d = delta_slots(&shell(2.0), &shell(1.0)).unwrap();
    let area = d.delta_slots[&1].entries[0].1;
    assert!((area - 4.0 * PI * 3.0).abs() < 1e-10);
    let cert = certify_finiteness(&shell(2.0), &shell(1.0)).unwrap();
    assert_eq!(cert.failing_slots(), vec![1]);
    assert!(cert.narrative.iter().any(|l| l.contains("a_1/2")));
}

#[test]
fn thin_spheres_share_quadratic_entries_at_every_radius() {
    let ir = BodyGeometry::cuboid([10.0, 10.0, 10.0]).unwrap();
    let entries: Vec<(f64, f64)> = [1.0, 2.0, 5.0]
        .iter()
        .map(|&r| {
            let c = Configuration::new(3, ir.clone(), vec![BodyGeometry::thin_sphere(r).unwrap()], false).unwrap();
            let empty = Configuration::new(3, ir.clone(), vec![], false).unwrap();
            let d = delta_slots(&c, &empty).unwrap();
            (d.delta_slots[&3].entries[0].1, d.delta_slots[&3].entries[1].1)
        })
        .collect();
    for e in &entries {
        assert_eq!(*e, (16.0 * PI, 8.0 * PI));
    }
}

#[test]
fn perturbed_reference_mass_is_reported() {
    let avg = AveragedPotential::new(1.0, 1.5, 2.0, 3).unwrap();
    let mut m = solve_masses(&avg);
    m.m1_squared *= 1.01;
    let refs = m.slot_maps(3, avg.volume).unwrap();
    let cert = combination_check(&avg.slot_map().unwrap(), &refs, &[0.5, 0.5]).unwrap();
    assert!(!cert.certified);
    assert_eq!(cert.failing_slots(), vec![2, 4]);
    assert!(cert.warnings.iter().any(|w| w.contains("physical")));
}

#[test]
fn identical_reference_is_certified_without_warning() {
    let m = SlotMap::bulk(3, 2.0, 1.0, 3.0).unwrap();
    let cert = combination_check(&m, std::slice::from_ref(&m), &[1.0]).unwrap();
    assert!(cert.certified);
    assert!(cert.warnings.is_empty());
}
