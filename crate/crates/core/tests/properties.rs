use std::f64::consts::PI;
use std::sync::Arc;

use abflux::experiments::{dirac_quantization_check, extract_fringe_phase, trap_flux};
use abflux::gauge_fields::{FieldSpec, GaugeFunction, Monomial, PhysConstants};
use abflux::path_integrals::{
    ab_phase, enclosed_flux_stokes, line_integral, potential_sampler, spec_line_integral, winding_number, Path,
};
use abflux::quadrature::QuadratureSpec;
use abflux::scalar::wrap_angle;
use abflux::schrodinger::{
    born_density, build_link_phases, gauge_transform_wavefunction, init_gaussian_packet, Grid, Propagator,
    PropagatorConfig,
};
use abflux::Vec3;
use proptest::prelude::*;

fn star(center: (f64, f64), radii: &[f64], phase: f64) -> Path<f64> {
    let n = radii.len();
    Path::closed(
        radii
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let t = phase + 2.0 * PI * j as f64 / n as f64;
                Vec3::planar(center.0 + r * t.cos(), center.1 + r * t.sin())
            })
            .collect(),
    )
    .unwrap()
}

fn distance_to_origin(path: &Path<f64>) -> f64 {
    path.segments()
        .map(|(a, b)| {
            let d = b - a;
            let t = (-a.dot(d) / d.norm_sq()).clamp(0.0, 1.0);
            (a + d * t).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

fn spec_strategy() -> impl Strategy<Value = FieldSpec<f64>> {
    prop_oneof![
        (-7.0..7.0f64).prop_map(|f| FieldSpec::flux_line(0.0, 0.0, f)),
        (0.3..1.5f64, -7.0..7.0f64).prop_map(|(r, f)| FieldSpec::FiniteSolenoid {
            center: [0.0, 0.0],
            radius: r,
            flux: f
        }),
        (-2.0..2.0f64).prop_map(|b| FieldSpec::UniformB { b0: Vec3::new(0.0, 0.0, b) }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stokes_matches_surface_flux(
        spec in spec_strategy(),
        cx in -3.0..3.0f64,
        cy in -3.0..3.0f64,
        radii in prop::collection::vec(0.5..4.0f64, 3..14),
        phase in 0.0..(2.0 * PI),
    ) {
        let contour = star((cx, cy), &radii, phase);
        prop_assume!(distance_to_origin(&contour) > 0.05);
        let circulation = spec_line_integral(&spec, &contour, 0.0, &QuadratureSpec::default()).unwrap();
        let flux = enclosed_flux_stokes(&spec, &contour, 8).unwrap();
        prop_assert!((circulation - flux).abs() < 1e-8, "circulation {} flux {}", circulation, flux);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn open_paths_depend_only_on_the_side_of_the_filament(
        flux in -6.0..6.0f64,
        ends in (2.0..6.0f64, -0.5..0.5f64, 2.0..6.0f64, -0.5..0.5f64),
        top1 in (-1.0..1.0f64, 1.0..5.0f64),
        top2 in (-1.0..1.0f64, 1.0..5.0f64),
        bottom in (-1.0..1.0f64, -5.0..-1.0f64),
    ) {
        let k = PhysConstants::<f64>::default();
        let spec = FieldSpec::flux_line(0.0, 0.0, flux);
        let p = Vec3::planar(-ends.0, ends.1);
        let q = Vec3::planar(ends.2, ends.3);
        let via = |v: (f64, f64)| Path::open(vec![p, Vec3::planar(v.0, v.1), q]).unwrap();
        let quad = QuadratureSpec::default();
        let phase = |path: &Path<f64>| ab_phase(&k, potential_sampler(&spec, 0.0), path, &quad).unwrap();
        let (a1, a2, b) = (phase(&via(top1)), phase(&via(top2)), phase(&via(bottom)));
        prop_assert!((a1 - a2).abs() < 1e-8);
        // over the top then back underneath runs clockwise around the filament
        let loop_path = via(top1).concat(&via(bottom).reversed()).unwrap().close().unwrap();
        prop_assert_eq!(winding_number(&loop_path, Vec3::zero()).unwrap(), -1);
        prop_assert!((a1 - b + k.coupling() * flux).abs() < 1e-8, "{} {} {}", a1, b, flux);
    }

    #[test]
    fn reversal_negates_line_integrals(
        pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 2..8),
        b in -2.0..2.0f64,
    ) {
        let path = Path::open(pts.iter().map(|(x, y)| Vec3::planar(*x + 20.0, *y)).collect());
        prop_assume!(path.is_ok());
        let path = path.unwrap();
        let spec = FieldSpec::FiniteSolenoid { center: [17.0, 1.0], radius: 2.0, flux: b };
        let quad = QuadratureSpec::default();
        let fwd = line_integral(potential_sampler(&spec, 0.0), &path, &quad).unwrap();
        let back = line_integral(potential_sampler(&spec, 0.0), &path.reversed(), &quad).unwrap();
        prop_assert_eq!(fwd, -back);
        let fwd = spec_line_integral(&spec, &path, 0.0, &quad).unwrap();
        let back = spec_line_integral(&spec, &path.reversed(), 0.0, &quad).unwrap();
        prop_assert_eq!(fwd, -back);
    }

    #[test]
    fn wrapped_angles_stay_in_range(a in -1e3..1e3f64) {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI);
        let turns = (a - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn trapped_flux_is_the_nearest_quantum(x in -20.0..20.0f64) {
        let k = PhysConstants::<f64>::default();
        let phi0 = PI;
        let (n, trapped) = trap_flux(x * phi0, &k, -2.0);
        let best = (-25i64..=25).map(|m| ((m as f64 - x).abs(), m)).fold((f64::INFINITY, 0), |acc, c| if c.0 < acc.0 { c } else { acc });
        prop_assert_eq!(n, best.1);
        prop_assert!((trapped - n as f64 * phi0).abs() < 1e-12);
    }

    #[test]
    fn dirac_check_agrees_with_integer_arithmetic(a in -40i64..40, b in -40i64..40, c in 1i64..9) {
        // q = a/c, g = b/2 ⇒ 2qg = ab/c
        let k = PhysConstants::<f64>::default();
        let check = dirac_quantization_check(&k, a as f64 / c as f64, b as f64 / 2.0);
        prop_assert_eq!(check.satisfied, (a * b) % c == 0);
        prop_assert!((check.residual - ((a * b) as f64 / c as f64 - check.n as f64).abs()).abs() < 1e-12);
    }

    #[test]
    fn synthetic_fringe_shift_is_recovered(delta in -3.0..3.0f64, period in 12.0..30.0f64, slope in -0.002..0.002f64) {
        let y: Vec<f64> = (0..256).map(|j| j as f64 - 127.5).collect();
        let kappa = 2.0 * PI / period;
        let profile = |d: f64| -> Vec<f64> {
            y.iter().map(|v| (1.0 + slope * v) * (1.0 + (kappa * v + d).cos())).collect()
        };
        let got = extract_fringe_phase(&profile(0.0), &profile(delta), &y).unwrap();
        prop_assert!(wrap_angle(got.delta - delta).abs() < 0.05, "{} vs {}", got.delta, delta);
        prop_assert!((got.period - period).abs() < 0.05 * period);
    }
}

fn random_chi(c: &[f64]) -> GaugeFunction<f64> {
    GaugeFunction::polynomial(vec![
        Monomial::new(c[0], 1, 0, 0, 0),
        Monomial::new(c[1], 0, 1, 0, 0),
        Monomial::new(c[2] * 0.1, 1, 1, 0, 0),
        Monomial::new(c[3] * 0.1, 2, 0, 0, 0),
        Monomial::new(c[4] * 0.01, 0, 3, 0, 0),
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn lattice_evolution_is_gauge_covariant(c in prop::collection::vec(-1.0..1.0f64, 5)) {
        let k = PhysConstants::<f64>::default();
        let grid = Arc::new(Grid::unit(56, 44).unwrap());
        let spec = FieldSpec::FiniteSolenoid { center: [34.3, 21.6], radius: 3.0, flux: 2.2 };
        let chi = random_chi(&c);
        let shifted = FieldSpec::GaugeShifted { base: Box::new(spec.clone()), chi: chi.clone() };
        let config = PropagatorConfig::<f64>::default();
        let psi0 = init_gaussian_packet(grid.clone(), [18.0, 22.0], 3.0, [0.6, 0.2]).unwrap();
        let mut a = psi0.clone();
        let mut b = gauge_transform_wavefunction(&psi0, &chi, &k);
        Propagator::new(grid.clone(), &build_link_phases(&grid, &spec, &k).unwrap(), &config).unwrap().advance(&mut a, 150).unwrap();
        Propagator::new(grid.clone(), &build_link_phases(&grid, &shifted, &k).unwrap(), &config).unwrap().advance(&mut b, 150).unwrap();
        let (da, db) = (born_density(&a), born_density(&b));
        let worst = da.iter().zip(&db).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-12, "density difference {}", worst);
        // and the amplitudes differ by exactly the gauge factor
        let back = gauge_transform_wavefunction(&a, &chi, &k);
        prop_assert!(back.max_abs_diff(&b) < 1e-11);
    }
}
