use std::f64::consts::PI;

use abflux::experiments::*;
use abflux::gauge_fields::{FieldSpec, GaugeFunction, Monomial, PhysConstants};
use abflux::path_integrals::Path;
use abflux::scalar::wrap_angle;
use abflux::schrodinger::{Absorber, PropagatorConfig};
use abflux::{Error, Vec3};

fn small_geometry() -> DoubleSlitGeometry<f64> {
    DoubleSlitGeometry {
        barrier_column: 110,
        barrier_thickness: 4,
        slit_centers: [84, 108],
        slit_width: 5,
        flux_position: [111.5, 96.5],
        detector_column: 228,
        source: PacketParams { center: [64.0, 96.0], sigma: 8.0, k0: [1.0, 0.0] },
    }
}

fn small_config() -> DoubleSlitConfig<f64> {
    let prop =
        PropagatorConfig { absorber: Absorber::Layer { width: 24, strength: 0.5 }, ..PropagatorConfig::default() };
    DoubleSlitConfig::new(256, 192, 1.0, prop)
}

#[test]
fn fringe_shift_over_one_period() {
    let k = PhysConstants::<f64>::default();
    let phi0 = k.flux_quantum();
    let fluxes: Vec<f64> = (0..=6).map(|n| n as f64 * phi0 / 6.0).collect();
    let geom = small_geometry();
    let spec = FieldSpec::flux_line(111.5, 96.5, 0.0);
    let recs = run_double_slit(&geom, &spec, &small_config(), &fluxes).unwrap();
    assert_eq!(recs.len(), 7);

    let model = TwoSlitModel { slit_y: [84.0, 108.0], screen_distance: 114.0, wavenumber: 1.0 };
    let y = &recs[0].y;
    let analytic_ref = analytic_two_path_pattern(&model, 0.0, &k, y).unwrap();
    for r in &recs {
        assert!(r.saturated);
        assert!(r.intensity.iter().all(|v| *v >= 0.0));
        assert!(r.delta > -PI && r.delta <= PI);
        assert!(r.residual < 0.1, "flux {} delta {} residual {}", r.flux, r.delta, r.residual);
        let analytic = analytic_two_path_pattern(&model, r.flux, &k, y).unwrap();
        let predicted = extract_fringe_phase(&analytic_ref, &analytic, y).unwrap().delta;
        assert!(wrap_angle(r.delta - predicted).abs() < 0.1, "flux {}: pde {} analytic {}", r.flux, r.delta, predicted);
    }
    assert_eq!(recs[0].delta, 0.0);
    assert!(relative_l2(&recs[6].intensity, &recs[0].intensity) < 0.01);
    // half a period swaps maxima and minima
    let mid = y.iter().position(|v| (*v - 96.0).abs() < 0.5).unwrap();
    assert!(recs[3].intensity[mid] < 0.1 * recs[0].intensity[mid]);
}

#[test]
fn fringe_phase_does_not_depend_on_the_gauge() {
    let k = PhysConstants::<f64>::default();
    let flux = k.flux_quantum() / 3.0;
    let base = FieldSpec::flux_line(111.5, 96.5, 0.0);
    let chi = GaugeFunction::polynomial(vec![
        Monomial::new(2e-3, 1, 1, 0, 0),
        Monomial::new(-1e-2, 1, 0, 0, 0),
        Monomial::new(5e-5, 0, 3, 0, 0),
    ]);
    let shifted = FieldSpec::GaugeShifted { base: Box::new(base.clone()), chi };
    let cfg = small_config();
    let a = run_double_slit(&small_geometry(), &base, &cfg, &[flux]).unwrap();
    let b = run_double_slit(&small_geometry(), &shifted, &cfg, &[flux]).unwrap();
    assert!((a[0].delta - b[0].delta).abs() < 1e-10, "{} vs {}", a[0].delta, b[0].delta);
    assert!(relative_l2(&a[0].intensity, &b[0].intensity) < 1e-10);
}

#[test]
fn double_slit_rejects_bad_geometry() {
    let k = PhysConstants::<f64>::default();
    let spec = FieldSpec::flux_line(111.5, 96.5, 0.0);
    let mut overlap = small_geometry();
    overlap.slit_centers = [96, 99];
    let err = run_double_slit(&overlap, &spec, &small_config(), &[k.flux_quantum()]).unwrap_err();
    assert!(err.to_string().contains("slits overlap"), "{err}");
    let mut exposed = small_geometry();
    exposed.flux_position = [111.5, 84.0];
    assert!(run_double_slit(&exposed, &spec, &small_config(), &[0.0]).is_err());
}

#[test]
fn blocked_barrier_reports_no_transmission() {
    let mut geom = small_geometry();
    geom.slit_width = 1;
    let mut cfg = small_config();
    cfg.max_steps = 400;
    cfg.min_transmitted = 0.5;
    let err = run_double_slit(&geom, &FieldSpec::flux_line(111.5, 96.5, 0.0), &cfg, &[0.0]).unwrap_err();
    assert!(matches!(err, Error::NoTransmission { .. }), "{err}");
}

#[test]
fn classical_path_outside_the_filament_is_straight() {
    let k = PhysConstants::<f64>::default();
    let spec = FieldSpec::flux_line(111.5, 96.5, k.flux_quantum() / 2.0);
    for y0 in [84.0f64, 108.0, 60.0] {
        let tr = classical_trajectory(&spec, &k, Vec3::planar(20.0, y0), Vec3::planar(1.0, 0.0), 200.0, 0.05).unwrap();
        assert!(tr.max_deflection() < 1e-10);
        let end = tr.r.last().unwrap();
        assert!((end.x - 220.0).abs() < 1e-9 && (end.y - y0).abs() < 1e-12);
    }
}

#[test]
fn ring_fluxoid_counts_trapped_quanta() {
    let k = PhysConstants::<f64>::default();
    let phi0 = k.with_charge(-2.0).flux_quantum();
    assert!((phi0 - PI).abs() < 1e-15);
    for n_applied in [-2.6, -1.0, 0.0, 0.4, 1.4, 2.4, 3.0] {
        let (ring, spec) = ground_state_ring([3.0, -1.0], 7.5, 96, n_applied * phi0, &k);
        let f = ring_fluxoid(&ring, &spec, &k).unwrap();
        // brute-force minimizer of (n − Φ/Φ₀)²
        let best = (-10i64..=10).min_by(|a, b| {
            let ea = (*a as f64 - n_applied).powi(2);
            let eb = (*b as f64 - n_applied).powi(2);
            ea.partial_cmp(&eb).unwrap()
        });
        assert_eq!(Some(f.n), best, "applied {n_applied}");
        assert!(f.residual < 0.01);
    }
}

#[test]
fn fluxoid_combines_winding_and_trapped_flux() {
    // Ψ₀ winds w times around a ring threading m pair quanta: γ = 2πw − 2mπ
    let k = PhysConstants::<f64>::default();
    let phi0 = k.with_charge(-2.0).flux_quantum();
    for (m, w) in [(0i64, 0i64), (1, 0), (3, 1), (-2, 2), (5, -3)] {
        let nodes = 128;
        let mut ring = RingModel::uniform([0.5, 0.5], 4.0, nodes, m as f64 * phi0);
        ring.phases = (0..nodes).map(|j| wrap_angle(2.0 * PI * (w * j as i64) as f64 / nodes as f64)).collect();
        let f = ring_fluxoid(&ring, &FieldSpec::flux_line(0.5, 0.5, m as f64 * phi0), &k).unwrap();
        assert_eq!(f.n, m - w);
        assert!(f.residual < 1e-9, "residual {}", f.residual);
    }
}

#[test]
fn inconsistent_ring_is_rejected() {
    let k = PhysConstants::<f64>::default();
    let ring = RingModel::uniform([0.0, 0.0], 5.0, 64, 0.0);
    let err = ring_fluxoid(&ring, &FieldSpec::flux_line(0.0, 0.0, 0.5), &k).unwrap_err();
    assert!(matches!(err, Error::InconsistentState { .. }));
}

fn ellipse(c: Vec3<f64>, a: f64, b: f64, n: usize) -> Path<f64> {
    Path::closed(
        (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                c + Vec3::new(a * t.cos(), b * t.sin(), 0.0)
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn monopole_phase_depends_only_on_piercing() {
    let k = PhysConstants::<f64>::default().with_charge(1.0);
    let scale = 4.0 * PI;
    // small loops 10³ below the monopole, around the south string
    let shapes = [
        ellipse(Vec3::new(0.0, 0.0, -1e3), 1.0, 1.0, 256),
        ellipse(Vec3::new(0.3, -0.2, -1e3), 0.7, 0.4, 256),
        Path::rectangle(-0.5, -0.3, 0.25, 0.9, -1e3).unwrap(),
    ];
    for c in &shapes {
        let pierced = monopole_interference_phase(&k, 1.0, c, true).unwrap();
        assert!((pierced - scale).abs() < 1e-6 * scale, "pierced {pierced}");
        let clear = monopole_interference_phase(&k, 1.0, c, false).unwrap();
        assert!(clear.abs() < 1e-6 * scale, "clear {clear}");
        let south = monopole_loop_phase(&k, 1.0, c, StringGauge::South).unwrap();
        let north = monopole_loop_phase(&k, 1.0, c, StringGauge::North).unwrap();
        assert!(((south - north) - scale).abs() < 1e-6 * scale);
    }
    // a loop that misses the axis sees nothing in either gauge
    let off = ellipse(Vec3::new(5.0, 0.0, -1e3), 1.0, 1.0, 256);
    assert!(matches!(monopole_interference_phase(&k, 1.0, &off, true), Err(Error::NoMatchingGauge)));
    assert!(monopole_interference_phase(&k, 1.0, &off, false).unwrap().abs() < 1e-6 * scale);
}

#[test]
fn dirac_condition_on_a_rational_grid() {
    // q = a/4, g = b/6, so 2qg/ħc = ab/12: integer exactly when 12 divides ab
    let k = PhysConstants::<f64>::default();
    for a in 1..=20i64 {
        for b in 1..=20i64 {
            let q = a as f64 / 4.0;
            let g = b as f64 / 6.0;
            let check = dirac_quantization_check(&k, q, g);
            let integer = (a * b) % 12 == 0;
            assert_eq!(check.satisfied, integer, "q={q} g={g} residual {}", check.residual);
            assert_eq!(check.n, ((a * b) as f64 / 12.0).round() as i64);
            if integer {
                assert!(check.residual < 1e-12);
            }
        }
    }
}
