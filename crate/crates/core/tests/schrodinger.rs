use std::f64::consts::PI;
use std::sync::Arc;

use abflux::gauge_fields::{FieldSpec, PhysConstants};
use abflux::schrodinger::*;
use abflux::Vec3;
use num_complex::Complex;

fn moments(f: &WaveField<f64>) -> (f64, f64, f64, f64) {
    let g = f.grid();
    let d = born_density(f);
    let total: f64 = d.iter().sum();
    let (mut mx, mut my) = (0.0, 0.0);
    for (k, w) in d.iter().enumerate() {
        let (i, j) = g.coords(k);
        mx += w * g.x(i);
        my += w * g.y(j);
    }
    mx /= total;
    my /= total;
    let (mut vx, mut vy) = (0.0, 0.0);
    for (k, w) in d.iter().enumerate() {
        let (i, j) = g.coords(k);
        vx += w * (g.x(i) - mx).powi(2);
        vy += w * (g.y(j) - my).powi(2);
    }
    (mx, my, (vx / total).sqrt(), (vy / total).sqrt())
}

#[test]
fn free_packet_follows_the_analytic_gaussian() {
    let grid = Arc::new(Grid::unit(320, 320).unwrap());
    let (sigma, k0, dt, steps) = (8.0, 0.1, 1.0, 500);
    let f0 = init_gaussian_packet(grid.clone(), [110.0, 160.0], sigma, [k0, 0.0]).unwrap();
    let links = LinkPhases::zero(&grid);
    let cfg = PropagatorConfig { dt, ..PropagatorConfig::default() };
    let f = step(&f0, &links, &cfg, steps).unwrap();
    let t = dt * steps as f64;
    let (x, y, sx, sy) = moments(&f);
    let v = (x - 110.0) / t;
    assert!((v - k0).abs() < 0.01 * k0, "velocity {v}");
    assert!((y - 160.0).abs() < 1e-6);
    // |ψ|² has standard deviation σ(t) = σ sqrt(1 + (ħt/2mσ²)²)
    let want = sigma * (1.0 + (t / (2.0 * sigma * sigma)).powi(2)).sqrt();
    assert!((sx - want).abs() < 0.02 * want, "sigma_x {sx} vs {want}");
    assert!((sy - want).abs() < 0.02 * want, "sigma_y {sy} vs {want}");
}

fn walled_grid() -> Grid<f64> {
    let mut g = Grid::unit(64, 48).unwrap();
    g.wall_rect(40, 43, 0, 20);
    g.wall_rect(40, 43, 28, 48);
    g.wall_rect(39, 44, 22, 26);
    g
}

#[test]
fn norm_is_conserved_with_flux_and_walls() {
    let g = Arc::new(walled_grid());
    let k = PhysConstants::default();
    let spec = FieldSpec::flux_line(41.5, 23.5, 1.7);
    let links = build_link_phases(&g, &spec, &k).unwrap();
    let f0 = init_gaussian_packet(g.clone(), [20.0, 24.0], 3.0, [0.8, 0.1]).unwrap();
    let cfg = PropagatorConfig::default();
    let f = step(&f0, &links, &cfg, 1000).unwrap();
    assert!((f.norm_sq() - 1.0).abs() < 1e-10, "drift {}", f.norm_sq() - 1.0);
    assert!((f.time() - 100.0).abs() < 1e-9);
    let walls_zero = f.amplitudes().iter().enumerate().all(|(n, z)| !g.is_wall(n) || z.norm() == 0.0);
    assert!(walls_zero);
}

#[test]
fn absorber_removes_norm() {
    let g = Arc::new(Grid::unit(64, 64).unwrap());
    let f0 = init_gaussian_packet(g.clone(), [32.0, 32.0], 3.0, [1.2, 0.0]).unwrap();
    let cfg =
        PropagatorConfig { absorber: Absorber::Layer { width: 12, strength: 0.5 }, ..PropagatorConfig::default() };
    let f = step(&f0, &LinkPhases::zero(&g), &cfg, 600).unwrap();
    assert!(f.norm_sq() < 0.05, "remaining {}", f.norm_sq());
}

#[test]
fn constant_potential_is_a_global_phase() {
    let g = Arc::new(walled_grid());
    let k = PhysConstants::default();
    let links = build_link_phases(&g, &FieldSpec::flux_line(41.5, 23.5, 0.9), &k).unwrap();
    let f0 = init_gaussian_packet(g.clone(), [20.0, 24.0], 3.0, [0.5, 0.0]).unwrap();
    let bump = Potential::sample(|r: Vec3<f64>| 0.02 * ((r.x - 30.0) / 5.0).tanh());
    let (v0, n) = (0.37, 300);
    let base = PropagatorConfig { potential: bump.clone(), ..PropagatorConfig::default() };
    let shifted = PropagatorConfig { potential: bump.shifted(v0), ..PropagatorConfig::default() };
    let a = step(&f0, &links, &base, n).unwrap();
    let b = step(&f0, &links, &shifted, n).unwrap();
    let phase = Complex::from_polar(1.0, -v0 * a.time() / k.hbar);
    let worst = a.amplitudes().iter().zip(b.amplitudes()).fold(0.0f64, |m, (x, y)| m.max((x * phase - y).norm()));
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn packet_momentum_from_a_discrete_fourier_transform() {
    let g = Arc::new(Grid::unit(96, 96).unwrap());
    let k0 = [0.6, -0.25];
    let f = init_gaussian_packet(g.clone(), [48.0, 48.0], 8.0, k0).unwrap();
    let n = 96;
    // ⟨p_x⟩ from row transforms, ⟨p_y⟩ from column transforms
    let mut acc = [0.0; 2];
    let mut total = 0.0;
    for (axis, sum) in acc.iter_mut().enumerate() {
        for line in 0..n {
            for m in 0..n {
                let kk = 2.0 * PI * (if m < n / 2 { m as f64 } else { m as f64 - n as f64 }) / n as f64;
                let mut s = Complex::new(0.0, 0.0);
                for p in 0..n {
                    let z = if axis == 0 { f.at(p, line) } else { f.at(line, p) };
                    s += z * Complex::from_polar(1.0, -kk * p as f64);
                }
                *sum += kk * s.norm_sqr();
                if axis == 0 {
                    total += s.norm_sqr();
                }
            }
        }
    }
    for axis in 0..2 {
        let p = acc[axis] / total;
        assert!((p - k0[axis]).abs() < 0.01 * k0[axis].abs(), "axis {axis}: {p}");
    }
}

fn three_snapshots(
    f0: &WaveField<f64>,
    links: &LinkPhases<f64>,
    cfg: &PropagatorConfig<f64>,
    warmup: usize,
) -> [WaveField<f64>; 3] {
    let mut p = Propagator::new(f0.grid_arc().clone(), links, cfg).unwrap();
    let mut f = f0.clone();
    p.advance(&mut f, warmup).unwrap();
    let a = f.clone();
    p.advance(&mut f, 1).unwrap();
    let b = f.clone();
    p.advance(&mut f, 1).unwrap();
    [a, b, f]
}

#[test]
fn residual_of_cn_snapshots_is_second_order() {
    let g = Arc::new(Grid::unit(96, 96).unwrap());
    let f0 = init_gaussian_packet(g.clone(), [40.0, 48.0], 6.0, [0.3, 0.1]).unwrap();
    let links = LinkPhases::zero(&g);
    let mut res = Vec::new();
    for (dt, warm) in [(0.2, 50), (0.1, 100), (0.05, 200)] {
        let cfg = PropagatorConfig::with_dt(dt);
        let [a, b, c] = three_snapshots(&f0, &links, &cfg, warm);
        res.push(schrodinger_residual([&a, &b, &c], &links, &cfg, None).unwrap());
    }
    assert!(res[1] < 1e-4, "{res:?}");
    for w in res.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "order {order} from {res:?}");
    }
}

#[test]
fn box_eigenmode_is_stationary() {
    let (nx, ny) = (40, 30);
    let g = Arc::new(Grid::unit(nx, ny).unwrap());
    // hard walls just outside the grid: sin(πi'/(nx+1)) sin(πj'/(ny+1)) with i' = i + 1
    let psi = (0..g.len())
        .map(|k| {
            let (i, j) = g.coords(k);
            let v = (PI * (i + 1) as f64 / (nx + 1) as f64).sin() * (PI * (j + 1) as f64 / (ny + 1) as f64).sin();
            Complex::new(v, 0.0)
        })
        .collect();
    let f0 = WaveField::new(g.clone(), psi, 0.0).unwrap();
    let links = LinkPhases::zero(&g);
    let cfg = PropagatorConfig::default();
    let [a, b, c] = three_snapshots(&f0, &links, &cfg, 20);
    let r = schrodinger_residual([&a, &b, &c], &links, &cfg, None).unwrap();
    assert!(r < 1e-6, "{r}");
    assert!((born_density(&c)[500] - born_density(&f0)[500]).abs() < 1e-12);
}

#[test]
fn residual_rejects_mismatched_inputs() {
    let g = Arc::new(Grid::unit(32, 32).unwrap());
    let f0 = init_gaussian_packet(g.clone(), [16.0, 16.0], 2.5, [0.2, 0.0]).unwrap();
    let links = LinkPhases::zero(&g);
    let cfg = PropagatorConfig::default();
    let [a, b, _] = three_snapshots(&f0, &links, &cfg, 0);
    assert!(matches!(schrodinger_residual([&a, &b, &b], &links, &cfg, None), Err(abflux::Error::GridMismatch(_))));
    let other = LinkPhases::zero(&Grid::unit(33, 32).unwrap());
    assert!(schrodinger_residual([&a, &b, &f0], &other, &cfg, None).is_err());
}

/// Grid with a masked flux core and a region that stays on one side of it.
fn ab_setup() -> (Arc<Grid<f64>>, FieldSpec<f64>, Vec<bool>) {
    let mut g = Grid::unit(72, 64).unwrap();
    g.wall_rect(34, 39, 30, 35);
    let spec = FieldSpec::flux_line(36.5, 32.5, 2.1);
    // region: everything except a vertical cut from the core down to the bottom edge
    let region = (0..g.len())
        .map(|k| {
            let (i, j) = g.coords(k);
            !(j <= 34 && (34..39).contains(&i))
        })
        .collect();
    (Arc::new(g), spec, region)
}

#[test]
fn ab_solution_is_tree_independent() {
    let (g, spec, region) = ab_setup();
    let k = PhysConstants::default();
    let f0 = init_gaussian_packet(g.clone(), [20.0, 40.0], 3.0, [0.3, 0.0]).unwrap();
    let anchor = Vec3::planar(5.0, 60.0);
    let bfs = construct_ab_solution(&f0, &spec, anchor, &region, &k, &AbSolutionOptions::default()).unwrap();
    let dfs_opts = AbSolutionOptions { tree: SpanningTree::DepthFirst, ..AbSolutionOptions::default() };
    let dfs = construct_ab_solution(&f0, &spec, anchor, &region, &k, &dfs_opts).unwrap();
    let worst = bfs.phase.iter().zip(&dfs.phase).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(worst < 1e-10, "{worst}");
    // across the cut the phase jumps by the enclosed flux
    let left = bfs.phase[g.index(33, 10)];
    let right = bfs.phase[g.index(39, 10)];
    let around = {
        let mut walk = 0.0;
        let segs = [(33, 10, 33, 36), (33, 36, 39, 36), (39, 36, 39, 10)];
        for (a, b, c, d) in segs {
            let p = abflux::path_integrals::Path::open(vec![
                Vec3::planar(a as f64, b as f64),
                Vec3::planar(c as f64, d as f64),
            ])
            .unwrap();
            walk += k.coupling()
                * abflux::path_integrals::line_integral(
                    abflux::path_integrals::potential_sampler(&spec, 0.0),
                    &p,
                    &Default::default(),
                )
                .unwrap();
        }
        walk
    };
    assert!(((right - left) - around).abs() < 1e-9);
}

#[test]
fn ab_solution_edge_cases() {
    let (g, _, region) = ab_setup();
    let k = PhysConstants::default();
    let f0 = init_gaussian_packet(g.clone(), [20.0, 40.0], 3.0, [0.3, 0.0]).unwrap();
    let zero = FieldSpec::flux_line(36.5, 32.5, 0.0);
    let same =
        construct_ab_solution(&f0, &zero, Vec3::planar(5.0, 5.0), &region, &k, &AbSolutionOptions::default()).unwrap();
    assert_eq!(same.field.amplitudes(), f0.amplitudes());
    assert!(matches!(
        construct_ab_solution(&f0, &zero, Vec3::planar(36.0, 32.0), &region, &k, &AbSolutionOptions::default()),
        Err(abflux::Error::AnchorOutsideRegion)
    ));
    // the full exterior encircles the flux
    let spec = FieldSpec::flux_line(36.5, 32.5, 2.1);
    let everything = vec![true; g.len()];
    let r = construct_ab_solution(&f0, &spec, Vec3::planar(5.0, 5.0), &everything, &k, &AbSolutionOptions::default());
    match r {
        Err(abflux::Error::RegionNotSimplyConnected { holonomy }) => {
            assert!((holonomy - (k.coupling() * 2.1).abs()).abs() < 1e-8, "{holonomy}")
        }
        other => panic!("expected a holonomy failure, got {other:?}"),
    }
}

#[test]
fn ab_solution_residual_matches_free_run() {
    let (g, spec, region) = ab_setup();
    let k = PhysConstants::default();
    let cfg = PropagatorConfig::default();
    let f0 = init_gaussian_packet(g.clone(), [18.0, 44.0], 3.5, [0.3, -0.1]).unwrap();
    let free_links = LinkPhases::zero(&g);
    let [a, b, c] = three_snapshots(&f0, &free_links, &cfg, 40);
    let interior = region_interior(&g, &region);
    let free = schrodinger_residual([&a, &b, &c], &free_links, &cfg, Some(&interior)).unwrap();

    let links = build_link_phases(&g, &spec, &k).unwrap();
    let opts = AbSolutionOptions::default();
    let anchor = Vec3::planar(5.0, 60.0);
    let ab: Vec<_> = [&a, &b, &c]
        .iter()
        .map(|f| construct_ab_solution(f, &spec, anchor, &region, &k, &opts).unwrap().field)
        .collect();
    let res = schrodinger_residual([&ab[0], &ab[1], &ab[2]], &links, &cfg, Some(&interior)).unwrap();
    assert!(res < 2.0 * free && free < 2.0 * res, "ab {res} vs free {free}");
}

#[test]
fn snapshots_round_trip() {
    let g = Arc::new(Grid::unit(20, 16).unwrap());
    let f = init_gaussian_packet(g.clone(), [10.0, 8.0], 2.0, [0.3, 0.0]);
    assert!(f.is_err());
    let g = Arc::new(Grid::unit(24, 24).unwrap());
    let f = init_gaussian_packet(g.clone(), [12.0, 12.0], 2.0, [0.3, 0.1]).unwrap();
    for fmt in [SnapshotFormat::Text, SnapshotFormat::Binary] {
        let mut buf = Vec::new();
        write_snapshot(&f, &mut buf, fmt).unwrap();
        let snap = read_snapshot(&buf[..], fmt).unwrap();
        assert_eq!((snap.nx, snap.ny, snap.dx, snap.time), (24, 24, 1.0, 0.0));
        let back = snap.into_field(g.clone()).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-15);
    }
}
