//! Experiment orchestration and artifact emission.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ConfigError, Experiment, RunConfig};
use super::svg::{self, Series};
use crate::error::Error;
use crate::experiments::{
    dirac_quantization_check, monopole_interference_phase, relative_l2, ring_fluxoid, run_double_slit, trap_flux,
    DoubleSlitConfig, RingModel,
};
use crate::gauge_fields::{FieldSpec, GaugeFunction, Monomial, PhysConstants};
use crate::path_integrals::{ab_phase, enclosed_flux_stokes, potential_sampler, spec_line_integral, Path};
use crate::quadrature::QuadratureSpec;
use crate::schrodinger::{
    born_density, build_link_phases, gauge_transform_wavefunction, init_gaussian_packet, Absorber, Grid, Potential,
    Propagator, PropagatorConfig, WaveField,
};
use crate::vector::Vec3;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(Error),
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numerical(e)
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical(_) => 3,
            RunError::Config(_) | RunError::Io(_) => 2,
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> Value {
        let mut v = json!({
            "status": "error",
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            RunError::Config(ConfigError::Schema { line, key, .. }) => {
                v["kind"] = json!("schema");
                v["line"] = json!(line);
                v["key"] = json!(key);
            }
            RunError::Config(ConfigError::Range { key, .. }) => {
                v["kind"] = json!("range");
                v["key"] = json!(key);
            }
            RunError::Numerical(e) => {
                v["kind"] = json!("numerical");
                v["error"] = json!(format!("{e:?}"));
            }
            RunError::Io(_) => v["kind"] = json!("io"),
        }
        v
    }
}

/// Collects output files; written in one pass so each run directory sees serialized writes.
#[derive(Default)]
struct Artifacts {
    files: BTreeMap<String, String>,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.insert(name.into(), body);
    }

    fn write(&self, out: &FsPath) -> Result<(), RunError> {
        for (name, body) in &self.files {
            let path = out.join(name);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
            }
            fs::write(&path, body).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// Shortest round-trip text; scientific outside [1e-4, 1e6), no negative zero.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn json_text(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable summary");
    s.push('\n');
    s
}

pub struct RunReport {
    pub outputs: Vec<PathBuf>,
    pub summary: Value,
}

/// Runs the configured experiment and writes its artifacts under `out`.
pub fn run(config: &RunConfig, out: &FsPath, threads: Option<usize>) -> Result<RunReport, RunError> {
    config.validate()?;
    fs::create_dir_all(out).map_err(|e| RunError::Io(format!("{}: {e}", out.display())))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| RunError::Io(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let mut artifacts = Artifacts::default();
    let (summary, tolerances) = pool.install(|| match config.experiment {
        Experiment::DoubleSlit => double_slit(config, &mut artifacts),
        Experiment::FluxQuant => flux_quant(config, &mut artifacts),
        Experiment::Monopole => monopole(config, &mut artifacts),
        Experiment::GaugeCheck => gauge_check(config, &mut artifacts),
    })?;
    let compute_ms = started.elapsed().as_secs_f64() * 1e3;
    artifacts.add("summary.json", json_text(&summary));
    let mut outputs: Vec<String> = artifacts.files.keys().cloned().collect();
    outputs.push("manifest.json".into());
    let manifest = json!({
        "library": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": config.experiment.name(),
        "seed": config.seed,
        "threads": pool.current_num_threads(),
        "config": config,
        "tolerances": tolerances,
        "outputs": outputs,
        "timings_ms": { "compute": compute_ms },
    });
    artifacts.add("manifest.json", json_text(&manifest));
    artifacts.write(out)?;
    Ok(RunReport { outputs: outputs.iter().map(|n| out.join(n)).collect(), summary })
}

type Outcome = Result<(Value, Value), RunError>;

fn double_slit(config: &RunConfig, artifacts: &mut Artifacts) -> Outcome {
    let k = config.constants;
    let phi0 = k.flux_quantum();
    let section = &config.double_slit;
    let prop = PropagatorConfig {
        constants: k,
        dt: config.propagator.dt,
        absorber: config.propagator.absorber,
        quality_bound: config.propagator.quality_bound,
        ..PropagatorConfig::default()
    };
    let mut ds = DoubleSlitConfig::new(config.grid.nx, config.grid.ny, config.grid.dx, prop);
    ds.max_steps = section.max_steps;
    ds.check_interval = section.check_interval;
    ds.saturation_tolerance = section.saturation_tolerance;
    ds.min_transmitted = section.min_transmitted;
    let fluxes: Vec<f64> = section.fluxes.iter().map(|f| f * phi0).collect();
    let records = run_double_slit(&config.geometry, &config.field, &ds, &fluxes)?;

    let reference = records.iter().position(|r| r.flux == 0.0);
    let mut summary_csv = String::from("flux,delta_phase,period,residual\n");
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (n, (r, quanta)) in records.iter().zip(&section.fluxes).enumerate() {
        let mut csv = String::from("y,intensity\n");
        for (y, i) in r.y.iter().zip(&r.intensity) {
            let _ = writeln!(csv, "{},{}", num(*y), num(*i));
        }
        artifacts.add(format!("runs/flux_{n:02}.csv"), csv);
        let _ = writeln!(summary_csv, "{},{},{},{}", num(r.flux), num(r.delta), num(r.period), num(r.residual));
        let peak = r.intensity.iter().copied().fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
        series.push(Series {
            label: format!("Φ = {quanta} Φ₀"),
            points: r.y.iter().zip(&r.intensity).map(|(y, i)| (*y, i / peak)).collect(),
        });
        rows.push(json!({
            "flux": r.flux,
            "flux_quanta": quanta,
            "delta_phase": r.delta,
            "expected_phase": crate::scalar::wrap_angle(k.coupling() * r.flux),
            "period": r.period,
            "residual": r.residual,
            "l2_vs_reference": reference.map(|i| relative_l2(&r.intensity, &records[i].intensity)),
            "transmitted": r.transmitted,
            "steps": r.steps,
            "saturated": r.saturated,
            "csv": format!("runs/flux_{n:02}.csv"),
        }));
    }
    artifacts.add("summary.csv", summary_csv);
    artifacts.add("fringes.svg", svg::line_chart("Detector intensity", "y", "I(y) / max", &series));
    let summary = json!({
        "experiment": "double-slit",
        "flux_quantum": phi0,
        "coupling": k.coupling(),
        "runs": rows,
    });
    let tolerances = json!({
        "saturation_tolerance": section.saturation_tolerance,
        "min_transmitted": section.min_transmitted,
        "quality_bound": config.propagator.quality_bound,
    });
    Ok((summary, tolerances))
}

fn flux_quant(config: &RunConfig, artifacts: &mut Artifacts) -> Outcome {
    let k = config.constants;
    let fq = &config.flux_quant;
    let phi0 = k.with_charge(fq.q_pair).flux_quantum();
    let mut csv = String::from("applied_flux,n,trapped_flux,fluxoid_residual\n");
    let mut rows = Vec::new();
    let mut staircase = Vec::new();
    for &quanta in &fq.applied {
        let applied = quanta * phi0;
        let mut ring = RingModel::uniform(fq.center, fq.radius, fq.nodes, applied);
        ring.q_pair = fq.q_pair;
        let (n, trapped) = trap_flux(applied, &k, fq.q_pair);
        let spec = FieldSpec::flux_line(fq.center[0], fq.center[1], trapped);
        let fluxoid = ring_fluxoid(&ring, &spec, &k)?;
        let _ = writeln!(csv, "{},{n},{},{}", num(applied), num(trapped), num(fluxoid.residual));
        staircase.push((quanta, trapped / phi0));
        rows.push(json!({
            "applied_flux": applied,
            "applied_quanta": quanta,
            "n": n,
            "trapped_flux": trapped,
            "fluxoid": fluxoid.n,
            "fluxoid_residual": fluxoid.residual,
            "winding_phase": fluxoid.winding_phase,
            "ab_phase": fluxoid.ab_phase,
        }));
    }
    let mut sorted = staircase.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let diagonal = sorted.iter().map(|p| (p.0, p.0)).collect();
    artifacts.add("summary.csv", csv);
    artifacts.add(
        "flux_steps.svg",
        svg::line_chart(
            "Trapped flux",
            "applied flux / Φ₀",
            "trapped flux / Φ₀",
            &[Series { label: "trapped".into(), points: sorted }, Series { label: "applied".into(), points: diagonal }],
        ),
    );
    let summary = json!({
        "experiment": "flux-quant",
        "q_pair": fq.q_pair,
        "flux_quantum": phi0,
        "rings": rows,
    });
    Ok((summary, json!({ "fluxoid_residual": 0.01 })))
}

fn probe_loop(center: Vec3<f64>, radius: f64, nodes: usize) -> Result<Path<f64>, Error> {
    Path::circle(center, radius, nodes)
}

fn monopole(config: &RunConfig, artifacts: &mut Artifacts) -> Outcome {
    let m = &config.monopole;
    let base = config.constants;
    // a small loop far below the monopole, around the south string
    let contour = probe_loop(Vec3::new(0.0, 0.0, -m.contour_distance), m.contour_radius, m.contour_nodes)?;
    let mut csv =
        String::from("q,g,two_qg_over_hbar_c,n,satisfied,residual,phase_pierced,phase_clear,expected_phase\n");
    let mut rows = Vec::new();
    let mut grid = Vec::new();
    for &g in &m.g_values {
        let mut line = Vec::new();
        for &q in &m.q_values {
            let k = base.with_charge(q);
            let check = dirac_quantization_check(&k, q, g);
            let pierced = monopole_interference_phase(&k, g, &contour, true)?;
            let clear = monopole_interference_phase(&k, g, &contour, false)?;
            let expected = 4.0 * PI * q * g / (k.hbar * k.c);
            let x = 2.0 * q * g / (k.hbar * k.c);
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                num(q),
                num(g),
                num(x),
                check.n,
                check.satisfied,
                num(check.residual),
                num(pierced),
                num(clear),
                num(expected)
            );
            line.push(check.residual);
            rows.push(json!({
                "q": q,
                "g": g,
                "two_qg_over_hbar_c": x,
                "n": check.n,
                "satisfied": check.satisfied,
                "residual": check.residual,
                "phase_pierced": pierced,
                "phase_clear": clear,
                "expected_phase": expected,
            }));
        }
        grid.push(line);
    }
    artifacts.add("summary.csv", csv);
    artifacts.add(
        "dirac_residuals.svg",
        svg::heatmap("Dirac condition residual", "q", "g", &m.q_values, &m.g_values, &grid, "|2qg/ħc − n|"),
    );
    let summary = json!({
        "experiment": "monopole",
        "contour_distance": m.contour_distance,
        "contour_radius": m.contour_radius,
        "pairs": rows,
    });
    Ok((summary, json!({ "dirac_tolerance": crate::experiments::DIRAC_TOLERANCE })))
}

struct Suite {
    name: &'static str,
    samples: usize,
    max_deviation: f64,
    tolerance: f64,
}

fn star(rng: &mut ChaCha8Rng) -> Path<f64> {
    let n = rng.random_range(3..14);
    let (cx, cy) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    let phase = rng.random_range(0.0..2.0 * PI);
    let pts = (0..n)
        .map(|j| {
            let r: f64 = rng.random_range(0.5..4.0);
            let t = phase + 2.0 * PI * j as f64 / n as f64;
            Vec3::planar(cx + r * t.cos(), cy + r * t.sin())
        })
        .collect();
    Path::closed(pts).expect("star polygon vertices are distinct")
}

fn clearance(path: &Path<f64>) -> f64 {
    path.segments()
        .map(|(a, b)| {
            let d = b - a;
            let t = (-a.dot(d) / d.norm_sq()).clamp(0.0, 1.0);
            (a + d * t).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

fn random_spec(rng: &mut ChaCha8Rng) -> FieldSpec<f64> {
    match rng.random_range(0..3) {
        0 => FieldSpec::flux_line(0.0, 0.0, rng.random_range(-7.0..7.0)),
        1 => FieldSpec::FiniteSolenoid {
            center: [0.0, 0.0],
            radius: rng.random_range(0.3..1.5),
            flux: rng.random_range(-7.0..7.0),
        },
        _ => FieldSpec::UniformB { b0: Vec3::new(0.0, 0.0, rng.random_range(-2.0..2.0)) },
    }
}

fn random_chi(rng: &mut ChaCha8Rng) -> GaugeFunction<f64> {
    let mut c = || rng.random_range(-1.0..1.0);
    GaugeFunction::polynomial(vec![
        Monomial::new(c(), 1, 0, 0, 0),
        Monomial::new(c(), 0, 1, 0, 0),
        Monomial::new(0.1 * c(), 1, 1, 0, 0),
        Monomial::new(0.1 * c(), 2, 0, 0, 0),
        Monomial::new(0.01 * c(), 0, 3, 0, 0),
    ])
}

fn stokes_suite(rng: &mut ChaCha8Rng, count: usize, tol: f64) -> Result<Suite, Error> {
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < count {
        let spec = random_spec(rng);
        let contour = star(rng);
        if clearance(&contour) <= 0.05 {
            continue;
        }
        let circulation = spec_line_integral(&spec, &contour, 0.0, &quad)?;
        let flux = enclosed_flux_stokes(&spec, &contour, 8)?;
        worst = worst.max((circulation - flux).abs());
        done += 1;
    }
    Ok(Suite { name: "stokes", samples: count, max_deviation: worst, tolerance: tol })
}

fn path_suite(rng: &mut ChaCha8Rng, k: &PhysConstants<f64>, count: usize, tol: f64) -> Result<Suite, Error> {
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for _ in 0..count {
        let flux = rng.random_range(-6.0..6.0);
        let spec = FieldSpec::flux_line(0.0, 0.0, flux);
        let p = Vec3::planar(-rng.random_range(2.0..6.0), rng.random_range(-0.5..0.5));
        let q = Vec3::planar(rng.random_range(2.0..6.0), rng.random_range(-0.5..0.5));
        let mut via = |lo: f64, hi: f64| {
            Path::open(vec![p, Vec3::planar(rng.random_range(-1.0..1.0), rng.random_range(lo..hi)), q])
        };
        let (top1, top2, bottom) = (via(1.0, 5.0)?, via(1.0, 5.0)?, via(-5.0, -1.0)?);
        let phase = |path: &Path<f64>| ab_phase(k, potential_sampler(&spec, 0.0), path, &quad);
        let (a1, a2, b) = (phase(&top1)?, phase(&top2)?, phase(&bottom)?);
        worst = worst.max((a1 - a2).abs()).max((a1 - b + k.coupling() * flux).abs());
    }
    Ok(Suite { name: "path_independence", samples: count, max_deviation: worst, tolerance: tol })
}

type Lattice = (Arc<Grid<f64>>, FieldSpec<f64>, WaveField<f64>);

fn lattice_setup(config: &RunConfig) -> Result<Lattice, Error> {
    let [nx, ny] = config.gauge_check.lattice;
    let grid = Arc::new(Grid::unit(nx, ny)?);
    let (fx, fy) = (nx as f64 * 0.6 + 0.3, ny as f64 * 0.5 - 0.4);
    let spec = FieldSpec::FiniteSolenoid { center: [fx, fy], radius: 3.0, flux: 2.2 };
    let psi = init_gaussian_packet(grid.clone(), [nx as f64 * 0.32, ny as f64 * 0.5], 3.0, [0.6, 0.2])?;
    Ok((grid, spec, psi))
}

fn lattice_config(config: &RunConfig) -> PropagatorConfig<f64> {
    PropagatorConfig {
        constants: config.constants,
        dt: config.propagator.dt,
        absorber: Absorber::None,
        ..PropagatorConfig::default()
    }
}

fn covariance_suite(rng: &mut ChaCha8Rng, config: &RunConfig) -> Result<Suite, Error> {
    let k = config.constants;
    let gc = &config.gauge_check;
    let (grid, spec, psi0) = lattice_setup(config)?;
    let pc = lattice_config(config);
    let mut base = psi0.clone();
    Propagator::new(grid.clone(), &build_link_phases(&grid, &spec, &k)?, &pc)?.advance(&mut base, gc.steps)?;
    let reference = born_density(&base);
    let mut worst = 0.0f64;
    for _ in 0..gc.gauge_functions {
        let chi = random_chi(rng);
        let shifted = FieldSpec::GaugeShifted { base: Box::new(spec.clone()), chi: chi.clone() };
        let mut psi = gauge_transform_wavefunction(&psi0, &chi, &k);
        Propagator::new(grid.clone(), &build_link_phases(&grid, &shifted, &k)?, &pc)?.advance(&mut psi, gc.steps)?;
        let d = born_density(&psi);
        worst = reference.iter().zip(&d).fold(worst, |m, (a, b)| m.max((a - b).abs()));
    }
    Ok(Suite {
        name: "lattice_gauge_covariance",
        samples: gc.gauge_functions,
        max_deviation: worst,
        tolerance: gc.covariance_tolerance,
    })
}

fn norm_and_shift_suites(config: &RunConfig) -> Result<[Suite; 2], Error> {
    let k = config.constants;
    let gc = &config.gauge_check;
    let (grid, spec, psi0) = lattice_setup(config)?;
    let links = build_link_phases(&grid, &spec, &k)?;
    let pc = lattice_config(config);
    let steps = 1000;
    let mut psi = psi0.clone();
    Propagator::new(grid.clone(), &links, &pc)?.advance(&mut psi, steps)?;
    let drift = (psi.norm_sq() - psi0.norm_sq()).abs();

    let v0 = 0.37;
    let shifted_cfg = PropagatorConfig { potential: Potential::Constant(v0), ..lattice_config(config) };
    let mut plain = psi0.clone();
    let mut lifted = psi0;
    Propagator::new(grid.clone(), &links, &pc)?.advance(&mut plain, gc.steps)?;
    Propagator::new(grid, &links, &shifted_cfg)?.advance(&mut lifted, gc.steps)?;
    let phase = num_complex::Complex::from_polar(1.0, v0 * lifted.time() / k.hbar);
    let restored = lifted.map_nodes(|_, z| z * phase);
    Ok([
        Suite { name: "norm_conservation_1000_steps", samples: 1, max_deviation: drift, tolerance: gc.norm_tolerance },
        Suite {
            name: "constant_potential_shift",
            samples: 1,
            max_deviation: restored.max_abs_diff(&plain),
            tolerance: gc.shift_tolerance,
        },
    ])
}

fn gauge_check(config: &RunConfig, artifacts: &mut Artifacts) -> Outcome {
    let gc = &config.gauge_check;
    let k = config.constants;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut suites = vec![
        stokes_suite(&mut rng, gc.contours, gc.stokes_tolerance)?,
        path_suite(&mut rng, &k, gc.open_paths, gc.path_tolerance)?,
        covariance_suite(&mut rng, config)?,
    ];
    suites.extend(norm_and_shift_suites(config)?);
    let mut csv = String::from("suite,passed,max_deviation,tolerance\n");
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ratios = Vec::new();
    for s in &suites {
        let passed = s.max_deviation < s.tolerance;
        let _ = writeln!(csv, "{},{},{},{}", s.name, passed, num(s.max_deviation), num(s.tolerance));
        rows.push(json!({
            "suite": s.name,
            "passed": passed,
            "samples": s.samples,
            "max_deviation": s.max_deviation,
            "tolerance": s.tolerance,
        }));
        labels.push(s.name.to_string());
        ratios.push((s.max_deviation.max(1e-300) / s.tolerance).log10().max(-20.0));
    }
    artifacts.add("summary.csv", csv);
    artifacts.add(
        "gauge_check.svg",
        svg::bar_chart("Invariant suites", "log10(max deviation / tolerance)", &labels, &ratios),
    );
    let all = suites.iter().all(|s| s.max_deviation < s.tolerance);
    let tolerances: BTreeMap<&str, f64> = suites.iter().map(|s| (s.name, s.tolerance)).collect();
    Ok((json!({ "experiment": "gauge-check", "all_passed": all, "suites": rows }), json!(tolerances)))
}
