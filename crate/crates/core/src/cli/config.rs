//! Run configuration: TOML in, fully materialized [`RunConfig`] out.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::experiments::{DoubleSlitGeometry, PacketParams};
use crate::gauge_fields::{FieldSpec, PhysConstants};
use crate::schrodinger::Absorber;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    DoubleSlit,
    FluxQuant,
    Monopole,
    GaugeCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::DoubleSlit => "double-slit",
            Experiment::FluxQuant => "flux-quant",
            Experiment::Monopole => "monopole",
            Experiment::GaugeCheck => "gauge-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed text, wrong types or unknown keys.
    Schema { line: Option<usize>, key: Option<String>, message: String },
    /// Well-formed but violates an invariant.
    Range { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Schema { line, key, message } => {
                write!(f, "schema error")?;
                if let Some(l) = line {
                    write!(f, " at line {l}")?;
                }
                if let Some(k) = key {
                    write!(f, " (key `{k}`)")?;
                }
                write!(f, ": {message}")
            }
            ConfigError::Range { key, message } => write!(f, "range error in `{key}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn range(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Range { key: key.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { nx: 512, ny: 384, dx: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorSection {
    pub dt: f64,
    pub quality_bound: f64,
    pub absorber: Absorber<f64>,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        Self { dt: 0.1, quality_bound: 0.5, absorber: Absorber::Layer { width: 24, strength: 0.5 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoubleSlitSection {
    /// In units of the flux quantum `2πħc/|q|`.
    pub fluxes: Vec<f64>,
    pub max_steps: usize,
    pub check_interval: usize,
    pub saturation_tolerance: f64,
    pub min_transmitted: f64,
}

impl Default for DoubleSlitSection {
    fn default() -> Self {
        Self {
            fluxes: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            max_steps: 20_000,
            check_interval: 100,
            saturation_tolerance: 1e-6,
            min_transmitted: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluxQuantSection {
    pub center: [f64; 2],
    pub radius: f64,
    pub nodes: usize,
    pub q_pair: f64,
    /// Applied fluxes in units of the pair quantum `2πħc/|q_pair|`.
    pub applied: Vec<f64>,
}

impl Default for FluxQuantSection {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            radius: 10.0,
            nodes: 128,
            q_pair: -2.0,
            applied: vec![-1.6, -0.5, 0.0, 0.4, 0.5, 1.4, 1.5, 2.4, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonopoleSection {
    pub q_values: Vec<f64>,
    pub g_values: Vec<f64>,
    /// Distance of the probe loops from the monopole.
    pub contour_distance: f64,
    pub contour_radius: f64,
    pub contour_nodes: usize,
}

impl Default for MonopoleSection {
    fn default() -> Self {
        Self {
            q_values: vec![0.5, 1.0, 1.5, 2.0],
            g_values: vec![0.25, 0.5, 0.7, 1.0],
            contour_distance: 1e3,
            contour_radius: 1.0,
            contour_nodes: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaugeCheckSection {
    pub contours: usize,
    pub open_paths: usize,
    pub gauge_functions: usize,
    pub lattice: [usize; 2],
    pub steps: usize,
    pub stokes_tolerance: f64,
    pub path_tolerance: f64,
    pub covariance_tolerance: f64,
    pub norm_tolerance: f64,
    pub shift_tolerance: f64,
}

impl Default for GaugeCheckSection {
    fn default() -> Self {
        Self {
            contours: 200,
            open_paths: 64,
            gauge_functions: 5,
            lattice: [56, 44],
            steps: 150,
            stokes_tolerance: 1e-8,
            path_tolerance: 1e-8,
            covariance_tolerance: 1e-12,
            norm_tolerance: 1e-10,
            shift_tolerance: 1e-10,
        }
    }
}

pub fn default_geometry() -> DoubleSlitGeometry<f64> {
    DoubleSlitGeometry {
        barrier_column: 200,
        barrier_thickness: 4,
        slit_centers: [168, 216],
        slit_width: 7,
        flux_position: [201.5, 192.5],
        detector_column: 460,
        source: PacketParams { center: [110.0, 192.0], sigma: 16.0, k0: [1.0, 0.0] },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Experiment>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    constants: PhysConstants<f64>,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    propagator: PropagatorSection,
    #[serde(default = "default_geometry")]
    geometry: DoubleSlitGeometry<f64>,
    field: Option<FieldSpec<f64>>,
    #[serde(default)]
    double_slit: DoubleSlitSection,
    #[serde(default)]
    flux_quant: FluxQuantSection,
    #[serde(default)]
    monopole: MonopoleSection,
    #[serde(default)]
    gauge_check: GaugeCheckSection,
}

/// Validated configuration with every default filled in.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub constants: PhysConstants<f64>,
    pub grid: GridSection,
    pub propagator: PropagatorSection,
    pub geometry: DoubleSlitGeometry<f64>,
    pub field: FieldSpec<f64>,
    pub double_slit: DoubleSlitSection,
    pub flux_quant: FluxQuantSection,
    pub monopole: MonopoleSection,
    pub gauge_check: GaugeCheckSection,
}

/// Parses a config that names its own experiment.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_for(text, None)
}

/// Parses a config for `experiment`; a config naming a different one is rejected.
pub fn parse_config_for(text: &str, experiment: Option<Experiment>) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| schema_error(text, &e))?;
    let experiment = match (raw.experiment, experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(range("experiment", format!("config is for {a} but {b} was requested")));
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            return Err(ConfigError::Schema {
                line: None,
                key: Some("experiment".into()),
                message: "missing key".into(),
            });
        }
    };
    let field = raw
        .field
        .unwrap_or_else(|| FieldSpec::flux_line(raw.geometry.flux_position[0], raw.geometry.flux_position[1], 0.0));
    let cfg = RunConfig {
        experiment,
        seed: raw.seed,
        constants: raw.constants,
        grid: raw.grid,
        propagator: raw.propagator,
        geometry: raw.geometry,
        field,
        double_slit: raw.double_slit,
        flux_quant: raw.flux_quant,
        monopole: raw.monopole,
        gauge_check: raw.gauge_check,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn schema_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    let key = e.span().and_then(|s| {
        let snippet = text.get(s.clone())?.trim();
        let name = snippet.split(['=', ']', '[']).map(str::trim).find(|p| !p.is_empty())?;
        name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.').then(|| name.to_string())
    });
    ConfigError::Schema { line, key, message: e.message().to_string() }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(range(key, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.constants.validate().map_err(|e| range("constants", e.to_string()))?;
        match self.experiment {
            Experiment::DoubleSlit => self.validate_double_slit(),
            Experiment::FluxQuant => self.validate_flux_quant(),
            Experiment::Monopole => self.validate_monopole(),
            Experiment::GaugeCheck => self.validate_gauge_check(),
        }
    }

    fn absorber_width(&self) -> usize {
        match self.propagator.absorber {
            Absorber::None => 0,
            Absorber::Layer { width, .. } => width,
        }
    }

    fn validate_double_slit(&self) -> Result<(), ConfigError> {
        positive("grid.dx", self.grid.dx)?;
        positive("propagator.dt", self.propagator.dt)?;
        positive("propagator.quality_bound", self.propagator.quality_bound)?;
        if self.grid.nx < 16 || self.grid.ny < 16 {
            return Err(range("grid", "needs at least 16 nodes per side"));
        }
        if let Absorber::Layer { width, strength } = self.propagator.absorber {
            if width == 0 || 2 * width >= self.grid.nx.min(self.grid.ny) {
                return Err(range("propagator.absorber.width", "layer must be nonempty and leave an interior"));
            }
            if !(strength >= 0.0 && strength.is_finite()) {
                return Err(range("propagator.absorber.strength", "must be non-negative"));
            }
        }
        self.geometry
            .validate(self.grid.nx, self.grid.ny, self.grid.dx, self.absorber_width())
            .map_err(|e| range("geometry", e.to_string()))?;
        self.field.validate().map_err(|e| range("field", e.to_string()))?;
        self.field.with_flux(0.0).map_err(|_| range("field", "double slit needs a flux line or solenoid"))?;
        let ds = &self.double_slit;
        if ds.fluxes.is_empty() || ds.fluxes.iter().any(|f| !f.is_finite()) {
            return Err(range("double_slit.fluxes", "needs at least one finite flux"));
        }
        if ds.check_interval == 0 || ds.max_steps == 0 {
            return Err(range("double_slit", "max_steps and check_interval must be positive"));
        }
        positive("double_slit.saturation_tolerance", ds.saturation_tolerance)?;
        positive("double_slit.min_transmitted", ds.min_transmitted)
    }

    fn validate_flux_quant(&self) -> Result<(), ConfigError> {
        let fq = &self.flux_quant;
        positive("flux_quant.radius", fq.radius)?;
        if fq.nodes < crate::experiments::MIN_RING_NODES {
            return Err(range("flux_quant.nodes", format!("needs at least {}", crate::experiments::MIN_RING_NODES)));
        }
        if fq.q_pair == 0.0 || !fq.q_pair.is_finite() {
            return Err(range("flux_quant.q_pair", "must be nonzero"));
        }
        if fq.applied.iter().any(|f| !f.is_finite()) {
            return Err(range("flux_quant.applied", "fluxes must be finite"));
        }
        Ok(())
    }

    fn validate_monopole(&self) -> Result<(), ConfigError> {
        let m = &self.monopole;
        positive("monopole.contour_distance", m.contour_distance)?;
        positive("monopole.contour_radius", m.contour_radius)?;
        if m.contour_radius >= m.contour_distance {
            return Err(range("monopole.contour_radius", "probe loops must be small compared to their distance"));
        }
        if m.contour_nodes < 8 {
            return Err(range("monopole.contour_nodes", "needs at least 8"));
        }
        if m.q_values.iter().chain(&m.g_values).any(|v| !v.is_finite()) {
            return Err(range("monopole", "charges must be finite"));
        }
        Ok(())
    }

    fn validate_gauge_check(&self) -> Result<(), ConfigError> {
        let g = &self.gauge_check;
        if g.lattice[0] < 32 || g.lattice[1] < 32 {
            return Err(range("gauge_check.lattice", "needs at least 32 nodes per side"));
        }
        for (key, v) in [
            ("gauge_check.stokes_tolerance", g.stokes_tolerance),
            ("gauge_check.path_tolerance", g.path_tolerance),
            ("gauge_check.covariance_tolerance", g.covariance_tolerance),
            ("gauge_check.norm_tolerance", g.norm_tolerance),
            ("gauge_check.shift_tolerance", g.shift_tolerance),
        ] {
            positive(key, v)?;
        }
        positive("propagator.dt", self.propagator.dt)
    }
}
