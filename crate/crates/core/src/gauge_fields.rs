//! Analytic potential families, their exact fields, and gauge transformations.
//!
//! Formulas keep the Gaussian-unit factors (`q/ħc`); every constant is
//! configurable through [`PhysConstants`]. Vector potentials that are singular
//! on a filament or string raise [`Error::SingularPoint`] inside an exclusion
//! distance instead of returning huge numbers.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Default exclusion radius around strings, filaments and poles.
pub const DEFAULT_EXCLUSION: f64 = 1e-9;

/// Physical constants. Defaults are `ħ = c = m = 1`, `q = -1` (an electron in units `e = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysConstants<T> {
    pub hbar: T,
    pub c: T,
    pub m: T,
    pub q: T,
}

impl<T: Real> Default for PhysConstants<T> {
    fn default() -> Self {
        Self { hbar: T::one(), c: T::one(), m: T::one(), q: -T::one() }
    }
}

impl<T: Real> PhysConstants<T> {
    pub fn new(hbar: T, c: T, m: T, q: T) -> Result<Self> {
        let k = Self { hbar, c, m, q };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("c", self.c), ("m", self.m)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.q.is_finite() {
            return Err(Error::InvalidParameter("q must be finite".into()));
        }
        Ok(())
    }

    /// Same constants with another charge (e.g. a Cooper pair).
    pub fn with_charge(self, q: T) -> Self {
        Self { q, ..self }
    }

    /// `q / (ħ c)`: converts a line integral of A into a phase.
    #[inline]
    pub fn coupling(&self) -> T {
        self.q / (self.hbar * self.c)
    }

    /// Flux quantum `2πħc/|q|` for this charge.
    pub fn flux_quantum(&self) -> T {
        T::tau() * self.hbar * self.c / self.q.abs()
    }
}

/// One term `coeff · x^px · y^py · z^pz · t^pt` of a polynomial gauge function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial<T> {
    pub coeff: T,
    #[serde(default)]
    pub x: u32,
    #[serde(default)]
    pub y: u32,
    #[serde(default)]
    pub z: u32,
    #[serde(default)]
    pub t: u32,
}

impl<T: Real> Monomial<T> {
    pub fn new(coeff: T, x: u32, y: u32, z: u32, t: u32) -> Self {
        Self { coeff, x, y, z, t }
    }

    fn eval_powers(&self, r: Vec3<T>, t: T, dx: u32, dy: u32, dz: u32, dt: u32) -> T {
        let mut c = self.coeff;
        let factor = |base: T, p: u32, d: u32| -> T {
            if d > p {
                return T::zero();
            }
            let mut k = T::one();
            for j in 0..d {
                k = k * T::from_u32(p - j).unwrap();
            }
            k * base.powi((p - d) as i32)
        };
        c = c * factor(r.x, self.x, dx);
        c = c * factor(r.y, self.y, dy);
        c = c * factor(r.z, self.z, dz);
        c * factor(t, self.t, dt)
    }
}

/// Polynomial gauge function with exact derivatives.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polynomial<T> {
    pub terms: Vec<Monomial<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(terms: Vec<Monomial<T>>) -> Self {
        Self { terms }
    }

    fn sum(&self, r: Vec3<T>, t: T, d: (u32, u32, u32, u32)) -> T {
        self.terms.iter().fold(T::zero(), |acc, m| acc + m.eval_powers(r, t, d.0, d.1, d.2, d.3))
    }
}

type ScalarFn<T> = Arc<dyn Fn(Vec3<T>, T) -> T + Send + Sync>;
type VectorFn<T> = Arc<dyn Fn(Vec3<T>, T) -> Vec3<T> + Send + Sync>;

/// User-supplied gauge function with hand-written derivatives.
#[derive(Clone)]
pub struct CustomGauge<T> {
    pub value: ScalarFn<T>,
    pub gradient: VectorFn<T>,
    pub time_derivative: ScalarFn<T>,
    /// `∇(∂χ/∂t)`; `None` means the time derivative is spatially constant.
    pub gradient_time_derivative: Option<VectorFn<T>>,
}

impl<T> fmt::Debug for CustomGauge<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomGauge { .. }")
    }
}

/// Gauge function `χ(r, t)` together with its analytic derivatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeFunction<T> {
    Constant {
        value: T,
    },
    Polynomial(Polynomial<T>),
    /// `scale · atan2(y - cy, x - cx)`. Multivalued; only its gradient is single-valued.
    Azimuthal {
        center: [T; 2],
        scale: T,
    },
    #[serde(skip)]
    Custom(CustomGauge<T>),
}

impl<T: Real> GaugeFunction<T> {
    pub fn zero() -> Self {
        GaugeFunction::Constant { value: T::zero() }
    }

    pub fn polynomial(terms: Vec<Monomial<T>>) -> Self {
        GaugeFunction::Polynomial(Polynomial::new(terms))
    }

    pub fn value(&self, r: Vec3<T>, t: T) -> T {
        match self {
            GaugeFunction::Constant { value } => *value,
            GaugeFunction::Polynomial(p) => p.sum(r, t, (0, 0, 0, 0)),
            GaugeFunction::Azimuthal { center, scale } => *scale * (r.y - center[1]).atan2(r.x - center[0]),
            GaugeFunction::Custom(c) => (c.value)(r, t),
        }
    }

    pub fn gradient(&self, r: Vec3<T>, t: T) -> Vec3<T> {
        match self {
            GaugeFunction::Constant { .. } => Vec3::zero(),
            GaugeFunction::Polynomial(p) => {
                Vec3::new(p.sum(r, t, (1, 0, 0, 0)), p.sum(r, t, (0, 1, 0, 0)), p.sum(r, t, (0, 0, 1, 0)))
            }
            GaugeFunction::Azimuthal { center, scale } => {
                let dx = r.x - center[0];
                let dy = r.y - center[1];
                let rho2 = dx * dx + dy * dy;
                Vec3::new(-dy, dx, T::zero()) * (*scale / rho2)
            }
            GaugeFunction::Custom(c) => (c.gradient)(r, t),
        }
    }

    pub fn time_derivative(&self, r: Vec3<T>, t: T) -> T {
        match self {
            GaugeFunction::Constant { .. } | GaugeFunction::Azimuthal { .. } => T::zero(),
            GaugeFunction::Polynomial(p) => p.sum(r, t, (0, 0, 0, 1)),
            GaugeFunction::Custom(c) => (c.time_derivative)(r, t),
        }
    }

    /// `∇(∂χ/∂t)`, which equals `∂(∇χ)/∂t`.
    pub fn gradient_time_derivative(&self, r: Vec3<T>, t: T) -> Vec3<T> {
        match self {
            GaugeFunction::Constant { .. } | GaugeFunction::Azimuthal { .. } => Vec3::zero(),
            GaugeFunction::Polynomial(p) => {
                Vec3::new(p.sum(r, t, (1, 0, 0, 1)), p.sum(r, t, (0, 1, 0, 1)), p.sum(r, t, (0, 0, 1, 1)))
            }
            GaugeFunction::Custom(c) => c.gradient_time_derivative.as_ref().map_or_else(Vec3::zero, |g| g(r, t)),
        }
    }

    /// Largest relative mismatch between the analytic gradient and centered
    /// differences of the value, over the given probe points.
    pub fn gradient_mismatch(&self, probes: &[Vec3<T>], t: T, h: T) -> T {
        let two_h = h + h;
        probes.iter().fold(T::zero(), |worst, &r| {
            let g = self.gradient(r, t);
            let axes = [
                Vec3::new(h, T::zero(), T::zero()),
                Vec3::new(T::zero(), h, T::zero()),
                Vec3::new(T::zero(), T::zero(), h),
            ];
            let num = Vec3::new(
                (self.value(r + axes[0], t) - self.value(r - axes[0], t)) / two_h,
                (self.value(r + axes[1], t) - self.value(r - axes[1], t)) / two_h,
                (self.value(r + axes[2], t) - self.value(r - axes[2], t)) / two_h,
            );
            let scale = g.norm().max(T::one());
            worst.max((num - g).norm() / scale)
        })
    }
}

/// Tagged analytic electromagnetic configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec<T> {
    /// Infinitely thin flux filament along z through `center`.
    FluxLine { center: [T; 2], flux: T },
    /// Solenoid of finite radius with uniform interior field.
    FiniteSolenoid { center: [T; 2], radius: T, flux: T },
    /// Uniform field, symmetric gauge `A = ½ B₀ × r`.
    UniformB { b0: Vec3<T> },
    /// Monopole at the origin, Dirac string on the negative z axis.
    MonopoleStringSouth { g: T },
    /// Monopole at the origin, Dirac string on the positive z axis.
    MonopoleStringNorth { g: T },
    /// `A' = A + ∇χ`, `φ' = φ − (1/c) ∂χ/∂t`.
    GaugeShifted { base: Box<FieldSpec<T>>, chi: GaugeFunction<T> },
}

impl<T: Real> FieldSpec<T> {
    pub fn flux_line(cx: T, cy: T, flux: T) -> Self {
        FieldSpec::FluxLine { center: [cx, cy], flux }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FieldSpec::FiniteSolenoid { radius, .. } if !(*radius > T::zero()) => {
                Err(Error::InvalidParameter(format!("solenoid radius must be positive, got {radius}")))
            }
            FieldSpec::GaugeShifted { base, .. } => base.validate(),
            _ => Ok(()),
        }
    }

    /// Innermost non-wrapper spec.
    pub fn base(&self) -> &FieldSpec<T> {
        match self {
            FieldSpec::GaugeShifted { base, .. } => base.base(),
            other => other,
        }
    }

    /// Same configuration carrying another flux; only filament and solenoid specs have one.
    pub fn with_flux(&self, flux: T) -> Result<Self> {
        match self {
            FieldSpec::FluxLine { center, .. } => Ok(FieldSpec::FluxLine { center: *center, flux }),
            FieldSpec::FiniteSolenoid { center, radius, .. } => {
                Ok(FieldSpec::FiniteSolenoid { center: *center, radius: *radius, flux })
            }
            FieldSpec::GaugeShifted { base, chi } => {
                Ok(FieldSpec::GaugeShifted { base: Box::new(base.with_flux(flux)?), chi: chi.clone() })
            }
            _ => Err(Error::InvalidParameter("field spec has no adjustable flux".into())),
        }
    }

    /// Gauge functions wrapped around the base spec, outermost first.
    pub fn gauge_chain(&self) -> Vec<&GaugeFunction<T>> {
        let mut out = Vec::new();
        let mut cur = self;
        while let FieldSpec::GaugeShifted { base, chi } = cur {
            out.push(chi);
            cur = base;
        }
        out
    }

    /// True for configurations with no magnetic field in the plane `z = 0`
    /// outside a filament, i.e. where a planar lattice only sees link phases.
    pub fn is_planar(&self) -> bool {
        matches!(
            self.base(),
            FieldSpec::FluxLine { .. } | FieldSpec::FiniteSolenoid { .. } | FieldSpec::UniformB { .. }
        )
    }

    pub fn vector_potential(&self, r: Vec3<T>, t: T) -> Result<Vec3<T>> {
        self.vector_potential_eps(r, t, T::lit(DEFAULT_EXCLUSION))
    }

    pub fn vector_potential_eps(&self, r: Vec3<T>, t: T, eps: T) -> Result<Vec3<T>> {
        match self {
            FieldSpec::FluxLine { center, flux } => {
                let (dx, dy) = (r.x - center[0], r.y - center[1]);
                let rho2 = dx * dx + dy * dy;
                if rho2.sqrt() < eps {
                    return Err(Error::singular(r, eps));
                }
                Ok(Vec3::new(-dy, dx, T::zero()) * (*flux / (T::tau() * rho2)))
            }
            FieldSpec::FiniteSolenoid { center, radius, flux } => {
                let (dx, dy) = (r.x - center[0], r.y - center[1]);
                let rho2 = dx * dx + dy * dy;
                let tangent = Vec3::new(-dy, dx, T::zero());
                if rho2 <= *radius * *radius {
                    Ok(tangent * (*flux / (T::tau() * *radius * *radius)))
                } else {
                    Ok(tangent * (*flux / (T::tau() * rho2)))
                }
            }
            FieldSpec::UniformB { b0 } => Ok(b0.cross(r) * T::lit(0.5)),
            FieldSpec::MonopoleStringSouth { g } => {
                let rn = r.norm();
                // distance to the half-line z <= 0 (origin included)
                let dist = if r.z <= T::zero() { r.rho() } else { rn };
                if dist < eps {
                    return Err(Error::singular(r, eps));
                }
                // g(1 - cosθ)/(r sinθ) φ̂ rewritten without the 0/0 on the +z axis
                // rn + z loses every digit near the string; use ρ²/(rn − z) there
                let rn_plus_z = if r.z < T::zero() { r.rho().powi(2) / (rn - r.z) } else { rn + r.z };
                Ok(Vec3::new(-r.y, r.x, T::zero()) * (*g / (rn * rn_plus_z)))
            }
            FieldSpec::MonopoleStringNorth { g } => {
                let rn = r.norm();
                let dist = if r.z >= T::zero() { r.rho() } else { rn };
                if dist < eps {
                    return Err(Error::singular(r, eps));
                }
                let rn_minus_z = if r.z > T::zero() { r.rho().powi(2) / (rn + r.z) } else { rn - r.z };
                Ok(Vec3::new(-r.y, r.x, T::zero()) * (-*g / (rn * rn_minus_z)))
            }
            FieldSpec::GaugeShifted { base, chi } => Ok(base.vector_potential_eps(r, t, eps)? + chi.gradient(r, t)),
        }
    }

    /// Scalar potential φ. Zero for every built-in static configuration.
    pub fn scalar_potential(&self, constants: &PhysConstants<T>, r: Vec3<T>, t: T) -> T {
        match self {
            FieldSpec::GaugeShifted { base, chi } => {
                base.scalar_potential(constants, r, t) - chi.time_derivative(r, t) / constants.c
            }
            _ => T::zero(),
        }
    }

    /// `∂A/∂t`, analytic.
    pub fn vector_potential_rate(&self, r: Vec3<T>, t: T) -> Vec3<T> {
        match self {
            FieldSpec::GaugeShifted { base, chi } => {
                base.vector_potential_rate(r, t) + chi.gradient_time_derivative(r, t)
            }
            _ => Vec3::zero(),
        }
    }

    pub fn magnetic_field(&self, r: Vec3<T>) -> Result<Vec3<T>> {
        self.magnetic_field_eps(r, T::lit(DEFAULT_EXCLUSION))
    }

    pub fn magnetic_field_eps(&self, r: Vec3<T>, eps: T) -> Result<Vec3<T>> {
        match self {
            FieldSpec::FluxLine { center, .. } => {
                let rho = (r.x - center[0]).hypot(r.y - center[1]);
                if rho < eps {
                    return Err(Error::singular(r, eps));
                }
                Ok(Vec3::zero())
            }
            FieldSpec::FiniteSolenoid { center, radius, flux } => {
                let rho = (r.x - center[0]).hypot(r.y - center[1]);
                if rho <= *radius {
                    Ok(Vec3::unit_z() * (*flux / (T::PI() * *radius * *radius)))
                } else {
                    Ok(Vec3::zero())
                }
            }
            FieldSpec::UniformB { b0 } => Ok(*b0),
            FieldSpec::MonopoleStringSouth { g } | FieldSpec::MonopoleStringNorth { g } => {
                let rn = r.norm();
                if rn < eps {
                    return Err(Error::singular(r, eps));
                }
                Ok(r * (*g / (rn * rn * rn)))
            }
            FieldSpec::GaugeShifted { base, .. } => base.magnetic_field_eps(r, eps),
        }
    }
}

/// Potentials and fields sampled at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EMSample<T> {
    pub e: Vec3<T>,
    pub b: Vec3<T>,
    pub a: Vec3<T>,
    pub phi: T,
}

pub fn eval_vector_potential<T: Real>(spec: &FieldSpec<T>, r: Vec3<T>, t: T) -> Result<Vec3<T>> {
    spec.vector_potential(r, t)
}

pub fn eval_magnetic_field<T: Real>(spec: &FieldSpec<T>, r: Vec3<T>) -> Result<Vec3<T>> {
    spec.magnetic_field(r)
}

/// Centered-difference curl on the 6-point stencil around `r`.
pub fn numeric_curl<T, F>(sampler: F, r: Vec3<T>, h: T) -> Result<Vec3<T>>
where
    T: Real,
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    let two_h = h + h;
    let z = T::zero();
    let ddx = (sampler(r + Vec3::new(h, z, z))? - sampler(r - Vec3::new(h, z, z))?) / two_h;
    let ddy = (sampler(r + Vec3::new(z, h, z))? - sampler(r - Vec3::new(z, h, z))?) / two_h;
    let ddz = (sampler(r + Vec3::new(z, z, h))? - sampler(r - Vec3::new(z, z, h))?) / two_h;
    Ok(Vec3::new(ddy.z - ddz.y, ddz.x - ddx.z, ddx.y - ddy.x))
}

/// Curl on the 4-point planar stencil, assuming no z dependence.
pub fn numeric_curl_planar<T, F>(sampler: F, r: Vec3<T>, h: T) -> Result<Vec3<T>>
where
    T: Real,
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    let two_h = h + h;
    let z = T::zero();
    let ddx = (sampler(r + Vec3::new(h, z, z))? - sampler(r - Vec3::new(h, z, z))?) / two_h;
    let ddy = (sampler(r + Vec3::new(z, h, z))? - sampler(r - Vec3::new(z, h, z))?) / two_h;
    Ok(Vec3::new(ddy.z, -ddx.z, ddx.y - ddy.x))
}

pub fn gauge_transform_potentials<T: Real>(spec: &FieldSpec<T>, chi: GaugeFunction<T>) -> FieldSpec<T> {
    FieldSpec::GaugeShifted { base: Box::new(spec.clone()), chi }
}

/// Step used for the numeric gradient of φ in [`derive_fields`].
const PHI_GRADIENT_STEP: f64 = 1e-4;

/// Bundles A, φ, B and `E = −∇φ − (1/c) ∂A/∂t` at one point.
pub fn derive_fields<T: Real>(
    spec: &FieldSpec<T>,
    constants: &PhysConstants<T>,
    r: Vec3<T>,
    t: T,
) -> Result<EMSample<T>> {
    let a = spec.vector_potential(r, t)?;
    let b = spec.magnetic_field(r)?;
    let phi = spec.scalar_potential(constants, r, t);

    let h = T::lit(PHI_GRADIENT_STEP) * r.max_abs().max(T::one());
    let two_h = h + h;
    let z = T::zero();
    let dphi =
        |d: Vec3<T>| (spec.scalar_potential(constants, r + d, t) - spec.scalar_potential(constants, r - d, t)) / two_h;
    let grad_phi = Vec3::new(dphi(Vec3::new(h, z, z)), dphi(Vec3::new(z, h, z)), dphi(Vec3::new(z, z, h)));
    let e = -grad_phi - spec.vector_potential_rate(r, t) / constants.c;
    Ok(EMSample { e, b, a, phi })
}
