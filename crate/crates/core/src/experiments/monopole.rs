use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge_fields::{FieldSpec, PhysConstants};
use crate::path_integrals::{contour_plane, spec_line_integral, winding_number, Path};
use crate::quadrature::QuadratureSpec;
use crate::scalar::Real;
use crate::vector::Vec3;

/// Which half of the z axis carries the Dirac string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StringGauge {
    /// `A_φ = g(1 − cos θ)/(r sin θ)`, string on `z < 0`.
    South,
    /// `A_φ = −g(1 + cos θ)/(r sin θ)`, string on `z > 0`.
    North,
}

impl StringGauge {
    pub fn spec<T: Real>(self, g: T) -> FieldSpec<T> {
        match self {
            StringGauge::South => FieldSpec::MonopoleStringSouth { g },
            StringGauge::North => FieldSpec::MonopoleStringNorth { g },
        }
    }
}

/// `(q/ħc) ∮ A·dl` around a closed contour in the chosen string gauge.
pub fn monopole_loop_phase<T: Real>(
    constants: &PhysConstants<T>,
    g: T,
    contour: &Path<T>,
    gauge: StringGauge,
) -> Result<T> {
    if !contour.is_closed() {
        return Err(Error::InvalidPath("monopole phase needs a closed contour".into()));
    }
    let spec = gauge.spec(g);
    Ok(constants.coupling() * spec_line_integral(&spec, contour, T::zero(), &QuadratureSpec::default())?)
}

/// Whether the string of `gauge` crosses the flat surface spanned by `contour`.
pub fn string_pierces<T: Real>(contour: &Path<T>, gauge: StringGauge) -> Result<bool> {
    let (n, p0) = contour_plane(contour)?;
    let scale = contour.extent().max(T::one());
    if n.z.abs() <= T::lit(1e-12) {
        return Ok(false);
    }
    let z = n.dot(p0) / n.z;
    if z.abs() <= T::lit(1e-12) * scale {
        return Err(Error::InvalidParameter("contour plane passes through the monopole".into()));
    }
    let on_string = match gauge {
        StringGauge::South => z < T::zero(),
        StringGauge::North => z > T::zero(),
    };
    if !on_string {
        return Ok(false);
    }
    // project into in-plane coordinates and count turns around the crossing point
    let helper = if n.x.abs() < T::lit(0.9) {
        Vec3::new(T::one(), T::zero(), T::zero())
    } else {
        Vec3::new(T::zero(), T::one(), T::zero())
    };
    let e1 = {
        let v = helper - n * helper.dot(n);
        v / v.norm()
    };
    let e2 = n.cross(e1);
    let hit = Vec3::new(T::zero(), T::zero(), z);
    let flat = |v: Vec3<T>| Vec3::planar((v - p0).dot(e1), (v - p0).dot(e2));
    let projected = Path::closed(contour.vertices().iter().map(|v| flat(*v)).collect())?;
    Ok(winding_number(&projected, flat(hit))? != 0)
}

/// Interference phase around `contour` in the string gauge whose string does
/// (or does not) pierce the spanned surface.
pub fn monopole_interference_phase<T: Real>(
    constants: &PhysConstants<T>,
    g: T,
    contour: &Path<T>,
    string_pierces_surface: bool,
) -> Result<T> {
    for gauge in [StringGauge::South, StringGauge::North] {
        if string_pierces(contour, gauge)? == string_pierces_surface {
            return monopole_loop_phase(constants, g, contour, gauge);
        }
    }
    Err(Error::NoMatchingGauge)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracCheck<T> {
    pub satisfied: bool,
    pub n: i64,
    /// Distance of `2qg/ħc` to the nearest integer.
    pub residual: T,
}

pub const DIRAC_TOLERANCE: f64 = 1e-12;

/// Tests `4πqg/ħc ≡ 0 (mod 2π)`, i.e. `qg = nħc/2`.
pub fn dirac_quantization_check<T: Real>(constants: &PhysConstants<T>, q: T, g: T) -> DiracCheck<T> {
    let x = T::lit(2.0) * q * g / (constants.hbar * constants.c);
    let n = x.round();
    let residual = (x - n).abs();
    DiracCheck { satisfied: residual < T::lit(DIRAC_TOLERANCE), n: n.to_i64().unwrap_or(0), residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dirac_examples() {
        let k = PhysConstants::default();
        let c = dirac_quantization_check(&k, 1.0, 0.5);
        assert!(c.satisfied && c.n == 1);
        let c = dirac_quantization_check(&k, 1.0, 0.0);
        assert!(c.satisfied && c.n == 0);
        let c = dirac_quantization_check(&k, 1.0f64, 0.7);
        assert!(!c.satisfied && c.n == 1 && (c.residual - 0.4).abs() < 1e-12);
    }

    #[test]
    fn piercing_detection() {
        let below = Path::circle(Vec3::new(0.0, 0.0, -10.0), 1.0, 16).unwrap();
        assert!(string_pierces(&below, StringGauge::South).unwrap());
        assert!(!string_pierces(&below, StringGauge::North).unwrap());
        let aside = Path::circle(Vec3::new(5.0, 0.0, -10.0), 1.0, 16).unwrap();
        assert!(!string_pierces(&aside, StringGauge::South).unwrap());
        let k = PhysConstants::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(monopole_interference_phase(&k, 1.0, &aside, true), Err(Error::NoMatchingGauge));
    }

    #[test]
    fn small_loop_around_the_string() {
        let k = PhysConstants::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let c = Path::circle(Vec3::new(0.0, 0.0, -50.0), 0.01, 64).unwrap();
        let p = monopole_interference_phase(&k, 1.0, &c, true).unwrap();
        assert!((p - 4.0 * PI).abs() < 1e-6 * 4.0 * PI);
    }
}
