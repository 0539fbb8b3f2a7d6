use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge_fields::{derive_fields, FieldSpec, PhysConstants};
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub t: Vec<T>,
    pub r: Vec<Vec3<T>>,
    pub v: Vec<Vec3<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Largest distance from the straight line through the first point along the first velocity.
    pub fn max_deflection(&self) -> T {
        let (r0, v0) = (self.r[0], self.v[0]);
        let u = v0 / v0.norm();
        self.r.iter().fold(T::zero(), |m, r| {
            let d = *r - r0;
            m.max((d - u * d.dot(u)).norm())
        })
    }
}

/// RK4 integration of `m dv/dt = q(E + v×B/c)` from `t = 0` to `t_end`.
pub fn classical_trajectory<T: Real>(
    spec: &FieldSpec<T>,
    constants: &PhysConstants<T>,
    r0: Vec3<T>,
    v0: Vec3<T>,
    t_end: T,
    dt: T,
) -> Result<Trajectory<T>> {
    constants.validate()?;
    if !(dt > T::zero()) || !(t_end >= T::zero()) {
        return Err(Error::InvalidParameter("need dt > 0 and t_end >= 0".into()));
    }
    let steps = (t_end / dt).ceil().to_usize().unwrap_or(0);
    let h = if steps == 0 { T::zero() } else { t_end / T::from_usize_lossy(steps) };
    let qm = constants.q / constants.m;
    let accel = |r: Vec3<T>, v: Vec3<T>, t: T| -> Result<Vec3<T>> {
        let f = derive_fields(spec, constants, r, t).map_err(|e| match e {
            Error::SingularPoint { .. } => Error::SingularEncounter { t: t.as_f64() },
            other => other,
        })?;
        Ok((f.e + v.cross(f.b) / constants.c) * qm)
    };
    let mut out = Trajectory { t: vec![T::zero()], r: vec![r0], v: vec![v0] };
    let (mut r, mut v) = (r0, v0);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    for s in 0..steps {
        let t = h * T::from_usize_lossy(s);
        let a1 = accel(r, v, t)?;
        let (r2, v2) = (r + v * (h * half), v + a1 * (h * half));
        let a2 = accel(r2, v2, t + h * half)?;
        let (r3, v3) = (r + v2 * (h * half), v + a2 * (h * half));
        let a3 = accel(r3, v3, t + h * half)?;
        let (r4, v4) = (r + v3 * h, v + a3 * h);
        let a4 = accel(r4, v4, t + h)?;
        r += (v + v2 * T::lit(2.0) + v3 * T::lit(2.0) + v4) * (h * sixth);
        v += (a1 + a2 * T::lit(2.0) + a3 * T::lit(2.0) + a4) * (h * sixth);
        out.t.push(h * T::from_usize_lossy(s + 1));
        out.r.push(r);
        out.v.push(v);
    }
    Ok(out)
}
