//! Line integrals along polylines, Aharonov–Bohm phases, Stokes fluxes and
//! winding numbers.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge_fields::{FieldSpec, PhysConstants};
use crate::quadrature::{FixedRule, QuadratureSpec};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Ordered polyline. Closed paths store each vertex once; the closing
/// segment back to the first vertex is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Path<T> {
    vertices: Vec<Vec3<T>>,
    closed: bool,
}

impl<T: Real> Path<T> {
    pub fn new(vertices: Vec<Vec3<T>>, closed: bool) -> Result<Self> {
        let p = Self { vertices, closed };
        p.validate()?;
        Ok(p)
    }

    pub fn open(vertices: Vec<Vec3<T>>) -> Result<Self> {
        Self::new(vertices, false)
    }

    pub fn closed(vertices: Vec<Vec3<T>>) -> Result<Self> {
        Self::new(vertices, true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() < 2 {
            return Err(Error::InvalidPath("a path needs at least two vertices".into()));
        }
        if self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPath("non-finite vertex".into()));
        }
        if self.vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPath("consecutive duplicate vertices".into()));
        }
        if self.closed && self.vertices.first() == self.vertices.last() {
            return Err(Error::InvalidPath("closed paths must not repeat the first vertex at the end".into()));
        }
        Ok(())
    }

    /// Regular polygon with `n` vertices approximating a circle, counterclockwise.
    pub fn circle(center: Vec3<T>, radius: T, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidPath("a circle needs at least three vertices".into()));
        }
        let step = T::tau() / T::from_usize_lossy(n);
        let vertices = (0..n)
            .map(|k| {
                let a = step * T::from_usize_lossy(k);
                center + Vec3::new(radius * a.cos(), radius * a.sin(), T::zero())
            })
            .collect();
        Self::closed(vertices)
    }

    /// Axis-aligned rectangle in the plane `z = z0`, counterclockwise.
    pub fn rectangle(x0: T, y0: T, x1: T, y1: T, z0: T) -> Result<Self> {
        Self::closed(vec![Vec3::new(x0, y0, z0), Vec3::new(x1, y0, z0), Vec3::new(x1, y1, z0), Vec3::new(x0, y1, z0)])
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn start(&self) -> Vec3<T> {
        self.vertices[0]
    }

    pub fn end(&self) -> Vec3<T> {
        if self.closed {
            self.vertices[0]
        } else {
            *self.vertices.last().unwrap()
        }
    }

    /// Segments in traversal order, including the closing one.
    pub fn segments(&self) -> impl Iterator<Item = (Vec3<T>, Vec3<T>)> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        if self.closed {
            // keep the same start vertex
            vertices[1..].reverse();
        } else {
            vertices.reverse();
        }
        Self { vertices, closed: self.closed }
    }

    /// Open path followed by `other`, which must start where `self` ends.
    pub fn concat(&self, other: &Path<T>) -> Result<Self> {
        if self.closed || other.closed {
            return Err(Error::InvalidPath("only open paths can be concatenated".into()));
        }
        if self.end() != other.start() {
            return Err(Error::InvalidPath("paths do not share an endpoint".into()));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        Self::open(vertices)
    }

    /// Closes an open path (drops a repeated final vertex if present).
    pub fn close(&self) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        if vertices.len() > 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        Self::closed(vertices)
    }

    pub fn length(&self) -> T {
        self.segments().fold(T::zero(), |acc, (a, b)| acc + (b - a).norm())
    }

    /// Largest vertex distance from the origin.
    pub fn extent(&self) -> T {
        self.vertices.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }
}

fn lex_cmp<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Ordering {
    a.to_array()
        .iter()
        .zip(b.to_array().iter())
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// `∫ A·dr` along one straight segment.
pub fn segment_integral<T, F>(sampler: &F, a: Vec3<T>, b: Vec3<T>, quad: &QuadratureSpec) -> Result<T>
where
    T: Real,
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    let d = b - a;
    quad.integrate_unit(&|s: T| Ok(sampler(a + d * s)?.dot(d)))
}

/// `∫ A·dr` along one straight segment with a fixed (non-adaptive) rule.
pub fn segment_integral_fixed<T, F>(sampler: &F, a: Vec3<T>, b: Vec3<T>, rule: &FixedRule<T>) -> Result<T>
where
    T: Real,
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    let d = b - a;
    rule.apply(&|s: T| Ok(sampler(a + d * s)?.dot(d)), T::zero(), T::one())
}

/// `∫ A·dr` along a polyline (closing segment included for closed paths).
///
/// Each segment is integrated in a canonical direction and the contributions
/// are summed in a canonical order, so reversing a path negates the result
/// bit for bit.
pub fn line_integral<T, F>(sampler: F, path: &Path<T>, quad: &QuadratureSpec) -> Result<T>
where
    T: Real,
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    let mut parts = Vec::with_capacity(path.vertices.len());
    for (a, b) in path.segments() {
        let (lo, hi, sign) = if lex_cmp(&a, &b) == Ordering::Greater { (b, a, -T::one()) } else { (a, b, T::one()) };
        let v = segment_integral(&sampler, lo, hi, quad)?;
        parts.push((lo, hi, sign * v));
    }
    parts.sort_by(|x, y| {
        lex_cmp(&x.0, &y.0)
            .then_with(|| lex_cmp(&x.1, &y.1))
            .then_with(|| x.2.abs().partial_cmp(&y.2.abs()).unwrap_or(Ordering::Equal))
    });
    Ok(parts.iter().fold(T::zero(), |acc, p| acc + p.2))
}

/// Aharonov–Bohm phase `(q/ħc) ∫ A·dr`, unwrapped.
pub fn ab_phase<T, F>(constants: &PhysConstants<T>, sampler: F, path: &Path<T>, quad: &QuadratureSpec) -> Result<T>
where
    T: Real,
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    Ok(constants.coupling() * line_integral(sampler, path, quad)?)
}

/// Vector-potential sampler for a field spec at time `t`.
pub fn potential_sampler<T: Real>(spec: &FieldSpec<T>, t: T) -> impl Fn(Vec3<T>) -> Result<Vec3<T>> + '_ {
    move |r| spec.vector_potential(r, t)
}

/// Parameters `s ∈ (0, 1)`, increasing, where `a + s(b − a)` crosses a surface
/// on which the potential of `spec` is continuous but not smooth.
pub fn kink_parameters<T: Real>(spec: &FieldSpec<T>, a: Vec3<T>, b: Vec3<T>) -> Vec<T> {
    if lex_cmp(&a, &b) == Ordering::Greater {
        let mut s: Vec<T> = kink_parameters(spec, b, a).into_iter().map(|s| T::one() - s).collect();
        s.reverse();
        return s;
    }
    match spec {
        FieldSpec::GaugeShifted { base, .. } => kink_parameters(base, a, b),
        FieldSpec::FiniteSolenoid { center, radius, .. } => {
            let (px, py) = (a.x - center[0], a.y - center[1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let qa = dx * dx + dy * dy;
            let qb = px * dx + py * dy;
            let qc = px * px + py * py - *radius * *radius;
            let disc = qb * qb - qa * qc;
            if qa == T::zero() || disc <= T::zero() {
                return Vec::new();
            }
            let root = disc.sqrt();
            let edge = T::lit(1e-12);
            [(-qb - root) / qa, (-qb + root) / qa].into_iter().filter(|s| *s > edge && *s < T::one() - edge).collect()
        }
        _ => Vec::new(),
    }
}

/// Kink crossings as points ordered from `a` to `b`, computed from the
/// canonically ordered endpoints so both directions give identical points.
fn kink_points<T: Real>(spec: &FieldSpec<T>, a: Vec3<T>, b: Vec3<T>) -> Vec<Vec3<T>> {
    let flip = lex_cmp(&a, &b) == Ordering::Greater;
    let (lo, hi) = if flip { (b, a) } else { (a, b) };
    let d = hi - lo;
    let mut pts: Vec<Vec3<T>> = kink_parameters(spec, lo, hi).into_iter().map(|s| lo + d * s).collect();
    if flip {
        pts.reverse();
    }
    pts
}

/// `∫ A·dr` of a field spec along one segment, split at kinks of `A`.
pub fn spec_segment_integral<T: Real>(
    spec: &FieldSpec<T>,
    a: Vec3<T>,
    b: Vec3<T>,
    t: T,
    quad: &QuadratureSpec,
) -> Result<T> {
    let sampler = potential_sampler(spec, t);
    let mut pts = vec![a];
    pts.extend(kink_points(spec, a, b));
    pts.push(b);
    let mut acc = T::zero();
    for w in pts.windows(2) {
        acc = acc + segment_integral(&sampler, w[0], w[1], quad)?;
    }
    Ok(acc)
}

/// `∫ A·dr` of a field spec along a path, with segments split at kinks of `A`
/// so the adaptive rule never straddles one.
pub fn spec_line_integral<T: Real>(spec: &FieldSpec<T>, path: &Path<T>, t: T, quad: &QuadratureSpec) -> Result<T> {
    let mut vertices = Vec::with_capacity(path.vertices.len());
    for (a, b) in path.segments() {
        vertices.push(a);
        vertices.extend(kink_points(spec, a, b));
    }
    if !path.closed {
        vertices.push(path.end());
    }
    let refined = Path { vertices, closed: path.closed };
    line_integral(potential_sampler(spec, t), &refined, quad)
}

/// Signed angle from `u` to `v` about the axis `n` (right-handed).
fn signed_angle<T: Real>(u: Vec3<T>, v: Vec3<T>, n: Vec3<T>) -> T {
    u.cross(v).dot(n).atan2(u.dot(v))
}

/// Plane through a closed contour: unit normal (Newell) and a point on it.
pub fn contour_plane<T: Real>(contour: &Path<T>) -> Result<(Vec3<T>, Vec3<T>)> {
    let vs = contour.vertices();
    let n = vs.len();
    let mut normal = Vec3::zero();
    let mut centroid = Vec3::zero();
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        normal += Vec3::new((a.y - b.y) * (a.z + b.z), (a.z - b.z) * (a.x + b.x), (a.x - b.x) * (a.y + b.y));
        centroid += a;
    }
    centroid = centroid / T::from_usize_lossy(n);
    let len = normal.norm();
    if !(len > T::zero()) {
        // degenerate (zero-area) contour: any plane through it works
        return Ok((Vec3::unit_z(), centroid));
    }
    let normal = normal / len;
    let scale = contour.extent().max(T::one());
    let deviation = vs.iter().fold(T::zero(), |m, v| m.max((*v - centroid).dot(normal).abs()));
    if deviation > T::lit(1e-9) * scale {
        return Err(Error::NonPlanarContour { deviation: deviation.as_f64() });
    }
    Ok((normal, centroid))
}

fn require_horizontal<T: Real>(contour: &Path<T>) -> Result<T> {
    let z0 = contour.start().z;
    let scale = contour.extent().max(T::one());
    let deviation = contour.vertices().iter().fold(T::zero(), |m, v| m.max((v.z - z0).abs()));
    if deviation > T::lit(1e-12) * scale {
        return Err(Error::NonPlanarContour { deviation: deviation.as_f64() });
    }
    Ok(z0)
}

/// Source of magnetic flux through planar surfaces spanned by a contour.
///
/// The surface is a signed fan of triangles from [`SurfaceFlux::fan_apex`];
/// summing signed triangles weights every region by its winding number,
/// which is exactly what Stokes' theorem pairs with `∮ A·dr`.
pub trait SurfaceFlux<T: Real> {
    fn fan_apex(&self, contour: &Path<T>) -> Result<Vec3<T>> {
        let vs = contour.vertices();
        let sum = vs.iter().fold(Vec3::zero(), |acc, v| acc + *v);
        Ok(sum / T::from_usize_lossy(vs.len()))
    }

    /// Flux through the triangle `(apex, a, b)`, oriented by `(a − apex) × (b − apex)`.
    fn triangle_flux(&self, apex: Vec3<T>, a: Vec3<T>, b: Vec3<T>, resolution: usize) -> Result<T>;
}

/// Smooth field given by a sampler; triangles integrated by collapsed Gauss–Legendre.
pub struct SampledField<F>(pub F);

impl<T, F> SurfaceFlux<T> for SampledField<F>
where
    T: Real,
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    fn triangle_flux(&self, apex: Vec3<T>, a: Vec3<T>, b: Vec3<T>, resolution: usize) -> Result<T> {
        let ea = a - apex;
        let eb = b - apex;
        let area_vec = ea.cross(eb);
        if area_vec.norm() == T::zero() {
            return Ok(T::zero());
        }
        let rule = FixedRule::<T>::gauss_legendre(8);
        let panels = resolution.max(1);
        let h = T::one() / T::from_usize_lossy(panels);
        let mut acc = T::zero();
        for pu in 0..panels {
            for pv in 0..panels {
                for (&xu, &wu) in rule.nodes.iter().zip(&rule.weights) {
                    let u = (T::from_usize_lossy(pu) + xu) * h;
                    for (&xv, &wv) in rule.nodes.iter().zip(&rule.weights) {
                        let v = (T::from_usize_lossy(pv) + xv) * h;
                        let x = apex + (ea * (T::one() - v) + eb * v) * u;
                        acc = acc + wu * wv * u * (self.0)(x)?.dot(area_vec);
                    }
                }
            }
        }
        Ok(acc * h * h)
    }
}

/// Signed area of `triangle(O, a, b) ∩ disc(O, r)` with `O` at the origin of `a`, `b`.
fn triangle_disc_area<T: Real>(a: (T, T), b: (T, T), r: T) -> T {
    let half = T::lit(0.5);
    let cross = |p: (T, T), q: (T, T)| p.0 * q.1 - p.1 * q.0;
    let dot = |p: (T, T), q: (T, T)| p.0 * q.0 + p.1 * q.1;
    let sector = |p: (T, T), q: (T, T)| half * r * r * cross(p, q).atan2(dot(p, q));
    let r2 = r * r;
    let na = dot(a, a);
    let nb = dot(b, b);
    if na <= r2 && nb <= r2 {
        return half * cross(a, b);
    }
    // |a + s(b - a)|² = r²
    let d = (b.0 - a.0, b.1 - a.1);
    let qa = dot(d, d);
    if qa == T::zero() {
        return T::zero();
    }
    let qb = dot(a, d);
    let qc = na - r2;
    let disc = qb * qb - qa * qc;
    let at = |s: T| (a.0 + d.0 * s, a.1 + d.1 * s);
    if na <= r2 {
        let s = (-qb + disc.max(T::zero()).sqrt()) / qa;
        let p = at(s);
        return half * cross(a, p) + sector(p, b);
    }
    if nb <= r2 {
        let s = (-qb - disc.max(T::zero()).sqrt()) / qa;
        let p = at(s);
        return sector(a, p) + half * cross(p, b);
    }
    if disc <= T::zero() {
        return sector(a, b);
    }
    let sq = disc.sqrt();
    let s1 = (-qb - sq) / qa;
    let s2 = (-qb + sq) / qa;
    if s1 >= T::one() || s2 <= T::zero() {
        return sector(a, b);
    }
    let p1 = at(s1);
    let p2 = at(s2);
    sector(a, p1) + half * cross(p1, p2) + sector(p2, b)
}

impl<T: Real> SurfaceFlux<T> for FieldSpec<T> {
    fn fan_apex(&self, contour: &Path<T>) -> Result<Vec3<T>> {
        match self {
            FieldSpec::FluxLine { center, .. } | FieldSpec::FiniteSolenoid { center, .. } => {
                let z0 = require_horizontal(contour)?;
                Ok(Vec3::new(center[0], center[1], z0))
            }
            FieldSpec::GaugeShifted { base, .. } => base.fan_apex(contour),
            _ => {
                let vs = contour.vertices();
                let sum = vs.iter().fold(Vec3::zero(), |acc, v| acc + *v);
                Ok(sum / T::from_usize_lossy(vs.len()))
            }
        }
    }

    fn triangle_flux(&self, apex: Vec3<T>, a: Vec3<T>, b: Vec3<T>, resolution: usize) -> Result<T> {
        match self {
            FieldSpec::FluxLine { flux, .. } => {
                let (u, v) = (a - apex, b - apex);
                let scale = u.norm().max(v.norm()).max(T::one());
                let tiny = T::lit(1e-12) * scale;
                let angle = signed_angle(u, v, Vec3::unit_z());
                let on_segment = u.cross(v).z.abs() <= tiny * (b - a).norm() && u.dot(v) <= T::zero();
                if u.norm() <= tiny || v.norm() <= tiny || on_segment {
                    return Err(Error::PointOnContour { x: apex.x.as_f64(), y: apex.y.as_f64() });
                }
                Ok(*flux * angle / T::tau())
            }
            FieldSpec::FiniteSolenoid { radius, flux, .. } => {
                let area = triangle_disc_area((a.x - apex.x, a.y - apex.y), (b.x - apex.x, b.y - apex.y), *radius);
                Ok(*flux / (T::PI() * *radius * *radius) * area)
            }
            FieldSpec::UniformB { b0 } => Ok(b0.dot((a - apex).cross(b - apex)) * T::lit(0.5)),
            FieldSpec::GaugeShifted { base, .. } => base.triangle_flux(apex, a, b, resolution),
            FieldSpec::MonopoleStringSouth { .. } | FieldSpec::MonopoleStringNorth { .. } => {
                SampledField(|r| self.magnetic_field(r)).triangle_flux(apex, a, b, resolution)
            }
        }
    }
}

/// `∬ B·da` over the planar surface spanned by a closed contour, oriented
/// right-handedly with respect to the traversal.
pub fn enclosed_flux_stokes<T, S>(source: &S, contour: &Path<T>, surface_resolution: usize) -> Result<T>
where
    T: Real,
    S: SurfaceFlux<T> + ?Sized,
{
    if !contour.is_closed() {
        return Err(Error::InvalidPath("surface flux needs a closed contour".into()));
    }
    contour_plane(contour)?;
    let apex = source.fan_apex(contour)?;
    let mut total = T::zero();
    for (a, b) in contour.segments() {
        total = total + source.triangle_flux(apex, a, b, surface_resolution)?;
    }
    Ok(total)
}

/// Signed winding number of a planar contour (projected on the xy plane) about a point.
pub fn winding_number<T: Real>(contour: &Path<T>, point: Vec3<T>) -> Result<i64> {
    let scale = contour.extent().max(point.norm()).max(T::one());
    let tiny = T::lit(1e-12) * scale;
    let mut total = T::zero();
    let p = Vec3::new(point.x, point.y, T::zero());
    for (a, b) in contour.segments() {
        let u = Vec3::new(a.x, a.y, T::zero()) - p;
        let v = Vec3::new(b.x, b.y, T::zero()) - p;
        let seg = v - u;
        // distance from the point to the segment
        let t = if seg.norm_sq() > T::zero() {
            (-u.dot(seg) / seg.norm_sq()).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        if (u + seg * t).norm() <= tiny {
            return Err(Error::PointOnContour { x: point.x.as_f64(), y: point.y.as_f64() });
        }
        total = total + signed_angle(u, v, Vec3::unit_z());
    }
    if !contour.is_closed() {
        return Err(Error::InvalidPath("winding number needs a closed contour".into()));
    }
    Ok((total / T::tau()).round().to_i64().unwrap_or(0))
}

/// Flux of `B` through the spherical cap of the given radius centred on the
/// origin, around `axis`, with polar half-angle `half_angle`; outward normal.
pub fn spherical_cap_flux<T, F>(sampler: F, radius: T, axis: Vec3<T>, half_angle: T, resolution: usize) -> Result<T>
where
    T: Real,
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    let n = axis / axis.norm();
    // orthonormal frame around n
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
    let rule = FixedRule::<T>::gauss_legendre(8);
    let panels = resolution.max(1);
    let hth = half_angle / T::from_usize_lossy(panels);
    let hph = T::tau() / T::from_usize_lossy(panels);
    let mut acc = T::zero();
    for pt in 0..panels {
        for (&xt, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let th = (T::from_usize_lossy(pt) + xt) * hth;
            let (st, ct) = th.sin_cos();
            for pp in 0..panels {
                for (&xp, &wp) in rule.nodes.iter().zip(&rule.weights) {
                    let ph = (T::from_usize_lossy(pp) + xp) * hph;
                    let (sp, cp) = ph.sin_cos();
                    let dir = n * ct + (e1 * cp + e2 * sp) * st;
                    let b = sampler(dir * radius)?;
                    acc = acc + wt * wp * b.dot(dir) * st;
                }
            }
        }
    }
    Ok(acc * hth * hph * radius * radius)
}
