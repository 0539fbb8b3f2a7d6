use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge_fields::PhysConstants;
use crate::scalar::{wrap_angle, Real};

/// Far-field two-source model: slits at `(0, y₁)` and `(0, y₂)`, screen at `x = L`.
/// Slit 1 is the lower one; the flux sits between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSlitModel<T> {
    pub slit_y: [T; 2],
    pub screen_distance: T,
    pub wavenumber: T,
}

/// `|e^{iα} ψ₁ + ψ₂|²` on the screen with `α = (q/ħc)Φ` and cylindrical waves
/// `ψₛ = e^{ik rₛ}/√rₛ`.
///
/// The loop source → slit 1 → screen → slit 2 → source runs counterclockwise
/// around the flux, so path 1 carries the extra phase `+(q/ħc)Φ`.
pub fn analytic_two_path_pattern<T: Real>(
    model: &TwoSlitModel<T>,
    flux: T,
    constants: &PhysConstants<T>,
    screen_y: &[T],
) -> Result<Vec<T>> {
    let [y1, y2] = model.slit_y;
    let sep = (y2 - y1).abs();
    if !(model.wavenumber > T::zero()) || !(model.screen_distance > sep) || !(y1 < y2) {
        return Err(Error::InvalidParameter(
            "two-slit model needs k > 0, y1 < y2 and a screen farther than the slit separation".into(),
        ));
    }
    let alpha = constants.coupling() * flux;
    let l = model.screen_distance;
    Ok(screen_y
        .iter()
        .map(|&y| {
            let wave = |ys: T, extra: T| {
                let r = l.hypot(y - ys);
                Complex::from_polar(T::one() / r.sqrt(), model.wavenumber * r + extra)
            };
            (wave(y1, alpha) + wave(y2, T::zero())).norm_sqr()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePhase<T> {
    /// `arg(F_test · conj F_ref)` at the dominant fringe frequency, in `(-π, π]`.
    pub delta: T,
    /// `2π/κ*` in coordinate units.
    pub period: T,
    pub peak: T,
    pub floor: T,
}

/// Smallest DFT bin searched; fewer cycles than this across the window are not fringes.
pub const MIN_FRINGE_BIN: usize = 3;
const OVERSAMPLE: usize = 8;
const FLOOR_FACTOR: f64 = 10.0;

/// Relative fringe phase of `i_test` with respect to `i_ref` on uniform `coords`.
///
/// Both profiles are mean-subtracted and Hann-windowed; the frequency `κ*`
/// maximizing `|F_ref|` is located on an oversampled grid from bin
/// [`MIN_FRINGE_BIN`] up to Nyquist.
pub fn extract_fringe_phase<T: Real>(i_ref: &[T], i_test: &[T], coords: &[T]) -> Result<FringePhase<T>> {
    let n = coords.len();
    if i_ref.len() != n || i_test.len() != n {
        return Err(Error::InvalidParameter("profiles and coordinates differ in length".into()));
    }
    if n < 4 * MIN_FRINGE_BIN {
        return Err(Error::InvalidParameter(format!("need at least {} samples", 4 * MIN_FRINGE_BIN)));
    }
    let span = coords[n - 1] - coords[0];
    let step = span / T::from_usize_lossy(n - 1);
    if !(step > T::zero()) {
        return Err(Error::InvalidParameter("coordinates must increase".into()));
    }
    let prepare = |v: &[T]| -> Vec<T> {
        let mean = v.iter().fold(T::zero(), |a, x| a + *x) / T::from_usize_lossy(n);
        v.iter()
            .enumerate()
            .map(|(k, x)| {
                let w =
                    T::lit(0.5) - T::lit(0.5) * (T::tau() * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1)).cos();
                (*x - mean) * w
            })
            .collect()
    };
    let (r, t) = (prepare(i_ref), prepare(i_test));
    let dft = |v: &[T], kappa: T| -> Complex<T> {
        v.iter().enumerate().fold(Complex::new(T::zero(), T::zero()), |acc, (k, x)| {
            acc + Complex::from_polar(*x, -kappa * step * T::from_usize_lossy(k))
        })
    };
    let full = T::from_usize_lossy(n) * step;
    let bin_kappa = |b: T| T::tau() * b / full;
    let mut mags: Vec<T> = (1..=n / 2).map(|b| dft(&r, bin_kappa(T::from_usize_lossy(b))).norm()).collect();
    let (mut best_k, mut best) = (T::zero(), T::zero());
    for s in MIN_FRINGE_BIN * OVERSAMPLE..=(n / 2) * OVERSAMPLE {
        let kappa = bin_kappa(T::from_usize_lossy(s) / T::from_usize_lossy(OVERSAMPLE));
        let m = dft(&r, kappa).norm();
        if m > best {
            best = m;
            best_k = kappa;
        }
    }
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = mags[mags.len() / 2];
    let scale = i_ref.iter().fold(T::zero(), |a, x| a + x.abs());
    let floor = (T::lit(FLOOR_FACTOR) * median).max(T::lit(1e-12) * scale);
    if !(best > floor) {
        return Err(Error::NoFringe { peak: best.as_f64(), floor: floor.as_f64() });
    }
    let cross = dft(&t, best_k) * dft(&r, best_k).conj();
    Ok(FringePhase { delta: wrap_angle(cross.arg()), period: T::tau() / best_k, peak: best, floor })
}

/// `‖a − b‖₂ / ‖b‖₂`.
pub fn relative_l2<T: Real>(a: &[T], b: &[T]) -> T {
    let (num, den) =
        a.iter().zip(b).fold((T::zero(), T::zero()), |(n, d), (x, y)| (n + (*x - *y) * (*x - *y), d + *y * *y));
    (num / den).sqrt()
}
