//! Cayley factors `(1 + iaH)⁻¹(1 − iaH)` for a family of independent 1D
//! hopping Hamiltonians, with the Thomas factorization precomputed.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

const BLOCK: usize = 4;

/// How the lines sit in a buffer of `len · count` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Line after line: element `k` of line `l` at `l·len + k`.
    Contiguous,
    /// Lines side by side: element `k` of line `l` at `k·count + l`.
    Interleaved,
}

/// `H` on one line: diagonal `2t` on active sites, hopping `H[k][k+1] = −t e^{−iθ_k}`
/// between active neighbours, nothing on inactive sites (which are forced to zero).
#[derive(Debug, Clone)]
pub struct CayleyLines<T> {
    len: usize,
    count: usize,
    layout: Layout,
    /// `1 − ia·2t`.
    diag: Complex<T>,
    /// `ia·H[k][k+1]`, one slot per site with the last one zero.
    up: Vec<Complex<T>>,
    cprime: Vec<Complex<T>>,
    /// Inverse pivots, zero on inactive sites.
    inv: Vec<Complex<T>>,
}

impl<T: Real> CayleyLines<T> {
    pub fn new(
        len: usize,
        count: usize,
        a: T,
        t: T,
        active: impl Fn(usize, usize) -> bool,
        theta: impl Fn(usize, usize) -> T,
    ) -> Result<Self> {
        Self::with_layout(Layout::Contiguous, len, count, a, t, active, theta)
    }

    pub fn with_layout(
        layout: Layout,
        len: usize,
        count: usize,
        a: T,
        t: T,
        active: impl Fn(usize, usize) -> bool,
        theta: impl Fn(usize, usize) -> T,
    ) -> Result<Self> {
        if len < 2 || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal lines need len >= 2 and count >= 1, got {len}x{count}"
            )));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let ia = Complex::new(T::zero(), a);
        let two_t = t + t;
        let total = len * count;
        let mut s = Self {
            len,
            count,
            layout,
            diag: one - ia * two_t,
            up: vec![zero; total],
            cprime: vec![zero; total],
            inv: vec![zero; total],
        };
        for line in 0..count {
            let at = |k: usize| match layout {
                Layout::Contiguous => line * len + k,
                Layout::Interleaved => k * count + line,
            };
            let on: Vec<bool> = (0..len).map(|k| active(line, k)).collect();
            let mut prev_c = zero;
            let mut prev_up = zero;
            for k in 0..len {
                let up = if k + 1 < len && on[k] && on[k + 1] {
                    ia * Complex::from_polar(-t, -theta(line, k))
                } else {
                    zero
                };
                let diag = if on[k] { one + ia * two_t } else { one };
                let den = diag + prev_up.conj() * prev_c;
                if !(den.norm() > T::epsilon()) || !den.re.is_finite() || !den.im.is_finite() {
                    return Err(Error::LinearSolveFailure { row: line * len + k });
                }
                let m = one / den;
                prev_c = up * m;
                prev_up = up;
                let n = at(k);
                s.up[n] = up;
                s.cprime[n] = prev_c;
                s.inv[n] = if on[k] { m } else { zero };
            }
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Applies the factor to a block of whole contiguous lines, stepping them
    /// in lockstep so the recurrences of different lines overlap.
    fn apply_block(&self, first: usize, block: &mut [Complex<T>], work: &mut Vec<Complex<T>>) {
        let n = self.len;
        let lines = block.len() / n;
        let zero = Complex::new(T::zero(), T::zero());
        work.clear();
        work.resize(block.len(), zero);
        let base = first * n;
        let up = &self.up[base..base + block.len()];
        let cp = &self.cprime[base..base + block.len()];
        let inv = &self.inv[base..base + block.len()];
        let mut carry = [zero; BLOCK];
        let mut up_prev = [zero; BLOCK];
        for k in 0..n {
            for l in 0..lines {
                let at = l * n + k;
                let p = block[at];
                let mut b = self.diag * p + up_prev[l].conj() * carry[l];
                if k + 1 < n {
                    b = b - up[at] * block[at + 1];
                }
                let y = b * inv[at];
                work[at] = y;
                carry[l] = p + y;
                up_prev[l] = up[at];
            }
        }
        for l in 0..lines {
            let at = l * n + n - 1;
            block[at] = work[at];
        }
        for k in (0..n - 1).rev() {
            for l in 0..lines {
                let at = l * n + k;
                block[at] = work[at] - cp[at] * block[at + 1];
            }
        }
    }

    /// Applies the factor to every line of `data`, which must follow [`Self::layout`].
    pub fn apply_all(&self, data: &mut [Complex<T>]) {
        assert_eq!(data.len(), self.len * self.count, "buffer does not match the line family");
        match self.layout {
            Layout::Contiguous => data
                .par_chunks_mut(self.len * BLOCK)
                .enumerate()
                .for_each_init(Vec::new, |work, (b, chunk)| self.apply_block(b * BLOCK, chunk, work)),
            Layout::Interleaved => self.apply_interleaved(data),
        }
    }

    /// Sweeps all lines at once, one site index at a time, so memory is read in order.
    fn apply_interleaved(&self, data: &mut [Complex<T>]) {
        let (n, w) = (self.len, self.count);
        let zero = Complex::new(T::zero(), T::zero());
        // carry = ψ_{k−1} + y_{k−1}
        let mut carry = vec![zero; w];
        for k in 0..n {
            let (head, tail) = data.split_at_mut((k + 1) * w);
            let row = &mut head[k * w..];
            let next: &[Complex<T>] = if k + 1 < n { &tail[..w] } else { &[] };
            let up = &self.up[k * w..(k + 1) * w];
            let up_prev = if k > 0 { &self.up[(k - 1) * w..k * w] } else { &self.up[..0] };
            let inv = &self.inv[k * w..(k + 1) * w];
            for l in 0..w {
                let p = row[l];
                let mut b = self.diag * p;
                if k + 1 < n {
                    b = b - up[l] * next[l];
                }
                if k > 0 {
                    b = b + up_prev[l].conj() * carry[l];
                }
                let y = b * inv[l];
                row[l] = y;
                carry[l] = p + y;
            }
        }
        for k in (0..n - 1).rev() {
            let (head, tail) = data.split_at_mut((k + 1) * w);
            let row = &mut head[k * w..];
            let next = &tail[..w];
            let cp = &self.cprime[k * w..(k + 1) * w];
            for l in 0..w {
                row[l] = row[l] - cp[l] * next[l];
            }
        }
    }
}
