//! Fixed and adaptive one-dimensional quadrature on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence, in `f64`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    Midpoint { samples: usize },
    GaussLegendre { points: usize },
}

/// Per-segment quadrature with bisection refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub rule: Rule,
    /// Refinement stops once a bisection changes the estimate by less than
    /// `tolerance · max(1, |estimate|)`.
    pub tolerance: f64,
    pub max_depth: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rule: Rule::GaussLegendre { points: 8 }, tolerance: 1e-10, max_depth: 40 }
    }
}

impl QuadratureSpec {
    pub fn gauss(points: usize, tolerance: f64) -> Self {
        Self { rule: Rule::GaussLegendre { points }, tolerance, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let n = match self.rule {
            Rule::Midpoint { samples } => samples,
            Rule::GaussLegendre { points } => points,
        };
        if n < 2 {
            return Err(Error::InvalidParameter(format!("quadrature needs at least 2 samples per segment, got {n}")));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn fixed<T: Real>(&self) -> FixedRule<T> {
        match self.rule {
            Rule::Midpoint { samples } => FixedRule::midpoint(samples),
            Rule::GaussLegendre { points } => FixedRule::gauss_legendre(points),
        }
    }

    /// Adaptive integral of `f` over `[0, 1]`.
    pub fn integrate_unit<T, F>(&self, f: &F) -> Result<T>
    where
        T: Real,
        F: Fn(T) -> Result<T>,
    {
        self.validate()?;
        let rule = self.fixed::<T>();
        let whole = rule.apply(f, T::zero(), T::one())?;
        adapt(&rule, f, T::zero(), T::one(), whole, T::lit(self.tolerance), 0, self.max_depth)
    }
}

#[allow(clippy::too_many_arguments)]
fn adapt<T, F>(rule: &FixedRule<T>, f: &F, a: T, b: T, whole: T, tol: T, depth: usize, max_depth: usize) -> Result<T>
where
    T: Real,
    F: Fn(T) -> Result<T>,
{
    let mid = (a + b) * T::lit(0.5);
    let left = rule.apply(f, a, mid)?;
    let right = rule.apply(f, mid, b)?;
    let halves = left + right;
    let change = (halves - whole).abs();
    if change <= tol * halves.abs().max(T::one()) {
        return Ok(halves);
    }
    if depth >= max_depth {
        return Err(Error::NoConvergence { depth, change: change.as_f64() });
    }
    let half_tol = tol * T::lit(0.5);
    Ok(adapt(rule, f, a, mid, left, half_tol, depth + 1, max_depth)?
        + adapt(rule, f, mid, b, right, half_tol, depth + 1, max_depth)?)
}

/// Nodes in `[0, 1]` and weights summing to one.
#[derive(Debug, Clone)]
pub struct FixedRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> FixedRule<T> {
    pub fn gauss_legendre(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            nodes: x.iter().map(|&x| T::lit(0.5 * (x + 1.0))).collect(),
            weights: w.iter().map(|&w| T::lit(0.5 * w)).collect(),
        }
    }

    pub fn midpoint(n: usize) -> Self {
        let h = 1.0 / n as f64;
        Self { nodes: (0..n).map(|i| T::lit((i as f64 + 0.5) * h)).collect(), weights: vec![T::lit(h); n] }
    }

    pub fn apply<F>(&self, f: &F, a: T, b: T) -> Result<T>
    where
        F: Fn(T) -> Result<T>,
    {
        let len = b - a;
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + w * f(a + len * x)?;
        }
        Ok(acc * len)
    }
}
