use std::collections::VecDeque;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::WaveField;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::gauge_fields::{FieldSpec, PhysConstants};
use crate::path_integrals::{spec_line_integral, Path};
use crate::quadrature::QuadratureSpec;
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpanningTree {
    #[default]
    BreadthFirst,
    DepthFirst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbSolutionOptions {
    pub tree: SpanningTree,
    pub quadrature: QuadratureSpec,
    /// Largest accepted `|φ_b − φ_a − θ_ab|` on edges outside the tree;
    /// `None` skips the check.
    pub holonomy_tolerance: Option<f64>,
}

impl Default for AbSolutionOptions {
    fn default() -> Self {
        Self { tree: SpanningTree::BreadthFirst, quadrature: QuadratureSpec::default(), holonomy_tolerance: Some(1e-8) }
    }
}

#[derive(Debug, Clone)]
pub struct AbSolution<T> {
    pub field: WaveField<T>,
    /// Nodes reached from the anchor inside the region.
    pub in_region: Vec<bool>,
    /// `(q/ħc) ∫_{anchor → node} A·dl` along the tree; zero outside the region.
    pub phase: Vec<T>,
    /// Largest non-tree edge mismatch seen.
    pub max_holonomy: T,
}

/// `ψ(r) = exp(i(q/ħc) ∫_{anchor → r} A·dl) ψ₀(r)` on a region of the lattice,
/// integrating along a spanning tree of lattice edges.
pub fn construct_ab_solution<T: Real>(
    psi0: &WaveField<T>,
    spec: &FieldSpec<T>,
    anchor: Vec3<T>,
    region: &[bool],
    constants: &PhysConstants<T>,
    options: &AbSolutionOptions,
) -> Result<AbSolution<T>> {
    let grid = psi0.grid();
    if region.len() != grid.len() {
        return Err(Error::GridMismatch(format!("region mask has {} entries for {} nodes", region.len(), grid.len())));
    }
    options.quadrature.validate()?;
    let inside = |k: usize| region[k] && !grid.is_wall(k);
    let (ai, aj) = grid.nearest(anchor).ok_or(Error::AnchorOutsideRegion)?;
    let root = grid.index(ai, aj);
    if !inside(root) {
        return Err(Error::AnchorOutsideRegion);
    }
    let coupling = constants.coupling();
    let edge_angle = |a: usize, b: usize| -> Result<T> {
        let (ia, ja) = grid.coords(a);
        let (ib, jb) = grid.coords(b);
        let path = Path::open(vec![grid.position(ia, ja), grid.position(ib, jb)])?;
        Ok(coupling * spec_line_integral(spec, &path, psi0.time(), &options.quadrature)?)
    };

    let n = grid.len();
    let mut reached = vec![false; n];
    let mut phase = vec![T::zero(); n];
    reached[root] = true;
    match options.tree {
        SpanningTree::BreadthFirst => {
            let mut queue = VecDeque::from([root]);
            while let Some(a) = queue.pop_front() {
                for b in neighbours(grid, a) {
                    if inside(b) && !reached[b] {
                        reached[b] = true;
                        phase[b] = phase[a] + edge_angle(a, b)?;
                        queue.push_back(b);
                    }
                }
            }
        }
        SpanningTree::DepthFirst => {
            let mut stack = vec![(root, neighbours(grid, root))];
            while let Some((a, rest)) = stack.last_mut() {
                let a = *a;
                match rest.pop() {
                    Some(b) if inside(b) && !reached[b] => {
                        reached[b] = true;
                        phase[b] = phase[a] + edge_angle(a, b)?;
                        stack.push((b, neighbours(grid, b)));
                    }
                    Some(_) => {}
                    None => {
                        stack.pop();
                    }
                }
            }
        }
    }

    let mut max_holonomy = T::zero();
    if let Some(tol) = options.holonomy_tolerance {
        for a in 0..n {
            if !reached[a] {
                continue;
            }
            let (i, j) = grid.coords(a);
            let forward = [(i + 1 < grid.nx()).then(|| a + 1), (j + 1 < grid.ny()).then(|| a + grid.nx())];
            for b in forward.into_iter().flatten() {
                if reached[b] {
                    let h = (phase[b] - phase[a] - edge_angle(a, b)?).abs();
                    max_holonomy = max_holonomy.max(h);
                }
            }
        }
        if max_holonomy > T::lit(tol) {
            return Err(Error::RegionNotSimplyConnected { holonomy: max_holonomy.as_f64() });
        }
    }

    let field = psi0.map_nodes(|k, z| if reached[k] { z * Complex::from_polar(T::one(), phase[k]) } else { z });
    Ok(AbSolution { field, in_region: reached, phase, max_holonomy })
}

fn neighbours<T: Real>(grid: &Grid<T>, k: usize) -> Vec<usize> {
    let (i, j) = grid.coords(k);
    let mut out = Vec::with_capacity(4);
    if i > 0 {
        out.push(k - 1);
    }
    if j > 0 {
        out.push(k - grid.nx());
    }
    if i + 1 < grid.nx() {
        out.push(k + 1);
    }
    if j + 1 < grid.ny() {
        out.push(k + grid.nx());
    }
    out
}

/// Region nodes whose four neighbours all exist and lie in the region.
pub fn region_interior<T: Real>(grid: &Grid<T>, region: &[bool]) -> Vec<bool> {
    (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            region[k]
                && i > 0
                && j > 0
                && i + 1 < grid.nx()
                && j + 1 < grid.ny()
                && neighbours(grid, k).into_iter().all(|b| region[b])
        })
        .collect()
}
