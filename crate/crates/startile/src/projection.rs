//! Convex slicing of low-level cylinders by coordinate projections.
//!
//! For levels `0 < k <= N` the Voronoi cells are replaced by coordinate
//! cubes of side `2r` in `V_k`, pulled back through the projection
//! `P_k(x) = (x_1, ..., x_k, 0, ...)`. Cylinder tiles are convex, cubes
//! are convex, so the sliced tiles are convex; everything else falls back
//! to the Voronoi refinement.

use serde::{Deserialize, Serialize};

use crate::cylinder::CylinderTileId;
use crate::error::{Error, Result};
use crate::lds;
use crate::space::{NormSpec, SpaceDescriptor};
use crate::tiling::Tiling;
use crate::voronoi::{DerivedConstants, FullTileId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    /// Projection levels `1..=n_levels` use cube slicing.
    pub n_levels: usize,
    /// Cube side, fixed to `2r`.
    pub side: f64,
    /// `|P_k|` for `k = 1..=n_levels`.
    pub p_norms: Vec<f64>,
    /// `max_k |P_k|`.
    pub r_n: f64,
    /// Outer radius of the cube cells in the ambient norm.
    pub t_n: f64,
    /// True when the projection norms are sampled lower bounds rather than
    /// exact values.
    pub estimated: bool,
}

impl ProjectionConfig {
    /// Builds the configuration for a space. Coordinate projections have
    /// norm one in every lp space by 1-unconditionality; custom norms get
    /// a sampled lower-bound estimate, flagged as such.
    pub fn for_space(space: &SpaceDescriptor, n_levels: usize, r: f64) -> Result<ProjectionConfig> {
        if n_levels == 0 || n_levels >= space.dim {
            return Err(Error::Config(format!(
                "projection levels must satisfy 1 <= N < dim, got N = {n_levels}"
            )));
        }
        let mut p_norms = Vec::with_capacity(n_levels);
        let mut estimated = false;
        for k in 1..=n_levels {
            match space.norm {
                NormSpec::Lp { .. } => p_norms.push(1.0),
                NormSpec::Polytope { .. } => {
                    estimated = true;
                    p_norms.push(estimate_projection_norm(space, k, 100_000, 17));
                }
            }
        }
        let r_n = p_norms.iter().cloned().fold(1.0f64, f64::max);
        let t_n = (1..=n_levels)
            .map(|k| r * cube_outer_factor(space, k))
            .fold(0.0f64, f64::max);
        Ok(ProjectionConfig { n_levels, side: 2.0 * r, p_norms, r_n, t_n, estimated })
    }

    /// Normality bound of the sliced tiling:
    /// `(R_N / r) * (R (1 + R_N) + t_N)`.
    pub fn k_bound(&self, constants: &DerivedConstants, r: f64) -> f64 {
        (self.r_n / r) * (constants.tube_radius * (1.0 + self.r_n) + self.t_n)
    }

    /// Coarse estimate `(1/r) (R (N + sqrt(N)) + 2N)` available when the
    /// projections are replaced by near-optimal ones of norm close to
    /// `sqrt(N)`. Reported for reference; coordinate projections do
    /// better, so nothing asserts it.
    pub fn coarse_k_estimate(&self, constants: &DerivedConstants, r: f64) -> f64 {
        let n = self.n_levels as f64;
        (constants.tube_radius * (n + n.sqrt()) + 2.0 * n) / r
    }
}

/// Largest ambient norm over the boundary of the coordinate cube
/// `[-r, r]^k`, divided by `r`. Closed form for lp (the corner), sampled
/// for custom norms.
pub fn cube_outer_factor(space: &SpaceDescriptor, k: usize) -> f64 {
    match space.norm {
        NormSpec::Lp { p } => {
            if p.is_infinite() {
                1.0
            } else {
                (k as f64).powf(1.0 / p)
            }
        }
        NormSpec::Polytope { .. } => {
            let mut worst = 0.0f64;
            let mut mix = lds::SplitMix::new(0xc0de + k as u64);
            for _ in 0..20_000 {
                let mut corner = vec![0.0; space.dim];
                for item in corner.iter_mut().take(k) {
                    *item = if mix.unit() < 0.5 { -1.0 } else { 1.0 };
                }
                worst = worst.max(space.norm(&corner));
            }
            worst
        }
    }
}

/// Smallest ambient norm over the boundary of `[-r, r]^k`, divided by `r`.
/// The minimum sits at a face center for every lp norm.
pub fn cube_inner_factor(space: &SpaceDescriptor, k: usize) -> f64 {
    match space.norm {
        NormSpec::Lp { .. } => 1.0,
        NormSpec::Polytope { .. } => {
            let mut best = f64::INFINITY;
            let mut mix = lds::SplitMix::new(0xface + k as u64);
            for _ in 0..20_000 {
                let mut pt = vec![0.0; space.dim];
                let face = (mix.next_u64() % k as u64) as usize;
                for item in pt.iter_mut().take(k) {
                    *item = mix.uniform(-1.0, 1.0);
                }
                pt[face] = if mix.unit() < 0.5 { -1.0 } else { 1.0 };
                best = best.min(space.norm(&pt));
            }
            best
        }
    }
}

/// Sampled lower bound on `|P_k|`.
fn estimate_projection_norm(space: &SpaceDescriptor, k: usize, samples: usize, seed: u64) -> f64 {
    let mut best = 0.0f64;
    for trial in 0..samples {
        let x = crate::semibeta::random_unit_quotient(space, 0, lds::mix_seed(seed, trial as u64));
        let mut px = vec![0.0; space.dim];
        px[..k].copy_from_slice(&x[..k]);
        best = best.max(space.norm(&px));
    }
    best
}

/// Cube cell index of `v` on the lattice `(side Z)^k`: rounding with
/// half-integers sent toward minus infinity.
pub fn lattice_cube_index(v: &[f64], side: f64) -> Vec<i64> {
    v.iter().map(|x| (x / side - 0.5).ceil() as i64).collect()
}

/// One cube cell of the flag lattice tiling.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeCell {
    pub index: Vec<i64>,
    /// Center coordinates inside the flag (length `k`).
    pub center: Vec<f64>,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

/// Locates `v` in the cube tiling of the `k`-dimensional flag with side
/// `2r`, returning the cell center and its certified ambient radii.
pub fn lattice_tiling_locate(space: &SpaceDescriptor, v: &[f64], r: f64) -> CubeCell {
    let side = 2.0 * r;
    let k = v.len();
    let index = lattice_cube_index(v, side);
    let center: Vec<f64> = index.iter().map(|z| *z as f64 * side).collect();
    CubeCell {
        index,
        center,
        inner_radius: r * cube_inner_factor(space, k),
        outer_radius: r * cube_outer_factor(space, k),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProjectedTileId {
    Voronoi(FullTileId),
    Cube { cyl: CylinderTileId, cell: Vec<i64> },
}

impl ProjectedTileId {
    pub fn level(&self) -> usize {
        match self {
            ProjectedTileId::Voronoi(id) => id.level(),
            ProjectedTileId::Cube { cyl, .. } => cyl.level(),
        }
    }
}

impl Tiling {
    /// Locates `x` in the projection-sliced tiling: cube cells for
    /// `0 < k <= N`, the Voronoi refinement otherwise. Level-zero tiles
    /// coincide in both refinements.
    pub fn locate_projection(&self, x: &[f64], cfg: &ProjectionConfig) -> Result<ProjectedTileId> {
        let cyl = self.locate_cylinder(x);
        let k = cyl.level();
        if k == 0 || k > cfg.n_levels {
            return Ok(ProjectedTileId::Voronoi(self.locate_full(x)?));
        }
        let cell = lattice_cube_index(&x[..k], cfg.side);
        Ok(ProjectedTileId::Cube { cyl, cell })
    }

    /// Designated center `axis + cube center` of a cube-sliced tile.
    pub fn projected_center(&self, id: &ProjectedTileId, cfg: &ProjectionConfig) -> Result<Vec<f64>> {
        match id {
            ProjectedTileId::Voronoi(full) => self.full_center(full),
            ProjectedTileId::Cube { cyl, cell } => {
                let mut center = self.cylinder_axis(cyl)?;
                for (i, z) in cell.iter().enumerate() {
                    center[i] += *z as f64 * cfg.side;
                }
                Ok(center)
            }
        }
    }

    /// Membership with `tol` slack; cube membership bounds each projected
    /// coordinate by half the side.
    pub fn projected_member(
        &self,
        x: &[f64],
        id: &ProjectedTileId,
        cfg: &ProjectionConfig,
        tol: f64,
    ) -> bool {
        match id {
            ProjectedTileId::Voronoi(full) => self.is_member(x, full, tol),
            ProjectedTileId::Cube { cyl, cell } => {
                let k = cyl.level();
                if !self.quotient_tile_contains(x, &cyl.qtile, tol) || !self.central_above(x, k, tol)
                {
                    return false;
                }
                let half = cfg.side / 2.0;
                cell.iter()
                    .enumerate()
                    .all(|(i, z)| (x[i] - *z as f64 * cfg.side).abs() <= half + tol)
            }
        }
    }
}
