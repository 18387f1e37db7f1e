//! Voronoi refinement of the cylinder tiles.
//!
//! Each flag `V_k` carries a maximal `2r`-separated net `{d_i}` with
//! `d_0 = 0`. A cylinder tile intersected with the first-index Voronoi
//! cell of its net produces the final starlike tile; the designated center
//! is `axis + d_i`.
//!
//! Two net realizations back the same contract:
//!
//! * [`GreedyNet`]: the reference greedy scan over a step `r/2` lattice of
//!   `V_k`, ordered by increasing norm then lexicographically. Exact but
//!   exponential in `k`, so it serves custom norms and small horizons.
//! * [`LatticeNet`]: closed-form maximal separated lattices for the lp
//!   family (cubic, or checkerboard where the cube's covering radius is
//!   too large). These answer point location in O(3^k) with no storage,
//!   which is what makes box sampling in five dimensions tractable.
//!
//! A cell is addressed by its integer lattice tuple. Ties in distance
//! resolve to the earliest point in the net's deterministic order, which
//! for both realizations is (norm, lex) on tuples.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::cylinder::{CylinderTileId, TileIdRepr};
use crate::error::{Error, Result};
use crate::lds;
use crate::planar::{TemplateConstants, TemplateVariant};
use crate::space::{lp_norm, NormSpec, SpaceDescriptor};
use crate::tiling::Tiling;

/// Absolute tolerance for distance ties in cell location.
pub const TIE_TOL: f64 = 1e-9;

/// Radii derived from the template constants at a given frame bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Outer tube radius `R` of the cylinder tiles.
    pub tube_radius: f64,
    /// Outer radius `R + 2r` of the refined tiles.
    pub tile_radius: f64,
    /// Normality bound `(R + 2r) / r`.
    pub k_bound: f64,
    pub delta_eff: f64,
}

impl DerivedConstants {
    pub fn from_template(c: &TemplateConstants, delta_eff: f64) -> DerivedConstants {
        let q = match c.variant {
            TemplateVariant::A => 8.0,
            TemplateVariant::B => 6.0,
        };
        let tube_radius = c.a + 2.0 * c.b + q / delta_eff;
        let tile_radius = tube_radius + 2.0 * c.r;
        DerivedConstants { tube_radius, tile_radius, k_bound: tile_radius / c.r, delta_eff }
    }
}

/// Address of a Voronoi cell: the integer tuple of its net point in the
/// net's own quantum. Empty at level zero, where the net is `{0}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex(pub Vec<i64>);

impl CellIndex {
    pub fn origin(level: usize) -> CellIndex {
        CellIndex(vec![0; level])
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|z| *z == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullTileId {
    pub cyl: CylinderTileId,
    pub cell: CellIndex,
}

impl FullTileId {
    pub fn level(&self) -> usize {
        self.cyl.level()
    }
}

// Clone of Vec makes FullTileId non-Copy; spell out the common ctor.
impl FullTileId {
    pub fn new(cyl: CylinderTileId, cell: CellIndex) -> Self {
        FullTileId { cyl, cell }
    }
}

impl std::fmt::Display for FullTileId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} i={:?}", self.cyl, self.cell.0)
    }
}

impl Serialize for FullTileId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut repr = TileIdRepr::from(self.cyl);
        repr.i = Some(self.cell.0.clone());
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FullTileId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = TileIdRepr::deserialize(d)?;
        let cell = CellIndex(repr.i.clone().ok_or_else(|| serde::de::Error::custom("missing i"))?);
        let cyl = CylinderTileId::try_from(repr).map_err(serde::de::Error::custom)?;
        Ok(FullTileId { cyl, cell })
    }
}

/// Compares lattice tuples by (norm, lex) for the given exponent. This is
/// the scan order of the reference greedy net, so first-index tie rules
/// agree across realizations.
pub(crate) fn lattice_order(p: f64, a: &[i64], b: &[i64]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let key = |z: &[i64]| -> f64 {
        if p.is_infinite() {
            z.iter().map(|v| v.abs()).max().unwrap_or(0) as f64
        } else if p == 1.0 {
            z.iter().map(|v| v.abs()).sum::<i64>() as f64
        } else if p == 2.0 {
            z.iter().map(|v| (v * v) as f64).sum()
        } else {
            z.iter().map(|v| (v.abs() as f64).powf(p)).sum()
        }
    };
    match key(a).partial_cmp(&key(b)).unwrap_or(Ordering::Equal) {
        Ordering::Equal => a.cmp(b),
        ord => ord,
    }
}

/// Closed-form maximal `2r`-separated lattice in `V_k` for an lp norm.
#[derive(Clone, Debug)]
pub struct LatticeNet {
    pub level: usize,
    pub p: f64,
    /// Lattice quantum: net points are `step * z` for admitted tuples `z`.
    pub step: f64,
    /// Checkerboard (even coordinate sum) sublattice instead of the cube.
    pub checkerboard: bool,
    pub separation: f64,
    pub covering: f64,
}

/// Shrink factor applied when a lattice sits exactly on the maximality
/// boundary; keeps separation within the documented 1e-9 slack while
/// making the covering radius strictly smaller than the spacing.
const BOUNDARY_SHRINK: f64 = 1.0 - 1e-10;

impl LatticeNet {
    pub fn for_lp(p: f64, level: usize, r: f64) -> Result<LatticeNet> {
        let k = level;
        debug_assert!(k >= 1);
        let spacing = 2.0 * r;
        if p.is_infinite() {
            return Ok(LatticeNet {
                level,
                p,
                step: spacing,
                checkerboard: false,
                separation: spacing,
                covering: r,
            });
        }
        let root = (k as f64).powf(1.0 / p);
        if root < 2.0 - 1e-9 {
            // Cubic lattice: separation = step, covering = step * root / 2.
            return Ok(LatticeNet {
                level,
                p,
                step: spacing,
                checkerboard: false,
                separation: spacing,
                covering: spacing * root / 2.0,
            });
        }
        if root <= 2.0 + 1e-9 {
            let step = spacing * BOUNDARY_SHRINK;
            return Ok(LatticeNet {
                level,
                p,
                step,
                checkerboard: false,
                separation: step,
                covering: step * root / 2.0,
            });
        }
        // Checkerboard D_k: separation = 2^{1/p} * step, covering =
        // step * max(1, root / 2) (deep holes at odd points and at the
        // half-diagonal).
        let sep_factor = 2.0f64.powf(1.0 / p);
        let cover_factor = (root / 2.0).max(1.0);
        let mut step = spacing / sep_factor;
        let mut covering = step * cover_factor;
        if covering >= spacing * (1.0 - 1e-9) {
            step *= BOUNDARY_SHRINK;
            covering = step * cover_factor;
        }
        if covering >= spacing {
            return Err(Error::Unsupported(format!(
                "no closed-form maximal separated lattice for p = {p}, k = {k}"
            )));
        }
        Ok(LatticeNet {
            level,
            p,
            step,
            checkerboard: true,
            separation: step * sep_factor,
            covering,
        })
    }

    fn admits(&self, z: &[i64]) -> bool {
        !self.checkerboard || z.iter().sum::<i64>() % 2 == 0
    }

    pub fn point(&self, z: &[i64]) -> Vec<f64> {
        z.iter().map(|v| *v as f64 * self.step).collect()
    }

    /// Winner and distances for a query `y` split as projected part
    /// `w = y[..k]` and trailing part `y[k..]` measured together in the
    /// lp norm. Returns `(winner, min_dist, min_other)` where `min_other`
    /// is the smallest distance over cells other than the winner.
    fn locate(&self, y: &[f64]) -> (CellIndex, f64, f64) {
        let k = self.level;
        let w = &y[..k];
        let tail = &y[k..];
        let p = self.p;
        let inf = p.is_infinite();
        // Tail contribution is constant across candidates.
        let tail_max = if inf { lp_norm(tail, p) } else { 0.0 };
        let tail_pow: f64 = if inf {
            0.0
        } else if p == 1.0 {
            tail.iter().map(|v| v.abs()).sum()
        } else if p == 2.0 {
            tail.iter().map(|v| v * v).sum()
        } else {
            tail.iter().map(|v| v.abs().powf(p)).sum()
        };
        let dist = |z: &[i64]| -> f64 {
            if inf {
                let mut m = tail_max;
                for (wi, zi) in w.iter().zip(z) {
                    m = m.max((wi - *zi as f64 * self.step).abs());
                }
                m
            } else if p == 1.0 {
                let mut s = tail_pow;
                for (wi, zi) in w.iter().zip(z) {
                    s += (wi - *zi as f64 * self.step).abs();
                }
                s
            } else if p == 2.0 {
                let mut s = tail_pow;
                for (wi, zi) in w.iter().zip(z) {
                    let d = wi - *zi as f64 * self.step;
                    s += d * d;
                }
                s.sqrt()
            } else {
                let mut s = tail_pow;
                for (wi, zi) in w.iter().zip(z) {
                    s += (wi - *zi as f64 * self.step).abs().powf(p);
                }
                s.powf(1.0 / p)
            }
        };

        let base: Vec<i64> = w.iter().map(|v| (v / self.step).round() as i64).collect();
        let reach: i64 = if self.checkerboard { 2 } else { 1 };
        let width = (2 * reach + 1) as usize;
        let total = width.pow(k as u32);
        let mut z = vec![0i64; k];
        let decode = |idx: usize, z: &mut [i64]| {
            let mut rem = idx;
            for (zi, b) in z.iter_mut().zip(&base) {
                *zi = b + (rem % width) as i64 - reach;
                rem /= width;
            }
        };

        let mut best = f64::INFINITY;
        for idx in 0..total {
            decode(idx, &mut z);
            if self.admits(&z) {
                best = best.min(dist(&z));
            }
        }
        debug_assert!(best.is_finite());

        // Flat-tie flood for the sup norm: when the trailing part dominates,
        // every cell in the tie box ties at that value and the first-index
        // rule selects the (norm, lex)-smallest tuple of the whole box.
        let flood: Option<Vec<i64>> = if inf && tail_max + TIE_TOL >= best {
            self.min_order_in_box(w, tail_max + TIE_TOL)
        } else {
            None
        };

        let mut winner: Option<Vec<i64>> =
            flood.clone().filter(|z| dist(z) <= best + TIE_TOL);
        for idx in 0..total {
            decode(idx, &mut z);
            if !self.admits(&z) {
                continue;
            }
            if dist(&z) <= best + TIE_TOL {
                let replace = match &winner {
                    None => true,
                    Some(wz) => lattice_order(p, &z, wz) == std::cmp::Ordering::Less,
                };
                if replace {
                    winner = Some(z.clone());
                }
            }
        }
        let wz = winner.expect("candidate set is nonempty");

        let mut min_other = f64::INFINITY;
        for idx in 0..total {
            decode(idx, &mut z);
            if self.admits(&z) && z != wz {
                min_other = min_other.min(dist(&z));
            }
        }
        // In a sup-norm flood with more than one box cell, some other cell
        // ties at the tail value even if it sits outside the enumeration.
        if inf && tail_max + TIE_TOL >= best {
            if let Some(fz) = &flood {
                let mut box_cells = 1i64;
                for wi in w {
                    let lo = ((wi - tail_max - TIE_TOL) / self.step).ceil() as i64;
                    let hi = ((wi + tail_max + TIE_TOL) / self.step).floor() as i64;
                    box_cells = box_cells.saturating_mul((hi - lo + 1).max(0));
                }
                if box_cells > 1 || *fz != wz {
                    min_other = min_other.min(tail_max);
                }
            }
        }
        (CellIndex(wz), best, min_other)
    }

    /// (norm, lex)-least lattice tuple in the box `|w_i - step z_i| <= c`.
    /// Only used for the sup norm, where the order key is max |z_i|.
    fn min_order_in_box(&self, w: &[f64], c: f64) -> Option<Vec<i64>> {
        let mut lo = Vec::with_capacity(w.len());
        let mut hi = Vec::with_capacity(w.len());
        for wi in w {
            let l = ((wi - c) / self.step).ceil() as i64;
            let h = ((wi + c) / self.step).floor() as i64;
            if l > h {
                return None;
            }
            lo.push(l);
            hi.push(h);
        }
        // Smallest attainable max |z_i|, then the lex-least point with
        // every coordinate bounded by it.
        let mut m = 0i64;
        for (l, h) in lo.iter().zip(&hi) {
            let c = if *l <= 0 && 0 <= *h { 0 } else { l.abs().min(h.abs()) };
            m = m.max(c);
        }
        Some(lo.iter().map(|l| (*l).max(-m)).collect())
    }
}

/// Reference greedy net: scan the step `r/2` lattice of `V_k` inside
/// `B(0, rho)` by (norm, lex) and admit points `2r`-separated from all
/// admitted predecessors. `d_0 = 0` is always first.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreedyNet {
    pub level: usize,
    pub spacing: f64,
    pub grid_step: f64,
    pub rho: f64,
    pub points: Vec<GreedyPoint>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreedyPoint {
    pub tuple: Vec<i64>,
    /// Coordinates in `V_k` (length `k`).
    pub coords: Vec<f64>,
}

/// Guard on the lattice enumeration size; beyond this the greedy scan is
/// not a realistic realization and the caller should use lp lattices.
const MAX_GRID_POINTS: f64 = 4e7;

/// Greedy maximal `2r`-separated net of `V_k` within the horizon `rho`.
pub fn build_separated_net(
    space: &SpaceDescriptor,
    level: usize,
    r: f64,
    rho: f64,
) -> Result<GreedyNet> {
    if !(r > 0.0) || rho < 2.0 * r {
        return Err(Error::Config(format!("need rho >= 2r > 0, got r = {r}, rho = {rho}")));
    }
    let k = level;
    let grid_step = r / 2.0;
    let spacing = 2.0 * r;
    if k == 0 {
        return Ok(GreedyNet {
            level,
            spacing,
            grid_step,
            rho,
            points: vec![GreedyPoint { tuple: vec![], coords: vec![] }],
        });
    }
    let span = (rho / grid_step).floor() as i64;
    let width = 2 * span + 1;
    if (width as f64).powi(k as i32) > MAX_GRID_POINTS {
        return Err(Error::Unsupported(format!(
            "greedy net lattice has ~{width}^{k} points; use an lp lattice net or shrink rho"
        )));
    }

    let pad = |coords: &[f64]| -> Vec<f64> {
        let mut full = vec![0.0; space.dim];
        full[..k].copy_from_slice(coords);
        full
    };

    let mut tuples: Vec<(f64, Vec<i64>)> = Vec::new();
    let total = (width as usize).pow(k as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut z = Vec::with_capacity(k);
        for _ in 0..k {
            z.push((rem % width as usize) as i64 - span);
            rem /= width as usize;
        }
        let coords: Vec<f64> = z.iter().map(|v| *v as f64 * grid_step).collect();
        let norm = space.norm(&pad(&coords));
        if norm <= rho {
            tuples.push((norm, z));
        }
    }
    tuples.sort_by(|(na, za), (nb, zb)| {
        na.partial_cmp(nb).unwrap().then_with(|| za.cmp(zb))
    });

    let mut points: Vec<GreedyPoint> = Vec::new();
    for (_, z) in tuples {
        let coords: Vec<f64> = z.iter().map(|v| *v as f64 * grid_step).collect();
        let ok = points.iter().all(|p| {
            let diff: Vec<f64> =
                coords.iter().zip(&p.coords).map(|(a, b)| a - b).collect();
            space.norm(&pad(&diff)) >= spacing - 1e-12
        });
        if ok {
            points.push(GreedyPoint { tuple: z, coords });
        }
    }
    debug_assert!(points[0].coords.iter().all(|v| *v == 0.0));
    Ok(GreedyNet { level, spacing, grid_step, rho, points })
}

impl GreedyNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_by_tuple(&self, tuple: &[i64]) -> Option<&GreedyPoint> {
        self.points.iter().find(|p| p.tuple == tuple)
    }

    /// First index attaining the minimal distance within [`TIE_TOL`].
    /// Errors when the flag component of `y` reaches beyond `rho - 2r`,
    /// where greedy maximality is no longer certified.
    pub fn locate(&self, space: &SpaceDescriptor, y: &[f64]) -> Result<(usize, f64, f64)> {
        let k = self.level;
        let mut flag_part = vec![0.0; space.dim];
        flag_part[..k].copy_from_slice(&y[..k]);
        if space.norm(&flag_part) > self.rho - self.spacing {
            return Err(Error::OutOfHorizon { rho: self.rho });
        }
        let mut best = f64::INFINITY;
        let mut dists = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let mut diff = y.to_vec();
            for (d, c) in diff.iter_mut().zip(&p.coords) {
                *d -= c;
            }
            let d = space.norm(&diff);
            dists.push(d);
            best = best.min(d);
        }
        let winner = dists.iter().position(|d| *d <= best + TIE_TOL).unwrap();
        let min_other = dists
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != winner)
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min);
        Ok((winner, dists[winner], min_other))
    }
}

pub(crate) enum NetHandle {
    /// Level zero: the single point 0.
    Trivial,
    Lattice(LatticeNet),
    Greedy(Mutex<GreedyNet>),
}

/// Initial greedy horizon; doubles lazily on [`Error::OutOfHorizon`].
const GREEDY_INITIAL_RHO: f64 = 2.0;

impl NetHandle {
    pub(crate) fn for_level(space: &SpaceDescriptor, level: usize, r: f64) -> Result<NetHandle> {
        if level == 0 {
            return Ok(NetHandle::Trivial);
        }
        match space.norm {
            NormSpec::Lp { p } => match LatticeNet::for_lp(p, level, r) {
                Ok(net) => Ok(NetHandle::Lattice(net)),
                Err(_) => Ok(NetHandle::Greedy(Mutex::new(build_separated_net(
                    space,
                    level,
                    r,
                    GREEDY_INITIAL_RHO.max(4.0 * r),
                )?))),
            },
            NormSpec::Polytope { .. } => Ok(NetHandle::Greedy(Mutex::new(build_separated_net(
                space,
                level,
                r,
                GREEDY_INITIAL_RHO.max(4.0 * r),
            )?))),
        }
    }
}

/// Distance profile of a query against a level net.
pub(crate) struct CellProfile {
    pub winner: CellIndex,
    pub min_dist: f64,
    /// Smallest distance over cells other than the winner.
    pub min_other: f64,
}

impl Tiling {
    pub(crate) fn cell_profile(&self, level: usize, y: &[f64], needed_rho: f64) -> Result<CellProfile> {
        match &self.nets[level] {
            NetHandle::Trivial => Ok(CellProfile {
                winner: CellIndex(vec![]),
                min_dist: self.space.norm(y),
                min_other: f64::INFINITY,
            }),
            NetHandle::Lattice(net) => {
                let (winner, min_dist, min_other) = net.locate(y);
                Ok(CellProfile { winner, min_dist, min_other })
            }
            NetHandle::Greedy(lock) => {
                let mut net = lock.lock().expect("net lock poisoned");
                loop {
                    match net.locate(&self.space, y) {
                        Ok((idx, d, other)) => {
                            return Ok(CellProfile {
                                winner: CellIndex(net.points[idx].tuple.clone()),
                                min_dist: d,
                                min_other: other,
                            });
                        }
                        Err(Error::OutOfHorizon { rho }) => {
                            let mut target = rho;
                            while target < needed_rho || target < rho * 2.0 {
                                target *= 2.0;
                            }
                            *net = build_separated_net(&self.space, level, self.template.r, target)?;
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }

    /// Voronoi cell of `y` in the level net: the first index attaining the
    /// minimal distance within [`TIE_TOL`].
    pub fn locate_cell(&self, level: usize, y: &[f64]) -> Result<CellIndex> {
        let needed = self.space.norm(y) * 2.0 + self.template.r * 4.0;
        Ok(self.cell_profile(level, y, needed)?.winner)
    }

    /// Net point of a cell, embedded in the ambient space.
    pub fn cell_point(&self, level: usize, cell: &CellIndex) -> Result<Vec<f64>> {
        let mut full = vec![0.0; self.dim()];
        match &self.nets[level] {
            NetHandle::Trivial => {
                if !cell.0.is_empty() {
                    return Err(Error::InvalidTile("level-zero cell index must be empty".into()));
                }
            }
            NetHandle::Lattice(net) => {
                if cell.0.len() != level {
                    return Err(Error::InvalidTile(format!(
                        "cell tuple length {} at level {level}",
                        cell.0.len()
                    )));
                }
                let coords = net.point(&cell.0);
                full[..level].copy_from_slice(&coords);
            }
            NetHandle::Greedy(lock) => {
                let net = lock.lock().expect("net lock poisoned");
                let point = net
                    .point_by_tuple(&cell.0)
                    .ok_or_else(|| Error::InvalidTile(format!("unknown cell {:?}", cell.0)))?;
                full[..level].copy_from_slice(&point.coords);
            }
        }
        Ok(full)
    }

    /// Full tile of `x`: cylinder tile plus the Voronoi cell of
    /// `x - axis` in the level net.
    pub fn locate_full(&self, x: &[f64]) -> Result<FullTileId> {
        let cyl = self.locate_cylinder(x);
        let axis = self.cylinder_axis(&cyl)?;
        let y: Vec<f64> = x.iter().zip(&axis).map(|(a, b)| a - b).collect();
        let needed =
            self.space.norm(x) + self.constants.tile_radius + 2.0 * self.template.r;
        let cell = self.cell_profile(cyl.level(), &y, needed)?.winner;
        Ok(FullTileId { cyl, cell })
    }

    /// Designated center `axis + d_i` of a full tile.
    pub fn full_center(&self, id: &FullTileId) -> Result<Vec<f64>> {
        let axis = self.cylinder_axis(&id.cyl)?;
        let d = self.cell_point(id.level(), &id.cell)?;
        Ok(axis.iter().zip(&d).map(|(a, b)| a + b).collect())
    }

    /// Membership predicate of the full tile with `tol` slack on every
    /// defining inequality; negative `tol` demands strict containment.
    pub fn is_member(&self, x: &[f64], id: &FullTileId, tol: f64) -> bool {
        let k = id.level();
        if !self.quotient_tile_contains(x, &id.cyl.qtile, tol) {
            return false;
        }
        if !self.central_above(x, k, tol) {
            return false;
        }
        let Ok(axis) = self.cylinder_axis(&id.cyl) else {
            return false;
        };
        let y: Vec<f64> = x.iter().zip(&axis).map(|(a, b)| a - b).collect();
        let needed =
            self.space.norm(x) + self.constants.tile_radius + 2.0 * self.template.r;
        let Ok(profile) = self.cell_profile(k, &y, needed) else {
            return false;
        };
        let Ok(d) = self.cell_point(k, &id.cell) else {
            return false;
        };
        let diff: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a - b).collect();
        let dist = self.space.norm(&diff);
        let reference = if profile.winner == id.cell {
            profile.min_other
        } else {
            profile.min_dist
        };
        dist <= reference + tol
    }

    /// Count of distinct full tiles strictly containing `x` by `margin`.
    /// Strict region membership is mutually exclusive per level, so only
    /// located tiles can qualify; the count exceeding one signals a
    /// disjointness defect.
    pub fn strict_member_count(&self, x: &[f64], margin: f64) -> usize {
        let mut count = 0;
        for k in 0..self.dim() {
            let qtile = self.locate_quotient(x, k);
            if k > 0 && qtile.is_central() {
                continue;
            }
            let id = CylinderTileId { qtile };
            if !self.quotient_tile_contains(x, &qtile, -margin) {
                continue;
            }
            if !self.central_above(x, k, -margin) {
                continue;
            }
            let Ok(axis) = self.cylinder_axis(&id) else { continue };
            let y: Vec<f64> = x.iter().zip(&axis).map(|(a, b)| a - b).collect();
            let needed =
                self.space.norm(x) + self.constants.tile_radius + 2.0 * self.template.r;
            let Ok(profile) = self.cell_profile(k, &y, needed) else { continue };
            if profile.min_dist <= profile.min_other - margin {
                count += 1;
            }
        }
        count
    }

    /// Rejection-samples points accepted by `accept` from balls around
    /// `center`. The proposal radius climbs a deterministic ladder of
    /// octaves from `inner` to `outer`, so both deep-interior and
    /// near-boundary members show up even for thin tiles inside a wide
    /// outer ball.
    pub(crate) fn member_samples(
        &self,
        center: &[f64],
        inner: f64,
        outer: f64,
        want: usize,
        max_proposals: usize,
        seed: u64,
        accept: impl Fn(&Tiling, &[f64]) -> bool,
    ) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let octaves = ((outer / inner).log2().ceil().max(0.0) as u64 + 1).max(1);
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(want);
        let mut trial = 0u64;
        let mut proposals = 0usize;
        while out.len() < want && proposals < max_proposals {
            proposals += 1;
            trial += 1;
            let u = crate::semibeta::random_unit_quotient(
                &self.space,
                0,
                lds::mix_seed(seed, trial),
            );
            let mut mix = lds::SplitMix::new(lds::mix_seed(seed ^ 0x5741, trial));
            let scale = (inner * (1u64 << (trial % octaves)) as f64).min(outer);
            let rad = scale * mix.unit().powf(1.0 / dim as f64);
            let x: Vec<f64> = center.iter().zip(&u).map(|(c, d)| c + rad * d).collect();
            if accept(self, &x) {
                out.push(x);
            }
        }
        out
    }

    /// Monte-Carlo starlikeness certificate: members drawn by rejection in
    /// the outer ball, then segment points toward the center checked for
    /// membership.
    pub fn starlike_check(
        &self,
        id: &FullTileId,
        samples: usize,
        seed: u64,
    ) -> Result<StarlikeReport> {
        const MAX_PROPOSALS: usize = 100_000;
        let center = self.full_center(id)?;
        let members = self.member_samples(
            &center,
            self.template.r,
            self.constants.tile_radius,
            samples,
            MAX_PROPOSALS,
            seed,
            |t, x| t.is_member(x, id, 0.0),
        );
        if members.is_empty() {
            return Err(Error::SamplingFailed(MAX_PROPOSALS));
        }
        let mut report = StarlikeReport {
            tile: id.clone(),
            members: members.len(),
            segment_checks: 0,
            failures: vec![],
        };
        for x in &members {
            for step in 1..=9 {
                let t = step as f64 / 10.0;
                let xt: Vec<f64> =
                    x.iter().zip(&center).map(|(a, c)| t * c + (1.0 - t) * a).collect();
                report.segment_checks += 1;
                if !self.is_member(&xt, id, 1e-6) {
                    report.failures.push(StarlikeFailure { point: x.clone(), t });
                }
            }
        }
        Ok(report)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StarlikeFailure {
    pub point: Vec<f64>,
    pub t: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StarlikeReport {
    pub tile: FullTileId,
    pub members: usize,
    pub segment_checks: usize,
    pub failures: Vec<StarlikeFailure>,
}

impl StarlikeReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}
