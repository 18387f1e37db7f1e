//! Tiling of each quotient `Z_k`: one bounded central tile, a petal tile
//! per system pair and planar side region, and a strip tile per nonzero
//! multiple of `4 e_{k+1}`.
//!
//! A class `z` projects to the plane through
//! `pi_j(z) = (e*_{k+1}(z), v*_{j,k+1}(z))`; the planar template then
//! classifies the pair. Both functionals vanish on `V_k`, so the value is
//! independent of the representative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planar::PlanarRegion;
use crate::space::dot;
use crate::tiling::Tiling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuotientTileKind {
    Central,
    Petal { j: usize, p: u8 },
    Strip { n: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuotientTileId {
    pub level: usize,
    pub kind: QuotientTileKind,
}

impl QuotientTileId {
    pub fn central(level: usize) -> Self {
        QuotientTileId { level, kind: QuotientTileKind::Central }
    }

    pub fn is_central(&self) -> bool {
        matches!(self.kind, QuotientTileKind::Central)
    }
}

impl std::fmt::Display for QuotientTileId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            QuotientTileKind::Central => write!(f, "k={} central", self.level),
            QuotientTileKind::Petal { j, p } => write!(f, "k={} petal j={} p={}", self.level, j, p),
            QuotientTileKind::Strip { n } => write!(f, "k={} strip n={}", self.level, n),
        }
    }
}

/// Center data of a quotient tile: the point `h` and, for petals, the lift
/// `u_j` of `v_{j,k+1}` with vanishing `e*_{k+1}` coefficient.
#[derive(Clone, Debug)]
pub struct QuotientCenter {
    pub tile: QuotientTileId,
    pub h: Vec<f64>,
    pub lift: Option<Vec<f64>>,
}

/// Index of the strip containing `e`: the integer `n` with
/// `|e - 4n| <= 2`, smallest `|n|` first and positive on `±n` ties.
pub(crate) fn strip_index(e: f64) -> i64 {
    let nc = (e / 4.0).round() as i64;
    let mut best: Option<i64> = None;
    for n in [nc - 1, nc, nc + 1] {
        if (e - 4.0 * n as f64).abs() <= 2.0 {
            let better = match best {
                None => true,
                Some(b) => (n.abs(), n < 0) < (b.abs(), b < 0),
            };
            if better {
                best = Some(n);
            }
        }
    }
    best.expect("every real lies in some strip")
}

/// Sign pattern of the petal center for side region `p`:
/// `h = s_e * a * e_{k+1} + s_u * b * u_j`.
fn petal_signs(p: u8) -> (f64, f64) {
    match p {
        1 => (1.0, 1.0),
        2 => (1.0, -1.0),
        3 => (-1.0, -1.0),
        4 => (-1.0, 1.0),
        _ => panic!("petal label out of range: {p}"),
    }
}

impl Tiling {
    /// `pi_{j,k}(z) = (e*_{k+1}(z), v*_{j,k+1}(z))` for a representative `z`
    /// of a class at level `k`.
    pub fn pi_map(&self, j: usize, z: &[f64], k: usize) -> (f64, f64) {
        let sys = self.system(k + 1).expect("pi_map needs the system one level up");
        (z[k], dot(&sys.pairs[j].vstar, z))
    }

    /// Locates the quotient tile of `z` at level `k`.
    ///
    /// The strip test runs first; inside the fundamental strip the petal
    /// scan returns the minimal pair index whose planar image leaves `U0`,
    /// labelled by the priority classification.
    pub fn locate_quotient(&self, z: &[f64], k: usize) -> QuotientTileId {
        debug_assert!(k < self.dim());
        let e = z[k];
        let n = strip_index(e);
        if n != 0 {
            return QuotientTileId { level: k, kind: QuotientTileKind::Strip { n } };
        }
        if k + 1 < self.dim() {
            let sys = self.system(k + 1).expect("system exists below the top level");
            for (j, pair) in sys.pairs.iter().enumerate() {
                let region = self.template.classify(e, dot(&pair.vstar, z));
                if region != PlanarRegion::U0 {
                    let p = region
                        .petal_label()
                        .expect("strip points classify into U0..U4");
                    return QuotientTileId { level: k, kind: QuotientTileKind::Petal { j, p } };
                }
            }
        }
        QuotientTileId::central(k)
    }

    /// Center of a quotient tile.
    pub fn quotient_center(&self, tile: &QuotientTileId) -> Result<QuotientCenter> {
        let k = tile.level;
        if k >= self.dim() {
            return Err(Error::InvalidTile(format!("level {k} out of range")));
        }
        let dim = self.dim();
        match tile.kind {
            QuotientTileKind::Central => {
                Ok(QuotientCenter { tile: *tile, h: vec![0.0; dim], lift: None })
            }
            QuotientTileKind::Strip { n } => {
                if n == 0 {
                    return Err(Error::InvalidTile("strip index must be nonzero".into()));
                }
                let mut h = vec![0.0; dim];
                h[k] = 4.0 * n as f64;
                Ok(QuotientCenter { tile: *tile, h, lift: None })
            }
            QuotientTileKind::Petal { j, p } => {
                let sys = self
                    .system(k + 1)
                    .ok_or_else(|| Error::InvalidTile(format!("no petals at top level {k}")))?;
                if j >= sys.len() {
                    return Err(Error::InvalidTile(format!(
                        "petal index {j} out of range (m_k = {})",
                        sys.len()
                    )));
                }
                // The stored representative already has a vanishing
                // e_{k+1} coefficient, so it serves as the lift directly.
                let u = sys.pairs[j].v.clone();
                debug_assert!(u[k].abs() < 1e-12);
                let (se, su) = petal_signs(p);
                let mut h: Vec<f64> = u.iter().map(|c| su * self.template.b * c).collect();
                h[k] += se * self.template.a;
                Ok(QuotientCenter { tile: *tile, h, lift: Some(u) })
            }
        }
    }

    /// Tile membership with `tol` slack on every defining inequality.
    /// Negative `tol` demands strict containment by that margin.
    pub fn quotient_tile_contains(&self, z: &[f64], tile: &QuotientTileId, tol: f64) -> bool {
        let k = tile.level;
        let e = z[k];
        match tile.kind {
            QuotientTileKind::Strip { n } => (e - 4.0 * n as f64).abs() <= 2.0 + tol,
            QuotientTileKind::Central => {
                if e.abs() > 2.0 + tol {
                    return false;
                }
                match self.system(k + 1) {
                    None => true,
                    Some(sys) => sys.pairs.iter().all(|pair| {
                        self.template
                            .region_contains(PlanarRegion::U0, e, dot(&pair.vstar, z), tol)
                    }),
                }
            }
            QuotientTileKind::Petal { j, p } => {
                if e.abs() > 2.0 + tol {
                    return false;
                }
                let Some(sys) = self.system(k + 1) else {
                    return false;
                };
                if j >= sys.len() {
                    return false;
                }
                let own = self.template.region_contains(
                    PlanarRegion::petal(p),
                    e,
                    dot(&sys.pairs[j].vstar, z),
                    tol,
                );
                own && sys.pairs[..j].iter().all(|pair| {
                    self.template
                        .region_contains(PlanarRegion::U0, e, dot(&pair.vstar, z), tol)
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::{TemplateConstants, TemplateVariant};
    use crate::space::SpaceDescriptor;

    fn l2_tiling(dim: usize) -> Tiling {
        let template = TemplateConstants::derive(TemplateVariant::A, 1.3, 0.9).unwrap();
        Tiling::build(SpaceDescriptor::lp(dim, 2.0), template, 0.2, 71).unwrap()
    }

    #[test]
    fn strip_index_tie_rules() {
        assert_eq!(strip_index(0.0), 0);
        assert_eq!(strip_index(4.0), 1);
        assert_eq!(strip_index(2.0), 0);
        assert_eq!(strip_index(-2.0), 0);
        assert_eq!(strip_index(6.0), 1);
        assert_eq!(strip_index(-6.0), -1);
        assert_eq!(strip_index(9.5), 2);
    }

    #[test]
    fn pi_map_examples() {
        let t = l2_tiling(3);
        let k = 0;
        // z = e_{k+1} maps to (1, 0).
        let mut z = vec![0.0; 3];
        z[k] = 1.0;
        for j in 0..t.system(k + 1).unwrap().len() {
            let (x, y) = t.pi_map(j, &z, k);
            assert_eq!(x, 1.0);
            assert!(y.abs() < 1e-12);
        }
        // Petal centers map to (±a, ±b).
        let (a, b) = (t.template().a, t.template().b);
        for (p, want) in [(1u8, (a, b)), (2, (a, -b)), (3, (-a, -b)), (4, (-a, b))] {
            let tile = QuotientTileId { level: k, kind: QuotientTileKind::Petal { j: 0, p } };
            let c = t.quotient_center(&tile).unwrap();
            let (x, y) = t.pi_map(0, &c.h, k);
            assert!((x - want.0).abs() < 1e-10 && (y - want.1).abs() < 1e-10, "p={p}: ({x},{y})");
        }
        // Linearity.
        let c = t
            .quotient_center(&QuotientTileId { level: k, kind: QuotientTileKind::Petal { j: 0, p: 1 } })
            .unwrap();
        let (x1, y1) = t.pi_map(0, &c.h, k);
        let scaled: Vec<f64> = c.h.iter().map(|v| 2.5 * v).collect();
        let (x2, y2) = t.pi_map(0, &scaled, k);
        assert!((x2 - 2.5 * x1).abs() < 1e-10 && (y2 - 2.5 * y1).abs() < 1e-10);
    }

    #[test]
    fn locate_examples() {
        let t = l2_tiling(3);
        assert_eq!(t.locate_quotient(&[0.0, 0.0, 0.0], 0), QuotientTileId::central(0));
        // Petal centers locate to their own tile.
        for p in 1..=4u8 {
            let tile = QuotientTileId { level: 0, kind: QuotientTileKind::Petal { j: 0, p } };
            let c = t.quotient_center(&tile).unwrap();
            assert_eq!(t.locate_quotient(&c.h, 0), tile);
        }
        // e*(z) = 4 lands in strip 1.
        let z = [4.0, 0.3, -0.2];
        assert_eq!(
            t.locate_quotient(&z, 0),
            QuotientTileId { level: 0, kind: QuotientTileKind::Strip { n: 1 } }
        );
    }

    #[test]
    fn center_examples() {
        let t = l2_tiling(3);
        let c = t.quotient_center(&QuotientTileId::central(1)).unwrap();
        assert!(c.h.iter().all(|v| *v == 0.0));
        let c = t
            .quotient_center(&QuotientTileId { level: 0, kind: QuotientTileKind::Strip { n: 2 } })
            .unwrap();
        assert_eq!(c.h, vec![8.0, 0.0, 0.0]);
        // Petal centers sit at quotient distance b from the next flag.
        let b = t.template().b;
        let tile = QuotientTileId { level: 0, kind: QuotientTileKind::Petal { j: 0, p: 1 } };
        let c = t.quotient_center(&tile).unwrap();
        let q = t.space().quotient_norm(&c.h, 1);
        assert!((q - b).abs() < 1e-8, "got {q}, want {b}");
        assert!(b <= 1.0 - t.template().r + 1e-12);
    }

    #[test]
    fn unit_ball_is_central_and_bounded() {
        let t = l2_tiling(3);
        let space = t.space().clone();
        let cap = 4.0 / t.delta_eff() + 1e-6;
        for k in 0..=1usize {
            for trial in 0..1000u64 {
                let v = crate::semibeta::random_unit_quotient(&space, k, crate::lds::mix_seed(91, trial));
                let scaled: Vec<f64> = v.iter().map(|c| c * (1.0 - 1e-6)).collect();
                assert_eq!(t.locate_quotient(&scaled, k), QuotientTileId::central(k), "k = {k}");
                // Central tiles live inside the delta_eff ball.
                let big: Vec<f64> = v.iter().map(|c| c * 30.0).collect();
                if t.locate_quotient(&big, k).is_central() {
                    assert!(space.quotient_norm(&big, k) <= cap);
                }
            }
        }
    }

    #[test]
    fn petal_ball_and_distance_bound() {
        let t = l2_tiling(3);
        let space = t.space().clone();
        let (a, b, r) = (t.template().a, t.template().b, t.template().r);
        let k = 0usize;
        let m = t.system(1).unwrap().len();
        for j in 0..m.min(6) {
            for p in 1..=4u8 {
                let tile = QuotientTileId { level: k, kind: QuotientTileKind::Petal { j, p } };
                let c = t.quotient_center(&tile).unwrap();
                assert_eq!(t.locate_quotient(&c.h, k), tile);
                for trial in 0..100u64 {
                    let u = crate::semibeta::random_unit_quotient(
                        &space,
                        k,
                        crate::lds::mix_seed(17 + j as u64, trial),
                    );
                    let z: Vec<f64> = c
                        .h
                        .iter()
                        .zip(&u)
                        .map(|(h, d)| h + (r - 1e-6) * d)
                        .collect();
                    assert_eq!(t.locate_quotient(&z, k), tile, "j={j} p={p}");
                }
            }
        }
        // (2.d)-style bound at sampled points.
        let mut rng = crate::lds::SplitMix::new(3);
        for _ in 0..2000 {
            let z: Vec<f64> = (0..3).map(|_| rng.uniform(-8.0, 8.0)).collect();
            let tile = t.locate_quotient(&z, k);
            let h = t.quotient_center(&tile).unwrap().h;
            let diff: Vec<f64> = z.iter().zip(&h).map(|(x, y)| x - y).collect();
            let lhs = space.quotient_norm(&diff, k);
            let rhs = a + 2.0 * b + 2.0 * space.quotient_norm(&z, k + 1) + 1e-6;
            assert!(lhs <= rhs, "lhs {lhs} rhs {rhs}");
        }
    }

    #[test]
    fn top_level_is_interval_tiling() {
        let t = l2_tiling(3);
        let k = 2usize;
        let mut rng = crate::lds::SplitMix::new(13);
        for _ in 0..2000 {
            let z: Vec<f64> = (0..3).map(|_| rng.uniform(-12.0, 12.0)).collect();
            let tile = t.locate_quotient(&z, k);
            let n = strip_index(z[2]);
            let want = if n == 0 {
                QuotientTileKind::Central
            } else {
                QuotientTileKind::Strip { n }
            };
            assert_eq!(tile.kind, want);
            // Interval membership of radius 2 around the center is exact.
            let h = t.quotient_center(&tile).unwrap().h;
            assert!((z[2] - h[2]).abs() <= 2.0);
            assert!(t.quotient_tile_contains(&z, &tile, 0.0));
        }
        // Boundary points resolve by the smallest-|n|-then-positive rule.
        assert_eq!(t.locate_quotient(&[0.0, 0.0, 2.0], k).kind, QuotientTileKind::Central);
        assert_eq!(
            t.locate_quotient(&[0.0, 0.0, 6.0], k).kind,
            QuotientTileKind::Strip { n: 1 }
        );
    }

    #[test]
    fn tile_id_serialization_shape() {
        let id = QuotientTileId { level: 1, kind: QuotientTileKind::Petal { j: 3, p: 2 } };
        let json = serde_json::to_value(crate::cylinder::CylinderTileId { qtile: id }).unwrap();
        assert_eq!(json["k"], 1);
        assert_eq!(json["kind"], "petal");
        assert_eq!(json["j"], 3);
        assert_eq!(json["p"], 2);
    }
}
