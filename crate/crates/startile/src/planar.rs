//! Planar template geometry.
//!
//! Five closed regions `U0..U4` tile the strip `|x| <= 2` of the plane.
//! A template is feasible when three square-containment conditions hold:
//!
//! * (L.a) the unit square `D = [-1,1]^2` sits inside `U0`,
//! * (L.b) the square `(a,b) + rD` sits inside `U1` and below `|y| <= 1`,
//! * (L.c) the squares `(a,±t) + rD` sit inside `U0` whenever `|t| <= delta*b`.
//!
//! Variant A uses `U0 = {|x|+|y| <= 2}`, variant B the flatter
//! `U0 = {|x|+2|y| <= 3, |x| <= 2}`, which buys a smaller normality
//! constant downstream. All region membership reduces to half-plane
//! inequalities, so the conditions are certified exactly by evaluating the
//! corners of each square.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack for corner containment checks. The published constant
/// sets sit exactly on their binding boundaries, so the exact corner
/// evaluation needs room for f64 rounding.
pub const CORNER_TOL: f64 = 1e-9;

/// Relative retreat applied to strict inequalities when deriving the
/// largest feasible constants.
pub const STRICT_MARGIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemplateVariant {
    A,
    B,
}

impl std::fmt::Display for TemplateVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TemplateVariant::A => write!(f, "A"),
            TemplateVariant::B => write!(f, "B"),
        }
    }
}

/// The planar constants `(a, b, r, delta)` for one variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateConstants {
    pub variant: TemplateVariant,
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlanarRegion {
    U0,
    U1,
    U2,
    U3,
    U4,
    Outside,
}

impl PlanarRegion {
    /// Region index for the petal label `p` in `1..=4`.
    pub fn petal(p: u8) -> PlanarRegion {
        match p {
            1 => PlanarRegion::U1,
            2 => PlanarRegion::U2,
            3 => PlanarRegion::U3,
            4 => PlanarRegion::U4,
            _ => panic!("petal label out of range: {p}"),
        }
    }

    pub fn petal_label(self) -> Option<u8> {
        match self {
            PlanarRegion::U1 => Some(1),
            PlanarRegion::U2 => Some(2),
            PlanarRegion::U3 => Some(3),
            PlanarRegion::U4 => Some(4),
            _ => None,
        }
    }
}

fn check_hypotheses(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::HypothesisViolated("a, b must be finite".into()));
    }
    if !(a > 1.0 && a < 2.0) {
        return Err(Error::HypothesisViolated(format!("1 < a < 2 violated (a = {a})")));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::HypothesisViolated(format!("0 < b < 1 violated (b = {b})")));
    }
    if !(a + b > 2.0) {
        return Err(Error::HypothesisViolated(format!(
            "a + b > 2 violated (a + b = {})",
            a + b
        )));
    }
    Ok(())
}

fn retreat(v: f64) -> f64 {
    v * (1.0 - STRICT_MARGIN)
}

impl TemplateConstants {
    /// Largest feasible `r` for the variant, then the largest admissible
    /// `delta` for that `r`. Strict constraints are retreated by
    /// [`STRICT_MARGIN`] so the result is a concrete number.
    pub fn derive(variant: TemplateVariant, a: f64, b: f64) -> Result<TemplateConstants> {
        check_hypotheses(a, b)?;
        let (r, delta) = match variant {
            TemplateVariant::A => {
                let cap = (1.0 - b).min((a + b) / 2.0 - 1.0).min(2.0 - a);
                // r < 1 - a/2 keeps delta positive; r < 1 is never binding.
                let r = cap.min(retreat(1.0 - a / 2.0));
                if r <= 0.0 {
                    return Err(Error::Infeasible(format!(
                        "no positive r below min(1-b, (a+b)/2-1, 2-a) = {cap}"
                    )));
                }
                let delta = ((2.0 - 2.0 * r - a) / b).min(retreat(1.0));
                (r, delta)
            }
            TemplateVariant::B => {
                let cap = (1.0 - b)
                    .min(2.0 - a)
                    .min((a + 2.0 * b - 3.0) / 3.0)
                    .min(a)
                    .min(b);
                let r = cap.min(retreat((3.0 - a) / 3.0)).min(retreat(1.0));
                if r <= 0.0 {
                    return Err(Error::Infeasible(format!(
                        "variant B needs a + 2b > 3 and b + r <= 1, a + r <= 2; \
                         largest candidate r = {r}"
                    )));
                }
                let delta = ((3.0 - a - 3.0 * r) / (2.0 * b)).min(retreat(1.0));
                (r, delta)
            }
        };
        if delta <= 0.0 {
            return Err(Error::Infeasible(format!("no positive delta for r = {r}")));
        }
        let c = TemplateConstants { variant, a, b, r, delta };
        c.validate()?;
        Ok(c)
    }

    /// Raw constructor. No feasibility is enforced; pair with
    /// [`TemplateConstants::verify_corners`] when the constants are untrusted.
    pub fn with_parts(variant: TemplateVariant, a: f64, b: f64, r: f64, delta: f64) -> Self {
        TemplateConstants { variant, a, b, r, delta }
    }

    /// Checks every constant inequality of the variant, with [`CORNER_TOL`]
    /// slack on the non-strict ones.
    pub fn validate(&self) -> Result<()> {
        check_hypotheses(self.a, self.b)?;
        let TemplateConstants { a, b, r, delta, .. } = *self;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Infeasible(format!("0 < r < 1 violated (r = {r})")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Infeasible(format!("0 < delta < 1 violated (delta = {delta})")));
        }
        let t = CORNER_TOL;
        match self.variant {
            TemplateVariant::A => {
                let cap = (1.0 - b).min((a + b) / 2.0 - 1.0).min(2.0 - a);
                if r > cap + t {
                    return Err(Error::Infeasible(format!(
                        "r <= min(1-b, (a+b)/2-1, 2-a) violated (r = {r}, cap = {cap})"
                    )));
                }
                if r >= 1.0 - a / 2.0 {
                    return Err(Error::Infeasible(format!("r < 1 - a/2 violated (r = {r})")));
                }
                if delta > (2.0 - 2.0 * r - a) / b + t {
                    return Err(Error::Infeasible(format!(
                        "delta <= (2-2r-a)/b violated (delta = {delta})"
                    )));
                }
            }
            TemplateVariant::B => {
                let checks = [
                    (a + 3.0 * r + 2.0 * delta * b <= 3.0 + t, "a + 3r + 2*delta*b <= 3"),
                    (b + r <= 1.0 + t, "b + r <= 1"),
                    (a + r <= 2.0 + t, "a + r <= 2"),
                    (a - r + 2.0 * (b - r) >= 3.0 - t, "a - r + 2(b - r) >= 3"),
                    (a - r >= -t, "a - r >= 0"),
                    (b - r >= -t, "b - r >= 0"),
                ];
                for (ok, name) in checks {
                    if !ok {
                        return Err(Error::Infeasible(format!("{name} violated")));
                    }
                }
            }
        }
        Ok(())
    }

    /// True when `(x, y)` satisfies the region's defining inequalities with
    /// `tol` slack on each half-plane.
    pub fn region_contains(&self, region: PlanarRegion, x: f64, y: f64, tol: f64) -> bool {
        match self.variant {
            TemplateVariant::A => match region {
                PlanarRegion::U0 => x.abs() + y.abs() <= 2.0 + tol,
                PlanarRegion::U1 => {
                    x >= -tol && x <= 2.0 + tol && y >= -tol && x + y >= 2.0 - tol
                }
                PlanarRegion::U2 => {
                    x >= -tol && x <= 2.0 + tol && y <= tol && x - y >= 2.0 - tol
                }
                PlanarRegion::U3 => {
                    x <= tol && x >= -2.0 - tol && y <= tol && x + y <= -2.0 + tol
                }
                PlanarRegion::U4 => {
                    x <= tol && x >= -2.0 - tol && y >= -tol && x - y <= -2.0 + tol
                }
                PlanarRegion::Outside => x.abs() > 2.0 + tol,
            },
            TemplateVariant::B => match region {
                PlanarRegion::U0 => x.abs() + 2.0 * y.abs() <= 3.0 + tol && x.abs() <= 2.0 + tol,
                PlanarRegion::U1 => {
                    x >= -tol && x <= 2.0 + tol && y >= -tol && x + 2.0 * y >= 3.0 - tol
                }
                PlanarRegion::U2 => {
                    x >= -tol && x <= 2.0 + tol && y <= tol && x - 2.0 * y >= 3.0 - tol
                }
                PlanarRegion::U3 => {
                    x <= tol && x >= -2.0 - tol && y <= tol && x + 2.0 * y <= -3.0 + tol
                }
                PlanarRegion::U4 => {
                    x <= tol && x >= -2.0 - tol && y >= -tol && x - 2.0 * y <= -3.0 + tol
                }
                PlanarRegion::Outside => x.abs() > 2.0 + tol,
            },
        }
    }

    /// Region of `(x, y)` under the fixed priority `U0 < U1 < U2 < U3 < U4`.
    ///
    /// Boundaries belong to several regions; the lowest index wins so the
    /// locator is single-valued. `Outside` only occurs beyond the strip.
    pub fn classify(&self, x: f64, y: f64) -> PlanarRegion {
        for region in [
            PlanarRegion::U0,
            PlanarRegion::U1,
            PlanarRegion::U2,
            PlanarRegion::U3,
            PlanarRegion::U4,
        ] {
            if self.region_contains(region, x, y, 0.0) {
                return region;
            }
        }
        PlanarRegion::Outside
    }

    /// Exact corner verification of (L.a), (L.b) and (L.c).
    pub fn verify_corners(&self) -> TemplateCheck {
        let TemplateConstants { a, b, r, delta, .. } = *self;
        let la = self.check_square(0.0, 0.0, 1.0, |s, x, y| s.region_contains(PlanarRegion::U0, x, y, CORNER_TOL));
        let lb = self.check_square(a, b, r, |s, x, y| {
            s.region_contains(PlanarRegion::U1, x, y, CORNER_TOL) && y.abs() <= 1.0 + CORNER_TOL
        });
        let mut lc = CornerCheck { pass: true, witness: None };
        for t in [delta * b, -delta * b] {
            let c = self.check_square(a, t, r, |s, x, y| {
                s.region_contains(PlanarRegion::U0, x, y, CORNER_TOL)
            });
            if !c.pass {
                lc = c;
                break;
            }
        }
        TemplateCheck { la, lb, lc }
    }

    fn check_square(
        &self,
        cx: f64,
        cy: f64,
        radius: f64,
        pred: impl Fn(&Self, f64, f64) -> bool,
    ) -> CornerCheck {
        let corners = [
            (cx - radius, cy - radius),
            (cx - radius, cy + radius),
            (cx + radius, cy - radius),
            (cx + radius, cy + radius),
        ];
        for (x, y) in corners {
            if !pred(self, x, y) {
                return CornerCheck { pass: false, witness: Some((x, y)) };
            }
        }
        CornerCheck { pass: true, witness: None }
    }
}

/// Per-condition result of the corner verification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerCheck {
    pub pass: bool,
    /// First corner violating the condition, in scan order.
    pub witness: Option<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateCheck {
    pub la: CornerCheck,
    pub lb: CornerCheck,
    pub lc: CornerCheck,
}

impl TemplateCheck {
    pub fn all_pass(&self) -> bool {
        self.la.pass && self.lb.pass && self.lc.pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn derive_variant_a_published_constants() {
        let c = TemplateConstants::derive(TemplateVariant::A, 1.3, 0.9).unwrap();
        assert!(close(c.r, 0.1, 1e-12), "r = {}", c.r);
        assert!(close(c.delta, 5.0 / 9.0, 1e-12), "delta = {}", c.delta);
    }

    #[test]
    fn derive_variant_b_published_constants() {
        let c = TemplateConstants::derive(TemplateVariant::B, 1.8, 0.8).unwrap();
        assert!(close(c.r, 0.4 / 3.0, 1e-12), "r = {}", c.r);
        assert!(close(c.delta, 0.5, 1e-12), "delta = {}", c.delta);
    }

    #[test]
    fn derive_rejects_boundary_hypothesis() {
        let err = TemplateConstants::derive(TemplateVariant::A, 1.0, 0.9).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolated(_)), "{err}");
        assert!(err.to_string().contains("1 < a < 2"));
    }

    #[test]
    fn derive_strict_cap_binds() {
        // min terms are 0.5, 0.2, 0.1; the strict bound 1 - a/2 = 0.05 binds.
        let c = TemplateConstants::derive(TemplateVariant::A, 1.9, 0.5).unwrap();
        assert!(c.r < 0.05 && c.r > 0.05 * (1.0 - 1e-9), "r = {}", c.r);
        assert!(close(c.delta, (2.0 - 2.0 * c.r - 1.9) / 0.5, 1e-9), "delta = {}", c.delta);
        assert!(c.delta > 0.0);
    }

    #[test]
    fn derive_variant_b_infeasible_when_a_plus_2b_small() {
        // Hypotheses hold (a + b = 2.1 > 2) but a + 2b = 2.9 < 3.
        let err = TemplateConstants::derive(TemplateVariant::B, 1.3, 0.8).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
    }

    #[test]
    fn classify_examples() {
        let c = TemplateConstants::derive(TemplateVariant::A, 1.3, 0.9).unwrap();
        assert_eq!(c.classify(0.0, 0.0), PlanarRegion::U0);
        assert_eq!(c.classify(2.0, 1.0), PlanarRegion::U1);
        // Shared boundary point: priority picks U0.
        assert_eq!(c.classify(1.0, 1.0), PlanarRegion::U0);
        assert_eq!(c.classify(-1.0, 2.0), PlanarRegion::U4);
    }

    #[test]
    fn corners_pass_for_published_sets() {
        for c in [
            TemplateConstants::with_parts(TemplateVariant::A, 1.3, 0.9, 0.1, 5.0 / 9.0),
            TemplateConstants::with_parts(TemplateVariant::B, 1.8, 0.8, 0.4 / 3.0, 0.5),
        ] {
            let check = c.verify_corners();
            assert!(check.all_pass(), "{check:?}");
        }
    }

    #[test]
    fn corners_fail_with_inflated_r() {
        let c = TemplateConstants::with_parts(TemplateVariant::A, 1.3, 0.9, 0.2, 5.0 / 9.0);
        let check = c.verify_corners();
        assert!(check.la.pass);
        assert!(!check.lc.pass);
        let (wx, wy) = check.lc.witness.unwrap();
        assert!(close(wx, 1.5, 1e-12) && close(wy, 0.7, 1e-12), "witness ({wx}, {wy})");
    }

    #[test]
    fn strip_coverage_and_interior_disjointness() {
        let mut rng = crate::lds::SplitMix::new(0x5eed);
        for c in [
            TemplateConstants::derive(TemplateVariant::A, 1.3, 0.9).unwrap(),
            TemplateConstants::derive(TemplateVariant::B, 1.8, 0.8).unwrap(),
        ] {
            let regions = [
                PlanarRegion::U0,
                PlanarRegion::U1,
                PlanarRegion::U2,
                PlanarRegion::U3,
                PlanarRegion::U4,
            ];
            for _ in 0..100_000 {
                let x = rng.uniform(-2.0, 2.0);
                let y = rng.uniform(-10.0, 10.0);
                assert_ne!(c.classify(x, y), PlanarRegion::Outside, "hole at ({x}, {y})");
                // Strict membership in one region excludes strict membership
                // in any other.
                let strict: Vec<_> = regions
                    .iter()
                    .filter(|&&u| c.region_contains(u, x, y, -1e-9))
                    .collect();
                assert!(strict.len() <= 1, "overlap at ({x}, {y}): {strict:?}");
            }
        }
    }

    #[test]
    fn corner_checks_pass_on_derived_grid() {
        // 50x50 grid over the admissible (a, b) rectangle for variant A.
        for ia in 0..50 {
            for ib in 0..50 {
                let a = 1.0 + (ia as f64 + 0.5) / 50.0;
                let b = (ib as f64 + 0.5) / 50.0;
                if a + b <= 2.0 + 1e-9 {
                    continue;
                }
                let c = TemplateConstants::derive(TemplateVariant::A, a, b).unwrap();
                assert!(c.verify_corners().all_pass(), "a = {a}, b = {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn classify_symmetry(x in -2.0f64..2.0, y in -6.0f64..6.0) {
            let c = TemplateConstants::derive(TemplateVariant::A, 1.3, 0.9).unwrap();
            // Stay off boundaries where the priority rule breaks symmetry.
            let on_boundary = [
                x.abs() + y.abs() - 2.0,
                x,
                x - 2.0,
                x + 2.0,
                y,
                x + y - 2.0,
                x - y - 2.0,
                x + y + 2.0,
                x - y + 2.0,
            ]
            .iter()
            .any(|v| v.abs() < 1e-6);
            prop_assume!(!on_boundary);
            let u1 = c.classify(x, y) == PlanarRegion::U1;
            prop_assert_eq!(u1, c.classify(x, -y) == PlanarRegion::U2);
            prop_assert_eq!(u1, c.classify(-x, -y) == PlanarRegion::U3);
        }
    }
}
