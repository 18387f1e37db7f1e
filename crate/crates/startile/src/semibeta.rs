//! Semi-biorthogonal systems on the quotients `Z_k = X / V_k`.
//!
//! A finite epsilon-net of the quotient unit sphere stands in for a dense
//! sequence; a greedy scan then extracts pairs `(v_j, v*_j)` with
//!
//! * (1.a) `|v*_j| = |v_j| = v*_j(v_j) = 1`,
//! * (1.b) `|v*_j(v_j')| <= delta` for `j < j'`,
//! * (1.c) `sup_j |v*_j(v)| >= (delta - epsilon) |v|` for every `v`.
//!
//! The finite net degrades the frame floor from `delta` to
//! `delta - epsilon`; downstream radius certificates use that effective
//! value so they stay sound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lds;
use crate::space::{dot, NormSpec, SpaceDescriptor};

/// Epsilon-separated points on the unit sphere of `Z_k`, in extraction
/// order. Representatives carry zero leading coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphereNet {
    pub level: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
    /// Consecutive rejected candidates required before the stream stops.
    pub stop_budget: u64,
}

/// Hard ceiling on the stop budget; smaller epsilons in high dimension are
/// rejected rather than left to spin for hours.
const MAX_STOP_BUDGET: f64 = 5e7;

/// Greedy epsilon-net extraction from a seeded low-discrepancy direction
/// stream. Deterministic in `(space, k, epsilon, seed)`.
pub fn sphere_net(space: &SpaceDescriptor, k: usize, epsilon: f64, seed: u64) -> Result<SphereNet> {
    if k >= space.dim {
        return Err(Error::DimensionExhausted { level: k, dim: space.dim });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!("net epsilon must be in (0,1), got {epsilon}")));
    }
    let d = space.dim - k;
    let budget_f = 10.0 * (3.0 / epsilon).powi(d as i32);
    if budget_f > MAX_STOP_BUDGET {
        return Err(Error::Unsupported(format!(
            "net stop budget {budget_f:.3e} for epsilon = {epsilon} in {d} free coordinates; \
             raise epsilon"
        )));
    }
    let budget = budget_f.ceil() as u64;

    let mut stream = lds::WeylSequence::new(d, seed);
    let mut uniform = vec![0.0; d];
    let mut points: Vec<Vec<f64>> = Vec::new();
    let lp = space.lp_exponent();

    let qdist = |a: &[f64], b: &[f64]| -> f64 {
        match lp {
            Some(p) => {
                let it = a[k..].iter().zip(&b[k..]).map(|(x, y)| x - y);
                if p.is_infinite() {
                    it.fold(0.0f64, |m, v| m.max(v.abs()))
                } else if p == 1.0 {
                    it.map(|v| v.abs()).sum()
                } else if p == 2.0 {
                    it.map(|v| v * v).sum::<f64>().sqrt()
                } else {
                    it.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
                }
            }
            None => {
                let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                space.quotient_norm(&diff, k)
            }
        }
    };

    // Dense cell grid over the free coordinates accelerates rejection for
    // the lp family: representatives have unit quotient norm, so every
    // coordinate is bounded by one and the grid box is small. Any point
    // within epsilon of a candidate shares one of its 3^d neighbor cells.
    let side = (1.0 / epsilon).ceil() as i64 + 1;
    let per_axis = (2 * side + 1) as usize;
    let grid_len = per_axis.checked_pow(d as u32).filter(|n| *n <= 8_000_000);
    let mut grid: Vec<Vec<u32>> = match (lp.is_some(), grid_len) {
        (true, Some(n)) => vec![Vec::new(); n],
        _ => Vec::new(),
    };
    let use_grid = !grid.is_empty();
    let mut strides = vec![1usize; d];
    for i in 1..d {
        strides[i] = strides[i - 1] * per_axis;
    }
    let mut neighbor_deltas: Vec<isize> = NeighborOffsets::new(d)
        .map(|off| {
            off.iter()
                .zip(&strides)
                .map(|(o, s)| *o as isize * *s as isize)
                .sum()
        })
        .collect();
    // Same-cell hits are the most common rejection; probe them first.
    neighbor_deltas.sort_by_key(|delta| delta.abs());
    let cell_index = |rep: &[f64]| -> usize {
        rep[k..]
            .iter()
            .zip(&strides)
            .map(|(v, s)| {
                let c = ((v / epsilon).floor() as i64).clamp(-side, side);
                (c + side) as usize * s
            })
            .sum()
    };

    let mut misses = 0u64;
    while misses < budget {
        stream.next_point(&mut uniform);
        let mut rep = vec![0.0; space.dim];
        for (i, u) in uniform.iter().enumerate() {
            rep[k + i] = lds::inv_normal_cdf(*u);
        }
        let qn = space.quotient_norm(&rep, k);
        if qn < 1e-9 {
            misses += 1;
            continue;
        }
        for v in rep.iter_mut() {
            *v /= qn;
        }

        let admit = if use_grid {
            let base = cell_index(&rep) as isize;
            let mut ok = true;
            'cells: for delta in &neighbor_deltas {
                let slot = base + delta;
                if slot < 0 || slot as usize >= grid.len() {
                    continue;
                }
                for &i in &grid[slot as usize] {
                    if qdist(&rep, &points[i as usize]) < epsilon {
                        ok = false;
                        break 'cells;
                    }
                }
            }
            ok
        } else {
            points.iter().all(|p| qdist(&rep, p) >= epsilon)
        };

        if admit {
            if use_grid {
                let slot = cell_index(&rep);
                grid[slot].push(points.len() as u32);
            }
            points.push(rep);
            misses = 0;
        } else {
            misses += 1;
        }
    }

    Ok(SphereNet { level: k, epsilon, seed, points, stop_budget: budget })
}

/// Iterates `{-1,0,1}^d` offsets.
struct NeighborOffsets {
    d: usize,
    i: usize,
    n: usize,
}

impl NeighborOffsets {
    fn new(d: usize) -> Self {
        NeighborOffsets { d, i: 0, n: 3usize.pow(d as u32) }
    }
}

impl Iterator for NeighborOffsets {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.i >= self.n {
            return None;
        }
        let mut rem = self.i;
        let mut out = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            out.push((rem % 3) as i64 - 1);
            rem /= 3;
        }
        self.i += 1;
        Some(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemPair {
    /// Unit-quotient-norm representative with zero leading coordinates.
    pub v: Vec<f64>,
    /// Coefficient functional on X vanishing on `V_k`.
    pub vstar: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemiBiorthogonalSystem {
    pub level: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub pairs: Vec<SystemPair>,
    /// `min(empirical frame bound, delta - epsilon)`; starts at the
    /// theoretical floor until [`frame_bound`] refines it.
    pub certified_bound: f64,
    pub net_len: usize,
}

impl SemiBiorthogonalSystem {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `sup_j |v*_j(x)|` over the stored pairs.
    pub fn sup_pairing(&self, x: &[f64]) -> f64 {
        self.pairs.iter().map(|p| dot(&p.vstar, x).abs()).fold(0.0, f64::max)
    }
}

/// Greedy scan of the net: admit the first point whose pairings with all
/// previously admitted functionals stay below `delta`. The scan order is
/// the extraction order, frozen by the net seed, so a rebuild replays the
/// identical system.
pub fn greedy_system(
    space: &SpaceDescriptor,
    net: &SphereNet,
    delta: f64,
) -> Result<SemiBiorthogonalSystem> {
    if net.points.is_empty() {
        return Err(Error::EmptyNet);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must be in (0,1), got {delta}")));
    }
    let k = net.level;
    let mut pairs: Vec<SystemPair> = Vec::new();
    for cand in &net.points {
        if pairs.iter().all(|p| dot(&p.vstar, cand).abs() <= delta) {
            let vstar = quotient_functional(space, cand, k)?;
            pairs.push(SystemPair { v: cand.clone(), vstar });
        }
    }
    Ok(SemiBiorthogonalSystem {
        level: k,
        delta,
        epsilon: net.epsilon,
        seed: net.seed,
        pairs,
        certified_bound: (delta - net.epsilon).max(0.0),
        net_len: net.points.len(),
    })
}

/// Norming functional of the representative, corrected to vanish on `V_k`
/// by zeroing its leading coefficients. For the lp family the leading
/// coefficients are already zero, which keeps (1.a) exact; for polytope
/// norms an active-set combination restores orthogonality to the flag
/// before the zeroing fallback.
fn quotient_functional(space: &SpaceDescriptor, v: &[f64], k: usize) -> Result<Vec<f64>> {
    let mut f = space.norming_functional(v)?;
    if space.is_lp() || k == 0 {
        debug_assert!(f[..k].iter().all(|c| c.abs() < 1e-12));
        for c in f.iter_mut().take(k) {
            *c = 0.0;
        }
        return Ok(f);
    }
    if let NormSpec::Polytope { functionals } = &space.norm {
        if let Some(g) = flag_orthogonal_support(functionals, v, k) {
            f = g;
        }
    }
    for c in f.iter_mut().take(k) {
        *c = 0.0;
    }
    // Rescale so the pairing is exactly one; the dual norm stays within
    // solver tolerance of one and is certified by the (1.a) checks.
    let pairing = dot(&f, v);
    if pairing.abs() < 1e-9 {
        return Err(Error::ConstructionFailed(
            "degenerate quotient functional: pairing vanished after correction".into(),
        ));
    }
    for c in f.iter_mut() {
        *c /= pairing;
    }
    Ok(f)
}

/// Searches the subdifferential of a polytope norm at `v` for a convex
/// combination of active functionals vanishing on the flag coordinates.
/// Projected-gradient on the simplex; returns `None` when the residual
/// stays large.
fn flag_orthogonal_support(functionals: &[Vec<f64>], v: &[f64], k: usize) -> Option<Vec<f64>> {
    let norm_v = functionals.iter().map(|f| dot(f, v).abs()).fold(0.0, f64::max);
    let active: Vec<(f64, &Vec<f64>)> = functionals
        .iter()
        .filter_map(|f| {
            let val = dot(f, v);
            (val.abs() >= norm_v - 1e-7).then(|| (if val >= 0.0 { 1.0 } else { -1.0 }, f))
        })
        .collect();
    if active.is_empty() {
        return None;
    }
    let m = active.len();
    let mut mu = vec![1.0 / m as f64; m];
    let lead = |mu: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; k];
        for (w, (s, f)) in mu.iter().zip(&active) {
            for i in 0..k {
                out[i] += w * s * f[i];
            }
        }
        out
    };
    for _ in 0..500 {
        let r = lead(&mu);
        if r.iter().map(|x| x * x).sum::<f64>() < 1e-20 {
            break;
        }
        // Gradient of |r|^2 wrt mu, then project back to the simplex.
        let mut grad = vec![0.0; m];
        for (j, (s, f)) in active.iter().enumerate() {
            grad[j] = 2.0 * (0..k).map(|i| r[i] * s * f[i]).sum::<f64>();
        }
        for (w, g) in mu.iter_mut().zip(&grad) {
            *w -= 0.1 * g;
        }
        project_simplex(&mut mu);
    }
    let r = lead(&mu);
    if r.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-9 {
        return None;
    }
    let mut g = vec![0.0; v.len()];
    for (w, (s, f)) in mu.iter().zip(&active) {
        for i in 0..v.len() {
            g[i] += w * s * f[i];
        }
    }
    Some(g)
}

fn project_simplex(w: &mut [f64]) {
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        acc += u;
        let t = (acc - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    for v in w.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// Empirical minimum over fresh random unit vectors of `sup_j |v*_j(v)|`.
/// Updates the system's certified bound to
/// `min(empirical, delta - epsilon)`. Per-trial randomness is derived from
/// `(seed, trial)`, so the result does not depend on evaluation order.
pub fn frame_bound(
    space: &SpaceDescriptor,
    sys: &mut SemiBiorthogonalSystem,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if sys.pairs.is_empty() {
        return Err(Error::EmptySystem);
    }
    if trials == 0 {
        return Err(Error::Config("frame_bound needs at least one trial".into()));
    }
    let k = sys.level;
    let mut worst = f64::INFINITY;
    for trial in 0..trials {
        let v = random_unit_quotient(space, k, lds::mix_seed(seed, trial as u64));
        worst = worst.min(sys.sup_pairing(&v));
    }
    sys.certified_bound = worst.min((sys.delta - sys.epsilon).max(0.0));
    Ok(worst)
}

/// Random vector of unit quotient norm at level `k`, Gaussian in the free
/// coordinates.
pub(crate) fn random_unit_quotient(space: &SpaceDescriptor, k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![0.0; space.dim];
    loop {
        for item in v.iter_mut().skip(k) {
            *item = StandardNormal.sample(&mut rng);
        }
        let qn = space.quotient_norm(&v, k);
        if qn > 1e-9 {
            for item in v.iter_mut().skip(k) {
                *item /= qn;
            }
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_level_net_is_two_antipodes() {
        let space = SpaceDescriptor::lp(3, 2.0);
        let net = sphere_net(&space, 2, 0.1, 9).unwrap();
        assert_eq!(net.points.len(), 2);
        let a = net.points[0][2];
        let b = net.points[1][2];
        assert!((a.abs() - 1.0).abs() < 1e-9 && (b.abs() - 1.0).abs() < 1e-9);
        assert!(a * b < 0.0, "expected antipodal pair, got {a}, {b}");
    }

    #[test]
    fn net_is_deterministic_in_seed() {
        let space = SpaceDescriptor::lp(3, 2.0);
        let a = sphere_net(&space, 0, 0.4, 1234).unwrap();
        let b = sphere_net(&space, 0, 0.4, 1234).unwrap();
        assert_eq!(a.points, b.points);
        let c = sphere_net(&space, 0, 0.4, 1235).unwrap();
        assert_ne!(a.points, c.points);
        for p in &a.points {
            assert!((space.quotient_norm(p, 0) - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn linf_square_net_separation_and_covering() {
        let space = SpaceDescriptor::lp(2, f64::INFINITY);
        let net = sphere_net(&space, 0, 0.5, 77).unwrap();
        for (i, p) in net.points.iter().enumerate() {
            for q in &net.points[..i] {
                let d = space.norm(&[p[0] - q[0], p[1] - q[1]]);
                assert!(d >= 0.5 - 1e-9, "pair too close: {d}");
            }
        }
        // Dense walk of the square boundary: every unit vector within
        // epsilon of the net.
        let mut worst: f64 = 0.0;
        let steps = 4000;
        for i in 0..steps {
            let t = -1.0 + 2.0 * (i as f64 / steps as f64);
            for bp in [[1.0, t], [-1.0, t], [t, 1.0], [t, -1.0]] {
                let d = net
                    .points
                    .iter()
                    .map(|p| space.norm(&[p[0] - bp[0], p[1] - bp[1]]))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        assert!(worst <= 0.5 + 1e-9, "covering radius {worst}");
    }

    #[test]
    fn greedy_system_conditions() {
        let space = SpaceDescriptor::lp(3, 2.0);
        let net = sphere_net(&space, 0, 0.2, 5).unwrap();
        let sys = greedy_system(&space, &net, 0.5).unwrap();
        assert!(!sys.is_empty());
        assert_eq!(sys.pairs[0].v, net.points[0]);
        for (j, p) in sys.pairs.iter().enumerate() {
            // (1.a)
            assert!((space.quotient_norm(&p.v, 0) - 1.0).abs() < 1e-8);
            assert!((dot(&p.vstar, &p.v) - 1.0).abs() < 1e-8);
            assert!((space.dual_norm(&p.vstar).unwrap() - 1.0).abs() < 1e-8);
            // (1.b)
            for later in &sys.pairs[j + 1..] {
                assert!(dot(&p.vstar, &later.v).abs() <= 0.5 + 1e-9);
            }
        }
        // Replay reproduces the identical pair sequence.
        let sys2 = greedy_system(&space, &net, 0.5).unwrap();
        assert_eq!(sys.pairs.len(), sys2.pairs.len());
        for (a, b) in sys.pairs.iter().zip(&sys2.pairs) {
            assert_eq!(a.v, b.v);
            assert_eq!(a.vstar, b.vstar);
        }
    }

    #[test]
    fn one_dimensional_quotient_single_pair() {
        let space = SpaceDescriptor::lp(2, 2.0);
        let net = sphere_net(&space, 1, 0.3, 3).unwrap();
        let mut sys = greedy_system(&space, &net, 0.5).unwrap();
        // Both antipodes pair to 1 in modulus against the first functional,
        // above delta, so exactly one pair is admitted.
        assert_eq!(sys.len(), 1);
        assert!((dot(&sys.pairs[0].vstar, &sys.pairs[0].v) - 1.0).abs() < 1e-10);
        let emp = frame_bound(&space, &mut sys, 500, 4).unwrap();
        assert!((emp - 1.0).abs() < 1e-8, "sup |v*_0(±v_0)| = 1, got {emp}");
    }

    #[test]
    fn frame_bound_l2_cube_example() {
        let space = SpaceDescriptor::lp(3, 2.0);
        let net = sphere_net(&space, 0, 0.05, 21).unwrap();
        let mut sys = greedy_system(&space, &net, 0.5).unwrap();
        let emp = frame_bound(&space, &mut sys, 10_000, 55).unwrap();
        assert!(emp >= 0.45, "empirical frame bound {emp} below delta - epsilon");
        assert!(sys.certified_bound >= 0.45 - 1e-9);
        assert!(sys.certified_bound <= 0.45 + 1e-12);
    }

    #[test]
    fn frame_bound_rejects_empty_system() {
        let space = SpaceDescriptor::lp(2, 2.0);
        let mut sys = SemiBiorthogonalSystem {
            level: 0,
            delta: 0.5,
            epsilon: 0.1,
            seed: 0,
            pairs: vec![],
            certified_bound: 0.0,
            net_len: 0,
        };
        assert!(matches!(frame_bound(&space, &mut sys, 10, 0), Err(Error::EmptySystem)));
    }

    #[test]
    fn tiny_epsilon_high_dimension_is_rejected() {
        let space = SpaceDescriptor::lp(6, 2.0);
        assert!(matches!(sphere_net(&space, 0, 0.01, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn construction_error_paths() {
        let space = SpaceDescriptor::lp(3, 2.0);
        assert!(matches!(
            sphere_net(&space, 3, 0.2, 1),
            Err(Error::DimensionExhausted { level: 3, dim: 3 })
        ));
        let empty = SphereNet { level: 0, epsilon: 0.2, seed: 1, points: vec![], stop_budget: 1 };
        assert!(matches!(greedy_system(&space, &empty, 0.5), Err(Error::EmptyNet)));
    }
}
