//! The ambient M-dimensional normed space.
//!
//! The standard coordinate basis `{e_i}` with its biorthogonal functionals
//! `{e*_i}` is normalized for every supported norm family. Levels carve out
//! the flags `V_k = span(e_1..e_k)`; the quotient norm of `x` at level `k`
//! is `dist(x, V_k)`, the norm of the class of `x` in `X / V_k`.
//!
//! Two families serialize from config files: `lp` (any `p` in `[1, inf]`)
//! and polytope norms `max_i |f_i(x)|`. Programmatic norms plug in through
//! [`NormOracle`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance of the quotient-distance solver.
pub const SOLVER_TOL: f64 = 1e-8;
/// Line-search/sweep budget of the quotient-distance solver.
pub const SOLVER_CAP: usize = 100_000;

/// A norm plus one of its subgradients, both positively homogeneous.
pub trait NormOracle {
    fn dim(&self) -> usize;
    fn norm(&self, x: &[f64]) -> f64;
    /// Any support functional at `x`: `f(x) = norm(x)` with dual norm one.
    fn subgradient(&self, x: &[f64]) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum NormSpec {
    Lp {
        #[serde(with = "lp_exponent")]
        p: f64,
    },
    /// `norm(x) = max_i |f_i(x)|`; the functionals must span the dual.
    Polytope { functionals: Vec<Vec<f64>> },
}

/// Serializes `p = inf` as the string `"inf"`; finite exponents as numbers.
mod lp_exponent {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(p),
            Raw::Str(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(D::Error::custom(format!("bad lp exponent: {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub dim: usize,
    pub norm: NormSpec,
}

impl SpaceDescriptor {
    pub fn lp(dim: usize, p: f64) -> Self {
        SpaceDescriptor { dim, norm: NormSpec::Lp { p } }
    }

    pub fn polytope(dim: usize, functionals: Vec<Vec<f64>>) -> Self {
        SpaceDescriptor { dim, norm: NormSpec::Polytope { functionals } }
    }

    pub fn is_lp(&self) -> bool {
        matches!(self.norm, NormSpec::Lp { .. })
    }

    pub fn lp_exponent(&self) -> Option<f64> {
        match self.norm {
            NormSpec::Lp { p } => Some(p),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        match &self.norm {
            NormSpec::Lp { p } => {
                if !(*p >= 1.0) {
                    return Err(Error::InvalidSpace(format!("lp exponent must be >= 1, got {p}")));
                }
            }
            NormSpec::Polytope { functionals } => {
                if functionals.is_empty() {
                    return Err(Error::InvalidSpace("polytope norm needs functionals".into()));
                }
                for f in functionals {
                    if f.len() != self.dim {
                        return Err(Error::DimensionMismatch { expected: self.dim, got: f.len() });
                    }
                    if !f.iter().all(|v| v.is_finite()) {
                        return Err(Error::InvalidSpace("non-finite functional entry".into()));
                    }
                }
                if rank(functionals, self.dim) < self.dim {
                    return Err(Error::InvalidSpace(
                        "polytope functionals do not span the dual; max_i |f_i(x)| is not a norm"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Ambient norm of `x`.
    pub fn norm(&self, x: &[f64]) -> f64 {
        match &self.norm {
            NormSpec::Lp { p } => lp_norm(x, *p),
            NormSpec::Polytope { functionals } => polytope_norm(functionals, x),
        }
    }

    /// Dual norm of a coefficient functional, where available in closed
    /// form. `None` for polytope norms.
    pub fn dual_norm(&self, f: &[f64]) -> Option<f64> {
        match self.norm {
            NormSpec::Lp { p } => Some(lp_norm(f, conjugate_exponent(p))),
            NormSpec::Polytope { .. } => None,
        }
    }

    /// A functional `f` with dual norm one and `f(x) = norm(x)`.
    ///
    /// Tie rules are fixed for determinism: `p = 1` maps zero entries to
    /// zero, `p = inf` picks the smallest index of maximal modulus, and the
    /// polytope case picks the smallest maximizing functional index.
    pub fn norming_functional(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let n = self.norm(x);
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(match &self.norm {
            NormSpec::Lp { p } if *p == 1.0 => x.iter().map(|v| sign0(*v)).collect(),
            NormSpec::Lp { p } if p.is_infinite() => {
                let mut best = 0;
                for (i, v) in x.iter().enumerate() {
                    if v.abs() > x[best].abs() {
                        best = i;
                    }
                }
                let mut f = vec![0.0; x.len()];
                f[best] = sign0(x[best]);
                f
            }
            NormSpec::Lp { p } => {
                let scale = n.powf(*p - 1.0);
                x.iter().map(|v| sign0(*v) * v.abs().powf(*p - 1.0) / scale).collect()
            }
            NormSpec::Polytope { functionals } => {
                let mut best = 0;
                let mut best_val = 0.0;
                for (i, f) in functionals.iter().enumerate() {
                    let v = dot(f, x).abs();
                    if v > best_val {
                        best = i;
                        best_val = v;
                    }
                }
                let s = sign0(dot(&functionals[best], x));
                functionals[best].iter().map(|c| c * s).collect()
            }
        })
    }

    /// `dist(x, V_k)`: the norm of the class of `x` in `X / V_k`.
    ///
    /// For the lp family the flag coordinates are 1-unconditional, so the
    /// distance is the norm of `x` with coordinates `1..k` zeroed. Custom
    /// norms go through the descent solver.
    pub fn quotient_norm(&self, x: &[f64], k: usize) -> f64 {
        debug_assert!(k <= self.dim);
        if k == 0 {
            return self.norm(x);
        }
        if k >= self.dim {
            return 0.0;
        }
        match &self.norm {
            NormSpec::Lp { p } => lp_norm(&x[k..], *p),
            NormSpec::Polytope { .. } => self.quotient_min(x, k).value,
        }
    }

    /// Full solver output for `dist(x, V_k)`.
    pub fn quotient_min(&self, x: &[f64], k: usize) -> QuotientMin {
        match &self.norm {
            NormSpec::Lp { p } => {
                let mut lambda = vec![0.0; k.min(self.dim)];
                lambda.copy_from_slice(&x[..k.min(self.dim)]);
                QuotientMin {
                    value: if k >= self.dim { 0.0 } else { lp_norm(&x[k..], *p) },
                    lambda,
                    iterations: 0,
                    converged: true,
                }
            }
            NormSpec::Polytope { .. } => quotient_descent(self, x, k, SOLVER_TOL, SOLVER_CAP),
        }
    }

    /// Canonical representative of the class of `x` at level `k`
    /// (coordinates `1..k` zeroed). Norm-minimal for the lp family.
    pub fn canonical_rep(&self, x: &[f64], k: usize) -> Vec<f64> {
        let mut y = x.to_vec();
        for v in y.iter_mut().take(k) {
            *v = 0.0;
        }
        y
    }
}

impl NormOracle for SpaceDescriptor {
    fn dim(&self) -> usize {
        self.dim
    }

    fn norm(&self, x: &[f64]) -> f64 {
        SpaceDescriptor::norm(self, x)
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        self.norming_functional(x).expect("subgradient of zero vector")
    }
}

#[derive(Clone, Debug)]
pub struct QuotientMin {
    pub value: f64,
    pub lambda: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        return x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if p == 2.0 {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    // Rescale by the max to keep powf in range.
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub(crate) fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn polytope_norm(functionals: &[Vec<f64>], x: &[f64]) -> f64 {
    functionals.iter().map(|f| dot(f, x).abs()).fold(0.0, f64::max)
}

/// Row rank by Gaussian elimination with partial pivoting.
fn rank(rows: &[Vec<f64>], dim: usize) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..dim {
        let Some(pivot) = (rank..m.len()).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        }) else {
            break;
        };
        if m[pivot][col].abs() < 1e-12 {
            continue;
        }
        m.swap(rank, pivot);
        for i in (rank + 1)..m.len() {
            let f = m[i][col] / m[rank][col];
            for c in col..dim {
                m[i][c] -= f * m[rank][c];
            }
        }
        rank += 1;
        if rank == dim {
            break;
        }
    }
    rank
}

/// Quotient distance under a programmatic norm oracle.
pub fn quotient_min_with(oracle: &dyn NormOracle, x: &[f64], k: usize) -> QuotientMin {
    quotient_descent(oracle, x, k, SOLVER_TOL, SOLVER_CAP)
}

/// Cyclic coordinate descent with golden-section line searches on
/// `g(lambda) = norm(x - sum lambda_i e_i)`. A pairwise-direction sweep
/// after each converged cycle guards against the stall points that pure
/// coordinate moves admit on polyhedral norms.
pub(crate) fn quotient_descent(
    oracle: &dyn NormOracle,
    x: &[f64],
    k: usize,
    tol: f64,
    cap: usize,
) -> QuotientMin {
    let k = k.min(x.len());
    let mut lambda: Vec<f64> = x[..k].to_vec();
    let mut y = x.to_vec();
    for i in 0..k {
        y[i] = x[i] - lambda[i];
    }
    let scale = oracle.norm(x).max(1.0);
    let half_width = 3.0 * scale + 1.0;
    let mut value = oracle.norm(&y);
    let mut iterations = 0usize;
    let mut converged = false;

    // One golden-section minimization of t -> norm(y - t * dir).
    let line_min = |y: &mut Vec<f64>, dir: &[(usize, f64)], value: &mut f64| {
        let eval = |y: &mut Vec<f64>, t: f64| {
            for &(i, c) in dir {
                y[i] -= t * c;
            }
            let v = oracle.norm(y);
            for &(i, c) in dir {
                y[i] += t * c;
            }
            v
        };
        let (mut lo, mut hi) = (-half_width, half_width);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let mut m1 = hi - phi * (hi - lo);
        let mut m2 = lo + phi * (hi - lo);
        let mut f1 = eval(y, m1);
        let mut f2 = eval(y, m2);
        while hi - lo > 1e-10 * scale {
            if f1 <= f2 {
                hi = m2;
                m2 = m1;
                f2 = f1;
                m1 = hi - phi * (hi - lo);
                f1 = eval(y, m1);
            } else {
                lo = m1;
                m1 = m2;
                f1 = f2;
                m2 = lo + phi * (hi - lo);
                f2 = eval(y, m2);
            }
        }
        let t = 0.5 * (lo + hi);
        let vt = eval(y, t);
        if vt < *value {
            for &(i, c) in dir {
                y[i] -= t * c;
            }
            *value = vt;
            Some(t)
        } else {
            None
        }
    };

    'outer: while iterations < cap {
        let before = value;
        for i in 0..k {
            if iterations >= cap {
                break 'outer;
            }
            iterations += 1;
            if let Some(t) = line_min(&mut y, &[(i, 1.0)], &mut value) {
                lambda[i] += t;
            }
        }
        if before - value < tol {
            // Diagonal escape pass; resume cycling only on real progress.
            let mut improved = false;
            for i in 0..k {
                for j in (i + 1)..k {
                    for s in [1.0, -1.0] {
                        if iterations >= cap {
                            break 'outer;
                        }
                        iterations += 1;
                        let dir = [(i, 1.0), (j, s)];
                        if let Some(t) = line_min(&mut y, &dir, &mut value) {
                            lambda[i] += t;
                            lambda[j] += s * t;
                            if before - value >= tol {
                                improved = true;
                            }
                        }
                    }
                }
            }
            if !improved {
                converged = true;
                break;
            }
        }
    }

    QuotientMin { value, lambda, iterations, converged }
}
