//! Deterministic sequence helpers: a splitmix-style mixer, a Kronecker
//! (Weyl) low-discrepancy stream, and an inverse normal CDF used to turn
//! uniform candidates into direction vectors.

/// SplitMix64 step. Used both as a seed mixer and as a tiny deterministic
/// generator for tests.
pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a stream index into an independent child seed.
pub(crate) fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut s = seed ^ index.wrapping_mul(0xa076_1d64_78bd_642f);
    splitmix64(&mut s)
}

pub(crate) struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub(crate) fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    pub(crate) fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub(crate) fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

/// Additive Kronecker sequence on `[0,1)^dim` with irrational increments
/// `frac(sqrt(p_i))` and a seeded phase. Equidistributes faster than a
/// pseudo-random stream for the net-extraction use case.
pub(crate) struct WeylSequence {
    state: Vec<f64>,
    alpha: Vec<f64>,
}

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

impl WeylSequence {
    pub(crate) fn new(dim: usize, seed: u64) -> Self {
        let mut mixer = SplitMix::new(seed);
        let mut state = Vec::with_capacity(dim);
        let mut alpha = Vec::with_capacity(dim);
        for i in 0..dim {
            state.push(mixer.unit());
            let p = PRIMES[i % PRIMES.len()] + 97 * (i / PRIMES.len()) as u64;
            alpha.push((p as f64).sqrt().fract());
        }
        WeylSequence { state, alpha }
    }

    pub(crate) fn next_point(&mut self, out: &mut [f64]) {
        for i in 0..self.state.len() {
            self.state[i] += self.alpha[i];
            if self.state[i] >= 1.0 {
                self.state[i] -= 1.0;
            }
            out[i] = self.state[i];
        }
    }
}

/// Acklam's rational approximation to the standard normal inverse CDF.
/// Absolute error below 1.2e-9 over (0, 1), plenty for direction sampling.
pub(crate) fn inv_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
