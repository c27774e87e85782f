//! Singlet spin-n/2 states in rotated polarization bases and the SPDC
//! photon-number weight distribution.
//!
//! The n-pair singlet is perfectly anti-correlated in any linear basis; all
//! downstream measurements are diagonal in photon number, so the state is
//! fully described by the real amplitude table over Fock occupation pairs.

use crate::error::{Error, Result};
use crate::math::ln_factorial;
use serde::{Deserialize, Serialize};

/// Default hard cap on the pair number n. An (n+1)^2 amplitude table per
/// analyzer angle stays comfortably inside a laptop budget below this.
pub const DEFAULT_N_CAP: usize = 400;

/// An n-pair singlet; each spatial mode carries n photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingletSpec {
    pub n: usize,
}

/// Either a single photon-number sector or the full SPDC superposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum StateSpec {
    Singlet(usize),
    Spdc(SpdcWeights),
}

impl StateSpec {
    /// Largest sector index this state touches.
    pub fn max_sector(&self) -> usize {
        match self {
            StateSpec::Singlet(n) => *n,
            StateSpec::Spdc(w) => w.n_max(),
        }
    }

    /// Sector weights as (n, probability) pairs.
    pub fn sectors(&self) -> Vec<(usize, f64)> {
        match self {
            StateSpec::Singlet(n) => vec![(*n, 1.0)],
            StateSpec::Spdc(w) => w.weights().iter().copied().enumerate().collect(),
        }
    }
}

/// Amplitudes eps[m][p] of the n-pair singlet when mode A is read in the
/// fixed {pi_+, pi_-} basis and mode B in the basis rotated by `theta`.
///
/// Row m counts pi_- photons on A (A holds (n-m, m) photons); column p counts
/// pi_theta photons on B (B holds (p, n-p) photons).
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    n: usize,
    theta: f64,
    amp: Vec<f64>,
}

impl CoefficientMatrix {
    /// Build the amplitude table with the default size cap.
    pub fn build(n: usize, theta: f64) -> Result<Self> {
        Self::build_with_cap(n, theta, DEFAULT_N_CAP)
    }

    /// Build the amplitude table, rejecting n above `cap`.
    pub fn build_with_cap(n: usize, theta: f64, cap: usize) -> Result<Self> {
        if n > cap {
            return Err(Error::SizeCap { n, cap });
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter("theta must be finite".into()));
        }

        let dim = n + 1;
        let mut amp = vec![0.0; dim * dim];
        let norm = ((n + 1) as f64).sqrt();

        // eps[m][p] is, up to the (-1)^m singlet phase, the two-mode basis
        // rotation matrix element <p, n-p| R(theta) |m, n-m>: the spin-n/2
        // rotation d^{n/2}_{p-n/2, m-n/2}(2 theta). The closed-form sum for
        // these elements cancels catastrophically beyond n ~ 60, so they are
        // evaluated through the Jacobi-polynomial recurrence, which keeps
        // relative errors near machine precision up to the size cap.
        let beta = 2.0 * theta;
        for m in 0..dim {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for p in 0..dim {
                amp[m * dim + p] = sign * rotation_element(n, p, m, beta) / norm;
            }
        }

        Ok(Self { n, theta, amp })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Amplitude eps[m][p].
    pub fn amp(&self, m: usize, p: usize) -> f64 {
        self.amp[m * (self.n + 1) + p]
    }

    /// Squared amplitude |eps[m][p]|^2, the weight of the Fock cell (m, p).
    pub fn prob(&self, m: usize, p: usize) -> f64 {
        let a = self.amp(m, p);
        a * a
    }

    /// Sum of all squared amplitudes; 1 up to rounding for a valid table.
    pub fn norm_squared(&self) -> f64 {
        self.amp.iter().map(|a| a * a).sum()
    }
}

/// Jacobi polynomial P_s^{(a,b)}(x) by the standard three-term recurrence
/// in the degree, which is well conditioned on [-1, 1].
fn jacobi_value(s: usize, a: usize, b: usize, x: f64) -> f64 {
    let (af, bf) = (a as f64, b as f64);
    let mut p0 = 1.0;
    if s == 0 {
        return p0;
    }
    let mut p1 = (af + 1.0) + (af + bf + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=s {
        let kf = k as f64;
        let c1 = 2.0 * kf * (kf + af + bf) * (2.0 * kf + af + bf - 2.0);
        let c2 = (2.0 * kf + af + bf - 1.0)
            * ((2.0 * kf + af + bf) * (2.0 * kf + af + bf - 2.0) * x + af * af - bf * bf);
        let c3 = 2.0 * (kf + af - 1.0) * (kf + bf - 1.0) * (2.0 * kf + af + bf);
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Rotation matrix element of the two-mode (spin-n/2) representation:
/// d^{n/2}_{r - n/2, c - n/2}(beta), where r and c index the photon count in
/// the first mode of the bra and ket states.
///
/// The element is mapped by the d-matrix symmetries into the region where
/// both index sums are non-negative and evaluated there as
/// sqrt(s! (s+a+b)! / ((s+a)! (s+b)!)) sin^a(beta/2) cos^b(beta/2)
/// P_s^{(a,b)}(cos beta), with a = mu' - mu, b = mu' + mu, s = n/2 - mu'.
/// The factorial prefactor and the trigonometric powers combine in the log
/// domain so extreme corner elements neither overflow nor underflow.
fn rotation_element(n: usize, r: usize, c: usize, beta: f64) -> f64 {
    let (mut r, mut c) = (r, c);
    let mut sign = 1.0;
    // d_{mu',mu} = (-1)^{mu'-mu} d_{mu,mu'}
    if r < c {
        std::mem::swap(&mut r, &mut c);
        if (r - c) % 2 == 1 {
            sign = -sign;
        }
    }
    // d_{mu',mu} = d_{-mu,-mu'}, which preserves the ordering above
    if r + c < n {
        let (nr, nc) = (n - c, n - r);
        r = nr;
        c = nc;
    }
    let a = r - c;
    let b = r + c - n;
    let s = n - r;

    let half = beta / 2.0;
    let (sh, ch) = half.sin_cos();
    if (sh == 0.0 && a > 0) || (ch == 0.0 && b > 0) {
        return 0.0;
    }
    let p = jacobi_value(s, a, b, beta.cos());
    if p == 0.0 {
        return 0.0;
    }
    let mut ln_mag = 0.5
        * (ln_factorial(s) + ln_factorial(s + a + b) - ln_factorial(s + a) - ln_factorial(s + b))
        + p.abs().ln();
    sign *= p.signum();
    if a > 0 {
        ln_mag += a as f64 * sh.abs().ln();
        if sh < 0.0 && a % 2 == 1 {
            sign = -sign;
        }
    }
    if b > 0 {
        ln_mag += b as f64 * ch.abs().ln();
        if ch < 0.0 && b % 2 == 1 {
            sign = -sign;
        }
    }
    sign * ln_mag.exp()
}

/// Build the rotated-basis amplitude table for one singlet sector.
pub fn singlet_coefficients(n: usize, theta: f64) -> Result<CoefficientMatrix> {
    CoefficientMatrix::build(n, theta)
}

/// Photon-pair sector probabilities of the SPDC output at gain g, truncated
/// once the discarded tail drops below the requested tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpdcWeights {
    g: f64,
    weights: Vec<f64>,
    truncation_mass: f64,
}

impl SpdcWeights {
    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights.get(n).copied().unwrap_or(0.0)
    }

    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    /// Mean pair number of the truncated distribution.
    pub fn mean_pairs(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, &w)| n as f64 * w)
            .sum()
    }
}

/// Sector probabilities (n+1) (tanh g)^(2n) / (cosh g)^4, truncated at the
/// smallest n_max whose tail mass is at most `truncation_tolerance`.
pub fn spdc_weights(g: f64, truncation_tolerance: f64) -> Result<SpdcWeights> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gain must be finite and nonnegative, got {g}"
        )));
    }
    if !(truncation_tolerance > 0.0 && truncation_tolerance < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "truncation tolerance must be in (0, 1), got {truncation_tolerance}"
        )));
    }

    // weight[n] = (n+1) q^n (1-q)^2 with q = tanh^2 g; the geometric-series
    // identity sum (n+1) q^n = 1/(1-q)^2 makes the total exactly 1.
    let q = g.tanh().powi(2);
    let norm = (1.0 - q).powi(2);
    let mut weights = vec![norm];
    let mut cumulative = norm;
    let mut qn = 1.0;
    while 1.0 - cumulative > truncation_tolerance {
        qn *= q;
        let n = weights.len();
        let w = (n + 1) as f64 * qn * norm;
        weights.push(w);
        cumulative += w;
        if n > 1_000_000 {
            return Err(Error::InvalidParameter(
                "gain too large for the requested truncation tolerance".into(),
            ));
        }
    }

    Ok(SpdcWeights {
        g,
        weights,
        truncation_mass: (1.0 - cumulative).max(0.0),
    })
}

/// Mean photon number per polarization mode, sinh^2 g. Each spatial mode
/// carries twice this on average.
pub fn mean_photons(g: f64) -> f64 {
    g.sinh().powi(2)
}
