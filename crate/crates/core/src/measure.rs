//! Dichotomization schemes as outcome maps on photon-count pairs, joint
//! outcome probabilities, and the parity benchmark correlation.

use crate::error::{Error, Result};
use crate::state::CoefficientMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// How a pulse's polarization counts (n_pi, m_perp) collapse to {+1, -1, 0}.
///
/// An orthogonality filter with k = 0 and a threshold detector with h = 0
/// both reduce to the pure dichotomic map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementScheme {
    /// Sign of the count difference; equal counts split 1/2 - 1/2.
    PureDichotomic,
    /// Conclusive only when |n_pi - m_perp| >= k (k >= 1); the discarded
    /// region is state dependent.
    OrthogonalityFilter { k: u32 },
    /// Conclusive only when n_pi + m_perp >= h; the discarded region is
    /// rotation invariant.
    ThresholdDetector { h: u32 },
    /// Ideal-resolution benchmark (-1)^m; exposed through
    /// [`parity_correlation`] only, never as an outcome map.
    Parity,
}

impl MeasurementScheme {
    pub fn is_parity(&self) -> bool {
        matches!(self, MeasurementScheme::Parity)
    }
}

impl fmt::Display for MeasurementScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasurementScheme::PureDichotomic => write!(f, "dichotomic"),
            MeasurementScheme::OrthogonalityFilter { k } => write!(f, "of(k={k})"),
            MeasurementScheme::ThresholdDetector { h } => write!(f, "td(h={h})"),
            MeasurementScheme::Parity => write!(f, "parity"),
        }
    }
}

/// Outcome index convention used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
    Inconclusive,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Plus, Outcome::Minus, Outcome::Inconclusive];

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

/// Probabilities assigned to the three outcomes for one count pair; entries
/// are 0, 1/2 or 1 by construction and always sum to 1 exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeWeights {
    pub plus: f64,
    pub minus: f64,
    pub inconclusive: f64,
}

impl OutcomeWeights {
    pub fn get(&self, o: Outcome) -> f64 {
        match o {
            Outcome::Plus => self.plus,
            Outcome::Minus => self.minus,
            Outcome::Inconclusive => self.inconclusive,
        }
    }

    fn plus() -> Self {
        Self { plus: 1.0, minus: 0.0, inconclusive: 0.0 }
    }

    fn minus() -> Self {
        Self { plus: 0.0, minus: 1.0, inconclusive: 0.0 }
    }

    fn inconclusive() -> Self {
        Self { plus: 0.0, minus: 0.0, inconclusive: 1.0 }
    }

    fn tie() -> Self {
        Self { plus: 0.5, minus: 0.5, inconclusive: 0.0 }
    }
}

/// Outcome map for one detector: counts (n_pi, m_perp) in the analysis basis.
///
/// Ties are deterministic half-weights here; the Monte Carlo loss path
/// resolves them with coin flips instead.
pub fn outcome_weights(n_pi: u64, m_perp: u64, scheme: MeasurementScheme) -> Result<OutcomeWeights> {
    let sign_split = || {
        if n_pi > m_perp {
            OutcomeWeights::plus()
        } else if m_perp > n_pi {
            OutcomeWeights::minus()
        } else {
            OutcomeWeights::tie()
        }
    };
    match scheme {
        MeasurementScheme::Parity => Err(Error::ParityOutcomeMap),
        MeasurementScheme::PureDichotomic => Ok(sign_split()),
        MeasurementScheme::OrthogonalityFilter { k } => {
            if k == 0 {
                return Ok(sign_split());
            }
            let k = k as u64;
            if n_pi >= m_perp + k {
                Ok(OutcomeWeights::plus())
            } else if m_perp >= n_pi + k {
                Ok(OutcomeWeights::minus())
            } else {
                Ok(OutcomeWeights::inconclusive())
            }
        }
        MeasurementScheme::ThresholdDetector { h } => {
            if n_pi + m_perp < h as u64 {
                Ok(OutcomeWeights::inconclusive())
            } else {
                Ok(sign_split())
            }
        }
    }
}

/// Joint probabilities of the nine outcome pairs for one configuration,
/// indexed by [`Outcome::index`]: 0 = +1, 1 = -1, 2 = inconclusive.
/// `se` carries per-entry standard errors (zero on the exact path).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JointOutcomeProbs {
    pub p: [[f64; 3]; 3],
    pub se: [[f64; 3]; 3],
}

impl JointOutcomeProbs {
    pub fn zero() -> Self {
        Self { p: [[0.0; 3]; 3], se: [[0.0; 3]; 3] }
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.p[a.index()][b.index()]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    /// Probability that both sides produced a conclusive outcome.
    pub fn conclusive_probability(&self) -> f64 {
        self.p[0][0] + self.p[0][1] + self.p[1][0] + self.p[1][1]
    }

    /// Conditional correlation over the conclusive events.
    pub fn correlation(&self) -> Result<f64> {
        let conclusive = self.conclusive_probability();
        if conclusive <= 0.0 {
            return Err(Error::UndefinedCorrelation);
        }
        Ok((self.p[0][0] + self.p[1][1] - self.p[0][1] - self.p[1][0]) / conclusive)
    }

    /// Marginal outcome distribution of side A.
    pub fn marginal_a(&self) -> [f64; 3] {
        [
            self.p[0].iter().sum(),
            self.p[1].iter().sum(),
            self.p[2].iter().sum(),
        ]
    }
}

/// Joint outcome probabilities of a lossless singlet sector: side A measures
/// counts (n-m, m) in the fixed basis, side B counts (p, n-p) in the rotated
/// basis, weighted by the squared amplitudes.
pub fn joint_probabilities(
    coeffs: &CoefficientMatrix,
    scheme_a: MeasurementScheme,
    scheme_b: MeasurementScheme,
) -> Result<JointOutcomeProbs> {
    if scheme_a.is_parity() || scheme_b.is_parity() {
        return Err(Error::ParityOutcomeMap);
    }
    let n = coeffs.n();
    let side_a: Vec<OutcomeWeights> = (0..=n)
        .map(|m| outcome_weights((n - m) as u64, m as u64, scheme_a))
        .collect::<Result<_>>()?;
    let side_b: Vec<OutcomeWeights> = (0..=n)
        .map(|p| outcome_weights(p as u64, (n - p) as u64, scheme_b))
        .collect::<Result<_>>()?;

    let mut out = JointOutcomeProbs::zero();
    for m in 0..=n {
        for p in 0..=n {
            let w = coeffs.prob(m, p);
            if w == 0.0 {
                continue;
            }
            for a in Outcome::ALL {
                let wa = side_a[m].get(a);
                if wa == 0.0 {
                    continue;
                }
                for b in Outcome::ALL {
                    let wb = side_b[p].get(b);
                    if wb != 0.0 {
                        out.p[a.index()][b.index()] += w * wa * wb;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Two-mode parity correlation (-1)^n sin((n+1) theta) / ((n+1) sin theta),
/// with the analytic limit at multiples of pi.
pub fn parity_correlation(n: usize, theta: f64) -> f64 {
    let lead = if n % 2 == 0 { 1.0 } else { -1.0 };
    let s = theta.sin();
    if s.abs() < 1e-9 {
        let turns = (theta / PI).round() as i64;
        let sign = if (n as i64 * turns).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        return lead * sign;
    }
    lead * ((n as f64 + 1.0) * theta).sin() / ((n as f64 + 1.0) * s)
}
