//! Detection loss as independent binomial thinning on all four polarization
//! modes, plus the lossy outcome statistics: an exact path that factorizes
//! per detector side, and a Monte Carlo path with per-cell reproducible
//! random streams.

use crate::error::{Error, Result};
use crate::math::{binomial_pmf, splitmix64, BinomialTable};
use crate::measure::{JointOutcomeProbs, MeasurementScheme};
use crate::state::{CoefficientMatrix, SpdcWeights};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Uniform transmittivity applied independently to the four modes
/// (two polarizations on each side).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    eta: f64,
}

impl LossChannel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "transmittivity must lie in [0, 1], got {eta}"
            )));
        }
        Ok(Self { eta })
    }

    pub fn identity() -> Self {
        Self { eta: 1.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn is_identity(&self) -> bool {
        self.eta == 1.0
    }
}

/// Monte Carlo sampling configuration. `workers = 0` keeps the global thread
/// pool; any other value runs on a dedicated pool of that size. Results
/// depend only on `seed` and `shots`, never on the worker count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub shots: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shot count must be positive".into()));
        }
        Ok(Self { shots, seed, workers: 0 })
    }
}

/// Photon-number distribution after thinning a definite count `c` with
/// transmittivity `eta`; this is just Binomial(c, eta).
pub fn thin_binomial_exact(c: usize, eta: f64) -> Result<Vec<f64>> {
    LossChannel::new(eta)?;
    Ok(binomial_pmf(c, eta))
}

/// Angle-independent map from Fock cells (m, p) of an n-pair sector to joint
/// outcome probabilities after loss, for a fixed scheme pair and channel.
///
/// Fringes over many analyzer angles reuse one matrix: only the cell weights
/// change with the angle.
#[derive(Debug, Clone)]
pub struct OutcomeMatrix {
    n: usize,
    probs: Vec<[[f64; 3]; 3]>,
    se: Vec<[[f64; 3]; 3]>,
}

impl OutcomeMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Joint outcome probabilities for the cell with m perpendicular photons
    /// on side A and p parallel photons on side B.
    pub fn cell(&self, m: usize, p: usize) -> &[[f64; 3]; 3] {
        &self.probs[m * (self.n + 1) + p]
    }

    pub fn cell_se(&self, m: usize, p: usize) -> &[[f64; 3]; 3] {
        &self.se[m * (self.n + 1) + p]
    }
}

/// Exact outcome probabilities of one detector side holding `c_pi` photons in
/// the analyzer mode and `c_perp` in the orthogonal mode, after thinning.
///
/// The four-fold sum over surviving counts factorizes per side; each side
/// then reduces to O(c) sums over precomputed pmf/cdf rows.
pub fn side_outcome_probs(
    c_pi: usize,
    c_perp: usize,
    scheme: MeasurementScheme,
    table: &BinomialTable,
) -> Result<[f64; 3]> {
    let pmf1 = table.pmf(c_pi);
    let pmf2 = table.pmf(c_perp);
    let pmf2_at = |i: usize| if i <= c_perp { pmf2[i] } else { 0.0 };

    let pure = || {
        let mut plus = 0.0;
        let mut minus = 0.0;
        for (i, &w) in pmf1.iter().enumerate() {
            plus += w * (table.cdf(c_perp, i as i64 - 1) + 0.5 * pmf2_at(i));
        }
        for (j, &w) in pmf2.iter().enumerate() {
            minus += w * (table.cdf(c_pi, j as i64 - 1) + 0.5 * if j <= c_pi { pmf1[j] } else { 0.0 });
        }
        [plus, minus, 0.0]
    };

    match scheme {
        MeasurementScheme::Parity => Err(Error::ParityOutcomeMap),
        MeasurementScheme::PureDichotomic => Ok(pure()),
        MeasurementScheme::OrthogonalityFilter { k: 0 }
        | MeasurementScheme::ThresholdDetector { h: 0 } => Ok(pure()),
        MeasurementScheme::OrthogonalityFilter { k } => {
            let k = k as i64;
            let plus: f64 = pmf1
                .iter()
                .enumerate()
                .map(|(i, &w)| w * table.cdf(c_perp, i as i64 - k))
                .sum();
            let minus: f64 = pmf2
                .iter()
                .enumerate()
                .map(|(j, &w)| w * table.cdf(c_pi, j as i64 - k))
                .sum();
            Ok([plus, minus, (1.0 - plus - minus).max(0.0)])
        }
        MeasurementScheme::ThresholdDetector { h } => {
            let h = h as i64;
            let strict = |pmf_lead: &[f64], c_other: usize| -> f64 {
                pmf_lead
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| {
                        let i = i as i64;
                        w * (table.cdf(c_other, i - 1) - table.cdf(c_other, h - i - 1)).max(0.0)
                    })
                    .sum()
            };
            let tie: f64 = pmf1
                .iter()
                .enumerate()
                .filter(|&(i, _)| 2 * i as i64 >= h)
                .map(|(i, &w)| w * pmf2_at(i))
                .sum();
            let inconclusive: f64 = pmf1
                .iter()
                .enumerate()
                .map(|(i, &w)| w * table.cdf(c_perp, h - 1 - i as i64))
                .sum();
            Ok([
                strict(pmf1, c_perp) + 0.5 * tie,
                strict(pmf2, c_pi) + 0.5 * tie,
                inconclusive.min(1.0),
            ])
        }
    }
}

/// Exact lossy outcome matrix of an n-pair sector.
pub fn outcome_matrix_exact(
    n: usize,
    scheme_a: MeasurementScheme,
    scheme_b: MeasurementScheme,
    channel: &LossChannel,
) -> Result<OutcomeMatrix> {
    let table = BinomialTable::new(n, channel.eta());
    let side_a: Vec<[f64; 3]> = (0..=n)
        .map(|m| side_outcome_probs(n - m, m, scheme_a, &table))
        .collect::<Result<_>>()?;
    let side_b: Vec<[f64; 3]> = (0..=n)
        .map(|p| side_outcome_probs(p, n - p, scheme_b, &table))
        .collect::<Result<_>>()?;

    let mut probs = Vec::with_capacity((n + 1) * (n + 1));
    for wa in &side_a {
        for wb in &side_b {
            let mut cell = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    cell[a][b] = wa[a] * wb[b];
                }
            }
            probs.push(cell);
        }
    }
    let se = vec![[[0.0; 3]; 3]; probs.len()];
    Ok(OutcomeMatrix { n, probs, se })
}

fn draw(dist: Option<&Binomial>, trials: u64, eta: f64, rng: &mut ChaCha8Rng) -> u64 {
    match dist {
        Some(d) => d.sample(rng),
        None => {
            if eta >= 1.0 {
                trials
            } else {
                0
            }
        }
    }
}

fn make_binomial(trials: u64, eta: f64) -> Option<Binomial> {
    if trials == 0 || eta == 0.0 || eta == 1.0 {
        None
    } else {
        Some(Binomial::new(trials, eta).expect("eta validated by LossChannel"))
    }
}

fn classify(c_pi: u64, c_perp: u64, scheme: MeasurementScheme, rng: &mut ChaCha8Rng) -> usize {
    let sign = |c_pi: u64, c_perp: u64, rng: &mut ChaCha8Rng| {
        use std::cmp::Ordering::*;
        match c_pi.cmp(&c_perp) {
            Greater => 0,
            Less => 1,
            Equal => usize::from(!rng.gen_bool(0.5)),
        }
    };
    match scheme {
        MeasurementScheme::Parity => unreachable!("rejected before sampling"),
        MeasurementScheme::PureDichotomic
        | MeasurementScheme::OrthogonalityFilter { k: 0 }
        | MeasurementScheme::ThresholdDetector { h: 0 } => sign(c_pi, c_perp, rng),
        MeasurementScheme::OrthogonalityFilter { k } => {
            let k = k as u64;
            if c_pi >= c_perp + k {
                0
            } else if c_perp >= c_pi + k {
                1
            } else {
                2
            }
        }
        MeasurementScheme::ThresholdDetector { h } => {
            if c_pi + c_perp < h as u64 {
                2
            } else {
                sign(c_pi, c_perp, rng)
            }
        }
    }
}

fn cell_seed(seed: u64, cell: u64) -> u64 {
    splitmix64(seed.wrapping_add(splitmix64(cell.wrapping_add(1))))
}

/// Monte Carlo estimate of the lossy outcome matrix. Every Fock cell owns an
/// independent random stream derived from the seed and the cell index, so the
/// result is identical for any worker count; ties are resolved by coin flips
/// from the same stream.
pub fn outcome_matrix_mc(
    n: usize,
    scheme_a: MeasurementScheme,
    scheme_b: MeasurementScheme,
    channel: &LossChannel,
    cfg: &McConfig,
) -> Result<OutcomeMatrix> {
    if scheme_a.is_parity() || scheme_b.is_parity() {
        return Err(Error::ParityOutcomeMap);
    }
    if cfg.shots == 0 {
        return Err(Error::InvalidParameter("shot count must be positive".into()));
    }
    let eta = channel.eta();
    let cells = (n + 1) * (n + 1);

    let simulate = |cell: usize| -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
        let (m, p) = (cell / (n + 1), cell % (n + 1));
        let trials = [(n - m) as u64, m as u64, p as u64, (n - p) as u64];
        let dists: Vec<Option<Binomial>> =
            trials.iter().map(|&t| make_binomial(t, eta)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cfg.seed, cell as u64));
        let mut counts = [[0u64; 3]; 3];
        for _ in 0..cfg.shots {
            let a_pi = draw(dists[0].as_ref(), trials[0], eta, &mut rng);
            let a_perp = draw(dists[1].as_ref(), trials[1], eta, &mut rng);
            let b_pi = draw(dists[2].as_ref(), trials[2], eta, &mut rng);
            let b_perp = draw(dists[3].as_ref(), trials[3], eta, &mut rng);
            let a = classify(a_pi, a_perp, scheme_a, &mut rng);
            let b = classify(b_pi, b_perp, scheme_b, &mut rng);
            counts[a][b] += 1;
        }
        let shots = cfg.shots as f64;
        let mut probs = [[0.0; 3]; 3];
        let mut se = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let q = counts[a][b] as f64 / shots;
                probs[a][b] = q;
                se[a][b] = (q * (1.0 - q) / shots).sqrt();
            }
        }
        (probs, se)
    };

    let run = || (0..cells).into_par_iter().map(simulate).collect::<Vec<_>>();
    let results = if cfg.workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run)
    };

    let (probs, se) = results.into_iter().unzip();
    Ok(OutcomeMatrix { n, probs, se })
}

/// Contract an amplitude table with an outcome matrix of the same sector.
pub fn fringe_point(
    coeffs: &CoefficientMatrix,
    matrix: &OutcomeMatrix,
) -> Result<JointOutcomeProbs> {
    if coeffs.n() != matrix.n {
        return Err(Error::DimensionMismatch(format!(
            "coefficients for n = {} against outcome matrix for n = {}",
            coeffs.n(),
            matrix.n
        )));
    }
    let n = matrix.n;
    let mut out = JointOutcomeProbs::zero();
    let mut var = [[0.0f64; 3]; 3];
    for m in 0..=n {
        for p in 0..=n {
            let w = coeffs.prob(m, p);
            if w == 0.0 {
                continue;
            }
            let cell = matrix.cell(m, p);
            let cell_se = matrix.cell_se(m, p);
            for a in 0..3 {
                for b in 0..3 {
                    out.p[a][b] += w * cell[a][b];
                    var[a][b] += (w * cell_se[a][b]).powi(2);
                }
            }
        }
    }
    for a in 0..3 {
        for b in 0..3 {
            out.se[a][b] = var[a][b].sqrt();
        }
    }
    Ok(out)
}

/// Joint outcome probabilities for the full SPDC state: the sectors are
/// incoherent, so their joint tables mix with the photon-number weights.
/// Monte Carlo sectors draw from streams additionally keyed by the sector.
pub fn spdc_fringe_point(
    weights: &SpdcWeights,
    theta: f64,
    scheme_a: MeasurementScheme,
    scheme_b: MeasurementScheme,
    channel: &LossChannel,
    mc: Option<&McConfig>,
) -> Result<JointOutcomeProbs> {
    let mut out = JointOutcomeProbs::zero();
    let mut var = [[0.0f64; 3]; 3];
    for (n, w) in weights.weights().iter().copied().enumerate() {
        if w == 0.0 {
            continue;
        }
        let coeffs = CoefficientMatrix::build(n, theta)?;
        let matrix = match mc {
            None => outcome_matrix_exact(n, scheme_a, scheme_b, channel)?,
            Some(cfg) => {
                let sector_cfg = McConfig {
                    seed: splitmix64(cfg.seed ^ (0x5ec7 + n as u64)),
                    ..*cfg
                };
                outcome_matrix_mc(n, scheme_a, scheme_b, channel, &sector_cfg)?
            }
        };
        let sector = fringe_point(&coeffs, &matrix)?;
        for a in 0..3 {
            for b in 0..3 {
                out.p[a][b] += w * sector.p[a][b];
                var[a][b] += (w * sector.se[a][b]).powi(2);
            }
        }
    }
    for a in 0..3 {
        for b in 0..3 {
            out.se[a][b] = var[a][b].sqrt();
        }
    }
    Ok(out)
}
