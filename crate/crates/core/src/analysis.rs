//! Fringe sweeps and the derived diagnostics: visibility, single-side
//! success probability, Fourier harmonic content, and the ratio against the
//! classical triangular response.

use crate::error::{Error, Result};
use crate::loss::{
    fringe_point, outcome_matrix_exact, outcome_matrix_mc, LossChannel, McConfig, OutcomeMatrix,
};
use crate::math::{splitmix64, BinomialTable};
use crate::measure::{JointOutcomeProbs, MeasurementScheme, Outcome};
use crate::state::{CoefficientMatrix, StateSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A fringe: one joint outcome table per analyzer angle, with the full
/// configuration that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FringePattern {
    pub theta_grid: Vec<f64>,
    pub points: Vec<JointOutcomeProbs>,
    pub state: StateSpec,
    pub scheme_a: MeasurementScheme,
    pub scheme_b: MeasurementScheme,
    pub eta: f64,
    pub mc: Option<McConfig>,
}

/// Visibility and success probability as a function of a filter threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisibilityCurve {
    pub thresholds: Vec<u32>,
    pub visibility: Vec<f64>,
    pub visibility_se: Vec<f64>,
    pub success_probability: Vec<f64>,
}

/// `points` equally spaced angles covering [0, pi), starting at 0.
pub fn uniform_grid(points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::InvalidParameter("grid needs at least one point".into()));
    }
    Ok((0..points).map(|j| PI * j as f64 / points as f64).collect())
}

fn sector_matrices(
    state: &StateSpec,
    scheme_a: MeasurementScheme,
    scheme_b: MeasurementScheme,
    channel: &LossChannel,
    mc: Option<&McConfig>,
) -> Result<Vec<(usize, f64, OutcomeMatrix)>> {
    state
        .sectors()
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(n, w)| {
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
            Ok((n, w, matrix))
        })
        .collect()
}

/// Sweep the relative analyzer angle over `grid`, building the lossy outcome
/// matrices once per sector and reusing them at every angle.
pub fn fringe_sweep(
    state: &StateSpec,
    scheme_a: MeasurementScheme,
    scheme_b: MeasurementScheme,
    channel: &LossChannel,
    grid: &[f64],
    mc: Option<&McConfig>,
) -> Result<FringePattern> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty angle grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("angle grid must be strictly increasing".into()));
    }
    let sectors = sector_matrices(state, scheme_a, scheme_b, channel, mc)?;

    let points: Vec<JointOutcomeProbs> = grid
        .par_iter()
        .map(|&theta| -> Result<JointOutcomeProbs> {
            let mut out = JointOutcomeProbs::zero();
            let mut var = [[0.0f64; 3]; 3];
            for (n, w, matrix) in &sectors {
                let coeffs = CoefficientMatrix::build(*n, theta)?;
                let sector = fringe_point(&coeffs, matrix)?;
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
        })
        .collect::<Result<_>>()?;

    Ok(FringePattern {
        theta_grid: grid.to_vec(),
        points,
        state: state.clone(),
        scheme_a,
        scheme_b,
        eta: channel.eta(),
        mc: mc.copied(),
    })
}

fn require_full_period(fringe: &FringePattern) -> Result<()> {
    let span = fringe.theta_grid.last().unwrap() - fringe.theta_grid[0];
    let step = PI / fringe.theta_grid.len() as f64;
    if fringe.theta_grid.len() < 2 || span + 2.0 * step < PI {
        return Err(Error::InvalidParameter(
            "fringe must cover a full period [0, pi)".into(),
        ));
    }
    Ok(())
}

/// Fringe normalized pointwise by the conclusive probability, with
/// first-order standard errors.
fn normalized_fringe(
    fringe: &FringePattern,
    pair: (Outcome, Outcome),
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut y = Vec::with_capacity(fringe.points.len());
    let mut se = Vec::with_capacity(fringe.points.len());
    for point in &fringe.points {
        let conclusive = point.conclusive_probability();
        if conclusive <= 0.0 {
            return Err(Error::DegenerateFringe(
                "conclusive probability vanishes on the grid".into(),
            ));
        }
        y.push(point.get(pair.0, pair.1) / conclusive);
        se.push(point.se[pair.0.index()][pair.1.index()] / conclusive);
    }
    Ok((y, se))
}

/// (max - min)/(max + min) of the conclusive-normalized fringe for one
/// outcome pair; returns the visibility and its propagated standard error.
pub fn visibility(fringe: &FringePattern, pair: (Outcome, Outcome)) -> Result<(f64, f64)> {
    require_full_period(fringe)?;
    let (y, se) = normalized_fringe(fringe, pair)?;
    let (mut hi, mut lo) = (0usize, 0usize);
    for j in 1..y.len() {
        if y[j] > y[hi] {
            hi = j;
        }
        if y[j] < y[lo] {
            lo = j;
        }
    }
    let (max, min) = (y[hi], y[lo]);
    let denom = max + min;
    if denom <= 0.0 {
        return Err(Error::DegenerateFringe(format!(
            "selected outcome pair vanishes identically (max + min = {denom})"
        )));
    }
    let v = (max - min) / denom;
    let dmax = 2.0 * min / denom.powi(2);
    let dmin = 2.0 * max / denom.powi(2);
    let v_se = ((dmax * se[hi]).powi(2) + (dmin * se[lo]).powi(2)).sqrt();
    Ok((v, v_se))
}

/// Single-side conclusive probability: the chance one detector yields a
/// conclusive sign for the given state after loss. The perpendicular-count
/// marginal of every sector is uniform, so the sector term is an average
/// over the n + 1 count splits; the threshold detector depends only on the
/// thinned total and short-circuits to a binomial tail.
pub fn success_probability(
    state: &StateSpec,
    scheme: MeasurementScheme,
    channel: &LossChannel,
) -> Result<f64> {
    if scheme.is_parity() {
        return Err(Error::ParityOutcomeMap);
    }
    let table = BinomialTable::new(state.max_sector(), channel.eta());
    let mut total = 0.0;
    for (n, w) in state.sectors() {
        if w == 0.0 {
            continue;
        }
        let conclusive = match scheme {
            MeasurementScheme::ThresholdDetector { h } if h > 0 => {
                1.0 - table.cdf(n, h as i64 - 1)
            }
            _ => {
                let mut acc = 0.0;
                for m in 0..=n {
                    acc += 1.0 - side_outcome_inconclusive(n - m, m, scheme, &table)?;
                }
                acc / (n + 1) as f64
            }
        };
        total += w * conclusive;
    }
    Ok(total)
}

fn side_outcome_inconclusive(
    c_pi: usize,
    c_perp: usize,
    scheme: MeasurementScheme,
    table: &BinomialTable,
) -> Result<f64> {
    Ok(crate::loss::side_outcome_probs(c_pi, c_perp, scheme, table)?[2])
}

/// Discrete Fourier magnitudes of the raw fringe over [0, pi), indexed by
/// harmonic (the angular frequency in theta). The grid has period pi, so
/// only even harmonics can be nonzero; bin r of the DFT is harmonic 2r.
pub fn harmonic_content(fringe: &FringePattern, pair: (Outcome, Outcome)) -> Result<Vec<f64>> {
    require_full_period(fringe)?;
    let grid = &fringe.theta_grid;
    let n_pts = grid.len();
    let step = PI / n_pts as f64;
    for (j, &theta) in grid.iter().enumerate() {
        if (theta - j as f64 * step).abs() > 1e-9 {
            return Err(Error::InvalidParameter(
                "harmonic analysis needs a uniform grid over [0, pi)".into(),
            ));
        }
    }
    let needed = 4 * fringe.state.max_sector() + 2;
    if n_pts < needed {
        return Err(Error::InvalidParameter(format!(
            "grid of {n_pts} points aliases harmonics; need at least {needed}"
        )));
    }

    let y: Vec<f64> = fringe
        .points
        .iter()
        .map(|p| p.get(pair.0, pair.1))
        .collect();
    let mut mags = vec![0.0; 2 * (n_pts / 2) + 1];
    for r in 0..=n_pts / 2 {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (j, &v) in y.iter().enumerate() {
            let phase = -2.0 * PI * (r * j) as f64 / n_pts as f64;
            re += v * phase.cos();
            im += v * phase.sin();
        }
        let scale = if r == 0 || 2 * r == n_pts { 1.0 } else { 2.0 };
        mags[2 * r] = scale * re.hypot(im) / n_pts as f64;
    }
    Ok(mags)
}

/// Fringe divided by the classical triangular response: the period-pi
/// triangular wave peaking at 0.5 on the fringe's maximum and touching 0 a
/// quarter period away. Points where the reference vanishes are excluded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearReferenceRatio {
    pub thetas: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Number of sign changes of (ratio - 1) along the retained grid.
    pub unity_crossings: usize,
}

pub fn linear_reference_ratio(
    fringe: &FringePattern,
    pair: (Outcome, Outcome),
) -> Result<LinearReferenceRatio> {
    require_full_period(fringe)?;
    let y: Vec<f64> = fringe
        .points
        .iter()
        .map(|p| p.get(pair.0, pair.1))
        .collect();
    let hi = (1..y.len()).fold(0, |best, j| if y[j] > y[best] { j } else { best });
    let theta_max = fringe.theta_grid[hi];

    let reference = |theta: f64| {
        let mut d = (theta - theta_max).rem_euclid(PI);
        if d > PI / 2.0 {
            d = PI - d;
        }
        0.5 * (1.0 - d / (PI / 2.0))
    };

    let mut out = LinearReferenceRatio {
        thetas: Vec::new(),
        ratios: Vec::new(),
        unity_crossings: 0,
    };
    let mut last_sign = 0i8;
    for (j, &theta) in fringe.theta_grid.iter().enumerate() {
        let l = reference(theta);
        if l <= 1e-12 {
            continue;
        }
        let r = y[j] / l;
        let sign = if r > 1.0 {
            1
        } else if r < 1.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                out.unity_crossings += 1;
            }
            last_sign = sign;
        }
        out.thetas.push(theta);
        out.ratios.push(r);
    }
    Ok(out)
}

/// Visibility and success probability for a family of schemes sharing one
/// fringe configuration (e.g. a threshold sweep).
pub fn visibility_curve(
    state: &StateSpec,
    schemes: &[MeasurementScheme],
    channel: &LossChannel,
    grid: &[f64],
    pair: (Outcome, Outcome),
    mc: Option<&McConfig>,
) -> Result<VisibilityCurve> {
    let mut curve = VisibilityCurve {
        thresholds: Vec::new(),
        visibility: Vec::new(),
        visibility_se: Vec::new(),
        success_probability: Vec::new(),
    };
    for &scheme in schemes {
        let threshold = match scheme {
            MeasurementScheme::OrthogonalityFilter { k } => k,
            MeasurementScheme::ThresholdDetector { h } => h,
            _ => 0,
        };
        let fringe = fringe_sweep(state, scheme, scheme, channel, grid, mc)?;
        let (v, v_se) = visibility(&fringe, pair)?;
        curve.thresholds.push(threshold);
        curve.visibility.push(v);
        curve.visibility_se.push(v_se);
        curve.success_probability.push(success_probability(state, scheme, channel)?);
    }
    Ok(curve)
}
