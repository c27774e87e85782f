//! Conditional two-party correlations and CHSH maximization.
//!
//! All correlations are conditioned on conclusive events on both sides. For
//! every scheme here the statistics depend only on the relative analyzer
//! angle, so the optimizer works in the three relative angles of the four
//! settings; the lossy outcome matrices are angle independent and are built
//! once per photon-number sector.

use crate::error::{Error, Result};
use crate::loss::{
    fringe_point, outcome_matrix_exact, outcome_matrix_mc, LossChannel, McConfig, OutcomeMatrix,
};
use crate::math::splitmix64;
use crate::measure::{parity_correlation, MeasurementScheme};
use crate::state::{CoefficientMatrix, StateSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Analyzer angles (radians) of the four CHSH settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSettings {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Result of a CHSH evaluation: S = E(a,b) + E(a,b') + E(a',b) - E(a',b'),
/// with the four correlations and both-side conclusive probabilities in that
/// settings order.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChshResult {
    pub s_value: f64,
    pub settings: AngleSettings,
    pub correlations: [f64; 4],
    pub conclusive_probs: [f64; 4],
    pub method: Method,
}

/// Correlation evaluator with per-sector outcome matrices built once.
struct Evaluator {
    sectors: Vec<(usize, f64)>,
    /// One matrix per entry of `sectors`; empty for the parity scheme.
    matrices: Vec<OutcomeMatrix>,
    scheme: MeasurementScheme,
    memo: RefCell<HashMap<u64, (f64, f64)>>,
}

impl Evaluator {
    fn new(
        state: &StateSpec,
        scheme: MeasurementScheme,
        channel: &LossChannel,
        mc: Option<&McConfig>,
    ) -> Result<Self> {
        let sectors: Vec<(usize, f64)> = state
            .sectors()
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .collect();
        let matrices = if scheme.is_parity() {
            if !channel.is_identity() {
                return Err(Error::InvalidParameter(
                    "the parity correlation is defined for the lossless channel only".into(),
                ));
            }
            if mc.is_some() {
                return Err(Error::InvalidParameter(
                    "the parity correlation has no sampling path".into(),
                ));
            }
            Vec::new()
        } else {
            sectors
                .iter()
                .map(|&(n, _)| match mc {
                    None => outcome_matrix_exact(n, scheme, scheme, channel),
                    Some(cfg) => {
                        let sector_cfg = McConfig {
                            seed: splitmix64(cfg.seed ^ (0x5ec7 + n as u64)),
                            ..*cfg
                        };
                        outcome_matrix_mc(n, scheme, scheme, channel, &sector_cfg)
                    }
                })
                .collect::<Result<_>>()?
        };
        Ok(Self { sectors, matrices, scheme, memo: RefCell::new(HashMap::new()) })
    }

    /// (E, conclusive probability) at relative analyzer angle `delta`.
    fn correlation(&self, delta: f64) -> Result<(f64, f64)> {
        let key = delta.to_bits();
        if let Some(&hit) = self.memo.borrow().get(&key) {
            return Ok(hit);
        }
        let out = if self.scheme.is_parity() {
            let e = self
                .sectors
                .iter()
                .map(|&(n, w)| w * parity_correlation(n, delta))
                .sum::<f64>();
            (e, 1.0)
        } else {
            let mut p = [[0.0f64; 3]; 3];
            for (&(n, w), matrix) in self.sectors.iter().zip(&self.matrices) {
                let coeffs = CoefficientMatrix::build(n, delta)?;
                let sector = fringe_point(&coeffs, matrix)?;
                for a in 0..3 {
                    for b in 0..3 {
                        p[a][b] += w * sector.p[a][b];
                    }
                }
            }
            let conclusive = p[0][0] + p[0][1] + p[1][0] + p[1][1];
            if conclusive <= 0.0 {
                return Err(Error::UndefinedCorrelation);
            }
            ((p[0][0] + p[1][1] - p[0][1] - p[1][0]) / conclusive, conclusive)
        };
        self.memo.borrow_mut().insert(key, out);
        Ok(out)
    }

    /// S over the three independent relative angles
    /// (u1, u2, u3) = (b - a, b' - a, b - a'); then b' - a' = u2 - u1 + u3.
    fn s_of(&self, u: [f64; 3]) -> Result<(f64, [f64; 4], [f64; 4])> {
        let deltas = [u[0], u[1], u[2], u[1] - u[0] + u[2]];
        let mut e = [0.0; 4];
        let mut pc = [0.0; 4];
        for (i, &d) in deltas.iter().enumerate() {
            let (ei, pi) = self.correlation(d)?;
            e[i] = ei;
            pc[i] = pi;
        }
        Ok((e[0] + e[1] + e[2] - e[3], e, pc))
    }
}

/// Conditional correlation between two analyzers at absolute angles
/// `angle_a`, `angle_b`; returns (E, both-side conclusive probability).
pub fn correlation_e(
    state: &StateSpec,
    angle_a: f64,
    angle_b: f64,
    scheme: MeasurementScheme,
    channel: &LossChannel,
    mc: Option<&McConfig>,
) -> Result<(f64, f64)> {
    Evaluator::new(state, scheme, channel, mc)?.correlation(angle_b - angle_a)
}

/// Evaluate S at fixed settings.
pub fn chsh_at(
    state: &StateSpec,
    settings: AngleSettings,
    scheme: MeasurementScheme,
    channel: &LossChannel,
    mc: Option<&McConfig>,
) -> Result<ChshResult> {
    let ev = Evaluator::new(state, scheme, channel, mc)?;
    let u = [
        settings.b - settings.a,
        settings.b_prime - settings.a,
        settings.b - settings.a_prime,
    ];
    let (s, e, pc) = ev.s_of(u)?;
    Ok(ChshResult {
        s_value: s,
        settings,
        correlations: e,
        conclusive_probs: pc,
        method: if mc.is_some() { Method::MonteCarlo } else { Method::Exact },
    })
}

/// Maximize S over the analyzer angles.
///
/// Stage one scans the symmetric one-parameter family a = 0, b = phi,
/// a' = 2 phi, b' = -phi, where S(phi) = 3 E(phi) - E(3 phi), on a grid fine
/// enough to resolve fringes of the largest sector (their angular period
/// shrinks like 1/(n+1)). Stage two refines with Nelder-Mead in the three
/// relative angles from the scan winner plus deterministic random restarts.
pub fn maximize_chsh(
    state: &StateSpec,
    scheme: MeasurementScheme,
    channel: &LossChannel,
    mc: Option<&McConfig>,
) -> Result<ChshResult> {
    let ev = Evaluator::new(state, scheme, channel, mc)?;
    let n_max = state.max_sector();

    let grid_points = 181.max(12 * (n_max + 1));
    let mut best_phi = PI / 8.0;
    let mut best_s = f64::NEG_INFINITY;
    for i in 1..=grid_points {
        let phi = 0.5 * PI * i as f64 / grid_points as f64;
        if let Ok((s, _, _)) = ev.s_of([phi, -phi, -phi]) {
            if s > best_s {
                best_s = s;
                best_phi = phi;
            }
        }
    }

    let objective = |u: &[f64; 3]| -> f64 {
        match ev.s_of(*u) {
            Ok((s, _, _)) => -s,
            Err(_) => f64::INFINITY,
        }
    };

    let start = [best_phi, -best_phi, -best_phi];
    let step = (0.5 * best_phi.abs()).max(1.0 / (n_max as f64 + 1.0) * 0.25);
    let (mut best_u, mut best_f) = nelder_mead(&objective, start, step, 400, 1e-6);

    let mut rng = ChaCha8Rng::seed_from_u64(0xC05_CADE);
    for _ in 0..16 {
        let mut jitter = || -> f64 { rng_range(&mut rng, step) };
        let s0 = [start[0] + jitter(), start[1] + jitter(), start[2] + jitter()];
        let (u, f) = nelder_mead(&objective, s0, step, 400, 1e-6);
        if f < best_f {
            best_f = f;
            best_u = u;
        }
    }
    // polish the winner with a tight simplex
    let (u, f) = nelder_mead(&objective, best_u, step * 0.05, 400, 1e-9);
    if f < best_f {
        best_f = f;
        best_u = u;
    }
    let _ = best_f;

    let (s, e, pc) = ev.s_of(best_u)?;
    let reduce = |x: f64| x.rem_euclid(PI);
    let settings = AngleSettings {
        a: 0.0,
        b: reduce(best_u[0]),
        a_prime: reduce(best_u[0] - best_u[2]),
        b_prime: reduce(best_u[1]),
    };
    Ok(ChshResult {
        s_value: s,
        settings,
        correlations: e,
        conclusive_probs: pc,
        method: if mc.is_some() { Method::MonteCarlo } else { Method::Exact },
    })
}

fn rng_range(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    rng.gen_range(-half_width..half_width)
}

/// Plain Nelder-Mead over three variables; returns the best vertex. The
/// objective is deterministic (sampling noise is frozen in the outcome
/// matrices), so a fixed shrinking simplex converges cleanly.
fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(
    f: &F,
    start: [f64; 3],
    step: f64,
    max_iter: usize,
    tol: f64,
) -> ([f64; 3], f64) {
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((start, f(&start)));
    for i in 0..3 {
        let mut v = start;
        v[i] += step;
        simplex.push((v, f(&v)));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = (0..3).fold(0.0f64, |acc, i| {
            acc.max(
                simplex[1..]
                    .iter()
                    .map(|(v, _)| (v[i] - simplex[0].0[i]).abs())
                    .fold(0.0, f64::max),
            )
        });
        if diameter < tol {
            break;
        }

        let worst = simplex[3];
        let mut centroid = [0.0; 3];
        for (v, _) in &simplex[..3] {
            for i in 0..3 {
                centroid[i] += v[i] / 3.0;
            }
        }
        let lerp = |t: f64| {
            let mut v = [0.0; 3];
            for i in 0..3 {
                v[i] = centroid[i] + t * (worst.0[i] - centroid[i]);
            }
            v
        };

        let reflected = lerp(-1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(-2.0);
            let fe = f(&expanded);
            simplex[3] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 { lerp(-0.5) } else { lerp(0.5) };
            let fc = f(&contracted);
            if fc < worst.1.min(fr) {
                simplex[3] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for (v, fv) in simplex.iter_mut().skip(1) {
                    for i in 0..3 {
                        v[i] = best[i] + 0.5 * (v[i] - best[i]);
                    }
                    *fv = f(v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}
