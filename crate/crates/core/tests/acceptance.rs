//! Acceptance suite: one test per release criterion, each printing a single
//! pass/fail line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Run order is independent; every Monte Carlo check uses a fixed seed.

use spdc_fuzzy::{
    analysis, maximize_chsh, mean_photons, outcome_matrix_exact, outcome_matrix_mc,
    spdc_weights, uniform_grid, FringePattern, LossChannel, McConfig, MeasurementScheme, Outcome,
    StateSpec,
};
use std::time::Instant;

const PURE: MeasurementScheme = MeasurementScheme::PureDichotomic;
const ANTI: (Outcome, Outcome) = (Outcome::Plus, Outcome::Minus);

fn report(id: u32, name: &str, pass: bool, detail: &str, started: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:02} ({name}): {verdict} — {detail} [{:.1} s]",
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {id:02} ({name}) failed: {detail}");
}

fn lossless_fringe(n: usize, points: usize) -> FringePattern {
    analysis::fringe_sweep(
        &StateSpec::Singlet(n),
        PURE,
        PURE,
        &LossChannel::identity(),
        &uniform_grid(points).unwrap(),
        None,
    )
    .unwrap()
}

/// Power fraction of the second harmonic among all non-constant harmonics.
fn second_harmonic_share(fringe: &FringePattern) -> f64 {
    let mags = analysis::harmonic_content(fringe, ANTI).unwrap();
    let total: f64 = mags.iter().skip(1).map(|m| m * m).sum();
    mags[2] * mags[2] / total
}

#[test]
fn criterion_01_parity_chsh_limit() {
    let t = Instant::now();
    let r = maximize_chsh(
        &StateSpec::Singlet(200),
        MeasurementScheme::Parity,
        &LossChannel::identity(),
        None,
    )
    .unwrap();
    let pass = (r.s_value - 2.481).abs() <= 0.005 && t.elapsed().as_secs_f64() < 10.0;
    report(
        1,
        "parity CHSH limit",
        pass,
        &format!("n = 200 gives S = {:.6}, target 2.481 +/- 0.005", r.s_value),
        t,
    );
}

#[test]
fn criterion_02_two_qubit_optimum() {
    let t = Instant::now();
    let r = maximize_chsh(&StateSpec::Singlet(1), PURE, &LossChannel::identity(), None).unwrap();
    let target = 8.0_f64.sqrt();
    let pass = (r.s_value - target).abs() <= 1e-6 && t.elapsed().as_secs_f64() < 1.0;
    report(
        2,
        "two-qubit optimum",
        pass,
        &format!("n = 1 gives S = {:.9}, target 2 sqrt 2 +/- 1e-6", r.s_value),
        t,
    );
}

#[test]
fn criterion_03_chsh_decay_curve() {
    let t = Instant::now();
    let ns = [1usize, 3, 5, 11, 25, 51];
    let s: Vec<f64> = ns
        .iter()
        .map(|&n| {
            maximize_chsh(&StateSpec::Singlet(n), PURE, &LossChannel::identity(), None)
                .unwrap()
                .s_value
        })
        .collect();
    let decreasing = s.windows(2).all(|w| w[1] < w[0]);
    let nonclassical = s.iter().all(|&v| v > 2.0);
    let pass = decreasing && nonclassical && t.elapsed().as_secs_f64() < 300.0;
    report(
        3,
        "CHSH decay curve",
        pass,
        &format!("S(n) over {ns:?} = {s:.6?}; strictly decreasing and > 2"),
        t,
    );
}

#[test]
fn criterion_04_filtered_signal_probabilities() {
    let t = Instant::now();
    let state = StateSpec::Spdc(spdc_weights(2.5, 1e-6).unwrap());
    let channel = LossChannel::new(0.5).unwrap();
    let targets: [(MeasurementScheme, f64, &str); 6] = [
        (MeasurementScheme::OrthogonalityFilter { k: 12 }, 0.116, "OF k=12"),
        (MeasurementScheme::OrthogonalityFilter { k: 24 }, 0.014, "OF k=24"),
        (MeasurementScheme::OrthogonalityFilter { k: 36 }, 2.07e-4, "OF k=36"),
        (MeasurementScheme::ThresholdDetector { h: 12 }, 0.328, "TD h=12"),
        (MeasurementScheme::ThresholdDetector { h: 24 }, 0.068, "TD h=24"),
        (MeasurementScheme::ThresholdDetector { h: 36 }, 1.07e-3, "TD h=36"),
    ];
    let mut detail = String::new();
    let mut pass = t.elapsed().as_secs_f64() < 600.0;
    for (scheme, target, label) in targets {
        let p = analysis::success_probability(&state, scheme, &channel).unwrap();
        let ok = (p - target).abs() <= 0.10 * target;
        pass &= ok;
        detail.push_str(&format!(
            "{label}: {p:.4e} vs {target:.4e} ({}); ",
            if ok { "ok" } else { "off" }
        ));
    }
    report(4, "filtered-signal probabilities at gain 2.5", pass, detail.trim_end(), t);
}

#[test]
fn criterion_05_gain_calibration() {
    let t = Instant::now();
    let nbar = mean_photons(3.49);
    let pass = (266.0..=272.0).contains(&nbar);
    report(
        5,
        "gain calibration",
        pass,
        &format!("mean photons per mode at g = 3.49 is {nbar:.2}, target [266, 272]"),
        t,
    );
}

#[test]
fn criterion_06_fringe_maxima() {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for n in [1usize, 7, 25, 51] {
        let f = lossless_fringe(n, 1); // single gridpoint at theta = 0
        let anti = f.points[0].get(Outcome::Plus, Outcome::Minus);
        let corr = f.points[0].get(Outcome::Plus, Outcome::Plus);
        let ok = (anti - 0.5).abs() <= 1e-9 && corr.abs() <= 1e-9;
        pass &= ok;
        detail.push_str(&format!("n={n}: anti={anti:.12}, corr={corr:.3e}; "));
    }
    pass &= t.elapsed().as_secs_f64() < 60.0;
    report(6, "fringe maxima", pass, detail.trim_end(), t);
}

#[test]
fn criterion_07_harmonic_cutoff() {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for n in [1usize, 7, 25] {
        let points = 4 * n + 4; // even, above the aliasing bound
        let f = lossless_fringe(n, points);
        let mags = analysis::harmonic_content(&f, ANTI).unwrap();
        let worst = mags
            .iter()
            .enumerate()
            .skip(2 * n + 1)
            .map(|(_, &m)| m)
            .fold(0.0f64, f64::max);
        let ok = worst < 1e-10;
        pass &= ok;
        detail.push_str(&format!("n={n}: max magnitude above 2n is {worst:.2e}; "));
    }
    pass &= t.elapsed().as_secs_f64() < 60.0;
    report(7, "harmonic cutoff", pass, detail.trim_end(), t);
}

#[test]
fn criterion_08_loss_shape_transition() {
    let t = Instant::now();
    let n = 51;
    let state = StateSpec::Singlet(n);
    let grid = uniform_grid(208).unwrap(); // even and above the aliasing bound
    let cfg = McConfig { shots: 30_000, seed: 8, workers: 0 };
    let etas = [1.0, 0.8, 0.5, 0.2];
    let mut vis = Vec::new();
    let mut share = Vec::new();
    let mut spot = (0.0, 0.0); // (mc, exact) visibility at eta = 0.5
    for &eta in &etas {
        let channel = LossChannel::new(eta).unwrap();
        let fringe =
            analysis::fringe_sweep(&state, PURE, PURE, &channel, &grid, Some(&cfg)).unwrap();
        let (v, v_se) = analysis::visibility(&fringe, ANTI).unwrap();
        vis.push((v, v_se));
        share.push(second_harmonic_share(&fringe));
        if eta == 0.5 {
            let exact =
                analysis::fringe_sweep(&state, PURE, PURE, &channel, &grid, None).unwrap();
            let (v_exact, _) = analysis::visibility(&exact, ANTI).unwrap();
            spot = (v, v_exact);
        }
    }
    let v_decreasing = vis.windows(2).all(|w| w[1].0 < w[0].0);
    let share_increasing = share.windows(2).all(|w| w[1] > w[0]);
    // exact-oracle spot check: MC visibility against the exact path
    let spot_tol = 6.0 * vis[2].1 + 1e-3;
    let spot_ok = (spot.0 - spot.1).abs() <= spot_tol;
    let pass =
        v_decreasing && share_increasing && spot_ok && t.elapsed().as_secs_f64() < 300.0;
    report(
        8,
        "loss-shape transition",
        pass,
        &format!(
            "eta {etas:?}: V = {:.4?} (decreasing: {v_decreasing}), harmonic-2 share = {share:.5?} \
             (increasing: {share_increasing}), eta=0.5 spot check |{:.4} - {:.4}| <= {spot_tol:.1e}",
            vis.iter().map(|x| x.0).collect::<Vec<_>>(),
            spot.0,
            spot.1
        ),
        t,
    );
}

/// Linear interpolation of y at x over (xs, ys) sorted by ascending xs.
fn interpolate(points: &mut Vec<(f64, f64)>, x: f64) -> Option<f64> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    if x < points[0].0 || x > points[points.len() - 1].0 {
        return None;
    }
    for w in points.windows(2) {
        if x <= w[1].0 {
            let f = if w[1].0 > w[0].0 { (x - w[0].0) / (w[1].0 - w[0].0) } else { 0.5 };
            return Some(w[0].1 + f * (w[1].1 - w[0].1));
        }
    }
    None
}

#[test]
fn criterion_09_visibility_recovery_ordering() {
    let t = Instant::now();
    let state = StateSpec::Singlet(80);
    let channel = LossChannel::new(0.05).unwrap();
    let grid = uniform_grid(48).unwrap();
    let cfg = McConfig { shots: 20_000, seed: 9, workers: 0 };
    let thresholds = [0u32, 1, 2, 3, 4, 6];

    let sweep = |make: &dyn Fn(u32) -> MeasurementScheme| {
        let schemes: Vec<MeasurementScheme> = thresholds.iter().map(|&v| make(v)).collect();
        analysis::visibility_curve(&state, &schemes, &channel, &grid, ANTI, Some(&cfg)).unwrap()
    };
    let of = sweep(&|k| MeasurementScheme::OrthogonalityFilter { k });
    let td = sweep(&|h| MeasurementScheme::ThresholdDetector { h });

    let nondecreasing = |c: &analysis::VisibilityCurve| {
        c.visibility
            .windows(2)
            .zip(c.visibility_se.windows(2))
            .all(|(v, se)| v[1] >= v[0] - 3.0 * (se[0].hypot(se[1])))
    };
    let of_monotone = nondecreasing(&of);
    let td_monotone = nondecreasing(&td);

    // at every TD success probability inside the OF range, the interpolated
    // OF visibility must not fall below the TD one
    let mut of_points: Vec<(f64, f64)> = of
        .success_probability
        .iter()
        .copied()
        .zip(of.visibility.iter().copied())
        .collect();
    let of_se_max = of.visibility_se.iter().cloned().fold(0.0f64, f64::max);
    let mut matched = 0;
    let mut ordering = true;
    for i in 0..td.visibility.len() {
        if let Some(v_of) = interpolate(&mut of_points, td.success_probability[i]) {
            matched += 1;
            let tol = 3.0 * td.visibility_se[i].hypot(of_se_max);
            ordering &= v_of >= td.visibility[i] - tol;
        }
    }
    let pass = of_monotone
        && td_monotone
        && ordering
        && matched >= 3
        && t.elapsed().as_secs_f64() < 600.0;
    report(
        9,
        "visibility recovery ordering",
        pass,
        &format!(
            "OF V = {:.3?} (monotone: {of_monotone}), TD V = {:.3?} (monotone: {td_monotone}), \
             OF >= TD at {matched} matched success points: {ordering}",
            of.visibility, td.visibility
        ),
        t,
    );
}

#[test]
fn criterion_10_oracle_equivalence() {
    let t = Instant::now();
    let shots = 100_000u64;
    let schemes = [
        PURE,
        MeasurementScheme::OrthogonalityFilter { k: 2 },
        MeasurementScheme::ThresholdDetector { h: 3 },
    ];
    let mut worst_pull = 0.0f64;
    let mut pass = true;
    for n in 0..=12usize {
        for &eta in &[0.3, 0.7] {
            let channel = LossChannel::new(eta).unwrap();
            for &scheme in &schemes {
                let cfg = McConfig { shots, seed: 10 + n as u64, workers: 0 };
                let exact = outcome_matrix_exact(n, scheme, scheme, &channel).unwrap();
                let mc = outcome_matrix_mc(n, scheme, scheme, &channel, &cfg).unwrap();
                for m in 0..=n {
                    for p in 0..=n {
                        let e = exact.cell(m, p);
                        let s = mc.cell(m, p);
                        let se = mc.cell_se(m, p);
                        for a in 0..3 {
                            for b in 0..3 {
                                let binom_se =
                                    (e[a][b] * (1.0 - e[a][b]) / shots as f64).sqrt();
                                let sigma = se[a][b].max(binom_se);
                                let tol = 4.0 * sigma + 1e-9;
                                let diff = (s[a][b] - e[a][b]).abs();
                                if sigma > 0.0 {
                                    worst_pull = worst_pull.max(diff / sigma);
                                }
                                pass &= diff <= tol;
                            }
                        }
                    }
                }
            }
        }
    }
    pass &= t.elapsed().as_secs_f64() < 300.0;
    report(
        10,
        "oracle equivalence",
        pass,
        &format!(
            "all sampled outcome matrices for n <= 12 within 4 standard errors of the exact \
             convolution (worst pull {worst_pull:.2} sigma)"
        ),
        t,
    );
}

#[test]
fn criterion_11_td_fairness_invariance() {
    let t = Instant::now();
    let grid = uniform_grid(37).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for n in [2usize, 5, 10] {
        for h in [1u32, 3] {
            let scheme = MeasurementScheme::ThresholdDetector { h };
            let fringe = analysis::fringe_sweep(
                &StateSpec::Singlet(n),
                scheme,
                scheme,
                &LossChannel::identity(),
                &grid,
                None,
            )
            .unwrap();
            let conclusive: Vec<f64> =
                fringe.points.iter().map(|p| p.conclusive_probability()).collect();
            let spread = conclusive.iter().cloned().fold(f64::MIN, f64::max)
                - conclusive.iter().cloned().fold(f64::MAX, f64::min);
            pass &= spread <= 1e-9;
            detail.push_str(&format!("TD n={n} h={h}: spread {spread:.1e}; "));
        }
    }
    // the state-dependent filter must NOT be angle invariant
    let of = MeasurementScheme::OrthogonalityFilter { k: 1 };
    let fringe = analysis::fringe_sweep(
        &StateSpec::Singlet(2),
        of,
        of,
        &LossChannel::identity(),
        &grid,
        None,
    )
    .unwrap();
    let conclusive: Vec<f64> = fringe.points.iter().map(|p| p.conclusive_probability()).collect();
    let spread = conclusive.iter().cloned().fold(f64::MIN, f64::max)
        - conclusive.iter().cloned().fold(f64::MAX, f64::min);
    pass &= spread > 1e-3;
    detail.push_str(&format!("OF n=2 k=1: spread {spread:.1e} (> 1e-3 required)"));
    pass &= t.elapsed().as_secs_f64() < 60.0;
    report(11, "TD fairness invariance", pass, &detail, t);
}
