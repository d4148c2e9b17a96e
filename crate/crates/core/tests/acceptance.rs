//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest harness so the
//! report is printed in order; any failure makes the process exit nonzero.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multiprice::audit::{audit, AuditGrid, Verdict};
use multiprice::cohort::{build_profiles, default_catalog, simulate_cohort, CohortConfig, QualityDraw};
use multiprice::elicit::{elicit_bisect, elicit_rowscan, implied_quality, MplSpec, Scenario};
use multiprice::model::{catalog, evaluate, Alternative, Menu};
use multiprice::regions::{boundary_trace, predict_choice, region_grid, BoundaryPair, Choice, RegionSpec};
use multiprice::stats::{
    binom_tail, binom_tail_exact, cohort_means, fe_ols, sign_test, summarize_subjects, threshold_score,
    AnalysisConfig, FixedEffects, Grouping, SubjectType,
};
use multiprice::ModelSpec;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within_budget(elapsed: Duration, budget: Duration) -> Outcome {
    if elapsed <= budget {
        Ok(String::new())
    } else {
        Err(format!("took {:.3}s, budget {:.0}s", elapsed.as_secs_f64(), budget.as_secs_f64()))
    }
}

fn c1_kinked_closed_form() -> Outcome {
    let mpl = MplSpec::default();
    let mut cases = 0;
    for lambda in [1.5, 2.0, 3.0] {
        for gamma in [-0.5, 0.0, 1.0] {
            let model = ModelSpec::rn_kinked(gamma, lambda).map_err(|e| e.to_string())?;
            for q in [1.0, 2.5, 6.0] {
                let p = elicit_rowscan(&model, &Scenario::p_ignore(), q, &mpl)
                    .map_err(|e| e.to_string())?
                    .switch_point
                    .ok_or("no p switch")?;
                let m = elicit_rowscan(&model, &Scenario::m_money(), q, &mpl)
                    .map_err(|e| e.to_string())?
                    .switch_point
                    .ok_or("no m switch")?;
                ensure!((p - q / lambda).abs() <= 0.01 + 1e-12, "lambda={lambda} gamma={gamma} q={q}: p={p}");
                ensure!((m - q).abs() <= 0.01 + 1e-12, "lambda={lambda} gamma={gamma} q={q}: m={m}");
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases within 0.01"))
}

fn c2_power_closed_form() -> Outcome {
    let e = 10.0;
    let mut worst: f64 = 0.0;
    for alpha in [0.5f64, 2.0] {
        for gamma in [0.0, -0.5] {
            let model = ModelSpec::rn_power(gamma, alpha).map_err(|e| e.to_string())?;
            let s = Scenario::p_combine(e);
            for q in [1.0f64, 4.0] {
                let closed = e - (e.powf(alpha) - q.powf(alpha)).powf(1.0 / alpha);
                let r = elicit_bisect(&model, &s, q, &MplSpec::default(), 1e-10).map_err(|e| e.to_string())?;
                let p = r.switch_point.ok_or("no switch")?;
                let back = implied_quality(&model, &s, p).map_err(|e| e.to_string())?.ok_or("no inverse")?;
                ensure!((p - closed).abs() <= 1e-5, "alpha={alpha} q={q}: p={p} closed={closed}");
                ensure!((back - q).abs() <= 1e-5, "alpha={alpha} q={q}: back={back}");
                worst = worst.max((p - closed).abs()).max((back - q).abs());
            }
        }
    }
    Ok(format!("max error {worst:.1e} (tol 1e-5)"))
}

fn c3_gpn_combine() -> Outcome {
    let model = ModelSpec::gpn(1.0).map_err(|e| e.to_string())?;
    let mpl = MplSpec::default();
    let s = Scenario::p_combine(10.0);
    let p = elicit_rowscan(&model, &s, 1.0, &mpl).map_err(|e| e.to_string())?.switch_point.ok_or("no switch")?;
    ensure!((p - 7.0).abs() <= 0.01, "p*={p}");
    let mut tested = 0;
    for i in 1..=200 {
        let q = i as f64 * 0.01;
        let r = elicit_bisect(&model, &s, q, &mpl, 1e-10).map_err(|e| e.to_string())?;
        let ps = r.switch_point.ok_or("no switch")?;
        // Closed form of the indifference: q = sigma p / (sigma + 2E - 2p).
        let closed = q * (1.0 + 20.0) / (1.0 + 2.0 * q);
        ensure!((ps - closed).abs() <= 1e-6, "q={q}: p*={ps} closed={closed}");
        ensure!(ps > q, "q={q}: p*={ps} not above q");
        tested += 1;
    }
    Ok(format!("p*(1)={p:.2}; p*>q on {tested} values of q in (0,2]"))
}

fn c4_assumption_matrix() -> Outcome {
    let start = Instant::now();
    let expected: [(&str, [bool; 3]); 8] = [
        ("rn-linear", [true, true, true]),
        ("rn-kinked", [true, false, true]),
        ("rn-power", [true, true, false]),
        ("pn", [false, false, false]),
        ("gpn", [true, true, false]),
        ("gpn-power", [true, true, false]),
        ("cc", [true, true, true]),
        ("ncc", [true, true, true]),
    ];
    let grid = AuditGrid::new(0.01, 10.0, 1000, 1e-9).map_err(|e| e.to_string())?;
    for ((name, model), (want_name, want)) in catalog().into_iter().zip(expected) {
        ensure!(name == want_name, "catalog order: {name} vs {want_name}");
        let report = audit(&model, &grid).map_err(|e| e.to_string())?;
        let row = report.accuracy();
        let got = [row.m_mpl, row.p_ignore_or_separate, row.p_combine];
        ensure!(got == want, "{name}: got {got:?}, expected {want:?}");
        if name == "pn" {
            ensure!(matches!(report.injective, Verdict::Violated { .. }), "pn injective: {:?}", report.injective);
        }
    }
    within_budget(start.elapsed(), Duration::from_secs(5))?;
    Ok("8 models match".into())
}

fn c5_scenario_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let models = catalog();
    let mpl = MplSpec::default();
    for draw in 0..1000 {
        let (name, model) = models[rng.random_range(0..models.len())];
        let q = rng.random_range(0.05..9.5);
        let e = rng.random_range(10.0..40.0);
        let ign = elicit_rowscan(&model, &Scenario::p_ignore(), q, &mpl);
        let sep = elicit_rowscan(&model, &Scenario::p_separate(e), q, &mpl);
        let bits = |r: &Result<multiprice::elicit::ElicitationResult, _>| r.as_ref().ok().map(|r| r.switch_point.map(f64::to_bits));
        ensure!(bits(&ign) == bits(&sep), "draw {draw} {name} q={q} E={e}: {ign:?} vs {sep:?}");
        let extras: Vec<f64> = (0..rng.random_range(1..4)).map(|_| rng.random_range(-20.0..20.0)).collect();
        for s in [Scenario::m_money(), Scenario::p_ignore(), Scenario::p_separate(e), Scenario::p_combine(e)] {
            let plain = elicit_rowscan(&model, &s, q, &mpl);
            let padded = elicit_rowscan(&model, &s.clone().with_extras(extras.clone()), q, &mpl);
            ensure!(bits(&plain) == bits(&padded), "draw {draw} {name} {s}: extras {extras:?} changed the switch");
        }
    }
    Ok("1000 draws".into())
}

fn c6_binomial() -> Outcome {
    let g55 = binom_tail(5, 5).map_err(|e| e.to_string())?;
    ensure!(g55 == 0.03125, "G(5,5)={g55}");
    let g = binom_tail(85, 62).map_err(|e| e.to_string())?;
    ensure!(2.0 * g < 1e-4, "2G(85,62)={}", 2.0 * g);
    let t30 = threshold_score(30, 0.05).map_err(|e| e.to_string())?;
    ensure!(t30 == Some(21), "threshold(30)={t30:?}");
    for k in 0..=5 {
        let t = threshold_score(k, 0.05).map_err(|e| e.to_string())?;
        ensure!(t.is_none(), "threshold({k})={t:?}");
    }
    for n in 1..=60u64 {
        for k in 1..=n {
            let a = binom_tail(n, k).map_err(|e| e.to_string())?;
            let b = binom_tail(n, n - k + 1).map_err(|e| e.to_string())?;
            ensure!(a + b == 1.0, "complement fails at ({n},{k})");
            let exact = binom_tail_exact(n, k).map_err(|e| e.to_string())?;
            ensure!(
                exact.numerator == common::pascal_tail(n as usize, k as usize).into(),
                "numerator differs from Pascal at ({n},{k})"
            );
        }
    }
    Ok(format!("2G(85,62)={:.2e}", 2.0 * g))
}

fn c7_regression() -> Outcome {
    let d = common::random_panel(7, 6, 4);
    let mut worst: f64 = 0.0;
    for fe in [FixedEffects::None, FixedEffects::Subject, FixedEffects::SubjectProduct] {
        let r = fe_ols(&d, fe).map_err(|e| e.to_string())?;
        let (b, price, bp, c) = common::dummy_ols(&d, fe);
        let mut diffs = vec![(r.block.coef - b).abs(), (r.block_price.coef - bp).abs(), (r.constant.coef - c).abs()];
        match (r.price, price) {
            (Some(e), Some(o)) => diffs.push((e.coef - o).abs()),
            (None, None) => {}
            _ => return Err(format!("{fe:?}: price presence differs")),
        }
        let m = diffs.iter().copied().fold(0.0, f64::max);
        ensure!(m <= 1e-8, "{fe:?}: max coefficient gap {m:e}");
        worst = worst.max(m);
    }
    let shifted = common::unit_shift_panel(11, 6, 4);
    for fe in [FixedEffects::None, FixedEffects::Subject, FixedEffects::SubjectProduct] {
        let r = fe_ols(&shifted, fe).map_err(|e| e.to_string())?;
        ensure!((r.block.coef + 1.0).abs() <= 1e-9, "{fe:?}: Block={}", r.block.coef);
        ensure!(r.block_price.coef.abs() <= 1e-9, "{fe:?}: interaction={}", r.block_price.coef);
    }
    Ok(format!("max gap vs dummy OLS {worst:.1e}; shift panel Block=-1"))
}

fn c8_prediction_regions() -> Outcome {
    let g = -1.0 / 3.0;
    let model = ModelSpec::rn_linear(g).map_err(|e| e.to_string())?;
    let spec = RegionSpec::new(10.0, 15.0, model).map_err(|e| e.to_string())?;
    let cell = predict_choice(&spec, 10.0, 20.0).map_err(|e| e.to_string())?;
    // Quality range 15 - 0 = 15, price range 20 - 0 = 20.
    let hand_l = 10.0 * 15f64.powf(g) - 10.0 * 20f64.powf(g);
    let hand_h = 15.0 * 15f64.powf(g) - 20.0 * 20f64.powf(g);
    ensure!(cell.choice == Choice::Low, "choice {:?}", cell.choice);
    ensure!((cell.v_l - hand_l).abs() <= 1e-3 && (cell.v_l - 0.371).abs() <= 1e-3, "V(l)={}", cell.v_l);
    ensure!((cell.v_h - hand_h).abs() <= 1e-3 && (cell.v_h + 1.286).abs() <= 1e-3, "V(h)={}", cell.v_h);

    let grid = region_grid(&spec).map_err(|e| e.to_string())?;
    let mut points = 0;
    let mut worst: f64 = 0.0;
    for pair in BoundaryPair::all() {
        for pt in boundary_trace(&grid, pair).map_err(|e| e.to_string())? {
            let h = Alternative::new(vec![15.0, -pt.hp]).map_err(|e| e.to_string())?;
            let l = Alternative::new(vec![10.0, -pt.lp]).map_err(|e| e.to_string())?;
            let o = Alternative::new(vec![0.0, 0.0]).map_err(|e| e.to_string())?;
            let menu = Menu::ternary(h.clone(), l.clone(), o.clone()).map_err(|e| e.to_string())?;
            let v = |a: &Alternative| evaluate(&model, a, &menu).map_err(|e| e.to_string());
            let value = |c: Choice| match c {
                Choice::High => v(&h),
                Choice::Low => v(&l),
                Choice::Outside => v(&o),
            };
            let (a, b) = pair.choices();
            let gap = (value(a)? - value(b)?).abs();
            ensure!(gap <= 1e-6, "{} at ({}, {}): |dV|={gap:e}", pair.label(), pt.lp, pt.hp);
            worst = worst.max(gap);
            points += 1;
        }
    }
    ensure!(points > 0, "no boundary points traced");
    Ok(format!("V(l)={:.4} V(h)={:.4}; {points} boundary points, max |dV| {worst:.1e}", cell.v_l, cell.v_h))
}

fn c9_result_one() -> Outcome {
    let start = Instant::now();
    let catalog = default_catalog();
    let mpl = MplSpec::default();
    let kinked = CohortConfig {
        subjects: 100,
        model: ModelSpec::rn_kinked(-0.5, 2.0).map_err(|e| e.to_string())?,
        p_scenario: Scenario::p_ignore(),
        qualities: QualityDraw::Uniform { lo: 0.5, hi: 9.0 },
        noise_sd: 0.0,
        mp_subjects: 50,
    };
    let profiles = build_profiles(&kinked, &catalog, 2024).map_err(|e| e.to_string())?;
    let data = simulate_cohort(&profiles, &catalog, &mpl, 2024).map_err(|e| e.to_string())?;
    let summaries = summarize_subjects(&data, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let pooled = &cohort_means(&summaries, Grouping::Pooled).map_err(|e| e.to_string())?[0];
    let ratio = pooled.mean_m / pooled.mean_p;
    ensure!((1.98..=2.02).contains(&ratio), "ratio {ratio}");
    let pairs: Vec<(f64, f64)> = summaries.iter().filter_map(|s| Some((s.individual_m?, s.individual_p?))).collect();
    let st = sign_test(&pairs).map_err(|e| e.to_string())?;
    ensure!(st.p_value < 1e-10, "sign test p={}", st.p_value);
    let m_high = summaries.iter().filter(|s| s.subject_type == SubjectType::MHigh).count();
    ensure!(m_high == summaries.len() && m_high == 100, "{m_high}/{} m-high", summaries.len());

    let linear = CohortConfig { model: ModelSpec::rn_linear(-0.5).map_err(|e| e.to_string())?, ..kinked };
    let profiles = build_profiles(&linear, &catalog, 2025).map_err(|e| e.to_string())?;
    let data = simulate_cohort(&profiles, &catalog, &mpl, 2025).map_err(|e| e.to_string())?;
    let lin = summarize_subjects(&data, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let classified = lin.iter().filter(|s| s.subject_type != SubjectType::Unclassified).count();
    ensure!(classified == 0, "{classified} linear subjects classified");
    ensure!(lin.iter().all(|s| s.difference() == Some(0.0)), "nonzero linear difference");
    within_budget(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "mean_m={:.3} mean_p={:.3} ratio={ratio:.4}; sign p={:.1e}; 100/100 m-high; linear 0 classified",
        pooled.mean_m, pooled.mean_p, st.p_value
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 9] = [
        ("kinked closed form", c1_kinked_closed_form, Some(Duration::from_secs(1))),
        ("power combine closed form", c2_power_closed_form, None),
        ("gpn combine", c3_gpn_combine, None),
        ("assumption matrix", c4_assumption_matrix, None),
        ("scenario equivalence", c5_scenario_equivalence, None),
        ("exact binomial", c6_binomial, None),
        ("fixed-effects regression", c7_regression, None),
        ("prediction regions", c8_prediction_regions, None),
        ("simulated cohort", c9_result_one, None),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(b)) = (&outcome, budget) {
            if let Err(e) = within_budget(elapsed, *b) {
                outcome = Err(e);
            }
        }
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({secs:.3}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name} ({secs:.3}s) {why}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
