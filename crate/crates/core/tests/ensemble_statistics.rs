mod common;

use common::{ks_critical_1e3, ks_statistic};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tsvf_lab::ensemble::{run_ensemble, run_report, EnsembleConfig, PointerSampler};
use tsvf_lab::pointer::{couple, outcome_probabilities, postselect, Coupling, PointerConfig};
use tsvf_lab::scenarios;

fn cfg(id: &str, post: &str, eps: f64, trials: u64, seed: u64) -> EnsembleConfig {
    EnsembleConfig::all_points(id, post, eps, 1.0, trials, seed).unwrap()
}

#[test]
fn sampled_marginals_fit_exact_densities() {
    let p = scenarios::load("nested_mzi").unwrap();
    // A strong coupling so the pointers carry visible interference.
    let cs: Vec<_> = ["B", "C", "E"]
        .iter()
        .map(|x| Coupling::new(*x, PointerConfig::new(1.0, 1.2).unwrap()))
        .collect();
    let joint = couple(&p.circuit, &p.pre, &cs).unwrap();
    let sel = postselect(&p.circuit, &joint, &p.post("D2").unwrap()).unwrap();
    let sampler = PointerSampler::new(&sel.pointers).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000;
    let draws: Vec<Vec<f64>> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
    for k in 0..cs.len() {
        let xs: Vec<f64> = draws.iter().map(|d| d[k]).collect();
        let d = ks_statistic(xs, |x| sel.pointers.marginal_cdf(k, x).unwrap());
        assert!(d < ks_critical_1e3(n), "pointer {k}: D = {d}");
    }
}

#[test]
fn sampled_cross_moment_matches_joint_density() {
    // E[x_B x_C] from the exact joint density, computed term by term.
    let p = scenarios::load("nested_mzi").unwrap();
    let cs: Vec<_> = ["B", "C"]
        .iter()
        .map(|x| Coupling::new(*x, PointerConfig::new(1.0, 1.5).unwrap()))
        .collect();
    let joint = couple(&p.circuit, &p.pre, &cs).unwrap();
    let sel = postselect(&p.circuit, &joint, &p.post("D2").unwrap()).unwrap();
    let st = &sel.pointers;
    let ov = |a: f64, b: f64| (-(a - b).powi(2) / 4.0).exp();
    let (mut num, mut den) = (0.0, 0.0);
    for (wi, ci) in &st.terms {
        for (wj, cj) in &st.terms {
            let c = (wi.conj() * wj).re * ov(ci[0], cj[0]) * ov(ci[1], cj[1]);
            num += c * (ci[0] + cj[0]) / 2.0 * (ci[1] + cj[1]) / 2.0;
            den += c;
        }
    }
    let exact = num / den;
    let sampler = PointerSampler::new(st).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 100_000;
    let prods: Vec<f64> = (0..n)
        .map(|_| {
            let x = sampler.sample(&mut rng);
            x[0] * x[1]
        })
        .collect();
    let mean = prods.iter().sum::<f64>() / n as f64;
    let var = prods.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!(
        (mean - exact).abs() < 4.0 * se,
        "{mean} vs {exact} (se {se})"
    );
}

#[test]
fn detector_frequencies_match_exact_probabilities() {
    let c = cfg("nested_mzi", "D2", 0.3, 50_000, 11);
    let r = run_ensemble(&c).unwrap();
    let p = scenarios::load("nested_mzi").unwrap();
    let joint = couple(&p.circuit, &p.pre, &c.pointer_couplings().unwrap()).unwrap();
    let n = c.trials as f64;
    for (outcome, prob) in outcome_probabilities(&p.circuit, &joint).unwrap() {
        let count = r.detector_counts[&outcome.to_string()] as f64;
        let se = (prob * (1.0 - prob) / n).sqrt();
        assert!(
            (count / n - prob).abs() < 4.0 * se,
            "{outcome}: {} vs {prob}",
            count / n
        );
    }
}

#[test]
fn null_coupling_gives_null_shifts() {
    let r = run_ensemble(&cfg("nested_mzi", "D2", 0.0, 20_000, 5)).unwrap();
    for p in &r.points {
        let (m, s) = (p.mean.unwrap(), p.stderr.unwrap());
        assert!(m.abs() < 4.0 * s, "{}: {m} ± {s}", p.point);
    }
}

#[test]
fn stderr_halves_when_trials_quadruple() {
    let mut log_n = Vec::new();
    let mut log_se = Vec::new();
    for trials in [4_000u64, 16_000, 64_000] {
        let mut c = cfg("nested_mzi", "D2", 0.1, trials, 99);
        c.couplings.retain(|x| x.point == "C");
        let r = run_ensemble(&c).unwrap();
        log_n.push((trials as f64).ln());
        log_se.push(r.points[0].stderr.unwrap().ln());
    }
    let mx = log_n.iter().sum::<f64>() / 3.0;
    let my = log_se.iter().sum::<f64>() / 3.0;
    let slope = log_n
        .iter()
        .zip(&log_se)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / log_n.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut one = cfg("nested_mzi", "D2", 0.1, 5_000, 42);
    one.threads = Some(1);
    let mut many = one.clone();
    many.threads = Some(4);
    let a = run_report(&one).unwrap();
    let b = run_report(&many).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn different_seeds_give_different_samples() {
    let a = run_ensemble(&cfg("nested_mzi", "D2", 0.1, 2_000, 1)).unwrap();
    let b = run_ensemble(&cfg("nested_mzi", "D2", 0.1, 2_000, 2)).unwrap();
    assert_ne!(a.points[2].mean, b.points[2].mean);
}

#[test]
fn nested_c_estimate_agrees_with_exact_mean() {
    let report = run_report(&cfg("nested_mzi", "D2", 0.1, 10_000, 42)).unwrap();
    let c = report.rows.iter().find(|r| r.point == "C").unwrap();
    let (est, se) = (c.estimated_shift.unwrap(), c.stderr.unwrap());
    assert!(
        (est - c.exact_shift.unwrap()).abs() < 4.0 * se,
        "{est} vs {} ± {se}",
        c.exact_shift.unwrap()
    );
}

#[test]
fn impossible_ideal_post_selection_still_samples_leaks() {
    // Dark port of the closed interferometer: reachable only through the
    // coupling, so no weak value exists but pointer samples do.
    let report = run_report(&cfg("wheeler_closed", "D1", 1.0, 4_000, 3)).unwrap();
    assert!(report.result.postselected > 0);
    for row in &report.rows {
        assert!(row.weak_value_re.is_none() && row.predicted_shift.is_none());
        assert!(row.estimated_shift.is_some());
    }
}
