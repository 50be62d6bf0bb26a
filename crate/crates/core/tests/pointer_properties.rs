mod common;

use common::{amp, simpson};
use num_complex::Complex64;
use proptest::prelude::*;
use tsvf_lab::pointer::{
    couple, leak_ratio, outcome_probabilities, postselect, projective_readout, Coupling,
    PointerConfig,
};
use tsvf_lab::scenarios;
use tsvf_lab::state::{BasisLabel, EXACT_TOL};
use tsvf_lab::tsvf::two_state_at;

fn coupling(point: &str, width: f64, eps: f64) -> Coupling {
    Coupling::new(point, PointerConfig::new(width, eps).unwrap())
}

/// Conditional pointer mean for a single coupling, built from the two-state
/// vector at the point: the post-selected pointer amplitude is
/// `<Φ|(1-P)|Ψ> g(x) + <Φ|P|Ψ> g(x-δ)`, integrated on a grid.
fn quadrature_mean(id: &str, post: &str, point: &str, width: f64, eps: f64) -> f64 {
    let p = scenarios::load(id).unwrap();
    let post = p.post(post).unwrap();
    let tsv = two_state_at(&p.circuit, &p.pre, &post, point).unwrap();
    let mode = p.circuit.point(point).unwrap().mode.clone();
    let space = p.circuit.space();
    let (mut inside, mut outside) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (i, (f, b)) in tsv
        .forward()
        .amplitudes()
        .iter()
        .zip(tsv.backward().amplitudes())
        .enumerate()
    {
        let term = b.conj() * f;
        if space.label(i).path.as_deref() == Some(mode.as_str()) {
            inside += term;
        } else {
            outside += term;
        }
    }
    let delta = eps * width;
    let density =
        |x: f64| (outside * amp(width, 0.0, x) + inside * amp(width, delta, x)).norm_sqr();
    let (lo, hi) = (-14.0 * width, 14.0 * width + delta);
    let norm = simpson(density, lo, hi, 20_000);
    simpson(|x| x * density(x), lo, hi, 20_000) / norm
}

#[test]
fn nested_c_mean_matches_quadrature() {
    let p = scenarios::load("nested_mzi").unwrap();
    let joint = couple(&p.circuit, &p.pre, &[coupling("C", 1.0, 0.1)]).unwrap();
    let sel = postselect(&p.circuit, &joint, &p.post("D2").unwrap()).unwrap();
    let exact = sel.mean_shift("C").unwrap();
    let oracle = quadrature_mean("nested_mzi", "D2", "C", 1.0, 0.1);
    assert!((exact - oracle).abs() < 1e-10, "{exact} vs {oracle}");
    assert!(
        (exact + 0.05).abs() < 1e-3,
        "first order is -δ/2, got {exact}"
    );
}

#[test]
fn every_single_coupling_matches_quadrature() {
    for id in scenarios::list() {
        let p = scenarios::load(id).unwrap();
        for (post_name, post) in &p.post_selections {
            for point in p.circuit.marked_points().keys() {
                if two_state_at(&p.circuit, &p.pre, post, point).is_err() {
                    continue;
                }
                let joint = couple(&p.circuit, &p.pre, &[coupling(point, 1.5, 0.2)]).unwrap();
                let exact = postselect(&p.circuit, &joint, post)
                    .unwrap()
                    .mean_shift(point)
                    .unwrap();
                let oracle = quadrature_mean(id, post_name, point, 1.5, 0.2);
                assert!(
                    (exact - oracle).abs() < 1e-10,
                    "{id} {post_name} {point}: {exact} vs {oracle}"
                );
            }
        }
    }
}

#[test]
fn leak_ratio_matches_flux_integrals() {
    for eps in [0.01, 0.05, 0.1, 0.2, 1.0] {
        let width = 1.0;
        let delta = eps * width;
        let diff = |x: f64| (amp(width, 0.0, x) - amp(width, delta, x)).powi(2);
        let flux = simpson(diff, -15.0, 15.0, 40_000) / 4.0;
        let total = simpson(|x| amp(width, 0.0, x).powi(2), -15.0, 15.0, 40_000);
        let r = leak_ratio(eps).unwrap();
        assert!(
            (r.exact - flux / total).abs() < 1e-12,
            "eps {eps}: {} vs {}",
            r.exact,
            flux / total
        );
        assert!((r.asymptotic - eps * eps / 8.0).abs() < 1e-18);
    }
    let r = leak_ratio(1e-3).unwrap();
    assert!((r.exact / r.asymptotic - 1.0).abs() < 1e-6);
    assert_eq!(leak_ratio(0.0).unwrap().exact, 0.0);
    assert!(leak_ratio(-0.1).is_err());
}

#[test]
fn leaked_dark_port_flux_equals_leak_ratio() {
    let p = scenarios::load("nested_mzi").unwrap();
    let e = p.circuit.point("E").unwrap().clone();
    for eps in [0.05, 0.1, 0.3] {
        let joint = tsvf_lab::pointer::couple_until(
            &p.circuit,
            &p.pre,
            &[coupling("C", 1.0, eps)],
            e.boundary,
        )
        .unwrap();
        let leaked = joint.mode_probability(&e.mode).unwrap();
        let a_mode = p.circuit.point("A").unwrap().mode.clone();
        let ratio = leaked / joint.mode_probability(&a_mode).unwrap();
        assert!(
            (ratio - leak_ratio(eps).unwrap().exact).abs() < 1e-14,
            "eps {eps}"
        );
    }
}

#[test]
fn uncoupled_pointers_stay_at_origin() {
    let p = scenarios::load("nested_mzi").unwrap();
    let cs: Vec<_> = ["A", "B", "C", "D", "E"]
        .iter()
        .map(|x| coupling(x, 1.0, 0.0))
        .collect();
    let joint = couple(&p.circuit, &p.pre, &cs).unwrap();
    for t in joint.terms() {
        assert!(t.centers.iter().all(|c| *c == 0.0));
    }
    let sel = postselect(&p.circuit, &joint, &p.post("D2").unwrap()).unwrap();
    assert!((sel.probability - 0.25).abs() < EXACT_TOL);
    for x in ["A", "B", "C", "D", "E"] {
        assert_eq!(sel.mean_shift(x).unwrap(), 0.0);
    }
}

#[test]
fn open_wheeler_upper_pointer_is_a_single_shifted_gaussian() {
    let p = scenarios::load("wheeler_open").unwrap();
    let joint = couple(&p.circuit, &p.pre, &[coupling("upper", 2.0, 0.25)]).unwrap();
    let sel = postselect(&p.circuit, &joint, &p.post("D1").unwrap()).unwrap();
    let sum = sel.pointers.as_gaussian_sum().unwrap();
    assert_eq!(sum.terms.len(), 1);
    assert!((sum.terms[0].1 - 0.5).abs() < 1e-15);
}

#[test]
fn nested_b_and_c_pointer_terms() {
    let p = scenarios::load("nested_mzi").unwrap();
    let joint = couple(
        &p.circuit,
        &p.pre,
        &[coupling("B", 1.0, 0.1), coupling("C", 1.0, 0.1)],
    )
    .unwrap();
    let sel = postselect(&p.circuit, &joint, &p.post("D2").unwrap()).unwrap();
    let mut centers: Vec<(f64, f64)> = sel
        .pointers
        .terms
        .iter()
        .map(|(_, c)| (c[0], c[1]))
        .collect();
    centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(centers, vec![(0.0, 0.0), (0.0, 0.1), (0.1, 0.0)]);
    // Post-selection probability moves at second order only.
    let ideal = 0.25;
    assert!((sel.probability - ideal).abs() > 0.0);
    assert!((sel.probability - ideal).abs() < 0.01 * 0.1);
}

#[test]
fn dark_port_post_selection_needs_coupling() {
    let p = scenarios::load("wheeler_closed").unwrap();
    let d1 = p.post("D1").unwrap();
    for eps in [0.0, 0.1] {
        let joint = couple(&p.circuit, &p.pre, &[coupling("upper", 1.0, eps)]).unwrap();
        let sel = postselect(&p.circuit, &joint, &d1).unwrap();
        assert!(
            (sel.probability - leak_ratio(eps).unwrap().exact).abs() < 1e-15,
            "eps {eps}"
        );
    }
}

#[test]
fn exclusive_arms_never_both_flip() {
    let p = scenarios::load("wheeler_closed").unwrap();
    for eps in [0.1, 0.7, 3.0] {
        let joint = couple(
            &p.circuit,
            &p.pre,
            &[coupling("upper", 1.0, eps), coupling("lower", 1.0, eps)],
        )
        .unwrap();
        let first = projective_readout(&p.circuit, &joint, None, "upper").unwrap();
        assert!(first.found_orthogonal > 0.0);
        let second = projective_readout(&p.circuit, &first.orthogonal, None, "lower").unwrap();
        assert!(
            second.found_orthogonal.abs() < 1e-12,
            "eps {eps}: {}",
            second.found_orthogonal
        );
        for post in p.circuit.outcomes() {
            let r =
                projective_readout(&p.circuit, &first.orthogonal, Some(&post), "lower").unwrap();
            assert!(r.found_orthogonal.abs() < 1e-12);
        }
    }
    let joint = couple(&p.circuit, &p.pre, &[coupling("upper", 1.0, 0.0)]).unwrap();
    let r = projective_readout(&p.circuit, &joint, None, "upper").unwrap();
    assert!(r.found_orthogonal.abs() < 1e-15);
    assert!(projective_readout(&p.circuit, &joint, None, "lower").is_err());
}

#[test]
fn gaussian_sum_expectation_matches_quadrature() {
    use tsvf_lab::pointer::GaussianSum;
    let w = 0.8;
    let terms = vec![
        (Complex64::new(0.3, -0.4), -0.2),
        (Complex64::new(-1.1, 0.2), 0.5),
        (Complex64::new(0.0, 0.9), 1.3),
    ];
    let sum = GaussianSum::new(w, terms.clone());
    let psi = |x: f64| {
        terms
            .iter()
            .map(|(c, a)| c * amp(w, *a, x))
            .sum::<Complex64>()
            .norm_sqr()
    };
    let norm = simpson(psi, -12.0, 14.0, 20_000);
    let mean = simpson(|x| x * psi(x), -12.0, 14.0, 20_000) / norm;
    assert!((sum.norm_sqr() - norm).abs() < 1e-10);
    assert!((sum.expectation().unwrap() - mean).abs() < 1e-10);
    for x in [-1.0, 0.0, 0.7, 2.0] {
        assert!((sum.density(x) - psi(x)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn outcome_probabilities_are_normalized(
        eps in prop::collection::vec(-2.0..2.0f64, 5),
        width in 0.2..3.0f64,
    ) {
        let p = scenarios::load("nested_mzi").unwrap();
        let cs: Vec<_> = ["A", "B", "C", "D", "E"].iter().zip(&eps).map(|(x, e)| coupling(x, width, *e)).collect();
        let joint = couple(&p.circuit, &p.pre, &cs).unwrap();
        prop_assert!((joint.norm_sqr() - 1.0).abs() < EXACT_TOL);
        let total: f64 = outcome_probabilities(&p.circuit, &joint).unwrap().iter().map(|(_, q)| q).sum();
        prop_assert!((total - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn polarization_outcomes_are_normalized(eps_a in -1.0..1.0f64, eps_b in -1.0..1.0f64) {
        let p = scenarios::load("polarization_marker").unwrap();
        let joint = couple(&p.circuit, &p.pre, &[coupling("A", 1.0, eps_a), coupling("B", 1.0, eps_b)]).unwrap();
        let total: f64 = outcome_probabilities(&p.circuit, &joint).unwrap().iter().map(|(_, q)| q).sum();
        prop_assert!((total - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn marginal_cdf_integrates_density(eps in 0.0..1.5f64, x in -4.0..4.0f64) {
        let p = scenarios::load("nested_mzi").unwrap();
        let joint = couple(&p.circuit, &p.pre, &[coupling("B", 1.0, eps), coupling("C", 1.0, eps)]).unwrap();
        let sel = postselect(&p.circuit, &joint, &p.post("D2").unwrap()).unwrap();
        let integral = simpson(|t| sel.pointers.marginal_density(1, t).unwrap(), -12.0, x, 4_000);
        prop_assert!((sel.pointers.marginal_cdf(1, x).unwrap() - integral).abs() < 1e-9);
    }
}

#[test]
fn label_helper_is_consistent() {
    let p = scenarios::load("polarization_marker").unwrap();
    let label: BasisLabel = "b,V".parse().unwrap();
    let idx = p.circuit.space().index_of(&label).unwrap();
    assert_eq!(p.circuit.space().label(idx), label);
}
