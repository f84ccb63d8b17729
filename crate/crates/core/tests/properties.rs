mod common;

use alphaport::circuit::{fig3, fig4, fig_a1, ladder};
use alphaport::{alpha, nodal, superposition, Characteristic};

#[test]
fn bound_holds_on_random_circuits() {
    let mut rng = common::rng(21);
    for _ in 0..25 {
        let c = common::random_circuit(&mut rng, 7);
        let f = common::random_two_term(&mut rng, (0.5, 2.5), (0.3, 2.5));
        for v in [0.2, 1.0, 3.0] {
            let r = superposition::report(&c, &f, v).unwrap();
            assert!((r.F - r.G).abs() <= r.bound.unwrap() + 1e-12 * r.F, "{f} v={v}");
        }
    }
}

#[test]
fn connected_terms_deviate_with_opposite_signs() {
    let mut rng = common::rng(22);
    let mut circuits = vec![fig_a1(), fig3(), ladder(6, false).unwrap()];
    circuits.extend((0..10).map(|_| common::random_circuit(&mut rng, 7)));
    for c in &circuits {
        let f: Characteristic = "1:1,1:3".parse().unwrap();
        let r = superposition::report(c, &f, 1.0).unwrap();
        let dev = r.term_deviations();
        if r.eta < 1e-12 {
            continue;
        }
        assert!(dev[0] * dev[1] < 0.0, "{dev:?}");
        // the split sums back to F
        let total: f64 = r.connected_terms.iter().sum();
        assert!((total - r.F).abs() < 1e-12 * r.F);
    }
}

#[test]
fn direct_branch_adds_the_same_term_to_f_and_g() {
    let mut rng = common::rng(23);
    for _ in 0..10 {
        let c = common::random_circuit(&mut rng, 7);
        let f = common::random_two_term(&mut rng, (1.0, 2.0), (0.5, 2.0));
        let v = 0.8;
        let plain = superposition::report(&c, &f, v).unwrap();
        let with = superposition::report(&c.with_direct_branch(), &f, v).unwrap();
        let added = f.eval(v).unwrap();
        assert!((with.F - plain.F - added).abs() < 1e-10 * with.F);
        assert!((with.G - plain.G - added).abs() < 1e-10 * with.G);
        assert!(((with.F - with.G).abs() - (plain.F - plain.G).abs()).abs() < 1e-10 * with.F);
        assert!(with.eta <= plain.eta + 1e-15);
    }
}

#[test]
fn leading_series_coefficient_is_linear_phi() {
    let mut rng = common::rng(24);
    let f: Characteristic = "1:1,1:2".parse().unwrap();
    for c in [fig_a1(), fig3(), fig4()]
        .into_iter()
        .chain((0..5).map(|_| common::random_circuit(&mut rng, 6)))
    {
        let fit = superposition::extract_series_coeffs(&c, &f, None).unwrap();
        let phi1 = alpha::alpha_solve(&c, 1.0).unwrap().phi;
        assert!((fit.coefficients[0] - phi1).abs() < 1e-6 * phi1, "{} vs {phi1}", fit.coefficients[0]);
    }
}

#[test]
fn report_ratios_match_exact_potentials() {
    let c = fig3();
    let f: Characteristic = "0.5:1,2:2.5".parse().unwrap();
    let r = superposition::report(&c, &f, 1.7).unwrap();
    let s = nodal::solve_dc(&c, &f, 1.7).unwrap();
    for (d, p) in r.ratios.iter().zip(&s.potentials) {
        assert!((d - p / 1.7).abs() < 1e-15);
    }
}

#[test]
fn intermediate_values_on_structured_circuits() {
    let f: Characteristic = "1:1,1:3".parse().unwrap();
    for c in [fig_a1(), fig3(), fig4(), ladder(5, false).unwrap(), ladder(5, true).unwrap()] {
        let chk = superposition::intermediate_value_check(&c, &f, &[0.01, 0.3, 1.0, 4.0]).unwrap();
        assert!(chk.all_within());
        for n in &chk.nodes {
            assert!(n.trend.is_monotone(), "{}: {:?}", n.node, n.values);
        }
    }
}

#[test]
fn intermediate_values_can_escape_on_a_chain_with_chord() {
    let c: alphaport::Circuit = ".input a b\n.branch a n1\n.branch n1 n2 w=2\n.branch n2 n3 w=2\n\
                                 .branch n3 n4\n.branch n4 b\n.branch b n1\n"
        .parse()
        .unwrap();
    let f: Characteristic = "1:1,1:3".parse().unwrap();
    let chk = superposition::intermediate_value_check(&c, &f, &[0.01, 1.0, 4.0]).unwrap();
    let n2 = chk.node("n2").unwrap();
    assert!((n2.d_low_alpha - 5.0 / 14.0).abs() < 1e-12);
    // reference values from an independent solve: d_n2(4) = 0.39920384 > d_n2(α = 3) = 0.38798602
    assert!((n2.values[2] - 0.39920384).abs() < 1e-8);
    assert!((n2.d_high_alpha - 0.38798602).abs() < 1e-8);
    assert!(!n2.within[2]);
    assert!(!chk.all_within());
}

#[test]
fn superpose_rejects_invalid_circuits() {
    let c = alphaport::Circuit::new(("a", "b"), &[("a", "x", 1)]).unwrap();
    let f = Characteristic::power_law(1.0, 2.0).unwrap();
    assert!(superposition::superpose(&c, &f).is_err());
    assert!(superposition::statement1_check(&fig_a1(), &f, &[]).is_err());
    let three: Characteristic = "1:1,1:2,1:3".parse().unwrap();
    assert!(superposition::intermediate_value_check(&fig_a1(), &three, &[1.0]).is_err());
    assert_eq!(superposition::report(&fig_a1(), &three, 1.0).unwrap().bound, None);
}
