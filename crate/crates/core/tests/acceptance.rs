//! Acceptance suite: one test per release criterion, each ending with a
//! single PASS line. Criteria that carry a runtime budget assert it.

mod support;

use std::time::Instant;

use spin_epr::criteria::{
    collective_spin_criterion, epr_criterion, epr_threshold_formula, epr_threshold_qubit,
    hofmann_takeuchi_projected, inferred_variance, negativity, negativity_formula,
    InferenceConvention,
};
use spin_epr::gaussian::{
    epr_threshold_curve, inferred_variance_gaussian, macroscopic_entanglement_check,
    spin_moments, SqueezeLossParams,
};
use spin_epr::sampler::estimate_criteria_suite;
use spin_epr::states::{
    lossy_state_closed_form, lossy_state_dilation, project_two_photon, werner_purity,
    werner_state, SpinAxis, WernerLossParams,
};

fn linspace(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

fn lossy(p: f64, eta: f64) -> spin_epr::qmatrix::DensityMatrix {
    lossy_state_closed_form(&WernerLossParams::new(p, eta).unwrap()).unwrap()
}

#[test]
fn criterion_01_negativity_grid_matches_closed_form() {
    let start = Instant::now();
    let grid = linspace(21);
    for &p in &grid {
        for &eta in &grid {
            let params = WernerLossParams::new(p, eta).unwrap();
            let got = negativity(&lossy_state_closed_form(&params).unwrap(), 0).unwrap();
            let want = negativity_formula(&params);
            assert!(
                (got - want).abs() <= 1e-10,
                "p={p} eta={eta}: {got} vs {want}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 01 PASS: negativity matches eta^2(3p-1)/4 on a 21x21 grid in {elapsed:?}");
}

#[test]
fn criterion_02_entanglement_dies_suddenly_at_one_third() {
    for p in [0.0, 0.1, 0.2, 0.3, 1.0 / 3.0] {
        for eta in [0.25, 0.5, 0.75, 1.0] {
            let n = negativity(&lossy(p, eta), 0).unwrap();
            assert!(n <= 1e-12, "p={p} eta={eta}: negativity {n}");
        }
    }
    println!("criterion 02 PASS: negativity vanishes identically for p <= 1/3 at every loss");
}

#[test]
fn criterion_03_beam_splitter_dilation_reproduces_closed_form() {
    let start = Instant::now();
    let grid = linspace(5);
    for &p in &grid {
        for &eta in &grid {
            let params = WernerLossParams::new(p, eta).unwrap();
            let closed = lossy_state_closed_form(&params).unwrap();
            let dilated = lossy_state_dilation(&params).unwrap();
            let diff = closed.matrix().max_abs_diff(dilated.matrix());
            assert!(diff <= 1e-10, "p={p} eta={eta}: diff {diff:.3e}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("criterion 03 PASS: 256-dim dilation equals the closed form on a 5x5 grid in {elapsed:?}");
}

#[test]
fn criterion_04_post_selection_recovers_the_pair_state() {
    for p in [0.0, 0.3, 0.7, 1.0] {
        for eta in [0.05, 0.1, 0.5, 1.0] {
            let projected = project_two_photon(&lossy(p, eta)).unwrap();
            let werner = werner_state(p).unwrap();
            let diff = projected.matrix().max_abs_diff(werner.matrix());
            assert!(diff <= 1e-12, "p={p} eta={eta}: diff {diff:.3e}");
        }
    }
    println!("criterion 04 PASS: conditioning on both detections recovers the pair state exactly");
}

#[test]
fn criterion_05_projected_uncertainty_sum_flips_at_one_third() {
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let report = hofmann_takeuchi_projected(p).unwrap();
        assert_eq!(
            report.satisfied,
            p > 1.0 / 3.0,
            "p={p}: lhs={} rhs={}",
            report.lhs,
            report.rhs
        );
    }
    let edge = hofmann_takeuchi_projected(1.0 / 3.0).unwrap();
    assert!((edge.lhs - 1.0).abs() <= 1e-12);
    assert!(!edge.satisfied);
    println!("criterion 05 PASS: projected uncertainty sum detects entanglement exactly for p > 1/3");
}

#[test]
fn criterion_06_all_outcomes_inference_formula_and_threshold() {
    let grid = linspace(11);
    for &p in &grid {
        for &eta in &grid {
            let rho = lossy(p, eta);
            let got =
                inferred_variance(&rho, SpinAxis::Z, InferenceConvention::AllOutcomes).unwrap();
            let want = eta * (1.0 - eta * eta * p * p) / 4.0;
            assert!(
                (got - want).abs() <= 1e-10,
                "p={p} eta={eta}: {got} vs {want}"
            );
        }
    }
    let threshold = epr_threshold_qubit(1.0, InferenceConvention::AllOutcomes)
        .unwrap()
        .unwrap();
    assert!(
        (threshold - 0.577350).abs() <= 1e-6,
        "threshold {threshold}"
    );
    let formula = epr_threshold_formula(1.0, InferenceConvention::AllOutcomes).unwrap();
    assert!((formula - 1.0 / 3.0_f64.sqrt()).abs() <= 1e-12);
    println!(
        "criterion 06 PASS: all-outcome inference variance is eta(1-eta^2 p^2)/4 with pure-state \
         threshold eta = 0.577350"
    );
}

#[test]
fn criterion_07_brute_force_oracle_agreement_both_conventions() {
    // Value agreement on a grid, per axis, against the independent
    // literal-eigenvector oracle.
    for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for eta in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let rho = lossy(p, eta);
            let matrix = support::oracle_lossy_matrix(p, eta);
            for (axis_idx, axis) in [SpinAxis::X, SpinAxis::Y, SpinAxis::Z]
                .into_iter()
                .enumerate()
            {
                let table = support::oracle_joint_pmf(&matrix, axis_idx);
                for convention in InferenceConvention::ALL {
                    let detected_only = convention == InferenceConvention::DetectedOnly;
                    if detected_only && eta == 0.0 {
                        continue;
                    }
                    let lib = inferred_variance(&rho, axis, convention).unwrap();
                    let oracle = support::oracle_inferred_variance(&table, detected_only);
                    assert!(
                        (lib - oracle).abs() <= 1e-12,
                        "p={p} eta={eta} {axis:?} {convention:?}: {lib} vs {oracle}"
                    );
                }
            }
        }
    }
    // Thresholds fixed by the oracle: 0.57735 averaging over all outcomes,
    // 0.33333 conditioning on detected outcomes only (pure pair state).
    let oracle_all = support::oracle_epr_threshold(1.0, false).unwrap();
    let oracle_det = support::oracle_epr_threshold(1.0, true).unwrap();
    assert!((oracle_all - 0.5773502691896254).abs() <= 1e-6);
    assert!((oracle_det - 1.0 / 3.0).abs() <= 1e-6);
    let lib_all = epr_threshold_qubit(1.0, InferenceConvention::AllOutcomes)
        .unwrap()
        .unwrap();
    let lib_det = epr_threshold_qubit(1.0, InferenceConvention::DetectedOnly)
        .unwrap()
        .unwrap();
    assert!((lib_all - oracle_all).abs() <= 1e-8);
    assert!((lib_det - oracle_det).abs() <= 1e-8);
    println!(
        "criterion 07 PASS: both conventions agree with the brute-force oracle to 1e-12; \
         thresholds 0.57735 (all outcomes) and 0.33333 (detected only)"
    );
}

#[test]
fn criterion_08_gaussian_moments_match_wick_composition() {
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    for r in [0.1, 0.5, 1.0, 2.0, 3.5, 5.0] {
        for eta in [0.05, 0.3, 0.7, 1.0] {
            let params = SqueezeLossParams::new(r, eta).unwrap();
            let closed = spin_moments(&params);
            let modes = support::evolved_modes(r, eta);

            let n_a = support::real_expectation(&support::number_poly(&modes, 0));
            let n_b = support::real_expectation(&support::number_poly(&modes, 1));
            assert!(rel(closed.n_a, n_a), "r={r} eta={eta}: n_a");
            assert!(rel(closed.n_b, n_b), "r={r} eta={eta}: n_b");

            let jz_a = support::spin_poly(&modes, 0, 2);
            let jz_b = support::spin_poly(&modes, 1, 2);
            let jz2 = support::real_expectation(&jz_a.mul(&jz_a));
            let cross = support::real_expectation(&jz_a.mul(&jz_b));
            assert!(rel(closed.jz2_local, jz2), "r={r} eta={eta}: jz2");
            assert!(rel(closed.jz_cross, cross), "r={r} eta={eta}: cross");

            // Collective variance composed from the summed operator. The
            // pairing sum cancels near-equal large moments (exactly so at
            // eta = 1), so its round-off floor follows the moment scale.
            let sum = support::OperatorPoly([jz_a.0.clone(), jz_b.0.clone()].concat());
            let collective = support::real_expectation(&sum.mul(&sum));
            assert!(
                (closed.collective_var - collective).abs() <= 1e-12 * jz2.abs().max(1.0),
                "r={r} eta={eta}: collective {collective} vs {}",
                closed.collective_var
            );

            // Isotropy: the x and y compositions reproduce the same moments.
            for axis in [0, 1] {
                let a = support::spin_poly(&modes, 0, axis);
                let b = support::spin_poly(&modes, 1, axis);
                let local = support::real_expectation(&a.mul(&a));
                let off = support::real_expectation(&a.mul(&b));
                assert!(rel(closed.jz2_local, local), "axis {axis} local");
                assert!(rel(closed.jz_cross, off), "axis {axis} cross");
            }

            // Linear-inference residual and gain from the composed moments.
            // The residual subtracts two near-equal large moments, so its
            // round-off floor is set by their scale, not by the residual.
            let inference = inferred_variance_gaussian(&params).unwrap();
            let residual = jz2 - cross * cross / jz2;
            let gain = cross.abs() / jz2;
            assert!(
                (inference.variance - residual).abs() <= 1e-12 * jz2.abs().max(1.0),
                "r={r} eta={eta}: residual {residual} vs {}",
                inference.variance
            );
            assert!(rel(inference.gain, gain), "r={r} eta={eta}: gain");
        }
    }
    println!(
        "criterion 08 PASS: squeezed-pair closed forms match Wick-composed moments at relative \
         1e-12 over r in [0.1, 5], eta in [0.05, 1]"
    );
}

#[test]
fn criterion_09_macroscopic_thresholds() {
    // Entanglement margin crosses exactly at eta = 1/3 for any squeezing.
    for r in [0.2, 1.0, 3.0] {
        let report =
            macroscopic_entanglement_check(&SqueezeLossParams::new(r, 1.0 / 3.0).unwrap())
                .unwrap();
        assert!(
            report.margin.abs() <= 1e-12 * report.rhs.max(1.0),
            "r={r}: margin {}",
            report.margin
        );
        assert!(!report.satisfied);
    }
    // Inference threshold curve: 1/√3 in the dilute limit, 2/3 for bright
    // states, monotone in between.
    let nbs = [1e-4, 1e-2, 1.0, 2.0, 10.0, 1e3, 1e6];
    let curve = epr_threshold_curve(&nbs).unwrap();
    let etas: Vec<f64> = curve.iter().map(|pt| pt.eta_min_epr.unwrap()).collect();
    assert!((etas[0] - 1.0 / 3.0_f64.sqrt()).abs() <= 1e-3, "dilute: {}", etas[0]);
    assert!(
        (etas[etas.len() - 1] - 2.0 / 3.0).abs() <= 1e-3,
        "bright: {}",
        etas[etas.len() - 1]
    );
    for pair in etas.windows(2) {
        assert!(pair[1] > pair[0], "threshold curve must increase");
    }
    println!(
        "criterion 09 PASS: macroscopic entanglement flips at eta = 1/3; inference threshold \
         rises monotonically from 1/√3 to 2/3"
    );
}

#[test]
fn criterion_10_monte_carlo_matches_analytic_verdicts() {
    let start = Instant::now();
    for (p, eta) in [(1.0, 0.9), (1.0, 0.5), (0.2, 1.0), (0.5, 0.8)] {
        let rho = lossy(p, eta);
        let suite = estimate_criteria_suite(&rho, 100_000, 2024).unwrap();
        let analytic_collective = collective_spin_criterion(&rho).unwrap();
        assert_eq!(
            suite.collective.satisfied, analytic_collective.satisfied,
            "p={p} eta={eta}: collective verdict"
        );
        assert!(suite.collective.agrees, "p={p} eta={eta}: collective 3-sigma");
        for (k, convention) in InferenceConvention::ALL.into_iter().enumerate() {
            let analytic = epr_criterion(&rho, convention).unwrap();
            assert_eq!(
                suite.epr[k].satisfied, analytic.satisfied,
                "p={p} eta={eta} {convention:?}: verdict"
            );
            assert!(
                suite.epr[k].agrees,
                "p={p} eta={eta} {convention:?}: deviation {} vs 3se {}",
                (suite.epr[k].margin - analytic.margin).abs(),
                3.0 * suite.epr[k].margin_std_error
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 10 PASS: 1e5-event Monte Carlo reproduces analytic verdicts within 3 bootstrap \
         sigma at four benchmark points in {elapsed:?}"
    );
}

#[test]
fn criterion_11_pair_state_purity() {
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let closed = werner_purity(p).unwrap();
        let numeric = werner_state(p).unwrap().purity();
        assert!(
            (closed - numeric).abs() <= 1e-12,
            "p={p}: {closed} vs {numeric}"
        );
    }
    println!("criterion 11 PASS: pair-state purity equals (3p^2+1)/4 for 11 mixing weights");
}
