use std::f64::consts::PI;

use lz_gates::analytic::{
    rotation_angles, scattering_matrix, Endpoint, LinearSweepPulse, PhaseMethod, Sweep,
};
use lz_gates::composite::{
    compose, compose_with, corrected_phase_error, design_pi_pulse, pi_pulse_shortcut, quantize_working_pulse,
    wrap_phase, Compensation, CompositeSequence, DesignOptions, EvalMode, Side,
};
use lz_gates::exec::Execution;
use lz_gates::linalg::{rx, spectral_norm};
use lz_gates::propagator::{scattering_numeric, EvolveOptions};
use lz_gates::Error;

fn design(g: f64, compensation: Compensation) -> CompositeSequence {
    let opts = DesignOptions {
        compensation,
        ..Default::default()
    };
    CompositeSequence::design(g, 1.0, 10.0, &opts).unwrap()
}

#[test]
fn working_pulse_quantization() {
    let w = quantize_working_pulse(1.0, 1.0, 10.0, PhaseMethod::Integral).unwrap();
    let d = w.start_detuning();
    assert_eq!(w.end_detuning(), -d);
    assert!((d - 10.0).abs() <= PI / d, "{d}");
    let (alpha, _) = rotation_angles(1.0).unwrap();
    let s = scattering_matrix(&w, 0.0, PhaseMethod::Integral).unwrap();
    assert!(s.max_abs_diff(&rx(alpha)) <= 1e-10);
    // re-quantizing at the root returns the root
    let again = quantize_working_pulse(1.0, 1.0, d, PhaseMethod::Integral).unwrap();
    assert!((again.start_detuning() - d).abs() <= 1e-12 * d);
}

#[test]
fn quantization_for_every_figure_coupling() {
    for g in [2.0, 1.2, 1.0, 0.3] {
        for method in [PhaseMethod::Integral, PhaseMethod::Series] {
            let w = quantize_working_pulse(g, 1.0, 10.0, method).unwrap();
            let (alpha, _) = rotation_angles(g).unwrap();
            let s = lz_gates::analytic::rotation_form(&w, 0.0, method).unwrap();
            assert!(s.max_abs_diff(&rx(alpha)) <= 1e-10, "g = {g}, {method:?}");
        }
    }
}

#[test]
fn simplified_design_contract() {
    for g in [2.0, 1.2, 1.0, 0.3] {
        let seq = design(g, Compensation::Simplified);
        let d = seq.working.start_detuning().abs();
        assert!(seq.max_quantization_residual() <= 1e-10);
        for spec in [&seq.leading, &seq.trailing] {
            assert_eq!(spec.pulse.rate(), 2.0 * seq.working.rate());
            assert!((spec.far - 2.0 * d - spec.near).abs() <= 1e-10 * spec.far);
            assert!(spec.near >= spec.near_bound);
            assert!((spec.near_bound - d * 2f64.sqrt() * (3.0 / g).cbrt()).abs() < 1e-12 * d);
            assert!(spec.far > spec.near);
            // E ~ |Delta|/2 turns the first-order condition into (F - N - 2D) / (4 eta)
            let first_order = spec.far / (2.0 * spec.pulse.rate()) - d / (2.0 * seq.working.rate())
                - spec.near / (2.0 * spec.pulse.rate());
            assert!(first_order.abs() <= 1e-10);
        }
    }
}

#[test]
fn full_design_contract() {
    for g in [2.0, 1.2, 1.0, 0.3] {
        let seq = design(g, Compensation::Full);
        assert!(seq.max_quantization_residual() <= 1e-10);
        assert!(seq.max_compensation_residual() <= 1e-10);
        for spec in [&seq.leading, &seq.trailing] {
            assert!(spec.near >= spec.near_bound && spec.far > spec.near);
            assert!(spec.pulse.rate() > 0.0);
            // close to the simplified rate
            assert!((spec.pulse.rate() / seq.working.rate() - 2.0).abs() < 0.1);
            assert_eq!(spec.pulse.start_detuning().signum(), seq.working.start_detuning().signum());
        }
    }
}

#[test]
fn near_endpoint_bound_example() {
    // g = 1, |Delta_2| = 10, g_pi = 3: bound 10 sqrt(2) 3^(1/3) ~ 20.40
    let w = LinearSweepPulse::from_g(1.0, 1.0, 10.0, -10.0).unwrap();
    let bound = 10.0 * 2f64.sqrt() * 3f64.cbrt();
    assert!((bound - 20.40).abs() < 5e-3);
    // this pulse is not quantized; the pi-pulse design does not depend on that
    let spec = design_pi_pulse(&w, Side::Trailing, &DesignOptions {
        compensation: Compensation::Simplified,
        ..Default::default()
    })
    .unwrap();
    assert!((spec.near_bound - bound).abs() < 1e-12);
    assert!(spec.near >= bound);
    // the quantization nudge stays within one phase period of the bound
    let sweep = Sweep::of(&spec.pulse);
    assert!(spec.near - bound <= PI / sweep.phase_slope(bound, PhaseMethod::Integral) + 1e-9);
    assert!((spec.far - (20.0 + spec.near)).abs() < 1e-10);
    assert_eq!(spec.pulse.rate(), 2.0);
    let q = sweep.phase(spec.near, PhaseMethod::Integral) + sweep.phase(spec.far, PhaseMethod::Integral)
        - rotation_angles(3.0).unwrap().1;
    assert!(wrap_phase(q, PI).abs() < 1e-10);
}

#[test]
fn leakage_budget_is_enforced() {
    let w = quantize_working_pulse(1.0, 1.0, 10.0, PhaseMethod::Integral).unwrap();
    let opts = DesignOptions {
        g_pi: 1.5,
        ..Default::default()
    };
    assert!(matches!(design_pi_pulse(&w, Side::Leading, &opts), Err(Error::Design(_))));
    let relaxed = DesignOptions {
        g_pi: 1.5,
        leakage_budget: 1e-2,
        ..Default::default()
    };
    assert!(design_pi_pulse(&w, Side::Leading, &relaxed).is_ok());
}

#[test]
fn unquantized_working_pulse_is_rejected() {
    let w = LinearSweepPulse::from_g(1.0, 1.0, 10.0, -10.0).unwrap();
    assert!(CompositeSequence::from_working(w, &DesignOptions::default()).is_err());
    let lopsided = LinearSweepPulse::from_g(1.0, 1.0, 10.0, -11.0).unwrap();
    assert!(CompositeSequence::from_working(lopsided, &DesignOptions::default()).is_err());
}

#[test]
fn composite_is_minus_the_ideal_gate_at_zero_offset() {
    for compensation in [Compensation::Full, Compensation::Simplified] {
        for g in [2.0, 1.2, 1.0, 0.3] {
            let seq = design(g, compensation);
            let target = seq.ideal();
            for mode in [EvalMode::Perturbative, EvalMode::Exact] {
                let sc = compose(&seq, 0.0, mode).unwrap();
                assert!(spectral_norm(&(sc + target)) <= 1e-9, "g = {g}, {mode:?}");
            }
            let sn = compose(&seq, 0.0, EvalMode::Numeric).unwrap();
            assert!(spectral_norm(&(sn + target)) <= 1e-2, "g = {g}");
        }
    }
}

#[test]
fn perturbative_and_exact_agree_to_third_order() {
    for g in [1.0, 0.3, 2.0] {
        let seq = design(g, Compensation::Full);
        let eps = 0.01 * seq.working.coupling();
        let a = compose(&seq, eps, EvalMode::Perturbative).unwrap();
        let b = compose(&seq, eps, EvalMode::Exact).unwrap();
        assert!(spectral_norm(&(a - b)) <= 10.0 * 1e-6 * g * g, "g = {g}: {}", spectral_norm(&(a - b)));
    }
}

#[test]
fn exact_and_numeric_agree() {
    let seq = design(1.0, Compensation::Full);
    let eps = 0.1 * seq.working.coupling();
    let a = compose(&seq, eps, EvalMode::Exact).unwrap();
    let b = compose(&seq, eps, EvalMode::Numeric).unwrap();
    assert!(spectral_norm(&(a - b)) <= 1e-2, "{}", spectral_norm(&(a - b)));
}

#[test]
fn parallel_composition_matches_sequential() {
    let seq = design(1.2, Compensation::Full);
    let opts = EvolveOptions::default();
    for mode in [EvalMode::Exact, EvalMode::Numeric] {
        let a = compose_with(&seq, 0.3, mode, &opts, Execution::Sequential).unwrap();
        let b = compose_with(&seq, 0.3, mode, &opts, Execution::default()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn corrected_phase_error_cancels_through_second_order() {
    for g in [1.0, 0.3] {
        let seq = design(g, Compensation::Full);
        let gamma = seq.working.coupling();
        for ep in [Endpoint::Start, Endpoint::End] {
            assert_eq!(corrected_phase_error(&seq, ep, 0.0).unwrap(), 0.0);
            let r: Vec<f64> = [1e-2, 1e-3]
                .iter()
                .map(|x| corrected_phase_error(&seq, ep, x * gamma).unwrap() / (x * gamma).powi(2))
                .collect();
            // residual / eps^2 falls with eps
            assert!((r[1] / r[0]).abs() < 0.15, "g = {g} {ep:?}: {r:?}");
        }
    }
}

#[test]
fn corrected_phase_error_matches_phase_recomputation() {
    // the same combination built from absolute phases at shifted detunings
    let seq = design(1.0, Compensation::Full);
    let m = PhaseMethod::Quadrature;
    let eps = 0.05;
    let phase = |p: &LinearSweepPulse, ep: Endpoint, e: f64| lz_gates::analytic::adiabatic_phase(p, ep, e, m).unwrap();
    let diff = |p: &LinearSweepPulse, ep: Endpoint| phase(p, ep, eps) - phase(p, ep, 0.0);
    let t = &seq.trailing;
    let want = diff(&seq.working, Endpoint::End) - diff(&t.pulse, t.near_endpoint()) - diff(&t.pulse, t.far_endpoint());
    let got = corrected_phase_error(&seq, Endpoint::End, eps).unwrap();
    assert!((got - want).abs() < 1e-8, "{got} vs {want}");
}

#[test]
fn cubic_residual_is_generically_nonzero() {
    let seq = design(1.0, Compensation::Full);
    let (g, gamma) = (seq.working.g(), seq.working.coupling());
    let d = seq.working.start_detuning().abs();
    let eta = seq.working.rate();
    let eps = 1e-2 * gamma;
    let c = corrected_phase_error(&seq, Endpoint::End, eps).unwrap() / eps.powi(3);
    let scale = g * g * gamma / (d.powi(3) * eta);
    assert!(c.abs() >= 1e-3 * scale, "{c} vs {scale}");
    assert!(c.abs() <= 1e2 * scale, "{c} vs {scale}");
}

#[test]
fn pi_pulse_shortcut_identity() {
    let seq = design(1.0, Compensation::Full);
    for spec in [&seq.leading, &seq.trailing] {
        let leak = 2.0 * (-PI * spec.g_pi * spec.g_pi).exp();
        for eps in [0.0, 0.1] {
            let exact = scattering_matrix(&spec.pulse, eps, PhaseMethod::Integral).unwrap();
            let short = pi_pulse_shortcut(&spec.pulse, eps, PhaseMethod::Integral).unwrap();
            assert!(spectral_norm(&(exact - short)) <= leak, "{}", spectral_norm(&(exact - short)));
        }
    }
}

#[test]
fn numeric_pi_pulse_swaps_adiabatic_states() {
    let seq = design(1.0, Compensation::Full);
    let opts = EvolveOptions::with_tol(1e-10);
    for spec in [&seq.leading, &seq.trailing] {
        let leak = 2.0 * (-PI * spec.g_pi * spec.g_pi).exp();
        let stay = |p: &LinearSweepPulse| scattering_numeric(p, 0.0, &opts).unwrap().get(0, 0).norm_sqr();
        // at the designed endpoints the adiabatic frame itself is off by
        // O(gamma eta / E^3) in amplitude, well inside the leakage budget
        let designed = stay(&spec.pulse);
        assert!(designed <= seq.options.leakage_budget, "{designed:e}");
        // stretching both endpoints removes that term and leaves the tunnelling leak
        let p = &spec.pulse;
        let far = LinearSweepPulse::new(p.coupling(), p.rate(), 8.0 * p.start_detuning(), 8.0 * p.end_detuning()).unwrap();
        let stretched = stay(&far);
        assert!(stretched <= leak + opts.tol, "{stretched:e} > {:e}", leak + opts.tol);
        assert!(stretched < designed);
    }
}
