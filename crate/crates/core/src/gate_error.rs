//! Gate error as the spectral-norm distance to the ideal gate, its closed
//! form in terms of endpoint phase defects, and offset sweeps.

use serde::Serialize;

use crate::analytic::{phase_offset_exact, phase_offset_perturbative, Endpoint, LinearSweepPulse, OffsetMode};
use crate::composite::{
    compose_with, corrected_phase_error_with, pulse_matrix, CompositeSequence, DesignOptions, EvalMode,
};
use crate::exec::{try_map_ordered, Execution};
use crate::linalg::{spectral_norm, Mat2};
use crate::numeric::log_log_slope;
use crate::propagator::EvolveOptions;
use crate::{Error, Result};

/// Inputs to [`gate_error`] must be unitary to this tolerance.
pub const GATE_UNITARITY_TOL: f64 = 1e-9;

/// `||(+-S) - S_ideal||_2`, with the minus sign when `negate` is set.
pub fn gate_error(s: &Mat2, ideal: &Mat2, negate: bool) -> Result<f64> {
    s.check_unitary(GATE_UNITARITY_TOL)?;
    ideal.check_unitary(GATE_UNITARITY_TOL)?;
    let s = if negate { -*s } else { *s };
    Ok(spectral_norm(&(s - *ideal)))
}

/// `2^(1/2) |1 - n_x1 n_x2 - n_y1 n_y2 cos(alpha)|^(1/2)` with
/// `n_i = (cos d_i, sin d_i)`: the error of `R_z(-2 d_2) R_x(alpha) R_z(2 d_1)`
/// relative to `R_x(alpha)`.
///
/// Evaluated as the equal sum of squares
/// `2 (cos^2(alpha/2) sin^2((d_1 - d_2)/2) + sin^2(alpha/2) sin^2((d_1 + d_2)/2))^(1/2)`,
/// which keeps its relative precision when the error is tiny.
pub fn uncorrected_error_analytic(d1: f64, d2: f64, alpha: f64) -> f64 {
    let (sa, ca) = (0.5 * alpha).sin_cos();
    let minus = ca * (0.5 * (d1 - d2)).sin();
    let plus = sa * (0.5 * (d1 + d2)).sin();
    2.0 * minus.hypot(plus)
}

/// The same quantity written literally, for cross-checking.
pub fn uncorrected_error_literal(d1: f64, d2: f64, alpha: f64) -> f64 {
    let (s1, c1) = d1.sin_cos();
    let (s2, c2) = d2.sin_cos();
    std::f64::consts::SQRT_2 * (1.0 - c1 * c2 - s1 * s2 * alpha.cos()).abs().sqrt()
}

fn single_offset(pulse: &LinearSweepPulse, ep: Endpoint, eps: f64, seq: &CompositeSequence, mode: OffsetMode) -> Result<f64> {
    match mode {
        OffsetMode::Exact => phase_offset_exact(pulse, ep, eps, seq.options.phase_method),
        OffsetMode::Perturbative => Ok(phase_offset_perturbative(pulse, ep, eps)),
    }
}

/// Error of the bare working pulse from its phase defects.
pub fn single_error_analytic(seq: &CompositeSequence, eps: f64, mode: OffsetMode) -> Result<f64> {
    let d1 = single_offset(&seq.working, Endpoint::Start, eps, seq, mode)?;
    let d2 = single_offset(&seq.working, Endpoint::End, eps, seq, mode)?;
    Ok(uncorrected_error_analytic(d1, d2, seq.alpha()))
}

/// Error of the composite from the corrected phase defects of both endpoints.
pub fn composite_error_analytic(seq: &CompositeSequence, eps: f64, mode: OffsetMode) -> Result<f64> {
    let d1 = corrected_phase_error_with(seq, Endpoint::Start, eps, mode)?;
    let d2 = corrected_phase_error_with(seq, Endpoint::End, eps, mode)?;
    Ok(uncorrected_error_analytic(d1, d2, seq.alpha()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorSweepRow {
    pub eps: f64,
    pub eps_over_gamma: f64,
    pub error_single: f64,
    pub error_composite: f64,
    pub mode: EvalMode,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SweepOptions {
    pub design: DesignOptions,
    pub evolve: EvolveOptions,
    pub exec: Execution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSweep {
    pub sequence: CompositeSequence,
    pub rows: Vec<ErrorSweepRow>,
}

/// `n` points spaced evenly in `ln x` over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Evaluates single-pulse and composite errors over `eps_grid` (frequency
/// units) for an already designed sequence. Rows keep the grid order.
pub fn error_sweep_for(
    seq: &CompositeSequence,
    eps_grid: &[f64],
    mode: EvalMode,
    opts: &SweepOptions,
) -> Result<Vec<ErrorSweepRow>> {
    let gamma = seq.working.coupling();
    let ideal = seq.ideal();
    let method = seq.options.phase_method;
    try_map_ordered(opts.exec, eps_grid, |&eps| {
        if !eps.is_finite() {
            return Err(Error::domain(format!("non-finite offset {eps}")));
        }
        let single = pulse_matrix(&seq.working, eps, mode, method, &opts.evolve)?;
        // the three pulses of one row run sequentially; rows are the parallel unit
        let comp = compose_with(seq, eps, mode, &opts.evolve, Execution::Sequential)?;
        Ok(ErrorSweepRow {
            eps,
            eps_over_gamma: eps / gamma,
            error_single: gate_error(&single, &ideal, false)?,
            error_composite: gate_error(&comp, &ideal, true)?,
            mode,
        })
    })
}

/// Designs the sequence for `(g, delta_target)` at working rate `rate` once,
/// then sweeps the offset.
pub fn error_sweep(
    g: f64,
    rate: f64,
    delta_target: f64,
    eps_grid: &[f64],
    mode: EvalMode,
    opts: &SweepOptions,
) -> Result<ErrorSweep> {
    let sequence = CompositeSequence::design(g, rate, delta_target, &opts.design)?;
    let rows = error_sweep_for(&sequence, eps_grid, mode, opts)?;
    Ok(ErrorSweep { sequence, rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curve {
    Single,
    Composite,
}

/// Least-squares log-log slope of one error curve against `eps/gamma` over
/// rows with `eps/gamma` in `[lo, hi]`.
pub fn slope_in_window(rows: &[ErrorSweepRow], curve: Curve, lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.eps_over_gamma >= lo * (1.0 - 1e-12) && r.eps_over_gamma <= hi * (1.0 + 1e-12))
        .map(|r| {
            let y = match curve {
                Curve::Single => r.error_single,
                Curve::Composite => r.error_composite,
            };
            (r.eps_over_gamma, y)
        })
        .collect();
    log_log_slope(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rx, rz, C64};
    use std::f64::consts::PI;

    #[test]
    fn identical_gates_have_zero_error() {
        let s = rx(0.7) * rz(0.2);
        assert_eq!(gate_error(&s, &s, false).unwrap(), 0.0);
        assert!((gate_error(&s, &s, true).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn global_phase_error() {
        let ideal = rx(1.1);
        for d in [0.01, 0.5, 2.0, -1.3] {
            let s = ideal.scale(C64::from_polar(1.0, d));
            let want = 2.0 * (0.5 * d).sin().abs();
            assert!((gate_error(&s, &ideal, false).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let bad = rx(0.3).scale(C64::new(1.0 + 1e-6, 0.0));
        assert!(matches!(gate_error(&bad, &rx(0.3), false), Err(Error::NonUnitary { .. })));
        assert!(gate_error(&rx(0.3), &bad, false).is_err());
    }

    #[test]
    fn analytic_formula_special_cases() {
        assert_eq!(uncorrected_error_analytic(0.0, 0.0, 1.0), 0.0);
        // opposite defects of a symmetric pulse give 2 cos(alpha/2) |sin d|
        for (d, alpha) in [(0.1, 0.7), (0.3, 2.0), (-0.2, PI)] {
            let v = uncorrected_error_analytic(d, -d, alpha);
            assert!((v - 2.0 * (0.5 * alpha).cos() * d.sin().abs()).abs() < 1e-12);
            let w = uncorrected_error_analytic(d, d, alpha);
            assert!((w - 2.0 * (0.5 * alpha).sin() * d.sin().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_formula_matches_matrix_metric() {
        let mut x = 0.123f64;
        let mut next = || {
            x = (x * 9301.0 + 49297.0) % 233280.0;
            x / 233280.0
        };
        for _ in 0..200 {
            let (d1, d2, a) = (2.0 * next() - 1.0, 2.0 * next() - 1.0, PI * next());
            let s = rz(-2.0 * d2) * rx(a) * rz(2.0 * d1);
            let m = gate_error(&s, &rx(a), false).unwrap();
            assert!((m - uncorrected_error_analytic(d1, d2, a)).abs() < 1e-12);
            assert!((m - uncorrected_error_literal(d1, d2, a)).abs() < 1e-7);
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1.0, 60);
        assert_eq!(g.len(), 60);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[59], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_grid(1.0, 2.0, 0).is_empty());
    }
}
