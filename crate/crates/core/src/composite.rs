//! The three-pulse sequence: pi-pulse, working pulse, pi-pulse.
//!
//! All three pulses sweep in the same direction and are joined by
//! instantaneous switches, so the detuning traces a sawtooth. For a downward
//! working pulse `+D -> -D` the leading pi-pulse runs `+F -> -N` and the
//! trailing one `+N -> -F`, with `N` the near and `F` the far endpoint
//! magnitude. A detuning offset `eps` then shifts the phases at the two ends
//! of each switch in a way that the pi-pulses can be made to cancel through
//! second order in `eps`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{
    endpoint_phases, phase_offset_exact, phase_offset_perturbative, rotation_angles, scattering_matrix,
    Endpoint, LinearSweepPulse, OffsetMode, PhaseMethod, RotationDecomposition, Sweep,
    DEFAULT_THRESHOLD_FACTOR,
};
use crate::exec::{try_map_ordered, Execution};
use crate::linalg::{rx, rz, Mat2, C64};
use crate::numeric::brent;
use crate::propagator::{evolve, scattering_numeric, to_adiabatic, DetuningProfile, EvolveOptions};
use crate::{Error, Result};

/// Default bound on the pi-pulse swap failure amplitude `exp(-pi g_pi^2)`.
pub const DEFAULT_LEAKAGE_BUDGET: f64 = 1e-5;

const NEWTON_TOL: f64 = 1e-12;

/// Reduces `x` into `[-period/2, period/2]`.
pub fn wrap_phase(x: f64, period: f64) -> f64 {
    x - period * (x / period).round()
}

/// How the pi-pulse endpoints are tied to the working pulse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compensation {
    /// Cancel the first and second derivatives of the phase offsets exactly,
    /// solving for the far endpoint and the pi-pulse sweep rate.
    #[default]
    Full,
    /// Leading-order solution with `E ~ |Delta|/2`: `eta_pi = 2 eta` and
    /// `F = 2D + N`.
    Simplified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Leading,
    Trailing,
}

/// How each pulse's transition matrix is obtained under an offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Rotation form with phases shifted by the second-order expansion.
    Perturbative,
    /// Closed-form matrix with phases recomputed at the shifted detunings.
    Exact,
    /// Numerical propagation, converted to each pulse's adiabatic frame.
    Numeric,
}

impl EvalMode {
    pub fn name(&self) -> &'static str {
        match self {
            EvalMode::Perturbative => "perturbative",
            EvalMode::Exact => "exact",
            EvalMode::Numeric => "numeric",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignOptions {
    pub g_pi: f64,
    pub leakage_budget: f64,
    pub compensation: Compensation,
    pub phase_method: PhaseMethod,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            g_pi: 3.0,
            leakage_budget: DEFAULT_LEAKAGE_BUDGET,
            compensation: Compensation::Full,
            phase_method: PhaseMethod::Integral,
        }
    }
}

/// Symmetric pulse `Delta_1 = -Delta_2 = D*` whose phase defects
/// `Phi - 2 phi(t_i)` vanish mod `2 pi`, with `D*` the admissible root nearest
/// `delta_target`.
pub fn quantize_working_pulse(
    g: f64,
    rate: f64,
    delta_target: f64,
    method: PhaseMethod,
) -> Result<LinearSweepPulse> {
    let s = rate.signum();
    // validates g, the rate and the target against the threshold
    LinearSweepPulse::from_g(g, rate, s * delta_target.abs(), -s * delta_target.abs())?;
    let target = delta_target.abs();
    let gamma = g * rate.abs().sqrt();
    let sweep = Sweep::new(rate, gamma);
    let (_, big_phi) = rotation_angles(g)?;
    let threshold = DEFAULT_THRESHOLD_FACTOR * gamma.max(rate.abs().sqrt());

    let h = |d: f64| big_phi - 2.0 * sweep.phase(d, method);
    let h_t = h(target);
    // h decreases with D: level 2 pi k_up is reached at or above the target,
    // level 2 pi (k_up + 1) below it.
    let k_up = (h_t / (2.0 * PI)).floor();
    let period = PI / sweep.phase_slope(target, method);
    let mut best: Option<f64> = None;
    for (k, dir) in [(k_up, 1.0), (k_up + 1.0, -1.0)] {
        let level = 2.0 * PI * k;
        let f = |d: f64| h(d) - level;
        let mut b = target;
        let mut found = false;
        for _ in 0..64 {
            b += dir * period;
            if b <= 0.0 {
                break;
            }
            if f(b) * dir <= 0.0 {
                found = true;
                break;
            }
        }
        if !found {
            continue;
        }
        let (lo, hi) = if dir > 0.0 { (target, b) } else { (b.max(0.0), target) };
        let root = brent(f, lo, hi, 4.0 * f64::EPSILON * target, 200)?;
        if root < threshold {
            continue;
        }
        if best.is_none_or(|r| (root - target).abs() < (r - target).abs()) {
            best = Some(root);
        }
    }
    let d = best.ok_or_else(|| {
        Error::NoRoot(format!("no quantized endpoint near Delta = {target} for g = {g}"))
    })?;
    LinearSweepPulse::from_g(g, rate, s * d, -s * d)
}

/// `Phi - 2 phi(D)` of a symmetric working pulse, reduced mod `2 pi`.
pub fn working_quantization_residual(working: &LinearSweepPulse, method: PhaseMethod) -> Result<f64> {
    let (_, big_phi) = rotation_angles(working.g())?;
    let sweep = Sweep::of(working);
    let a = wrap_phase(big_phi - 2.0 * sweep.phase(working.start_detuning().abs(), method), 2.0 * PI);
    let b = wrap_phase(big_phi - 2.0 * sweep.phase(working.end_detuning().abs(), method), 2.0 * PI);
    Ok(if a.abs() >= b.abs() { a } else { b })
}

/// One correcting pi-pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PiPulseSpec {
    pub pulse: LinearSweepPulse,
    pub side: Side,
    pub g_pi: f64,
    /// `|Delta_pi|` at the endpoint adjacent to the working pulse.
    pub near: f64,
    /// `|Delta_pi|` at the outer endpoint.
    pub far: f64,
    /// `sqrt(2) (g_pi/g)^(1/3) |Delta_working|`.
    pub near_bound: f64,
    /// Residuals of the compensation conditions actually solved.
    pub compensation_residuals: [f64; 2],
    /// `phi_pi(near) + phi_pi(far) - Phi_pi`, reduced mod `pi`.
    pub quantization_residual: f64,
}

impl PiPulseSpec {
    pub fn near_endpoint(&self) -> Endpoint {
        match self.side {
            Side::Leading => Endpoint::End,
            Side::Trailing => Endpoint::Start,
        }
    }

    pub fn far_endpoint(&self) -> Endpoint {
        match self.side {
            Side::Leading => Endpoint::Start,
            Side::Trailing => Endpoint::End,
        }
    }
}

struct PiGeometry {
    g_pi: f64,
    working: Sweep,
    /// `|Delta|` of the adjacent working endpoint
    d: f64,
    method: PhaseMethod,
}

impl PiGeometry {
    fn sweep(&self, rate_pi: f64) -> Sweep {
        Sweep::new(rate_pi, self.g_pi * rate_pi.sqrt())
    }

    /// First- and second-order compensation conditions.
    fn full_residuals(&self, n: f64, f: f64, rate_pi: f64) -> [f64; 2] {
        let p = self.sweep(rate_pi);
        let m = self.method;
        [
            p.phase_slope(f, m) - p.phase_slope(n, m) - self.working.phase_slope(self.d, m),
            p.phase_curvature(f, m) + p.phase_curvature(n, m) - self.working.phase_curvature(self.d, m),
        ]
    }

    fn simplified_residuals(&self, n: f64, f: f64, rate_pi: f64) -> [f64; 2] {
        let eta = self.working.rate;
        [(f - n - 2.0 * self.d) / (4.0 * eta), rate_pi / eta - 2.0]
    }

    fn simplified(&self, n: f64) -> (f64, f64) {
        (2.0 * self.d + n, 2.0 * self.working.rate)
    }

    /// Damped Newton in `(F, ln eta_pi)` from the simplified solution.
    fn solve_full(&self, n: f64) -> Result<(f64, f64)> {
        let (f0, r0) = self.simplified(n);
        let mut x = [f0, r0.ln()];
        let eval = |x: [f64; 2]| self.full_residuals(n, x[0], x[1].exp());
        let scale = [self.working.phase_slope(self.d, self.method), self.working.phase_curvature(self.d, self.method)];
        let norm = |r: [f64; 2]| (r[0] / scale[0]).hypot(r[1] / scale[1]);
        let mut r = eval(x);
        for _ in 0..100 {
            if norm(r) <= NEWTON_TOL {
                return Ok((x[0], x[1].exp()));
            }
            let mut jac = [[0.0; 2]; 2];
            for j in 0..2 {
                let h = 1e-7 * x[j].abs().max(1.0);
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let (rp, rm) = (eval(xp), eval(xm));
                for i in 0..2 {
                    jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dx = [
                -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
            ];
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let xn = [x[0] + lambda * dx[0], x[1] + lambda * dx[1]];
                if xn[0] > n {
                    let rn = eval(xn);
                    if norm(rn) < norm(r) || norm(rn) <= NEWTON_TOL {
                        x = xn;
                        r = rn;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if norm(r) <= 1e3 * NEWTON_TOL {
            return Ok((x[0], x[1].exp()));
        }
        Err(Error::NotConverged(format!(
            "compensation conditions at N = {n}: residual {:e}",
            norm(r)
        )))
    }

    fn solve(&self, n: f64, compensation: Compensation) -> Result<(f64, f64)> {
        match compensation {
            Compensation::Full => self.solve_full(n),
            Compensation::Simplified => Ok(self.simplified(n)),
        }
    }
}

/// Designs the pi-pulse on one side of a quantized working pulse.
///
/// The near endpoint is the smallest value at or above the bound for which
/// `phi_pi(N) + phi_pi(F) - Phi_pi = 0 (mod pi)`; the far endpoint and the
/// pi-pulse rate follow from the compensation conditions.
pub fn design_pi_pulse(
    working: &LinearSweepPulse,
    side: Side,
    options: &DesignOptions,
) -> Result<PiPulseSpec> {
    let g_pi = options.g_pi;
    if !(g_pi > 0.0 && g_pi.is_finite()) {
        return Err(Error::domain(format!("g_pi must be > 0, got {g_pi}")));
    }
    let leak = (-PI * g_pi * g_pi).exp();
    if leak > options.leakage_budget {
        return Err(Error::Design(format!(
            "pi-pulse leakage exp(-pi g_pi^2) = {leak:e} exceeds budget {:e} (g_pi = {g_pi})",
            options.leakage_budget
        )));
    }
    let method = options.phase_method;
    let s = working.sweep_sign();
    let adjacent = match side {
        Side::Leading => Endpoint::Start,
        Side::Trailing => Endpoint::End,
    };
    let geo = PiGeometry {
        g_pi,
        working: Sweep::of(working),
        d: working.detuning(adjacent).abs(),
        method,
    };
    let near_bound = 2f64.sqrt() * (g_pi / working.g()).cbrt() * geo.d;
    let (_, phi_pi) = rotation_angles(g_pi)?;

    let q = |n: f64| -> Result<f64> {
        let (f, rate_pi) = geo.solve(n, options.compensation)?;
        let p = geo.sweep(rate_pi);
        Ok(p.phase(n, method) + p.phase(f, method) - phi_pi)
    };
    let q0 = q(near_bound)?;
    // q increases with N; aim for the next multiple of pi
    let level = PI * (q0 / PI).ceil();
    let near = if q0 == level {
        near_bound
    } else {
        let mut step = PI / (q(near_bound + 1e-3)? - q0).abs().max(1e-12) * 1e-3;
        let mut hi = near_bound + step;
        let mut found = false;
        for _ in 0..64 {
            if q(hi)? >= level {
                found = true;
                break;
            }
            step *= 1.5;
            hi += step;
        }
        if !found {
            return Err(Error::NoRoot(format!("pi-pulse quantization above N = {near_bound}")));
        }
        let mut failure = None;
        let root = brent(
            |n| match q(n) {
                Ok(v) => v - level,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            near_bound,
            hi,
            4.0 * f64::EPSILON * hi,
            200,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        root?
    };
    let (far, rate_pi) = geo.solve(near, options.compensation)?;
    let gamma_pi = g_pi * rate_pi.sqrt();
    let far_threshold = DEFAULT_THRESHOLD_FACTOR * gamma_pi.max(rate_pi.sqrt());
    if far < far_threshold {
        return Err(Error::Design(format!(
            "pi-pulse far endpoint {far} below adiabatic threshold {far_threshold}"
        )));
    }
    // the near endpoint is held to the tighter bound above instead of the threshold
    let (start, end) = match side {
        Side::Leading => (s * far, -s * near),
        Side::Trailing => (s * near, -s * far),
    };
    let pulse = LinearSweepPulse::with_threshold(gamma_pi, s * rate_pi, start, end, 0.0)?;
    let compensation_residuals = match options.compensation {
        Compensation::Full => geo.full_residuals(near, far, rate_pi),
        Compensation::Simplified => geo.simplified_residuals(near, far, rate_pi),
    };
    let p = geo.sweep(rate_pi);
    let quantization_residual = wrap_phase(p.phase(near, method) + p.phase(far, method) - phi_pi, PI);
    Ok(PiPulseSpec {
        pulse,
        side,
        g_pi,
        near,
        far,
        near_bound,
        compensation_residuals,
        quantization_residual,
    })
}

/// A designed pi / working / pi sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompositeSequence {
    pub leading: PiPulseSpec,
    pub working: LinearSweepPulse,
    pub trailing: PiPulseSpec,
    pub options: DesignOptions,
    /// Mod-`2 pi` defect of the working pulse, then the mod-`pi` defects of
    /// the leading and trailing pi-pulses.
    pub quantization_residuals: [f64; 3],
}

impl CompositeSequence {
    /// Quantizes a working pulse near `delta_target` and designs both pi-pulses.
    pub fn design(g: f64, rate: f64, delta_target: f64, options: &DesignOptions) -> Result<Self> {
        let working = quantize_working_pulse(g, rate, delta_target, options.phase_method)?;
        Self::from_working(working, options)
    }

    /// Designs pi-pulses around an already quantized symmetric working pulse.
    pub fn from_working(working: LinearSweepPulse, options: &DesignOptions) -> Result<Self> {
        if (working.start_detuning() + working.end_detuning()).abs() > 1e-12 * working.start_detuning().abs() {
            return Err(Error::Design("working pulse must be symmetric".into()));
        }
        let wq = working_quantization_residual(&working, options.phase_method)?;
        if wq.abs() > 1e-10 {
            return Err(Error::Design(format!("working pulse is not quantized (defect {wq:e})")));
        }
        let leading = design_pi_pulse(&working, Side::Leading, options)?;
        let trailing = design_pi_pulse(&working, Side::Trailing, options)?;
        Ok(CompositeSequence {
            quantization_residuals: [wq, leading.quantization_residual, trailing.quantization_residual],
            leading,
            working,
            trailing,
            options: *options,
        })
    }

    /// The three pulses in time order.
    pub fn pulses(&self) -> [LinearSweepPulse; 3] {
        [self.leading.pulse, self.working, self.trailing.pulse]
    }

    /// Rotation angle of the working pulse.
    pub fn alpha(&self) -> f64 {
        rotation_angles(self.working.g()).map(|a| a.0).expect("validated pulse")
    }

    /// The target gate `R_x(alpha)`.
    pub fn ideal(&self) -> Mat2 {
        rx(self.alpha())
    }

    pub fn max_compensation_residual(&self) -> f64 {
        self.leading
            .compensation_residuals
            .iter()
            .chain(&self.trailing.compensation_residuals)
            .fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn max_quantization_residual(&self) -> f64 {
        self.quantization_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Transition matrix of one pulse under offset `eps`.
pub fn pulse_matrix(
    pulse: &LinearSweepPulse,
    eps: f64,
    mode: EvalMode,
    method: PhaseMethod,
    evolve_opts: &EvolveOptions,
) -> Result<Mat2> {
    match mode {
        EvalMode::Perturbative => {
            let phases = endpoint_phases(pulse, eps, method, OffsetMode::Perturbative)?;
            Ok(RotationDecomposition::new(pulse.g(), pulse.sweep_sign(), phases)?.matrix())
        }
        EvalMode::Exact => scattering_matrix(pulse, eps, method),
        EvalMode::Numeric => scattering_numeric(pulse, eps, evolve_opts),
    }
}

/// `S_c = S_pi(trailing) S S_pi(leading)` with default propagator settings.
pub fn compose(seq: &CompositeSequence, eps: f64, mode: EvalMode) -> Result<Mat2> {
    compose_with(seq, eps, mode, &EvolveOptions::default(), Execution::default())
}

/// [`compose`] with explicit propagator settings. In numeric mode each pulse
/// is propagated over its own stretch of the sawtooth profile and handed to
/// the next in the adiabatic basis.
pub fn compose_with(
    seq: &CompositeSequence,
    eps: f64,
    mode: EvalMode,
    evolve_opts: &EvolveOptions,
    exec: Execution,
) -> Result<Mat2> {
    let method = seq.options.phase_method;
    let m = match mode {
        EvalMode::Numeric => {
            let pulses = seq.pulses();
            let (profile, bounds) = DetuningProfile::sequence(&pulses, eps);
            let idx = [0usize, 1, 2];
            try_map_ordered(exec, &idx, |&k| {
                let p = &pulses[k];
                let (d1, d2) = (p.start_detuning() + eps, p.end_detuning() + eps);
                if !(d1 * p.start_detuning() > 0.0 && d2 * p.end_detuning() > 0.0) {
                    return Err(Error::domain(format!("offset {eps} moves an endpoint through resonance")));
                }
                let u = evolve(&profile, bounds[k], bounds[k + 1], evolve_opts)?.unitary;
                to_adiabatic(&u, d1, d2, p.coupling())
            })?
        }
        _ => try_map_ordered(exec, &seq.pulses(), |p| pulse_matrix(p, eps, mode, method, evolve_opts))?,
    };
    Ok(m[2] * m[1] * m[0])
}

/// Propagator over the whole sawtooth in the computational basis, converted
/// to the adiabatic frame only at the two outer endpoints. Each switch then
/// also projects between the frames of two different pulses.
pub fn sawtooth_outer_frame(seq: &CompositeSequence, eps: f64, evolve_opts: &EvolveOptions) -> Result<Mat2> {
    let pulses = seq.pulses();
    let (profile, bounds) = DetuningProfile::sequence(&pulses, eps);
    let u = evolve(&profile, bounds[0], bounds[3], evolve_opts)?.unitary;
    let (first, last) = (&pulses[0], &pulses[2]);
    let vi = crate::analytic::AdiabaticFrame::new(first.start_detuning() + eps, first.coupling())?.basis();
    let vf = crate::analytic::AdiabaticFrame::new(last.end_detuning() + eps, last.coupling())?.basis();
    Ok(vf.dagger() * u * vi)
}

/// The `alpha_pi = pi` shortcut for a pi-pulse,
/// `-i X R_z(2 phi_pi(t_1) + 2 phi_pi(t_2) - 2 Phi_pi)`, for a downward sweep.
pub fn pi_pulse_shortcut(pulse: &LinearSweepPulse, eps: f64, method: PhaseMethod) -> Result<Mat2> {
    let phases = endpoint_phases(pulse, eps, method, OffsetMode::Exact)?;
    let (_, big_phi) = rotation_angles(pulse.g())?;
    let minus_i_x = Mat2::new(C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, -1.0), C64::new(0.0, 0.0));
    let angle = 2.0 * (phases.start + phases.end) - 2.0 * big_phi;
    Ok(if pulse.sweep_sign() > 0.0 {
        minus_i_x * rz(angle)
    } else {
        rz(angle) * minus_i_x
    })
}

fn offset(pulse: &LinearSweepPulse, ep: Endpoint, eps: f64, method: PhaseMethod, mode: OffsetMode) -> Result<f64> {
    match mode {
        OffsetMode::Exact => phase_offset_exact(pulse, ep, eps, method),
        OffsetMode::Perturbative => Ok(phase_offset_perturbative(pulse, ep, eps)),
    }
}

fn side_spec(seq: &CompositeSequence, endpoint: Endpoint) -> &PiPulseSpec {
    match endpoint {
        Endpoint::Start => &seq.leading,
        Endpoint::End => &seq.trailing,
    }
}

/// Residual phase error at one working-pulse endpoint,
/// `delta phi(t_i) - delta phi_pi(near) - delta phi_pi(far)`, from exact
/// phase increments.
pub fn corrected_phase_error(seq: &CompositeSequence, endpoint: Endpoint, eps: f64) -> Result<f64> {
    corrected_phase_error_with(seq, endpoint, eps, OffsetMode::Exact)
}

/// [`corrected_phase_error`] with the offsets taken either exactly or from
/// the second-order expansion.
pub fn corrected_phase_error_with(
    seq: &CompositeSequence,
    endpoint: Endpoint,
    eps: f64,
    mode: OffsetMode,
) -> Result<f64> {
    let method = seq.options.phase_method;
    let pi = side_spec(seq, endpoint);
    let w = offset(&seq.working, endpoint, eps, method, mode)?;
    let near = offset(&pi.pulse, pi.near_endpoint(), eps, method, mode)?;
    let far = offset(&pi.pulse, pi.far_endpoint(), eps, method, mode)?;
    Ok(w - near - far)
}
