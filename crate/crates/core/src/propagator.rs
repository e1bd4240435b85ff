//! Numerical propagation of `i d psi/dt = H(t) psi` with
//! `H = (Delta(t)/2) Z + gamma(t) X` over piecewise-linear detuning profiles.
//!
//! Each step applies the exact exponential of the midpoint Hamiltonian
//! (second-order Magnus). The step count starts from the bound
//! `max(E) dt <= step_phase` and is doubled until two successive
//! propagators differ by at most `3 tol` in spectral norm.

use crate::analytic::{AdiabaticFrame, LinearSweepPulse};
use crate::exec::{map_ordered, Execution};
use crate::linalg::{exp_pauli, spectral_norm, Mat2, C64};
use crate::{Error, Result};

/// One linear piece of a detuning profile with constant coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub detuning_start: f64,
    pub detuning_end: f64,
    pub coupling: f64,
}

impl Segment {
    fn detuning_at(&self, t: f64) -> f64 {
        let s = (t - self.t_start) / (self.t_end - self.t_start);
        self.detuning_start + s * (self.detuning_end - self.detuning_start)
    }

    fn max_energy(&self, a: f64, b: f64) -> f64 {
        // E is convex in Delta and Delta is linear in t.
        let e = |d: f64| (0.5 * d).hypot(self.coupling);
        e(self.detuning_at(a)).max(e(self.detuning_at(b)))
    }
}

/// Piecewise-linear `Delta(t)` with piecewise-constant coupling.
///
/// Consecutive segments share their boundary time; the detuning may jump
/// there (an instantaneous switch, which leaves the state unchanged).
#[derive(Clone, Debug, PartialEq)]
pub struct DetuningProfile {
    segments: Vec<Segment>,
}

impl DetuningProfile {
    /// From knots `(t, Delta)` and one coupling per interval between knots.
    /// Two knots at the same time encode a jump; the coupling of that
    /// zero-length interval is ignored.
    pub fn from_knots(knots: &[(f64, f64)], couplings: &[f64]) -> Result<Self> {
        if knots.len() < 2 || couplings.len() + 1 != knots.len() {
            return Err(Error::InvalidProfile(format!(
                "need n >= 2 knots and n - 1 couplings, got {} and {}",
                knots.len(),
                couplings.len()
            )));
        }
        let mut segments = Vec::with_capacity(couplings.len());
        for (w, &gamma) in knots.windows(2).zip(couplings) {
            let ((t0, d0), (t1, d1)) = (w[0], w[1]);
            if ![t0, d0, t1, d1, gamma].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidProfile("non-finite knot or coupling".into()));
            }
            if gamma < 0.0 {
                return Err(Error::InvalidProfile(format!("negative coupling {gamma}")));
            }
            if t1 < t0 {
                return Err(Error::InvalidProfile(format!("knot times decrease: {t0} -> {t1}")));
            }
            if t1 > t0 {
                segments.push(Segment {
                    t_start: t0,
                    t_end: t1,
                    detuning_start: d0,
                    detuning_end: d1,
                    coupling: gamma,
                });
            }
        }
        if segments.is_empty() {
            return Err(Error::InvalidProfile("profile has zero duration".into()));
        }
        Ok(DetuningProfile { segments })
    }

    /// Constant detuning and coupling over `[t0, t1]`.
    pub fn constant(detuning: f64, coupling: f64, t0: f64, t1: f64) -> Result<Self> {
        Self::from_knots(&[(t0, detuning), (t1, detuning)], &[coupling])
    }

    /// A single linear sweep with every detuning shifted by `eps`.
    pub fn from_pulse(pulse: &LinearSweepPulse, eps: f64) -> Self {
        Self::sequence(std::slice::from_ref(pulse), eps).0
    }

    /// Pulses placed back to back starting at the first pulse's own start time,
    /// with instantaneous switches between them. Returns the profile and the
    /// `n + 1` boundary times.
    pub fn sequence(pulses: &[LinearSweepPulse], eps: f64) -> (Self, Vec<f64>) {
        assert!(!pulses.is_empty());
        let mut t = pulses[0].start_time();
        let mut bounds = vec![t];
        let mut segments = Vec::with_capacity(pulses.len());
        for p in pulses {
            let t_end = t + p.duration();
            segments.push(Segment {
                t_start: t,
                t_end,
                detuning_start: p.start_detuning() + eps,
                detuning_end: p.end_detuning() + eps,
                coupling: p.coupling(),
            });
            t = t_end;
            bounds.push(t);
        }
        (DetuningProfile { segments }, bounds)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.segments[0].t_start, self.segments.last().unwrap().t_end)
    }

    fn segment_at(&self, t: f64) -> &Segment {
        self.segments
            .iter()
            .find(|s| t < s.t_end)
            .unwrap_or_else(|| self.segments.last().unwrap())
    }

    /// Right-continuous detuning at time `t`.
    pub fn detuning_at(&self, t: f64) -> f64 {
        self.segment_at(t).detuning_at(t)
    }

    pub fn coupling_at(&self, t: f64) -> f64 {
        self.segment_at(t).coupling
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Target global error in spectral norm, in `[1e-12, 1e-6]`.
    pub tol: f64,
    /// Initial bound on `max(E) dt` per step.
    pub step_phase: f64,
    pub max_refinements: u32,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            tol: 1e-9,
            step_phase: 0.1,
            max_refinements: 30,
        }
    }
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        EvolveOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evolution {
    /// `U(t_end, t_start)` in the computational basis.
    pub unitary: Mat2,
    /// Richardson estimate of the global error of `unitary`.
    pub error_estimate: f64,
    pub steps: usize,
}

struct Piece {
    seg: Segment,
    a: f64,
    b: f64,
    base_steps: usize,
}

fn pieces(profile: &DetuningProfile, t0: f64, t1: f64, step_phase: f64) -> Vec<Piece> {
    profile
        .segments
        .iter()
        .filter_map(|s| {
            let a = s.t_start.max(t0);
            let b = s.t_end.min(t1);
            (b > a).then(|| {
                let n = (s.max_energy(a, b) * (b - a) / step_phase).ceil().max(1.0) as usize;
                Piece {
                    seg: *s,
                    a,
                    b,
                    base_steps: n,
                }
            })
        })
        .collect()
}

fn propagate(pieces: &[Piece], multiplier: usize) -> Mat2 {
    let mut u = Mat2::identity();
    for p in pieces {
        let n = p.base_steps * multiplier;
        let dt = (p.b - p.a) / n as f64;
        let gamma = p.seg.coupling;
        for k in 0..n {
            let tm = p.a + (k as f64 + 0.5) * dt;
            let step = exp_pauli(gamma, 0.0, 0.5 * p.seg.detuning_at(tm), dt);
            u = step * u;
        }
    }
    u
}

/// Propagator with a fixed number of steps per piece, `multiplier` times the
/// step-bound count. Exposed for convergence studies.
pub fn evolve_fixed(
    profile: &DetuningProfile,
    t_start: f64,
    t_end: f64,
    step_phase: f64,
    multiplier: usize,
) -> Result<Mat2> {
    check_interval(profile, t_start, t_end)?;
    Ok(propagate(&pieces(profile, t_start, t_end, step_phase), multiplier.max(1)))
}

fn check_interval(profile: &DetuningProfile, t_start: f64, t_end: f64) -> Result<()> {
    let (lo, hi) = profile.domain();
    let slack = 1e-12 * (hi - lo).max(1.0);
    if !(t_start <= t_end) || t_start < lo - slack || t_end > hi + slack {
        return Err(Error::domain(format!(
            "interval [{t_start}, {t_end}] outside profile domain [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// `U(t_end, t_start)` certified to `opts.tol` in spectral norm.
pub fn evolve(
    profile: &DetuningProfile,
    t_start: f64,
    t_end: f64,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    check_interval(profile, t_start, t_end)?;
    if !(1e-12..=1e-6).contains(&opts.tol) {
        return Err(Error::domain(format!("tolerance {} outside [1e-12, 1e-6]", opts.tol)));
    }
    let ps = pieces(profile, t_start, t_end, opts.step_phase);
    if ps.is_empty() {
        return Ok(Evolution {
            unitary: Mat2::identity(),
            error_estimate: 0.0,
            steps: 0,
        });
    }
    let base: usize = ps.iter().map(|p| p.base_steps).sum();
    let mut m = 1usize;
    let mut coarse = propagate(&ps, m);
    let mut last_err = f64::INFINITY;
    let mut stalls = 0;
    for _ in 0..opts.max_refinements {
        let fine = propagate(&ps, 2 * m);
        let err = spectral_norm(&(fine - coarse)) / 3.0;
        if err <= opts.tol {
            return Ok(Evolution {
                unitary: fine,
                error_estimate: err,
                steps: base * 2 * m,
            });
        }
        // halving should cut the estimate about four-fold
        stalls = if err > 0.5 * last_err { stalls + 1 } else { 0 };
        if stalls >= 3 {
            break;
        }
        last_err = err;
        coarse = fine;
        m *= 2;
        if base.saturating_mul(2 * m) > 1usize << 33 {
            break;
        }
    }
    Err(Error::NotConverged(format!(
        "step halving stalled at error {last_err:e} (target {:e})",
        opts.tol
    )))
}

/// `V^dag(final) U V(initial)`: the propagator in the modified adiabatic basis.
pub fn to_adiabatic(u: &Mat2, initial_detuning: f64, final_detuning: f64, coupling: f64) -> Result<Mat2> {
    let vi = AdiabaticFrame::new(initial_detuning, coupling)?.basis();
    let vf = AdiabaticFrame::new(final_detuning, coupling)?.basis();
    Ok(vf.dagger() * *u * vi)
}

/// Numerically propagated transition matrix of one pulse in its adiabatic
/// frame, with every detuning shifted by `eps`.
pub fn scattering_numeric(pulse: &LinearSweepPulse, eps: f64, opts: &EvolveOptions) -> Result<Mat2> {
    let d1 = pulse.start_detuning() + eps;
    let d2 = pulse.end_detuning() + eps;
    if !(d1 * pulse.start_detuning() > 0.0 && d2 * pulse.end_detuning() > 0.0) {
        return Err(Error::domain(format!("offset {eps} moves an endpoint through resonance")));
    }
    let profile = DetuningProfile::from_pulse(pulse, eps);
    let u = evolve(&profile, pulse.start_time(), pulse.end_time(), opts)?.unitary;
    to_adiabatic(&u, d1, d2, pulse.coupling())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Adiabatic,
    Computational,
}

impl Basis {
    pub fn name(&self) -> &'static str {
        match self {
            Basis::Adiabatic => "adiabatic",
            Basis::Computational => "computational",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub time: f64,
    /// `(t - t_c) |eta|^(1/2)`.
    pub t_scaled: f64,
    /// Population of the initially empty state.
    pub occupation: f64,
    /// `|Delta(t)|` is inside the suppression window around resonance.
    pub near_crossing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub evolve: EvolveOptions,
    /// Adiabatic-basis samples with `|Delta| < factor max(gamma, |eta|^(1/2))` are flagged.
    pub suppression_factor: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            evolve: EvolveOptions::default(),
            suppression_factor: 2.0,
        }
    }
}

/// Traces in both bases from a single propagation, starting in the adiabatic
/// ground state at `t_1`. Returns `(adiabatic, computational)`.
pub fn crossing_traces(
    pulse: &LinearSweepPulse,
    n_samples: usize,
    opts: &TraceOptions,
) -> Result<(Vec<TracePoint>, Vec<TracePoint>)> {
    if n_samples < 2 {
        return Err(Error::domain("a trace needs at least two samples"));
    }
    let profile = DetuningProfile::from_pulse(pulse, 0.0);
    let (t1, t2) = (pulse.start_time(), pulse.end_time());
    let gamma = pulse.coupling();
    let sqrt_eta = pulse.rate().abs().sqrt();
    let window = opts.suppression_factor * gamma.max(sqrt_eta);
    let times: Vec<f64> = (0..n_samples)
        .map(|k| t1 + (t2 - t1) * k as f64 / (n_samples - 1) as f64)
        .collect();

    let g0 = pulse.frame(crate::analytic::Endpoint::Start).ground();
    let mut psi = [C64::from(g0[0]), C64::from(g0[1])];
    let mut adiabatic = Vec::with_capacity(n_samples);
    let mut computational = Vec::with_capacity(n_samples);
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            let u = evolve(&profile, times[k - 1], t, &opts.evolve)?.unitary;
            psi = u * psi;
        }
        let d = pulse.detuning_at(t);
        // at exact resonance, take the side the sweep is coming from
        let d_frame = if d == 0.0 { pulse.start_detuning().signum() * f64::MIN_POSITIVE } else { d };
        let e = AdiabaticFrame::new(d_frame, gamma)?.excited();
        let p_ad = (psi[0] * e[0] + psi[1] * e[1]).norm_sqr();
        let p_comp = psi[1].norm_sqr();
        let t_scaled = (t - pulse.crossing_time()) * sqrt_eta;
        adiabatic.push(TracePoint {
            time: t,
            t_scaled,
            occupation: p_ad,
            near_crossing: d.abs() < window,
        });
        computational.push(TracePoint {
            time: t,
            t_scaled,
            occupation: p_comp,
            near_crossing: false,
        });
    }
    Ok((adiabatic, computational))
}

/// Population of the initially empty state in one basis.
pub fn crossing_trace(
    pulse: &LinearSweepPulse,
    basis: Basis,
    n_samples: usize,
    opts: &TraceOptions,
) -> Result<Vec<TracePoint>> {
    let (a, c) = crossing_traces(pulse, n_samples, opts)?;
    Ok(match basis {
        Basis::Adiabatic => a,
        Basis::Computational => c,
    })
}

/// Traces for many pulses; independent pulses run concurrently.
pub fn crossing_traces_many(
    pulses: &[LinearSweepPulse],
    n_samples: usize,
    opts: &TraceOptions,
    exec: Execution,
) -> Result<Vec<(Vec<TracePoint>, Vec<TracePoint>)>> {
    map_ordered(exec, pulses, |p| crossing_traces(p, n_samples, opts))
        .into_iter()
        .collect()
}
