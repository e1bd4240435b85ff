//! Adiabatic phases `phi(t_i) = |int_{t_c}^{t_i} E dt|` and their response to a
//! constant detuning offset `epsilon`.
//!
//! An offset `Delta(t) -> Delta(t) + epsilon` keeps `eta`, `gamma` and the
//! endpoint times fixed and moves the crossing to `t_c + epsilon / eta`, so the
//! phase at endpoint `i` becomes the unshifted phase function evaluated at
//! `|Delta_i + epsilon|`.

use crate::numeric;
use crate::{Error, Result};

use super::pulse::{Endpoint, LinearSweepPulse};

/// How the phase accumulated between the crossing and an endpoint is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMethod {
    /// Large-`|Delta|` series
    /// `Delta^2/4|eta| + g^2 ln(|Delta|/|eta|^(1/2)) + g^4|eta|/2Delta^2 - phi_0`,
    /// truncated after the `Delta^-2` term.
    Series,
    /// Closed-form antiderivative of `E = (Delta^2/4 + gamma^2)^(1/2)`.
    #[default]
    Integral,
    /// Adaptive numerical quadrature of `E(t)` over the sweep.
    Quadrature,
}

/// Whether an offset is applied exactly or through the second-order expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OffsetMode {
    Exact,
    Perturbative,
}

const QUAD_TOL: f64 = 1e-12;

/// `phi_0 = g^2 (ln g^2 - 1) / 2`.
pub fn phi0(g: f64) -> f64 {
    let g2 = g * g;
    0.5 * g2 * (g2.ln() - 1.0)
}

/// `E = (Delta^2/4 + gamma^2)^(1/2)`.
#[inline]
pub fn energy(detuning: f64, coupling: f64) -> f64 {
    (0.5 * detuning).hypot(coupling)
}

/// Phase-function parameters of one sweep: `|eta|` and `gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    pub rate: f64,
    pub coupling: f64,
}

impl Sweep {
    pub fn new(rate: f64, coupling: f64) -> Self {
        Sweep {
            rate: rate.abs(),
            coupling,
        }
    }

    pub fn of(pulse: &LinearSweepPulse) -> Self {
        Sweep::new(pulse.rate(), pulse.coupling())
    }

    pub fn g(&self) -> f64 {
        self.coupling / self.rate.sqrt()
    }

    /// `phi` at endpoint detuning magnitude `d`.
    pub fn phase(&self, d: f64, method: PhaseMethod) -> f64 {
        let (eta, gam) = (self.rate, self.coupling);
        match method {
            PhaseMethod::Series => {
                let g = self.g();
                let g2 = g * g;
                d * d / (4.0 * eta) + g2 * (d / eta.sqrt()).ln() + g2 * g2 * eta / (2.0 * d * d)
                    - phi0(g)
            }
            PhaseMethod::Integral => {
                let u = 0.5 * d;
                (u * u.hypot(gam) + gam * gam * (u / gam).asinh()) / eta
            }
            PhaseMethod::Quadrature => {
                numeric::integrate(|x| energy(x, gam), 0.0, d, QUAD_TOL * eta)
                    .expect("smooth integrand on a finite interval")
                    / eta
            }
        }
    }

    /// `phase(to) - phase(from)` without cancellation between large terms.
    pub fn phase_increment(&self, from: f64, to: f64, method: PhaseMethod) -> f64 {
        self.phase_step(from, to - from, method)
    }

    /// `phase(from + step) - phase(from)`, with the step passed exactly so a
    /// tiny offset is not lost to rounding in `from + step`.
    pub fn phase_step(&self, from: f64, step: f64, method: PhaseMethod) -> f64 {
        if step == 0.0 {
            return 0.0;
        }
        let to = from + step;
        let (eta, gam) = (self.rate, self.coupling);
        match method {
            PhaseMethod::Series => {
                let g2 = self.g().powi(2);
                let dd = step;
                let sum = to + from;
                dd * sum / (4.0 * eta) + g2 * (dd / from).ln_1p()
                    - g2 * g2 * eta / 2.0 * dd * sum / (from * from * to * to)
            }
            PhaseMethod::Integral => {
                let (u1, u2) = (0.5 * from, 0.5 * to);
                let (s1, s2) = (u1.hypot(gam), u2.hypot(gam));
                let du = 0.5 * step;
                let us = du * (u2 + u1) * (u2 * u2 + u1 * u1 + gam * gam) / (u2 * s2 + u1 * s1);
                // asinh(a) - asinh(b) = asinh((a - b)(a + b) / (a sqrt(1+b^2) + b sqrt(1+a^2)))
                let (a, b) = (u2 / gam, u1 / gam);
                let arg = (du / gam) * (a + b) / (a * b.hypot(1.0) + b * a.hypot(1.0));
                (us + gam * gam * arg.asinh()) / eta
            }
            PhaseMethod::Quadrature => {
                // integrate over the unit interval so the endpoints stay exact
                let mean = numeric::integrate(|s| energy(from + s * step, gam), 0.0, 1.0, QUAD_TOL * 1e-3)
                    .expect("smooth integrand on a finite interval");
                step * mean / eta
            }
        }
    }

    /// `d phi / d|Delta|`. For the integral forms this is exactly `E / |eta|`.
    pub fn phase_slope(&self, d: f64, method: PhaseMethod) -> f64 {
        let (eta, gam) = (self.rate, self.coupling);
        match method {
            PhaseMethod::Series => {
                let g2 = gam * gam / eta;
                d / (2.0 * eta) + g2 / d - g2 * g2 * eta / (d * d * d)
            }
            PhaseMethod::Integral | PhaseMethod::Quadrature => energy(d, gam) / eta,
        }
    }

    /// `d^2 phi / d|Delta|^2`; `|Delta| / (4 |eta| E)` for the integral forms.
    pub fn phase_curvature(&self, d: f64, method: PhaseMethod) -> f64 {
        let (eta, gam) = (self.rate, self.coupling);
        match method {
            PhaseMethod::Series => {
                let g2 = gam * gam / eta;
                1.0 / (2.0 * eta) - g2 / (d * d) + 3.0 * g2 * g2 * eta / d.powi(4)
            }
            PhaseMethod::Integral | PhaseMethod::Quadrature => d / (4.0 * eta * energy(d, gam)),
        }
    }
}

fn shifted_magnitude(pulse: &LinearSweepPulse, endpoint: Endpoint, eps: f64) -> Result<f64> {
    let d = pulse.detuning(endpoint);
    let shifted = d + eps;
    if !(shifted * d > 0.0) {
        return Err(Error::domain(format!(
            "offset {eps} moves endpoint detuning {d} through resonance"
        )));
    }
    Ok(shifted.abs())
}

/// `phi(t_i)` under a detuning offset `eps`.
///
/// The quadrature method integrates `E(t)` literally over time, from the
/// shifted crossing `t_c + eps/eta` to the fixed endpoint time.
pub fn adiabatic_phase(
    pulse: &LinearSweepPulse,
    endpoint: Endpoint,
    eps: f64,
    method: PhaseMethod,
) -> Result<f64> {
    let d = shifted_magnitude(pulse, endpoint, eps)?;
    match method {
        PhaseMethod::Quadrature => {
            let tc = pulse.crossing_time() + eps / pulse.rate();
            let ti = pulse.time(endpoint);
            let gam = pulse.coupling();
            let e = |t: f64| energy(pulse.detuning_at(t) + eps, gam);
            let (lo, hi) = if ti > tc { (tc, ti) } else { (ti, tc) };
            numeric::integrate(e, lo, hi, QUAD_TOL)
        }
        m => Ok(Sweep::of(pulse).phase(d, m)),
    }
}

/// Second-order increment of `phi(t_i)` under an offset:
/// `sgn(Delta_i) E_i eps / |eta| + |Delta_i| eps^2 / (8 |eta| E_i)`.
pub fn phase_offset_perturbative(pulse: &LinearSweepPulse, endpoint: Endpoint, eps: f64) -> f64 {
    let d = pulse.detuning(endpoint);
    let eta = pulse.rate().abs();
    let e = energy(d, pulse.coupling());
    d.signum() * e / eta * eps + d.abs() / (8.0 * eta * e) * eps * eps
}

/// `phi(t_i, eps) - phi(t_i, 0)`, evaluated without cancellation.
pub fn phase_offset_exact(
    pulse: &LinearSweepPulse,
    endpoint: Endpoint,
    eps: f64,
    method: PhaseMethod,
) -> Result<f64> {
    shifted_magnitude(pulse, endpoint, eps)?;
    let d = pulse.detuning(endpoint);
    Ok(Sweep::of(pulse).phase_step(d.abs(), d.signum() * eps, method))
}

/// The pair `(phi(t_1), phi(t_2))`, without the constant `phi_0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointPhases {
    pub start: f64,
    pub end: f64,
}

impl EndpointPhases {
    pub fn get(&self, endpoint: Endpoint) -> f64 {
        match endpoint {
            Endpoint::Start => self.start,
            Endpoint::End => self.end,
        }
    }
}

/// Endpoint phases of a pulse under offset `eps`.
pub fn endpoint_phases(
    pulse: &LinearSweepPulse,
    eps: f64,
    method: PhaseMethod,
    offset: OffsetMode,
) -> Result<EndpointPhases> {
    let sweep = Sweep::of(pulse);
    let one = |endpoint| -> Result<f64> {
        let base = sweep.phase(pulse.detuning(endpoint).abs(), method);
        let delta = match offset {
            OffsetMode::Exact => phase_offset_exact(pulse, endpoint, eps, method)?,
            OffsetMode::Perturbative => phase_offset_perturbative(pulse, endpoint, eps),
        };
        Ok(base + delta)
    };
    Ok(EndpointPhases {
        start: one(Endpoint::Start)?,
        end: one(Endpoint::End)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse(g: f64, d: f64) -> LinearSweepPulse {
        LinearSweepPulse::from_g(g, 1.0, d, -d).unwrap()
    }

    #[test]
    fn free_evolution_limit() {
        // g -> 0: phi -> Delta^2 / 4|eta|
        let p = LinearSweepPulse::with_threshold(1e-6, 2.0, 10.0, -12.0, 0.0).unwrap();
        for m in [PhaseMethod::Integral, PhaseMethod::Quadrature, PhaseMethod::Series] {
            let v = adiabatic_phase(&p, Endpoint::End, 0.0, m).unwrap();
            assert!((v - 144.0 / 8.0).abs() < 1e-9, "{m:?}: {v}");
        }
    }

    #[test]
    fn series_against_quadrature() {
        let p = pulse(1.0, 10.0);
        for ep in [Endpoint::Start, Endpoint::End] {
            let s = adiabatic_phase(&p, ep, 0.0, PhaseMethod::Series).unwrap();
            let q = adiabatic_phase(&p, ep, 0.0, PhaseMethod::Quadrature).unwrap();
            assert!((s - q).abs() < 1e-4, "{s} vs {q}");
        }
    }

    #[test]
    fn integral_against_quadrature() {
        for (g, d) in [(0.2, 7.0), (1.0, 10.0), (3.0, 25.0)] {
            let p = pulse(g, d);
            let a = adiabatic_phase(&p, Endpoint::Start, 0.3, PhaseMethod::Integral).unwrap();
            let q = adiabatic_phase(&p, Endpoint::Start, 0.3, PhaseMethod::Quadrature).unwrap();
            assert!((a - q).abs() < 1e-11 * a.max(1.0), "{a} vs {q}");
        }
    }

    #[test]
    fn increments_match_differences() {
        let s = Sweep::new(2.0, 4.2);
        for m in [PhaseMethod::Series, PhaseMethod::Integral, PhaseMethod::Quadrature] {
            let inc = s.phase_increment(20.0, 21.5, m);
            let diff = s.phase(21.5, m) - s.phase(20.0, m);
            assert!((inc - diff).abs() < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn slopes_match_finite_differences() {
        let s = Sweep::new(1.5, 2.0);
        let h = 1e-4;
        for m in [PhaseMethod::Series, PhaseMethod::Integral] {
            for d in [8.0, 15.0, 40.0] {
                let fd1 = (s.phase(d + h, m) - s.phase(d - h, m)) / (2.0 * h);
                let fd2 = (s.phase(d + h, m) - 2.0 * s.phase(d, m) + s.phase(d - h, m)) / (h * h);
                assert!((fd1 - s.phase_slope(d, m)).abs() < 1e-7);
                assert!((fd2 - s.phase_curvature(d, m)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn perturbative_offset_values() {
        let p = pulse(1.0, 10.0);
        assert_eq!(phase_offset_perturbative(&p, Endpoint::Start, 0.0), 0.0);
        let e = 26f64.sqrt();
        let want = e * 0.1 + 10.0 / (8.0 * e) * 0.01;
        assert!((phase_offset_perturbative(&p, Endpoint::Start, 0.1) - want).abs() < 1e-15);
        // Delta_2 < 0: first-order term is negative
        let neg = phase_offset_perturbative(&p, Endpoint::End, 0.1);
        assert!((neg - (-e * 0.1 + 10.0 / (8.0 * e) * 0.01)).abs() < 1e-15);
    }

    #[test]
    fn perturbative_matches_quadrature_differences() {
        // Third-order agreement; the first-order sign follows sgn(Delta_i).
        for (g, d) in [(1.0, 10.0), (0.4, 8.0)] {
            let p = pulse(g, d);
            let eps = 1e-2 * p.coupling();
            for ep in [Endpoint::Start, Endpoint::End] {
                let q1 = adiabatic_phase(&p, ep, eps, PhaseMethod::Quadrature).unwrap();
                let q0 = adiabatic_phase(&p, ep, 0.0, PhaseMethod::Quadrature).unwrap();
                let pert = phase_offset_perturbative(&p, ep, eps);
                let e = energy(d, p.coupling());
                assert!((q1 - q0 - pert).abs() <= 1e-6 * eps * e / p.rate());
            }
        }
    }

    #[test]
    fn third_order_residual_ratio_is_stable() {
        let p = pulse(1.0, 10.0);
        let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| {
                let exact = phase_offset_exact(&p, Endpoint::End, eps, PhaseMethod::Integral).unwrap();
                (exact - phase_offset_perturbative(&p, Endpoint::End, eps)) / eps.powi(3)
            })
            .collect();
        // d^3 phi / d|Delta|^3 / 6 * sgn = -gamma^2 / (24 E^3 eta)
        let e = energy(10.0, 1.0);
        let want = -1.0 / (24.0 * e.powi(3));
        for r in &ratios {
            assert!((r - want).abs() < 0.05 * want.abs(), "{ratios:?}");
        }
    }

    #[test]
    fn offset_through_resonance_is_rejected() {
        let p = pulse(1.0, 10.0);
        assert!(adiabatic_phase(&p, Endpoint::End, 10.0, PhaseMethod::Integral).is_err());
        assert!(adiabatic_phase(&p, Endpoint::Start, -11.0, PhaseMethod::Integral).is_err());
        assert!(endpoint_phases(&p, 12.0, PhaseMethod::Integral, OffsetMode::Exact).is_err());
    }
}
