use serde::Serialize;

use crate::linalg::Mat2;
use crate::{Error, Result};

/// Default adiabatic threshold factor `A` in `|Delta_i| >= A max(gamma, |eta|^(1/2))`.
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 4.0;

/// Which end of a pulse: the start `t_1` or the end `t_2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Start,
    End,
}

/// Instantaneous adiabatic energy and mixing angle of `H = (Delta/2) Z + gamma X`.
///
/// The states are chosen so that `|psi_0>` and `|psi_1>` go over into the
/// computational states for `|Delta| / gamma -> infinity`, on both sides of
/// resonance. The angle is therefore discontinuous at `Delta = 0`, which is
/// rejected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticFrame {
    pub detuning: f64,
    pub coupling: f64,
    pub energy: f64,
    pub theta: f64,
}

impl AdiabaticFrame {
    pub fn new(detuning: f64, coupling: f64) -> Result<Self> {
        if !(coupling >= 0.0) || !coupling.is_finite() {
            return Err(Error::domain(format!("coupling must be >= 0, got {coupling}")));
        }
        if detuning == 0.0 || !detuning.is_finite() {
            return Err(Error::domain(format!(
                "adiabatic frame undefined at detuning {detuning}"
            )));
        }
        let half = 0.5 * detuning.abs();
        let energy = half.hypot(coupling);
        // atan2 keeps full precision where acos(|Delta|/2E) would not.
        let theta = detuning.signum() * coupling.atan2(half);
        Ok(AdiabaticFrame {
            detuning,
            coupling,
            energy,
            theta,
        })
    }

    /// `cos(theta) = |Delta| / 2E`.
    pub fn cos_theta(&self) -> f64 {
        self.theta.cos()
    }

    /// `|psi_0> = (cos(theta/2), sin(theta/2))`.
    pub fn ground(&self) -> [f64; 2] {
        let (s, c) = (0.5 * self.theta).sin_cos();
        [c, s]
    }

    /// `|psi_1> = (-sin(theta/2), cos(theta/2))`.
    pub fn excited(&self) -> [f64; 2] {
        let (s, c) = (0.5 * self.theta).sin_cos();
        [-s, c]
    }

    /// Basis change `V` whose columns are `|psi_0>`, `|psi_1>`.
    pub fn basis(&self) -> Mat2 {
        let (s, c) = (0.5 * self.theta).sin_cos();
        Mat2::from_real(c, -s, s, c)
    }
}

/// Convenience wrapper for [`AdiabaticFrame::new`].
pub fn adiabatic_frame(detuning: f64, coupling: f64) -> Result<AdiabaticFrame> {
    AdiabaticFrame::new(detuning, coupling)
}

/// One radiation pulse with constant coupling and linearly swept detuning
/// `Delta(t) = -eta (t - t_c)` between `Delta_1 = Delta(t_1)` and
/// `Delta_2 = Delta(t_2)`.
///
/// `eta > 0` is a downward sweep (`Delta_1 > 0 > Delta_2`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearSweepPulse {
    coupling: f64,
    rate: f64,
    start_detuning: f64,
    end_detuning: f64,
    crossing_time: f64,
}

impl LinearSweepPulse {
    pub fn new(coupling: f64, rate: f64, start_detuning: f64, end_detuning: f64) -> Result<Self> {
        Self::with_threshold(coupling, rate, start_detuning, end_detuning, DEFAULT_THRESHOLD_FACTOR)
    }

    /// Like [`new`](Self::new) with an explicit adiabatic threshold factor.
    /// A factor of zero only enforces that the sweep crosses resonance.
    pub fn with_threshold(
        coupling: f64,
        rate: f64,
        start_detuning: f64,
        end_detuning: f64,
        threshold_factor: f64,
    ) -> Result<Self> {
        let all_finite = [coupling, rate, start_detuning, end_detuning, threshold_factor]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidPulse("non-finite parameter".into()));
        }
        if coupling <= 0.0 {
            return Err(Error::InvalidPulse(format!("coupling must be > 0, got {coupling}")));
        }
        if rate == 0.0 {
            return Err(Error::InvalidPulse("sweep rate must be nonzero".into()));
        }
        if !(start_detuning * end_detuning < 0.0) {
            return Err(Error::InvalidPulse(format!(
                "sweep must cross resonance: Delta_1 = {start_detuning}, Delta_2 = {end_detuning}"
            )));
        }
        if start_detuning.signum() != rate.signum() {
            return Err(Error::InvalidPulse(format!(
                "sign of Delta_1 ({start_detuning}) must match sign of eta ({rate})"
            )));
        }
        let threshold = threshold_factor * coupling.max(rate.abs().sqrt());
        for d in [start_detuning, end_detuning] {
            if d.abs() < threshold {
                return Err(Error::InvalidPulse(format!(
                    "|Delta| = {} below adiabatic threshold {threshold} (factor {threshold_factor})",
                    d.abs()
                )));
            }
        }
        Ok(LinearSweepPulse {
            coupling,
            rate,
            start_detuning,
            end_detuning,
            crossing_time: 0.0,
        })
    }

    /// Builds a pulse from the dimensionless coupling `g = gamma / |eta|^(1/2)`.
    pub fn from_g(g: f64, rate: f64, start_detuning: f64, end_detuning: f64) -> Result<Self> {
        Self::new(g * rate.abs().sqrt(), rate, start_detuning, end_detuning)
    }

    /// The same pulse shifted in time so that it crosses resonance at `t_c`.
    pub fn with_crossing_time(mut self, crossing_time: f64) -> Self {
        self.crossing_time = crossing_time;
        self
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn start_detuning(&self) -> f64 {
        self.start_detuning
    }

    pub fn end_detuning(&self) -> f64 {
        self.end_detuning
    }

    pub fn detuning(&self, endpoint: Endpoint) -> f64 {
        match endpoint {
            Endpoint::Start => self.start_detuning,
            Endpoint::End => self.end_detuning,
        }
    }

    pub fn crossing_time(&self) -> f64 {
        self.crossing_time
    }

    pub fn g(&self) -> f64 {
        self.coupling / self.rate.abs().sqrt()
    }

    /// `+1` for a downward sweep, `-1` for an upward one.
    pub fn sweep_sign(&self) -> f64 {
        self.rate.signum()
    }

    /// `t_i = t_c - Delta_i / eta`.
    pub fn time(&self, endpoint: Endpoint) -> f64 {
        self.crossing_time - self.detuning(endpoint) / self.rate
    }

    pub fn start_time(&self) -> f64 {
        self.time(Endpoint::Start)
    }

    pub fn end_time(&self) -> f64 {
        self.time(Endpoint::End)
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    pub fn detuning_at(&self, t: f64) -> f64 {
        -self.rate * (t - self.crossing_time)
    }

    pub fn frame(&self, endpoint: Endpoint) -> AdiabaticFrame {
        AdiabaticFrame::new(self.detuning(endpoint), self.coupling)
            .expect("validated pulse has nonzero endpoint detunings")
    }
}
