//! The Landau-Zener transition matrix in the modified adiabatic basis, built
//! two independent ways: directly from the parabolic-cylinder asymptotics and
//! as a product of rotations.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::linalg::{rx, rz, Mat2, C64};
use crate::special::log_gamma_imag;
use crate::{Error, Result};

use super::phase::{endpoint_phases, phi0, EndpointPhases, OffsetMode, PhaseMethod};
use super::pulse::LinearSweepPulse;

/// Direct construction for a downward sweep (`eta > 0`), with the full phases
/// `varphi_i = phi(t_i) + phi_0`:
///
/// ```text
/// S00 = exp(-pi g^2 + i(v2 - v1))
/// S01 = -(2 pi)^(1/2) / (g Gamma(i g^2))  exp(-pi g^2/2 - i pi/4 + i(v1 + v2))
/// S10 =  (2 pi)^(1/2) / (g Gamma(-i g^2)) exp(-pi g^2/2 + i pi/4 - i(v1 + v2))
/// S11 = exp(-pi g^2 - i(v2 - v1))
/// ```
fn downward_matrix(g: f64, v1: f64, v2: f64) -> Mat2 {
    let g2 = g * g;
    let ln_gamma = log_gamma_imag(g2).expect("g > 0 checked by caller");
    let diag_mod = (-PI * g2).exp();
    // ln|(2pi)^(1/2) / (g Gamma(ig^2))| - pi g^2 / 2
    let off_ln_mod = 0.5 * (2.0 * PI).ln() - g.ln() - ln_gamma.re - 0.5 * PI * g2;
    let off_mod = off_ln_mod.exp();
    let arg_gamma = ln_gamma.im;
    let s00 = C64::from_polar(diag_mod, v2 - v1);
    let s11 = C64::from_polar(diag_mod, -(v2 - v1));
    // 1/Gamma(ig^2) carries phase -arg Gamma; 1/Gamma(-ig^2) carries +arg Gamma.
    let s01 = -C64::from_polar(off_mod, -arg_gamma - FRAC_PI_4 + v1 + v2);
    let s10 = C64::from_polar(off_mod, arg_gamma + FRAC_PI_4 - (v1 + v2));
    Mat2::new(s00, s01, s10, s11)
}

/// Scattering matrix from precomputed endpoint phases.
///
/// For an upward sweep (`sweep_sign < 0`) the result is the transpose of the
/// downward matrix with the two phases interchanged.
pub fn scattering_from_phases(g: f64, sweep_sign: f64, phases: EndpointPhases) -> Result<Mat2> {
    check_g(g)?;
    let p0 = phi0(g);
    let (v1, v2) = (phases.start + p0, phases.end + p0);
    Ok(if sweep_sign > 0.0 {
        downward_matrix(g, v1, v2)
    } else {
        downward_matrix(g, v2, v1).transpose()
    })
}

/// The transition matrix `S(t_2, t_1)` of a pulse under detuning offset `eps`,
/// with phases evaluated exactly at the shifted endpoints.
pub fn scattering_matrix(pulse: &LinearSweepPulse, eps: f64, method: PhaseMethod) -> Result<Mat2> {
    let phases = endpoint_phases(pulse, eps, method, OffsetMode::Exact)?;
    scattering_from_phases(pulse.g(), pulse.sweep_sign(), phases)
}

fn check_g(g: f64) -> Result<()> {
    if g > 0.0 && g.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("g must be > 0, got {g}")))
    }
}

/// `alpha = 2 acos(exp(-pi g^2))` and `Phi = -2 phi_0 + arg Gamma(i g^2) + 3 pi / 4`.
///
/// `Phi` uses the continuous branch of `arg Gamma`, so it is a smooth
/// function of `g` rather than being folded into `(-pi, pi]`.
pub fn rotation_angles(g: f64) -> Result<(f64, f64)> {
    check_g(g)?;
    let g2 = g * g;
    let alpha = 2.0 * (-PI * g2).exp().acos();
    let arg_gamma = log_gamma_imag(g2)?.im;
    let big_phi = -2.0 * phi0(g) + arg_gamma + 0.75 * PI;
    Ok((alpha, big_phi))
}

/// A transition matrix written as rotations in the adiabatic basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationDecomposition {
    pub alpha: f64,
    pub big_phi: f64,
    pub phase_start: f64,
    pub phase_end: f64,
    pub sweep_sign: f64,
}

impl RotationDecomposition {
    pub fn new(g: f64, sweep_sign: f64, phases: EndpointPhases) -> Result<Self> {
        let (alpha, big_phi) = rotation_angles(g)?;
        Ok(RotationDecomposition {
            alpha,
            big_phi,
            phase_start: phases.start,
            phase_end: phases.end,
            sweep_sign,
        })
    }

    /// `S' = R_z(Phi) R_x(alpha) R_z(-Phi)`.
    pub fn core(&self) -> Mat2 {
        rz(self.big_phi) * rx(self.alpha) * rz(-self.big_phi)
    }

    /// Downward: `R_z(-2 phi_2) S' R_z(2 phi_1)`.
    /// Upward: `R_z(2 phi_2 - Phi) R_x(alpha) R_z(-2 phi_1 + Phi)`.
    pub fn matrix(&self) -> Mat2 {
        let (p1, p2) = (self.phase_start, self.phase_end);
        if self.sweep_sign > 0.0 {
            rz(-2.0 * p2) * self.core() * rz(2.0 * p1)
        } else {
            rz(2.0 * p2 - self.big_phi) * rx(self.alpha) * rz(-2.0 * p1 + self.big_phi)
        }
    }

    /// The phase defects `Phi - 2 phi(t_i)`; both vanish mod `2 pi` for a pure
    /// X rotation.
    pub fn phase_defects(&self) -> (f64, f64) {
        (
            self.big_phi - 2.0 * self.phase_start,
            self.big_phi - 2.0 * self.phase_end,
        )
    }
}

/// `S(t_2, t_1)` via the rotation decomposition.
pub fn rotation_form(pulse: &LinearSweepPulse, eps: f64, method: PhaseMethod) -> Result<Mat2> {
    let phases = endpoint_phases(pulse, eps, method, OffsetMode::Exact)?;
    Ok(RotationDecomposition::new(pulse.g(), pulse.sweep_sign(), phases)?.matrix())
}
