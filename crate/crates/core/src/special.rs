//! Complex log-gamma on the strip needed by the scattering matrix.

use std::f64::consts::PI;

use crate::linalg::C64;
use crate::{Error, Result};

// Lanczos approximation, g = 7, n = 9 (Godfrey's coefficient set).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Gamma(z)` for `Re z >= 1/2`, on the branch that is real on the
/// positive axis and continuous in the right half plane.
pub fn ln_gamma_right(z: C64) -> C64 {
    debug_assert!(z.re >= 0.5);
    let x = z - 1.0;
    let mut series = C64::from(LANCZOS_P[0]);
    for (k, &p) in LANCZOS_P.iter().enumerate().skip(1) {
        series += p / (x + k as f64);
    }
    let t = x + (LANCZOS_G + 0.5);
    HALF_LN_2PI + (x + 0.5) * t.ln() - t + series.ln()
}

/// `ln Gamma(i y)` for `y > 0`.
///
/// Uses `ln Gamma(iy) = ln Gamma(1 + iy) - ln(iy)`, so the imaginary part is
/// the continuous (unwrapped) `arg Gamma(iy)`, not reduced to `(-pi, pi]`.
pub fn log_gamma_imag(y: f64) -> Result<C64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain(format!("log_gamma_imag needs y > 0, got {y}")));
    }
    let shifted = ln_gamma_right(C64::new(1.0, y));
    Ok(shifted - C64::new(y.ln(), 0.5 * PI))
}

/// `|Gamma(iy)|^2 = pi / (y sinh(pi y))`.
pub fn gamma_imag_modulus_sq_exact(y: f64) -> f64 {
    PI / (y * (PI * y).sinh())
}
