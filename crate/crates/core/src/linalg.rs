//! Complex 2x2 matrices, Pauli operators and single-qubit rotations.
//!
//! Rotations are written in whatever two-dimensional basis the caller is
//! working in; for the Landau-Zener analysis that is the modified adiabatic
//! basis, where `Z|psi_n> = (1 - 2n)|psi_n>` and `X` swaps the two states.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Default tolerance of the unitary constructor contract.
pub const UNITARY_TOL: f64 = 1e-12;

/// A 2x2 complex matrix stored row-major as `[a00, a01, a10, a11]`.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat2(pub [C64; 4]);

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

impl Mat2 {
    pub const fn new(a00: C64, a01: C64, a10: C64, a11: C64) -> Self {
        Mat2([a00, a01, a10, a11])
    }

    pub const fn identity() -> Self {
        Mat2([ONE, ZERO, ZERO, ONE])
    }

    pub const fn zero() -> Self {
        Mat2([ZERO; 4])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2([a, ZERO, ZERO, d])
    }

    pub fn from_real(a00: f64, a01: f64, a10: f64, a11: f64) -> Self {
        Mat2([a00.into(), a01.into(), a10.into(), a11.into()])
    }

    /// Builds a matrix and checks `||M^dag M - I||_2 <= tol`.
    pub fn unitary(entries: [C64; 4], tol: f64) -> crate::Result<Self> {
        let m = Mat2(entries);
        m.check_unitary(tol)?;
        Ok(m)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[2 * row + col]
    }

    pub fn dagger(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    pub fn transpose(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a, c, b, d])
    }

    pub fn det(&self) -> C64 {
        let [a, b, c, d] = self.0;
        a * d - b * c
    }

    pub fn trace(&self) -> C64 {
        self.0[0] + self.0[3]
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2(self.0.map(|x| x * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `||M^dag M - I||_2`.
    pub fn unitarity_defect(&self) -> f64 {
        spectral_norm(&(self.dagger() * *self - Mat2::identity()))
    }

    pub fn check_unitary(&self, tol: f64) -> crate::Result<()> {
        if !self.is_finite() {
            return Err(crate::Error::NonUnitary { defect: f64::NAN, tol });
        }
        let defect = self.unitarity_defect();
        if defect <= tol {
            Ok(())
        } else {
            Err(crate::Error::NonUnitary { defect, tol })
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = rhs.0;
        Mat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

impl Mul<[C64; 2]> for Mat2 {
    type Output = [C64; 2];
    fn mul(self, v: [C64; 2]) -> [C64; 2] {
        let [a, b, c, d] = self.0;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|k| self.0[k] + rhs.0[k]))
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|k| self.0[k] - rhs.0[k]))
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2(self.0.map(|x| -x))
    }
}

pub fn pauli_x() -> Mat2 {
    Mat2([ZERO, ONE, ONE, ZERO])
}

/// `Y = iXZ`.
pub fn pauli_y() -> Mat2 {
    Mat2([ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> Mat2 {
    Mat2([ONE, ZERO, ZERO, -ONE])
}

/// `R_Z(angle) = exp(-i angle Z / 2)`.
pub fn rz(angle: f64) -> Mat2 {
    let h = 0.5 * angle;
    Mat2::diag(C64::from_polar(1.0, -h), C64::from_polar(1.0, h))
}

/// `R_X(angle) = exp(-i angle X / 2)`.
pub fn rx(angle: f64) -> Mat2 {
    let (s, c) = (0.5 * angle).sin_cos();
    let off = C64::new(0.0, -s);
    Mat2([c.into(), off, off, c.into()])
}

/// `exp(-i t (hx X + hy Y + hz Z))` for a real field vector, in closed form.
pub fn exp_pauli(hx: f64, hy: f64, hz: f64, t: f64) -> Mat2 {
    let r = (hx * hx + hy * hy + hz * hz).sqrt();
    if r == 0.0 {
        return Mat2::identity();
    }
    let (s, c) = (r * t).sin_cos();
    let k = s / r;
    // cos(rt) I - i sin(rt) (h . sigma) / r
    Mat2([
        C64::new(c, -k * hz),
        C64::new(-k * hy, -k * hx),
        C64::new(k * hy, -k * hx),
        C64::new(c, k * hz),
    ])
}

/// Largest singular value, as the square root of the top eigenvalue of `M M^dag`.
///
/// With `M M^dag = [[p, r], [r*, q]]` the eigenvalue gap is
/// `((p - q)^2 + 4|r|^2)^(1/2)`, a sum of squares, so the result keeps full
/// relative precision even when the two singular values nearly coincide.
pub fn spectral_norm(m: &Mat2) -> f64 {
    let [a, b, c, d] = m.0;
    let p = a.norm_sqr() + b.norm_sqr();
    let q = c.norm_sqr() + d.norm_sqr();
    let r = a * c.conj() + b * d.conj();
    let gap = (p - q).hypot(2.0 * r.norm());
    (0.5 * (p + q + gap)).sqrt()
}
