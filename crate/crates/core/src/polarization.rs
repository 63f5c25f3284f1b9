//! Jones, Stokes and Müller calculus for the polarizer/plate chain.
//!
//! Conventions:
//! - Stokes components follow `[|Ex|²+|Ey|², |Ex|²−|Ey|², 2Re(ExEy*), −2Im(ExEy*)]`.
//! - The circular basis is ordered (LCP, RCP) and reached from the linear
//!   basis through `T = 1/√2 [[1, −j], [1, j]]`.
//! - A Jones vector recovered from a Stokes vector has `e_x` real and
//!   non-negative (or `e_y` real and non-negative when `e_x` vanishes).

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance on `p = 1` for a Stokes vector to count as fully polarized.
pub const FULLY_POLARIZED_TOL: f64 = 1e-9;

/// Imaginary residue allowed when collapsing `T(J⊗J*)T⁻¹` to a real matrix.
pub const MUELLER_IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Cartesian (x, y) components.
    Linear,
    /// Circular (LCP, RCP) components.
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub components: Vector2<Complex64>,
    pub basis: Basis,
}

impl JonesVector {
    pub fn linear(e_x: Complex64, e_y: Complex64) -> Self {
        Self {
            components: Vector2::new(e_x, e_y),
            basis: Basis::Linear,
        }
    }

    pub fn circular(e_l: Complex64, e_r: Complex64) -> Self {
        Self {
            components: Vector2::new(e_l, e_r),
            basis: Basis::Circular,
        }
    }

    pub fn first(&self) -> Complex64 {
        self.components[0]
    }

    pub fn second(&self) -> Complex64 {
        self.components[1]
    }

    /// `|a|² + |b|²`, identical in both bases since `T` is unitary.
    pub fn intensity(&self) -> f64 {
        self.components[0].norm_sqr() + self.components[1].norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn to_circular(self) -> Self {
        match self.basis {
            Basis::Circular => self,
            Basis::Linear => linear_to_circular(&self),
        }
    }

    pub fn to_linear(self) -> Self {
        match self.basis {
            Basis::Linear => self,
            Basis::Circular => Self {
                components: linear_to_circular_matrix().adjoint() * self.components,
                basis: Basis::Linear,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn new(s0: f64, s1: f64, s2: f64, s3: f64) -> Self {
        Self { s0, s1, s2, s3 }
    }

    /// Unpolarized light of intensity `i` (`p = 0`).
    pub fn unpolarized(i: f64) -> Self {
        Self::new(i, 0.0, 0.0, 0.0)
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.s0, self.s1, self.s2, self.s3)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn intensity(&self) -> f64 {
        self.s0
    }

    pub fn polarized_intensity(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }

    /// Degree of polarization `p`; zero for a dark beam.
    pub fn degree_of_polarization(&self) -> f64 {
        if self.s0 <= 0.0 {
            0.0
        } else {
            self.polarized_intensity() / self.s0
        }
    }

    pub fn is_fully_polarized(&self) -> bool {
        let s0 = self.s0.abs();
        let ip = self.polarized_intensity();
        if s0 == 0.0 {
            return ip == 0.0;
        }
        ((ip * ip - s0 * s0).abs() / (s0 * s0)) <= FULLY_POLARIZED_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    pub matrix: Matrix2<Complex64>,
    pub basis: Basis,
}

impl JonesMatrix {
    pub fn new(matrix: Matrix2<Complex64>, basis: Basis) -> Self {
        Self { matrix, basis }
    }

    pub fn identity(basis: Basis) -> Self {
        Self::new(Matrix2::identity(), basis)
    }

    /// Applies the element to a vector, converting it into this matrix's basis first.
    pub fn apply(&self, v: &JonesVector) -> JonesVector {
        let v = match self.basis {
            Basis::Linear => v.to_linear(),
            Basis::Circular => v.to_circular(),
        };
        JonesVector {
            components: self.matrix * v.components,
            basis: self.basis,
        }
    }

    /// `self · other`; both operands must share a basis.
    pub fn compose(&self, other: &JonesMatrix) -> JonesMatrix {
        assert_eq!(self.basis, other.basis, "Jones matrices in different bases");
        JonesMatrix::new(self.matrix * other.matrix, self.basis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuellerMatrix(pub Matrix4<f64>);

impl MuellerMatrix {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn apply(&self, s: &StokesVector) -> StokesVector {
        StokesVector::from_vector(&(self.0 * s.as_vector()))
    }

    pub fn compose(&self, other: &MuellerMatrix) -> MuellerMatrix {
        MuellerMatrix(self.0 * other.0)
    }
}

/// `T_{L→C}`: maps linear (x, y) Jones components to (LCP, RCP).
pub fn linear_to_circular_matrix() -> Matrix2<Complex64> {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Matrix2::new(s, -J * s, s, J * s)
}

pub fn stokes_from_jones(j: &JonesVector) -> StokesVector {
    let lin = j.to_linear();
    let (ex, ey) = (lin.first(), lin.second());
    let cross = ex * ey.conj();
    StokesVector::new(
        ex.norm_sqr() + ey.norm_sqr(),
        ex.norm_sqr() - ey.norm_sqr(),
        2.0 * cross.re,
        -2.0 * cross.im,
    )
}

/// Inverse of [`stokes_from_jones`] for fully polarized light, up to global phase.
pub fn jones_from_stokes(s: &StokesVector) -> Result<JonesVector> {
    let finite = [s.s0, s.s1, s.s2, s.s3].iter().all(|v| v.is_finite());
    if !finite || s.s0 < 0.0 || !s.is_fully_polarized() {
        return Err(Error::NotFullyPolarized {
            dop: s.degree_of_polarization(),
        });
    }
    let ex_mag = (0.5 * (s.s0 + s.s1)).max(0.0).sqrt();
    let ey_mag = (0.5 * (s.s0 - s.s1)).max(0.0).sqrt();
    if ex_mag < 1e-12 {
        return Ok(JonesVector::linear(
            Complex64::new(0.0, 0.0),
            Complex64::new(ey_mag, 0.0),
        ));
    }
    // Ex real, so arg(Ey) = -arg(Ex Ey*) = arg(s2 + j s3).
    let phase = if s.s2 == 0.0 && s.s3 == 0.0 {
        0.0
    } else {
        s.s3.atan2(s.s2)
    };
    Ok(JonesVector::linear(
        Complex64::new(ex_mag, 0.0),
        Complex64::from_polar(ey_mag, phase),
    ))
}

pub fn linear_to_circular(j: &JonesVector) -> JonesVector {
    let lin = j.to_linear();
    JonesVector {
        components: linear_to_circular_matrix() * lin.components,
        basis: Basis::Circular,
    }
}

/// Linear polarizer at angle `theta` in the (x, y) basis.
pub fn polarizer_jones(theta: f64) -> JonesMatrix {
    let (s, c) = theta.sin_cos();
    let m = Matrix2::new(c * c, c * s, c * s, s * s).map(|v| Complex64::new(v, 0.0));
    JonesMatrix::new(m, Basis::Linear)
}

/// The same polarizer expressed in the (LCP, RCP) basis.
pub fn polarizer_circular(theta: f64) -> JonesMatrix {
    let half = Complex64::new(0.5, 0.0);
    let m = Matrix2::new(
        half,
        half * Complex64::from_polar(1.0, -2.0 * theta),
        half * Complex64::from_polar(1.0, 2.0 * theta),
        half,
    );
    JonesMatrix::new(m, Basis::Circular)
}

fn jones_to_mueller_transform() -> (Matrix4<Complex64>, Matrix4<Complex64>) {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let t = Matrix4::new(
        l, o, o, l, //
        l, o, o, -l, //
        o, l, l, o, //
        o, J, -J, o,
    );
    let h = Complex64::new(0.5, 0.0);
    let t_inv = Matrix4::new(
        h, h, o, o, //
        o, o, h, -J * h, //
        o, o, h, J * h, //
        h, -h, o, o,
    );
    (t, t_inv)
}

fn kron_conj(j: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    let jc = j.map(|c| c.conj());
    Matrix4::from_fn(|r, c| j[(r / 2, c / 2)] * jc[(r % 2, c % 2)])
}

/// Müller matrix of a (non-depolarizing) Jones element given in the linear basis.
pub fn mueller_from_jones(j: &JonesMatrix) -> MuellerMatrix {
    let lin = match j.basis {
        Basis::Linear => j.matrix,
        Basis::Circular => {
            let t = linear_to_circular_matrix();
            t.adjoint() * j.matrix * t
        }
    };
    let (t, t_inv) = jones_to_mueller_transform();
    let m = t * kron_conj(&lin) * t_inv;
    let scale = lin.iter().map(|c| c.norm_sqr()).fold(1.0, f64::max);
    debug_assert!(
        m.iter().all(|c| c.im.abs() <= MUELLER_IMAG_TOL * scale),
        "Müller matrix has imaginary residue"
    );
    MuellerMatrix(m.map(|c| c.re))
}

/// Closed-form Müller matrix of a linear polarizer at angle `theta`.
pub fn polarizer_mueller(theta: f64) -> MuellerMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    MuellerMatrix(
        Matrix4::new(
            1.0, c, s, 0.0, //
            c, c * c, s * c, 0.0, //
            s, s * c, s * s, 0.0, //
            0.0, 0.0, 0.0, 0.0,
        ) * 0.5,
    )
}
