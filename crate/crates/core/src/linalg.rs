//! Fixed-size complex and real 3-vector helpers.
//!
//! Dot products follow the bilinear convention `x . y = y^T x`; the
//! Hermitian product is `hdot(x, y) = x . conj(y)`.

use num_complex::Complex64;

pub type C64 = Complex64;
pub type CVec3 = [C64; 3];
pub type RVec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const CZERO: CVec3 = [C64::new(0.0, 0.0); 3];
pub const I: C64 = C64::new(0.0, 1.0);

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Rotation generator about e3: `J z = e3 x z`.
pub const J: Mat3 = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];

#[inline]
pub fn cdot(x: &CVec3, y: &CVec3) -> C64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

#[inline]
pub fn cdot_r(x: &CVec3, y: &RVec3) -> C64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

#[inline]
pub fn hdot(x: &CVec3, y: &CVec3) -> C64 {
    x[0] * y[0].conj() + x[1] * y[1].conj() + x[2] * y[2].conj()
}

#[inline]
pub fn rdot(x: &RVec3, y: &RVec3) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

#[inline]
pub fn norm_sq(x: &CVec3) -> f64 {
    x[0].norm_sqr() + x[1].norm_sqr() + x[2].norm_sqr()
}

#[inline]
pub fn max_abs(x: &CVec3) -> f64 {
    x.iter().fold(0.0f64, |m, c| m.max(c.norm()))
}

#[inline]
pub fn is_zero(x: &CVec3) -> bool {
    x.iter().all(|c| c.re == 0.0 && c.im == 0.0)
}

#[inline]
pub fn conj(x: &CVec3) -> CVec3 {
    [x[0].conj(), x[1].conj(), x[2].conj()]
}

#[inline]
pub fn add(x: &CVec3, y: &CVec3) -> CVec3 {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2]]
}

#[inline]
pub fn sub(x: &CVec3, y: &CVec3) -> CVec3 {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

#[inline]
pub fn scale(x: &CVec3, s: C64) -> CVec3 {
    [x[0] * s, x[1] * s, x[2] * s]
}

#[inline]
pub fn scale_r(x: &CVec3, s: f64) -> CVec3 {
    [x[0] * s, x[1] * s, x[2] * s]
}

#[inline]
pub fn add_assign(x: &mut CVec3, y: &CVec3) {
    x[0] += y[0];
    x[1] += y[1];
    x[2] += y[2];
}

#[inline]
pub fn axpy(x: &mut CVec3, a: C64, y: &CVec3) {
    x[0] += a * y[0];
    x[1] += a * y[1];
    x[2] += a * y[2];
}

#[inline]
pub fn cross_rc(a: &RVec3, z: &CVec3) -> CVec3 {
    [
        z[2] * a[1] - z[1] * a[2],
        z[0] * a[2] - z[2] * a[0],
        z[1] * a[0] - z[0] * a[1],
    ]
}

#[inline]
pub fn rcross(a: &RVec3, b: &RVec3) -> RVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn mat_cvec(m: &Mat3, z: &CVec3) -> CVec3 {
    [
        z[0] * m[0][0] + z[1] * m[0][1] + z[2] * m[0][2],
        z[0] * m[1][0] + z[1] * m[1][1] + z[2] * m[1][2],
        z[0] * m[2][0] + z[1] * m[2][1] + z[2] * m[2][2],
    ]
}

#[inline]
pub fn mat_rvec(m: &Mat3, z: &RVec3) -> RVec3 {
    [
        m[0][0] * z[0] + m[0][1] * z[1] + m[0][2] * z[2],
        m[1][0] * z[0] + m[1][1] * z[1] + m[1][2] * z[2],
        m[2][0] * z[0] + m[2][1] * z[1] + m[2][2] * z[2],
    ]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = (0..3).map(|l| a[i][l] * b[l][j]).sum();
        }
    }
    out
}

pub fn mat_sub(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] -= b[i][j];
        }
    }
    out
}

pub fn mat_max_abs(a: &Mat3) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn real_part(z: &CVec3) -> RVec3 {
    [z[0].re, z[1].re, z[2].re]
}

pub fn imag_part(z: &CVec3) -> RVec3 {
    [z[0].im, z[1].im, z[2].im]
}

pub fn from_parts(re: &RVec3, im: &RVec3) -> CVec3 {
    [
        C64::new(re[0], im[0]),
        C64::new(re[1], im[1]),
        C64::new(re[2], im[2]),
    ]
}
