//! Stack-allocated 3-vectors and 3x3 matrices.
//!
//! Hand-rolled rather than pulled from a linear algebra crate: every hot
//! loop in the mobility operators runs over these, and keeping the types
//! `Copy` with a fixed evaluation order makes the parallel sums bitwise
//! reproducible.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        ZERO
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Outer product `self ⊗ other`.
    pub fn outer(self, other: Vec3) -> Mat3 {
        Mat3::from_rows(other * self.x, other * self.y, other * self.z)
    }

    /// In-plane rotation by 90 degrees: (x, y, z) -> (-y, x, z-component dropped).
    pub fn perp_xy(self) -> Vec3 {
        Vec3::new(-self.y, self.x, 0.0)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub fn zero() -> Self {
        Mat3 { m: [[0.0; 3]; 3] }
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; 3]; 3];
        m[0][0] = 1.0;
        m[1][1] = 1.0;
        m[2][2] = 1.0;
        Mat3 { m }
    }

    pub fn from_rows(r0: Vec3, r1: Vec3, r2: Vec3) -> Self {
        Mat3 {
            m: [r0.to_array(), r1.to_array(), r2.to_array()],
        }
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from_array(self.m[i])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3 {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = *self;
        for r in out.m.iter_mut() {
            for e in r.iter_mut() {
                *e *= s;
            }
        }
        out
    }

    pub fn add(&self, other: &Mat3) -> Mat3 {
        let mut out = *self;
        for (r, or) in out.m.iter_mut().zip(other.m.iter()) {
            for (e, oe) in r.iter_mut().zip(or.iter()) {
                *e += *oe;
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat3) -> Mat3 {
        self.add(&other.scale(-1.0))
    }

    pub fn frobenius(&self) -> f64 {
        self.m
            .iter()
            .flat_map(|r| r.iter())
            .map(|e| e * e)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flat_map(|r| r.iter()).all(|e| e.is_finite())
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.m[i][j] - self.m[j][i]).abs());
            }
        }
        worst
    }

    /// Eigenvalues of a symmetric matrix, ascending, by the trigonometric
    /// closed form (Smith's algorithm).
    pub fn sym_eigenvalues(&self) -> [f64; 3] {
        let a = &self.m;
        let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
        if p1 == 0.0 {
            let mut eig = [a[0][0], a[1][1], a[2][2]];
            eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return eig;
        }
        let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let mut b = *self;
        for i in 0..3 {
            b.m[i][i] -= q;
        }
        let b = b.scale(1.0 / p);
        // det(B)/2, clamped against roundoff
        let det = b.m[0][0] * (b.m[1][1] * b.m[2][2] - b.m[1][2] * b.m[2][1])
            - b.m[0][1] * (b.m[1][0] * b.m[2][2] - b.m[1][2] * b.m[2][0])
            + b.m[0][2] * (b.m[1][0] * b.m[2][1] - b.m[1][1] * b.m[2][0]);
        let r = (det / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        let mut eig = [e3, e2, e1];
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }

    /// Spectral norm (largest singular value) via eigenvalues of MᵀM.
    pub fn spectral_norm(&self) -> f64 {
        // (MᵀM)_{ij} = column_i · column_j
        let t = self.transpose();
        let c = [t.row(0), t.row(1), t.row(2)];
        let mut mtm = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                mtm.m[i][j] = c[i].dot(c[j]);
            }
        }
        let eig = mtm.sym_eigenvalues();
        eig[2].max(0.0).sqrt()
    }
}
