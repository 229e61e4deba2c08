//! Algebra of symmetric traceless 3x3 tensors in the orthonormal F-basis.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

const ISQ2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const SQ2: f64 = std::f64::consts::SQRT_2;
const ISQ6: f64 = 0.408_248_290_463_863_f64;
const SQ3_2: f64 = 1.224_744_871_391_589_f64;
pub(crate) const SQ2_3: f64 = 0.816_496_580_927_726_f64;

pub const E1: Vec3 = [1.0, 0.0, 0.0];
pub const E2: Vec3 = [0.0, 1.0, 0.0];
pub const E3: Vec3 = [0.0, 0.0, 1.0];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn scale(s: f64, a: &Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn normalize(a: &Vec3) -> Vec3 {
    scale(1.0 / norm(a), a)
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&a[0], v), dot(&a[1], v), dot(&a[2], v)]
}

pub fn det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn frob(a: &Mat3, b: &Mat3) -> f64 {
    (0..3).map(|i| dot(&a[i], &b[i])).sum()
}

/// A tensor Q = sum_j q_j F_j.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QVec(pub [f64; 5]);

impl QVec {
    pub const ZERO: QVec = QVec([0.0; 5]);

    pub fn to_matrix(&self) -> Mat3 {
        let [q1, q2, q3, q4, q5] = self.0;
        let d3 = q3 * ISQ6;
        [
            [q1 * ISQ2 - d3, q2 * ISQ2, q4 * ISQ2],
            [q2 * ISQ2, -q1 * ISQ2 - d3, q5 * ISQ2],
            [q4 * ISQ2, q5 * ISQ2, 2.0 * d3],
        ]
    }

    /// Projection of an arbitrary matrix onto the symmetric traceless subspace.
    pub fn from_matrix(m: &Mat3) -> QVec {
        let tr = m[0][0] + m[1][1] + m[2][2];
        QVec([
            (m[0][0] - m[1][1]) * ISQ2,
            (m[0][1] + m[1][0]) * ISQ2,
            SQ3_2 * (m[2][2] - tr / 3.0),
            (m[0][2] + m[2][0]) * ISQ2,
            (m[1][2] + m[2][1]) * ISQ2,
        ])
    }

    pub fn dot(&self, other: &QVec) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn tr_cube(&self) -> f64 {
        3.0 * det(&self.to_matrix())
    }

    /// R Q R^t.
    pub fn rotated(&self, r: &Mat3) -> QVec {
        let m = self.to_matrix();
        QVec::from_matrix(&mat_mul(&mat_mul(r, &m), &transpose(r)))
    }
}

impl Add for QVec {
    type Output = QVec;
    fn add(mut self, o: QVec) -> QVec {
        self += o;
        self
    }
}

impl AddAssign for QVec {
    fn add_assign(&mut self, o: QVec) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
    }
}

impl Sub for QVec {
    type Output = QVec;
    fn sub(mut self, o: QVec) -> QVec {
        self -= o;
        self
    }
}

impl SubAssign for QVec {
    fn sub_assign(&mut self, o: QVec) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a -= b;
        }
    }
}

impl Mul<QVec> for f64 {
    type Output = QVec;
    fn mul(self, q: QVec) -> QVec {
        QVec(q.0.map(|x| self * x))
    }
}

impl Neg for QVec {
    type Output = QVec;
    fn neg(self) -> QVec {
        QVec(self.0.map(|x| -x))
    }
}

pub fn basis_tensor(j: usize) -> Result<Mat3> {
    if !(1..=5).contains(&j) {
        return Err(Error::BasisIndex(j));
    }
    let mut q = [0.0; 5];
    q[j - 1] = 1.0;
    Ok(QVec(q).to_matrix())
}

/// Bulk coefficients a^2, b^2, c^2 and the elastic length eps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub eps: f64,
}

impl MaterialParams {
    pub fn new(a2: f64, b2: f64, c2: f64, eps: f64) -> Result<Self> {
        let p = MaterialParams { a2, b2, c2, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a2, self.b2, self.c2, self.eps].iter().all(|x| x.is_finite());
        if !finite || self.a2 < 0.0 || self.b2 < 0.0 {
            return Err(Error::InvalidParams(format!("a2, b2 must be finite and >= 0 (got {self:?})")));
        }
        if self.c2 <= 0.0 || self.eps <= 0.0 {
            return Err(Error::InvalidParams(format!("c2 and eps must be > 0 (got {self:?})")));
        }
        Ok(())
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        MaterialParams { eps, ..*self }
    }

    pub fn s_plus(&self) -> f64 {
        (self.b2 + (self.b2 * self.b2 + 24.0 * self.a2 * self.c2).sqrt()) / (4.0 * self.c2)
    }

    pub fn mu(&self) -> f64 {
        self.b2 * self.s_plus()
    }

    pub fn nu(&self) -> f64 {
        self.b2 * self.s_plus() / 3.0 + 2.0 * self.a2
    }

    /// Minimum value of the unshifted bulk potential.
    pub fn f_star(&self) -> f64 {
        let s = self.s_plus();
        -self.a2 * s * s / 3.0 - 2.0 * self.b2 * s * s * s / 27.0 + self.c2 * s.powi(4) / 9.0
    }
}

/// Shifted bulk potential, zero on the limit manifold.
pub fn bulk_potential(q: &QVec, p: &MaterialParams) -> f64 {
    // Expanded about |Q|^2 = 2s^2/3, tr Q^3 = 2s^3/9 to avoid cancelling O(1) terms.
    let s = p.s_plus();
    let dx = q.norm_sq() - 2.0 * s * s / 3.0;
    let dt = q.tr_cube() - 2.0 * s * s * s / 9.0;
    p.b2 / 6.0 * (s * dx - 2.0 * dt) + 0.25 * p.c2 * dx * dx
}

pub fn bulk_gradient(q: &QVec, p: &MaterialParams) -> QVec {
    let m = q.to_matrix();
    let m2 = mat_mul(&m, &m);
    let x = q.norm_sq();
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = (p.c2 * x - p.a2) * m[i][j] - p.b2 * m2[i][j];
        }
    }
    QVec::from_matrix(&g)
}

/// Coefficients c_0..c_4 of t -> f(q + t d).
pub fn bulk_line_coeffs(q: &QVec, d: &QVec, p: &MaterialParams) -> [f64; 5] {
    let mq = q.to_matrix();
    let md = d.to_matrix();
    let q2 = mat_mul(&mq, &mq);
    let d2 = mat_mul(&md, &md);
    let a = q.norm_sq();
    let b = q.dot(d);
    let c = d.norm_sq();
    let t1 = frob(&q2, &md);
    let t2 = frob(&mq, &d2);
    let t3 = 3.0 * det(&md);
    [
        bulk_potential(q, p),
        (p.c2 * a - p.a2) * b - p.b2 * t1,
        -0.5 * p.a2 * c - p.b2 * t2 + 0.25 * p.c2 * (4.0 * b * b + 2.0 * a * c),
        -p.b2 * t3 / 3.0 + p.c2 * b * c,
        0.25 * p.c2 * c * c,
    ]
}

/// Eigenvalues sorted descending with matching orthonormal eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

const TIE_TOL: f64 = 1e-10;

fn null_vector(m: &Mat3, lambda: f64) -> Vec3 {
    let r0 = [m[0][0] - lambda, m[0][1], m[0][2]];
    let r1 = [m[1][0], m[1][1] - lambda, m[1][2]];
    let r2 = [m[2][0], m[2][1], m[2][2] - lambda];
    let cands = [cross(&r0, &r1), cross(&r1, &r2), cross(&r2, &r0)];
    let best = cands
        .iter()
        .max_by(|a, b| dot(a, a).total_cmp(&dot(b, b)))
        .copied()
        .unwrap_or(E3);
    normalize(&best)
}

// First of (e3, e1, e2) with a usable component orthogonal to `v`.
fn gram_schmidt_seed(v: &Vec3) -> Vec3 {
    for e in [E3, E1, E2] {
        let w = sub(&e, &scale(dot(&e, v), v));
        if norm(&w) > 1e-6 {
            return normalize(&w);
        }
    }
    unreachable!("three basis vectors cannot all be parallel to a unit vector")
}

// Orthonormal eigenpair of M restricted to the plane orthogonal to `v`,
// larger eigenvalue first.
fn plane_pair(m: &Mat3, v: &Vec3) -> (Vec3, Vec3) {
    let u = gram_schmidt_seed(v);
    let w = cross(v, &u);
    let mu = mat_vec(m, &u);
    let mw = mat_vec(m, &w);
    let (a, b, c) = (dot(&u, &mu), dot(&u, &mw), dot(&w, &mw));
    if (a - c).hypot(2.0 * b) < TIE_TOL {
        return (u, w);
    }
    let th = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = th.sin_cos();
    let x = add(&scale(co, &u), &scale(s, &w));
    let y = add(&scale(-s, &u), &scale(co, &w));
    (x, y)
}

pub fn eigendecompose(q: &QVec) -> EigenSystem {
    let m = q.to_matrix();
    let x = q.norm_sq();
    let scale_q = x.sqrt().max(1.0);
    if x.sqrt() < TIE_TOL {
        return EigenSystem { values: [0.0; 3], vectors: [E3, E1, E2] };
    }
    // Characteristic polynomial of a traceless matrix: l^3 - p l - r.
    let p = 0.5 * x;
    let r = det(&m);
    let k = (p / 3.0).sqrt();
    let cos3 = (r / (2.0 * k * k * k)).clamp(-1.0, 1.0);
    let th = cos3.acos() / 3.0;
    let tau = 2.0 * std::f64::consts::PI / 3.0;
    let mut l = [2.0 * k * th.cos(), 2.0 * k * (th - tau).cos(), 2.0 * k * (th + tau).cos()];
    for li in l.iter_mut() {
        let dp = 3.0 * *li * *li - p;
        if dp.abs() > 1e-8 * p {
            *li -= (*li * *li * *li - p * *li - r) / dp;
        }
    }
    let gap_top = l[0] - l[1];
    let gap_bot = l[1] - l[2];
    let tol = TIE_TOL * scale_q;
    let (v0, v1, v2);
    if gap_top >= gap_bot {
        v0 = null_vector(&m, l[0]);
        let (a, b) = if gap_bot < tol {
            let a = gram_schmidt_seed(&v0);
            (a, cross(&v0, &a))
        } else {
            plane_pair(&m, &v0)
        };
        v1 = a;
        v2 = b;
    } else {
        let bottom = null_vector(&m, l[2]);
        let (a, b) = if gap_top < tol {
            let a = gram_schmidt_seed(&bottom);
            (a, cross(&bottom, &a))
        } else {
            plane_pair(&m, &bottom)
        };
        v0 = a;
        v1 = b;
        v2 = bottom;
    }
    let rq = |v: &Vec3| dot(v, &mat_vec(&m, v));
    let mut values = [rq(&v0), rq(&v1), rq(&v2)];
    let mut vectors = [v0, v1, v2];
    // Rayleigh quotients can swap a near-tie; keep the descending contract.
    for i in 0..2 {
        for j in 0..2 - i {
            if values[j] < values[j + 1] {
                values.swap(j, j + 1);
                vectors.swap(j, j + 1);
            }
        }
    }
    EigenSystem { values, vectors }
}

pub fn principal_eigenvector(q: &QVec, reference: &Vec3) -> Result<Vec3> {
    let es = eigendecompose(q);
    let gap = es.values[0] - es.values[1];
    if gap < TIE_TOL {
        return Err(Error::DegenerateSpectrum { gap, node: None });
    }
    let v = es.vectors[0];
    let d = dot(&v, reference);
    if d.abs() < 1e-8 {
        return Err(Error::OrthogonalReference);
    }
    Ok(if d > 0.0 { v } else { scale(-1.0, &v) })
}

pub fn biaxiality_gap(q: &QVec) -> f64 {
    let es = eigendecompose(q);
    (es.values[1] - es.values[2]).abs()
}

/// The rotation taking e3 to n about an axis orthogonal to e3.
pub fn rotation_to(n: &Vec3) -> Result<Mat3> {
    let c = 1.0 + n[2];
    if c < 1e-8 {
        return Err(Error::AntipodalSingularity(c));
    }
    Ok(rotation_unchecked(n))
}

pub(crate) fn rotation_unchecked(n: &Vec3) -> Mat3 {
    // I + [k]x + [k]x^2 / (1 + n3) with k = e3 x n = (-n2, n1, 0).
    let (k1, k2) = (-n[1], n[0]);
    let f = 1.0 / (1.0 + n[2]);
    [
        [1.0 - f * k2 * k2, f * k1 * k2, k2],
        [f * k1 * k2, 1.0 - f * k1 * k1, -k1],
        [-k2, k1, 1.0 - f * (k1 * k1 + k2 * k2)],
    ]
}

pub fn uniaxial_from_director(n: &Vec3, s: f64) -> Result<QVec> {
    let len = norm(n);
    if (len - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(len));
    }
    Ok(uniaxial(n, s))
}

/// s (n n - I/3) without the unit-length check.
#[inline]
pub fn uniaxial(n: &Vec3, s: f64) -> QVec {
    QVec([
        s * (n[0] * n[0] - n[1] * n[1]) * ISQ2,
        s * SQ2 * n[0] * n[1],
        s * SQ3_2 * (n[2] * n[2] - 1.0 / 3.0),
        s * SQ2 * n[0] * n[2],
        s * SQ2 * n[1] * n[2],
    ])
}

/// V_rho = rho_1 F1 + rho_2 F2 + rho_3 F3.
pub fn v_rho(rho: &Vec3) -> QVec {
    QVec([rho[0], rho[1], rho[2], 0.0, 0.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> MaterialParams {
        MaterialParams::new(1.0, 1.0, 1.0, 0.1).unwrap()
    }

    fn arb_q() -> impl Strategy<Value = QVec> {
        prop::array::uniform5(-2.0f64..2.0).prop_map(QVec)
    }

    fn arb_unit() -> impl Strategy<Value = Vec3> {
        (0.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(u, phi)| {
            let z = 2.0 * u - 1.0;
            let r = (1.0 - z * z).sqrt();
            [r * phi.cos(), r * phi.sin(), z]
        })
    }

    // Rotation from a unit quaternion; independent of rotation_to.
    fn quat_rotation(q: [f64; 4]) -> Mat3 {
        let l = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let [w, x, y, z] = q.map(|c| c / l);
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    fn mat_close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| (a[i][j] - b[i][j]).abs() <= tol))
    }

    // Unshifted bulk energy written directly from the de Gennes form.
    fn bulk_oracle(q: &QVec, p: &MaterialParams) -> f64 {
        let m = q.to_matrix();
        let tr2 = frob(&m, &m);
        let tr3 = frob(&mat_mul(&m, &m), &m);
        -0.5 * p.a2 * tr2 - p.b2 * tr3 / 3.0 + 0.25 * p.c2 * tr2 * tr2 - p.f_star()
    }

    #[test]
    fn basis_is_orthonormal_and_matches_definitions() {
        for i in 1..=5 {
            for j in 1..=5 {
                let fij = frob(&basis_tensor(i).unwrap(), &basis_tensor(j).unwrap());
                assert!((fij - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        let f3 = basis_tensor(3).unwrap();
        let d = 1.0 / 6f64.sqrt();
        assert!(mat_close(&f3, &[[-d, 0.0, 0.0], [0.0, -d, 0.0], [0.0, 0.0, 2.0 * d]], 1e-15));
        let f1 = basis_tensor(1).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!(mat_close(&f1, &[[h, 0.0, 0.0], [0.0, -h, 0.0], [0.0, 0.0, 0.0]], 1e-15));
        assert!(matches!(basis_tensor(0), Err(Error::BasisIndex(0))));
        assert!(matches!(basis_tensor(6), Err(Error::BasisIndex(6))));
    }

    #[test]
    fn s_plus_closed_form_values() {
        assert!((unit().s_plus() - 1.5).abs() < 1e-15);
        let b0 = MaterialParams::new(1.0, 0.0, 1.0, 0.1).unwrap();
        assert!((b0.s_plus() - 6f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((2.0 / 3.0 * b0.s_plus().powi(2) - 1.0).abs() < 1e-14);
        let a0 = MaterialParams::new(0.0, 1.0, 1.0, 0.1).unwrap();
        assert!((a0.s_plus() - 0.5).abs() < 1e-15);
        let p = unit();
        assert_eq!((p.mu(), p.nu()), (1.5, 2.5));
    }

    #[test]
    fn params_validation() {
        assert!(MaterialParams::new(1.0, 1.0, 0.0, 0.1).is_err());
        assert!(MaterialParams::new(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(MaterialParams::new(-1.0, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn bulk_value_at_isotropic_state() {
        assert!((bulk_potential(&QVec::ZERO, &unit()) - 0.4375).abs() < 1e-15);
        assert!(bulk_gradient(&QVec::ZERO, &unit()).norm() == 0.0);
    }

    #[test]
    fn eigen_examples() {
        let p = unit();
        let es = eigendecompose(&uniaxial(&E3, p.s_plus()));
        let expect = [1.0, -0.5, -0.5];
        for k in 0..3 {
            assert!((es.values[k] - expect[k]).abs() < 1e-14);
        }
        assert!((es.vectors[0][2].abs() - 1.0).abs() < 1e-14);
        // degenerate pair follows Gram-Schmidt against (e3, e1, e2): e1 then e2
        assert!((es.vectors[1][0].abs() - 1.0).abs() < 1e-14);
        let f1 = eigendecompose(&QVec([1.0, 0.0, 0.0, 0.0, 0.0]));
        let h = 1.0 / 2f64.sqrt();
        for (v, e) in f1.values.iter().zip([h, 0.0, -h]) {
            assert!((v - e).abs() < 1e-15);
        }
        assert!((biaxiality_gap(&QVec([1.0, 0.0, 0.0, 0.0, 0.0])) - h).abs() < 1e-15);
        let z = eigendecompose(&QVec::ZERO);
        assert_eq!(z.vectors, [E3, E1, E2]);
    }

    #[test]
    fn principal_vector_sign_and_errors() {
        let n = normalize(&[0.3, -0.5, 0.8]);
        let q = uniaxial(&n, 1.5);
        let v = principal_eigenvector(&q, &n).unwrap();
        assert!(norm(&sub(&v, &n)) < 1e-13);
        let w = principal_eigenvector(&q, &scale(-1.0, &n)).unwrap();
        assert!(norm(&add(&w, &n)) < 1e-13);
        let oblate = uniaxial(&E3, -1.0);
        assert!(matches!(principal_eigenvector(&oblate, &E1), Err(Error::DegenerateSpectrum { .. })));
        let perp = cross(&n, &E1);
        assert!(matches!(principal_eigenvector(&q, &normalize(&perp)), Err(Error::OrthogonalReference)));
    }

    #[test]
    fn perturbed_principal_vector_and_gap() {
        let n = normalize(&[0.2, 0.4, 0.9]);
        let r = rotation_to(&n).unwrap();
        let pv = mat_vec(&r, &E1);
        let qv = mat_vec(&r, &E2);
        let delta = 1e-3;
        let mut pq = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                pq[i][j] = delta * (pv[i] * pv[j] - qv[i] * qv[j]);
            }
        }
        let q = uniaxial(&n, 1.5) + QVec::from_matrix(&pq);
        let v = principal_eigenvector(&q, &n).unwrap();
        assert!(norm(&sub(&v, &n)) < 1e-2);
        assert!((biaxiality_gap(&q) - 2.0 * delta).abs() < 1e-13);
    }

    #[test]
    fn rotation_examples() {
        assert!(mat_close(&rotation_to(&E3).unwrap(), &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], 0.0));
        let r = rotation_to(&E1).unwrap();
        assert!(mat_close(&r, &[[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]], 1e-15));
        assert!(matches!(rotation_to(&[0.0, 0.0, -1.0]), Err(Error::AntipodalSingularity(_))));
    }

    #[test]
    fn uniaxial_examples() {
        let q = uniaxial_from_director(&E3, 1.5).unwrap();
        let expect = [0.0, 0.0, (2f64 / 3.0).sqrt() * 1.5, 0.0, 0.0];
        for k in 0..5 {
            assert!((q.0[k] - expect[k]).abs() < 1e-15);
        }
        let phi = 0.7f64;
        let q = uniaxial(&[phi.cos(), phi.sin(), 0.0], 2.0);
        let c = 2.0 / 2f64.sqrt();
        let expect = [c * (2.0 * phi).cos(), c * (2.0 * phi).sin(), -c / 3f64.sqrt(), 0.0, 0.0];
        for k in 0..5 {
            assert!((q.0[k] - expect[k]).abs() < 1e-15);
        }
        assert!(matches!(uniaxial_from_director(&[1.0, 1.0, 0.0], 1.0), Err(Error::NotUnit(_))));
    }

    #[test]
    fn line_coefficients_reproduce_potential() {
        let p = MaterialParams::new(0.7, 1.3, 0.9, 0.1).unwrap();
        let q = QVec([0.3, -0.2, 0.9, 0.1, 0.4]);
        let d = QVec([-0.5, 0.1, 0.2, 0.7, -0.3]);
        let c = bulk_line_coeffs(&q, &d, &p);
        for t in [-1.3, 0.0, 0.4, 2.0] {
            let poly = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])));
            assert!((poly - bulk_potential(&(q + t * d), &p)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn matrix_round_trip(q in arb_q()) {
            let m = q.to_matrix();
            prop_assert!((m[0][0] + m[1][1] + m[2][2]).abs() < 1e-14);
            prop_assert!((0..3).all(|i| (0..3).all(|j| m[i][j] == m[j][i])));
            let back = QVec::from_matrix(&m);
            prop_assert!((back - q).norm() < 1e-14);
            prop_assert!((frob(&m, &m) - q.norm_sq()).abs() < 1e-13);
        }

        #[test]
        fn potential_matches_de_gennes_form(q in arb_q(), a2 in 0.0f64..2.0, b2 in 0.0f64..2.0, c2 in 0.1f64..2.0) {
            let p = MaterialParams::new(a2, b2, c2, 1.0).unwrap();
            let f = bulk_potential(&q, &p);
            prop_assert!((f - bulk_oracle(&q, &p)).abs() < 1e-11 * (1.0 + f.abs()));
            prop_assert!(f >= -1e-12);
        }

        #[test]
        fn potential_rotation_invariant(q in arb_q(), quat in prop::array::uniform4(-1.0f64..1.0)) {
            prop_assume!(quat.iter().map(|x| x * x).sum::<f64>() > 0.01);
            let p = unit();
            let r = quat_rotation(quat);
            let f = bulk_potential(&q, &p);
            prop_assert!((bulk_potential(&q.rotated(&r), &p) - f).abs() < 1e-12 * (1.0 + f.abs()));
        }

        #[test]
        fn potential_zero_only_on_prolate_manifold(n in arb_unit(), q in arb_q()) {
            let p = unit();
            let s = p.s_plus();
            prop_assert!(bulk_potential(&uniaxial(&n, s), &p).abs() < 1e-14);
            prop_assert!(bulk_gradient(&uniaxial(&n, s), &p).norm() < 1e-12);
            if bulk_potential(&q, &p) < 1e-12 {
                let es = eigendecompose(&q);
                prop_assert!((es.values[0] - 2.0 * s / 3.0).abs() < 1e-5);
            }
        }

        #[test]
        fn gradient_matches_finite_differences(q in arb_q(), a2 in 0.0f64..2.0, b2 in 0.0f64..2.0, c2 in 0.1f64..2.0) {
            let p = MaterialParams::new(a2, b2, c2, 1.0).unwrap();
            let g = bulk_gradient(&q, &p);
            let step = 1e-6;
            for j in 0..5 {
                let mut e = [0.0; 5];
                e[j] = step;
                let fd = (bulk_oracle(&(q + QVec(e)), &p) - bulk_oracle(&(q - QVec(e)), &p)) / (2.0 * step);
                prop_assert!((fd - g.0[j]).abs() <= 1e-6 * g.norm().max(1.0), "j={} fd={} g={}", j, fd, g.0[j]);
            }
        }

        #[test]
        fn eigendecomposition_contract(q in arb_q()) {
            let es = eigendecompose(&q);
            prop_assert!(es.values[0] >= es.values[1] && es.values[1] >= es.values[2]);
            prop_assert!(es.values.iter().sum::<f64>().abs() < 1e-13);
            let mut rec = [[0.0; 3]; 3];
            for k in 0..3 {
                let v = es.vectors[k];
                for i in 0..3 {
                    for j in 0..3 {
                        rec[i][j] += es.values[k] * v[i] * v[j];
                    }
                    prop_assert!((dot(&v, &es.vectors[(k + 1) % 3])).abs() < 1e-13);
                }
                prop_assert!((norm(&v) - 1.0).abs() < 1e-14);
            }
            let m = q.to_matrix();
            let err = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| (rec[i][j] - m[i][j]).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-12 * q.norm().max(1.0), "err {}", err);
        }

        #[test]
        fn rotation_is_proper(n in arb_unit()) {
            prop_assume!(n[2] > -0.99);
            let r = rotation_to(&n).unwrap();
            prop_assert!(norm(&sub(&mat_vec(&r, &E3), &n)) < 1e-14);
            prop_assert!((det(&r) - 1.0).abs() < 1e-13);
            let rtr = mat_mul(&transpose(&r), &r);
            prop_assert!(mat_close(&rtr, &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], 1e-13));
            // axis orthogonal to e3: e3 x n is fixed
            let k = cross(&E3, &n);
            prop_assert!(norm(&sub(&mat_vec(&r, &k), &k)) < 1e-13);
        }

        #[test]
        fn uniaxial_norm_and_gap(n in arb_unit(), s in 0.01f64..3.0) {
            let q = uniaxial(&n, s);
            prop_assert!((q.norm_sq() - 2.0 / 3.0 * s * s).abs() < 1e-13);
            prop_assert!(biaxiality_gap(&q) < 1e-12 * s.max(1.0));
        }
    }
}
