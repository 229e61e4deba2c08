//! Energy functionals on discrete fields and the first-order correction terms.
//!
//! Every quartic gradient quantity is built from the tangential edge tensor
//! M_T = P (1/2h^2) sum_j (n_j - n_k)(n_j - n_k)^t P with P = I - n n^t, and
//! |grad n|^2 is read as tr M_T, so the two forms of H_0 agree node by node.

use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::conformal::conformality_residual;
use crate::grid::stencil::{dirichlet_densities, dirichlet_energy, gradient_tensor};
use crate::grid::{DirectorField, DomainGrid, QField};
use crate::qtensor::{
    bulk_potential, mat_mul, rotation_to, transpose, uniaxial, v_rho, Mat3, MaterialParams, QVec, Vec3, SQ2_3,
};
use crate::{Error, Result};

const SQ6: f64 = 2.449_489_742_783_178;

/// Elastic, bulk and renormalized energies of a Q field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub bulk: f64,
    pub total: f64,
    /// (total - reference) / eps^2
    pub renormalized: f64,
    pub reference: f64,
}

impl EnergyBreakdown {
    pub fn relative_to(self, reference: f64, eps: f64) -> Self {
        EnergyBreakdown { reference, renormalized: (self.total - reference) / (eps * eps), ..self }
    }
}

/// mu, nu and the matrices of the transverse quadratic form around the limit manifold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkMatrices {
    pub mu: f64,
    pub nu: f64,
    pub b0: Mat3,
    pub b1: Mat3,
    pub b2: Mat3,
}

impl BulkMatrices {
    /// B_eps rho . rho with B_eps = B0 + eps^2 rho_3 B1 + eps^4 |rho|^2 B2.
    pub fn form(&self, rho: &Vec3, eps: f64) -> f64 {
        let quad = |m: &Mat3| (0..3).map(|i| (0..3).map(|j| m[i][j] * rho[i] * rho[j]).sum::<f64>()).sum::<f64>();
        let e2 = eps * eps;
        let r2 = rho[0] * rho[0] + rho[1] * rho[1] + rho[2] * rho[2];
        quad(&self.b0) + e2 * rho[2] * quad(&self.b1) + e2 * e2 * r2 * quad(&self.b2)
    }
}

fn diag(a: f64, b: f64, c: f64) -> Mat3 {
    [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]]
}

pub fn mu_nu_b0matrices(p: &MaterialParams) -> BulkMatrices {
    let s = p.s_plus();
    let (mu, nu) = (p.mu(), p.nu());
    let i1 = (8.0f64 / 3.0).sqrt() * s * p.c2;
    let j1 = SQ2_3 * p.b2;
    BulkMatrices {
        mu,
        nu,
        b0: diag(mu, mu, nu),
        b1: diag(i1 + j1, i1 + j1, i1 - j1 / 3.0),
        b2: diag(0.5 * p.c2, 0.5 * p.c2, 0.5 * p.c2),
    }
}

/// Tangential edge tensor M_T and tr M_T at an interior node.
pub fn tangential_gradient(n: &DirectorField, k: usize) -> (Mat3, f64) {
    let m = gradient_tensor(n.grid(), n.values(), k);
    let c = n.get(k);
    let mut proj = [[0.0; 3]; 3];
    for (i, row) in proj.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { 1.0 } else { 0.0 } - c[i] * c[j];
        }
    }
    let mt = mat_mul(&proj, &mat_mul(&m, &proj));
    let g = mt[0][0] + mt[1][1] + mt[2][2];
    (mt, g)
}

fn frob_sq(m: &Mat3) -> f64 {
    m.iter().flatten().map(|x| x * x).sum()
}

fn per_interior(n: &DirectorField, f: impl Fn(usize) -> f64) -> Vec<f64> {
    let grid = n.grid();
    let mut out = vec![0.0; grid.node_count()];
    for &k in grid.interior() {
        out[k] = f(k);
    }
    out
}

/// Integral of |grad n|^2 with the edge density.
pub fn dirichlet_integral(n: &DirectorField) -> f64 {
    2.0 * dirichlet_energy(n.grid(), n.values())
}

/// Integral of |grad n|^4.
pub fn quartic_integral(n: &DirectorField) -> f64 {
    let d = per_interior(n, |k| tangential_gradient(n, k).1.powi(2));
    n.grid().integrate(&d)
}

/// Integral of |grad n (x) grad n|^2.
pub fn tensor_quartic_integral(n: &DirectorField) -> f64 {
    let d = per_interior(n, |k| frob_sq(&tangential_gradient(n, k).0));
    n.grid().integrate(&d)
}

pub fn oseen_frank_energy(n: &DirectorField, p: &MaterialParams) -> f64 {
    let s = p.s_plus();
    s * s * dirichlet_integral(n)
}

pub fn ldg_energy(q: &QField, p: &MaterialParams) -> EnergyBreakdown {
    ldg_energy_values(q.grid(), q.values(), p)
}

pub(crate) fn ldg_energy_values(grid: &DomainGrid, values: &[QVec], p: &MaterialParams) -> EnergyBreakdown {
    let elastic = dirichlet_energy(grid, values);
    let mut dens = vec![0.0; grid.node_count()];
    for &k in grid.interior() {
        dens[k] = bulk_potential(&values[k], p);
    }
    let bulk = grid.integrate(&dens) / (p.eps * p.eps);
    let total = elastic + bulk;
    EnergyBreakdown { elastic, bulk, total, renormalized: total / (p.eps * p.eps), reference: 0.0 }
}

/// (R^t M R) : F1 and (R^t M R) : F2.
fn tangential_components(m: &Mat3, r: &Mat3) -> (f64, f64) {
    let mr = mat_mul(&transpose(r), &mat_mul(m, r));
    ((mr[0][0] - mr[1][1]) / std::f64::consts::SQRT_2, std::f64::consts::SQRT_2 * 0.5 * (mr[0][1] + mr[1][0]))
}

/// b_0 per node (zero off the interior).
pub fn b_field(n: &DirectorField, p: &MaterialParams) -> Result<Vec<Vec3>> {
    let s = p.s_plus();
    let grid = n.grid();
    let mut out = vec![[0.0; 3]; grid.node_count()];
    for &k in grid.interior() {
        let r = rotation_to(&n.get(k))?;
        let (m, g) = tangential_gradient(n, k);
        let (m1, m2) = tangential_components(&m, &r);
        out[k] = [-2.0 * s * m1, -2.0 * s * m2, SQ6 * s * g];
    }
    Ok(out)
}

fn check_b0(p: &MaterialParams) -> Result<BulkMatrices> {
    let bm = mu_nu_b0matrices(p);
    if bm.mu <= 0.0 || bm.nu <= 0.0 {
        return Err(Error::SingularB0);
    }
    Ok(bm)
}

/// rho_0 = -B0^{-1} b_0.
pub fn rho_star(n: &DirectorField, p: &MaterialParams) -> Result<Vec<Vec3>> {
    let bm = check_b0(p)?;
    let b = b_field(n, p)?;
    Ok(b.iter().map(|b| [-b[0] / bm.mu, -b[1] / bm.mu, -b[2] / bm.nu]).collect())
}

/// Integral of (1/2) B0 rho . rho + b_0 . rho.
pub fn h0_energy(n: &DirectorField, rho: &[Vec3], p: &MaterialParams) -> Result<f64> {
    if rho.len() != n.grid().node_count() {
        return Err(Error::GridMismatch(format!("{} rho values for {} nodes", rho.len(), n.grid().node_count())));
    }
    let bm = mu_nu_b0matrices(p);
    let b = b_field(n, p)?;
    let d = per_interior(n, |k| {
        let r = rho[k];
        0.5 * (bm.mu * (r[0] * r[0] + r[1] * r[1]) + bm.nu * r[2] * r[2]) + b[k][0] * r[0] + b[k][1] * r[1] + b[k][2] * r[2]
    });
    Ok(n.grid().integrate(&d))
}

/// Minimum of H_0 over rho without solving for rho.
pub fn h0_closed_form(n: &DirectorField, p: &MaterialParams) -> Result<f64> {
    let bm = check_b0(p)?;
    let s = p.s_plus();
    let (a, c) = (2.0 / bm.mu, 3.0 / bm.nu - 1.0 / bm.mu);
    let d = per_interior(n, |k| {
        let (m, g) = tangential_gradient(n, k);
        a * frob_sq(&m) + c * g * g
    });
    Ok(-s * s * n.grid().integrate(&d))
}

/// Largest |grad n|^2 over nodes at least `margin` from the boundary.
pub fn max_gradient_sq(n: &DirectorField, margin: f64) -> f64 {
    let grid = n.grid();
    let d = dirichlet_densities(grid, n.values());
    grid.interior_beyond(margin).iter().map(|&k| d[k]).fold(0.0, f64::max)
}

/// -(3/nu) int |grad n|^4, which equals H_0 / s+^2 for conformal fields.
pub fn w_ldg(n: &DirectorField, p: &MaterialParams) -> Result<f64> {
    let h = n.grid().h;
    let (_, residual) = conformality_residual(n, 3.0 * h);
    let threshold = 10.0 * h * h * max_gradient_sq(n, 3.0 * h);
    if residual > threshold {
        return Err(Error::NotConformal { residual, threshold });
    }
    Ok(w_ldg_unchecked(n, p))
}

pub fn w_ldg_unchecked(n: &DirectorField, p: &MaterialParams) -> f64 {
    -3.0 / p.nu() * quartic_integral(n)
}

/// How the interior correction is tapered towards the Dirichlet band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundaryBlend {
    None,
    /// Linear ramp over one grid spacing from the boundary.
    OneCell,
    /// Linear ramp over the given distance.
    Width(f64),
}

impl BoundaryBlend {
    fn factor(&self, dist: f64, h: f64) -> f64 {
        let w = match *self {
            BoundaryBlend::None => return 1.0,
            BoundaryBlend::OneCell => h,
            BoundaryBlend::Width(w) => w,
        };
        (dist / w).min(1.0)
    }
}

pub fn corrected_minimizer(n: &DirectorField, p: &MaterialParams) -> Result<QField> {
    corrected_minimizer_with(n, p, BoundaryBlend::OneCell)
}

/// Q[n] + eps^2 R_n V_rho0 R_n^t in the interior, Q[n_b] on the band.
pub fn corrected_minimizer_with(n: &DirectorField, p: &MaterialParams, blend: BoundaryBlend) -> Result<QField> {
    let rho = rho_star(n, p)?;
    let grid = n.grid();
    let s = p.s_plus();
    let e2 = p.eps * p.eps;
    let mut values = vec![QVec::ZERO; grid.node_count()];
    for &k in grid.band() {
        values[k] = uniaxial(&n.get(k), s);
    }
    for &k in grid.interior() {
        let nk = n.get(k);
        let r = rotation_to(&nk)?;
        let chi = blend.factor(grid.boundary_distance(k), grid.h);
        values[k] = uniaxial(&nk, s) + (e2 * chi) * v_rho(&rho[k]).rotated(&r);
    }
    QField::new(grid.clone(), values)
}

/// rho_0, the frame (n, p, q) and the coefficients of
/// P = c0 Q0 + c1 (p p - q q) + c2 (p q + q p).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrectionCoefficients {
    pub rho: Vec<Vec3>,
    /// From rho_0: c0 = rho_3 sqrt(3/2) / s+, c1 = rho_1 / sqrt 2, c2 = rho_2 / sqrt 2.
    pub c: Vec<[f64; 3]>,
    /// The closed-form coefficients as printed in the literature.
    pub c_printed: Vec<[f64; 3]>,
    pub frame: Vec<[Vec3; 3]>,
    /// L2 norm ratios |printed| / |derived| per coefficient (NaN when the derived one vanishes).
    pub printed_ratio: [f64; 3],
}

impl CorrectionCoefficients {
    /// R V_rho R^t rebuilt from (c0, c1, c2) and the frame.
    pub fn expansion(&self, k: usize, s: f64) -> Mat3 {
        let [n, pv, qv] = self.frame[k];
        let [c0, c1, c2] = self.c[k];
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let q0 = s * (n[i] * n[j] - if i == j { 1.0 / 3.0 } else { 0.0 });
                m[i][j] = c0 * q0 + c1 * (pv[i] * pv[j] - qv[i] * qv[j]) + c2 * (pv[i] * qv[j] + qv[i] * pv[j]);
            }
        }
        m
    }
}

pub fn biax_coefficients(n: &DirectorField, p: &MaterialParams) -> Result<CorrectionCoefficients> {
    let bm = check_b0(p)?;
    let rho = rho_star(n, p)?;
    let s = p.s_plus();
    let grid = n.grid();
    let total = grid.node_count();
    let mut c = vec![[0.0; 3]; total];
    let mut c_printed = vec![[0.0; 3]; total];
    let mut frame = vec![[[0.0; 3]; 3]; total];
    let sq2 = std::f64::consts::SQRT_2;
    for &k in grid.interior() {
        let nk = n.get(k);
        let r = rotation_to(&nk)?;
        let pv = [r[0][0], r[1][0], r[2][0]];
        let qv = [r[0][1], r[1][1], r[2][1]];
        frame[k] = [nk, pv, qv];
        let rk = rho[k];
        c[k] = [rk[2] * (1.5f64).sqrt() / s, rk[0] / sq2, rk[1] / sq2];
        let (m, g) = tangential_gradient(n, k);
        let form = |a: &Vec3, b: &Vec3| (0..3).map(|i| (0..3).map(|j| a[i] * m[i][j] * b[j]).sum::<f64>()).sum::<f64>();
        c_printed[k] = [
            -2.0 * SQ6 / bm.nu * g,
            sq2 * s / bm.mu * (form(&pv, &pv) - form(&qv, &qv)),
            2.0 * sq2 * s / bm.mu * form(&pv, &qv),
        ];
    }
    let mut printed_ratio = [f64::NAN; 3];
    for (j, ratio) in printed_ratio.iter_mut().enumerate() {
        let a: Vec<f64> = c_printed.iter().map(|v| v[j] * v[j]).collect();
        let b: Vec<f64> = c.iter().map(|v| v[j] * v[j]).collect();
        let (na, nb) = (grid.integrate(&a), grid.integrate(&b));
        if nb > 1e-300 {
            *ratio = (na / nb).sqrt();
        }
    }
    Ok(CorrectionCoefficients { rho, c, c_printed, frame, printed_ratio })
}

/// The terms of G_eps = director + H_eps + gradient for a field near the limit manifold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HEpsDecomposition {
    /// (s+^2/eps^2)(|grad n_eps|^2 - |grad n_0|^2)
    pub director: f64,
    pub h_eps: f64,
    /// (eps^2/2) |grad P|^2
    pub gradient: f64,
    /// G_eps computed directly from the energy.
    pub direct: f64,
    pub reconstruction_error: f64,
}

pub fn h_eps_decomposition(q: &QField, n0: &DirectorField, p: &MaterialParams) -> Result<HEpsDecomposition> {
    let dec = asymptotics::decompose(q, n0, p)?;
    let grid = q.grid();
    let s = p.s_plus();
    let e2 = p.eps * p.eps;
    let bm = mu_nu_b0matrices(p);
    let e0 = oseen_frank_energy(n0, p);
    let director = s * s * (dirichlet_integral(&dec.n_eps) - dirichlet_integral(n0)) / e2;
    let b = b_field(&dec.n_eps, p)?;
    let d = per_interior(n0, |k| {
        let r = dec.rho_eps[k];
        0.5 * bm.form(&r, p.eps) + b[k][0] * r[0] + b[k][1] * r[1] + b[k][2] * r[2]
    });
    let h_eps = grid.integrate(&d);
    let pperp: Vec<QVec> = (0..grid.node_count())
        .map(|k| if grid.is_active(k) { (1.0 / e2) * (q.get(k) - uniaxial(&dec.n_eps.get(k), s)) } else { QVec::ZERO })
        .collect();
    let gradient = e2 * dirichlet_energy(grid, &pperp);
    let direct = ldg_energy(q, p).relative_to(e0, p.eps).renormalized;
    let sum = director + h_eps + gradient;
    Ok(HEpsDecomposition { director, h_eps, gradient, direct, reconstruction_error: (direct - sum).abs() })
}

fn check_b0_regime(p: &MaterialParams) -> Result<()> {
    if p.b2 != 0.0 {
        return Err(Error::WrongRegime(p.b2));
    }
    Ok(())
}

/// Q_0 = sqrt(2/3) s+ (c1 F1 + c2 F2 + c3 F3) from a c-field.
pub fn b0_q_field(c: &DirectorField, p: &MaterialParams) -> QField {
    let f = SQ2_3 * p.s_plus();
    let grid = c.grid();
    let values = (0..grid.node_count())
        .map(|k| {
            let v = c.get(k);
            QVec([f * v[0], f * v[1], f * v[2], 0.0, 0.0])
        })
        .collect();
    QField::new(grid.clone(), values).expect("layout matches")
}

/// Energy with the b = 0 bulk potential (c^2/4)(|Q|^2 - a^2/c^2)^2.
pub fn b0_gl_energy(q: &QField, p: &MaterialParams) -> Result<EnergyBreakdown> {
    check_b0_regime(p)?;
    Ok(ldg_energy(q, p))
}

/// -(c^2 / 4 a^4) int |grad Q_0|^4.
pub fn b0_limit_correction(q0: &QField, p: &MaterialParams) -> Result<f64> {
    check_b0_regime(p)?;
    let grid = q0.grid();
    let d: Vec<f64> = dirichlet_densities(grid, q0.values()).iter().map(|g| g * g).collect();
    Ok(-p.c2 / (4.0 * p.a2 * p.a2) * grid.integrate(&d))
}

/// Predicted limit of (Q_eps - Q_0) : Q_0 / eps^2, namely -|grad Q_0|^2 / (2 a^2).
pub fn b0_rho_prediction(q0: &QField, p: &MaterialParams) -> Result<Vec<f64>> {
    check_b0_regime(p)?;
    Ok(dirichlet_densities(q0.grid(), q0.values()).iter().map(|g| -g / (2.0 * p.a2)).collect())
}
