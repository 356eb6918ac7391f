//! The quadratic LO-RHS invariant A⁽²⁾ = A σ_y^{⊗n} Aᵀ σ_y^{⊗n}, its closed
//! forms for runs of one to four DC-NOTs, the principal-parameter
//! diagonalizations for two and three DC-NOTs, and tensor-product factoring.
//!
//! Invariants of 2-qubit operators are handled in Γ form: a scalar
//! λ_r + iλ_i plus two real 3×3 matrices for the Hermitian traceless parts.

use crate::circuit::DcNot;
use crate::linalg::{
    c, gamma, gamma_inv, identity, is_unitary, kron, rank_one, rhon_with, sigma_y,
    simultaneous_svd3, svd2, xs, CMat, LinalgError, RMat2, RMat3, RhonBasis, UnitVec3, Vec3,
};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("closed forms exist for 1 to 4 DC-NOTs, got {0}")]
    BadOrder(usize),
    #[error("not a G2 invariant (residual {0:e})")]
    NotG2(f64),
    #[error("not a G3 invariant (residual {0:e})")]
    NotG3(f64),
    #[error("operator does not factor into single-qubit pieces (relative residual {0:e})")]
    NotFactorable(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One DC-NOT of a run on wires (0, 1): `a` on wire 0, `a1` on wire 1.
pub type VecPair = (UnitVec3, UnitVec3);

pub fn pairs_of(run: &[DcNot]) -> Vec<VecPair> {
    run.iter()
        .map(|d| {
            let d = d.canonical();
            (d.v_i, d.v_j)
        })
        .collect()
}

fn sigma_y_pow(n: usize) -> CMat {
    let mut out = identity(1);
    for _ in 0..n {
        out = kron(&out, &sigma_y());
    }
    out
}

/// A σ_y^{⊗n} Aᵀ σ_y^{⊗n}.
pub fn quad_invariant(a: &CMat, nbits: usize) -> Result<CMat, InvariantError> {
    if a.nrows() != 1 << nbits || !is_unitary(a, 1e-10) {
        return Err(InvariantError::Contract("quad_invariant needs a unitary of size 2^n".into()));
    }
    Ok(quad_invariant_unchecked(a, nbits))
}

pub(crate) fn quad_invariant_unchecked(a: &CMat, nbits: usize) -> CMat {
    let s = sigma_y_pow(nbits);
    a * &s * a.transpose() * &s
}

/// λ_r + iλ_i + Λ_r + iΛ_i of a 4×4 invariant; Λ_r, Λ_i are Hermitian and
/// traceless and are stored as 4×4 matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantParts {
    pub lam_r: f64,
    pub lam_i: f64,
    pub big_lam_r: CMat,
    pub big_lam_i: CMat,
}

impl InvariantParts {
    pub fn matrix(&self) -> CMat {
        identity(4) * c(self.lam_r, self.lam_i) + &self.big_lam_r + &self.big_lam_i * c(0.0, 1.0)
    }

    pub fn gamma_r(&self) -> RMat3 {
        gamma(&self.big_lam_r)
    }

    pub fn gamma_i(&self) -> RMat3 {
        gamma(&self.big_lam_i)
    }
}

/// Splits M into scalar and Hermitian traceless parts. The scalar is ¼ tr M.
pub fn split_parts(m: &CMat) -> InvariantParts {
    let t = m.trace() / c(4.0, 0.0);
    let delta = m - identity(4) * t;
    let dd = delta.adjoint();
    InvariantParts {
        lam_r: t.re,
        lam_i: t.im,
        big_lam_r: (&delta + &dd) * c(0.5, 0.0),
        big_lam_i: (&delta - &dd) * c(0.0, -0.5),
    }
}

/// Invariant parts in Γ form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParts {
    pub lam_r: f64,
    pub lam_i: f64,
    pub gr: RMat3,
    pub gi: RMat3,
}

impl GammaParts {
    pub fn from_matrix(m: &CMat) -> Self {
        let p = split_parts(m);
        GammaParts { lam_r: p.lam_r, lam_i: p.lam_i, gr: gamma(&p.big_lam_r), gi: gamma(&p.big_lam_i) }
    }

    pub fn matrix(&self) -> CMat {
        identity(4) * c(self.lam_r, self.lam_i)
            + gamma_inv(&self.gr)
            + gamma_inv(&self.gi) * c(0.0, 1.0)
    }

    /// Multiplies the invariant by i^k.
    pub fn times_i_pow(&self, k: i32) -> Self {
        let mut p = *self;
        for _ in 0..k.rem_euclid(4) {
            p = GammaParts { lam_r: -p.lam_i, lam_i: p.lam_r, gr: -p.gi, gi: p.gr };
        }
        p
    }

    pub fn scaled(&self, s: f64) -> Self {
        GammaParts { lam_r: s * self.lam_r, lam_i: s * self.lam_i, gr: self.gr * s, gi: self.gi * s }
    }

    /// Frobenius distance between the 4×4 matrices the parts describe.
    pub fn distance(&self, other: &GammaParts) -> f64 {
        // The σ_{i,j} basis and the identity are orthogonal with squared norm 4.
        let ds = (self.lam_r - other.lam_r).powi(2) + (self.lam_i - other.lam_i).powi(2);
        let dm = (self.gr - other.gr).norm_squared() + (self.gi - other.gi).norm_squared();
        2.0 * (ds + dm).sqrt()
    }
}

fn outer(u: &Vec3, v: &Vec3) -> RMat3 {
    u * v.transpose()
}

/// Closed-form invariant of r DC-NOTs; `pairs[0]` acts first.
pub fn closed_parts(pairs: &[VecPair]) -> Result<GammaParts, InvariantError> {
    match pairs.len() {
        1 => Ok(g1(&pairs[0])),
        2 => Ok(g2(&pairs[0], &pairs[1])),
        3 => Ok(g3(&pairs[0], &pairs[1], &pairs[2])),
        4 => Ok(g4(&g3(&pairs[0], &pairs[1], &pairs[2]), &pairs[3])),
        r => Err(InvariantError::BadOrder(r)),
    }
}

/// Closed-form G_r⁽²⁾ as a 4×4 matrix.
pub fn g2_closed(r: usize, pairs: &[VecPair]) -> Result<CMat, InvariantError> {
    if r != pairs.len() {
        return Err(InvariantError::Contract(format!("{} pairs given for r = {r}", pairs.len())));
    }
    Ok(closed_parts(pairs)?.matrix())
}

fn g1(p: &VecPair) -> GammaParts {
    let (a, a1) = (p.0.v(), p.1.v());
    GammaParts { lam_r: 0.0, lam_i: 0.0, gr: -outer(&a1, &a), gi: RMat3::zeros() }
}

fn g2(pa: &VecPair, pb: &VecPair) -> GammaParts {
    let (a, a1, b, b1) = (pa.0.v(), pa.1.v(), pb.0.v(), pb.1.v());
    let (ab, ab1) = (a.dot(&b), a1.dot(&b1));
    GammaParts {
        lam_r: ab * ab1,
        lam_i: 0.0,
        gr: -outer(&xs(&[a1, b1, b1]), &xs(&[a, b, b])),
        gi: outer(&a1.cross(&b1), &b) * ab + outer(&b1, &a.cross(&b)) * ab1,
    }
}

fn g3(pa: &VecPair, pb: &VecPair, pc: &VecPair) -> GammaParts {
    let (a, a1, b, b1, cc, c1) = (pa.0.v(), pa.1.v(), pb.0.v(), pb.1.v(), pc.0.v(), pc.1.v());
    let (ab, ab1, bc, bc1) = (a.dot(&b), a1.dot(&b1), b.dot(&cc), b1.dot(&c1));
    let v = a.cross(&b).dot(&cc);
    let v1 = a1.cross(&b1).dot(&c1);
    let abbc = xs(&[a, b, b]).dot(&cc);
    let abbc1 = xs(&[a1, b1, b1]).dot(&c1);
    let gr = -outer(&c1, &cc) * (ab1 * ab)
        + outer(&xs(&[a1, b1, c1]), &cc) * (ab * bc)
        + outer(&c1, &xs(&[a, b, cc])) * (ab1 * bc1)
        + outer(&b1.cross(&c1), &cc) * (ab1 * v)
        + outer(&c1, &b.cross(&cc)) * (ab * v1)
        - outer(&xs(&[a1, b1, b1, c1, c1]), &xs(&[a, b, b, cc, cc]));
    let gi = outer(&xs(&[a1, b1, c1, c1]), &xs(&[b, cc, cc])) * ab
        + outer(&xs(&[b1, c1, c1]), &xs(&[a, b, cc, cc])) * ab1
        + outer(&xs(&[a1, b1, b1, c1]), &cc) * abbc
        + outer(&c1, &xs(&[a, b, b, cc])) * abbc1;
    GammaParts {
        lam_r: abbc1 * abbc,
        lam_i: -ab * bc * v1 - ab1 * bc1 * v,
        gr,
        gi,
    }
}

fn g4(p3: &GammaParts, pd: &VecPair) -> GammaParts {
    let b = g4_blocks_from(-p3.lam_r, -p3.lam_i, &p3.gi, &p3.gr, &pd.0, &pd.1);
    let (d, d1) = (pd.0.v(), pd.1.v());
    let dd = outer(&d1, &d);
    GammaParts {
        lam_r: -d1.dot(&(b.m_nu * d)),
        lam_i: -d1.dot(&(b.m_mu * d)),
        gr: dd * b.xo + outer(&b.x_prime, &d) + outer(&d1, &b.x) + b.delta_x,
        gi: dd * b.yo - outer(&b.y_prime, &d) - outer(&d1, &b.y) + b.delta_y,
    }
}

/// Principal parameters of a G2 invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalParams2 {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub f: RhonBasis,
    pub f_prime: RhonBasis,
}

impl PrincipalParams2 {
    /// (â, â′) acting first, then (b̂, b̂′).
    pub fn pairs(&self) -> [VecPair; 2] {
        let (ca, sa) = (self.alpha.cos(), self.alpha.sin());
        let (cp, sp) = (self.alpha_prime.cos(), self.alpha_prime.sin());
        let a = UnitVec3::normalize_or(self.f.f1.v() * ca - self.f.f2.v() * sa, self.f.f1);
        let a1 = UnitVec3::normalize_or(
            self.f_prime.f1.v() * cp - self.f_prime.f2.v() * sp,
            self.f_prime.f1,
        );
        [(a, a1), (self.f.f1, self.f_prime.f1)]
    }
}

/// The four products cos/sin α′ × cos/sin α.
#[derive(Debug, Clone, Copy)]
pub(crate) struct G2Products {
    pub cc: f64,
    pub sc: f64,
    pub cs: f64,
    pub ss: f64,
}

/// Recovers (α′, α) from the four products.
pub(crate) fn angles_from_products(p: &G2Products) -> (f64, f64) {
    let sum = (p.sc + p.cs).atan2(p.cc - p.ss);
    let diff = (p.sc - p.cs).atan2(p.cc + p.ss);
    (0.5 * (sum + diff), 0.5 * (sum - diff))
}

/// Steps 4–7 of the G2 diagonalization: given λ_r, s_α′s_α, f̂₂, f̂₂′ and the
/// Γ-matrix of Λ_i, build the principal parameters.
pub(crate) fn g2_tail(lam_r: f64, ss: f64, f2: &UnitVec3, f2p: &UnitVec3, gi: &RMat3) -> PrincipalParams2 {
    let h = rhon_with(f2, 2);
    let hp = rhon_with(f2p, 2);
    let m = RMat2::new(
        hp.f3.dot(&(gi * h.f1.v())),
        hp.f3.dot(&(gi * h.f3.v())),
        hp.f1.dot(&(gi * h.f1.v())),
        hp.f1.dot(&(gi * h.f3.v())),
    );
    let (u, d, v) = svd2(&m);
    let mut sc = d[0];
    let mut cs = d[1];
    let mut f3p = hp.f3.v() * u[(0, 0)] + hp.f1.v() * u[(1, 0)];
    let f1p = hp.f3.v() * u[(0, 1)] + hp.f1.v() * u[(1, 1)];
    let f1 = h.f1.v() * v[(0, 0)] + h.f3.v() * v[(1, 0)];
    let mut f3 = h.f1.v() * v[(0, 1)] + h.f3.v() * v[(1, 1)];
    if u.determinant() < 0.0 {
        f3p = -f3p;
        sc = -sc;
    }
    if v.determinant() < 0.0 {
        f3 = -f3;
        cs = -cs;
    }
    let (alpha_prime, alpha) = angles_from_products(&G2Products { cc: lam_r, sc, cs, ss });
    PrincipalParams2 {
        alpha,
        alpha_prime,
        f: RhonBasis { f1: UnitVec3::new_unchecked(f1), f2: *f2, f3: UnitVec3::new_unchecked(f3) },
        f_prime: RhonBasis {
            f1: UnitVec3::new_unchecked(f1p),
            f2: *f2p,
            f3: UnitVec3::new_unchecked(f3p),
        },
    }
}

/// Unit vector closest to ẑ inside the kernel of `m` (or of `mᵀ` when `left`).
fn kernel_direction(m: &RMat3, left: bool) -> UnitVec3 {
    let m = if left { m.transpose() } else { *m };
    let svd = m.svd(true, true);
    let vt = svd.v_t.expect("v requested");
    let scale = m.norm().max(1.0);
    let mut basis = Vec::new();
    for k in 0..3 {
        if svd.singular_values[k] <= 1e-9 * scale {
            basis.push(vt.row(k).transpose().into_owned());
        }
    }
    if basis.is_empty() {
        let mut k = 0;
        for i in 1..3 {
            if svd.singular_values[i] < svd.singular_values[k] {
                k = i;
            }
        }
        return UnitVec3::normalize_or(vt.row(k).transpose().into_owned(), UnitVec3::z());
    }
    let z = Vec3::z();
    let proj: Vec3 = basis.iter().map(|b| b * b.dot(&z)).sum();
    UnitVec3::normalize(proj).unwrap_or_else(|_| UnitVec3::new_unchecked(basis[0].normalize()))
}

/// Candidate (s_α′s_α, f̂₂, f̂₂′) choices for step 2 of the G2 diagonalization.
fn g2_step2_candidates(parts: &GammaParts) -> Vec<(f64, UnitVec3, UnitVec3)> {
    let (sigma, u, v) = rank_one(&parts.gr);
    if sigma <= 1e-12 {
        let f2 = kernel_direction(&parts.gi, false);
        let f2p = kernel_direction(&parts.gi, true);
        return vec![(0.0, f2, f2p), (0.0, -f2, f2p)];
    }
    let (u, v) = (UnitVec3::new_unchecked(u.normalize()), UnitVec3::new_unchecked(v.normalize()));
    // Γ(Λ_r) = −s_α′s_α f̂₂′ f̂₂ᵀ.
    vec![(sigma, v, -u), (-sigma, v, u)]
}

/// Principal parameters and recovered vectors of a G2 invariant given in Γ form.
pub fn diagonalize_g2_parts(parts: &GammaParts) -> Result<(PrincipalParams2, [VecPair; 2], f64), InvariantError> {
    let mut best: Option<(PrincipalParams2, [VecPair; 2], f64)> = None;
    for (ss, f2, f2p) in g2_step2_candidates(parts) {
        let pp = g2_tail(parts.lam_r, ss, &f2, &f2p, &parts.gi);
        let pairs = pp.pairs();
        let res = closed_parts(&pairs)?.distance(parts);
        if best.as_ref().map_or(true, |b| res < b.2) {
            best = Some((pp, pairs, res));
        }
        if res <= 1e-10 {
            break;
        }
    }
    let best = best.expect("at least one candidate");
    if best.2 > 1e-6 {
        return Err(InvariantError::NotG2(best.2));
    }
    Ok(best)
}

/// Algorithm for diagonalizing G2⁽²⁾: principal parameters plus recovered
/// ((â, â′), (b̂, b̂′)) with â acting first.
pub fn diagonalize_g2(m: &CMat) -> Result<(PrincipalParams2, [VecPair; 2]), InvariantError> {
    let (pp, pairs, _) = diagonalize_g2_parts(&GammaParts::from_matrix(m))?;
    Ok((pp, pairs))
}

/// Principal parameters of a G3 invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalParams3 {
    pub beta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub xi: f64,
    pub g: RhonBasis,
    pub g_prime: RhonBasis,
    pub nu: [f64; 3],
    pub mu: [f64; 3],
    pub xo: f64,
    pub yo: f64,
}

/// ν, μ, X_o, Y_o as functions of (β, β₁, β₂, ξ).
pub fn principal3_values(beta: f64, beta1: f64, beta2: f64, xi: f64) -> ([f64; 3], [f64; 3], f64, f64) {
    let (cb, sb) = (beta.cos(), beta.sin());
    let (c1, s1) = (beta1.cos(), beta1.sin());
    let (c2, s2) = (beta2.cos(), beta2.sin());
    let nu = [sb * c1 * s2, sb * s1 * c2.abs(), cb * c1 * c2];
    let mu = [-cb * s1 * c2.abs(), -cb * c1 * s2, sb * xi * s1 * s2];
    (nu, mu, cb * xi * s1 * s2, sb * c1 * c2)
}

impl PrincipalParams3 {
    /// Recovered pairs (â, â′), (b̂, b̂′), (ĉ, ĉ′), â acting first.
    pub fn pairs(&self) -> [VecPair; 3] {
        let xi2 = -self.xi;
        let (g1, g3) = (self.g.f1.v(), self.g.f3.v());
        let rot13 = |t: f64| UnitVec3::normalize_or(g1 * t.cos() + g3 * t.sin(), self.g.f1);
        let cc = self.g.f1;
        let b = rot13(self.beta2);
        let a = rot13(self.beta2 - xi2 * self.beta1);
        let c1 = self.g_prime.f1;
        let b1 = self.g_prime.f3;
        let a1 = UnitVec3::normalize_or(
            self.g_prime.f1.v() * self.beta.cos() + self.g_prime.f2.v() * self.beta.sin(),
            c1,
        );
        [(a, a1), (b, b1), (cc, c1)]
    }

    /// Λ₃ᵣ and Λ₃ᵢ in Γ form: Σ ν_j ĝ′_j ĝ_{π(j)}ᵀ and Σ μ_j ĝ′_j ĝ_{π(j)}ᵀ.
    pub fn m_nu_mu(&self) -> (RMat3, RMat3) {
        let gp = self.g_prime.matrix();
        let g = self.g.matrix();
        let mut mn = RMat3::zeros();
        let mut mm = RMat3::zeros();
        for j in 0..3 {
            let pj = (j + 1) % 3;
            let o = outer(&gp.column(j).into_owned(), &g.column(pj).into_owned());
            mn += o * self.nu[j];
            mm += o * self.mu[j];
        }
        (mn, mm)
    }
}

/// Permutation π = (1 2 3 → 2 3 1) as a matrix: Π[j][π(j)] = 1.
pub fn pi_matrix() -> RMat3 {
    RMat3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0)
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Steps 4–7 for one labeling of the simultaneous-SVD triples.
fn g3_from_labeling(
    xo: f64,
    yo: f64,
    gp: [Vec3; 3],
    g: [Vec3; 3],
    nu: [f64; 3],
    mu: [f64; 3],
    xi: f64,
    flip: f64,
) -> PrincipalParams3 {
    let xi2 = -xi;
    let rc = [nu[2], -mu[1], -xi2 * mu[0], xi * xo];
    let rs = [yo, nu[0], xi2 * nu[1], xi * mu[2]];
    let n_c = rc.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n_s = rs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = rc.iter().zip(rs.iter()).map(|(x, y)| x * y).sum();
    let norm = (mu[2] * mu[2] + xo * xo).sqrt();
    let (mut cb, mut sb) = if norm > 1e-9 {
        (xi * xo / norm, xi * mu[2] / norm)
    } else {
        let s = if dot < 0.0 { -1.0 } else { 1.0 };
        let n = (n_c * n_c + n_s * n_s).sqrt().max(1e-300);
        (n_c / n, s * n_s / n)
    };
    cb *= flip;
    sb *= flip;
    let mut p = [0.0; 4];
    for k in 0..4 {
        p[k] = cb * rc[k] + sb * rs[k];
    }
    let prods = G2Products { cc: p[0], cs: p[1], sc: p[2], ss: p[3] };
    let (mut b1, mut b2) = angles_from_products(&prods);
    let mut gp = gp;
    let mut nu = nu;
    let mut mu = mu;
    let negate = |gp: &mut [Vec3; 3], nu: &mut [f64; 3], mu: &mut [f64; 3]| {
        for j in 0..2 {
            gp[j] = -gp[j];
            nu[j] = -nu[j];
            mu[j] = -mu[j];
        }
    };
    if b1.sin() < 0.0 {
        b1 = -b1;
        b2 = -b2;
        negate(&mut gp, &mut nu, &mut mu);
    }
    if xi2 * b2.cos() < 0.0 {
        b1 = PI - b1;
        b2 = PI - b2;
        negate(&mut gp, &mut nu, &mut mu);
    }
    let u = |v: Vec3| UnitVec3::new_unchecked(v);
    PrincipalParams3 {
        beta: sb.atan2(cb),
        beta1: b1,
        beta2: b2,
        xi,
        g: RhonBasis { f1: u(g[0]), f2: u(g[1]), f3: u(g[2]) },
        g_prime: RhonBasis { f1: u(gp[0]), f2: u(gp[1]), f3: u(gp[2]) },
        nu,
        mu,
        xo,
        yo,
    }
}

/// Principal parameters and recovered vectors of a G3 invariant in Γ form.
///
/// The simultaneous SVD fixes the singular triples only up to order and sign;
/// every labeling with right-handed bases is tried in a fixed order and the
/// first one that re-synthesizes the invariant is kept.
pub fn diagonalize_g3_parts(parts: &GammaParts) -> Result<(PrincipalParams3, [VecPair; 3], f64), InvariantError> {
    let xo = -parts.lam_r;
    let yo = -parts.lam_i;
    let (u, dr, di, v) = simultaneous_svd3(&parts.gr, &parts.gi)
        .map_err(|_| InvariantError::NotG3(f64::INFINITY))?;
    let mut best: Option<(PrincipalParams3, [VecPair; 3], f64)> = None;
    'outer: for perm in PERMS {
        for signs in 0..64u32 {
            let eps: Vec<f64> = (0..3).map(|j| if signs >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let del: Vec<f64> = (0..3).map(|j| if signs >> (j + 3) & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let mut gp = [Vec3::zeros(); 3];
            let mut g = [Vec3::zeros(); 3];
            let mut nu = [0.0; 3];
            let mut mu = [0.0; 3];
            for j in 0..3 {
                let k = perm[j];
                gp[j] = u.column(k).into_owned() * eps[j];
                g[(j + 1) % 3] = v.column(k).into_owned() * del[j];
                nu[j] = dr[k] * eps[j] * del[j];
                mu[j] = di[k] * eps[j] * del[j];
            }
            if gp[0].cross(&gp[1]).dot(&gp[2]) < 0.0 || g[0].cross(&g[1]).dot(&g[2]) < 0.0 {
                continue;
            }
            let s = mu[2] * nu[1];
            let xis: &[f64] = if s.abs() > 1e-9 {
                if s > 0.0 { &[1.0] } else { &[-1.0] }
            } else {
                &[1.0, -1.0]
            };
            for &xi in xis {
                for flip in [1.0, -1.0] {
                    let pp = g3_from_labeling(xo, yo, gp, g, nu, mu, xi, flip);
                    let pairs = pp.pairs();
                    let res = closed_parts(&pairs)?.distance(parts);
                    if best.as_ref().map_or(true, |b| res < b.2) {
                        best = Some((pp, pairs, res));
                    }
                    if res <= 1e-11 {
                        break 'outer;
                    }
                }
            }
        }
    }
    let best = best.ok_or(InvariantError::NotG3(f64::INFINITY))?;
    if best.2 > 1e-5 {
        return Err(InvariantError::NotG3(best.2));
    }
    Ok(best)
}

/// Principal parameters and recovered vectors of a G3⁽²⁾ matrix.
pub fn diagonalize_g3(m: &CMat) -> Result<(PrincipalParams3, [VecPair; 3]), InvariantError> {
    let (pp, pairs, _) = diagonalize_g3_parts(&GammaParts::from_matrix(m))?;
    Ok((pp, pairs))
}

/// The blocks of the four-DC-NOT invariant (world frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariant4Blocks {
    pub xo: f64,
    pub yo: f64,
    pub x: Vec3,
    pub y: Vec3,
    pub x_prime: Vec3,
    pub y_prime: Vec3,
    pub delta_x: RMat3,
    pub delta_y: RMat3,
    pub m_mu: RMat3,
    pub m_nu: RMat3,
}

/// Blocks from X_o, Y_o and the Γ-matrices M_μ = Γ(Λ₃ᵢ), M_ν = Γ(Λ₃ᵣ).
pub fn g4_blocks_from(xo: f64, yo: f64, m_mu: &RMat3, m_nu: &RMat3, d: &UnitVec3, d1: &UnitVec3) -> Invariant4Blocks {
    let (d, d1) = (d.v(), d1.v());
    let delta = |m: &RMat3| outer(&d1, &d) * d1.dot(&(m * d)) - m * outer(&d, &d) - outer(&d1, &d1) * m + m;
    Invariant4Blocks {
        xo,
        yo,
        x: (m_mu.transpose() * d1).cross(&d),
        y: (m_nu.transpose() * d1).cross(&d),
        x_prime: (m_mu * d).cross(&d1),
        y_prime: (m_nu * d).cross(&d1),
        delta_x: delta(m_nu),
        delta_y: delta(m_mu),
        m_mu: *m_mu,
        m_nu: *m_nu,
    }
}

pub fn g4_blocks(p: &PrincipalParams3, d: &UnitVec3, d1: &UnitVec3) -> Invariant4Blocks {
    let (m_nu, m_mu) = p.m_nu_mu();
    g4_blocks_from(p.xo, p.yo, &m_mu, &m_nu, d, d1)
}

/// LO-RHS equivalence of two 2-qubit unitaries: A⁽²⁾ = e^{iζ} B⁽²⁾.
pub fn lo_rhs_equivalent(a: &CMat, b: &CMat) -> Result<(bool, f64), InvariantError> {
    if a.nrows() != 4 || b.nrows() != 4 {
        return Err(InvariantError::Contract("lo_rhs_equivalent is defined for 2 qubits".into()));
    }
    let a2 = quad_invariant(a, 2)?;
    let b2 = quad_invariant(b, 2)?;
    let t = (b2.adjoint() * &a2).trace();
    let zetas: Vec<f64> = if t.norm() >= 1e-10 {
        vec![t.arg()]
    } else {
        vec![0.0, 0.5 * PI, PI, -0.5 * PI]
    };
    let mut best = (f64::INFINITY, 0.0);
    for z in zetas {
        let r = (&a2 - &b2 * c(z.cos(), z.sin())).norm();
        if r < best.0 {
            best = (r, z);
        }
    }
    Ok((best.0 <= 4e-7, best.1))
}

/// M = e^{iφ} · U_{n−1} ⊗ … ⊗ U_0 with each U_k ∈ SU(2).
#[derive(Debug, Clone)]
pub struct Factored {
    pub phase: f64,
    /// `factors[w]` acts on wire w.
    pub factors: Vec<CMat>,
    pub residual: f64,
}

impl Factored {
    pub fn matrix(&self) -> CMat {
        let mut out = identity(1);
        for f in self.factors.iter().rev() {
            out = kron(&out, f);
        }
        out * c(self.phase.cos(), self.phase.sin())
    }
}

fn to_su2(m: &CMat) -> Option<CMat> {
    let det = m.determinant();
    if det.norm() < 1e-12 {
        return None;
    }
    Some(m / det.sqrt())
}

/// Splits a unitary on n = 2 or 3 qubits into single-qubit factors.
pub fn factor_tensor_product(m: &CMat, n: usize) -> Result<Factored, InvariantError> {
    if !(n == 2 || n == 3) || m.nrows() != 1 << n {
        return Err(InvariantError::Contract("factor_tensor_product needs n in {2, 3}".into()));
    }
    let mut rest = m.clone();
    let mut factors_hi = Vec::new();
    for k in (1..n).rev() {
        let d = 1usize << k;
        // Rearrange so that rest ≈ A ⊗ B becomes vec(A) vec(B)ᵀ.
        let r = CMat::from_fn(4, d * d, |row, col| {
            let (i1, j1) = (row / 2, row % 2);
            let (i2, j2) = (col / d, col % d);
            rest[(i1 * d + i2, j1 * d + j2)]
        });
        // Pivoted rank-one split r ≈ u·vᵀ. The complex SVD is not reliable on
        // exactly rank-deficient input, and the residual check below catches
        // anything that is not a product.
        let mut piv = (0, 0);
        for i in 0..r.nrows() {
            for j in 0..r.ncols() {
                if r[(i, j)].norm() > r[piv].norm() {
                    piv = (i, j);
                }
            }
        }
        if r[piv].norm() < 1e-12 {
            return Err(InvariantError::NotFactorable(f64::INFINITY));
        }
        let col = r.column(piv.1).into_owned();
        let u = &col / c(col.norm(), 0.0);
        let vt = r.row(piv.0).into_owned() * (c(col.norm(), 0.0) / r[piv]);
        let a = CMat::from_fn(2, 2, |i, j| u[i * 2 + j]);
        let b = CMat::from_fn(d, d, |i, j| vt[i * d + j]);
        let Some(a_su2) = to_su2(&a) else {
            return Err(InvariantError::NotFactorable(f64::INFINITY));
        };
        // a ⊗ b = a_su2 ⊗ (b·√det a).
        let scale = a[(0, 0)] * a_su2[(0, 0)].inv();
        let scale = if a_su2[(0, 0)].norm() > 1e-6 { scale } else { a[(0, 1)] * a_su2[(0, 1)].inv() };
        rest = b * scale;
        factors_hi.push(a_su2);
    }
    let Some(last) = to_su2(&rest) else {
        return Err(InvariantError::NotFactorable(f64::INFINITY));
    };
    let mut factors = vec![last];
    factors.extend(factors_hi.into_iter().rev());
    let mut f = Factored { phase: 0.0, factors, residual: 0.0 };
    let prod = f.matrix();
    let t = (prod.adjoint() * m).trace();
    f.phase = t.arg();
    f.residual = (m - f.matrix()).norm();
    let rel = f.residual / m.norm().max(1e-300);
    if rel > 1e-6 {
        return Err(InvariantError::NotFactorable(rel));
    }
    Ok(f)
}
