//! Real 3-vectors, Paulions, small dense complex matrices and the
//! simultaneous SVD used by the invariant algorithms.
//!
//! Conventions: `sigma2(a1, a0)` is σ_{a1} ⊗ σ_{a0}, the first factor acting
//! on the most significant bit. Γ(M)_ij = ¼ tr(σ_{X_i} ⊗ σ_{X_j} M), so rows of
//! a Γ-matrix index bit 1 and columns index bit 0.

use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use std::ops::{Deref, Neg};
use thiserror::Error;

pub type C64 = Complex64;
pub type Vec3 = Vector3<f64>;
pub type RMat3 = Matrix3<f64>;
pub type RMat2 = Matrix2<f64>;
/// Dense complex matrix; dimensions used here are 2, 4 and 8.
pub type CMat = DMatrix<C64>;

/// Absolute tolerance for geometric predicates (parallel, perpendicular, zero).
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("degenerate direction: |b| too small")]
    DegenerateDirection,
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("anchor {0:?} is not perpendicular to the rotation axis")]
    Anchor([f64; 3]),
    #[error("matrices are not simultaneously diagonalizable (commutator norm {0:e})")]
    NotSimultaneouslyDiagonalizable(f64),
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    /// Accepts `v` only when its norm is within 1e-12 of one.
    pub fn new(v: Vec3) -> Result<Self, LinalgError> {
        if !(v.iter().all(|x| x.is_finite())) || (v.norm() - 1.0).abs() > 1e-12 {
            return Err(LinalgError::Contract(format!("not a unit vector: {v:?}")));
        }
        Ok(UnitVec3(v))
    }

    /// Normalizes any vector with norm above 1e-12.
    pub fn normalize(v: Vec3) -> Result<Self, LinalgError> {
        let n = v.norm();
        if !n.is_finite() || n <= 1e-12 {
            return Err(LinalgError::DegenerateDirection);
        }
        Ok(UnitVec3(v / n))
    }

    /// Normalizes `v`, falling back to `fallback` when `v` is (numerically) zero.
    pub fn normalize_or(v: Vec3, fallback: UnitVec3) -> Self {
        Self::normalize(v).unwrap_or(fallback)
    }

    pub fn new_unchecked(v: Vec3) -> Self {
        UnitVec3(v)
    }

    pub fn x() -> Self {
        UnitVec3(Vec3::x())
    }
    pub fn y() -> Self {
        UnitVec3(Vec3::y())
    }
    pub fn z() -> Self {
        UnitVec3(Vec3::z())
    }

    pub fn v(&self) -> Vec3 {
        self.0
    }
}

impl Deref for UnitVec3 {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

/// Right-handed orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhonBasis {
    pub f1: UnitVec3,
    pub f2: UnitVec3,
    pub f3: UnitVec3,
}

impl RhonBasis {
    pub fn new(f1: Vec3, f2: Vec3, f3: Vec3) -> Result<Self, LinalgError> {
        let b = RhonBasis {
            f1: UnitVec3::normalize(f1)?,
            f2: UnitVec3::normalize(f2)?,
            f3: UnitVec3::normalize(f3)?,
        };
        if !b.is_valid(1e-8) {
            return Err(LinalgError::Contract("not a right-handed orthonormal basis".into()));
        }
        Ok(b)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.f1.dot(&self.f2).abs() <= tol
            && self.f2.dot(&self.f3).abs() <= tol
            && self.f1.dot(&self.f3).abs() <= tol
            && (self.f1.cross(&self.f2).dot(&self.f3) - 1.0).abs() <= tol
    }

    /// Columns f1, f2, f3.
    pub fn matrix(&self) -> RMat3 {
        RMat3::from_columns(&[self.f1.v(), self.f2.v(), self.f3.v()])
    }
}

/// Left-nested cross product ((v1×v2)×v3)…×vr.
pub fn cross_fold(vs: &[Vec3]) -> Result<Vec3, LinalgError> {
    if vs.len() < 2 {
        return Err(LinalgError::Argument("cross_fold needs at least two vectors".into()));
    }
    Ok(xs(vs))
}

/// Infallible form of [`cross_fold`] for internal use with fixed arity.
pub(crate) fn xs(vs: &[Vec3]) -> Vec3 {
    let mut acc = vs[0];
    for v in &vs[1..] {
        acc = acc.cross(v);
    }
    acc
}

pub fn along(a: &Vec3, b: &Vec3) -> Result<Vec3, LinalgError> {
    let n2 = b.norm_squared();
    if b.norm() <= 1e-12 {
        return Err(LinalgError::DegenerateDirection);
    }
    Ok(b * (a.dot(b) / n2))
}

pub fn across(a: &Vec3, b: &Vec3) -> Result<Vec3, LinalgError> {
    Ok(a - along(a, b)?)
}

pub fn is_parallel(a: &Vec3, b: &Vec3) -> bool {
    a.cross(b).norm() <= GEOM_TOL
}

pub fn is_perpendicular(a: &Vec3, b: &Vec3) -> bool {
    a.dot(b).abs() <= GEOM_TOL
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn paulion(a: &Vec3) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[c(a.z, 0.0), c(a.x, -a.y), c(a.x, a.y), c(-a.z, 0.0)],
    )
}

pub fn sigma_x() -> CMat {
    paulion(&Vec3::x())
}
pub fn sigma_y() -> CMat {
    paulion(&Vec3::y())
}
pub fn sigma_z() -> CMat {
    paulion(&Vec3::z())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// σ_{a1} ⊗ σ_{a0}; either argument may be `None` for the identity.
pub fn sigma2(a1: Option<&Vec3>, a0: Option<&Vec3>) -> CMat {
    let f = |a: Option<&Vec3>| a.map(paulion).unwrap_or_else(|| identity(2));
    kron(&f(a1), &f(a0))
}

/// e^{iθσ_axis}.
pub fn rot(axis: &Vec3, theta: f64) -> CMat {
    identity(2) * c(theta.cos(), 0.0) + paulion(axis) * c(0.0, theta.sin())
}

pub fn su2_from_pair(a: &UnitVec3, b: &UnitVec3) -> CMat {
    paulion(a) * paulion(b)
}

/// Writes an SU(2) matrix as e^{iθσ_w} with θ ∈ [0, π]; w = ẑ when θ ∈ {0, π}.
pub fn su2_axis_angle(u: &CMat) -> (UnitVec3, f64) {
    let cos = (0.5 * (u[(0, 0)] + u[(1, 1)]).re).clamp(-1.0, 1.0);
    // u = cos + i sin σ_w: read sin·w from the traceless part.
    let wz = 0.5 * (u[(0, 0)] - u[(1, 1)]).im;
    let wx = 0.5 * (u[(0, 1)] + u[(1, 0)]).im;
    let wy = 0.5 * (u[(0, 1)] - u[(1, 0)]).re;
    let sw = Vec3::new(wx, wy, wz);
    let s = sw.norm();
    let theta = s.atan2(cos);
    match UnitVec3::normalize(sw) {
        Ok(w) if s > 1e-14 => (w, theta),
        _ => (UnitVec3::z(), if cos >= 0.0 { 0.0 } else { std::f64::consts::PI }),
    }
}

/// Unit vectors (a, b) with σ_a σ_b = U.
///
/// With an anchor perpendicular to the rotation axis, the first vector equals
/// the anchor.
pub fn pair_from_su2(
    u: &CMat,
    anchor: Option<&UnitVec3>,
) -> Result<(UnitVec3, UnitVec3), LinalgError> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(LinalgError::Contract("pair_from_su2 needs a 2x2 matrix".into()));
    }
    let det = u.determinant();
    if (det - c(1.0, 0.0)).norm() > 1e-10 || !is_unitary(u, 1e-10) {
        return Err(LinalgError::Contract(format!("not in SU(2): det = {det}")));
    }
    let (w, theta) = su2_axis_angle(u);
    let (ct, st) = (theta.cos(), theta.sin());
    if st.abs() <= 1e-12 {
        let a = anchor.copied().unwrap_or_else(UnitVec3::x);
        let b = if ct > 0.0 { a } else { -a };
        return Ok((a, b));
    }
    let a = match anchor {
        Some(a) => {
            if a.dot(&w).abs() > 1e-9 {
                return Err(LinalgError::Anchor([a.x, a.y, a.z]));
            }
            UnitVec3::normalize(across(a, &w)?)?
        }
        None => complete_rhon(&w).f2,
    };
    let b = UnitVec3::normalize(a.v() * ct + w.cross(&a) * st)?;
    Ok((a, b))
}

/// Reflection of `a` on `r`: the along part kept, the across part negated.
pub fn reflect(a: &UnitVec3, r: &UnitVec3) -> UnitVec3 {
    let al = r.v() * a.dot(r);
    UnitVec3::normalize_or(al - (a.v() - al), *a)
}

pub fn is_unitary(m: &CMat, tol: f64) -> bool {
    let n = m.nrows();
    (m.adjoint() * m - identity(n)).norm() <= tol * (n as f64).max(1.0)
}

/// A / det(A)^{1/n} with the principal branch of the root.
pub fn special_counterpart(a: &CMat) -> Result<CMat, LinalgError> {
    if !is_unitary(a, 1e-10) {
        return Err(LinalgError::Contract("special_counterpart needs a unitary".into()));
    }
    let n = a.nrows() as f64;
    let det = a.determinant();
    let root = C64::from_polar(1.0, principal_arg(det) / n);
    Ok(a / root)
}

/// Argument in (−π, π].
pub fn principal_arg(z: C64) -> f64 {
    let t = z.arg();
    if t <= -std::f64::consts::PI {
        t + 2.0 * std::f64::consts::PI
    } else {
        t
    }
}

pub fn gamma(m: &CMat) -> RMat3 {
    let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
    RMat3::from_fn(|i, j| {
        let s = sigma2(Some(&axes[i]), Some(&axes[j]));
        0.25 * (s * m).trace().re
    })
}

pub fn gamma_inv(l: &RMat3) -> CMat {
    let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
    let mut out = CMat::zeros(4, 4);
    for i in 0..3 {
        for j in 0..3 {
            if l[(i, j)] != 0.0 {
                out += sigma2(Some(&axes[i]), Some(&axes[j])) * c(l[(i, j)], 0.0);
            }
        }
    }
    out
}

/// Deterministic completion of `u` to a right-handed orthonormal basis.
pub fn complete_rhon(u: &UnitVec3) -> RhonBasis {
    let comps = [u.x.abs(), u.y.abs(), u.z.abs()];
    let mut k = 0;
    for i in 1..3 {
        if comps[i] < comps[k] {
            k = i;
        }
    }
    let e = Vec3::ith(k, 1.0);
    let f2 = UnitVec3::new_unchecked((e - u.v() * e.dot(u)).normalize());
    let f3 = UnitVec3::new_unchecked(u.cross(&f2).normalize());
    RhonBasis { f1: *u, f2, f3 }
}

/// Right-handed basis whose j-th vector (1-based) is `u`.
pub fn rhon_with(u: &UnitVec3, j: usize) -> RhonBasis {
    let b = complete_rhon(u);
    match j {
        1 => b,
        2 => RhonBasis { f1: b.f3, f2: b.f1, f3: b.f2 },
        _ => RhonBasis { f1: b.f2, f2: b.f3, f3: b.f1 },
    }
}

/// Result of [`simultaneous_svd`]: A = U·diag(da)·Vᵀ and B = U·diag(db)·Vᵀ.
#[derive(Debug, Clone)]
pub struct SimSvd {
    pub u: DMatrix<f64>,
    pub da: Vec<f64>,
    pub db: Vec<f64>,
    pub v: DMatrix<f64>,
}

fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

/// Simultaneous SVD of two real square matrices satisfying the left and right
/// commutator conditions. Entries of `da` are made non-negative.
pub fn simultaneous_svd(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<SimSvd, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(LinalgError::Argument("simultaneous_svd needs equal square shapes".into()));
    }
    let scale = a.norm().max(b.norm()).max(1.0);
    let comm_l = (a.transpose() * b - b.transpose() * a).norm();
    let comm_r = (a * b.transpose() - b * a.transpose()).norm();
    let comm = comm_l.max(comm_r);
    if comm > 1e-8 * scale {
        return Err(LinalgError::NotSimultaneouslyDiagonalizable(comm));
    }
    let ata = a.transpose() * a;
    let btb = b.transpose() * b;
    let atb = a.transpose() * b;
    let atb = (&atb + atb.transpose()) * 0.5;

    let (vals, mut v) = sorted_eigen(&(&ata + &btb));
    // Re-diagonalize inside clusters of (numerically) equal eigenvalues.
    let tol = 1e-9 * scale * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[end - 1] - vals[end]).abs() <= tol {
            end += 1;
        }
        if end - start > 1 {
            let basis = v.columns(start, end - start).into_owned();
            let h = &ata + &atb * std::f64::consts::FRAC_1_SQRT_2;
            let sub = basis.transpose() * h * &basis;
            let (_, w) = sorted_eigen(&sub);
            let rotated = &basis * w;
            v.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }

    let mut u = DMatrix::<f64>::zeros(n, n);
    let mut da = vec![0.0; n];
    let mut db = vec![0.0; n];
    let mut filled = vec![false; n];
    let small = 1e-12 * scale;
    for k in 0..n {
        let vk = v.column(k).into_owned();
        let av = a * &vk;
        let bv = b * &vk;
        let (na, nb) = (av.norm(), bv.norm());
        if na.max(nb) <= small {
            continue;
        }
        let mut uk = if na >= nb { av / na } else { bv / nb };
        let mut x = uk.dot(&(a * &vk));
        if x < 0.0 {
            uk = -uk;
            x = -x;
        }
        da[k] = x;
        db[k] = uk.dot(&(b * &vk));
        u.set_column(k, &uk);
        filled[k] = true;
    }
    // Complete U on the joint null space by Gram-Schmidt over the standard basis.
    for k in 0..n {
        if filled[k] {
            continue;
        }
        for e in 0..n {
            let mut cand = DMatrix::<f64>::zeros(n, 1).column(0).into_owned();
            cand[e] = 1.0;
            for j in 0..n {
                if filled[j] {
                    let uj = u.column(j).into_owned();
                    cand -= &uj * uj.dot(&cand);
                }
            }
            let nn = cand.norm();
            if nn > 0.5 {
                u.set_column(k, &(cand / nn));
                filled[k] = true;
                break;
            }
        }
    }
    Ok(SimSvd { u, da, db, v })
}

/// Simultaneous SVD specialized to 3×3 matrices.
pub fn simultaneous_svd3(
    a: &RMat3,
    b: &RMat3,
) -> Result<(RMat3, [f64; 3], [f64; 3], RMat3), LinalgError> {
    let da = DMatrix::from_column_slice(3, 3, a.as_slice());
    let db = DMatrix::from_column_slice(3, 3, b.as_slice());
    let s = simultaneous_svd(&da, &db)?;
    let u = RMat3::from_column_slice(s.u.as_slice());
    let v = RMat3::from_column_slice(s.v.as_slice());
    Ok((u, [s.da[0], s.da[1], s.da[2]], [s.db[0], s.db[1], s.db[2]], v))
}

/// SVD of a real 2×2 matrix: M = U·diag(d)·Vᵀ with d ≥ 0.
pub fn svd2(m: &RMat2) -> (RMat2, [f64; 2], RMat2) {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v requested");
    (u, [svd.singular_values[0], svd.singular_values[1]], vt.transpose())
}

/// Dominant rank-one term σ·u·vᵀ of a 3×3 matrix (σ ≥ 0).
pub fn rank_one(m: &RMat3) -> (f64, Vec3, Vec3) {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v requested");
    let mut k = 0;
    for i in 1..3 {
        if svd.singular_values[i] > svd.singular_values[k] {
            k = i;
        }
    }
    (
        svd.singular_values[k],
        u.column(k).into_owned(),
        vt.row(k).transpose().into_owned(),
    )
}

/// Rotation matrix R with U σ_a U† = σ_{R a} for U ∈ SU(2).
pub fn su2_to_so3(u: &CMat) -> RMat3 {
    let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
    let ud = u.adjoint();
    RMat3::from_fn(|i, j| {
        let m = u * paulion(&axes[j]) * &ud;
        0.5 * (paulion(&axes[i]) * m).trace().re
    })
}
