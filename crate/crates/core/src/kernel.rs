//! Dispersion matrix `Lambda(k)`, its adjugate, `omega(k)`, the source
//! vectors and the matrix kernel `J(k, k1)` of the characteristic system.
//!
//! The complex 2x2 objects carry the layout `[[a, i k b], [i k c, d]]` with
//! real `a, b, c, d`; [`Reduced`] exposes those real scalars directly.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::moments::{MomentEngine, MomentIndex, QuadratureConfig};
use crate::spectrum::SpectrumParams;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Vec2 = [Complex64; 2];

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The moment indices that enter the kernel, as functions of `gamma`.
pub mod idx {
    use crate::moments::MomentIndex;

    fn i(r: u32, s: u32, m: f64, n: u32) -> MomentIndex {
        MomentIndex { r, s, m, n }
    }

    /// `T^{1,0}_{3g+4,2}`, diagonal entry (1,1).
    pub fn lambda11(g: f64) -> MomentIndex {
        i(1, 0, 3.0 * g + 4.0, 2)
    }
    /// `T^{1,1}_{2g+4,2}`, entry (1,2).
    pub fn lambda12(g: f64) -> MomentIndex {
        i(1, 1, 2.0 * g + 4.0, 2)
    }
    /// `T^{2,1}_{2g+4,2}`, entry (2,1).
    pub fn lambda21(g: f64) -> MomentIndex {
        i(2, 1, 2.0 * g + 4.0, 2)
    }
    /// `T^{0,2}_{3g+2,0}`, diagonal entry (2,2).
    pub fn lambda22(g: f64) -> MomentIndex {
        i(0, 2, 3.0 * g + 2.0, 0)
    }
    /// `T^{3,0}_{g+6,4}`: `Lambda11 = (3k^2/g1) T^{3,0}_{g+6,4}`.
    pub fn a_hat(g: f64) -> MomentIndex {
        i(3, 0, g + 6.0, 4)
    }
    /// `T^{2,2}_{g+4,2}`: `Lambda22 = (k^2/g2) T^{2,2}_{g+4,2}`.
    pub fn d_hat(g: f64) -> MomentIndex {
        i(2, 2, g + 4.0, 2)
    }
    /// `T^{1,0}_{2g+4,4}`, first component of `T1`.
    pub fn t1_first(g: f64) -> MomentIndex {
        i(1, 0, 2.0 * g + 4.0, 4)
    }
    /// `T^{0,1}_{3g+2,2}`, second component of `T1`.
    pub fn t1_second(g: f64) -> MomentIndex {
        i(0, 1, 3.0 * g + 2.0, 2)
    }
    /// `T^{1,0}_{2g+5,3}`, first component of `T2`.
    pub fn t2_first(g: f64) -> MomentIndex {
        i(1, 0, 2.0 * g + 5.0, 3)
    }
    /// `T^{0,1}_{3g+3,1}`, second component of `T2`.
    pub fn t2_second(g: f64) -> MomentIndex {
        i(0, 1, 3.0 * g + 3.0, 1)
    }
    /// `T^{2,1}_{g+4,4}`: `T^{0,1}_{3g+2,2}(0) - T^{0,1}_{3g+2,2}(k) = k^2 T^{2,1}_{g+4,4}(k)`.
    pub fn t1_second_drop(g: f64) -> MomentIndex {
        i(2, 1, g + 4.0, 4)
    }
    /// `T^{2,1}_{g+5,3}`: `T^{0,1}_{3g+3,1}(0) - T^{0,1}_{3g+3,1}(k) = k^2 T^{2,1}_{g+5,3}(k)`.
    pub fn t2_second_drop(g: f64) -> MomentIndex {
        i(2, 1, g + 5.0, 3)
    }
    /// `J^{1,0}_{5g+4,3}`, kernel entry (1,1).
    pub fn j11(g: f64) -> MomentIndex {
        i(1, 0, 5.0 * g + 4.0, 3)
    }
    /// `J^{1,1}_{4g+4,3}`, kernel entry (1,2).
    pub fn j12(g: f64) -> MomentIndex {
        i(1, 1, 4.0 * g + 4.0, 3)
    }
    /// `J^{2,1}_{4g+4,3}`, kernel entry (2,1).
    pub fn j21(g: f64) -> MomentIndex {
        i(2, 1, 4.0 * g + 4.0, 3)
    }
    /// `J^{0,2}_{5g+2,1}`, kernel entry (2,2).
    pub fn j22(g: f64) -> MomentIndex {
        i(0, 2, 5.0 * g + 2.0, 1)
    }
    /// `J^{2,2}_{3g+4,3}`: `J22(0, k1) - J22(k, k1) = k^2 J^{2,2}_{3g+4,3}(k, k1)`.
    pub fn j22_drop(g: f64) -> MomentIndex {
        i(2, 2, 3.0 * g + 4.0, 3)
    }
    /// `T^{0,2}_{3g+2,1}`, the reduction of `J^{0,2}_{5g+2,1}` at one zero wavenumber.
    pub fn j22_at_zero(g: f64) -> MomentIndex {
        i(0, 2, 3.0 * g + 2.0, 1)
    }
    /// `T^{1,0}_{3g+4,3}`, the reduction of `J^{1,0}_{5g+4,3}` at one zero wavenumber.
    pub fn j11_at_zero(g: f64) -> MomentIndex {
        i(1, 0, 3.0 * g + 4.0, 3)
    }
}

/// Real scalars of `Lambda(k) = [[a, i k b], [i k c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reduced {
    pub k: f64,
    /// `1 - (3/g1) T^{1,0}_{3g+4,2}(k)`.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `1 - (1/g2) T^{0,2}_{3g+2,0}(k)`.
    pub d: f64,
    /// `a / k^2`, from its own moment; `None` at `k = 0` where it may diverge.
    pub a_hat: Option<f64>,
    /// `d / k^2`, likewise.
    pub d_hat: Option<f64>,
    /// `det Lambda / k^2 = k^2 a_hat d_hat + b c`.
    pub omega: f64,
    /// Largest relative quadrature error among the moments used.
    pub rel_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelBundle {
    pub k: f64,
    pub lambda_mat: Mat2,
    pub adjugate: Mat2,
    pub omega: f64,
    /// Determinant assembled from the matrix entries themselves.
    pub det: Complex64,
    pub t1: Vec2,
    pub t2: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelMatrix {
    pub k: f64,
    pub k1: f64,
    pub entries: Mat2,
}

/// Kernel assembly over a shared moment engine.
#[derive(Debug, Clone, Copy)]
pub struct Kernel<'e> {
    engine: &'e MomentEngine,
}

impl<'e> Kernel<'e> {
    pub fn new(engine: &'e MomentEngine) -> Self {
        Kernel { engine }
    }

    pub fn engine(&self) -> &'e MomentEngine {
        self.engine
    }

    fn t(&self, i: MomentIndex, k: f64, err: &mut f64) -> Result<f64> {
        let v = self.engine.t(i, k)?;
        *err = err.max(v.rel_err());
        Ok(v.value)
    }

    pub fn reduced(&self, k: f64) -> Result<Reduced> {
        let g = self.engine.gamma();
        let s = self.engine.scalars();
        let mut err: f64 = 0.0;
        let b = self.t(idx::lambda12(g), k, &mut err)? / s.g2;
        let c = 3.0 * self.t(idx::lambda21(g), k, &mut err)? / s.g1;
        if k == 0.0 {
            // Both diagonal moments reduce to exactly the normalisations.
            return Ok(Reduced { k, a: 0.0, b, c, d: 0.0, a_hat: None, d_hat: None, omega: b * c, rel_err: err });
        }
        // 1 - (3/g1) T(k) = (3/g1) (T(0) - T(k)) since T(0) = g1/3, and likewise for
        // the (2,2) entry; the difference is integrated directly to avoid cancellation.
        let drop = |i, err: &mut f64| -> Result<f64> {
            let v = self.engine.t_drop(i, k)?;
            *err = err.max(v.rel_err());
            Ok(v.value)
        };
        let a = 3.0 * drop(idx::lambda11(g), &mut err)? / s.g1;
        let d = drop(idx::lambda22(g), &mut err)? / s.g2;
        let a_hat = 3.0 * self.t(idx::a_hat(g), k, &mut err)? / s.g1;
        let d_hat = self.t(idx::d_hat(g), k, &mut err)? / s.g2;
        let omega = k * k * a_hat * d_hat + b * c;
        Ok(Reduced { k, a, b, c, d, a_hat: Some(a_hat), d_hat: Some(d_hat), omega, rel_err: err })
    }

    pub fn bundle(&self, k: f64) -> Result<KernelBundle> {
        let r = self.reduced(k)?;
        let lambda_mat = [[re(r.a), im(k * r.b)], [im(k * r.c), re(r.d)]];
        let adjugate = [[re(r.d), im(-k * r.b)], [im(-k * r.c), re(r.a)]];
        let det = lambda_mat[0][0] * lambda_mat[1][1] - lambda_mat[0][1] * lambda_mat[1][0];
        let (t1, t2) = self.source_vectors(k)?;
        Ok(KernelBundle { k, lambda_mat, adjugate, omega: r.omega, det, t1, t2 })
    }

    /// Relative residuals of the two diagonal identities
    /// `1 - (3/g1) T^{1,0}_{3g+4,2} = (3k^2/g1) T^{3,0}_{g+6,4}` and
    /// `1 - (1/g2) T^{0,2}_{3g+2,0} = (k^2/g2) T^{2,2}_{g+4,2}`.
    pub fn identity_residuals(&self, k: f64) -> Result<(f64, f64)> {
        if k == 0.0 {
            return Ok((0.0, 0.0));
        }
        let r = self.reduced(k)?;
        let rel = |lhs: f64, rhs: f64| {
            let scale = if lhs == 0.0 { 1.0 } else { lhs.abs() };
            (lhs - rhs).abs() / scale
        };
        let k2 = k * k;
        Ok((rel(r.a, k2 * r.a_hat.unwrap()), rel(r.d, k2 * r.d_hat.unwrap())))
    }

    pub fn source_vectors(&self, k: f64) -> Result<(Vec2, Vec2)> {
        let g = self.engine.gamma();
        let mut err = 0.0;
        let t1 = [
            im(k * self.t(idx::t1_first(g), k, &mut err)?),
            re(-self.t(idx::t1_second(g), k, &mut err)?),
        ];
        let t2 = [
            im(k * self.t(idx::t2_first(g), k, &mut err)?),
            re(-self.t(idx::t2_second(g), k, &mut err)?),
        ];
        Ok((t1, t2))
    }

    /// Real moments behind `J(k, k1)`: `(J^{1,0}_{5g+4,3}, J^{1,1}_{4g+4,3}, J^{2,1}_{4g+4,3}, J^{0,2}_{5g+2,1})`.
    pub fn kernel_moments(&self, k: f64, k1: f64) -> Result<[f64; 4]> {
        let g = self.engine.gamma();
        let e = self.engine;
        Ok([
            e.j(idx::j11(g), k, k1)?.value,
            e.j(idx::j12(g), k, k1)?.value,
            e.j(idx::j21(g), k, k1)?.value,
            e.j(idx::j22(g), k, k1)?.value,
        ])
    }

    pub fn matrix(&self, k: f64, k1: f64) -> Result<KernelMatrix> {
        let s = self.engine.scalars();
        let [j11, j12, j21, j22] = self.kernel_moments(k, k1)?;
        let entries = [
            [re(-3.0 * j11 / s.g1), im(k * j12 / s.g2)],
            [im(3.0 * k * j21 / s.g1), re(-j22 / s.g2)],
        ];
        Ok(KernelMatrix { k, k1, entries })
    }
}

impl KernelBundle {
    /// `Lambda(-k)` from the parity of each entry: even real diagonal, odd imaginary off-diagonal.
    pub fn lambda_at_negative_k(&self) -> Mat2 {
        let m = &self.lambda_mat;
        [[m[0][0], -m[0][1]], [-m[1][0], m[1][1]]]
    }

    /// `lambda(k) = det Lambda(k) = k^2 omega(k)` through `omega`.
    pub fn lambda_from_omega(&self) -> f64 {
        self.k * self.k * self.omega
    }
}

/// `Lambda(k)`, `D(k)`, `omega(k)`, `T1(k)`, `T2(k)` for one parameter set.
pub fn dispersion_matrix(k: f64, gamma: f64, sp: &SpectrumParams, cfg: &QuadratureConfig) -> Result<KernelBundle> {
    let e = MomentEngine::new(gamma, *sp, *cfg)?;
    Kernel::new(&e).bundle(k)
}

pub fn identity_residuals(k: f64, gamma: f64, sp: &SpectrumParams, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let e = MomentEngine::new(gamma, *sp, *cfg)?;
    Kernel::new(&e).identity_residuals(k)
}

pub fn source_vectors(k: f64, gamma: f64, sp: &SpectrumParams, cfg: &QuadratureConfig) -> Result<(Vec2, Vec2)> {
    let e = MomentEngine::new(gamma, *sp, *cfg)?;
    Kernel::new(&e).source_vectors(k)
}

pub fn kernel_matrix(
    k: f64,
    k1: f64,
    gamma: f64,
    sp: &SpectrumParams,
    cfg: &QuadratureConfig,
) -> Result<KernelMatrix> {
    let e = MomentEngine::new(gamma, *sp, *cfg)?;
    Kernel::new(&e).matrix(k, k1)
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}
