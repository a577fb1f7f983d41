//! Scalar normalisation integrals and the wavenumber-dependent moments
//! `T^{r,s}_{m,n}(k)` and `J^{r,s}_{m,n}(k, k1)`.
//!
//! All moments reduce to a single integral over the momentum `C` once the
//! direction cosine has been integrated in closed form (see [`crate::angular`]).
//! The radial integrand is assembled in logarithms and integrated adaptively
//! on `[C_floor, C_max]`; the power-law piece below `C_floor` is added
//! analytically.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::angular::{self, Scaled, MAX_MU_POWER};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::spectrum::{Excitation, SpectrumParams};

pub const GAMMA_MAX: f64 = 20.0;

/// Index tuple `(r, s, m, n)`: powers of `alpha`, `eps`, `C` and `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentIndex {
    pub r: u32,
    pub s: u32,
    pub m: f64,
    pub n: u32,
}

impl MomentIndex {
    pub fn new(r: u32, s: u32, m: f64, n: u32) -> Result<Self> {
        if n > MAX_MU_POWER {
            return Err(domain(format!("mu exponent {n} exceeds {MAX_MU_POWER}")));
        }
        if !m.is_finite() {
            return Err(domain(format!("C exponent must be finite, got {m}")));
        }
        Ok(MomentIndex { r, s, m, n })
    }

    /// Exponent `e` of the small-momentum behaviour `C^e` of the radial
    /// integrand, with one resolvent per entry of `ks`.
    pub fn small_c_exponent(&self, gamma: f64, sp: &SpectrumParams, ks: &[f64]) -> f64 {
        // beta: group velocity ~ C^beta; 0 with a sound speed, 1 without.
        let beta = if sp.w0 > 0.0 { 0.0 } else { 1.0 };
        let (r, s) = (self.r as f64, self.s as f64);
        let numerator = if beta == 0.0 { self.m - r + s - 2.0 } else { self.m + 2.0 * s - 4.0 };
        let zero = ks.iter().filter(|&&k| k == 0.0).count() as f64;
        let d = ks.iter().filter(|&&k| k > 0.0).count() as f64;
        let mut angular = -2.0 * gamma * zero;
        if d > 0.0 {
            let n1 = self.n as f64 + 1.0;
            angular += if beta >= gamma {
                -2.0 * d * gamma
            } else if n1 < 2.0 * d {
                -2.0 * d * gamma - n1 * (beta - gamma)
            } else {
                -2.0 * d * beta
            };
        }
        numerator + angular
    }

    fn check(&self, gamma: f64, sp: &SpectrumParams, ks: &[f64]) -> Result<f64> {
        let e = self.small_c_exponent(gamma, sp, ks);
        if e <= -1.0 {
            return Err(Error::NonIntegrable { index: self.to_string(), exponent: e });
        }
        Ok(e)
    }

    fn key(&self) -> (u32, u32, u64, u32) {
        (self.r, self.s, self.m.to_bits(), self.n)
    }
}

impl fmt::Display for MomentIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(r={}, s={}, m={}, n={})", self.r, self.s, self.m, self.n)
    }
}

/// Upper cutoff rule for the momentum integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CMaxPolicy {
    /// Stop where the excitation energy reaches this value.
    EnergyCutoff(f64),
}

/// Compactifying map `k = scale * t / (1 - t)` with Gauss-Legendre nodes in `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMap {
    pub scale: f64,
    pub nodes: usize,
    pub max_nodes: usize,
    /// Relative change in `eps1` under node doubling accepted as converged.
    pub refine_tol: f64,
}

impl Default for KMap {
    fn default() -> Self {
        KMap { scale: 1.0, nodes: 128, max_nodes: 2048, refine_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub c_max_policy: CMaxPolicy,
    pub max_subdivisions: usize,
    pub k_map: KMap,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            c_max_policy: CMaxPolicy::EnergyCutoff(750.0),
            max_subdivisions: 2000,
            k_map: KMap::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadratureConfig { rel_tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-4) {
            return Err(domain(format!("rel_tol must lie in (0, 1e-4], got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(domain("abs_tol must be >= 0"));
        }
        if self.max_subdivisions < 10 {
            return Err(domain("max_subdivisions must be >= 10"));
        }
        let CMaxPolicy::EnergyCutoff(e) = self.c_max_policy;
        if !(e >= 50.0 && e <= 750.0) {
            return Err(domain(format!("energy cutoff must lie in [50, 750], got {e}")));
        }
        let km = &self.k_map;
        if !(km.scale > 0.0) || km.nodes < 8 || km.max_nodes < km.nodes || !(km.refine_tol > 0.0) {
            return Err(domain("invalid k-map settings"));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance { rel: self.rel_tol, abs: self.abs_tol, max_subdivisions: self.max_subdivisions }
    }
}

/// The five normalisation integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMoments {
    pub g1: f64,
    pub g2: f64,
    pub g_eps2: f64,
    pub g_eps3: f64,
    pub g_alpha_eps: f64,
    pub gamma: f64,
    pub spectrum: SpectrumParams,
    pub cfg: QuadratureConfig,
    /// Largest relative error estimate among the five.
    pub max_rel_err: f64,
}

/// One evaluated `T` or `J` moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub index: MomentIndex,
    pub k: f64,
    pub k1: Option<f64>,
    pub value: f64,
    pub abs_err: f64,
}

impl MomentValue {
    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_err
        } else {
            self.abs_err / self.value.abs()
        }
    }
}

pub fn validate_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=GAMMA_MAX).contains(&gamma) {
        return Err(domain(format!("gamma must lie in [0, {GAMMA_MAX}], got {gamma}")));
    }
    Ok(())
}

fn validate_k(k: f64) -> Result<()> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(domain(format!("wavenumber must be finite and >= 0, got {k}")));
    }
    Ok(())
}

type CacheKey = (u8, (u32, u32, u64, u32), u64, u64);

/// Moment evaluator for one `(gamma, spectrum, config)` triple, with a shared
/// memo table. Safe to use from several threads.
pub struct MomentEngine {
    gamma: f64,
    sp: SpectrumParams,
    cfg: QuadratureConfig,
    c_max: f64,
    scalars: ScalarMoments,
    cache: Mutex<HashMap<CacheKey, MomentValue>>,
}

impl fmt::Debug for MomentEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentEngine")
            .field("gamma", &self.gamma)
            .field("sp", &self.sp)
            .field("cfg", &self.cfg)
            .finish()
    }
}

impl MomentEngine {
    pub fn new(gamma: f64, sp: SpectrumParams, cfg: QuadratureConfig) -> Result<Self> {
        validate_gamma(gamma)?;
        sp.validate()?;
        cfg.validate()?;
        let CMaxPolicy::EnergyCutoff(e_max) = cfg.c_max_policy;
        let c_max = sp.momentum_at_energy(e_max);
        let mut engine = MomentEngine {
            gamma,
            sp,
            cfg,
            c_max,
            scalars: ScalarMoments {
                g1: 0.0,
                g2: 0.0,
                g_eps2: 0.0,
                g_eps3: 0.0,
                g_alpha_eps: 0.0,
                gamma,
                spectrum: sp,
                cfg,
                max_rel_err: 0.0,
            },
            cache: Mutex::new(HashMap::new()),
        };
        engine.scalars = engine.compute_scalars()?;
        Ok(engine)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn spectrum(&self) -> &SpectrumParams {
        &self.sp
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    pub fn scalars(&self) -> &ScalarMoments {
        &self.scalars
    }

    /// Number of memoised moments.
    pub fn cache_len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    fn compute_scalars(&self) -> Result<ScalarMoments> {
        let g = self.gamma;
        let idx = |r, s, m| MomentIndex { r, s, m, n: 0 };
        let one = |i: MomentIndex| self.radial(i, &[], |_| Scaled { ln_scale: 0.0, mantissa: 1.0 });
        let g1 = one(idx(1, 0, g + 4.0))?;
        let g2 = one(idx(0, 2, g + 2.0))?;
        let ge2 = one(idx(0, 1, g + 2.0))?;
        let ge3 = one(idx(0, 1, g + 3.0))?;
        let gae = one(idx(2, 1, 4.0))?;
        let max_rel_err = [g1, g2, ge2, ge3, gae]
            .iter()
            .map(|v| v.1 / v.0.abs())
            .fold(0.0, f64::max);
        Ok(ScalarMoments {
            g1: g1.0,
            g2: g2.0,
            g_eps2: ge2.0,
            g_eps3: ge3.0,
            g_alpha_eps: gae.0,
            gamma: g,
            spectrum: self.sp,
            cfg: self.cfg,
            max_rel_err,
        })
    }

    /// Lower edge of the numerical range. Below it the integrand is a pure
    /// power law and `C^(2 gamma)` would underflow the resolvent ratio.
    fn c_floor(&self, kmax: f64) -> f64 {
        let vmax = self.sp.w0.max(1.0);
        let headroom = 660.0 - 2.0 * (1.0 + kmax * vmax).ln();
        (-headroom / (2.0 * self.gamma.max(0.5))).exp()
    }

    fn breakpoints(&self, c_floor: f64) -> Vec<f64> {
        let mut pts = vec![c_floor];
        let c_lo = self.sp.momentum_at_energy(1e-4);
        let mut c = c_floor;
        while c * 100.0 < c_lo {
            c *= 100.0;
            pts.push(c);
        }
        let mut e: f64 = 1e-4;
        while e < 1.0 {
            e *= 4.0;
            pts.push(self.sp.momentum_at_energy(e.min(1.0)));
        }
        let mut e = 1.0;
        while e < 512.0 {
            e *= 2.0;
            pts.push(self.sp.momentum_at_energy(e));
        }
        pts.retain(|&x| x > c_floor && x < self.c_max);
        pts.insert(0, c_floor);
        pts.push(self.c_max);
        pts.dedup();
        pts
    }

    /// `int alpha^r eps^s C^m g(C) * angular(C) dC` where `angular` returns a
    /// scaled direction-cosine factor for the excitation at `C`.
    fn radial<F>(&self, idx: MomentIndex, ks: &[f64], angular: F) -> Result<(f64, f64)>
    where
        F: Fn(&Excitation) -> Scaled,
    {
        let e = idx.check(self.gamma, &self.sp, ks)?;
        let (r, s, m) = (idx.r as f64, idx.s as f64, idx.m);
        let sp = self.sp;
        let f = |c: f64| -> f64 {
            let x = Excitation::at(c, &sp);
            let mut ln = m * x.ln_c + x.ln_g;
            if r != 0.0 {
                ln += r * x.ln_alpha;
            }
            if s != 0.0 {
                ln += s * x.ln_eps;
            }
            let a = angular(&x);
            a.mantissa * (ln - a.ln_scale).exp()
        };
        let kmax = ks.iter().cloned().fold(0.0, f64::max);
        let c_floor = self.c_floor(kmax);
        let breaks = self.breakpoints(c_floor);
        let res = integrate(f, &breaks, self.cfg.tolerance())?;
        let tail = f(c_floor) * c_floor / (e + 1.0);
        Ok((res.value + tail, res.abs_err + 1e-2 * tail.abs()))
    }

    fn lookup(&self, key: &CacheKey) -> Option<MomentValue> {
        self.cache.lock().unwrap().get(key).copied()
    }

    fn store(&self, key: CacheKey, v: MomentValue) {
        self.cache.lock().unwrap().insert(key, v);
    }

    /// `T^{r,s}_{m,n}(k)`.
    pub fn t(&self, idx: MomentIndex, k: f64) -> Result<MomentValue> {
        validate_k(k)?;
        let key = (0u8, idx.key(), k.to_bits(), 0u64);
        if let Some(v) = self.lookup(&key) {
            return Ok(v);
        }
        let two_gamma = 2.0 * self.gamma;
        let ln_k = k.ln();
        let n = idx.n;
        let (value, abs_err) = self.radial(idx, &[k], |x| {
            let ln_a = two_gamma * x.ln_c;
            let ln_b = if k > 0.0 { Some(2.0 * (ln_k + x.ln_vel)) } else { None };
            angular::single(n, ln_a, ln_b)
        })?;
        let v = MomentValue { index: idx, k, k1: None, value, abs_err };
        self.store(key, v);
        Ok(v)
    }

    /// `T^{r,s}_{m,n}(0) - T^{r,s}_{m,n}(k)` as one integral, subtracting the
    /// direction-cosine factors node by node. This keeps `1 - T(k)/T(0)`
    /// accurate when it is far below one.
    pub fn t_drop(&self, idx: MomentIndex, k: f64) -> Result<MomentValue> {
        validate_k(k)?;
        idx.check(self.gamma, &self.sp, &[0.0])?;
        let key = (2u8, idx.key(), k.to_bits(), 0u64);
        if let Some(v) = self.lookup(&key) {
            return Ok(v);
        }
        if k == 0.0 {
            let v = MomentValue { index: idx, k, k1: None, value: 0.0, abs_err: 0.0 };
            self.store(key, v);
            return Ok(v);
        }
        let two_gamma = 2.0 * self.gamma;
        let ln_k = k.ln();
        let n = idx.n;
        let (value, abs_err) = self.radial(idx, &[k], |x| {
            angular::single_drop(n, two_gamma * x.ln_c, 2.0 * (ln_k + x.ln_vel))
        })?;
        let v = MomentValue { index: idx, k, k1: None, value, abs_err };
        self.store(key, v);
        Ok(v)
    }

    /// `J^{r,s}_{m,n}(k, k1)`; symmetric in its two wavenumbers.
    pub fn j(&self, idx: MomentIndex, k: f64, k1: f64) -> Result<MomentValue> {
        validate_k(k)?;
        validate_k(k1)?;
        let (lo, hi) = if k <= k1 { (k, k1) } else { (k1, k) };
        let key = (1u8, idx.key(), lo.to_bits(), hi.to_bits());
        if let Some(v) = self.lookup(&key) {
            return Ok(MomentValue { k, k1: Some(k1), ..v });
        }
        let two_gamma = 2.0 * self.gamma;
        let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
        let n = idx.n;
        let (value, abs_err) = self.radial(idx, &[lo, hi], |x| {
            let ln_a = two_gamma * x.ln_c;
            let b = |kk: f64, ln_kk: f64| if kk > 0.0 { Some(2.0 * (ln_kk + x.ln_vel)) } else { None };
            angular::double(n, ln_a, b(lo, ln_lo), b(hi, ln_hi))
        })?;
        let v = MomentValue { index: idx, k: lo, k1: Some(hi), value, abs_err };
        self.store(key, v);
        Ok(MomentValue { k, k1: Some(k1), ..v })
    }
}

/// The five normalisation integrals for one parameter set.
pub fn scalar_moments(gamma: f64, sp: &SpectrumParams, cfg: &QuadratureConfig) -> Result<ScalarMoments> {
    Ok(*MomentEngine::new(gamma, *sp, *cfg)?.scalars())
}

/// One-shot `T^{r,s}_{m,n}(k)`.
pub fn t_moment(idx: MomentIndex, k: f64, gamma: f64, sp: &SpectrumParams, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(MomentEngine::new(gamma, *sp, *cfg)?.t(idx, k)?.value)
}

/// One-shot `J^{r,s}_{m,n}(k, k1)`.
pub fn j_moment(
    idx: MomentIndex,
    k: f64,
    k1: f64,
    gamma: f64,
    sp: &SpectrumParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(MomentEngine::new(gamma, *sp, *cfg)?.j(idx, k, k1)?.value)
}
