//! Independent reference values used by the self-check command and the tests:
//! closed-form Gamma-zeta expressions for the limiting spectra and a nested
//! two-dimensional quadrature that integrates the direction cosine
//! numerically instead of in closed form.

use statrs::function::gamma::gamma;

use crate::error::{domain, Result};
use crate::moments::{MomentIndex, ScalarMoments};
use crate::quadrature::{integrate, Tolerance};
use crate::spectrum::{alpha, bose_weight, energy, group_velocity, SpectrumParams};

/// Bernoulli numbers `B_2, B_4, ..., B_20`.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta for real `s > 1`: direct summation of the first terms plus
/// an Euler-Maclaurin tail.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const N: usize = 24;
    let mut sum = 0.0;
    for n in (1..N).rev() {
        sum += (n as f64).powf(-s);
    }
    let nf = N as f64;
    let mut tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) / (2j)!
    let mut coef = s / 2.0;
    let mut power = nf.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        let term = b * coef * power;
        tail += term;
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
        let k = 2.0 * (j as f64 + 1.0);
        coef *= (s + k - 1.0) * (s + k) / ((k + 1.0) * (k + 2.0));
        power /= nf * nf;
    }
    sum + tail
}

/// `int_0^inf x^s e^x / (e^x - 1)^2 dx = Gamma(s+1) zeta(s)`.
pub fn bose_power_integral(s: f64) -> f64 {
    gamma(s + 1.0) * zeta(s)
}

/// Reference values of the five normalisation integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarReference {
    pub g1: f64,
    pub g2: f64,
    pub g_eps2: f64,
    pub g_eps3: f64,
    pub g_alpha_eps: f64,
}

/// Linear spectrum `eps = w0 C`.
pub fn phonon_scalars(gamma_c: f64, w0: f64) -> ScalarReference {
    let g = gamma_c;
    ScalarReference {
        g1: w0.powf(-(g + 3.0)) * bose_power_integral(g + 3.0),
        g2: w0.powf(-(g + 3.0)) * bose_power_integral(g + 4.0),
        g_eps2: w0.powf(-(g + 3.0)) * bose_power_integral(g + 3.0),
        g_eps3: w0.powf(-(g + 4.0)) * bose_power_integral(g + 4.0),
        g_alpha_eps: bose_power_integral(3.0) / w0,
    }
}

/// `int_0^inf C^p G(C^2/2) dC` after `t = C^2 / 2`.
fn free_power(p: f64) -> f64 {
    2f64.powf((p - 1.0) / 2.0) * bose_power_integral((p - 1.0) / 2.0)
}

/// Quadratic spectrum `eps = C^2 / 2`.
pub fn free_scalars(gamma_c: f64) -> ScalarReference {
    let g = gamma_c;
    ScalarReference {
        g1: free_power(g + 4.0),
        g2: 0.25 * free_power(g + 6.0),
        g_eps2: 0.5 * free_power(g + 4.0),
        g_eps3: 0.5 * free_power(g + 5.0),
        g_alpha_eps: 0.5 * free_power(6.0),
    }
}

/// Closed forms for whichever limiting spectrum `sp` is, if any.
pub fn closed_form_scalars(gamma_c: f64, sp: &SpectrumParams) -> Option<ScalarReference> {
    use crate::spectrum::SpectrumMode::*;
    match sp.mode {
        Phonon => Some(phonon_scalars(gamma_c, sp.w0)),
        Free => Some(free_scalars(gamma_c)),
        Bogoliubov if sp.w0 == 0.0 => Some(free_scalars(gamma_c)),
        Bogoliubov => None,
    }
}

/// Pairs `(computed, reference)` in the order g1, g2, g_eps2, g_eps3, g_alpha_eps.
pub fn scalar_pairs(got: &ScalarMoments, want: &ScalarReference) -> [(f64, f64); 5] {
    [
        (got.g1, want.g1),
        (got.g2, want.g2),
        (got.g_eps2, want.g_eps2),
        (got.g_eps3, want.g_eps3),
        (got.g_alpha_eps, want.g_alpha_eps),
    ]
}

fn inner_tol() -> Tolerance {
    Tolerance { rel: 1e-12, abs: 0.0, max_subdivisions: 2000 }
}

fn mu_breaks(a: f64, bmax: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    if bmax > a {
        let mut x = 1e-2 * (a / bmax).sqrt();
        while x < 1.0 {
            breaks.push(x);
            x *= 3.0;
        }
    }
    breaks.push(1.0);
    breaks
}

fn nested(idx: MomentIndex, ks: &[f64], gamma_c: f64, sp: &SpectrumParams) -> Result<f64> {
    if ks.iter().any(|k| !(*k >= 0.0)) {
        return Err(domain("wavenumbers must be >= 0"));
    }
    let radial = |c: f64| -> f64 {
        let e = energy(c, sp).unwrap();
        let al = alpha(c, sp).unwrap();
        let v = group_velocity(c, sp).unwrap();
        let g = bose_weight(c, sp).unwrap();
        let a = c.powf(2.0 * gamma_c);
        let bs: Vec<f64> = ks.iter().map(|k| k * k * v * v).collect();
        let pref = al.powi(idx.r as i32) * e.powi(idx.s as i32) * c.powf(idx.m) * g;
        if pref == 0.0 {
            return 0.0;
        }
        let f = |mu: f64| {
            let u = mu * mu;
            let mut d = 1.0;
            for b in &bs {
                d *= a + b * u;
            }
            mu.powi(idx.n as i32) / d
        };
        let bmax = bs.iter().cloned().fold(0.0, f64::max);
        let inner = integrate(f, &mu_breaks(a, bmax), inner_tol()).unwrap().value;
        pref * inner
    };
    let c_lo = sp.momentum_at_energy(1e-7);
    let c_hi = sp.momentum_at_energy(700.0);
    let mut breaks = vec![c_lo];
    let mut e = 1e-6;
    while e < 700.0 {
        breaks.push(sp.momentum_at_energy(e));
        e *= 3.0;
    }
    breaks.push(c_hi);
    let tol = Tolerance { rel: 1e-11, abs: 0.0, max_subdivisions: 4000 };
    Ok(integrate(radial, &breaks, tol)?.value)
}

/// `T^{r,s}_{m,n}(k)` by nested adaptive quadrature over `(mu, C)`.
pub fn nested_t(idx: MomentIndex, k: f64, gamma_c: f64, sp: &SpectrumParams) -> Result<f64> {
    nested(idx, &[k], gamma_c, sp)
}

/// `J^{r,s}_{m,n}(k, k1)` by nested adaptive quadrature over `(mu, C)`.
pub fn nested_j(idx: MomentIndex, k: f64, k1: f64, gamma_c: f64, sp: &SpectrumParams) -> Result<f64> {
    nested(idx, &[k, k1], gamma_c, sp)
}
