//! Closed-form direction-cosine integrals.
//!
//! Every moment carries an integral over `mu in [0, 1]` of the form
//! `mu^n / (A + B mu^2)` (one resolvent) or
//! `mu^n / ((A + B1 mu^2)(A + B2 mu^2))` (two resolvents). Both are evaluated
//! in closed form. Values are returned as `(ln_scale, mantissa)` with
//! `value = mantissa * exp(-ln_scale)` so that the extreme ratios `B / A`
//! produced by `A = C^(2 gamma)` at small momenta never overflow.
//!
//! With `y = B / A` three regimes are used: a power series for `y < 1/2`,
//! a fixed Gauss-Legendre rule for `1/2 <= y <= 4`, and upward recurrence in
//! the `B`-scaled form (`z = A / B`) for `y > 4`.

use std::sync::OnceLock;

use crate::error::{domain, Result};
use crate::quadrature::gauss_legendre;

/// Largest `mu` exponent supported.
pub const MAX_MU_POWER: u32 = 6;

/// Below this `y = B/A` the power series is used.
const SERIES_LIMIT: f64 = 0.5;

/// Relative separation `(B2 - B1) / B2` under which the two-resolvent factor
/// is expanded about the midpoint instead of split into partial fractions.
pub const NEAR_DEGENERATE: f64 = 0.1;

/// Largest accepted `ln(B/A)`. The moment integrands never get near it because
/// momenta below `exp(-300/gamma)` are dropped.
pub const LN_Y_CAP: f64 = 690.0;

/// Largest accepted `ln(B/A)` for the two-resolvent factor; the `n = 0`
/// mantissa grows like `(B/A)^(3/2)`.
pub const LN_Y_CAP_DOUBLE: f64 = 400.0;

/// A value stored as `mantissa * exp(-ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scaled {
    pub ln_scale: f64,
    pub mantissa: f64,
}

impl Scaled {
    pub fn value(self) -> f64 {
        self.mantissa * (-self.ln_scale).exp()
    }
}

/// `F_n(y) = int_0^1 mu^n / (1 + y mu^2) dmu` for all `n <= 6`, `0 <= y < 1`.
fn f_series(y: f64, out: &mut [f64; 7]) {
    for (n, slot) in out.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut term = 1.0;
        let mut j = 0u32;
        loop {
            let t = term / (n as f64 + 2.0 * j as f64 + 1.0);
            sum += t;
            if t.abs() <= 1e-17 * sum.abs() {
                break;
            }
            term *= -y;
            j += 1;
        }
        *slot = sum;
    }
}

/// Below this `y` the recurrences lose digits to cancellation; a fixed
/// Gauss-Legendre rule is exact to rounding there because the poles sit at
/// least `1/2` away from `[0, 1]`.
const GAUSS_LIMIT: f64 = 4.0;

fn gauss_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(24);
        (x.iter().map(|x| 0.5 * (x + 1.0)).collect(), w.iter().map(|w| 0.5 * w).collect())
    })
}

fn f_gauss(y: f64, out: &mut [f64; 7]) {
    *out = [0.0; 7];
    let (x, w) = gauss_rule();
    for (u, wi) in x.iter().zip(w) {
        let mut t = wi / (1.0 + y * u * u);
        for slot in out.iter_mut() {
            *slot += t;
            t *= u;
        }
    }
}

/// `F_n(y)`, A-scaled single resolvent, any `y >= 0`.
fn f_all(ln_y: f64, out: &mut [f64; 7]) {
    let y = ln_y.exp();
    if y < SERIES_LIMIT {
        f_series(y, out);
    } else if y <= GAUSS_LIMIT {
        f_gauss(y, out);
    } else {
        let mut g = [0.0; 7];
        g_all(ln_y, &mut g);
        for n in 0..7 {
            out[n] = g[n] / y;
        }
    }
}

/// `G_n(z) = int mu^n / (z + mu^2)` for `z = 1/y`, `y >= 1/2`.
fn g_all(ln_y: f64, out: &mut [f64; 7]) {
    let ln_y = ln_y.min(LN_Y_CAP);
    let y = ln_y.exp();
    if y <= GAUSS_LIMIT {
        f_gauss(y, out);
        for g in out.iter_mut() {
            *g *= y;
        }
        return;
    }
    let z = (-ln_y).exp();
    let s = y.sqrt();
    // z G_0 and z G_1 are formed directly; G_0 itself grows like sqrt(y).
    let mut zg = [0.0; 7];
    zg[0] = s.atan() / s;
    out[0] = s * s.atan();
    let g1 = 0.5 * (ln_y + z.ln_1p());
    out[1] = g1;
    zg[1] = z * g1;
    for n in 2..=6 {
        out[n] = 1.0 / (n as f64 - 1.0) - zg[n - 2];
        zg[n] = z * out[n];
    }
}

/// Terms of the near-degenerate expansion.
const NEAR_TERMS: usize = 12;

/// `S[n][p] = z^(p-2) int_0^1 mu^n / (z + mu^2)^p dmu`, for `p = 1..=2 NEAR_TERMS + 2`.
fn s_table(z: f64) -> Vec<[f64; 7]> {
    let pmax = 2 * NEAR_TERMS + 2;
    let mut s = vec![[0.0; 7]; pmax + 1];
    let mut g = [0.0; 7];
    g_all(-z.ln(), &mut g);
    for n in 0..7 {
        s[1][n] = g[n] / z;
    }
    let r = z / (1.0 + z);
    for p in 1..pmax {
        let pf = p as f64;
        // Integration by parts in mu, rescaled by z^(p-1).
        let boundary = z.powi(p as i32 - 2) / (1.0 + z).powi(p as i32);
        s[p + 1][0] = ((2.0 * pf - 1.0) * s[p][0] + boundary) / (2.0 * pf);
        s[p + 1][1] = (1.0 - r.powi(p as i32)) / (2.0 * z * pf);
    }
    for p in 2..=pmax {
        for n in 2..7 {
            s[p][n] = z * (s[p - 1][n - 2] - s[p][n - 2]);
        }
    }
    s
}

/// `int mu^n / ((z1 + mu^2)(z2 + mu^2))` for nearby `z1, z2`, expanded about the
/// midpoint: the product equals `(zm + mu^2)^2 - d^2`.
fn two_resolvent_near(n: usize, z1: f64, z2: f64) -> f64 {
    let zm = 0.5 * (z1 + z2);
    let d = 0.5 * (z1 - z2) / zm;
    let s = s_table(zm);
    let d2 = d * d;
    let mut w = 1.0;
    let mut sum = 0.0;
    for j in 0..=NEAR_TERMS {
        let t = w * s[2 + 2 * j][n];
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() {
            break;
        }
        w *= d2;
    }
    sum
}

/// Single resolvent `int_0^1 mu^n / (A + B mu^2)` from `ln A` and `ln B`
/// (`ln_b = None` means `B = 0`).
pub(crate) fn single(n: u32, ln_a: f64, ln_b: Option<f64>) -> Scaled {
    debug_assert!(n <= MAX_MU_POWER);
    let n = n as usize;
    let ln_b = match ln_b {
        None => {
            return Scaled { ln_scale: ln_a, mantissa: 1.0 / (n as f64 + 1.0) };
        }
        Some(v) => v,
    };
    let ln_y = (ln_b - ln_a).min(LN_Y_CAP);
    if ln_y < 0.0 {
        let mut f = [0.0; 7];
        f_all(ln_y, &mut f);
        return Scaled { ln_scale: ln_a, mantissa: f[n] };
    }
    let y = ln_y.exp();
    match n {
        0 => {
            let s = y.sqrt();
            Scaled { ln_scale: 0.5 * (ln_a + ln_b), mantissa: s.atan() }
        }
        1 => {
            let ln_y = ln_b - ln_a;
            Scaled { ln_scale: ln_b, mantissa: 0.5 * (ln_y + (-ln_y).exp().ln_1p()) }
        }
        _ => {
            let mut g = [0.0; 7];
            g_all(ln_y, &mut g);
            Scaled { ln_scale: ln_b, mantissa: g[n] }
        }
    }
}

/// `I_n(A, 0) - I_n(A, B)`, with the constant term of the small-`y` series
/// cancelled before summation.
pub(crate) fn single_drop(n: u32, ln_a: f64, ln_b: f64) -> Scaled {
    let top = 1.0 / (n as f64 + 1.0);
    let ln_y = ln_b - ln_a;
    let y = ln_y.exp();
    if y < SERIES_LIMIT {
        let mut sum = 0.0;
        let mut term = y;
        let mut j = 1u32;
        loop {
            let t = term / (n as f64 + 2.0 * j as f64 + 1.0);
            sum += t;
            if t.abs() <= 1e-17 * sum.abs() {
                break;
            }
            term *= -y;
            j += 1;
        }
        return Scaled { ln_scale: ln_a, mantissa: sum };
    }
    let at_b = single(n, ln_a, Some(ln_b));
    Scaled { ln_scale: ln_a, mantissa: top - at_b.mantissa * (ln_a - at_b.ln_scale).exp() }
}

/// `y * F_n(y)`, the numerator of the two-resolvent partial fractions.
fn psi(n: usize, ln_y: f64) -> f64 {
    let y = ln_y.exp();
    match n {
        0 => {
            let s = y.sqrt();
            s * s.atan()
        }
        1 => 0.5 * y.ln_1p(),
        _ => {
            let mut f = [0.0; 7];
            f_all(ln_y, &mut f);
            y * f[n]
        }
    }
}

/// Two resolvents `int_0^1 mu^n / ((A + B1 mu^2)(A + B2 mu^2))`.
pub(crate) fn double(n: u32, ln_a: f64, ln_b1: Option<f64>, ln_b2: Option<f64>) -> Scaled {
    debug_assert!(n <= MAX_MU_POWER);
    // Order so that B1 <= B2; symmetry is exact because both orders share this path.
    let (lo, hi) = match (ln_b1, ln_b2) {
        (None, x) | (x, None) => (None, x),
        (Some(p), Some(q)) => {
            if p <= q {
                (Some(p), Some(q))
            } else {
                (Some(q), Some(p))
            }
        }
    };
    let ln_b2 = match hi {
        None => {
            return Scaled { ln_scale: 2.0 * ln_a, mantissa: 1.0 / (n as f64 + 1.0) };
        }
        Some(v) => v,
    };
    let ln_b1 = match lo {
        None => {
            let s = single(n, ln_a, Some(ln_b2));
            return Scaled { ln_scale: s.ln_scale + ln_a, mantissa: s.mantissa };
        }
        Some(v) => v,
    };
    let n = n as usize;
    let ln_y1 = (ln_b1 - ln_a).min(LN_Y_CAP);
    let ln_y2 = (ln_b2 - ln_a).min(LN_Y_CAP);
    let y1 = ln_y1.exp();
    let y2 = ln_y2.exp();

    if y2 < SERIES_LIMIT {
        // 1/((1+y1 u)(1+y2 u)) = sum_j (-u)^j h_j(y1, y2), h_j complete homogeneous.
        let mut sum = 0.0;
        let mut h = 1.0;
        let mut y1_pow = 1.0;
        let mut sign = 1.0;
        let mut j = 0u32;
        loop {
            let t = sign * h / (n as f64 + 2.0 * j as f64 + 1.0);
            sum += t;
            if t.abs() <= 1e-17 * sum.abs() {
                break;
            }
            y1_pow *= y1;
            h = y2 * h + y1_pow;
            sign = -sign;
            j += 1;
        }
        return Scaled { ln_scale: 2.0 * ln_a, mantissa: sum };
    }

    // -expm1(ln_y1 - ln_y2) = (y2 - y1)/y2, accurate for any magnitude.
    let rel_gap = -(ln_y1 - ln_y2).exp_m1();

    if rel_gap < NEAR_DEGENERATE || y1 >= SERIES_LIMIT {
        let z1 = (-ln_y1).exp();
        let z2 = (-ln_y2).exp();
        let mantissa = if rel_gap < NEAR_DEGENERATE {
            two_resolvent_near(n, z1, z2)
        } else {
            two_resolvent_b_scaled(n, ln_y1, ln_y2, z1, z2, rel_gap)
        };
        return Scaled { ln_scale: ln_b1 + ln_b2, mantissa };
    }

    // Mixed: y1 < 1/2 <= y2 and well separated.
    let mantissa = if n == 1 {
        let x = (y2 - y1) / (1.0 + y1);
        0.5 * x.ln_1p() / (x * (1.0 + y1))
    } else {
        (psi(n, ln_y2) - psi(n, ln_y1)) / (y2 - y1)
    };
    Scaled { ln_scale: 2.0 * ln_a, mantissa }
}

/// `int mu^n / ((z1 + mu^2)(z2 + mu^2))` with `z1 >= z2`, well separated.
fn two_resolvent_b_scaled(n: usize, ln_y1: f64, ln_y2: f64, z1: f64, z2: f64, rel_gap: f64) -> f64 {
    let mut g2 = [0.0; 7];
    g_all(ln_y2, &mut g2);
    // z1 (z1 - z2) relation: z1 - z2 = z1 * rel_gap.
    let base = |m: usize| -> f64 {
        match m {
            0 => {
                let mut g1 = [0.0; 7];
                g_all(ln_y1, &mut g1);
                (g2[0] - g1[0]) / (z1 * rel_gap)
            }
            _ => {
                // ln((1 + 1/z2)/(1 + 1/z1)) = ln(y2/y1) - ln((1 + z1)/(1 + z2))
                let num = (ln_y2 - ln_y1) - ((z1 - z2) / (1.0 + z2)).ln_1p();
                0.5 * num / (z1 * rel_gap)
            }
        }
    };
    if n >= 2 && ln_y1 <= GAUSS_LIMIT.ln() {
        // The recurrence below multiplies errors by z1 >= 1/4 at each step;
        // plain partial fractions lose at most a factor 1/rel_gap instead.
        let mut g1 = [0.0; 7];
        g_all(ln_y1, &mut g1);
        return (g2[n] - g1[n]) / (z1 * rel_gap);
    }
    let mut k = base(n % 2);
    let mut m = n % 2;
    while m < n {
        m += 2;
        k = g2[m - 2] - z1 * k;
    }
    k
}

/// `int_0^1 mu^n / (A + B mu^2) dmu` for `A > 0`, `B >= 0`, `n <= 6`.
pub fn angular_factor(n: u32, a: f64, b: f64) -> Result<f64> {
    check(n, a, &[b], LN_Y_CAP)?;
    let ln_b = if b == 0.0 { None } else { Some(b.ln()) };
    Ok(single(n, a.ln(), ln_b).value())
}

/// `int_0^1 mu^n / ((A + B1 mu^2)(A + B2 mu^2)) dmu` for `A > 0`, `B1, B2 >= 0`.
pub fn double_angular_factor(n: u32, a: f64, b1: f64, b2: f64) -> Result<f64> {
    check(n, a, &[b1, b2], LN_Y_CAP_DOUBLE)?;
    let l = |b: f64| if b == 0.0 { None } else { Some(b.ln()) };
    Ok(double(n, a.ln(), l(b1), l(b2)).value())
}

fn check(n: u32, a: f64, bs: &[f64], cap: f64) -> Result<()> {
    if n > MAX_MU_POWER {
        return Err(domain(format!("mu exponent {n} exceeds {MAX_MU_POWER}")));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("angular factor needs A > 0, got {a}")));
    }
    for &b in bs {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(domain(format!("angular factor needs B >= 0, got {b}")));
        }
        if b > 0.0 && b.ln() - a.ln() > cap {
            return Err(domain(format!("ratio B/A = exp({:.1}) is out of range", b.ln() - a.ln())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};
    use approx::assert_relative_eq;

    fn brute(n: u32, a: f64, b1: f64, b2: Option<f64>) -> f64 {
        let f = |mu: f64| {
            let u = mu * mu;
            let d = match b2 {
                None => a + b1 * u,
                Some(b2) => (a + b1 * u) * (a + b2 * u),
            };
            mu.powi(n as i32) / d
        };
        // Grade the panels toward the resolvent scale sqrt(A / B).
        let bmax = b1.max(b2.unwrap_or(0.0));
        let mut breaks = vec![0.0];
        if bmax > a {
            let s = (a / bmax).sqrt();
            let mut x = s * 1e-3;
            while x < 1.0 {
                breaks.push(x);
                x *= 2.0;
            }
        }
        breaks.push(1.0);
        let tol = Tolerance { rel: 1e-13, abs: 0.0, max_subdivisions: 4000 };
        integrate(f, &breaks, tol).unwrap().value
    }

    #[test]
    fn examples() {
        assert_relative_eq!(angular_factor(2, 3.0, 0.0).unwrap(), 1.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(
            angular_factor(0, 1.0, 1.0).unwrap(),
            std::f64::consts::FRAC_PI_4,
            max_relative = 1e-15
        );
        assert_relative_eq!(angular_factor(4, 2.0, 3.0).unwrap(), brute(4, 2.0, 3.0, None), max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(angular_factor(2, 0.0, 1.0).is_err());
        assert!(angular_factor(2, -1.0, 1.0).is_err());
        assert!(angular_factor(7, 1.0, 1.0).is_err());
        assert!(double_angular_factor(1, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn single_matches_quadrature_over_ratio_range() {
        for n in 0..=6 {
            for i in 0..=64 {
                let y = 10f64.powf(-8.0 + 16.0 * i as f64 / 64.0);
                for a in [1e-3, 1.0, 7.0] {
                    let got = angular_factor(n, a, a * y).unwrap();
                    let want = brute(n, a, a * y, None);
                    assert_relative_eq!(got, want, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn drop_matches_direct_difference() {
        for n in 0..=6 {
            for i in 0..=40 {
                let y = 10f64.powf(-3.0 + 11.0 * i as f64 / 40.0);
                let a: f64 = 2.0;
                let d = single_drop(n, a.ln(), (a * y).ln()).value();
                let f = |mu: f64| mu.powi(n as i32) * (1.0 / a - 1.0 / (a + a * y * mu * mu));
                let tol = Tolerance { rel: 1e-13, abs: 0.0, max_subdivisions: 4000 };
                let want = integrate(f, &[0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0], tol).unwrap().value;
                assert_relative_eq!(d, want, max_relative = 1e-11);
            }
            // Leading behaviour y / ((n + 3) A) as y -> 0.
            let d = single_drop(n, 0.0, -60.0).value();
            assert_relative_eq!(d, (-60f64).exp() / (n as f64 + 3.0), max_relative = 1e-15);
        }
    }

    #[test]
    fn double_matches_quadrature() {
        let ys = [0.0, 1e-7, 0.01, 0.3, 0.49, 0.5, 0.51, 0.9, 2.0, 40.0, 1e4, 1e8];
        for n in 0..=6 {
            for &y1 in &ys {
                for &y2 in &ys {
                    let a = 0.7;
                    let got = double_angular_factor(n, a, a * y1, a * y2).unwrap();
                    let want = brute(n, a, a * y1, Some(a * y2));
                    assert_relative_eq!(got, want, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn double_near_degenerate_is_continuous() {
        for n in 0..=6 {
            for y in [0.2, 0.5, 3.0, 1e5] {
                for rel in [0.0, 1e-9, 1e-6, 9e-6, 1.1e-5, 1e-4, 1e-2] {
                    let a = 1.3;
                    let got = double_angular_factor(n, a, a * y, a * y * (1.0 + rel)).unwrap();
                    let want = brute(n, a, a * y, Some(a * y * (1.0 + rel)));
                    assert!(((got - want) / want).abs() < 1e-12, "n={n} y={y} rel={rel} {got} {want}");
                }
            }
        }
    }

    #[test]
    fn double_is_symmetric() {
        for n in 0..=6 {
            let x = double_angular_factor(n, 0.3, 0.2, 5.0).unwrap();
            let y = double_angular_factor(n, 0.3, 5.0, 0.2).unwrap();
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn double_reduces_to_single_when_one_resolvent_is_bare() {
        for n in 0..=6 {
            let a = 2.5;
            let got = double_angular_factor(n, a, 0.0, 11.0).unwrap();
            assert_relative_eq!(got, angular_factor(n, a, 11.0).unwrap() / a, max_relative = 1e-15);
        }
    }

    #[test]
    fn large_ratios_stay_finite() {
        for n in 0..=6 {
            let s = single(n, -1300.0, Some(3.0));
            assert!(s.mantissa.is_finite() && s.ln_scale.is_finite());
            let d = double(n, -390.0, Some(2.0), Some(9.0));
            assert!(d.mantissa.is_finite() && d.ln_scale.is_finite(), "n={n} {d:?}");
        }
        assert!(angular_factor(2, 1e-300, 1e10).is_err());
    }

    #[test]
    fn single_large_ratio_matches_asymptote() {
        // y -> infinity: I_1 -> ln(y) / (2B).
        let a = 1e-250;
        let b = 1e40;
        let got = angular_factor(1, a, b).unwrap();
        assert_relative_eq!(got, (b / a).ln() / (2.0 * b), max_relative = 1e-13);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(400))]
            #[test]
            fn double_matches_quadrature_random(n in 0u32..=6, l1 in -12.0f64..12.0, l2 in -12.0f64..12.0, la in -5.0f64..5.0) {
                let a = la.exp();
                let (b1, b2) = (a * l1.exp(), a * l2.exp());
                let got = double_angular_factor(n, a, b1, b2).unwrap();
                let want = brute(n, a, b1, Some(b2));
                prop_assert!(((got - want) / want).abs() < 1e-12, "{} vs {}", got, want);
            }

            #[test]
            fn single_is_non_increasing_in_b(n in 0u32..=6, l in -12.0f64..12.0, dl in 1e-6f64..2.0) {
                let x = angular_factor(n, 1.0, l.exp()).unwrap();
                let y = angular_factor(n, 1.0, (l + dl).exp()).unwrap();
                prop_assert!(y <= x);
            }
        }
    }
}
