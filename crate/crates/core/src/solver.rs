//! Successive approximations in `1 - q`: the per-order jump coefficients
//! fixed by eliminating the pole of `E_1(k)` at `k = 0`, the spectral
//! densities, and the wall values and depth profiles built from them.
//!
//! Everything is per unit `B+`. Matching orders in the integral equation
//! gives `Lambda E0 = B+ T1 - eps0 T2` and
//! `Lambda E1 = -eps1 T2 + (1/pi) int_0^inf J(k, k1) E0(k1) dk1`; the
//! printed zeroth-order system carries the opposite overall sign, which
//! cancels in every coefficient.
//!
//! Densities use the reduced layout `E = (i e1, e2)` with real `e1`, `e2`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernel::{idx, Kernel, Reduced};
use crate::moments::{MomentEngine, QuadratureConfig};
use crate::quadrature::{gauss_legendre, integrate, Tolerance};
use crate::spectrum::{energy, alpha, SpectrumParams};

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDensities {
    pub order: usize,
    /// Coefficient of this order used to build the densities.
    pub eps: f64,
    pub k_grid: Vec<f64>,
    /// Quadrature weights for `int_0^inf dk` on `k_grid`, when the grid is a rule.
    pub weights: Option<Vec<f64>>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

impl SpectralDensities {
    pub fn scaled(&self, f: f64) -> SpectralDensities {
        let mut out = self.clone();
        out.e1.iter_mut().for_each(|v| *v *= f);
        out.e2.iter_mut().for_each(|v| *v *= f);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSolution {
    pub eps_per_order: Vec<f64>,
    pub order: usize,
    pub q: f64,
    pub eps_t_per_bplus: f64,
    pub convergence_ratio: f64,
    pub densities: Vec<SpectralDensities>,
    /// Nodes of the converged `k1` rule (0 at order 0).
    pub k_nodes: usize,
    /// Relative change of `eps1` at the last doubling.
    pub k_change: f64,
}

/// `eps0 / B+` computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eps0Paths {
    /// `2 g_eps2 / (3 g_eps3)`.
    pub g_path: f64,
    /// `T^{0,1}_{3g+2,2}(0) / T^{0,1}_{3g+3,1}(0)`.
    pub t_path: f64,
}

/// `eps1 / B+` with the `k1` rule it was converged on.
#[derive(Debug, Clone, PartialEq)]
pub struct Eps1 {
    pub eps1: f64,
    pub nodes: usize,
    pub last_change: f64,
    /// Zeroth-order densities on the converged rule.
    pub zeroth: SpectralDensities,
}

/// Moments of the zeroth-order right-hand side at one `k`.
#[derive(Debug, Clone, Copy)]
struct ZerothTerms {
    red: Reduced,
    /// `T^{1,0}_{2g+4,4}`, `T^{1,0}_{2g+5,3}`.
    t14: f64,
    t23: f64,
    /// `T^{2,1}_{g+4,4}`, `T^{2,1}_{g+5,3}`.
    d22: f64,
    d31: f64,
}

pub struct Solver<'e> {
    kernel: Kernel<'e>,
    eps0: f64,
}

impl<'e> Solver<'e> {
    pub fn new(engine: &'e MomentEngine) -> Self {
        let s = engine.scalars();
        Solver { kernel: Kernel::new(engine), eps0: 2.0 * s.g_eps2 / (3.0 * s.g_eps3) }
    }

    pub fn engine(&self) -> &'e MomentEngine {
        self.kernel.engine()
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn eps0_paths(&self) -> Result<Eps0Paths> {
        let e = self.engine();
        let g = e.gamma();
        let t_path = e.t(idx::t1_second(g), 0.0)?.value / e.t(idx::t2_second(g), 0.0)?.value;
        Ok(Eps0Paths { g_path: self.eps0, t_path })
    }

    /// `T^{0,1}_{3g+3,1}(0) = g_eps3 / 2`.
    fn t31_zero(&self) -> f64 {
        0.5 * self.engine().scalars().g_eps3
    }

    fn zeroth_terms(&self, k: f64) -> Result<ZerothTerms> {
        let e = self.engine();
        let g = e.gamma();
        let red = self.kernel.reduced(k)?;
        if !(red.omega > 0.0) {
            return Err(Error::DispersionDegeneracy { k, omega: red.omega });
        }
        let t = |i| e.t(i, k).map(|v| v.value);
        let t14 = t(idx::t1_first(g))?;
        let t23 = t(idx::t2_first(g))?;
        let (d22, d31) = if k == 0.0 { (0.0, 0.0) } else { (t(idx::t1_second_drop(g))?, t(idx::t2_second_drop(g))?) };
        Ok(ZerothTerms { red, t14, t23, d22, d31 })
    }

    /// `(e1, e2)` of order 0 at `k` with an arbitrary coefficient `eps`.
    ///
    /// With `eps = eps0` the pole term vanishes identically and `k = 0` returns
    /// the analytic limit; any other `eps` keeps the `1/k` term.
    pub fn zeroth_at(&self, k: f64, eps: f64) -> Result<(f64, f64)> {
        let z = self.zeroth_terms(k)?;
        let r = z.red;
        // R0 = -T^{0,1}_{3g+2,2}(0) + eps T^{0,1}_{3g+3,1}(0), with the first term equal to eps0 times the second.
        let r0 = (eps - self.eps0) * self.t31_zero();
        let rho1 = z.t14 - eps * z.t23;
        if k == 0.0 {
            if r0 != 0.0 {
                return Err(domain("density at k = 0 is singular unless the pole is eliminated"));
            }
            return Ok((0.0, rho1 / r.b));
        }
        let (a_hat, d_hat) = (r.a_hat.unwrap(), r.d_hat.unwrap());
        let rho2 = z.d22 - eps * z.d31;
        let w = r.omega;
        let e1 = k * (d_hat * rho1 - r.b * rho2) / w - r.b * r0 / (k * w);
        let e2 = (a_hat * r0 + k * k * a_hat * rho2 + r.c * rho1) / w;
        Ok((e1, e2))
    }

    pub fn zeroth_densities(&self, k_grid: &[f64]) -> Result<SpectralDensities> {
        self.zeroth_on(k_grid, None)
    }

    fn zeroth_on(&self, k_grid: &[f64], weights: Option<Vec<f64>>) -> Result<SpectralDensities> {
        if k_grid.iter().any(|k| !(*k >= 0.0) || !k.is_finite()) {
            return Err(domain("k grid must be finite and >= 0"));
        }
        let vals: Vec<(f64, f64)> =
            k_grid.par_iter().map(|&k| self.zeroth_at(k, self.eps0)).collect::<Result<_>>()?;
        let (e1, e2) = vals.into_iter().unzip();
        Ok(SpectralDensities { order: 0, eps: self.eps0, k_grid: k_grid.to_vec(), weights, e1, e2 })
    }

    /// Gauss-Legendre rule for `int_0^inf dk` under `k = s t / (1 - t)`.
    pub fn k_rule(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        k_rule(n, self.engine().config().k_map.scale)
    }

    /// `(1/(pi g2)) int T^{0,2}_{3g+2,1}(k1) e2(k1) dk1` over a rule.
    fn pole_source(&self, zeroth: &SpectralDensities) -> Result<f64> {
        let e = self.engine();
        let g = e.gamma();
        let w = zeroth.weights.as_ref().ok_or_else(|| domain("zeroth densities need quadrature weights"))?;
        let terms: Vec<f64> = zeroth
            .k_grid
            .par_iter()
            .zip(w.par_iter().zip(zeroth.e2.par_iter()))
            .map(|(&k1, (&wi, &e2))| e.t(idx::j22_at_zero(g), k1).map(|v| wi * v.value * e2))
            .collect::<Result<_>>()?;
        Ok(terms.iter().sum::<f64>() / (PI * e.scalars().g2))
    }

    /// `eps1 / B+` on one fixed rule.
    pub fn eps1_on(&self, zeroth: &SpectralDensities) -> Result<f64> {
        Ok(self.pole_source(zeroth)? / self.t31_zero())
    }

    /// `eps1 / B+`, doubling the `k1` rule until it settles.
    pub fn eps1(&self) -> Result<Eps1> {
        let km = self.engine().config().k_map;
        let mut n = km.nodes;
        let (k, w) = self.k_rule(n);
        let mut zeroth = self.zeroth_on(&k, Some(w))?;
        let mut eps1 = self.eps1_on(&zeroth)?;
        let mut change = f64::INFINITY;
        while 2 * n <= km.max_nodes {
            n *= 2;
            let (k, w) = self.k_rule(n);
            let z = self.zeroth_on(&k, Some(w))?;
            let next = self.eps1_on(&z)?;
            change = ((next - eps1) / next).abs();
            eps1 = next;
            zeroth = z;
            if change < km.refine_tol {
                return Ok(Eps1 { eps1, nodes: n, last_change: change, zeroth });
            }
        }
        Err(Error::KQuadrature { nodes: n, last_change: change })
    }

    /// `(e1, e2)` of order 1 at `k > 0` with coefficient `eps1`, from zeroth
    /// densities on a rule.
    pub fn first_at(&self, k: f64, eps1: f64, zeroth: &SpectralDensities) -> Result<(f64, f64)> {
        if !(k > 0.0) {
            return Err(domain("order-1 densities are evaluated at k > 0"));
        }
        let e = self.engine();
        let g = e.gamma();
        let s = *e.scalars();
        let w = zeroth.weights.as_ref().ok_or_else(|| domain("zeroth densities need quadrature weights"))?;
        let red = self.kernel.reduced(k)?;
        if !(red.omega > 0.0) {
            return Err(Error::DispersionDegeneracy { k, omega: red.omega });
        }
        let parts: Vec<[f64; 4]> = (0..zeroth.k_grid.len())
            .into_par_iter()
            .map(|i| -> Result<[f64; 4]> {
                let k1 = zeroth.k_grid[i];
                let (e1, e2) = (zeroth.e1[i], zeroth.e2[i]);
                let j = |ix| e.j(ix, k, k1).map(|v| v.value * w[i]);
                Ok([
                    j(idx::j11(g))? * e1,
                    j(idx::j12(g))? * e2,
                    j(idx::j21(g))? * e1,
                    j(idx::j22_drop(g))? * e2,
                ])
            })
            .collect::<Result<_>>()?;
        let mut sums = [0.0; 4];
        for p in &parts {
            for (s, v) in sums.iter_mut().zip(p) {
                *s += v;
            }
        }
        let t23 = e.t(idx::t2_first(g), k)?.value;
        let d31 = e.t(idx::t2_second_drop(g), k)?.value;
        let r1 = -eps1 * k * t23 + (-3.0 * sums[0] / s.g1 + k * sums[1] / s.g2) / PI;
        let r0 = eps1 * self.t31_zero() - self.pole_source(zeroth)?;
        let rho2 = -eps1 * k * d31 + (-3.0 * sums[2] / s.g1 + k * sums[3] / s.g2) / PI;
        let (a_hat, d_hat, b, c, om) = (red.a_hat.unwrap(), red.d_hat.unwrap(), red.b, red.c, red.omega);
        let e1 = (d_hat * r1 - b * rho2) / om - b * r0 / (k * om);
        let e2 = (a_hat * r0 + k * a_hat * rho2) / om + c * r1 / (k * om);
        Ok((e1, e2))
    }

    pub fn first_densities(&self, k_grid: &[f64], eps1: &Eps1) -> Result<SpectralDensities> {
        let vals: Vec<(f64, f64)> =
            k_grid.iter().map(|&k| self.first_at(k, eps1.eps1, &eps1.zeroth)).collect::<Result<_>>()?;
        let (e1, e2) = vals.into_iter().unzip();
        Ok(SpectralDensities { order: 1, eps: eps1.eps1, k_grid: k_grid.to_vec(), weights: None, e1, e2 })
    }

    /// Series through `order` at specularity `q`.
    pub fn solve(&self, q: f64, order: usize) -> Result<SeriesSolution> {
        check_order(order)?;
        check_q(q)?;
        let mut eps = vec![self.eps0];
        let mut densities = Vec::new();
        let (mut k_nodes, mut k_change) = (0, 0.0);
        if order >= 1 {
            let e1 = self.eps1()?;
            eps.push(e1.eps1);
            k_nodes = e1.nodes;
            k_change = e1.last_change;
            densities.push(e1.zeroth);
        }
        let (eps_t, ratio) = assemble_eps_t(q, 1.0, order, &eps)?;
        Ok(SeriesSolution {
            eps_per_order: eps,
            order,
            q,
            eps_t_per_bplus: eps_t,
            convergence_ratio: ratio,
            densities,
            k_nodes,
            k_change,
        })
    }

    /// `h_c(0, mu, C)` from densities on a quadrature rule.
    pub fn wall_distribution(&self, mu: f64, c: f64, d: &SpectralDensities) -> Result<f64> {
        if !(mu > 0.0 && mu <= 1.0) || !(c > 0.0) {
            return Err(domain("need mu in (0, 1] and C > 0"));
        }
        let w = d.weights.as_ref().ok_or_else(|| domain("wall values need densities on a quadrature rule"))?;
        let e = self.engine();
        let (g, sp, s) = (e.gamma(), e.spectrum(), e.scalars());
        let al = alpha(c, sp)?;
        let eps = energy(c, sp)?;
        let p1 = 3.0 * al * c * mu / (2.0 * s.g1);
        let p2 = eps / (2.0 * s.g2);
        let floor = c.powf(2.0 * (g - 1.0));
        let ma = mu * al;
        let mut sum = 0.0;
        for i in 0..d.k_grid.len() {
            let k = d.k_grid[i];
            sum += w[i] * (p1 * d.e1[i] + p2 * d.e2[i]) / (floor + k * k * ma * ma);
        }
        Ok(c.powf(g) / PI * sum)
    }

    /// Piecewise Chebyshev table of the zeroth-order densities for Fourier inversion.
    pub fn density_table(&self, panels_per_octave: usize) -> Result<DensityTable> {
        DensityTable::build(|k| self.zeroth_at(k, self.eps0), self.engine().config().k_map.scale, panels_per_octave)
    }

    /// `W1(x)`, `W2(x)` and the temperature perturbation `W2 / (2 g2)` on `xs`.
    pub fn profiles(&self, xs: &[f64], table: &DensityTable) -> Result<Profiles> {
        let g2 = self.engine().scalars().g2;
        let mut out = Profiles { x: xs.to_vec(), w1: vec![], w2: vec![], temperature: vec![] };
        for &x in xs {
            let (w1, w2) = table.fourier(x)?;
            out.w1.push(w1);
            out.w2.push(w2);
            out.temperature.push(w2 / (2.0 * g2));
        }
        Ok(out)
    }
}

pub fn k_rule(n: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mut k = Vec::with_capacity(n);
    let mut wk = Vec::with_capacity(n);
    for (xi, wi) in x.iter().zip(&w) {
        let t = 0.5 * (xi + 1.0);
        let u = 1.0 - t;
        k.push(scale * t / u);
        wk.push(0.5 * wi * scale / (u * u));
    }
    (k, wk)
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return Err(domain(format!("specularity q = {q} outside [0, 1)")));
    }
    Ok(())
}

fn check_order(order: usize) -> Result<()> {
    if order > 1 {
        return Err(domain(format!("series order {order} not supported (0 or 1)")));
    }
    Ok(())
}

/// `eps_T = (1+q)/(1-q) [eps0 + eps1 (1-q)] B+`, truncated at `order`,
/// together with `|eps1 (1-q) / eps0|`.
pub fn assemble_eps_t(q: f64, b_plus: f64, order: usize, eps: &[f64]) -> Result<(f64, f64)> {
    check_q(q)?;
    check_order(order)?;
    if eps.len() <= order {
        return Err(domain("missing series coefficients"));
    }
    let pre = (1.0 + q) / (1.0 - q);
    if order == 0 {
        return Ok((pre * eps[0] * b_plus, 0.0));
    }
    let corr = eps[1] * (1.0 - q);
    Ok((pre * (eps[0] + corr) * b_plus, (corr / eps[0]).abs()))
}

pub fn eps0_per_bplus(gamma: f64, sp: &SpectrumParams, cfg: &QuadratureConfig) -> Result<f64> {
    let e = MomentEngine::new(gamma, *sp, *cfg)?;
    Ok(Solver::new(&e).eps0())
}

pub fn zeroth_densities(k_grid: &[f64], gamma: f64, sp: &SpectrumParams, cfg: &QuadratureConfig) -> Result<SpectralDensities> {
    let e = MomentEngine::new(gamma, *sp, *cfg)?;
    Solver::new(&e).zeroth_densities(k_grid)
}

pub fn eps1_per_bplus(gamma: f64, sp: &SpectrumParams, cfg: &QuadratureConfig) -> Result<f64> {
    let e = MomentEngine::new(gamma, *sp, *cfg)?;
    Ok(Solver::new(&e).eps1()?.eps1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profiles {
    pub x: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    /// `delta T* / T_s = W2 / (2 g2)`.
    pub temperature: Vec<f64>,
}

const CHEB_POINTS: usize = 17;
const FIRST_EDGE: f64 = 1.0 / 1024.0;
const LAST_EDGE: f64 = 16384.0;
const MAX_OSC_PANELS: usize = 200_000;

#[derive(Debug, Clone)]
struct ChebPanel {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    e1: Vec<f64>,
    e2: Vec<f64>,
}

impl ChebPanel {
    fn eval(&self, k: f64) -> (f64, f64) {
        // Second-kind barycentric formula on Chebyshev-Lobatto points.
        let n = self.nodes.len();
        let (mut num1, mut num2, mut den) = (0.0, 0.0, 0.0);
        for j in 0..n {
            let dx = k - self.nodes[j];
            if dx == 0.0 {
                return (self.e1[j], self.e2[j]);
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n - 1 {
                w *= 0.5;
            }
            let t = w / dx;
            num1 += t * self.e1[j];
            num2 += t * self.e2[j];
            den += t;
        }
        (num1 / den, num2 / den)
    }
}

/// Densities on `[0, K]` as Chebyshev panels with power-law tails beyond.
#[derive(Debug, Clone)]
pub struct DensityTable {
    panels: Vec<ChebPanel>,
    /// Local exponents `p` of `e ~ k^-p` at the last edge.
    tail_p: (f64, f64),
}

impl DensityTable {
    pub fn build<F>(f: F, scale: f64, panels_per_octave: usize) -> Result<Self>
    where
        F: Fn(f64) -> Result<(f64, f64)> + Sync,
    {
        if panels_per_octave == 0 {
            return Err(domain("need at least one panel per octave"));
        }
        let ratio = 2f64.powf(1.0 / panels_per_octave as f64);
        let mut edges = vec![0.0, FIRST_EDGE * scale];
        while *edges.last().unwrap() < LAST_EDGE * scale * (1.0 - 1e-12) {
            let next = edges.last().unwrap() * ratio;
            edges.push(next);
        }
        let m = CHEB_POINTS - 1;
        let panels: Vec<ChebPanel> = edges
            .windows(2)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|w| -> Result<ChebPanel> {
                let (lo, hi) = (w[0], w[1]);
                let nodes: Vec<f64> = (0..=m)
                    .map(|j| 0.5 * (lo + hi) + 0.5 * (hi - lo) * (PI * (m - j) as f64 / m as f64).cos())
                    .collect();
                let mut e1 = Vec::with_capacity(nodes.len());
                let mut e2 = Vec::with_capacity(nodes.len());
                for &k in &nodes {
                    let (a, b) = f(k)?;
                    e1.push(a);
                    e2.push(b);
                }
                Ok(ChebPanel { lo, hi, nodes, e1, e2 })
            })
            .collect::<Result<_>>()?;
        let last = panels.last().unwrap();
        let (k_hi, k_mid) = (last.hi, 0.5 * last.hi);
        let (a_hi, b_hi) = last.eval(k_hi);
        let mid_panel = panels.iter().find(|p| p.lo <= k_mid && k_mid <= p.hi).unwrap();
        let (a_mid, b_mid) = mid_panel.eval(k_mid);
        let p = |lo: f64, hi: f64| (lo / hi).abs().ln() / 2f64.ln();
        Ok(DensityTable { tail_p: (p(a_mid, a_hi), p(b_mid, b_hi)), panels })
    }

    pub fn k_max(&self) -> f64 {
        self.panels.last().unwrap().hi
    }

    pub fn eval(&self, k: f64) -> (f64, f64) {
        let i = self.panels.partition_point(|p| p.hi < k).min(self.panels.len() - 1);
        self.panels[i].eval(k)
    }

    /// `(W1(x), W2(x))` with `W1 = -(1/pi) int sin(kx) e1`, `W2 = (1/pi) int cos(kx) e2`.
    pub fn fourier(&self, x: f64) -> Result<(f64, f64)> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(domain("depth x must be finite and >= 0"));
        }
        let kmax = self.k_max();
        let (f1, f2) = self.eval(kmax);
        let (p1, p2) = self.tail_p;
        let mut breaks: Vec<f64> = self.panels.iter().map(|p| p.lo).collect();
        breaks.push(kmax);
        if x > 0.0 {
            let n_osc = (kmax * x / PI).ceil() as usize;
            if n_osc > MAX_OSC_PANELS {
                return Err(Error::Oscillatory { x, panels: n_osc });
            }
            let step = PI / x;
            breaks.extend((1..n_osc).map(|j| j as f64 * step).filter(|k| *k < kmax));
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
        }
        let tol = Tolerance { rel: 1e-10, abs: 1e-14, max_subdivisions: 20 * breaks.len() + 1000 };
        let w2_head = integrate(|k| (k * x).cos() * self.eval(k).1, &breaks, tol)?.value;
        if x == 0.0 {
            if !(p2 > 1.0) {
                return Err(domain("e2 tail is not integrable"));
            }
            return Ok((0.0, (w2_head + f2 * kmax / (p2 - 1.0)) / PI));
        }
        let w1_head = integrate(|k| (k * x).sin() * self.eval(k).0, &breaks, tol)?.value;
        let (s1, _) = oscillatory_tail(kmax, x, f1, p1);
        let (_, c2) = oscillatory_tail(kmax, x, f2, p2);
        Ok((-(w1_head + s1) / PI, (w2_head + c2) / PI))
    }
}

/// `(int_K^inf sin(kx) F, int_K^inf cos(kx) F)` for `F = F(K) (K/k)^p` by the
/// asymptotic expansion in `1/(Kx)`.
fn oscillatory_tail(kmax: f64, x: f64, fk: f64, p: f64) -> (f64, f64) {
    // int_K^inf e^{ikx} F = -e^{iKx} F(K) sum_j (p)_j / (K^j (ix)^{j+1})
    let (mut re, mut im) = (0.0, 0.0);
    let mut coef = 1.0; // (p)_j / K^j / x^{j+1}, without the power of i
    coef /= x;
    let mut last = f64::INFINITY;
    for j in 0..40 {
        if coef.abs() > last {
            break;
        }
        last = coef.abs();
        // 1 / i^{j+1} cycles through -i, -1, i, 1.
        let (cr, ci) = match j % 4 {
            0 => (0.0, -coef),
            1 => (-coef, 0.0),
            2 => (0.0, coef),
            _ => (coef, 0.0),
        };
        re += cr;
        im += ci;
        if coef.abs() < 1e-17 * (re.abs() + im.abs()) {
            break;
        }
        coef *= (p + j as f64) / (kmax * x);
    }
    let (c, s) = ((kmax * x).cos(), (kmax * x).sin());
    // -(c + i s)(re + i im) F
    let total_re = -(c * re - s * im) * fk;
    let total_im = -(c * im + s * re) * fk;
    (total_im, total_re)
}
