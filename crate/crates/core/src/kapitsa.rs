//! Physical observables: jump coefficient `C(gamma, q)`, Kapitsa resistance
//! `R` and the temperature jump for a given heat flux.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::moments::{MomentEngine, QuadratureConfig};
use crate::solver::{assemble_eps_t, Solver};
use crate::spectrum::{SpectrumMode, SpectrumParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Particle spin, a nonnegative half-integer.
    pub spin_s: f64,
    /// Surface temperature, K.
    pub t_s: f64,
    /// Particle mass, kg.
    pub mass_m: f64,
    /// J s.
    pub hbar: f64,
    /// J / K.
    pub k_b: f64,
}

impl Default for PhysicalParams {
    /// Helium-4 at 1 K with CODATA 2018 constants.
    fn default() -> Self {
        PhysicalParams { spin_s: 0.0, t_s: 1.0, mass_m: 6.646_479_073e-27, hbar: 1.054_571_817e-34, k_b: 1.380_649e-23 }
    }
}

impl PhysicalParams {
    /// `hbar = k_B = m = T_s = 1`, spin 0.
    pub fn unit() -> Self {
        PhysicalParams { spin_s: 0.0, t_s: 1.0, mass_m: 1.0, hbar: 1.0, k_b: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("T_s", self.t_s), ("mass", self.mass_m), ("hbar", self.hbar), ("k_B", self.k_b)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        let two_s = 2.0 * self.spin_s;
        if !(self.spin_s >= 0.0) || two_s.fract() != 0.0 {
            return Err(domain(format!("spin must be a nonnegative half-integer, got {}", self.spin_s)));
        }
        Ok(())
    }

    /// `2s + 1`.
    pub fn degeneracy(&self) -> f64 {
        2.0 * self.spin_s + 1.0
    }

    /// `hbar^3 / ((2s+1) k_B^3 T_s^2 m)`, the unit of `R` in which `C` is measured.
    pub fn resistance_unit(&self) -> f64 {
        self.hbar.powi(3) / (self.degeneracy() * self.k_b.powi(3) * self.t_s * self.t_s * self.mass_m)
    }
}

/// Which global constant multiplies `g_eps2 / (g_eps3 g_alpha_eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyMode {
    /// `4 pi^2`, from carrying `eps0` through `B+` and `Delta T = T_s eps_T`.
    #[default]
    DerivedChain,
    /// `2 pi^2` as printed.
    #[serde(rename = "paper_eq29")]
    Literal,
}

impl ConsistencyMode {
    pub fn constant(self) -> f64 {
        let literal = 2.0 * PI * PI;
        match self {
            ConsistencyMode::DerivedChain => 2.0 * literal,
            ConsistencyMode::Literal => literal,
        }
    }
}

impl fmt::Display for ConsistencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConsistencyMode::DerivedChain => "derived_chain",
            ConsistencyMode::Literal => "paper_eq29",
        })
    }
}

impl FromStr for ConsistencyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "derived" | "derived_chain" => Ok(ConsistencyMode::DerivedChain),
            "paper" | "paper_eq29" => Ok(ConsistencyMode::Literal),
            other => Err(domain(format!("unknown consistency mode '{other}' (derived|paper)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpResult {
    pub gamma: f64,
    pub q: f64,
    pub w0: f64,
    pub spectrum_mode: SpectrumMode,
    pub order: usize,
    pub consistency_mode: ConsistencyMode,
    #[serde(rename = "C_coeff")]
    pub c_coeff: f64,
    pub eps0: f64,
    pub eps1: Option<f64>,
    pub convergence_ratio: f64,
    /// Largest relative error estimate among the scalar moments, or the
    /// `k1`-refinement change at order 1 when that is larger.
    pub quad_err: f64,
    /// Kapitsa resistance, present when physical parameters were given.
    #[serde(rename = "R")]
    pub r: Option<f64>,
    /// `eps_T` per unit heat flux, `R / T_s`.
    pub eps_t_per_flux: Option<f64>,
}

/// `B+ = Q_x 6 pi^2 hbar^3 / ((2s+1) m (k_B T_s)^3 g_alpha_eps)`.
pub fn b_plus_from_flux(q_x: f64, phys: &PhysicalParams, g_alpha_eps: f64) -> Result<f64> {
    phys.validate()?;
    if !(g_alpha_eps > 0.0) {
        return Err(domain("g_alpha_eps must be > 0"));
    }
    Ok(q_x * flux_to_b_plus(phys, g_alpha_eps))
}

/// Inverse of [`b_plus_from_flux`].
pub fn flux_from_b_plus(b_plus: f64, phys: &PhysicalParams, g_alpha_eps: f64) -> Result<f64> {
    phys.validate()?;
    if !(g_alpha_eps > 0.0) {
        return Err(domain("g_alpha_eps must be > 0"));
    }
    Ok(b_plus / flux_to_b_plus(phys, g_alpha_eps))
}

fn flux_to_b_plus(phys: &PhysicalParams, g_alpha_eps: f64) -> f64 {
    6.0 * PI * PI * phys.hbar.powi(3) / (phys.degeneracy() * phys.mass_m * (phys.k_b * phys.t_s).powi(3) * g_alpha_eps)
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return Err(domain(format!("specularity q = {q} outside [0, 1)")));
    }
    Ok(())
}

/// Zeroth-order `C(gamma, q)` from an engine's scalar moments.
pub fn coefficient_from(engine: &MomentEngine, q: f64, mode: ConsistencyMode) -> Result<f64> {
    check_q(q)?;
    let s = engine.scalars();
    let x = s.g_eps2 / (s.g_eps3 * s.g_alpha_eps);
    Ok(mode.constant() * x * ((1.0 + q) / (1.0 - q)))
}

pub fn jump_coefficient(
    gamma: f64,
    q: f64,
    sp: &SpectrumParams,
    cfg: &QuadratureConfig,
    mode: ConsistencyMode,
) -> Result<f64> {
    check_q(q)?;
    let e = MomentEngine::new(gamma, *sp, *cfg)?;
    coefficient_from(&e, q, mode)
}

/// Full result at one point. Order 1 scales the zeroth-order coefficient by
/// `(eps0 + eps1 (1-q)) / eps0`.
pub fn evaluate(
    engine: &MomentEngine,
    q: f64,
    order: usize,
    mode: ConsistencyMode,
    phys: Option<&PhysicalParams>,
) -> Result<JumpResult> {
    check_q(q)?;
    if let Some(p) = phys {
        p.validate()?;
    }
    let solver = Solver::new(engine);
    let c0 = coefficient_from(engine, q, mode)?;
    let eps0 = solver.eps0();
    let mut quad_err = engine.scalars().max_rel_err;
    let (c_coeff, eps1, ratio) = if order == 0 {
        assemble_eps_t(q, 1.0, 0, &[eps0])?;
        (c0, None, 0.0)
    } else {
        let sol = solver.solve(q, order)?;
        let eps1 = sol.eps_per_order[1];
        quad_err = quad_err.max(sol.k_change);
        let (eps_t, ratio) = (sol.eps_t_per_bplus, sol.convergence_ratio);
        let (eps_t0, _) = assemble_eps_t(q, 1.0, 0, &sol.eps_per_order)?;
        (c0 * (eps_t / eps_t0), Some(eps1), ratio)
    };
    let sp = engine.spectrum();
    let (r, eps_t_per_flux) = match phys {
        Some(p) => {
            let r = c_coeff * p.resistance_unit();
            (Some(r), Some(r / p.t_s))
        }
        None => (None, None),
    };
    Ok(JumpResult {
        gamma: engine.gamma(),
        q,
        w0: sp.w0,
        spectrum_mode: sp.mode,
        order,
        consistency_mode: mode,
        c_coeff,
        eps0,
        eps1,
        convergence_ratio: ratio,
        quad_err,
        r,
        eps_t_per_flux,
    })
}

/// Kapitsa resistance and the jump per unit flux (identical numbers: `Delta T = R Q_x`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resistance {
    #[serde(rename = "R")]
    pub r: f64,
    pub delta_t_per_flux: f64,
}

impl Resistance {
    pub fn delta_t(&self, q_x: f64) -> f64 {
        self.delta_t_per_flux * q_x
    }
}

pub fn resistance(
    gamma: f64,
    q: f64,
    sp: &SpectrumParams,
    cfg: &QuadratureConfig,
    phys: &PhysicalParams,
    mode: ConsistencyMode,
) -> Result<Resistance> {
    resistance_at_order(gamma, q, sp, cfg, phys, mode, 0)
}

pub fn resistance_at_order(
    gamma: f64,
    q: f64,
    sp: &SpectrumParams,
    cfg: &QuadratureConfig,
    phys: &PhysicalParams,
    mode: ConsistencyMode,
    order: usize,
) -> Result<Resistance> {
    let e = MomentEngine::new(gamma, *sp, *cfg)?;
    let res = evaluate(&e, q, order, mode, Some(phys))?;
    let r = res.r.unwrap();
    Ok(Resistance { r, delta_t_per_flux: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use approx::assert_relative_eq;

    fn sp(w0: f64) -> SpectrumParams {
        SpectrumParams::bogoliubov(w0).unwrap()
    }

    #[test]
    fn b_plus_linear_and_invertible() {
        let p = PhysicalParams::default();
        assert_eq!(b_plus_from_flux(0.0, &p, 2.0).unwrap(), 0.0);
        let b = b_plus_from_flux(3.5, &p, 2.0).unwrap();
        let hot = PhysicalParams { t_s: 2.0, ..p };
        assert_relative_eq!(b_plus_from_flux(3.5, &hot, 2.0).unwrap(), b / 8.0, max_relative = 1e-15);
        assert_relative_eq!(flux_from_b_plus(b, &p, 2.0).unwrap(), 3.5, max_relative = 1e-14);
        assert!(b_plus_from_flux(1.0, &PhysicalParams { mass_m: 0.0, ..p }, 2.0).is_err());
        assert!(b_plus_from_flux(1.0, &PhysicalParams { spin_s: 0.3, ..p }, 2.0).is_err());
        assert!(b_plus_from_flux(1.0, &p, 0.0).is_err());
    }

    #[test]
    fn b_plus_in_units() {
        let b = b_plus_from_flux(1.0, &PhysicalParams::unit(), 1.0).unwrap();
        assert_relative_eq!(b, 6.0 * PI * PI, max_relative = 1e-15);
    }

    #[test]
    fn prefactor_and_modes() {
        let cfg = QuadratureConfig::default();
        let e = MomentEngine::new(2.0, sp(3.0), cfg).unwrap();
        let c0 = coefficient_from(&e, 0.0, ConsistencyMode::DerivedChain).unwrap();
        for q in [0.1, 0.5, 0.9] {
            let c = coefficient_from(&e, q, ConsistencyMode::DerivedChain).unwrap();
            assert_relative_eq!(c / c0, (1.0 + q) / (1.0 - q), max_relative = 1e-14);
            assert_eq!(c, 2.0 * coefficient_from(&e, q, ConsistencyMode::Literal).unwrap());
        }
        let r = coefficient_from(&e, 0.99, ConsistencyMode::DerivedChain).unwrap()
            / coefficient_from(&e, 0.9, ConsistencyMode::DerivedChain).unwrap();
        assert_relative_eq!(r, 199.0 / 19.0, max_relative = 1e-13);
        assert!(coefficient_from(&e, 1.0, ConsistencyMode::DerivedChain).is_err());
        assert!(coefficient_from(&e, -0.1, ConsistencyMode::DerivedChain).is_err());
    }

    #[test]
    fn phonon_coefficient_closed_form() {
        let sp = SpectrumParams::phonon(1.0).unwrap();
        let c = jump_coefficient(3.0, 0.0, &sp, &QuadratureConfig::default(), ConsistencyMode::DerivedChain).unwrap();
        let r = oracle::phonon_scalars(3.0, 1.0);
        let want = 4.0 * PI * PI * r.g_eps2 / (r.g_eps3 * r.g_alpha_eps);
        assert_relative_eq!(c, want, max_relative = 1e-9);
    }

    #[test]
    fn resistance_scalings() {
        let cfg = QuadratureConfig::default();
        let p = PhysicalParams::default();
        let m = ConsistencyMode::DerivedChain;
        let r = resistance(1.0, 0.2, &sp(1.0), &cfg, &p, m).unwrap();
        let hot = resistance(1.0, 0.2, &sp(1.0), &cfg, &PhysicalParams { t_s: 3.0, ..p }, m).unwrap();
        assert_relative_eq!(hot.r, r.r / 9.0, max_relative = 1e-14);
        let spin = resistance(1.0, 0.2, &sp(1.0), &cfg, &PhysicalParams { spin_s: 1.0, ..p }, m).unwrap();
        assert_relative_eq!(spin.r / r.r, 1.0 / 3.0, max_relative = 1e-14);
        assert!(r.r > 0.0 && r.delta_t(5.0) > 0.0);
    }

    #[test]
    fn order_one_refines_coefficient() {
        let e = MomentEngine::new(1.0, sp(1.0), QuadratureConfig::default()).unwrap();
        let m = ConsistencyMode::DerivedChain;
        let r0 = evaluate(&e, 0.3, 0, m, None).unwrap();
        let r1 = evaluate(&e, 0.3, 1, m, None).unwrap();
        let eps1 = r1.eps1.unwrap();
        assert_relative_eq!(r1.c_coeff, r0.c_coeff * (r0.eps0 + 0.7 * eps1) / r0.eps0, max_relative = 1e-14);
        assert_relative_eq!(r1.convergence_ratio, (0.7 * eps1 / r0.eps0).abs(), max_relative = 1e-14);
        assert!(r0.eps1.is_none() && r0.r.is_none());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("paper".parse::<ConsistencyMode>().unwrap(), ConsistencyMode::Literal);
        assert_eq!("derived_chain".parse::<ConsistencyMode>().unwrap(), ConsistencyMode::DerivedChain);
        assert!("other".parse::<ConsistencyMode>().is_err());
        assert_eq!(ConsistencyMode::Literal.to_string(), "paper_eq29");
    }

    #[test]
    fn monotone_trends() {
        let cfg = QuadratureConfig::default();
        let m = ConsistencyMode::DerivedChain;
        let c = |g: f64, q: f64, w0: f64| jump_coefficient(g, q, &sp(w0), &cfg, m).unwrap();
        assert!(c(1.0, 0.0, 1.0) > c(2.0, 0.0, 1.0));
        assert!(c(1.0, 0.5, 1.0) > c(1.0, 0.4, 1.0));
        assert!(c(1.0, 0.5, 2.0) > c(1.0, 0.5, 1.0));
        let lim = |q: f64| c(1.0, q, 1.0) * (1.0 - q);
        assert!(lim(0.95) < 2.0 * lim(0.0) && lim(0.999) < 2.0 * lim(0.0));
    }
}
