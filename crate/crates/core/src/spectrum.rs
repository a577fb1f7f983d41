//! Dimensionless excitation spectrum of the condensate gas.
//!
//! Momenta are measured in units of the thermal momentum and energies in units
//! of `k T_s`, so the Bogolyubov branch reads `eps(C) = sqrt(w0^2 C^2 + C^4/4)`
//! where `w0` is the sound speed over the thermal speed. The phonon and
//! free-particle branches are its two limits and are kept as separate modes
//! because their moments have closed forms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    Bogoliubov,
    /// Linear branch `eps = w0 C`.
    Phonon,
    /// Quadratic branch `eps = C^2/2`; identical to Bogoliubov with `w0 = 0`.
    Free,
}

impl fmt::Display for SpectrumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumMode::Bogoliubov => "bogoliubov",
            SpectrumMode::Phonon => "phonon",
            SpectrumMode::Free => "free",
        })
    }
}

impl FromStr for SpectrumMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bogoliubov" | "bogolyubov" => Ok(SpectrumMode::Bogoliubov),
            "phonon" => Ok(SpectrumMode::Phonon),
            "free" => Ok(SpectrumMode::Free),
            other => Err(domain(format!("unknown spectrum mode '{other}'"))),
        }
    }
}

/// Excitation-spectrum configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    pub mode: SpectrumMode,
    /// Dimensionless sound speed.
    pub w0: f64,
}

impl SpectrumParams {
    pub fn new(mode: SpectrumMode, w0: f64) -> Result<Self> {
        let p = SpectrumParams { mode, w0 };
        p.validate()?;
        Ok(p)
    }

    pub fn bogoliubov(w0: f64) -> Result<Self> {
        Self::new(SpectrumMode::Bogoliubov, w0)
    }

    pub fn phonon(w0: f64) -> Result<Self> {
        Self::new(SpectrumMode::Phonon, w0)
    }

    pub fn free() -> Self {
        SpectrumParams { mode: SpectrumMode::Free, w0: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.w0.is_finite() || self.w0 < 0.0 {
            return Err(domain(format!("w0 must be finite and >= 0, got {}", self.w0)));
        }
        if self.mode == SpectrumMode::Phonon && self.w0 == 0.0 {
            return Err(domain("phonon spectrum needs w0 > 0"));
        }
        Ok(())
    }

    /// The free mode is evaluated through the Bogoliubov formulas at `w0 = 0`.
    fn effective(&self) -> (Branch, f64) {
        match self.mode {
            SpectrumMode::Bogoliubov => (Branch::Bogoliubov, self.w0),
            SpectrumMode::Free => (Branch::Bogoliubov, 0.0),
            SpectrumMode::Phonon => (Branch::Linear, self.w0),
        }
    }

    /// Momentum at which the energy reaches `target`.
    pub fn momentum_at_energy(&self, target: f64) -> f64 {
        let (branch, w0) = self.effective();
        match branch {
            Branch::Linear => target / w0,
            Branch::Bogoliubov => {
                // C^2 = 2 (sqrt(w0^4 + E^2) - w0^2), rationalised.
                let w2 = w0 * w0;
                let c2 = 2.0 * target * target / ((w2 * w2 + target * target).sqrt() + w2);
                c2.sqrt()
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Branch {
    Bogoliubov,
    Linear,
}

fn check_momentum(c: f64) -> Result<()> {
    if !c.is_finite() || c < 0.0 {
        return Err(domain(format!("momentum must be finite and >= 0, got {c}")));
    }
    Ok(())
}

/// Dimensionless excitation energy `eps(C)`.
pub fn energy(c: f64, p: &SpectrumParams) -> Result<f64> {
    check_momentum(c)?;
    Ok(energy_unchecked(c, p))
}

fn energy_unchecked(c: f64, p: &SpectrumParams) -> f64 {
    let (branch, w0) = p.effective();
    match branch {
        Branch::Linear => w0 * c,
        Branch::Bogoliubov => c * (w0 * w0 + 0.25 * c * c).sqrt(),
    }
}

/// Group velocity `alpha(C) C = d eps / dC`, finite at the origin.
pub fn group_velocity(c: f64, p: &SpectrumParams) -> Result<f64> {
    check_momentum(c)?;
    Ok(group_velocity_unchecked(c, p))
}

fn group_velocity_unchecked(c: f64, p: &SpectrumParams) -> f64 {
    let (branch, w0) = p.effective();
    match branch {
        Branch::Linear => w0,
        Branch::Bogoliubov => {
            if c == 0.0 {
                return w0;
            }
            let w2 = w0 * w0;
            (w2 + 0.5 * c * c) / (w2 + 0.25 * c * c).sqrt()
        }
    }
}

/// `alpha(C)` itself; it diverges like `w0 / C` so only `C > 0` is accepted.
pub fn alpha(c: f64, p: &SpectrumParams) -> Result<f64> {
    check_momentum(c)?;
    if c == 0.0 {
        return Err(domain("alpha(C) is singular at C = 0; use group_velocity"));
    }
    Ok(group_velocity_unchecked(c, p) / c)
}

/// Equilibrium weight `g = e^eps / (e^eps - 1)^2`, written as
/// `e^-eps / (1 - e^-eps)^2` so it neither overflows nor cancels.
pub fn bose_weight(c: f64, p: &SpectrumParams) -> Result<f64> {
    check_momentum(c)?;
    if c == 0.0 {
        return Err(domain("bose weight diverges at C = 0"));
    }
    let eps = energy_unchecked(c, p);
    if eps <= 0.0 {
        return Err(domain("bose weight needs a positive excitation energy"));
    }
    Ok(weight_from_energy(eps))
}

pub(crate) fn weight_from_energy(eps: f64) -> f64 {
    let d = (-eps).exp_m1();
    (-eps).exp() / (d * d)
}

pub(crate) fn ln_weight_from_energy(eps: f64) -> f64 {
    -eps - 2.0 * (-(-eps).exp_m1()).ln()
}

/// Everything an integrand needs at one momentum, in logarithmic form so
/// that large powers of `C` never overflow.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Excitation {
    pub ln_c: f64,
    pub ln_eps: f64,
    pub ln_alpha: f64,
    pub ln_vel: f64,
    pub ln_g: f64,
}

impl Excitation {
    /// Requires `c > 0`.
    pub fn at(c: f64, p: &SpectrumParams) -> Self {
        let (branch, w0) = p.effective();
        let ln_c = c.ln();
        let (eps, ln_eps, vel) = match branch {
            Branch::Linear => (w0 * c, w0.ln() + ln_c, w0),
            Branch::Bogoliubov if w0 == 0.0 => (0.5 * c * c, 2.0 * ln_c - std::f64::consts::LN_2, c),
            Branch::Bogoliubov => {
                let w2 = w0 * w0;
                let s2 = w2 + 0.25 * c * c;
                let s = s2.sqrt();
                (c * s, ln_c + 0.5 * s2.ln(), (w2 + 0.5 * c * c) / s)
            }
        };
        let ln_vel = if w0 == 0.0 { ln_c } else { vel.ln() };
        // g = eps^-2 - 1/12 + O(eps^2); eps itself may underflow here.
        let ln_g = if eps < 1e-5 {
            -2.0 * ln_eps + (-eps * eps / 12.0).ln_1p()
        } else {
            ln_weight_from_energy(eps)
        };
        Excitation {
            ln_c,
            ln_eps,
            ln_alpha: ln_vel - ln_c,
            ln_vel,
            ln_g,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bog(w0: f64) -> SpectrumParams {
        SpectrumParams::bogoliubov(w0).unwrap()
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(2.0, &bog(0.0)).unwrap(), 2.0);
        assert_relative_eq!(energy(1.0, &bog(1.0)).unwrap(), 1.25f64.sqrt(), max_relative = 1e-15);
        assert_eq!(energy(3.0, &SpectrumParams::phonon(2.0).unwrap()).unwrap(), 6.0);
    }

    #[test]
    fn energy_rejects_bad_momentum() {
        assert!(energy(-1.0, &bog(1.0)).is_err());
        assert!(energy(f64::NAN, &bog(1.0)).is_err());
        assert!(energy(f64::INFINITY, &bog(1.0)).is_err());
    }

    #[test]
    fn group_velocity_examples() {
        assert_eq!(group_velocity(0.0, &bog(2.0)).unwrap(), 2.0);
        assert_relative_eq!(group_velocity(1e-12, &bog(2.0)).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(group_velocity(1.5, &bog(0.0)).unwrap(), 1.5, max_relative = 1e-15);
        assert_relative_eq!(
            group_velocity(1.0, &bog(1.0)).unwrap(),
            1.5 / 1.25f64.sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(group_velocity(0.0, &SpectrumParams::free()).unwrap(), 0.0);
    }

    #[test]
    fn alpha_singular_at_origin() {
        assert!(alpha(0.0, &bog(1.0)).is_err());
        assert_relative_eq!(alpha(2.0, &bog(1.0)).unwrap() * 2.0, group_velocity(2.0, &bog(1.0)).unwrap());
    }

    #[test]
    fn bose_weight_examples() {
        // e^eps = 2 exactly when C solves eps(C) = ln 2 on the free branch.
        let free = SpectrumParams::free();
        let c = (2.0 * std::f64::consts::LN_2).sqrt();
        assert_relative_eq!(bose_weight(c, &free).unwrap(), 2.0, max_relative = 1e-14);

        // eps = 50: g = e^-50 / (1 - e^-50)^2 = e^-50 (1 + 2e^-50 + ...).
        let ph = SpectrumParams::phonon(1.0).unwrap();
        let reference = (-50.0f64).exp() * (1.0 + 2.0 * (-50.0f64).exp());
        assert_relative_eq!(bose_weight(50.0, &ph).unwrap(), reference, max_relative = 1e-12);

        let c = 1e-4;
        let e = energy(c, &bog(1.0)).unwrap();
        assert!((bose_weight(c, &bog(1.0)).unwrap() * e * e - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bose_weight_large_energy_does_not_overflow() {
        let g = bose_weight(800.0, &SpectrumParams::phonon(1.0).unwrap()).unwrap();
        assert_eq!(g, 0.0);
        assert!(bose_weight(0.0, &bog(1.0)).is_err());
    }

    #[test]
    fn phonon_needs_positive_sound_speed() {
        assert!(SpectrumParams::phonon(0.0).is_err());
        assert!(SpectrumParams::bogoliubov(-1.0).is_err());
    }

    #[test]
    fn momentum_at_energy_inverts_energy() {
        for p in [bog(0.0), bog(0.3), bog(20.0), SpectrumParams::phonon(3.0).unwrap()] {
            for e in [1e-3, 1.0, 750.0] {
                let c = p.momentum_at_energy(e);
                assert_relative_eq!(energy(c, &p).unwrap(), e, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn excitation_survives_energy_underflow() {
        let x = Excitation::at(1e-200, &SpectrumParams::free());
        assert!(x.ln_g.is_finite());
        assert_relative_eq!(x.ln_g, -2.0 * (0.5f64.ln() + 2.0 * (1e-200f64).ln()), max_relative = 1e-14);
    }

    #[test]
    fn excitation_matches_direct_evaluation() {
        let p = bog(1.7);
        for c in [1e-6, 2e-3, 0.3, 4.0, 30.0] {
            let x = Excitation::at(c, &p);
            assert_relative_eq!(x.ln_eps.exp(), energy(c, &p).unwrap(), max_relative = 1e-14);
            assert_relative_eq!(x.ln_alpha.exp(), alpha(c, &p).unwrap(), max_relative = 1e-13);
            assert_relative_eq!(x.ln_g.exp(), bose_weight(c, &p).unwrap(), max_relative = 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn energy_is_increasing(w0 in 0.0f64..50.0, c1 in 0.0f64..100.0, dc in 1e-6f64..10.0) {
                let p = bog(w0);
                prop_assert!(energy(c1 + dc, &p).unwrap() > energy(c1, &p).unwrap());
            }

            #[test]
            fn energy_sandwich(w0 in 0.0f64..50.0, c in 0.0f64..100.0) {
                let e = energy(c, &bog(w0)).unwrap();
                let lo = (w0 * c).max(0.5 * c * c);
                let hi = w0 * c + 0.5 * c * c;
                prop_assert!(e >= lo * (1.0 - 1e-15) && e <= hi * (1.0 + 1e-15));
            }

            #[test]
            fn group_velocity_is_derivative(w0 in 0.0f64..20.0, lc in -2.0f64..2.0) {
                let c = 10f64.powf(lc);
                let p = bog(w0);
                let h = 1e-5 * c;
                let fd = (energy(c + h, &p).unwrap() - energy(c - h, &p).unwrap()) / (2.0 * h);
                let v = group_velocity(c, &p).unwrap();
                prop_assert!((fd - v).abs() <= 1e-6 * v.max(1e-300));
            }

            #[test]
            fn free_equals_bogoliubov_at_zero_sound_speed(c in 1e-3f64..60.0) {
                let f = SpectrumParams::free();
                let b = bog(0.0);
                prop_assert_eq!(energy(c, &f).unwrap().to_bits(), energy(c, &b).unwrap().to_bits());
                prop_assert_eq!(group_velocity(c, &f).unwrap().to_bits(), group_velocity(c, &b).unwrap().to_bits());
                prop_assert_eq!(bose_weight(c, &f).unwrap().to_bits(), bose_weight(c, &b).unwrap().to_bits());
            }

            #[test]
            fn weight_positive(w0 in 0.0f64..50.0, c in 1e-3f64..10.0) {
                prop_assert!(bose_weight(c, &bog(w0)).unwrap() > 0.0);
            }
        }
    }
}
