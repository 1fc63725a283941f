//! Black-hole macro-states, horizon geometry and horizon entropy.
//!
//! Units are geometrized Planck units (`G = c = ħ = k_B = 1`) with charge
//! normalized so that sub-extremality reads `M² ≥ Q² + a²`, `a = J/M`.
//!
//! The horizon "radius" used everywhere is the area radius
//! `R_H = sqrt(A_H / 4π)`, so the horizon entropy is `π R_H²` for every
//! family. For Schwarzschild and Reissner–Nordström this is the outer
//! horizon radius `r₊`; for Kerr–Newman it is `sqrt(r₊² + a²)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack (in units of `M²`) on the sub-extremality discriminant.
pub const EXTREMALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Schwarzschild,
    ReissnerNordstrom,
    KerrNewman,
}

impl Family {
    pub fn carries_charge(self) -> bool {
        !matches!(self, Family::Schwarzschild)
    }

    pub fn carries_spin(self) -> bool {
        matches!(self, Family::KerrNewman)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Schwarzschild => "schwarzschild",
            Family::ReissnerNordstrom => "reissner_nordstrom",
            Family::KerrNewman => "kerr_newman",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "schwarzschild" | "s" => Ok(Family::Schwarzschild),
            "reissner_nordstrom" | "rn" => Ok(Family::ReissnerNordstrom),
            "kerr_newman" | "kn" => Ok(Family::KerrNewman),
            other => Err(Error::Usage(format!("unknown black-hole family `{other}`"))),
        }
    }
}

/// The conserved external quantities of a black hole (or of a macro-state in general).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Hairs {
    pub mass: f64,
    pub charge: f64,
    pub angular_momentum: f64,
}

impl Hairs {
    pub const ZERO: Hairs = Hairs {
        mass: 0.0,
        charge: 0.0,
        angular_momentum: 0.0,
    };

    pub fn new(mass: f64, charge: f64, angular_momentum: f64) -> Self {
        Hairs {
            mass,
            charge,
            angular_momentum,
        }
    }

    pub fn energy(mass: f64) -> Self {
        Hairs::new(mass, 0.0, 0.0)
    }
}

impl Add for Hairs {
    type Output = Hairs;
    fn add(self, rhs: Hairs) -> Hairs {
        Hairs::new(
            self.mass + rhs.mass,
            self.charge + rhs.charge,
            self.angular_momentum + rhs.angular_momentum,
        )
    }
}

impl Sub for Hairs {
    type Output = Hairs;
    fn sub(self, rhs: Hairs) -> Hairs {
        Hairs::new(
            self.mass - rhs.mass,
            self.charge - rhs.charge,
            self.angular_momentum - rhs.angular_momentum,
        )
    }
}

/// One radiated quantum: carried energy, charge and angular momentum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Emission {
    pub omega: f64,
    pub q: f64,
    pub j: f64,
}

impl Emission {
    pub const NONE: Emission = Emission {
        omega: 0.0,
        q: 0.0,
        j: 0.0,
    };

    pub fn new(omega: f64, q: f64, j: f64) -> Result<Self> {
        if !(omega.is_finite() && q.is_finite() && j.is_finite()) {
            return Err(Error::Domain(format!(
                "emission ({omega}, {q}, {j}) is not finite"
            )));
        }
        if omega < 0.0 {
            return Err(Error::Domain(format!("emission energy {omega} < 0")));
        }
        Ok(Emission { omega, q, j })
    }

    /// Energy-only emission.
    pub fn energy(omega: f64) -> Result<Self> {
        Emission::new(omega, 0.0, 0.0)
    }

    pub fn as_hairs(&self) -> Hairs {
        Hairs::new(self.omega, self.q, self.j)
    }
}

impl Add for Emission {
    type Output = Emission;
    fn add(self, rhs: Emission) -> Emission {
        Emission {
            omega: self.omega + rhs.omega,
            q: self.q + rhs.q,
            j: self.j + rhs.j,
        }
    }
}

/// Macro-state of a black hole.
///
/// Construct through [`BlackHoleState::new`]; every live value satisfies
/// `M > 0`, family consistency and `M² ≥ Q² + (J/M)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRecord", into = "StateRecord")]
pub struct BlackHoleState {
    family: Family,
    mass: f64,
    charge: f64,
    angular_momentum: f64,
    alpha: f64,
}

/// Flat serialized form `{family, M, Q, J, alpha}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StateRecord {
    pub family: Family,
    #[serde(rename = "M")]
    pub mass: f64,
    #[serde(rename = "Q", default)]
    pub charge: f64,
    #[serde(rename = "J", default)]
    pub angular_momentum: f64,
    #[serde(default)]
    pub alpha: f64,
}

impl TryFrom<StateRecord> for BlackHoleState {
    type Error = Error;
    fn try_from(r: StateRecord) -> Result<Self> {
        BlackHoleState::new(r.family, r.mass, r.charge, r.angular_momentum, r.alpha)
    }
}

impl From<BlackHoleState> for StateRecord {
    fn from(s: BlackHoleState) -> Self {
        StateRecord {
            family: s.family,
            mass: s.mass,
            charge: s.charge,
            angular_momentum: s.angular_momentum,
            alpha: s.alpha,
        }
    }
}

/// Outcome of subtracting an emission from a black hole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Remnant {
    Hole(BlackHoleState),
    /// All hairs radiated away exactly; horizon entropy 0.
    Evaporated,
}

impl Remnant {
    pub fn hairs(&self) -> Hairs {
        match self {
            Remnant::Hole(s) => s.hairs(),
            Remnant::Evaporated => Hairs::ZERO,
        }
    }

    pub fn entropy(&self) -> f64 {
        match self {
            Remnant::Hole(s) => s.entropy(),
            Remnant::Evaporated => 0.0,
        }
    }

    pub fn state(&self) -> Option<&BlackHoleState> {
        match self {
            Remnant::Hole(s) => Some(s),
            Remnant::Evaporated => None,
        }
    }
}

fn discriminant(h: &Hairs) -> f64 {
    let a = spin_parameter(h);
    h.mass * h.mass - h.charge * h.charge - a * a
}

fn spin_parameter(h: &Hairs) -> f64 {
    if h.angular_momentum == 0.0 {
        0.0
    } else {
        h.angular_momentum / h.mass
    }
}

fn check_hairs(family: Family, h: &Hairs, alpha: f64) -> Result<()> {
    if !(h.mass.is_finite() && h.charge.is_finite() && h.angular_momentum.is_finite()) {
        return Err(Error::Domain(format!("non-finite hairs {h:?}")));
    }
    if !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "log-correction coefficient alpha = {alpha} is not finite"
        )));
    }
    if h.mass <= 0.0 {
        return Err(Error::Domain(format!("mass {} must be > 0", h.mass)));
    }
    if !family.carries_charge() && h.charge != 0.0 {
        return Err(Error::Domain(format!(
            "{family} black hole cannot carry charge {}",
            h.charge
        )));
    }
    if !family.carries_spin() && h.angular_momentum != 0.0 {
        return Err(Error::Domain(format!(
            "{family} black hole cannot carry angular momentum {}",
            h.angular_momentum
        )));
    }
    let d = discriminant(h);
    if d < -EXTREMALITY_TOL * h.mass * h.mass {
        return Err(Error::Domain(format!(
            "super-extremal state violates sub-extremality M² ≥ Q² + (J/M)² \
             (M = {}, Q = {}, J = {})",
            h.mass, h.charge, h.angular_momentum
        )));
    }
    Ok(())
}

impl BlackHoleState {
    pub fn new(family: Family, mass: f64, charge: f64, angular_momentum: f64, alpha: f64) -> Result<Self> {
        let hairs = Hairs::new(mass, charge, angular_momentum);
        check_hairs(family, &hairs, alpha)?;
        Ok(BlackHoleState {
            family,
            mass,
            charge,
            angular_momentum,
            alpha,
        })
    }

    pub fn schwarzschild(mass: f64) -> Result<Self> {
        BlackHoleState::new(Family::Schwarzschild, mass, 0.0, 0.0, 0.0)
    }

    pub fn reissner_nordstrom(mass: f64, charge: f64) -> Result<Self> {
        BlackHoleState::new(Family::ReissnerNordstrom, mass, charge, 0.0, 0.0)
    }

    pub fn kerr_newman(mass: f64, charge: f64, angular_momentum: f64) -> Result<Self> {
        BlackHoleState::new(Family::KerrNewman, mass, charge, angular_momentum, 0.0)
    }

    pub fn from_hairs(family: Family, hairs: Hairs, alpha: f64) -> Result<Self> {
        BlackHoleState::new(family, hairs.mass, hairs.charge, hairs.angular_momentum, alpha)
    }

    /// Same hairs, different log-correction coefficient.
    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        BlackHoleState::new(self.family, self.mass, self.charge, self.angular_momentum, alpha)
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn charge(&self) -> f64 {
        self.charge
    }
    pub fn angular_momentum(&self) -> f64 {
        self.angular_momentum
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hairs(&self) -> Hairs {
        Hairs::new(self.mass, self.charge, self.angular_momentum)
    }

    /// Kerr parameter `a = J/M`.
    pub fn spin_parameter(&self) -> f64 {
        spin_parameter(&self.hairs())
    }

    fn sqrt_discriminant(&self) -> f64 {
        discriminant(&self.hairs()).max(0.0).sqrt()
    }

    /// Outer horizon `r₊ = M + sqrt(M² − Q² − a²)`.
    pub fn outer_radius(&self) -> f64 {
        self.mass + self.sqrt_discriminant()
    }

    /// `R_H² = A_H / 4π = r₊² + a²`.
    pub fn area_radius_sq(&self) -> f64 {
        let r = self.outer_radius();
        let a = self.spin_parameter();
        r * r + a * a
    }

    /// Area radius `R_H`; equals `r₊` for non-rotating families.
    pub fn horizon_radius(&self) -> f64 {
        if self.angular_momentum == 0.0 {
            self.outer_radius()
        } else {
            self.area_radius_sq().sqrt()
        }
    }

    /// Horizon entropy `π R_H² + α ln(π R_H²)` in nats.
    pub fn entropy(&self) -> f64 {
        let area_entropy = PI * self.area_radius_sq();
        if self.alpha == 0.0 {
            area_entropy
        } else {
            area_entropy + self.alpha * area_entropy.ln()
        }
    }

    pub fn is_extremal(&self) -> bool {
        discriminant(&self.hairs()) <= EXTREMALITY_TOL * self.mass * self.mass
    }

    /// Hawking temperature `κ / 2π`.
    ///
    /// Kerr–Newman surface gravity gives `T = (r₊ − r₋) / (4π (r₊² + a²))`,
    /// which reduces to `1 / 8πM` for Schwarzschild.
    pub fn hawking_temperature(&self) -> Result<f64> {
        if self.is_extremal() {
            return Err(Error::Domain(format!(
                "extremal {} black hole has zero temperature",
                self.family
            )));
        }
        if self.family == Family::Schwarzschild {
            return Ok(1.0 / (8.0 * PI * self.mass));
        }
        Ok(2.0 * self.sqrt_discriminant() / (4.0 * PI * self.area_radius_sq()))
    }

    /// Subtract an emission's hairs. A remnant that is not itself a valid
    /// black hole (including total evaporation to `M = 0`) is `RemnantInvalid`.
    pub fn apply_emission(&self, e: &Emission) -> Result<BlackHoleState> {
        match self.remnant(e)? {
            Remnant::Hole(s) => Ok(s),
            Remnant::Evaporated => Err(Error::RemnantInvalid(format!(
                "emission {e:?} evaporates the black hole completely (M → 0)"
            ))),
        }
    }

    /// Like [`apply_emission`](Self::apply_emission) but admits exact total
    /// evaporation as a terminal remnant with zero entropy when `α = 0`.
    pub fn remnant(&self, e: &Emission) -> Result<Remnant> {
        if !self.family.carries_charge() && e.q != 0.0 {
            return Err(Error::Domain(format!(
                "{} black hole cannot emit charge {}",
                self.family, e.q
            )));
        }
        if !self.family.carries_spin() && e.j != 0.0 {
            return Err(Error::Domain(format!(
                "{} black hole cannot emit angular momentum {}",
                self.family, e.j
            )));
        }
        let after = self.hairs() - e.as_hairs();
        if after.mass == 0.0 && after.charge == 0.0 && after.angular_momentum == 0.0 {
            if self.alpha != 0.0 {
                return Err(Error::RemnantInvalid(
                    "total evaporation has divergent log-corrected entropy".into(),
                ));
            }
            return Ok(Remnant::Evaporated);
        }
        check_hairs(self.family, &after, self.alpha)
            .map(|_| {
                Remnant::Hole(BlackHoleState {
                    family: self.family,
                    mass: after.mass,
                    charge: after.charge,
                    angular_momentum: after.angular_momentum,
                    alpha: self.alpha,
                })
            })
            .map_err(|err| match err {
                Error::Domain(msg) => Error::RemnantInvalid(format!("emission {e:?}: {msg}")),
                other => other,
            })
    }

    /// Change of `R_H²` across an emission, evaluated from the emitted
    /// quantities so that small emissions do not suffer cancellation
    /// against the full horizon area.
    pub(crate) fn area_radius_sq_change(&self, e: &Emission) -> Result<(Remnant, f64)> {
        let remnant = self.remnant(e)?;
        let after = match remnant {
            Remnant::Evaporated => return Ok((remnant, -self.area_radius_sq())),
            Remnant::Hole(s) => s,
        };
        let (m, q_tot) = (self.mass, self.charge);
        let (m2, j2) = (after.mass, after.angular_momentum);
        let a = self.spin_parameter();
        let a2 = after.spin_parameter();

        // a' − a = (J ω − M j) / (M M')
        let da = if self.angular_momentum == 0.0 && j2 == 0.0 {
            0.0
        } else {
            (self.angular_momentum * e.omega - m * e.j) / (m * m2)
        };
        let d_a_sq = da * (a2 + a);

        // D = M² − Q² − a²
        let d_disc = -e.omega * (2.0 * m - e.omega) + e.q * (2.0 * q_tot - e.q) - d_a_sq;
        let root = self.sqrt_discriminant();
        let root2 = after.sqrt_discriminant();
        let d_root = if root + root2 > 0.0 {
            d_disc / (root + root2)
        } else {
            0.0
        };
        let d_rplus = -e.omega + d_root;
        let change = d_rplus * (after.outer_radius() + self.outer_radius()) + d_a_sq;
        Ok((remnant, change))
    }
}

/// Mass at which a hole with fixed `Q`, `J` becomes extremal:
/// `M² = (Q² + sqrt(Q⁴ + 4J²)) / 2`.
pub fn extremal_mass(charge: f64, angular_momentum: f64) -> f64 {
    let q2 = charge * charge;
    ((q2 + (q2 * q2 + 4.0 * angular_momentum * angular_momentum).sqrt()) / 2.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn horizon_radii() {
        assert_eq!(BlackHoleState::schwarzschild(1.0).unwrap().horizon_radius(), 2.0);
        assert_eq!(
            BlackHoleState::reissner_nordstrom(1.0, 0.0).unwrap().horizon_radius(),
            2.0
        );
        assert_eq!(
            BlackHoleState::reissner_nordstrom(1.0, 1.0).unwrap().horizon_radius(),
            1.0
        );
    }

    #[test]
    fn kerr_newman_area_radius() {
        // M = 1, Q = 0.6, J = 0.5 → a = 0.5, r₊ = 1 + sqrt(1 − 0.36 − 0.25)
        let s = BlackHoleState::kerr_newman(1.0, 0.6, 0.5).unwrap();
        let rp = 1.0 + (0.39f64).sqrt();
        assert_relative_eq!(s.horizon_radius(), (rp * rp + 0.25).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn super_extremal_rejected() {
        let err = BlackHoleState::reissner_nordstrom(1.0, 2.0).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("sub-extremality")));
        assert!(BlackHoleState::kerr_newman(1.0, 0.8, 0.8).is_err());
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(BlackHoleState::schwarzschild(0.0).is_err());
        assert!(BlackHoleState::schwarzschild(-1.0).is_err());
        assert!(BlackHoleState::new(Family::Schwarzschild, 1.0, 0.1, 0.0, 0.0).is_err());
        assert!(BlackHoleState::new(Family::ReissnerNordstrom, 1.0, 0.1, 0.1, 0.0).is_err());
        assert!(BlackHoleState::new(Family::Schwarzschild, 1.0, 0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn entropies() {
        let s = BlackHoleState::schwarzschild(1.0).unwrap();
        assert_relative_eq!(s.entropy(), 12.566370614359172, epsilon = 1e-12);
        let s1 = s.with_alpha(1.0).unwrap();
        assert_relative_eq!(s1.entropy(), 4.0 * PI + (4.0 * PI).ln(), epsilon = 1e-12);
        assert!((s1.entropy() - 15.097).abs() < 1e-3);
        let rn = BlackHoleState::reissner_nordstrom(1.0, 1.0).unwrap();
        assert_relative_eq!(rn.entropy(), PI, epsilon = 1e-15);
    }

    #[test]
    fn family_reductions_are_bitwise() {
        for &m in &[0.1, 1.0, 3.7, 123.456] {
            let s = BlackHoleState::schwarzschild(m).unwrap().entropy();
            let rn = BlackHoleState::reissner_nordstrom(m, 0.0).unwrap().entropy();
            assert_eq!(s.to_bits(), rn.to_bits());
            let q = 0.3 * m;
            let rn = BlackHoleState::reissner_nordstrom(m, q).unwrap().entropy();
            let kn = BlackHoleState::kerr_newman(m, q, 0.0).unwrap().entropy();
            assert_eq!(rn.to_bits(), kn.to_bits());
        }
    }

    #[test]
    fn emission_arithmetic() {
        let s = BlackHoleState::schwarzschild(1.0).unwrap();
        assert_eq!(s.apply_emission(&Emission::NONE).unwrap(), s);
        assert!(matches!(
            s.apply_emission(&Emission::energy(1.0).unwrap()),
            Err(Error::RemnantInvalid(_))
        ));
        assert_eq!(
            s.remnant(&Emission::energy(1.0).unwrap()).unwrap(),
            Remnant::Evaporated
        );
        let rn = BlackHoleState::reissner_nordstrom(2.0, 1.0).unwrap();
        let after = rn.apply_emission(&Emission::new(0.5, 0.5, 0.0).unwrap()).unwrap();
        assert_eq!(after.mass(), 1.5);
        assert_eq!(after.charge(), 0.5);
        assert_eq!(after.family(), Family::ReissnerNordstrom);
    }

    #[test]
    fn over_charged_remnant_is_invalid() {
        let rn = BlackHoleState::reissner_nordstrom(1.0, 0.9).unwrap();
        assert!(matches!(
            rn.apply_emission(&Emission::energy(0.5).unwrap()),
            Err(Error::RemnantInvalid(_))
        ));
    }

    #[test]
    fn extremal_remnant_allowed() {
        let rn = BlackHoleState::reissner_nordstrom(2.0, 1.0).unwrap();
        let after = rn.apply_emission(&Emission::energy(1.0).unwrap()).unwrap();
        assert!(after.is_extremal());
    }

    #[test]
    fn temperatures() {
        let s = BlackHoleState::schwarzschild(1.0).unwrap();
        assert_relative_eq!(s.hawking_temperature().unwrap(), 0.039788735772973836, epsilon = 1e-15);
        let s2 = BlackHoleState::schwarzschild(2.0).unwrap();
        assert_relative_eq!(s2.hawking_temperature().unwrap(), 1.0 / (16.0 * PI), epsilon = 1e-15);
        let ext = BlackHoleState::reissner_nordstrom(1.0, 1.0).unwrap();
        assert!(ext.is_extremal());
        assert!(matches!(ext.hawking_temperature(), Err(Error::Domain(_))));
        // Q → 0 limit of the general formula
        let rn = BlackHoleState::reissner_nordstrom(1.0, 1e-9).unwrap();
        assert_relative_eq!(rn.hawking_temperature().unwrap(), 1.0 / (8.0 * PI), epsilon = 1e-12);
    }

    #[test]
    fn extremal_boundary_continuity() {
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let q = 1.0 - 10f64.powi(-k);
            let r = BlackHoleState::reissner_nordstrom(1.0, q).unwrap().horizon_radius();
            assert!(r < prev);
            prev = r;
        }
        assert!((prev - 1.0).abs() < 1e-3);
    }

    #[test]
    fn extremal_mass_inverts_condition() {
        let (q, j) = (0.7, 0.4);
        let m = extremal_mass(q, j);
        let a = j / m;
        assert_relative_eq!(m * m, q * q + a * a, epsilon = 1e-14);
    }

    #[test]
    fn flat_record_serialization() {
        let s = BlackHoleState::new(Family::KerrNewman, 2.0, 0.5, 0.25, -1.5).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"family":"kerr_newman","M":2.0,"Q":0.5,"J":0.25,"alpha":-1.5}"#
        );
        let back: BlackHoleState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"family":"reissner_nordstrom","M":1.0,"Q":2.0}"#;
        assert!(serde_json::from_str::<BlackHoleState>(bad).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("rn".parse::<Family>().unwrap(), Family::ReissnerNordstrom);
        assert_eq!("Kerr-Newman".parse::<Family>().unwrap(), Family::KerrNewman);
        assert!(matches!("foo".parse::<Family>(), Err(Error::Usage(_))));
    }
}
