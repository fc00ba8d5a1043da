//! Isothermal equations of state for water at a fixed temperature.
//!
//! The vapor is an ideal gas `p = RT rho`. The liquid follows the linear
//! Tait law `p = p0 + K0 (rho / rho0 - 1)`. Between the maximum vapor
//! density and the minimum liquid density lies the spinodal region, which
//! is never evaluated.

use crate::error::{Error, Result};

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380658e-23;

/// Mass of one water molecule in kg.
pub const WATER_MOLECULE_MASS: f64 = (2.0 * 1.0079 + 15.9994) / 6.02205e26;

/// Phase tag of a state.
///
/// `Neutral` marks single-fluid gas dynamics runs where no phase
/// classification applies. [`EosModel::classify`] never returns it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Vapor,
    Spinodal,
    Liquid,
    Neutral,
}

impl Phase {
    /// The other stable phase.
    pub fn opposite(self) -> Phase {
        match self {
            Phase::Vapor => Phase::Liquid,
            Phase::Liquid => Phase::Vapor,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Vapor => "vapor",
            Phase::Spinodal => "spinodal",
            Phase::Liquid => "liquid",
            Phase::Neutral => "neutral",
        }
    }
}

/// Raw inputs from which an [`EosModel`] is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosParams {
    /// Temperature in K.
    pub temperature: f64,
    /// Molecular mass in kg.
    pub molecule_mass: f64,
    /// Saturation pressure in Pa.
    pub p_sat: f64,
    /// Liquid density at saturation in kg/m^3.
    pub rho_liquid_sat: f64,
    pub rho_vapor_max: f64,
    pub p_vapor_max: f64,
    pub rho_liquid_min: f64,
    pub p_liquid_min: f64,
}

impl Default for EosParams {
    /// Water at 363.15 K.
    ///
    /// The saturated liquid density is fitted so that the symmetric
    /// cavitation problem with 4 m/s outflow at 60 kPa has the vapor star
    /// pressure 68477.181783 Pa. The steam table value 965.3044 kg/m^3
    /// misses that pressure by about 0.8 Pa.
    fn default() -> Self {
        EosParams {
            temperature: 363.15,
            molecule_mass: WATER_MOLECULE_MASS,
            p_sat: 70182.360745,
            rho_liquid_sat: 965.321063659,
            rho_vapor_max: 0.419977,
            p_vapor_max: 70388.660656,
            rho_liquid_min: 965.289008,
            p_liquid_min: 0.0,
        }
    }
}

/// Immutable equation of state for both phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosModel {
    pub t0: f64,
    pub molecule_mass: f64,
    /// Specific gas constant times temperature, `k T0 / m`, in J/kg.
    pub rt: f64,
    pub p0: f64,
    pub rho0: f64,
    /// Tait stiffness in Pa.
    pub k0: f64,
    /// Kinetic relation coefficient `(m / (k T0))^{3/2} / sqrt(2 pi)`.
    pub tau: f64,
    pub rho_tilde: f64,
    pub p_tilde: f64,
    pub rho_min: f64,
    pub p_min: f64,
}

impl Default for EosModel {
    fn default() -> Self {
        EosModel::new(EosParams::default()).expect("default water parameters are valid")
    }
}

impl EosModel {
    /// Builds the model. The Tait stiffness is calibrated so that the
    /// liquid law passes through `(rho_liquid_min, p_liquid_min)`.
    pub fn new(params: EosParams) -> Result<Self> {
        let EosParams {
            temperature,
            molecule_mass,
            p_sat,
            rho_liquid_sat,
            rho_vapor_max,
            p_vapor_max,
            rho_liquid_min,
            p_liquid_min,
        } = params;
        let finite = [
            temperature,
            molecule_mass,
            p_sat,
            rho_liquid_sat,
            rho_vapor_max,
            p_vapor_max,
            rho_liquid_min,
            p_liquid_min,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || temperature <= 0.0 || molecule_mass <= 0.0 {
            return Err(Error::InvalidConfig(
                "temperature and molecule mass must be positive and finite".into(),
            ));
        }
        if !(0.0 < rho_vapor_max
            && rho_vapor_max < rho_liquid_min
            && rho_liquid_min < rho_liquid_sat)
        {
            return Err(Error::InvalidConfig(
                "require 0 < rho_vapor_max < rho_liquid_min < rho_liquid_sat".into(),
            ));
        }
        if !(p_liquid_min < p_sat && p_sat < p_vapor_max) {
            return Err(Error::InvalidConfig(
                "require p_liquid_min < p_sat < p_vapor_max".into(),
            ));
        }
        let rt = BOLTZMANN * temperature / molecule_mass;
        let k0 = (p_sat - p_liquid_min) * rho_liquid_sat / (rho_liquid_sat - rho_liquid_min);
        let tau = (molecule_mass / (BOLTZMANN * temperature)).powf(1.5)
            / (2.0 * std::f64::consts::PI).sqrt();
        Ok(EosModel {
            t0: temperature,
            molecule_mass,
            rt,
            p0: p_sat,
            rho0: rho_liquid_sat,
            k0,
            tau,
            rho_tilde: rho_vapor_max,
            p_tilde: p_vapor_max,
            rho_min: rho_liquid_min,
            p_min: p_liquid_min,
        })
    }

    /// Relative mismatch between the maximum vapor pressure and the ideal
    /// gas law evaluated at the maximum vapor density.
    pub fn vapor_threshold_mismatch(&self) -> f64 {
        (self.rt * self.rho_tilde - self.p_tilde).abs() / self.p_tilde
    }

    /// Relative mismatch between the minimum liquid density and the Tait
    /// law evaluated at the minimum liquid pressure.
    pub fn liquid_threshold_mismatch(&self) -> f64 {
        let rho = self.rho0 * (1.0 + (self.p_min - self.p0) / self.k0);
        (rho - self.rho_min).abs() / self.rho_min
    }

    pub fn pressure_vapor(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::NonPositiveDensity(rho));
        }
        Ok(self.rt * rho)
    }

    pub fn pressure_liquid(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::NonPositiveDensity(rho));
        }
        Ok(self.p0 + self.k0 * (rho / self.rho0 - 1.0))
    }

    /// Pressure on the branch of `phase`, extended beyond the thresholds.
    pub fn pressure(&self, rho: f64, phase: Phase) -> Result<f64> {
        match phase {
            Phase::Vapor => self.pressure_vapor(rho),
            Phase::Liquid => self.pressure_liquid(rho),
            _ => Err(Error::SpinodalQuery),
        }
    }

    /// Lowest pressure with positive density on the branch of `phase`.
    pub fn pressure_floor(&self, phase: Phase) -> Result<f64> {
        match phase {
            Phase::Vapor => Ok(0.0),
            Phase::Liquid => Ok(self.p0 - self.k0),
            _ => Err(Error::SpinodalQuery),
        }
    }

    pub fn density_from_pressure(&self, p: f64, phase: Phase) -> Result<f64> {
        let floor = self.pressure_floor(phase)?;
        if !(p > floor) || !p.is_finite() {
            return Err(Error::OutOfRangePressure { pressure: p, phase });
        }
        Ok(match phase {
            Phase::Vapor => p / self.rt,
            _ => self.rho0 * (1.0 + (p - self.p0) / self.k0),
        })
    }

    /// Isothermal sound speed. Both branches have constant `dp/drho`.
    pub fn sound_speed(&self, phase: Phase) -> Result<f64> {
        match phase {
            Phase::Vapor => Ok(self.rt.sqrt()),
            Phase::Liquid => Ok((self.k0 / self.rho0).sqrt()),
            _ => Err(Error::SpinodalQuery),
        }
    }

    /// Specific Gibbs energy, zero at the saturation pressure in both phases.
    pub fn gibbs(&self, p: f64, phase: Phase) -> Result<f64> {
        let rho = self.density_from_pressure(p, phase)?;
        Ok(match phase {
            Phase::Vapor => self.rt * (p / self.p0).ln(),
            _ => self.k0 / self.rho0 * (rho / self.rho0).ln(),
        })
    }

    pub fn classify(&self, rho: f64) -> Result<Phase> {
        if !(rho > 0.0) {
            return Err(Error::NonPositiveDensity(rho));
        }
        Ok(if rho <= self.rho_tilde {
            Phase::Vapor
        } else if rho < self.rho_min {
            Phase::Spinodal
        } else {
            Phase::Liquid
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    // Independent evaluation of k T0 / m from the raw constants.
    fn gas_constant_oracle() -> f64 {
        let m = (2.0 * 1.0079 + 15.9994) / 6.02205e26;
        1.380658e-23 * 363.15 / m
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    // Composite Simpson rule.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn gas_constant_matches_raw_constants() {
        let eos = EosModel::default();
        assert!(rel(eos.rt, gas_constant_oracle()) < 1e-15);
        assert!((eos.rt - 1.676e5).abs() < 1e2);
        let p = eos.pressure_vapor(0.8).unwrap();
        assert!(rel(p, 0.8 * gas_constant_oracle()) < 1e-15);
    }

    #[test]
    fn vapor_pressure_is_linear_and_vanishes_at_zero() {
        let eos = EosModel::default();
        let mut last = 0.0;
        for k in (1..=20).rev() {
            let rho = 10f64.powi(-k);
            let p = eos.pressure_vapor(rho).unwrap();
            assert!(p > last);
            assert!(rel(p / rho, eos.rt) < 1e-15);
            last = p;
        }
        assert!(eos.pressure_vapor(1e-300).unwrap() < 1e-290);
    }

    #[test]
    fn liquid_pressure_anchors() {
        let eos = EosModel::default();
        assert!((eos.pressure_liquid(eos.rho0).unwrap() - 70182.360745).abs() < 1e-9);
        assert!(eos.pressure_liquid(965.289008).unwrap().abs() < 1e-3);
        let rho = eos.rho0 * (1.0 + 1e5 / eos.k0);
        assert!((eos.pressure_liquid(rho).unwrap() - (eos.p0 + 1e5)).abs() < 1e-6);
    }

    #[test]
    fn non_positive_density_is_rejected() {
        let eos = EosModel::default();
        assert_eq!(eos.pressure_vapor(0.0), Err(Error::NonPositiveDensity(0.0)));
        assert_eq!(
            eos.pressure_liquid(-1.0),
            Err(Error::NonPositiveDensity(-1.0))
        );
        assert!(eos.classify(0.0).is_err());
        assert!(eos.pressure_vapor(f64::NAN).is_err());
    }

    #[test]
    fn density_inversion() {
        let eos = EosModel::default();
        let rho = eos
            .density_from_pressure(70388.660656, Phase::Vapor)
            .unwrap();
        assert!((rho - 0.419977).abs() < 1e-5);
        assert!(
            rel(
                eos.density_from_pressure(eos.p0, Phase::Liquid).unwrap(),
                eos.rho0
            ) < 1e-15
        );

        let bis = bisect(|r| eos.pressure_vapor(r).unwrap() - 35000.0, 1e-6, 10.0);
        let rho = eos.density_from_pressure(35000.0, Phase::Vapor).unwrap();
        assert!(rel(rho, bis) < 1e-12);
        assert!(rel(rho, 35000.0 * WATER_MOLECULE_MASS / (BOLTZMANN * 363.15)) < 1e-14);
    }

    #[test]
    fn density_inversion_range_errors() {
        let eos = EosModel::default();
        assert!(matches!(
            eos.density_from_pressure(0.0, Phase::Vapor),
            Err(Error::OutOfRangePressure { .. })
        ));
        assert!(matches!(
            eos.density_from_pressure(eos.p0 - eos.k0, Phase::Liquid),
            Err(Error::OutOfRangePressure { .. })
        ));
        assert_eq!(
            eos.density_from_pressure(1.0, Phase::Spinodal),
            Err(Error::SpinodalQuery)
        );
        // negative liquid pressures are admissible on the extended branch
        assert!(eos.density_from_pressure(-5e6, Phase::Liquid).unwrap() > 0.0);
    }

    #[test]
    fn sound_speeds_match_finite_differences() {
        let eos = EosModel::default();
        for (phase, rho) in [
            (Phase::Vapor, 0.3),
            (Phase::Vapor, 0.01),
            (Phase::Liquid, 965.4),
            (Phase::Liquid, 1000.0),
        ] {
            let eps = 1e-4 * rho;
            let dp = (eos.pressure(rho + eps, phase).unwrap()
                - eos.pressure(rho - eps, phase).unwrap())
                / (2.0 * eps);
            assert!(
                rel(eos.sound_speed(phase).unwrap(), dp.sqrt()) < 1e-8,
                "{phase:?}"
            );
        }
        assert_eq!(eos.sound_speed(Phase::Spinodal), Err(Error::SpinodalQuery));
    }

    #[test]
    fn gibbs_vanishes_at_saturation() {
        let eos = EosModel::default();
        assert_eq!(eos.gibbs(eos.p0, Phase::Vapor).unwrap(), 0.0);
        assert!(eos.gibbs(eos.p0, Phase::Liquid).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gibbs_matches_quadrature_of_specific_volume() {
        let eos = EosModel::default();
        let v = |p: f64, ph| 1.0 / eos.density_from_pressure(p, ph).unwrap();

        let quad = simpson(|p| v(p, Phase::Vapor), eos.p0, 2.0 * eos.p0, 2000);
        let g = eos.gibbs(2.0 * eos.p0, Phase::Vapor).unwrap();
        assert!(rel(g, quad) < 1e-10);
        assert!(rel(g, eos.rt * 2f64.ln()) < 1e-14);

        let quad = simpson(|p| v(p, Phase::Liquid), eos.p0, eos.p0 + 1e6, 200);
        let g = eos.gibbs(eos.p0 + 1e6, Phase::Liquid).unwrap();
        assert!(rel(g, quad) < 1e-10);
        assert!(rel(g, eos.k0 / eos.rho0 * (1.0 + 1e6 / eos.k0).ln()) < 1e-12);
    }

    #[test]
    fn classification_boundaries() {
        let eos = EosModel::default();
        assert_eq!(eos.classify(0.419977).unwrap(), Phase::Vapor);
        assert_eq!(eos.classify(965.289008).unwrap(), Phase::Liquid);
        assert_eq!(eos.classify(100.0).unwrap(), Phase::Spinodal);
        assert_eq!(eos.classify(0.41998).unwrap(), Phase::Spinodal);
    }

    #[test]
    fn kinetic_coefficient_construction() {
        let eos = EosModel::default();
        let expected = (1.0 / (2.0 * std::f64::consts::PI).sqrt())
            * (WATER_MOLECULE_MASS / (BOLTZMANN * 363.15)).powf(1.5);
        assert_eq!(eos.tau, expected);
    }

    #[test]
    fn threshold_ordering_and_liquid_consistency() {
        let eos = EosModel::default();
        assert!(0.0 < eos.rho_tilde && eos.rho_tilde < eos.rho_min);
        assert!(eos.p_min < eos.p0 && eos.p0 < eos.p_tilde);
        assert!(eos.liquid_threshold_mismatch() < 1e-6);
    }

    #[test]
    fn vapor_threshold_is_ideal_gas_consistent() {
        let eos = EosModel::default();
        let mismatch = eos.vapor_threshold_mismatch();
        assert!(mismatch < 1e-9, "relative mismatch {mismatch:e}");
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut params = EosParams::default();
        params.rho_liquid_min = 0.1;
        assert!(EosModel::new(params).is_err());
        let mut params = EosParams::default();
        params.p_vapor_max = 1.0;
        assert!(EosModel::new(params).is_err());
    }
}
