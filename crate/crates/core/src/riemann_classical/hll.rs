use super::{Flux, PhaseState};
use crate::eos::EosModel;
use crate::error::Result;

/// Davis wave speed bounds `(min(u - a), max(u + a))` over both states.
pub fn davis_speeds(left: &PhaseState, right: &PhaseState, eos: &EosModel) -> Result<(f64, f64)> {
    let a_l = left.sound_speed(eos)?;
    let a_r = right.sound_speed(eos)?;
    Ok((
        (left.u - a_l).min(right.u - a_r),
        (left.u + a_l).max(right.u + a_r),
    ))
}

/// HLL flux between two states of the same phase, with the wave speeds used.
pub fn hll_flux(left: &PhaseState, right: &PhaseState, eos: &EosModel) -> Result<(Flux, f64, f64)> {
    let (s_l, s_r) = davis_speeds(left, right, eos)?;
    let f_l = left.flux(eos)?;
    let f_r = right.flux(eos)?;
    let flux = if s_l >= 0.0 {
        f_l
    } else if s_r <= 0.0 {
        f_r
    } else {
        let [m_l, q_l] = left.conserved();
        let [m_r, q_r] = right.conserved();
        let inv = 1.0 / (s_r - s_l);
        Flux {
            mass: (s_r * f_l.mass - s_l * f_r.mass + s_l * s_r * (m_r - m_l)) * inv,
            momentum: (s_r * f_l.momentum - s_l * f_r.momentum + s_l * s_r * (q_r - q_l)) * inv,
        }
    };
    Ok((flux, s_l, s_r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::Phase;

    #[test]
    fn consistent_with_physical_flux() {
        let eos = EosModel::default();
        let s = PhaseState::from_pressure(965.0e2, 3.0, Phase::Vapor, &eos).unwrap();
        let (f, _, _) = hll_flux(&s, &s, &eos).unwrap();
        let exact = s.flux(&eos).unwrap();
        assert!((f.mass - exact.mass).abs() < 1e-12 * exact.mass.abs().max(1.0));
        assert!((f.momentum - exact.momentum).abs() < 1e-10 * exact.momentum);
    }

    #[test]
    fn supersonic_data_takes_upwind_flux() {
        let eos = EosModel::default();
        let l = PhaseState::new(0.3, 900.0, Phase::Vapor);
        let r = PhaseState::new(0.2, 950.0, Phase::Vapor);
        let (f, s_l, _) = hll_flux(&l, &r, &eos).unwrap();
        assert!(s_l > 0.0);
        assert_eq!(f, l.flux(&eos).unwrap());
    }
}
