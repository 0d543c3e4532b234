//! Unit conversions. Everything inside the crate is in Hartree atomic units
//! (energy in hartree, length in bohr, mass in electron masses); user-facing
//! energies are wavenumbers measured from the open-channel threshold.

/// CODATA wavenumber equivalent of one hartree, cm^-1.
pub const CM_PER_HARTREE: f64 = 219_474.631_370_54;

/// Default reduced mass of the model dimer, electron masses.
pub const DEFAULT_REDUCED_MASS: f64 = 77_392.38;

#[inline]
pub fn cm_to_hartree(e_cm: f64) -> f64 {
    e_cm / CM_PER_HARTREE
}

#[inline]
pub fn hartree_to_cm(e_h: f64) -> f64 {
    e_h * CM_PER_HARTREE
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let e = -3.5e-4;
        assert!((cm_to_hartree(hartree_to_cm(e)) - e).abs() < 1e-19);
    }
}
