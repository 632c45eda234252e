//! dB / linear conversions.

/// Converts a dB ratio to a linear ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Converts a linear ratio to dB. Zero maps to `-inf`.
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}

#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_points() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((linear_to_db(2.0) - 3.010_299_956_639_812).abs() < 1e-12);
        assert_eq!(linear_to_db(0.0), f64::NEG_INFINITY);
        assert!((kmh_to_mps(3.0) - 0.833_333_333_333_333_4).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn linear_db_round_trip(x in 1e-15f64..1e15) {
            let back = db_to_linear(linear_to_db(x));
            prop_assert!(((back - x) / x).abs() < 1e-12);
        }
    }
}
