use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbDirection {
    ToDb,
    ToLinear,
}

/// Power ratio to dB. Rejects non-positive input.
pub fn to_db(value: f64) -> Result<f64> {
    if !(value > 0.0) {
        return Err(Error::Domain(format!("cannot take dB of {value}")));
    }
    Ok(10.0 * value.log10())
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Like [`to_db`] but maps zero power to `-inf` instead of failing.
pub fn power_db(value: f64) -> f64 {
    if value > 0.0 {
        10.0 * value.log10()
    } else {
        f64::NEG_INFINITY
    }
}

pub fn db_lin_convert(value: f64, direction: DbDirection) -> Result<f64> {
    match direction {
        DbDirection::ToDb => to_db(value),
        DbDirection::ToLinear => Ok(from_db(value)),
    }
}
