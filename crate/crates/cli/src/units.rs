//! Physical quantities written either as bare SI numbers or as strings with a
//! unit suffix, e.g. `"20 dBm"`, `"2 GHz"`, `"-50 dB"`.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use uavfl_core::scenarios::{db_to_linear, dbm_to_watts};

/// What a quantity measures, which fixes the accepted suffixes.
pub trait Dimension {
    const NAME: &'static str;
    const UNITS: &'static str;
    fn convert(value: f64, unit: &str) -> Option<f64>;
}

pub enum PowerDim {}
pub enum FrequencyDim {}
pub enum GainDim {}

impl Dimension for PowerDim {
    const NAME: &'static str = "power";
    const UNITS: &'static str = "W, mW, dBm or dBW";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        match unit {
            "W" => Some(v),
            "mW" => Some(v * 1e-3),
            "dBm" => Some(dbm_to_watts(v)),
            "dBW" => Some(db_to_linear(v)),
            _ => None,
        }
    }
}

impl Dimension for FrequencyDim {
    const NAME: &'static str = "frequency";
    const UNITS: &'static str = "Hz, kHz, MHz or GHz";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        let scale = match unit {
            "Hz" => 1.0,
            "kHz" => 1e3,
            "MHz" => 1e6,
            "GHz" => 1e9,
            _ => return None,
        };
        Some(v * scale)
    }
}

impl Dimension for GainDim {
    const NAME: &'static str = "gain";
    const UNITS: &'static str = "dB (or a bare linear number)";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        (unit == "dB").then(|| db_to_linear(v))
    }
}

/// Parses `"<number> <unit>"` (the space is optional) into SI.
pub fn parse_quantity<D: Dimension>(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .ok_or_else(|| format!("`{text}` has no unit; write a bare number for SI or add one of {}", D::UNITS))?;
    let (num, unit) = text.split_at(split);
    let value: f64 = num.trim().parse().map_err(|_| format!("`{}` is not a number", num.trim()))?;
    let si = D::convert(value, unit.trim())
        .ok_or_else(|| format!("`{}` is not a {} unit (expected {})", unit.trim(), D::NAME, D::UNITS))?;
    if si.is_finite() {
        Ok(si)
    } else {
        Err(format!("`{text}` overflows"))
    }
}

/// An SI value of dimension `D`. Serializes as a bare number so files written
/// back out read identically.
pub struct Quantity<D>(pub f64, PhantomData<D>);

impl<D> Quantity<D> {
    pub fn new(v: f64) -> Self {
        Quantity(v, PhantomData)
    }
}

impl<D> Clone for Quantity<D> {
    fn clone(&self) -> Self {
        Quantity::new(self.0)
    }
}

impl<D> fmt::Debug for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub type Watts = Quantity<PowerDim>;
pub type Hertz = Quantity<FrequencyDim>;
pub type Gain = Quantity<GainDim>;

impl<D> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        struct V<D>(PhantomData<D>);
        impl<D: Dimension> Visitor<'_> for V<D> {
            type Value = Quantity<D>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a {} as a number in SI units or a string with one of {}", D::NAME, D::UNITS)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Ok(Quantity::new(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(Quantity::new(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(Quantity::new(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                parse_quantity::<D>(v).map(Quantity::new).map_err(E::custom)
            }
        }
        d.deserialize_any(V(PhantomData))
    }
}
