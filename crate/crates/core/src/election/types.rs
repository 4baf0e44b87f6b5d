use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a node inside a fixed cluster membership of size `v`.
///
/// Ids are dense: a valid id is always `< v`. Ids 0..26 display as the
/// letters A..Z, which keeps small-cluster traces readable.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 < 26 {
            write!(f, "{}", (b'A' + self.0 as u8) as char)
        } else {
            write!(f, "n{}", self.0)
        }
    }
}

/// Monotone election epoch. A node's round never decreases.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct RoundNumber(pub u64);

impl RoundNumber {
    pub fn next(self) -> RoundNumber {
        RoundNumber(self.0 + 1)
    }
}

impl fmt::Display for RoundNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueError {
    #[error("draw value must be in 1..=999999 micro-units, got {0}")]
    OutOfRange(u64),
}

/// A random draw in the open interval (0, 1), stored exactly.
///
/// Values carry exactly six decimal places, so they are kept as integer
/// micro-units in `1..=999_999`. All comparisons and wheel arithmetic stay in
/// integers; floats appear only at presentation boundaries.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct DrawValue(u32);

impl DrawValue {
    pub const MIN_MICROS: u32 = 1;
    pub const MAX_MICROS: u32 = 999_999;
    /// Number of representable values; also the denominator of the fraction.
    pub const SCALE: u32 = 1_000_000;

    pub fn from_micros(micros: u32) -> Result<DrawValue, ValueError> {
        if (Self::MIN_MICROS..=Self::MAX_MICROS).contains(&micros) {
            Ok(DrawValue(micros))
        } else {
            Err(ValueError::OutOfRange(micros as u64))
        }
    }

    /// Convenience for literals in tests and scripts: `from_f64(0.85)` is
    /// 850_000 micro-units. Rounds to the nearest micro-unit.
    pub fn from_f64(x: f64) -> Result<DrawValue, ValueError> {
        let micros = (x * Self::SCALE as f64).round();
        if micros.is_finite() && micros >= 0.0 && micros <= u32::MAX as f64 {
            Self::from_micros(micros as u32)
        } else {
            Err(ValueError::OutOfRange(u64::MAX))
        }
    }

    pub fn micros(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE as f64
    }
}

impl fmt::Display for DrawValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0.{:06}", self.0)
    }
}

/// Role a node currently plays. `Down` is entered and left only through fault
/// injection, never by the protocol itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeMode {
    Basic,
    Candidate,
    Coordinator,
    Leader,
    Down,
}

impl fmt::Display for NodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeMode::Basic => "basic",
            NodeMode::Candidate => "candidate",
            NodeMode::Coordinator => "coordinator",
            NodeMode::Leader => "leader",
            NodeMode::Down => "down",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draw_value_range_is_enforced() {
        assert!(DrawValue::from_micros(0).is_err());
        assert!(DrawValue::from_micros(1_000_000).is_err());
        assert_eq!(DrawValue::from_micros(1).unwrap().micros(), 1);
        assert_eq!(DrawValue::from_micros(999_999).unwrap().micros(), 999_999);
    }

    #[test]
    fn draw_value_display_has_six_decimals() {
        assert_eq!(DrawValue::from_micros(850_000).unwrap().to_string(), "0.850000");
        assert_eq!(DrawValue::from_micros(42).unwrap().to_string(), "0.000042");
    }

    #[test]
    fn draw_value_from_f64_round_trips_six_decimals() {
        let v = DrawValue::from_f64(0.910000).unwrap();
        assert_eq!(v.micros(), 910_000);
        assert_eq!(v.as_f64(), 0.91);
    }

    #[test]
    fn equal_micros_compare_equal_not_greater() {
        // Six-decimal ties are real ties; strict comparison must say "not greater".
        let a = DrawValue::from_micros(900_000).unwrap();
        let b = DrawValue::from_micros(900_000).unwrap();
        assert!(!(a > b) && !(b > a) && a == b);
    }

    #[test]
    fn node_ids_display_as_letters() {
        assert_eq!(NodeId(0).to_string(), "A");
        assert_eq!(NodeId(4).to_string(), "E");
        assert_eq!(NodeId(26).to_string(), "n26");
    }

    #[test]
    fn rounds_are_ordered_and_advance() {
        assert!(RoundNumber(3) > RoundNumber(2));
        assert_eq!(RoundNumber(2).next(), RoundNumber(3));
    }
}
