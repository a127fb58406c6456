use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Visibility class of a router.
///
/// Shades 1 to 7 have a directory record and sit in layer 1; shade 8 has
/// none and makes up layer 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shade {
    Beacon = 1,
    Relay = 2,
    Passive = 3,
    Cloaked = 4,
    Veiled = 5,
    Declared = 6,
    Phantom = 7,
    Exclusive = 8,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("shade level must be 1..=8, got {0}")]
pub struct InvalidShadeLevel(pub u8);

impl Shade {
    pub const ALL: [Shade; 8] = [
        Shade::Beacon,
        Shade::Relay,
        Shade::Passive,
        Shade::Cloaked,
        Shade::Veiled,
        Shade::Declared,
        Shade::Phantom,
        Shade::Exclusive,
    ];

    pub fn level(self) -> u8 {
        self as u8
    }

    pub fn from_level(level: u8) -> Result<Self, InvalidShadeLevel> {
        Self::ALL
            .get(usize::from(level).wrapping_sub(1))
            .copied()
            .ok_or(InvalidShadeLevel(level))
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Beacon => "Beacon",
            Self::Relay => "Relay",
            Self::Passive => "Passive",
            Self::Cloaked => "Cloaked",
            Self::Veiled => "Veiled",
            Self::Declared => "Declared",
            Self::Phantom => "Phantom",
            Self::Exclusive => "Exclusive",
        }
    }

    pub fn layer(self) -> u8 {
        if self == Self::Exclusive {
            2
        } else {
            1
        }
    }
}

impl TryFrom<u8> for Shade {
    type Error = InvalidShadeLevel;

    fn try_from(level: u8) -> Result<Self, Self::Error> {
        Self::from_level(level)
    }
}

impl fmt::Display for Shade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Shade {}: {}", self.level(), self.name())
    }
}

/// Serialized as `{level, name, layer}`.
impl Serialize for Shade {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Shade", 3)?;
        s.serialize_field("level", &self.level())?;
        s.serialize_field("name", self.name())?;
        s.serialize_field("layer", &self.layer())?;
        s.end()
    }
}
