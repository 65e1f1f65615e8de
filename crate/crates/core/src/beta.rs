use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Field of the observations: β = 1 for real data, β = 2 for complex data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::Real => 1.0,
            Beta::Complex => 2.0,
        }
    }

    pub fn from_int(beta: u32) -> Option<Beta> {
        match beta {
            1 => Some(Beta::Real),
            2 => Some(Beta::Complex),
            _ => None,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Real => f.write_str("1"),
            Beta::Complex => f.write_str("2"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .parse::<u32>()
            .ok()
            .and_then(Beta::from_int)
            .ok_or_else(|| Error::InvalidParameter(format!("beta must be 1 or 2, got {s:?}")))
    }
}
