//! Registry of named scalar functions `phi(x, t)` referenced from scenario
//! files: unknown dynamics `h`, modelled uncertainty `eta`, its bound, and
//! additive actuator fault signals.
//!
//! This is a closed set of expressions, not a parser. The accepted spellings
//! are exactly the strings returned by [`NamedFn::name`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("unknown function expression {0:?}; known: \"0\", a numeric constant, {known}", known = KNOWN.join(", "))]
pub struct UnknownFunction(pub String);

const KNOWN: [&str; 4] = [
    "5*sin(x1)",
    "5*sin(x1)+cos(x2)+x1^2",
    "0.5*sin(t)",
    "sin(t)",
];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NamedFn {
    #[default]
    Zero,
    Constant(f64),
    /// `5 sin(x1)`
    FiveSinX1,
    /// `5 sin(x1) + cos(x2) + x1^2`
    FiveSinX1PlusCosX2PlusX1Sq,
    /// `0.5 sin(t)`
    HalfSinT,
    /// `sin(t)`
    SinT,
}

impl NamedFn {
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        match *self {
            NamedFn::Zero => 0.0,
            NamedFn::Constant(c) => c,
            NamedFn::FiveSinX1 => 5.0 * x[0].sin(),
            NamedFn::FiveSinX1PlusCosX2PlusX1Sq => 5.0 * x[0].sin() + x[1].cos() + x[0] * x[0],
            NamedFn::HalfSinT => 0.5 * t.sin(),
            NamedFn::SinT => t.sin(),
        }
    }

    /// Smallest state dimension the expression can be evaluated on.
    pub fn min_state_dim(&self) -> usize {
        match self {
            NamedFn::FiveSinX1 => 1,
            NamedFn::FiveSinX1PlusCosX2PlusX1Sq => 2,
            _ => 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, NamedFn::Zero) || matches!(self, NamedFn::Constant(c) if *c == 0.0)
    }

    pub fn name(&self) -> String {
        match self {
            NamedFn::Zero => "0".into(),
            NamedFn::Constant(c) => format!("{c}"),
            NamedFn::FiveSinX1 => KNOWN[0].into(),
            NamedFn::FiveSinX1PlusCosX2PlusX1Sq => KNOWN[1].into(),
            NamedFn::HalfSinT => KNOWN[2].into(),
            NamedFn::SinT => KNOWN[3].into(),
        }
    }
}


impl FromStr for NamedFn {
    type Err = UnknownFunction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "0" => Ok(NamedFn::Zero),
            "5*sin(x1)" => Ok(NamedFn::FiveSinX1),
            "5*sin(x1)+cos(x2)+x1^2" => Ok(NamedFn::FiveSinX1PlusCosX2PlusX1Sq),
            "0.5*sin(t)" => Ok(NamedFn::HalfSinT),
            "sin(t)" => Ok(NamedFn::SinT),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|c| c.is_finite())
                .map(NamedFn::Constant)
                .ok_or_else(|| UnknownFunction(s.to_string())),
        }
    }
}

impl TryFrom<String> for NamedFn {
    type Error = UnknownFunction;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<NamedFn> for String {
    fn from(f: NamedFn) -> Self {
        f.name()
    }
}

impl fmt::Display for NamedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
