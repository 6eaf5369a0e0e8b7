//! Scalar variables exchanged between components.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MasterError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Real,
    Integer,
    Boolean,
}

/// A scalar value carried on a variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Real(f64),
    Integer(i64),
    Boolean(bool),
}

impl Value {
    pub fn kind(&self) -> Kind {
        match self {
            Value::Real(_) => Kind::Real,
            Value::Integer(_) => Kind::Integer,
            Value::Boolean(_) => Kind::Boolean,
        }
    }

    /// Numeric view used for tracing: booleans map to 0/1.
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Real(v) => v,
            Value::Integer(v) => v as f64,
            Value::Boolean(v) => f64::from(u8::from(v)),
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Value::Real(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match *self {
            Value::Integer(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Value::Boolean(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            Value::Real(v) => v.is_finite(),
            _ => true,
        }
    }

    /// The default start value for a kind.
    pub fn zero(kind: Kind) -> Self {
        match kind {
            Kind::Real => Value::Real(0.0),
            Kind::Integer => Value::Integer(0),
            Kind::Boolean => Value::Boolean(false),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(v) => write!(f, "{v}"),
            Value::Integer(v) => write!(f, "{v}"),
            Value::Boolean(v) => write!(f, "{v}"),
        }
    }
}

/// Declaration of one variable on a component.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableDecl {
    pub name: String,
    pub direction: Direction,
    pub kind: Kind,
}

impl VariableDecl {
    pub fn input(name: impl Into<String>, kind: Kind) -> Self {
        Self {
            name: name.into(),
            direction: Direction::Input,
            kind,
        }
    }

    pub fn output(name: impl Into<String>, kind: Kind) -> Self {
        Self {
            name: name.into(),
            direction: Direction::Output,
            kind,
        }
    }
}

/// Reference to a variable of a registered component, written `component.variable`.
///
/// The component id never contains a dot; everything after the first dot is
/// the variable name (which may itself be dotted, e.g. `grid.wt01.V`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableRef {
    pub component: String,
    pub variable: String,
}

impl VariableRef {
    pub fn new(component: impl Into<String>, variable: impl Into<String>) -> Self {
        Self {
            component: component.into(),
            variable: variable.into(),
        }
    }
}

impl fmt::Display for VariableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.variable)
    }
}

impl FromStr for VariableRef {
    type Err = MasterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((c, v)) if !c.is_empty() && !v.is_empty() => Ok(Self::new(c, v)),
            _ => Err(MasterError::MalformedReference(s.to_string())),
        }
    }
}

/// Affine map applied on a connection: `sink = gain * source + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub gain: f64,
    pub offset: f64,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        gain: 1.0,
        offset: 0.0,
    };

    pub fn new(gain: f64, offset: f64) -> Result<Self, MasterError> {
        if !gain.is_finite() || gain == 0.0 || !offset.is_finite() {
            return Err(MasterError::InvalidTransform { gain, offset });
        }
        Ok(Self { gain, offset })
    }

    pub fn is_identity(&self) -> bool {
        self.gain == 1.0 && self.offset == 0.0
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.gain * x + self.offset
    }
}

impl Default for Transform {
    fn default() -> Self {
        Self::IDENTITY
    }
}
