//! The cursedness parameter and grids over it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::round_sig;

/// Degree of cursedness, a number in `[0, 1]`.
///
/// `0` is the fully rational receiver, `1` the receiver who ignores any
/// dependence between messages and types.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Chi(f64);

impl Chi {
    pub const ZERO: Chi = Chi(0.0);
    pub const ONE: Chi = Chi(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Chi(value))
        } else {
            Err(Error::invalid(format!("chi must lie in [0, 1], got {value}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - chi`.
    #[inline]
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }

    pub fn is_fully_cursed(self) -> bool {
        self.0 >= 1.0
    }

    /// Inclusive grid `start, start + step, ..., stop`.
    ///
    /// Grid values are rounded to 12 significant digits so that a grid such
    /// as `0:1:0.005` hits `0.55` and `0.775` exactly rather than a
    /// neighbouring float.
    pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<Chi>> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid(format!("grid step must be positive, got {step}")));
        }
        Chi::new(start)?;
        Chi::new(stop)?;
        if stop < start {
            return Err(Error::invalid(format!("grid stop {stop} is below start {start}")));
        }
        let span = (stop - start) / step;
        let count = (span + 1e-9).floor() as usize;
        if count > 10_000_000 {
            return Err(Error::invalid(format!("grid has too many points ({count})")));
        }
        (0..=count)
            .map(|i| Chi::new(round_sig(start + i as f64 * step).min(1.0)))
            .collect()
    }

    /// Parses `start:stop:step`, or a single value.
    pub fn parse_grid(spec: &str) -> Result<Vec<Chi>> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("not a number in chi grid: {s:?}")))
        };
        match parts.as_slice() {
            [one] => Ok(vec![Chi::new(num(one)?)?]),
            [a, b, c] => Chi::grid(num(a)?, num(b)?, num(c)?),
            _ => Err(Error::invalid(format!(
                "chi grid must be `value` or `start:stop:step`, got {spec:?}"
            ))),
        }
    }
}

impl TryFrom<f64> for Chi {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Chi::new(value)
    }
}

impl From<Chi> for f64 {
    fn from(c: Chi) -> f64 {
        c.0
    }
}

impl fmt::Display for Chi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}
