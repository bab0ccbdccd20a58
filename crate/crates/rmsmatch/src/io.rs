//! Reading point sets and the canonical text form of results.

use crate::assignment::Instance;
use crate::error::{Error, Result};
use crate::numeric::geometry::Line;
use crate::numeric::point::Point;
use crate::numeric::scalar::{parse_scalar, Scalar};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Parses `{"A": [[x, y], ...], "B": [...]}`. Coordinates may be integers,
/// decimals (converted exactly) or `"p/q"` strings.
pub fn parse_pointset(text: &str) -> Result<Instance> {
    let inst: Instance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    inst.validate()?;
    Ok(inst)
}

/// Pretty JSON with exact `"p/q"` numbers and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Invariant(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn scalar(s: &str) -> Result<Scalar> {
    parse_scalar(s).ok_or_else(|| Error::Parse(format!("invalid number {s:?}")))
}

/// `"x,y"`.
pub fn parse_point(s: &str) -> Result<Point> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts[..] {
        [x, y] => Ok(Point::new(scalar(x)?, scalar(y)?)),
        _ => Err(Error::Parse(format!("expected x,y, found {s:?}"))),
    }
}

/// `"a,b,c"` for `a x + b y = c`, or `"x=c"`, or `"y=c"`.
pub fn parse_line(s: &str) -> Result<Line> {
    let s = s.trim();
    if let Some(c) = s.strip_prefix("x=") {
        return Ok(Line::vertical(scalar(c)?));
    }
    if let Some(c) = s.strip_prefix("y=") {
        return Ok(Line::horizontal(scalar(c)?));
    }
    let parts: Vec<&str> = s.split(',').collect();
    match parts[..] {
        [a, b, c] => Line::from_coeffs(scalar(a)?, scalar(b)?, scalar(c)?)
            .ok_or_else(|| Error::Validation("line normal must be nonzero".into())),
        _ => Err(Error::Parse(format!("expected a,b,c or x=c or y=c, found {s:?}"))),
    }
}
