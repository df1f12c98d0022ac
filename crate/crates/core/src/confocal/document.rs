use serde::{Deserialize, Serialize};

use super::{ConfocalFamily, MinkowskiEllipsoid};
use crate::error::{Error, Result};
use crate::numeric::{fmt_rational, parse_rational, Rational};

/// Text form of the geometric parameters; rationals are `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParameterDocument {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mu: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

fn parse_all(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}

impl ParameterDocument {
    pub fn from_family(f: &ConfocalFamily, c: Option<&Rational>) -> Self {
        ParameterDocument { d: f.dim(), b: strings(f.b()), c: c.map(fmt_rational), ..Default::default() }
    }

    pub fn from_ellipsoid(e: &MinkowskiEllipsoid, c: Option<&Rational>) -> Self {
        ParameterDocument {
            d: e.dim(),
            a: strings(e.a()),
            mu: strings(e.mu()),
            c: c.map(fmt_rational),
            ..Default::default()
        }
    }

    pub fn family(&self) -> Result<ConfocalFamily> {
        let b = parse_all(&self.b)?;
        if b.len() != self.d {
            return Err(Error::Parse(format!("document declares d = {} but lists {} b values", self.d, b.len())));
        }
        ConfocalFamily::symmetric(b)
    }

    pub fn ellipsoid(&self) -> Result<MinkowskiEllipsoid> {
        let a = parse_all(&self.a)?;
        if a.len() != self.d + 1 {
            return Err(Error::Parse(format!("document declares d = {} but lists {} a values", self.d, a.len())));
        }
        MinkowskiEllipsoid::new(a, parse_all(&self.mu)?)
    }

    pub fn shift(&self) -> Result<Option<Rational>> {
        self.c.as_deref().map(parse_rational).transpose()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    #[test]
    fn round_trip() {
        let e = MinkowskiEllipsoid::new(vec![int(4), int(2), int(1)], vec![rat(4, 5)]).unwrap();
        let doc = ParameterDocument::from_ellipsoid(&e, Some(&int(1)));
        let text = doc.to_json();
        assert!(text.contains("\"4/5\""));
        let back = ParameterDocument::from_json(&text).unwrap();
        assert_eq!(back.ellipsoid().unwrap(), e);
        assert_eq!(back.shift().unwrap(), Some(int(1)));

        let f = ConfocalFamily::new(vec![int(2), rat(4, 3)]).unwrap();
        let doc = ParameterDocument::from_family(&f, None);
        assert_eq!(ParameterDocument::from_json(&doc.to_json()).unwrap().family().unwrap(), f);
    }
}
