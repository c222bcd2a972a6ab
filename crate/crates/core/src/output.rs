//! Fixed-precision float serialization for reproducible JSON.
//!
//! Every float in report JSON is written with exactly six decimals so that
//! identical inputs give byte-identical output. Non-finite values become
//! `null`.

use serde::ser::{Error as _, Serialize, Serializer};
use serde_json::value::RawValue;

pub const DECIMALS: usize = 6;

pub fn format_fixed(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.DECIMALS$}");
        // avoid "-0.000000"
        if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
            s[1..].to_string()
        } else {
            s
        }
    } else {
        "null".to_string()
    }
}

pub fn fixed6<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    RawValue::from_string(format_fixed(*x))
        .map_err(S::Error::custom)?
        .serialize(s)
}

pub fn fixed6_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => fixed6(v, s),
        None => s.serialize_none(),
    }
}

pub fn fixed6_seq<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let raw: Result<Vec<Box<RawValue>>, _> = xs
        .iter()
        .map(|&x| RawValue::from_string(format_fixed(x)))
        .collect();
    raw.map_err(S::Error::custom)?.serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(serde::Serialize)]
    struct Probe {
        #[serde(serialize_with = "fixed6")]
        a: f64,
        #[serde(serialize_with = "fixed6_opt")]
        b: Option<f64>,
        #[serde(serialize_with = "fixed6_seq")]
        c: Vec<f64>,
    }

    #[test]
    fn writes_six_decimals() {
        let p = Probe {
            a: 0.5,
            b: None,
            c: vec![0.5796951, -0.0000001, f64::NAN],
        };
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"a":0.500000,"b":null,"c":[0.579695,0.000000,null]}"#
        );
    }
}
