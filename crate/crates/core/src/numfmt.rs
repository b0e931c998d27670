//! Fixed-precision float output for byte-stable reports.

use serde::Serializer;

use crate::poly::Cx;

/// Rounds to 12 significant digits. Non-finite values pass through.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn non_finite_name(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// Serializes a float at 12 significant digits; infinities become the strings `"inf"`/`"-inf"`.
pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(round12(*x))
    } else {
        s.serialize_str(non_finite_name(*x))
    }
}

pub fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

pub fn ser_vec_f64<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&F64(*x))?;
    }
    seq.end()
}

pub fn ser_cx<S: Serializer>(z: &Cx, s: S) -> Result<S::Ok, S::Error> {
    ser_vec_f64(&[z.re, z.im], s)
}

pub fn ser_vec_cx<S: Serializer>(zs: &[Cx], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(zs.len()))?;
    for z in zs {
        seq.serialize_element(&[F64(z.re), F64(z.im)])?;
    }
    seq.end()
}

/// Newtype carrying the 12-digit serialization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F64(pub f64);

impl serde::Serialize for F64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_f64(&self.0, s)
    }
}

/// Text rendering matching the JSON form.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        let r = round12(x);
        if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e12) {
            format!("{r:e}")
        } else {
            format!("{r}")
        }
    } else {
        non_finite_name(x).to_string()
    }
}
