use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::expr::{base_names, parse_expr_with, HoloMap, Polydisc};
use crate::fibers::{FiberOptions, PersistenceOptions, SystemFamily};
use crate::numfmt::{ser_f64, ser_opt_f64, F64};
use crate::poly::Cx;
use crate::variety::{coefficient_names, substitute_nu, ApproxScheme};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A complex number written as a JSON number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CxValue(pub Cx);

impl Serialize for CxValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [F64(self.0.re), F64(self.0.im)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for CxValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = CxValue;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a [re, im] pair")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<CxValue, E> {
                Ok(CxValue(Cx::new(v, 0.0)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<CxValue, E> {
                Ok(CxValue(Cx::new(v as f64, 0.0)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<CxValue, E> {
                Ok(CxValue(Cx::new(v as f64, 0.0)))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<CxValue, A::Error> {
                let re: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(CxValue(Cx::new(re, im)))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub center: Vec<CxValue>,
    pub radii: Vec<F64Value>,
}

/// Plain float that serializes at 12 significant digits.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct F64Value(pub f64);

impl Serialize for F64Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_f64(&self.0, s)
    }
}

impl DomainSpec {
    pub fn disc(center: f64, radius: f64) -> Self {
        DomainSpec {
            center: vec![CxValue(Cx::new(center, 0.0))],
            radii: vec![F64Value(radius)],
        }
    }

    pub fn polydisc(&self) -> Polydisc {
        Polydisc {
            center: self.center.iter().map(|c| c.0).collect(),
            radii: self.radii.iter().map(|r| r.0).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Converge,
    Implicitize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub s: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub per_axis: usize,
    pub boundary: usize,
    /// Base points added at each `nu`; every entry lists `n` coordinate templates in `NU`.
    pub extra_points: Vec<Vec<String>>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            per_axis: 21,
            boundary: 64,
            extra_points: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    #[serde(serialize_with = "ser_f64")]
    pub svd_tol: f64,
    #[serde(serialize_with = "ser_f64")]
    pub tol_res: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    pub cluster_radius: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub conv_tol: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    pub delta: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            svd_tol: 1e-8,
            tol_res: 1e-7,
            cluster_radius: None,
            conv_tol: 0.05,
            delta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PersistenceSpec {
    pub k_probes: usize,
    #[serde(serialize_with = "ser_opt_f64")]
    pub probe_radius: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub c_track: Option<f64>,
}

impl Default for PersistenceSpec {
    fn default() -> Self {
        PersistenceSpec {
            k_probes: 4,
            probe_radius: None,
            c_track: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportPaths {
    pub json: Option<String>,
    pub csv: Option<String>,
    pub text: Option<String>,
}

fn default_name() -> String {
    "experiment".to_string()
}

fn default_nu_list() -> Vec<u32> {
    (0..8).map(|k| 1 << k).collect()
}

fn default_degree() -> u32 {
    3
}

fn default_samples() -> usize {
    200
}

fn default_sample_points() -> usize {
    25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub mode: Mode,
    pub dims: Dims,
    /// Components of the coefficient map, in `x1..xn`.
    pub h: Vec<String>,
    /// Equations in `v1..vp, z1..zm`.
    pub q: Vec<String>,
    /// Domain of the coefficient map.
    pub h_domain: DomainSpec,
    /// Test domain, relatively compact in `h_domain`.
    pub domain: DomainSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub scheme: Option<ApproxScheme>,
    #[serde(default = "default_nu_list")]
    pub nu_list: Vec<u32>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_degree")]
    pub degree_bound: u32,
    #[serde(default = "default_samples")]
    pub implicitization_samples: usize,
    #[serde(default = "default_sample_points")]
    pub sample_points: usize,
    #[serde(default)]
    pub seed: u64,
    /// Fixed ball radius; searched for when absent.
    #[serde(default, serialize_with = "ser_opt_f64")]
    pub r: Option<f64>,
    #[serde(default)]
    pub persistence: PersistenceSpec,
    #[serde(default)]
    pub report: ReportPaths,
}

/// Parses and validates a JSON configuration.
pub fn load_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(
            if path == "." { String::new() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    cfg.compile()?;
    Ok(cfg)
}

/// Pretty JSON with every default filled in.
pub fn print_config(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

/// The validated objects a configuration describes.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub h: HoloMap,
    pub sys: SystemFamily,
    pub fiber: FiberOptions,
    pub persistence: PersistenceOptions,
}

fn check_domain(path: &str, d: &DomainSpec, n: usize) -> Result<(), ConfigError> {
    if d.center.len() != n || d.radii.len() != n {
        return Err(ConfigError::new(
            path,
            format!("expected {n} centers and radii"),
        ));
    }
    if let Some(r) = d.radii.iter().find(|r| !(r.0 > 0.0 && r.0.is_finite())) {
        return Err(ConfigError::new(
            path,
            format!("radius {} is not positive", r.0),
        ));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Checks dimensions, expressions and parameters and builds the map and system.
    pub fn compile(&self) -> Result<Compiled, ConfigError> {
        let Dims { n, m, p, s } = self.dims;
        if n == 0 || p == 0 || s == 0 {
            return Err(ConfigError::new("dims", "n, p and s must be positive"));
        }
        if !(1..=2).contains(&m) {
            return Err(ConfigError::new("dims.m", "fiber dimension must be 1 or 2"));
        }
        if self.h.len() != p {
            return Err(ConfigError::new(
                "h",
                format!("dims.p = {p} but {} components given", self.h.len()),
            ));
        }
        if self.q.len() != s {
            return Err(ConfigError::new(
                "q",
                format!("dims.s = {s} but {} equations given", self.q.len()),
            ));
        }
        check_domain("h_domain", &self.h_domain, n)?;
        check_domain("domain", &self.domain, n)?;
        let (u, ut) = (self.h_domain.polydisc(), self.domain.polydisc());
        for j in 0..n {
            if (ut.center[j] - u.center[j]).norm() + ut.radii[j] >= u.radii[j] {
                return Err(ConfigError::new(
                    "domain",
                    "test domain must lie strictly inside h_domain",
                ));
            }
        }

        let base = base_names(n);
        let components = self
            .h
            .iter()
            .enumerate()
            .map(|(i, text)| {
                parse_expr_with(text, &base)
                    .map_err(|e| ConfigError::new(format!("h[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let h = HoloMap::new(components, u).map_err(|e| ConfigError::new("h", e.to_string()))?;

        let vars = SystemFamily::variables(p, m);
        let mut polys = Vec::new();
        for (i, text) in self.q.iter().enumerate() {
            let path = format!("q[{i}]");
            let tree =
                parse_expr_with(text, &vars).map_err(|e| ConfigError::new(&path, e.to_string()))?;
            polys.push(
                tree.to_multipoly(&vars)
                    .map_err(|e| ConfigError::new(&path, e.to_string()))?,
            );
        }
        let sys =
            SystemFamily::new(polys, p, m, ut).map_err(|e| ConfigError::new("q", e.to_string()))?;

        if self.nu_list.is_empty()
            || self.nu_list[0] == 0
            || self.nu_list.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(ConfigError::new(
                "nu_list",
                "must be nonempty, positive and strictly increasing",
            ));
        }
        if self.degree_bound == 0 {
            return Err(ConfigError::new("degree_bound", "must be positive"));
        }
        if self.grid.per_axis < 2 {
            return Err(ConfigError::new(
                "grid.per_axis",
                "need at least 2 points per axis",
            ));
        }
        for (i, point) in self.grid.extra_points.iter().enumerate() {
            if point.len() != n {
                return Err(ConfigError::new(
                    format!("grid.extra_points[{i}]"),
                    format!("expected {n} coordinates"),
                ));
            }
            for (j, t) in point.iter().enumerate() {
                let e = parse_expr_with(&substitute_nu(t, 1), &[] as &[&str]).map_err(|e| {
                    ConfigError::new(format!("grid.extra_points[{i}][{j}]"), e.to_string())
                })?;
                e.constant_value().ok_or_else(|| {
                    ConfigError::new(format!("grid.extra_points[{i}][{j}]"), "not a constant")
                })?;
            }
        }
        if self.mode == Mode::Converge {
            self.check_scheme(n, p)?;
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("svd_tol", t.svd_tol),
            ("tol_res", t.tol_res),
            ("conv_tol", t.conv_tol),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::new(
                    format!("tolerances.{name}"),
                    "must be positive",
                ));
            }
        }
        if self.persistence.k_probes == 0 {
            return Err(ConfigError::new("persistence.k_probes", "must be positive"));
        }
        Ok(Compiled {
            h,
            sys,
            fiber: FiberOptions {
                tol_res: t.tol_res,
                cluster_radius: t.cluster_radius,
            },
            persistence: PersistenceOptions {
                k_probes: self.persistence.k_probes,
                probe_radius: self.persistence.probe_radius,
                c_track: self.persistence.c_track,
                ..PersistenceOptions::default()
            },
        })
    }

    fn check_scheme(&self, n: usize, p: usize) -> Result<(), ConfigError> {
        let scheme = self
            .scheme
            .as_ref()
            .ok_or_else(|| ConfigError::new("scheme", "required in converge mode"))?;
        let base = base_names(n);
        let names = coefficient_names(p);
        match scheme {
            ApproxScheme::Parametric { templates } => {
                if templates.len() != p {
                    return Err(ConfigError::new(
                        "scheme.templates",
                        format!("expected {p} templates"),
                    ));
                }
                for (i, t) in templates.iter().enumerate() {
                    parse_expr_with(&substitute_nu(t, 1), &base).map_err(|e| {
                        ConfigError::new(format!("scheme.templates[{i}]"), e.to_string())
                    })?;
                }
            }
            ApproxScheme::ConstrainedTruncation { free, solved } => {
                if n != 1 {
                    return Err(ConfigError::new("scheme", "truncation schemes need n = 1"));
                }
                for (name, text) in solved {
                    if !names.contains(name) {
                        return Err(ConfigError::new(
                            format!("scheme.solved.{name}"),
                            "unknown component",
                        ));
                    }
                    parse_expr_with(text, free).map_err(|e| {
                        ConfigError::new(format!("scheme.solved.{name}"), e.to_string())
                    })?;
                }
            }
            ApproxScheme::UnconstrainedTruncation { shift } => {
                if n != 1 {
                    return Err(ConfigError::new("scheme", "truncation schemes need n = 1"));
                }
                for (name, t) in shift {
                    if !names.contains(name) {
                        return Err(ConfigError::new(
                            format!("scheme.shift.{name}"),
                            "unknown component",
                        ));
                    }
                    parse_expr_with(&substitute_nu(t, 1), &base).map_err(|e| {
                        ConfigError::new(format!("scheme.shift.{name}"), e.to_string())
                    })?;
                }
            }
        }
        Ok(())
    }

    /// Extra base points for one `nu`.
    pub fn extra_points(&self, nu: u32) -> Vec<Vec<Cx>> {
        self.grid
            .extra_points
            .iter()
            .map(|point| {
                point
                    .iter()
                    .map(|t| {
                        parse_expr_with(&substitute_nu(t, nu), &[] as &[&str])
                            .ok()
                            .and_then(|e| e.constant_value())
                            .expect("validated by compile")
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::demo;

    #[test]
    fn complex_values() {
        let v: Vec<CxValue> = serde_json::from_str("[1, 2.5, [0.5, -1]]").unwrap();
        assert_eq!(v[0].0, Cx::new(1.0, 0.0));
        assert_eq!(v[2].0, Cx::new(0.5, -1.0));
        assert!(serde_json::from_str::<CxValue>("[1, 2, 3]").is_err());
        assert!(serde_json::from_str::<CxValue>("\"1\"").is_err());
    }

    #[test]
    fn missing_q_is_reported() {
        let mut v = serde_json::to_value(demo("example12").unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("q");
        let err = load_config(&v.to_string()).unwrap_err();
        assert!(err.message.contains("missing field `q`"), "{err}");
    }

    #[test]
    fn field_paths_in_errors() {
        let mut v = serde_json::to_value(demo("example12").unwrap()).unwrap();
        v["tolerances"]["svd_tol"] = serde_json::json!("small");
        let err = load_config(&v.to_string()).unwrap_err();
        assert_eq!(err.path, "tolerances.svd_tol");

        let mut v = serde_json::to_value(demo("example12").unwrap()).unwrap();
        v["q"][1] = serde_json::json!("z1^2 + w*z1");
        let err = load_config(&v.to_string()).unwrap_err();
        assert_eq!(err.path, "q[1]");
        assert!(err.message.contains("column 8"), "{err}");
    }

    #[test]
    fn dimension_and_order_checks() {
        let mut cfg = demo("example12").unwrap();
        cfg.dims.p = 4;
        assert_eq!(cfg.compile().unwrap_err().path, "h");
        let mut cfg = demo("example12").unwrap();
        cfg.nu_list = vec![1, 4, 2];
        assert_eq!(cfg.compile().unwrap_err().path, "nu_list");
        let mut cfg = demo("example12").unwrap();
        cfg.domain = DomainSpec::disc(0.0, 1.0);
        assert_eq!(cfg.compile().unwrap_err().path, "domain");
    }

    #[test]
    fn round_trip() {
        for name in crate::experiment::DEMO_NAMES {
            let cfg = demo(name).unwrap();
            assert_eq!(load_config(&print_config(&cfg)).unwrap(), cfg, "{name}");
        }
    }

    #[test]
    fn extra_points_substitute_nu() {
        let cfg = demo("example12").unwrap();
        assert_eq!(cfg.extra_points(16), vec![vec![Cx::new(0.0625, 0.0)]]);
    }
}
