//! Fibers of `X = {(x, z) : q_i(H(x), z) = 0}` over base points, for one or
//! two fiber variables.

mod persist;
mod proper;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse_expr_with, ExprError, HoloMap, Polydisc};
use crate::numfmt::{ser_f64, ser_vec_cx};
use crate::poly::{
    aberth_roots, cluster_roots, default_cluster_radius, sylvester_resultant, Cx, MultiPoly,
    PolyError, RootCluster, UniPoly,
};
use crate::variety::coefficient_names;

pub use persist::{persistent_roots, PersistenceOptions, PersistenceOutcome};
pub use proper::{
    check_proper, find_r0, sheet_count, sheet_count_of, ProperReport, R0Report, SheetCount,
};

/// Residual acceptance for the root finder, relative to the polynomial scale.
pub const ROOT_TOL: f64 = 1e-9;
/// A restriction is identically zero when every coefficient is below this
/// fraction of its cancellation-free magnitude.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("only fiber dimensions 1 and 2 are supported, got {0}")]
    UnsupportedFiberDim(usize),
    #[error("every equation vanishes identically over x={0:?}: the fiber is not finite")]
    AllDegenerate(Vec<Cx>),
    #[error("fiber over x={0:?} contains a curve")]
    InfiniteFiber(Vec<Cx>),
    #[error("system needs at least one equation")]
    NoEquations,
    #[error("equation {index} uses an undeclared variable: {message}")]
    BadEquation { index: usize, message: String },
    #[error("map has {got} components, system expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty base grid")]
    EmptyGrid,
    #[error("fiber counts do not stabilize for radii up to {cap}")]
    NoStabilization { cap: f64 },
    #[error("probes around x={0:?} leave the test domain after shrinking")]
    ProbeEscapes(Vec<Cx>),
}

/// The equations `q_1..q_s` over `(v_1..v_p, z_1..z_m)` and the test domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemFamily {
    pub q: Vec<MultiPoly>,
    pub p: usize,
    pub m: usize,
    /// Relatively compact test domain inside the map's domain.
    pub domain: Polydisc,
}

pub fn fiber_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("z{i}")).collect()
}

impl SystemFamily {
    pub fn new(
        q: Vec<MultiPoly>,
        p: usize,
        m: usize,
        domain: Polydisc,
    ) -> Result<Self, FiberError> {
        if q.is_empty() {
            return Err(FiberError::NoEquations);
        }
        if m == 0 || m > 2 {
            return Err(FiberError::UnsupportedFiberDim(m));
        }
        let vars = Self::variables(p, m);
        let q = q
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                e.embed(&vars).map_err(|err| FiberError::BadEquation {
                    index: i + 1,
                    message: err.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(SystemFamily { q, p, m, domain })
    }

    /// Parses each equation over `v1..vp, z1..zm`.
    pub fn parse(
        q: &[impl AsRef<str>],
        p: usize,
        m: usize,
        domain: Polydisc,
    ) -> Result<Self, FiberError> {
        let vars = Self::variables(p, m);
        let polys = q
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let bad = |message: String| FiberError::BadEquation {
                    index: i + 1,
                    message,
                };
                let tree = parse_expr_with(text.as_ref(), &vars).map_err(|e| bad(e.to_string()))?;
                tree.to_multipoly(&vars).map_err(|e| bad(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(polys, p, m, domain)
    }

    pub fn variables(p: usize, m: usize) -> Vec<String> {
        let mut v = coefficient_names(p);
        v.extend(fiber_names(m));
        v
    }

    pub fn s(&self) -> usize {
        self.q.len()
    }
}

/// One point of a fiber with its multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberRoot {
    #[serde(serialize_with = "ser_vec_cx")]
    pub z: Vec<Cx>,
    pub multiplicity: usize,
    /// Max over non-degenerate equations of the scaled residual at `z`.
    #[serde(serialize_with = "ser_f64")]
    pub residual: f64,
}

/// The roots of a fiber inside the closed ball of radius `radius`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberSlice {
    #[serde(serialize_with = "ser_vec_cx")]
    pub base_point: Vec<Cx>,
    #[serde(serialize_with = "ser_f64")]
    pub radius: f64,
    pub roots: Vec<FiberRoot>,
    #[serde(serialize_with = "ser_f64")]
    pub residual_max: f64,
    /// 1-based indices of equations vanishing identically over this base point.
    pub degenerate_equations: Vec<usize>,
    /// Multiplicity-weighted count of roots discarded outside the ball.
    pub outside: usize,
}

impl FiberSlice {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn distinct(&self) -> usize {
        self.roots.len()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_equations.is_empty()
    }

    /// Largest root norm, or 0 for an empty fiber.
    pub fn max_norm(&self) -> f64 {
        self.roots.iter().map(|r| znorm(&r.z)).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberOptions {
    /// Residual bound relative to the restriction's coefficient scale.
    pub tol_res: f64,
    /// Clustering radius; `None` uses the default relative radius.
    pub cluster_radius: Option<f64>,
}

impl Default for FiberOptions {
    fn default() -> Self {
        FiberOptions {
            tol_res: 1e-7,
            cluster_radius: None,
        }
    }
}

pub(crate) fn znorm(z: &[Cx]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `q_i(v, .)` as a polynomial in the fiber variables, with its degeneracy verdict.
struct Restriction {
    poly: MultiPoly,
    degenerate: bool,
}

impl Restriction {
    fn scale(&self) -> f64 {
        self.poly.scale()
    }

    fn degree(&self) -> u32 {
        self.poly.total_degree().unwrap_or(0)
    }

    /// `|q(z)| / (scale * max(1, |z|)^deg)`.
    fn scaled_residual(&self, z: &[Cx]) -> f64 {
        let s = self.scale();
        self.poly.eval_slice(z).norm() / (s * znorm(z).max(1.0).powi(self.degree() as i32))
    }
}

fn restrictions(sys: &SystemFamily, v: &[Cx]) -> Vec<Restriction> {
    let values: BTreeMap<String, Cx> = coefficient_names(sys.p)
        .into_iter()
        .zip(v.iter().copied())
        .collect();
    let vmax = v.iter().map(|c| c.norm()).fold(1.0, f64::max);
    sys.q
        .iter()
        .map(|q| {
            let poly = q.substitute(&values);
            let magnitude: f64 = q
                .terms()
                .map(|(e, c)| c.norm() * vmax.powi(e[..sys.p].iter().sum::<u32>() as i32))
                .sum();
            let degenerate = poly.scale() <= DEGENERACY_TOL * magnitude;
            Restriction { poly, degenerate }
        })
        .collect()
}

fn clusters(roots: &[Cx], opts: &FiberOptions) -> Vec<RootCluster> {
    let radius = opts
        .cluster_radius
        .unwrap_or_else(|| default_cluster_radius(roots));
    cluster_roots(roots, radius)
}

/// Roots of a univariate restriction; a nonzero constant has none.
fn univariate_roots(p: &UniPoly) -> Result<Vec<Cx>, FiberError> {
    match p.degree() {
        None => Err(PolyError::ZeroPolynomial.into()),
        Some(0) => Ok(Vec::new()),
        Some(_) => Ok(aberth_roots(p, ROOT_TOL)?),
    }
}

/// Solves the fiber of the system over `x` with coefficients `map(x)`.
pub fn fiber_solve(
    sys: &SystemFamily,
    map: &HoloMap,
    x: &[Cx],
    r: f64,
    opts: &FiberOptions,
) -> Result<FiberSlice, FiberError> {
    if map.p() != sys.p {
        return Err(FiberError::DimensionMismatch {
            expected: sys.p,
            got: map.p(),
        });
    }
    let v = map.eval(x)?;
    let rs = restrictions(sys, &v);
    let degenerate_equations: Vec<usize> = (0..rs.len())
        .filter(|&i| rs[i].degenerate)
        .map(|i| i + 1)
        .collect();
    let live: Vec<&Restriction> = rs.iter().filter(|r| !r.degenerate).collect();
    if live.is_empty() {
        return Err(FiberError::AllDegenerate(x.to_vec()));
    }
    let candidates = match sys.m {
        1 => solve_one(&live, opts)?,
        2 => solve_two(&live, x, opts)?,
        m => return Err(FiberError::UnsupportedFiberDim(m)),
    };

    let mut roots = Vec::new();
    let mut outside = 0;
    for (z, multiplicity) in candidates {
        let residual = live
            .iter()
            .map(|r| r.scaled_residual(&z))
            .fold(0.0, f64::max);
        if !(residual <= opts.tol_res) {
            continue;
        }
        if znorm(&z) > r {
            outside += multiplicity;
            continue;
        }
        roots.push(FiberRoot {
            z,
            multiplicity,
            residual,
        });
    }
    let residual_max = roots.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(FiberSlice {
        base_point: x.to_vec(),
        radius: r,
        roots,
        residual_max,
        degenerate_equations,
        outside,
    })
}

/// Candidate roots from the lowest-degree restriction (first on ties).
fn solve_one(
    live: &[&Restriction],
    opts: &FiberOptions,
) -> Result<Vec<(Vec<Cx>, usize)>, FiberError> {
    let pivot = live.iter().min_by_key(|r| r.degree()).expect("nonempty");
    let roots = univariate_roots(&pivot.poly.to_unipoly()?)?;
    Ok(clusters(&roots, opts)
        .into_iter()
        .map(|c| (vec![c.center], c.multiplicity))
        .collect())
}

fn degree_in(p: &MultiPoly, var: &str) -> u32 {
    p.degree_in(var).ok().flatten().unwrap_or(0)
}

/// Restriction of a two-variable polynomial to `z1 = a`, as a polynomial in `z2`.
fn at_z1(p: &MultiPoly, a: Cx) -> MultiPoly {
    p.substitute(&BTreeMap::from([("z1".to_string(), a)]))
}

fn solve_two(
    live: &[&Restriction],
    x: &[Cx],
    opts: &FiberOptions,
) -> Result<Vec<(Vec<Cx>, usize)>, FiberError> {
    // Candidate z1 values: from a z2-free equation when there is one, else by
    // eliminating z2 against the first equation.
    let z2_free: Vec<&&Restriction> = live
        .iter()
        .filter(|r| degree_in(&r.poly, "z2") == 0)
        .collect();
    let z1_poly: UniPoly = if let Some(r) = z2_free.iter().min_by_key(|r| r.degree()) {
        at_z2_free(&r.poly)?
    } else {
        let pivot = &live[0].poly;
        let mut best: Option<UniPoly> = None;
        for other in &live[1..] {
            let res = sylvester_resultant(pivot, &other.poly, "z2")?;
            let bound = pivot.scale().powi(degree_in(&other.poly, "z2") as i32)
                * other.scale().powi(degree_in(pivot, "z2") as i32);
            if res.scale() <= DEGENERACY_TOL * bound {
                continue;
            }
            let u = res.to_unipoly()?;
            if best.as_ref().is_none_or(|b| u.degree() < b.degree()) {
                best = Some(u);
            }
        }
        best.ok_or_else(|| FiberError::InfiniteFiber(x.to_vec()))?
    };
    let z1_clusters = clusters(&univariate_roots(&z1_poly)?, opts);

    let mut out = Vec::new();
    for c1 in z1_clusters {
        let restricted: Vec<MultiPoly> = live.iter().map(|r| at_z1(&r.poly, c1.center)).collect();
        let pivot = restricted
            .iter()
            .zip(live)
            .filter(|(p, r)| {
                p.scale()
                    > DEGENERACY_TOL * r.scale() * c1.center.norm().max(1.0).powi(r.degree() as i32)
            })
            .map(|(p, _)| p)
            .min_by_key(|p| p.total_degree().unwrap_or(0));
        let Some(pivot) = pivot else {
            return Err(FiberError::InfiniteFiber(x.to_vec()));
        };
        let z2_roots = univariate_roots(&pivot.to_unipoly()?)?;
        let z2_clusters = clusters(&z2_roots, opts);
        let single = z2_clusters.len() == 1;
        for c2 in z2_clusters {
            let multiplicity = if single {
                c1.multiplicity.max(c2.multiplicity)
            } else {
                c2.multiplicity
            };
            out.push((vec![c1.center, c2.center], multiplicity));
        }
    }
    Ok(out)
}

fn at_z2_free(p: &MultiPoly) -> Result<UniPoly, FiberError> {
    let z1_only = p.substitute(&BTreeMap::from([("z2".to_string(), Cx::new(0.0, 0.0))]));
    Ok(z1_only.to_unipoly()?)
}
