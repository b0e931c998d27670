//! Convergence tests of `X_nu` to `X` over a base grid: support convergence
//! ((1l) every root of `X` is approximated, (2l) no roots stay away from `X`)
//! and intersection degrees with vertical slices at regular points.

mod harness;

use serde::Serialize;
use thiserror::Error;

use crate::fibers::{FiberError, FiberSlice};
use crate::numfmt::{ser_f64, ser_vec_cx};
use crate::poly::Cx;

pub use harness::{
    lemma22_check, nu_star, select_sample_points, ConvergenceOptions, ConvergenceReport,
    DegreeTest, FamilyMember, NuRecord, Verdict,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergenceError {
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error("slice lists differ at position {index}")]
    MismatchedGrids { index: usize },
    #[error("slice epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("no root of X at z={z:?} over x={x:?}")]
    NotOnX { x: Vec<Cx>, z: Vec<Cx> },
    #[error("non-transversal slice: root at z={z:?} over x={x:?} has multiplicity {multiplicity}")]
    NonTransversal {
        x: Vec<Cx>,
        z: Vec<Cx>,
        multiplicity: usize,
    },
    #[error("slice around z={z:?} over x={x:?} meets X at another root")]
    NotIsolated { x: Vec<Cx>, z: Vec<Cx> },
    #[error("sample point x={0:?} is not a regular point of X")]
    IrregularSample(Vec<Cx>),
}

fn dist(a: &[Cx], b: &[Cx]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn norm(a: &[Cx]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Distance from `z` to the nearest root of `s` (infinite for an empty fiber).
fn nearest(s: &FiberSlice, z: &[Cx]) -> f64 {
    s.roots
        .iter()
        .map(|r| dist(&r.z, z))
        .fold(f64::INFINITY, f64::min)
}

fn same_grid(a: &[FiberSlice], b: &[FiberSlice]) -> Result<(), ConvergenceError> {
    if a.len() != b.len() {
        return Err(ConvergenceError::MismatchedGrids {
            index: a.len().min(b.len()),
        });
    }
    match a
        .iter()
        .zip(b)
        .position(|(s, t)| s.base_point != t.base_point)
    {
        Some(index) => Err(ConvergenceError::MismatchedGrids { index }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check1l {
    /// Sup over roots of `X` of the distance to the nearest `X_nu` root over the same base.
    #[serde(serialize_with = "ser_f64")]
    pub sup_1l: f64,
    pub pass: bool,
    #[serde(serialize_with = "ser_opt_point")]
    pub worst_base: Option<Vec<Cx>>,
}

fn ser_opt_point<S: serde::Serializer>(p: &Option<Vec<Cx>>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(p) => ser_vec_cx(p, s),
        None => s.serialize_none(),
    }
}

pub fn check_1l(
    x: &[FiberSlice],
    x_nu: &[FiberSlice],
    tol: f64,
) -> Result<Check1l, ConvergenceError> {
    same_grid(x, x_nu)?;
    let mut sup = 0.0f64;
    let mut worst_base = None;
    for (s, t) in x.iter().zip(x_nu) {
        for root in &s.roots {
            let d = nearest(t, &root.z);
            if d > sup || (d.is_infinite() && worst_base.is_none()) {
                sup = d;
                worst_base = Some(s.base_point.clone());
            }
        }
    }
    Ok(Check1l {
        sup_1l: sup,
        pass: sup <= tol,
        worst_base,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpuriousRoot {
    #[serde(serialize_with = "ser_vec_cx")]
    pub x: Vec<Cx>,
    #[serde(serialize_with = "ser_vec_cx")]
    pub z: Vec<Cx>,
    /// Distance to the nearest root of `X` over `x`.
    #[serde(serialize_with = "ser_f64")]
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check2l {
    pub spurious: Vec<SpuriousRoot>,
    pub pass: bool,
    #[serde(serialize_with = "ser_f64")]
    pub delta: f64,
}

/// Roots of `X_nu` in the test compact `{|z| <= r, dist(z, X) >= delta}` over the grid.
pub fn check_2l(
    x: &[FiberSlice],
    x_nu: &[FiberSlice],
    r: f64,
    delta: f64,
) -> Result<Check2l, ConvergenceError> {
    same_grid(x, x_nu)?;
    let mut spurious = Vec::new();
    for (s, t) in x.iter().zip(x_nu) {
        for root in &t.roots {
            let d = nearest(s, &root.z);
            if norm(&root.z) <= r && d >= delta {
                spurious.push(SpuriousRoot {
                    x: t.base_point.clone(),
                    z: root.z.clone(),
                    distance: d,
                });
            }
        }
    }
    Ok(Check2l {
        pass: spurious.is_empty(),
        spurious,
        delta,
    })
}

/// `{x0} x B(z0, epsilon)`, validated against the fiber of `X` over `x0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerticalSlice {
    #[serde(serialize_with = "ser_vec_cx")]
    pub base_point: Vec<Cx>,
    #[serde(serialize_with = "ser_vec_cx")]
    pub center: Vec<Cx>,
    #[serde(serialize_with = "ser_f64")]
    pub epsilon: f64,
}

impl VerticalSlice {
    /// Requires a simple root of `x_fiber` at `center` (within `1e-6 (1 + |center|)`)
    /// and no other root in the closed ball.
    pub fn new(
        x_fiber: &FiberSlice,
        center: &[Cx],
        epsilon: f64,
    ) -> Result<Self, ConvergenceError> {
        if !(epsilon > 0.0) {
            return Err(ConvergenceError::BadEpsilon(epsilon));
        }
        let here = 1e-6 * (1.0 + norm(center));
        let x = x_fiber.base_point.clone();
        let (i, d) = x_fiber
            .roots
            .iter()
            .enumerate()
            .map(|(i, r)| (i, dist(&r.z, center)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| ConvergenceError::NotOnX {
                x: x.clone(),
                z: center.to_vec(),
            })?;
        if d > here {
            return Err(ConvergenceError::NotOnX {
                x,
                z: center.to_vec(),
            });
        }
        let root = &x_fiber.roots[i];
        if root.multiplicity != 1 {
            return Err(ConvergenceError::NonTransversal {
                x,
                z: center.to_vec(),
                multiplicity: root.multiplicity,
            });
        }
        let crowded = x_fiber
            .roots
            .iter()
            .enumerate()
            .any(|(j, r)| j != i && dist(&r.z, center) <= epsilon);
        if crowded {
            return Err(ConvergenceError::NotIsolated {
                x,
                z: center.to_vec(),
            });
        }
        Ok(VerticalSlice {
            base_point: x_fiber.base_point.clone(),
            center: center.to_vec(),
            epsilon,
        })
    }

    /// Slice at root `index` of `x_fiber` with epsilon = half the distance to the
    /// nearest other root, capped at `cap`.
    pub fn auto(x_fiber: &FiberSlice, index: usize, cap: f64) -> Result<Self, ConvergenceError> {
        let center = &x_fiber.roots[index].z;
        let separation = x_fiber
            .roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != index)
            .map(|(_, r)| dist(&r.z, center))
            .fold(f64::INFINITY, f64::min);
        Self::new(x_fiber, center, (0.5 * separation).min(cap))
    }
}

/// Total multiplicity of the roots of `fiber` inside the open ball of `t`.
/// `fiber` must lie over the slice's base point.
pub fn chain_degree_at(fiber: &FiberSlice, t: &VerticalSlice) -> Result<usize, ConvergenceError> {
    if fiber.base_point != t.base_point {
        return Err(ConvergenceError::MismatchedGrids { index: 0 });
    }
    Ok(fiber
        .roots
        .iter()
        .filter(|r| dist(&r.z, &t.center) < t.epsilon)
        .map(|r| r.multiplicity)
        .sum())
}
