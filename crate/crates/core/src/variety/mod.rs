//! Numerical implicitization: low-degree polynomial relations satisfied by a
//! sampled point set, found as near-null singular directions of the monomial
//! evaluation matrix.

mod approx;
mod nash;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::ser::{Serialize, SerializeStruct, Serializer};
use thiserror::Error;

use crate::expr::ExprError;
use crate::numfmt::{fmt12, ser_vec_f64, F64};
use crate::poly::{monomials_up_to, Cx, MultiPoly};

pub use approx::{make_approximant, substitute_nu, ApproxScheme, Approximant};
pub use nash::{nash_witness, nash_witness_with, NashOptions};

/// Default relative singular-value threshold.
pub const DEFAULT_SVD_TOL: f64 = 1e-8;
/// Every `HOLDOUT_STRIDE`-th sample is withheld from the fit.
pub const HOLDOUT_STRIDE: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarietyError {
    #[error("need at least {needed} samples for {monomials} monomials, got {got}")]
    TooFewSamples {
        needed: usize,
        monomials: usize,
        got: usize,
    },
    #[error("all singular values are below tolerance (degenerate sample set)")]
    Degenerate,
    #[error("samples have inconsistent dimensions ({expected} vs {got})")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sample contains a non-finite coordinate")]
    NonFinite,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("scheme is not in solved form: {0}")]
    NotSolvedForm(String),
    #[error("approximant leaves the variety at nu={nu}: residual {residual:e} at x={at:?}")]
    MembershipViolation { nu: u32, residual: f64, at: Vec<Cx> },
}

/// Orthonormal basis of the degree-`<= d` relations of a sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct VarietyBasis {
    pub vars: Vec<String>,
    pub degree_bound: u32,
    /// Coefficient vectors (over the monomial list) are orthonormal.
    pub relations: Vec<MultiPoly>,
    pub svd_tol: f64,
    pub sample_count: usize,
    /// Descending singular values of the column-scaled training matrix.
    pub singular_values: Vec<f64>,
    /// Max normalized relation residual on the fitted samples.
    pub train_residual: f64,
    /// Max normalized relation residual on the withheld samples.
    pub holdout_residual: f64,
}

/// `["v1", ..., "vp"]`.
pub fn coefficient_names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("v{i}")).collect()
}

fn monomial_value(point: &[Cx], exps: &[u32]) -> Cx {
    exps.iter().zip(point).map(|(&k, x)| x.powu(k)).product()
}

fn norm(x: &[Cx]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Cx], b: &[Cx]) -> Cx {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Modified Gram-Schmidt, two passes. Vectors that vanish are dropped.
fn orthonormalize(mut vs: Vec<Vec<Cx>>) -> Vec<Vec<Cx>> {
    let mut out: Vec<Vec<Cx>> = Vec::new();
    for v in vs.iter_mut() {
        let original = norm(v);
        for _ in 0..2 {
            for u in &out {
                let c = dot(u, v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= c * ui;
                }
            }
        }
        let n = norm(v);
        if n > 1e-12 * original.max(f64::MIN_POSITIVE) {
            out.push(v.iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Right null directions of `a` with singular value below `threshold`,
/// plus the descending singular values. Rows are zero-padded so the
/// decomposition always yields a full set of right vectors.
fn null_directions(a: &DMatrix<Cx>, threshold: impl Fn(f64) -> f64) -> (Vec<Vec<Cx>>, Vec<f64>) {
    let cols = a.ncols();
    let padded = if a.nrows() < cols {
        let mut m = DMatrix::zeros(cols, cols);
        m.rows_mut(0, a.nrows()).copy_from(a);
        m
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let cut = threshold(sigma.first().copied().unwrap_or(0.0));
    let null = order
        .iter()
        .filter(|&&i| svd.singular_values[i] < cut)
        .map(|&i| (0..cols).map(|j| v_t[(i, j)].conj()).collect())
        .collect();
    (null, sigma)
}

fn relation_from(vars: &[String], monomials: &[Vec<u32>], coeffs: &[Cx]) -> MultiPoly {
    let mut p = MultiPoly::zero(vars);
    for (e, c) in monomials.iter().zip(coeffs) {
        p.add_term(e.clone(), *c);
    }
    p
}

fn coefficient_vector(p: &MultiPoly, monomials: &[Vec<u32>]) -> Vec<Cx> {
    monomials.iter().map(|e| p.coefficient(e)).collect()
}

/// Relations of degree `<= d` vanishing on `samples`.
///
/// Every `HOLDOUT_STRIDE`-th sample is withheld and only used to report
/// `holdout_residual`.
pub fn vanishing_ideal(
    samples: &[Vec<Cx>],
    d: u32,
    svd_tol: f64,
) -> Result<VarietyBasis, VarietyError> {
    let p = samples.first().map(Vec::len).unwrap_or(0);
    let monomials = monomials_up_to(p, d);
    let needed = 3 * monomials.len();
    if samples.len() < needed || p == 0 {
        return Err(VarietyError::TooFewSamples {
            needed,
            monomials: monomials.len(),
            got: samples.len(),
        });
    }
    for s in samples {
        if s.len() != p {
            return Err(VarietyError::DimensionMismatch {
                expected: p,
                got: s.len(),
            });
        }
        if s.iter().any(|c| !c.is_finite()) {
            return Err(VarietyError::NonFinite);
        }
    }
    let (train, holdout): (Vec<_>, Vec<_>) = samples
        .iter()
        .enumerate()
        .partition(|(i, _)| i % HOLDOUT_STRIDE != HOLDOUT_STRIDE - 1);
    let train: Vec<&Vec<Cx>> = train.into_iter().map(|(_, s)| s).collect();
    let holdout: Vec<&Vec<Cx>> = holdout.into_iter().map(|(_, s)| s).collect();

    let mut a = DMatrix::from_fn(train.len(), monomials.len(), |i, j| {
        monomial_value(train[i], &monomials[j])
    });
    let scales: Vec<f64> = (0..a.ncols())
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }

    let (null, sigma) = null_directions(&a, |smax| svd_tol * smax);
    if sigma.first().is_none_or(|&s| s == 0.0) {
        return Err(VarietyError::Degenerate);
    }
    let unscaled: Vec<Vec<Cx>> = null
        .into_iter()
        .map(|c| c.iter().zip(&scales).map(|(x, s)| x / s).collect())
        .collect();
    let vars = coefficient_names(p);
    let relations: Vec<MultiPoly> = orthonormalize(unscaled)
        .iter()
        .map(|c| relation_from(&vars, &monomials, c))
        .collect();

    let mut basis = VarietyBasis {
        vars,
        degree_bound: d,
        relations,
        svd_tol,
        sample_count: samples.len(),
        singular_values: sigma,
        train_residual: 0.0,
        holdout_residual: 0.0,
    };
    basis.train_residual = train
        .iter()
        .map(|s| basis.membership_residual(s))
        .fold(0.0, f64::max);
    basis.holdout_residual = holdout
        .iter()
        .map(|s| basis.membership_residual(s))
        .fold(0.0, f64::max);
    Ok(basis)
}

impl VarietyBasis {
    pub fn dim(&self) -> usize {
        self.relations.len()
    }

    pub fn monomials(&self) -> Vec<Vec<u32>> {
        monomials_up_to(self.vars.len(), self.degree_bound)
    }

    /// `max_j |relation_j(point)| / (1 + |point|^d)`; zero for an empty basis.
    pub fn membership_residual(&self, point: &[Cx]) -> f64 {
        let denom = 1.0 + norm(point).powi(self.degree_bound as i32);
        self.relations
            .iter()
            .map(|r| r.eval_slice(point).norm() / denom)
            .fold(0.0, f64::max)
    }

    /// Orthonormal basis of the relations in the span that have total degree `<= k`.
    pub fn relations_up_to_degree(&self, k: u32) -> Vec<MultiPoly> {
        if k >= self.degree_bound || self.relations.is_empty() {
            return self.relations.clone();
        }
        let monomials = self.monomials();
        let vectors: Vec<Vec<Cx>> = self
            .relations
            .iter()
            .map(|r| coefficient_vector(r, &monomials))
            .collect();
        let high: Vec<usize> = (0..monomials.len())
            .filter(|&i| monomials[i].iter().sum::<u32>() > k)
            .collect();
        // Combinations of relations whose high-degree part cancels.
        let b = DMatrix::from_fn(high.len(), vectors.len(), |i, j| vectors[j][high[i]]);
        let (combos, _) = null_directions(&b, |_| 1e-8);
        let low: Vec<Vec<Cx>> = combos
            .iter()
            .map(|w| {
                (0..monomials.len())
                    .map(|i| {
                        if high.contains(&i) {
                            Cx::new(0.0, 0.0)
                        } else {
                            w.iter().zip(&vectors).map(|(wj, v)| wj * v[i]).sum()
                        }
                    })
                    .collect()
            })
            .collect();
        orthonormalize(low)
            .iter()
            .map(|c| relation_from(&self.vars, &monomials, c))
            .collect()
    }

    /// Largest principal-angle sine between this span and `other`'s
    /// (0 for identical spans, 1 if some direction is orthogonal).
    pub fn subspace_distance(&self, other: &VarietyBasis) -> f64 {
        if self.dim() != other.dim()
            || self.vars != other.vars
            || self.degree_bound != other.degree_bound
        {
            return 1.0;
        }
        let monomials = self.monomials();
        let theirs: Vec<Vec<Cx>> = other
            .relations
            .iter()
            .map(|r| coefficient_vector(r, &monomials))
            .collect();
        self.relations
            .iter()
            .map(|r| {
                let mut v = coefficient_vector(r, &monomials);
                for u in &theirs {
                    let c = dot(u, &v);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= c * ui;
                    }
                }
                norm(&v)
            })
            .fold(0.0, f64::max)
    }
}

/// A relation scaled so its largest coefficient is 1, with negligible terms
/// dropped and coefficients at 12 significant digits.
pub fn normalized_relation(p: &MultiPoly) -> String {
    let lead = p
        .terms()
        .map(|(_, c)| c)
        .fold(Cx::new(0.0, 0.0), |best, c| {
            if c.norm() > best.norm() * (1.0 + 1e-9) {
                c
            } else {
                best
            }
        });
    if lead.norm() == 0.0 {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (e, c) in p.terms().collect::<Vec<_>>().into_iter().rev() {
        let c = c / lead;
        if c.norm() < 1e-10 {
            continue;
        }
        let coeff = if c.im.abs() <= 1e-12 * c.norm().max(1.0) {
            fmt12(c.re)
        } else {
            format!(
                "({}{}{}i)",
                fmt12(c.re),
                if c.im < 0.0 { "-" } else { "+" },
                fmt12(c.im.abs())
            )
        };
        let mono: Vec<String> = p
            .vars()
            .iter()
            .zip(e)
            .filter(|(_, &k)| k > 0)
            .map(|(v, &k)| {
                if k == 1 {
                    v.clone()
                } else {
                    format!("{v}^{k}")
                }
            })
            .collect();
        parts.push(if mono.is_empty() {
            coeff
        } else {
            format!("{coeff}*{}", mono.join("*"))
        });
    }
    parts.join(" + ")
}

/// Residual of `point` relative to `basis` (see [`VarietyBasis::membership_residual`]).
pub fn membership_residual(basis: &VarietyBasis, point: &[Cx]) -> f64 {
    basis.membership_residual(point)
}

fn exponent_key(e: &[u32]) -> String {
    e.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

impl Serialize for VarietyBasis {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let relations: Vec<BTreeMap<String, [F64; 2]>> = self
            .relations
            .iter()
            .map(|r| {
                r.terms()
                    .map(|(e, c)| (exponent_key(e), [F64(c.re), F64(c.im)]))
                    .collect()
            })
            .collect();
        struct Sigma<'a>(&'a [f64]);
        impl Serialize for Sigma<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                ser_vec_f64(self.0, s)
            }
        }
        let mut st = s.serialize_struct("VarietyBasis", 8)?;
        st.serialize_field("vars", &self.vars)?;
        st.serialize_field("degree_bound", &self.degree_bound)?;
        st.serialize_field("svd_tol", &F64(self.svd_tol))?;
        st.serialize_field("sample_count", &self.sample_count)?;
        st.serialize_field("relation_count", &self.relations.len())?;
        st.serialize_field("relations", &relations)?;
        st.serialize_field("singular_values", &Sigma(&self.singular_values))?;
        st.serialize_field("train_residual", &F64(self.train_residual))?;
        st.serialize_field("holdout_residual", &F64(self.holdout_residual))?;
        st.end()
    }
}
