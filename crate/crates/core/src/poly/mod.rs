//! Complex polynomial arithmetic.
//!
//! [`MultiPoly`] is a dense exponent-map polynomial over an ordered list of
//! named variables. Terms are kept in a `BTreeMap`, so every iteration runs in
//! lexicographic exponent order and results are reproducible bit for bit.

mod resultant;
mod roots;
mod univariate;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub use resultant::{leading_coefficient_in, sylvester_matrix, sylvester_resultant};
pub use roots::{
    aberth_roots, aberth_roots_with, cluster_roots, default_cluster_radius, AberthOptions,
    RootCluster,
};
pub use univariate::UniPoly;

/// Complex scalar used throughout the crate.
pub type Cx = Complex64;

/// Leading coefficients below `LEAD_EPS * scale` are dropped when normalizing degree.
pub const LEAD_EPS: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("missing value for variable `{0}`")]
    MissingVariable(String),
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("polynomial has degree 0, no roots to find")]
    DegreeZero,
    #[error("root finder did not converge after {iterations} iterations (max residual {max_residual:e})")]
    NoConvergence {
        iterations: usize,
        max_residual: f64,
    },
    #[error("polynomial has degree 0 in `{0}`")]
    ZeroDegreeIn(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable lists differ: {0:?} vs {1:?}")]
    VariableMismatch(Vec<String>, Vec<String>),
    #[error("polynomial is not univariate (variables {0:?})")]
    NotUnivariate(Vec<String>),
    #[error("non-finite value produced")]
    NonFinite,
}

/// Multivariate polynomial with complex coefficients.
///
/// Exponent vectors have one entry per variable, in the order of `vars`.
/// Exactly-zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, Cx>,
}

impl MultiPoly {
    pub fn zero(vars: &[impl AsRef<str>]) -> Self {
        MultiPoly {
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[impl AsRef<str>], c: Cx) -> Self {
        let mut p = Self::zero(vars);
        let n = p.vars.len();
        p.add_term(vec![0; n], c);
        p
    }

    /// The polynomial consisting of the single variable `name`.
    pub fn variable(vars: &[impl AsRef<str>], name: &str) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars);
        let idx = p
            .var_index(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        let mut e = vec![0; p.vars.len()];
        e[idx] = 1;
        p.add_term(e, Cx::new(1.0, 0.0));
        Ok(p)
    }

    pub fn from_terms(
        vars: &[impl AsRef<str>],
        terms: impl IntoIterator<Item = (Vec<u32>, Cx)>,
    ) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(
                e.len(),
                p.vars.len(),
                "exponent length must match variable count"
            );
            p.add_term(e, c);
        }
        p
    }

    /// Adds `c` to the coefficient of the monomial `exps`, dropping it if it cancels to zero.
    pub fn add_term(&mut self, exps: Vec<u32>, c: Cx) {
        if c == Cx::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == Cx::new(0.0, 0.0) {
                    slot.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Cx)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Cx {
        self.terms.get(exps).copied().unwrap_or_default()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree in one variable; `None` for the zero polynomial.
    pub fn degree_in(&self, name: &str) -> Result<Option<u32>, PolyError> {
        let idx = self
            .var_index(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(self.terms.keys().map(|e| e[idx]).max())
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn scale(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Evaluates at an assignment of every variable.
    pub fn eval(&self, point: &BTreeMap<String, Cx>) -> Result<Cx, PolyError> {
        let values = self
            .vars
            .iter()
            .map(|v| {
                point
                    .get(v)
                    .copied()
                    .ok_or_else(|| PolyError::MissingVariable(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.eval_slice(&values))
    }

    /// Evaluates with values given positionally in variable order.
    ///
    /// Recursive Horner scheme: terms are grouped by the exponent of the
    /// leading variable, each group's coefficient is evaluated in the
    /// remaining variables, then combined by Horner's rule.
    pub fn eval_slice(&self, values: &[Cx]) -> Cx {
        assert_eq!(values.len(), self.vars.len(), "one value per variable");
        let terms: Vec<(&[u32], Cx)> = self.terms().collect();
        horner(&terms, 0, values)
    }

    /// Same as [`eval_slice`](Self::eval_slice) but also returns the
    /// cancellation-free magnitude `sum |c| * prod |x_j|^e_j`.
    pub fn eval_with_magnitude(&self, values: &[Cx]) -> (Cx, f64) {
        let magnitude = self
            .terms
            .iter()
            .map(|(e, c)| {
                c.norm()
                    * e.iter()
                        .zip(values)
                        .map(|(&k, x)| x.norm().powi(k as i32))
                        .product::<f64>()
            })
            .sum();
        (self.eval_slice(values), magnitude)
    }

    /// Re-expresses the polynomial over a superset (or permutation) of its variables.
    pub fn embed(&self, new_vars: &[impl AsRef<str>]) -> Result<Self, PolyError> {
        let new_vars: Vec<String> = new_vars.iter().map(|v| v.as_ref().to_string()).collect();
        let map = self
            .vars
            .iter()
            .map(|v| {
                new_vars
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| PolyError::UnknownVariable(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = MultiPoly::zero(&new_vars);
        for (e, c) in &self.terms {
            let mut ne = vec![0; new_vars.len()];
            for (i, &k) in e.iter().enumerate() {
                ne[map[i]] = k;
            }
            out.add_term(ne, *c);
        }
        Ok(out)
    }

    /// Substitutes numeric values for some variables; the result keeps the remaining ones.
    pub fn substitute(&self, values: &BTreeMap<String, Cx>) -> MultiPoly {
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|&i| !values.contains_key(&self.vars[i]))
            .collect();
        let kept_vars: Vec<String> = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let mut out = MultiPoly::zero(&kept_vars);
        for (e, c) in &self.terms {
            let mut coef = *c;
            for (i, &k) in e.iter().enumerate() {
                if let Some(x) = values.get(&self.vars[i]) {
                    coef *= x.powu(k);
                }
            }
            out.add_term(keep.iter().map(|&i| e[i]).collect(), coef);
        }
        out
    }

    /// Splits into coefficients of powers of `name`: `self = sum_k c_k * name^k`,
    /// each `c_k` over the remaining variables.
    pub fn coefficients_in(&self, name: &str) -> Result<Vec<MultiPoly>, PolyError> {
        let idx = self
            .var_index(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        let rest: Vec<String> = self
            .vars
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != idx)
            .map(|(_, v)| v.clone())
            .collect();
        let deg = self.degree_in(name)?.unwrap_or(0) as usize;
        let mut out = vec![MultiPoly::zero(&rest); deg + 1];
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne.remove(idx) as usize;
            out[k].add_term(ne, *c);
        }
        Ok(out)
    }

    /// Converts a polynomial in exactly one variable (or a constant) to a [`UniPoly`].
    pub fn to_unipoly(&self) -> Result<UniPoly, PolyError> {
        match self.vars.len() {
            0 => Ok(UniPoly::new(vec![self.coefficient(&[])])),
            1 => {
                let deg = self.degree_in(&self.vars[0])?.unwrap_or(0) as usize;
                let mut coeffs = vec![Cx::new(0.0, 0.0); deg + 1];
                for (e, c) in &self.terms {
                    coeffs[e[0] as usize] = *c;
                }
                Ok(UniPoly::new(coeffs))
            }
            _ => Err(PolyError::NotUnivariate(self.vars.clone())),
        }
    }

    pub fn scale_by(&self, s: Cx) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(&self.vars, Cx::new(1.0, 0.0));
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn check_same_vars(&self, other: &MultiPoly) {
        assert_eq!(
            self.vars, other.vars,
            "polynomial arithmetic requires identical variable lists"
        );
    }
}

fn horner(terms: &[(&[u32], Cx)], depth: usize, values: &[Cx]) -> Cx {
    if terms.is_empty() {
        return Cx::new(0.0, 0.0);
    }
    if depth == values.len() {
        return terms.iter().map(|(_, c)| *c).sum();
    }
    // Terms are in lex order, so equal exponents of `depth` are contiguous
    // provided all earlier exponents agree, which holds within a recursion group.
    let mut groups: Vec<(u32, Cx)> = Vec::new();
    let mut start = 0;
    while start < terms.len() {
        let k = terms[start].0[depth];
        let mut end = start + 1;
        while end < terms.len() && terms[end].0[depth] == k {
            end += 1;
        }
        groups.push((k, horner(&terms[start..end], depth + 1, values)));
        start = end;
    }
    let x = values[depth];
    let mut acc = Cx::new(0.0, 0.0);
    let mut prev = groups.last().map(|g| g.0).unwrap_or(0);
    for &(k, c) in groups.iter().rev() {
        acc *= x.powu(prev - k);
        acc += c;
        prev = k;
    }
    acc * x.powu(prev)
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_same_vars(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_same_vars(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -*c);
        }
        out
    }
}

#[allow(clippy::suspicious_arithmetic_impl)] // exponents add under multiplication
impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_same_vars(rhs);
        let mut out = MultiPoly::zero(&self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale_by(Cx::new(-1.0, 0.0))
    }
}

impl fmt::Display for MultiPoly {
    /// Prints in the shared expression grammar, e.g. `(1+0i)*v1^2*z1 + (-2+0i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (v, &k) in self.vars.iter().zip(e) {
                match k {
                    0 => {}
                    1 => write!(f, "*{v}")?,
                    _ => write!(f, "*{v}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// Every exponent vector in `nvars` variables of total degree at most `degree`,
/// graded by degree and lexicographically (descending) within a degree.
pub fn monomials_up_to(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == nvars - 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=remaining).rev() {
            prefix.push(k);
            rec(nvars, remaining - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        out.push(Vec::new());
        return out;
    }
    for d in 0..=degree {
        rec(nvars, d, &mut Vec::new(), &mut out);
    }
    out
}
