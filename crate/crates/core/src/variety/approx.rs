use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{coefficient_names, VarietyBasis, VarietyError};
use crate::expr::{base_names, parse_expr_with, taylor_series, ExprTree, HoloMap};
use crate::poly::Cx;

/// Membership bound for schemes that must map into the variety.
pub const MEMBERSHIP_TOL: f64 = 1e-6;

/// How `H_nu` is built from `H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ApproxScheme {
    /// Explicit component templates; the token `NU` is replaced by the integer `nu`.
    Parametric { templates: Vec<String> },
    /// Taylor order `nu` on the `free` components; every other component is
    /// given in `solved` as an expression in the free ones.
    ConstrainedTruncation {
        free: Vec<String>,
        solved: BTreeMap<String, String>,
    },
    /// Taylor order `nu` on every component, plus optional `NU`-template shifts.
    UnconstrainedTruncation {
        #[serde(default)]
        shift: BTreeMap<String, String>,
    },
}

impl ApproxScheme {
    pub fn kind(&self) -> &'static str {
        match self {
            ApproxScheme::Parametric { .. } => "parametric",
            ApproxScheme::ConstrainedTruncation { .. } => "constrained_truncation",
            ApproxScheme::UnconstrainedTruncation { .. } => "unconstrained_truncation",
        }
    }

    pub fn is_truncation(&self) -> bool {
        !matches!(self, ApproxScheme::Parametric { .. })
    }

    pub fn must_stay_in_variety(&self) -> bool {
        !matches!(self, ApproxScheme::UnconstrainedTruncation { .. })
    }
}

pub fn substitute_nu(template: &str, nu: u32) -> String {
    template.replace("NU", &nu.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Approximant {
    pub nu: u32,
    pub map: HoloMap,
    /// Max membership residual on the validation points (constrained kinds only).
    pub membership_max: Option<f64>,
    /// `max |H_nu - H|` on the validation points.
    pub sup_distance: f64,
}

fn truncated(h: &HoloMap, j: usize, nu: u32) -> Result<ExprTree, VarietyError> {
    let center = h
        .domain
        .center
        .first()
        .copied()
        .unwrap_or(Cx::new(0.0, 0.0));
    let coeffs = taylor_series(&h.components[j], center, nu as usize)?;
    let var = base_names(1).remove(0);
    Ok(ExprTree::from_series(&var, center, &coeffs))
}

fn solved_components(
    h: &HoloMap,
    free: &[String],
    solved: &BTreeMap<String, String>,
    nu: u32,
) -> Result<Vec<ExprTree>, VarietyError> {
    let names = coefficient_names(h.p());
    let free_set: BTreeSet<&String> = free.iter().collect();
    for n in free.iter().chain(solved.keys()) {
        if !names.contains(n) {
            return Err(VarietyError::NotSolvedForm(format!(
                "unknown component `{n}`"
            )));
        }
    }
    if let Some(n) = solved.keys().find(|n| free_set.contains(n)) {
        return Err(VarietyError::NotSolvedForm(format!(
            "`{n}` is both free and solved"
        )));
    }
    if free_set.len() != free.len() {
        return Err(VarietyError::NotSolvedForm(
            "repeated free component".into(),
        ));
    }
    if let Some(n) = names
        .iter()
        .find(|n| !free_set.contains(n) && !solved.contains_key(*n))
    {
        return Err(VarietyError::NotSolvedForm(format!(
            "component `{n}` is neither free nor solved"
        )));
    }
    let mut bindings = BTreeMap::new();
    for name in free {
        let j = names.iter().position(|n| n == name).expect("checked above");
        bindings.insert(name.clone(), truncated(h, j, nu)?);
    }
    names
        .iter()
        .map(|name| match solved.get(name) {
            None => Ok(bindings[name].clone()),
            Some(text) => {
                let e = parse_expr_with(text, free).map_err(|err| {
                    VarietyError::NotSolvedForm(format!("`{name} := {text}`: {err}"))
                })?;
                Ok(e.substitute(&bindings))
            }
        })
        .collect()
}

/// Builds `H_nu`. For constrained kinds every validation point must map into
/// the variety within [`MEMBERSHIP_TOL`].
pub fn make_approximant(
    scheme: &ApproxScheme,
    h: &HoloMap,
    basis: &VarietyBasis,
    nu: u32,
    validation: &[Vec<Cx>],
) -> Result<Approximant, VarietyError> {
    let base = base_names(h.base_dim);
    let components = match scheme {
        ApproxScheme::Parametric { templates } => {
            if templates.len() != h.p() {
                return Err(VarietyError::DimensionMismatch {
                    expected: h.p(),
                    got: templates.len(),
                });
            }
            templates
                .iter()
                .map(|t| {
                    parse_expr_with(&substitute_nu(t, nu), &base)
                        .map_err(|e| VarietyError::Expr(e.into()))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        ApproxScheme::ConstrainedTruncation { free, solved } => {
            solved_components(h, free, solved, nu)?
        }
        ApproxScheme::UnconstrainedTruncation { shift } => {
            let names = coefficient_names(h.p());
            if let Some(bad) = shift.keys().find(|k| !names.contains(k)) {
                return Err(VarietyError::NotSolvedForm(format!(
                    "shift on unknown component `{bad}`"
                )));
            }
            names
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    let t = truncated(h, j, nu)?;
                    Ok(match shift.get(name) {
                        None => t,
                        Some(template) => {
                            let s = parse_expr_with(&substitute_nu(template, nu), &base)
                                .map_err(|e| VarietyError::Expr(e.into()))?;
                            ExprTree::Add(Box::new(t), Box::new(s))
                        }
                    })
                })
                .collect::<Result<Vec<_>, VarietyError>>()?
        }
    };
    let map = HoloMap::new(components, h.domain.clone())?;

    let mut membership_max = None;
    if scheme.must_stay_in_variety() {
        let mut worst = 0.0f64;
        for x in validation {
            let r = basis.membership_residual(&map.eval(x)?);
            if !(r <= MEMBERSHIP_TOL) {
                return Err(VarietyError::MembershipViolation {
                    nu,
                    residual: r,
                    at: x.clone(),
                });
            }
            worst = worst.max(r);
        }
        membership_max = Some(worst);
    }
    let sup_distance = map.sup_distance(h, validation)?;
    Ok(Approximant {
        nu,
        map,
        membership_max,
        sup_distance,
    })
}
