use super::{vanishing_ideal, VarietyError};
use crate::expr::{ExprTree, HoloMap, Polydisc};
use crate::poly::MultiPoly;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NashOptions {
    pub samples: usize,
    /// Tighter than the implicitization default: the columns `x^a f^b` of a
    /// transcendental `f` are close to dependent at high degree.
    pub svd_tol: f64,
}

impl Default for NashOptions {
    fn default() -> Self {
        NashOptions {
            samples: 300,
            svd_tol: 1e-10,
        }
    }
}

pub fn nash_witness(
    component: &ExprTree,
    domain: &Polydisc,
    d: u32,
) -> Result<Option<MultiPoly>, VarietyError> {
    nash_witness_with(component, domain, d, NashOptions::default())
}

/// Lowest-degree `P(x, y)` with `P(x, f(x)) = 0` on `domain`, searching degrees `1..=d`.
/// The returned relation is over variables `x1, y` with unit coefficient norm.
pub fn nash_witness_with(
    component: &ExprTree,
    domain: &Polydisc,
    d: u32,
    opts: NashOptions,
) -> Result<Option<MultiPoly>, VarietyError> {
    let map = HoloMap::new(vec![component.clone()], domain.clone())?;
    let samples = domain
        .sunflower(opts.samples)
        .into_iter()
        .map(|x| Ok(vec![x, map.eval(&[x])?[0]]))
        .collect::<Result<Vec<_>, VarietyError>>()?;
    for k in 1..=d {
        let basis = vanishing_ideal(&samples, k, opts.svd_tol)?;
        if let Some(r) = basis.relations.first() {
            let mut p = MultiPoly::zero(&["x1", "y"]);
            for (e, c) in r.terms() {
                p.add_term(e.to_vec(), c);
            }
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::poly::Cx;

    fn witness(f: &str, radius: f64, d: u32) -> Option<MultiPoly> {
        let domain = Polydisc::disc(Cx::new(0.0, 0.0), radius);
        nash_witness(&parse_expr(f).unwrap(), &domain, d).unwrap()
    }

    fn normalized_by(p: &MultiPoly, e: &[u32]) -> MultiPoly {
        p.scale_by(p.coefficient(e).inv())
    }

    #[test]
    fn square() {
        let p = normalized_by(&witness("x1^2", 1.0, 2).unwrap(), &[0, 1]);
        assert_eq!(p.total_degree(), Some(2));
        assert!((p.coefficient(&[2, 0]) + Cx::new(1.0, 0.0)).norm() < 1e-9);
        assert!(p.terms().filter(|(_, c)| c.norm() > 1e-9).count() == 2);
    }

    #[test]
    fn reciprocal() {
        let p = normalized_by(&witness("1/(1+x1)", 0.5, 2).unwrap(), &[0, 1]);
        assert!((p.coefficient(&[1, 1]) - Cx::new(1.0, 0.0)).norm() < 1e-9);
        assert!((p.coefficient(&[0, 0]) + Cx::new(1.0, 0.0)).norm() < 1e-9);
        assert!(p.terms().filter(|(_, c)| c.norm() > 1e-9).count() == 3);
    }

    #[test]
    fn exponential_has_no_low_degree_witness() {
        assert!(witness("exp(x1)", 10.0, 6).is_none());
    }
}
