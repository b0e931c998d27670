//! Truncated power-series arithmetic propagated through expression trees.

use super::{ExprError, ExprTree, MIN_DENOMINATOR};
use crate::poly::{Cx, UniPoly};

type Series = Vec<Cx>;

const ZERO: Cx = Cx::new(0.0, 0.0);

fn mul(a: &[Cx], b: &[Cx]) -> Series {
    let n = a.len();
    let mut out = vec![ZERO; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == ZERO {
            continue;
        }
        for (j, &bj) in b.iter().take(n - i).enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn div(a: &[Cx], b: &[Cx]) -> Result<Series, ExprError> {
    if b[0].norm() < MIN_DENOMINATOR {
        return Err(ExprError::NotAnalytic);
    }
    let n = a.len();
    let mut q = vec![ZERO; n];
    for k in 0..n {
        let acc: Cx = (1..=k).map(|j| b[j] * q[k - j]).sum();
        q[k] = (a[k] - acc) / b[0];
    }
    Ok(q)
}

/// exp of a series: `f = exp(g)` satisfies `k f_k = sum_{j=1..k} j g_j f_{k-j}`.
fn exp(g: &[Cx]) -> Series {
    let n = g.len();
    let mut f = vec![ZERO; n];
    f[0] = g[0].exp();
    for k in 1..n {
        let acc: Cx = (1..=k).map(|j| g[j] * f[k - j] * j as f64).sum();
        f[k] = acc / k as f64;
    }
    f
}

fn series(e: &ExprTree, var: &str, center: Cx, len: usize) -> Result<Series, ExprError> {
    let mut zero = vec![ZERO; len];
    Ok(match e {
        ExprTree::Const(c) => {
            zero[0] = *c;
            zero
        }
        ExprTree::Var(v) if v == var => {
            zero[0] = center;
            if len > 1 {
                zero[1] = Cx::new(1.0, 0.0);
            }
            zero
        }
        ExprTree::Var(v) => return Err(ExprError::NotUnivariate(vec![var.to_string(), v.clone()])),
        ExprTree::Add(a, b) => {
            let (a, b) = (series(a, var, center, len)?, series(b, var, center, len)?);
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        }
        ExprTree::Sub(a, b) => {
            let (a, b) = (series(a, var, center, len)?, series(b, var, center, len)?);
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        }
        ExprTree::Mul(a, b) => mul(&series(a, var, center, len)?, &series(b, var, center, len)?),
        ExprTree::Div(a, b) => div(&series(a, var, center, len)?, &series(b, var, center, len)?)?,
        ExprTree::Pow(a, k) => {
            let base = series(a, var, center, len)?;
            let mut acc = zero;
            acc[0] = Cx::new(1.0, 0.0);
            for _ in 0..*k {
                acc = mul(&acc, &base);
            }
            acc
        }
        ExprTree::Exp(a) => exp(&series(a, var, center, len)?),
        ExprTree::Neg(a) => series(a, var, center, len)?.iter().map(|x| -x).collect(),
    })
}

/// Taylor coefficients of `e` at `center` in powers of `(x - center)`, up to `order`.
/// The expression may mention at most one variable.
pub fn taylor_series(e: &ExprTree, center: Cx, order: usize) -> Result<Vec<Cx>, ExprError> {
    let vars = e.variables();
    if vars.len() > 1 {
        return Err(ExprError::NotUnivariate(vars.into_iter().collect()));
    }
    let var = vars.into_iter().next().unwrap_or_else(|| "x1".to_string());
    let out = series(e, &var, center, order + 1)?;
    if out.iter().all(|c| c.is_finite()) {
        Ok(out)
    } else {
        Err(ExprError::NonFinite)
    }
}

/// Degree-`order` Taylor polynomial of `e` at `center`, as a polynomial in `t = x - center`.
pub fn taylor_truncate(e: &ExprTree, center: Cx, order: usize) -> Result<UniPoly, ExprError> {
    Ok(UniPoly::new(taylor_series(e, center, order)?))
}
