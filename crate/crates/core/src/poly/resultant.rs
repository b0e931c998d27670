//! Sylvester resultants for eliminating one variable.

use std::collections::HashMap;

use super::{Cx, MultiPoly, PolyError};

/// Leading coefficient of `p` as a polynomial in `var`, over the remaining variables.
pub fn leading_coefficient_in(p: &MultiPoly, var: &str) -> Result<MultiPoly, PolyError> {
    let mut cs = p.coefficients_in(var)?;
    Ok(cs
        .pop()
        .expect("coefficients_in returns at least one entry"))
}

/// Sylvester matrix of `p` and `q` with respect to `var`. Entries are
/// polynomials in the remaining variables; rows are the shifted coefficient
/// lists of `p` (highest power first) followed by those of `q`.
pub fn sylvester_matrix(
    p: &MultiPoly,
    q: &MultiPoly,
    var: &str,
) -> Result<Vec<Vec<MultiPoly>>, PolyError> {
    if p.vars() != q.vars() {
        return Err(PolyError::VariableMismatch(
            p.vars().to_vec(),
            q.vars().to_vec(),
        ));
    }
    let a = p.coefficients_in(var)?;
    let b = q.coefficients_in(var)?;
    let (dp, dq) = (a.len() - 1, b.len() - 1);
    if p.is_zero() || dp == 0 || q.is_zero() || dq == 0 {
        return Err(PolyError::ZeroDegreeIn(var.to_string()));
    }
    let rest = a[0].vars().to_vec();
    let size = dp + dq;
    let mut m = vec![vec![MultiPoly::zero(&rest); size]; size];
    for i in 0..dq {
        for (k, c) in a.iter().rev().enumerate() {
            m[i][i + k] = c.clone();
        }
    }
    for j in 0..dp {
        for (k, c) in b.iter().rev().enumerate() {
            m[dq + j][j + k] = c.clone();
        }
    }
    Ok(m)
}

/// `Res_var(p, q)`: the determinant of the Sylvester matrix, expanded as a
/// polynomial in the variables other than `var`.
///
/// At a parameter value where both leading coefficients in `var` vanish the
/// resultant vanishes regardless of common roots; callers can detect that case
/// with [`leading_coefficient_in`].
pub fn sylvester_resultant(
    p: &MultiPoly,
    q: &MultiPoly,
    var: &str,
) -> Result<MultiPoly, PolyError> {
    let m = sylvester_matrix(p, q, var)?;
    let rest = m[0][0].vars().to_vec();
    Ok(determinant(&m, &rest))
}

/// Laplace expansion along columns, memoized on the set of rows still free.
/// Exact in the polynomial ring; cost is O(2^n n) polynomial products.
fn determinant(m: &[Vec<MultiPoly>], vars: &[String]) -> MultiPoly {
    let n = m.len();
    assert!(n < 64, "determinant expansion limited to 63x63");
    let mut memo: HashMap<u64, MultiPoly> = HashMap::new();
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    minor(m, vars, full, &mut memo)
}

fn minor(
    m: &[Vec<MultiPoly>],
    vars: &[String],
    rows: u64,
    memo: &mut HashMap<u64, MultiPoly>,
) -> MultiPoly {
    let n = m.len();
    let free = rows.count_ones() as usize;
    if free == 0 {
        return MultiPoly::constant(vars, Cx::new(1.0, 0.0));
    }
    if let Some(v) = memo.get(&rows) {
        return v.clone();
    }
    let col = n - free;
    let mut acc = MultiPoly::zero(vars);
    let mut position = 0;
    for r in 0..n {
        if rows & (1 << r) == 0 {
            continue;
        }
        let entry = &m[r][col];
        if !entry.is_zero() {
            let sub = minor(m, vars, rows & !(1 << r), memo);
            let term = entry * &sub;
            acc = if position % 2 == 0 {
                &acc + &term
            } else {
                &acc - &term
            };
        }
        position += 1;
    }
    memo.insert(rows, acc.clone());
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(vars: &[&str], name: &str) -> MultiPoly {
        MultiPoly::variable(vars, name).unwrap()
    }

    fn one(vars: &[&str]) -> MultiPoly {
        MultiPoly::constant(vars, Cx::new(1.0, 0.0))
    }

    #[test]
    fn linear_factors() {
        let vars = ["a", "b", "z"];
        let p = &var(&vars, "z") - &var(&vars, "a");
        let q = &var(&vars, "z") - &var(&vars, "b");
        let r = sylvester_resultant(&p, &q, "z").unwrap();
        let expected = &var(&["a", "b"], "a") - &var(&["a", "b"], "b");
        assert_eq!(r, expected);
    }

    #[test]
    fn quadratic_against_linear() {
        let vars = ["v", "z"];
        let p = &var(&vars, "z").pow(2) - &var(&vars, "v");
        let q = &var(&vars, "z") - &one(&vars);
        let r = sylvester_resultant(&p, &q, "z").unwrap();
        let expected = &one(&["v"]) - &var(&["v"], "v");
        assert_eq!(r, expected);
    }

    #[test]
    fn common_root_gives_zero() {
        let vars = ["z"];
        let p = &var(&vars, "z") - &one(&vars);
        let r = sylvester_resultant(&p, &p, "z").unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn constant_in_var_is_rejected() {
        let vars = ["v", "z"];
        let p = var(&vars, "v");
        let q = var(&vars, "z");
        assert_eq!(
            sylvester_resultant(&p, &q, "z"),
            Err(PolyError::ZeroDegreeIn("z".into()))
        );
    }

    #[test]
    fn leading_coefficient_extraction() {
        let vars = ["v", "z"];
        let p = &(&var(&vars, "v") * &var(&vars, "z").pow(2)) + &var(&vars, "z");
        assert_eq!(leading_coefficient_in(&p, "z").unwrap(), var(&["v"], "v"));
    }
}
