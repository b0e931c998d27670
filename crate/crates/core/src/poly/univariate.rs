use super::{Cx, LEAD_EPS};

/// Univariate polynomial, coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<Cx>,
}

impl UniPoly {
    pub fn new(coeffs: Vec<Cx>) -> Self {
        UniPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        UniPoly::new(coeffs.iter().map(|&c| Cx::new(c, 0.0)).collect())
    }

    /// `lead * prod (z - r)`.
    pub fn from_roots(lead: Cx, roots: &[Cx]) -> Self {
        let mut coeffs = vec![lead];
        for &r in roots {
            let mut next = vec![Cx::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        UniPoly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops leading coefficients below `LEAD_EPS * scale`. The zero polynomial
    /// (every coefficient negligible or exactly zero) normalizes to an empty list.
    pub fn normalized(&self) -> UniPoly {
        let scale = self.scale();
        if scale == 0.0 {
            return UniPoly::new(Vec::new());
        }
        let cutoff = LEAD_EPS * scale;
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= cutoff) {
            coeffs.pop();
        }
        UniPoly::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.normalized().coeffs.is_empty()
    }

    /// Degree after leading-coefficient normalization; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let n = self.normalized().coeffs.len();
        n.checked_sub(1)
    }

    pub fn eval(&self, z: Cx) -> Cx {
        self.coeffs
            .iter()
            .rev()
            .fold(Cx::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and derivative at `z` in one Horner pass.
    pub fn eval_with_derivative(&self, z: Cx) -> (Cx, Cx) {
        let mut p = Cx::new(0.0, 0.0);
        let mut dp = Cx::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |c_k| |z|^k`, the rounding-error scale of an evaluation at `z`.
    pub fn magnitude_at(&self, z: Cx) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }
}
