//! Scheme tables for s-stage explicit exponential Rosenbrock methods.
//!
//! A scheme is described by its interior nodes `c_2..c_s` and by coefficient
//! functions `a_ik` and `b_i`, each a finite linear combination of
//! phi-functions. Every scheme shares the Rosenbrock-Euler backbone: stages
//! start from `u_n + c_i h phi_1(c_i h J_n) F(u_n)` and the update from
//! `u_n + h phi_1(h J_n) F(u_n)`; the tables only add small corrections
//! through the stage differences `D_nk`.

use crate::{Error, Result};

/// Highest phi index a scheme table may reference.
pub const SCHEME_PHI_MAX: usize = 5;

/// A linear combination `sum coeff * phi_k` stored as `(k, coeff)` pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhiPoly {
    terms: Vec<(usize, f64)>,
}

impl PhiPoly {
    pub fn new(terms: Vec<(usize, f64)>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    fn validate(&self, what: &str) -> Result<()> {
        for &(k, coeff) in &self.terms {
            if k == 0 || k > SCHEME_PHI_MAX {
                return Err(Error::InvalidArg(format!(
                    "{what} references phi_{k}; only phi_1..phi_{SCHEME_PHI_MAX} are allowed"
                )));
            }
            if !coeff.is_finite() {
                return Err(Error::InvalidArg(format!("{what} has a non-finite coefficient")));
            }
        }
        Ok(())
    }
}

/// Table description of an s-stage scheme.
///
/// `nodes[i-2]` is `c_i`; `a[i-2]` holds the row `a_ik` for `k = 2..i-1`
/// (so row zero is empty); `b[i-2]` is the update weight `b_i` multiplying
/// `D_ni`. The Rosenbrock-Euler terms are implicit and not part of the
/// tables.
#[derive(Clone, Debug)]
pub struct SchemeSpec {
    name: String,
    nodes: Vec<f64>,
    a: Vec<Vec<PhiPoly>>,
    b: Vec<PhiPoly>,
}

impl SchemeSpec {
    pub fn new(
        name: impl Into<String>,
        nodes: Vec<f64>,
        a: Vec<Vec<PhiPoly>>,
        b: Vec<PhiPoly>,
    ) -> Result<Self> {
        let spec = Self { name: name.into(), nodes, a, b };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let extra = self.nodes.len();
        for (idx, &c) in self.nodes.iter().enumerate() {
            if !(c > 0.0 && c <= 1.0) || !c.is_finite() {
                return Err(Error::InvalidArg(format!(
                    "node c_{} = {c} outside (0, 1]",
                    idx + 2
                )));
            }
        }
        if self.a.len() != extra || self.b.len() != extra {
            return Err(Error::InvalidArg(format!(
                "scheme {}: tables must have one row per interior stage \
                 ({} nodes, {} a-rows, {} b-entries)",
                self.name,
                extra,
                self.a.len(),
                self.b.len()
            )));
        }
        for (idx, row) in self.a.iter().enumerate() {
            if row.len() != idx {
                return Err(Error::InvalidArg(format!(
                    "scheme {}: a-row for stage {} must have {} entries, found {}",
                    self.name,
                    idx + 2,
                    idx,
                    row.len()
                )));
            }
            for poly in row {
                poly.validate("a coefficient")?;
            }
        }
        for poly in &self.b {
            poly.validate("b weight")?;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Total stage count `s` (the implicit first stage included).
    pub fn stages(&self) -> usize {
        self.nodes.len() + 1
    }

    /// Interior nodes `c_2..c_s`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn a_row(&self, i: usize) -> &[PhiPoly] {
        &self.a[i]
    }

    pub fn b_weight(&self, i: usize) -> &PhiPoly {
        &self.b[i]
    }
}

/// Exponential Rosenbrock-Euler: the bare one-stage backbone,
/// `u_{n+1} = u_n + h phi_1(h J_n) F(u_n)`. Second order.
pub fn exprb_euler() -> SchemeSpec {
    SchemeSpec::new("exprb-euler", vec![], vec![], vec![]).expect("static table")
}

/// Two-stage fourth-order scheme: `c_2 = 3/4`, update weight
/// `b_2 = (32/9) phi_3`.
pub fn exprb42() -> SchemeSpec {
    SchemeSpec::new(
        "exprb42",
        vec![0.75],
        vec![vec![]],
        vec![PhiPoly::new(vec![(3, 32.0 / 9.0)])],
    )
    .expect("static table")
}

/// Three-stage scheme with independent stages (`c_2 = 1/2`, `c_3 = 1`,
/// `a_32 = 0`), update weights `b_2 = 16 phi_3 - 48 phi_4`,
/// `b_3 = -2 phi_3 + 12 phi_4`.
pub fn pexprb43() -> SchemeSpec {
    SchemeSpec::new(
        "pexprb43",
        vec![0.5, 1.0],
        vec![vec![], vec![PhiPoly::default()]],
        vec![
            PhiPoly::new(vec![(3, 16.0), (4, -48.0)]),
            PhiPoly::new(vec![(3, -2.0), (4, 12.0)]),
        ],
    )
    .expect("static table")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tables_have_expected_shape() {
        let e = exprb_euler();
        assert_eq!(e.stages(), 1);
        assert!(e.nodes().is_empty());

        let x = exprb42();
        assert_eq!(x.stages(), 2);
        assert_eq!(x.nodes(), &[0.75]);
        assert_eq!(x.b_weight(0).terms(), &[(3, 32.0 / 9.0)]);

        let p = pexprb43();
        assert_eq!(p.stages(), 3);
        assert_eq!(p.nodes(), &[0.5, 1.0]);
        assert!(p.a_row(1)[0].is_zero());
        assert_eq!(p.b_weight(0).terms(), &[(3, 16.0), (4, -48.0)]);
        assert_eq!(p.b_weight(1).terms(), &[(3, -2.0), (4, 12.0)]);
    }

    #[test]
    fn validation_rejects_bad_tables() {
        // Node outside (0, 1].
        assert!(SchemeSpec::new("bad", vec![0.0], vec![vec![]], vec![PhiPoly::default()]).is_err());
        assert!(SchemeSpec::new("bad", vec![1.5], vec![vec![]], vec![PhiPoly::default()]).is_err());
        // Ragged tables.
        assert!(SchemeSpec::new("bad", vec![0.5], vec![], vec![PhiPoly::default()]).is_err());
        assert!(SchemeSpec::new("bad", vec![0.5], vec![vec![]], vec![]).is_err());
        // phi index out of range.
        assert!(SchemeSpec::new(
            "bad",
            vec![0.5],
            vec![vec![]],
            vec![PhiPoly::new(vec![(6, 1.0)])],
        )
        .is_err());
        assert!(SchemeSpec::new(
            "bad",
            vec![0.5],
            vec![vec![]],
            vec![PhiPoly::new(vec![(0, 1.0)])],
        )
        .is_err());
    }
}
