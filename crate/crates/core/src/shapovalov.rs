//! Level-wise Gram matrices of the Shapovalov form and exact solves against
//! them.
//!
//! The form is the contravariant one: `L_n` is adjoint to `L_{-n}` and
//! `⟨Δ|Δ⟩ = 1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::linalg::Matrix;
use crate::par;
use crate::verma::{enumerate_partitions, Partition, VermaContext, VermaModule, VermaVector};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GramMatrix {
    level: usize,
    context: VermaContext,
    basis: Vec<Partition>,
    entries: Matrix,
}

impl GramMatrix {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn context(&self) -> &VermaContext {
        &self.context
    }

    pub fn basis(&self) -> &[Partition] {
        &self.basis
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.entries[(i, j)]
    }

    pub fn determinant(&self) -> Rational {
        self.entries.determinant()
    }

    pub fn to_json(&self) -> GramJson {
        GramJson {
            level: self.level,
            basis: self.basis.clone(),
            matrix: self.entries.to_rows(),
            determinant: self.determinant(),
        }
    }
}

/// Serialized Gram matrix: partition labels of the rows and columns, then
/// the rows themselves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramJson {
    pub level: usize,
    pub basis: Vec<Partition>,
    pub matrix: Vec<Vec<Rational>>,
    pub determinant: Rational,
}

impl VermaModule {
    /// Pairing `⟨L_{-λ}Δ, v⟩`: apply `L_{λ_1}` first, then `L_{λ_2}`, ...,
    /// and read the `|Δ⟩` coefficient.
    pub fn pairing_with_basis(&self, lambda: &Partition, v: &VermaVector) -> Rational {
        let word: Vec<i32> = lambda.parts().iter().rev().map(|&p| p as i32).collect();
        self.act_word(&word, &v.level_component(lambda.level()))
            .coefficient(&Partition::empty())
    }

    pub fn gram(&self, level: usize) -> Arc<GramMatrix> {
        if let Some(g) = self.grams.lock().get(&level) {
            return g.clone();
        }
        let basis = enumerate_partitions(level);
        let n = basis.len();
        let rows: Vec<Vec<Rational>> = par::map(&basis, |lambda| {
            basis
                .iter()
                .map(|mu| {
                    let v = VermaVector::basis(self.context().clone(), mu.clone());
                    self.pairing_with_basis(lambda, &v)
                })
                .collect()
        });
        debug_assert_eq!(rows.len(), n);
        let g = Arc::new(GramMatrix {
            level,
            context: self.context().clone(),
            basis,
            entries: Matrix::from_rows(rows),
        });
        self.grams.lock().insert(level, g.clone());
        g
    }
}

pub fn gram(level: usize, ctx: &VermaContext) -> Arc<GramMatrix> {
    VermaModule::shared(ctx).gram(level)
}

/// Solves `g · x = rhs` exactly by fraction-free elimination.
pub fn solve(g: &GramMatrix, rhs: &[Rational]) -> Result<Vec<Rational>> {
    if rhs.len() != g.basis.len() {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has length {}, level {} needs {}",
            rhs.len(),
            g.level,
            g.basis.len()
        )));
    }
    g.entries
        .solve(rhs)
        .ok_or(Error::SingularGram { level: g.level })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    #[test]
    fn small_levels() {
        let ctx = VermaContext::new(q(11, 3), q(2, 7));
        let (c, d) = (&ctx.c, &ctx.delta);
        let m = VermaModule::new(ctx.clone());
        assert_eq!(m.gram(0).entries().to_rows(), vec![vec![q(1, 1)]]);
        assert_eq!(m.gram(1).entries().to_rows(), vec![vec![d * q(2, 1)]]);
        let g2 = m.gram(2);
        let expect = vec![
            vec![d * q(4, 1) + c * q(1, 2), d * q(6, 1)],
            vec![d * q(6, 1), d * q(4, 1) * (d * q(2, 1) + q(1, 1))],
        ];
        assert_eq!(g2.entries().to_rows(), expect);
        for level in 0..=6 {
            assert!(m.gram(level).entries().is_symmetric(), "level {level}");
        }
    }

    #[test]
    fn solve_examples() {
        let ctx = VermaContext::new(q(11, 3), q(2, 7));
        let m = VermaModule::new(ctx);
        let mu = q(5, 3);
        assert_eq!(
            solve(&m.gram(1), std::slice::from_ref(&mu)).unwrap(),
            vec![mu * q(7, 4)]
        );
        let g = m.gram(4);
        let n = g.basis().len();
        for i in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[i] = Rational::one();
            let b = g.entries().mul_vec(&e);
            assert_eq!(solve(&g, &b).unwrap(), e);
        }
        assert!(matches!(
            solve(&g, &[q(1, 1)]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn degenerate_level_two_is_reported() {
        // Scan rational weights at c = 1/2 for a vanishing level-2 determinant.
        let c = q(1, 2);
        let mut found = None;
        'scan: for den in 1..=32i64 {
            for num in 1..=32i64 {
                let delta = q(num, den);
                let m = VermaModule::new(VermaContext::new(c.clone(), delta.clone()));
                if m.gram(2).determinant().is_zero() {
                    found = Some(delta);
                    break 'scan;
                }
            }
        }
        let delta = found.expect("a degenerate weight at c = 1/2");
        let m = VermaModule::new(VermaContext::new(c, delta));
        let g = m.gram(2);
        assert_eq!(
            solve(&g, &[q(1, 1), q(2, 1)]),
            Err(Error::SingularGram { level: 2 })
        );
    }
}
