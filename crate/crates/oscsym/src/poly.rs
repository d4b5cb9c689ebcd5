//! Sparse integer-coefficient polynomials over the 2d phase-space variables.
//!
//! Used to represent partial derivatives of a radial function: repeatedly
//! differentiating `P(X) c^(k)(|X|^2)` only ever applies `d/dX_j` to `P` and
//! multiplies by `2 X_j`, so the coefficients stay integers.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::real::{Precision, Real};

/// Monomial exponents, one entry per variable.
type Monomial = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    vars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl Polynomial {
    pub fn zero(vars: usize) -> Self {
        Polynomial {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: i64) -> Self {
        let mut p = Polynomial::zero(vars);
        if c != 0 {
            p.terms.insert(vec![0; vars], BigInt::from(c));
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }


    fn insert(&mut self, m: Monomial, c: BigInt) {
        use num_bigint::Sign;
        if c.sign() == Sign::NoSign {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(|| BigInt::from(0));
        *entry += c;
        if entry.sign() == Sign::NoSign {
            self.terms.remove(&m);
        }
    }

    /// Partial derivative with respect to variable `j`.
    pub fn differentiate(&self, j: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.vars);
        for (m, c) in &self.terms {
            let e = m[j];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[j] = e - 1;
            out.insert(m2, c * BigInt::from(e));
        }
        out
    }

    /// Multiply by `2 X_j`.
    pub fn mul_2xj(&self, j: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.vars);
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            m2[j] += 1;
            out.insert(m2, c * BigInt::from(2));
        }
        out
    }

    pub fn add(&self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    /// Evaluate at a point, in the given precision.
    pub fn eval(&self, x: &[Real], prec: Precision) -> Real {
        let max_exp: Vec<u16> = (0..self.vars)
            .map(|j| self.terms.keys().map(|m| m[j]).max().unwrap_or(0))
            .collect();
        let mut powers: Vec<Vec<Real>> = Vec::with_capacity(self.vars);
        for (j, &me) in max_exp.iter().enumerate() {
            let mut ps = Vec::with_capacity(me as usize + 1);
            ps.push(Real::one(prec));
            for e in 1..=me as usize {
                let next = &ps[e - 1] * &x[j];
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut acc = Real::zero(prec);
        for (m, c) in &self.terms {
            let mut term = Real::from_bigint(c, prec);
            for (j, &e) in m.iter().enumerate() {
                if e > 0 {
                    term = &term * &powers[j][e as usize];
                }
            }
            acc = &acc + &term;
        }
        acc
    }
}

/// Representation of `d^alpha b` as `sum_k P_k(X) c^(k)(|X|^2)`:
/// one polynomial per derivative order `k <= |alpha|`.
#[derive(Clone, Debug)]
pub struct RadialDerivativeRep {
    vars: usize,
    /// `polys[k]` multiplies `c^(k)(t)`.
    pub polys: Vec<Polynomial>,
}

impl RadialDerivativeRep {
    /// Identity representation: `b = 1 * c^(0)`.
    pub fn identity(vars: usize) -> Self {
        RadialDerivativeRep {
            vars,
            polys: vec![Polynomial::constant(vars, 1)],
        }
    }

    pub fn order(&self) -> usize {
        self.polys.len() - 1
    }

    /// Apply one more derivative in variable `j`:
    /// `P_k  ->  dP_k/dX_j + 2 X_j P_(k-1)`.
    pub fn differentiate(&self, j: usize) -> RadialDerivativeRep {
        let kmax = self.polys.len();
        let mut polys = Vec::with_capacity(kmax + 1);
        for k in 0..=kmax {
            let mut p = Polynomial::zero(self.vars);
            if k < kmax {
                p = p.add(&self.polys[k].differentiate(j));
            }
            if k > 0 {
                p = p.add(&self.polys[k - 1].mul_2xj(j));
            }
            polys.push(p);
        }
        while polys.len() > 1 && polys.last().unwrap().is_zero() {
            polys.pop();
        }
        RadialDerivativeRep {
            vars: self.vars,
            polys,
        }
    }

    /// Build the representation for a full multi-index.
    pub fn for_multi_index(alpha: &[u32]) -> Self {
        let vars = alpha.len();
        let mut rep = RadialDerivativeRep::identity(vars);
        for (j, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                rep = rep.differentiate(j);
            }
        }
        rep
    }
}
