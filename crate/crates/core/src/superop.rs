//! Superoperators as sums of sandwich terms `c·AρB` and elementwise terms
//! `f(n−m, n+m)·ρ(n,m)`, plus their dense Liouvillian form.

use std::ops::{Add, Mul, Neg, Sub};

use crate::fock::{FockOperator, FockSpace};
use crate::linalg::{self, kron};
use crate::{CMatrix, CVector, Error, Result, C64};

/// `ρ ↦ coeff · left · ρ · right`. A missing side is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichTerm {
    pub coeff: C64,
    pub left: Option<CMatrix>,
    pub right: Option<CMatrix>,
}

impl SandwichTerm {
    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let lr = match &self.left {
            Some(a) => linalg::matmul(a, rho),
            None => rho.clone(),
        };
        let lrr = match &self.right {
            Some(b) => linalg::matmul(&lr, b),
            None => lr,
        };
        lrr * self.coeff
    }
}

/// `ρ(n,m) ↦ f(n−m, n+m)·ρ(n,m)`, tabulated on the space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTerm {
    factors: CMatrix,
}

impl DiagonalTerm {
    /// `f` receives `(k, s)` with `k = n − m` and `s = n + m`.
    pub fn from_fn(space: FockSpace, f: impl Fn(i64, i64) -> C64) -> Self {
        let n = space.dim();
        Self {
            factors: CMatrix::from_fn(n, n, |i, j| f(i as i64 - j as i64, (i + j) as i64)),
        }
    }

    pub fn factor(&self, n: usize, m: usize) -> C64 {
        self.factors[(n, m)]
    }

    pub fn factors(&self) -> &CMatrix {
        &self.factors
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        rho.component_mul(&self.factors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Sandwich(SandwichTerm),
    Diagonal(DiagonalTerm),
}

/// A linear superoperator: an ordered sum of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperopExpr {
    space: FockSpace,
    terms: Vec<Term>,
}

impl SuperopExpr {
    pub fn zero(space: FockSpace) -> Self {
        Self {
            space,
            terms: Vec::new(),
        }
    }

    pub fn identity(space: FockSpace) -> Self {
        Self::diagonal(space, |_, _| C64::new(1.0, 0.0))
    }

    pub fn constant(space: FockSpace, c: C64) -> Self {
        Self::diagonal(space, move |_, _| c)
    }

    pub fn diagonal(space: FockSpace, f: impl Fn(i64, i64) -> C64) -> Self {
        Self {
            space,
            terms: vec![Term::Diagonal(DiagonalTerm::from_fn(space, f))],
        }
    }

    /// `ρ ↦ coeff · left · ρ · right`.
    pub fn sandwich(coeff: C64, left: &FockOperator, right: &FockOperator) -> Self {
        Self {
            space: left.space(),
            terms: vec![Term::Sandwich(SandwichTerm {
                coeff,
                left: Some(left.entries().clone()),
                right: Some(right.entries().clone()),
            })],
        }
    }

    /// `ρ ↦ coeff · op · ρ`.
    pub fn left_mul(coeff: C64, op: &FockOperator) -> Self {
        Self {
            space: op.space(),
            terms: vec![Term::Sandwich(SandwichTerm {
                coeff,
                left: Some(op.entries().clone()),
                right: None,
            })],
        }
    }

    /// `ρ ↦ coeff · ρ · op`.
    pub fn right_mul(coeff: C64, op: &FockOperator) -> Self {
        Self {
            space: op.space(),
            terms: vec![Term::Sandwich(SandwichTerm {
                coeff,
                left: None,
                right: Some(op.entries().clone()),
            })],
        }
    }

    /// `ρ ↦ coeff · [op, ρ]`.
    pub fn commutator_with(coeff: C64, op: &FockOperator) -> Self {
        Self::left_mul(coeff, op) + Self::right_mul(-coeff, op)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn scaled(mut self, c: C64) -> Self {
        for t in &mut self.terms {
            match t {
                Term::Sandwich(s) => s.coeff *= c,
                Term::Diagonal(d) => d.factors *= c,
            }
        }
        self
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.space.check_matrix(rho)?;
        let n = self.space.dim();
        let mut out = CMatrix::zeros(n, n);
        for t in &self.terms {
            out += match t {
                Term::Sandwich(s) => s.apply(rho),
                Term::Diagonal(d) => d.apply(rho),
            };
        }
        Ok(out)
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                found: other.space.dim(),
            });
        }
        Ok(())
    }
}

impl Add for SuperopExpr {
    type Output = SuperopExpr;

    fn add(mut self, rhs: SuperopExpr) -> SuperopExpr {
        assert_eq!(self.space, rhs.space, "adding superoperators on different spaces");
        self.terms.extend(rhs.terms);
        self
    }
}

impl Sub for SuperopExpr {
    type Output = SuperopExpr;

    fn sub(self, rhs: SuperopExpr) -> SuperopExpr {
        self + (-rhs)
    }
}

impl Neg for SuperopExpr {
    type Output = SuperopExpr;

    fn neg(self) -> SuperopExpr {
        self.scaled(C64::new(-1.0, 0.0))
    }
}

impl Mul<C64> for SuperopExpr {
    type Output = SuperopExpr;

    fn mul(self, c: C64) -> SuperopExpr {
        self.scaled(c)
    }
}

impl Mul<f64> for SuperopExpr {
    type Output = SuperopExpr;

    fn mul(self, c: f64) -> SuperopExpr {
        self.scaled(C64::new(c, 0.0))
    }
}

/// `e1(e2(ρ)) − e2(e1(ρ))`.
pub fn commutator(e1: &SuperopExpr, e2: &SuperopExpr, rho: &CMatrix) -> Result<CMatrix> {
    e1.check_same_space(e2)?;
    let a = e1.apply(&e2.apply(rho)?)?;
    let b = e2.apply(&e1.apply(rho)?)?;
    Ok(a - b)
}

/// How an `N×N` matrix is flattened into a length-`N²` vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vectorization {
    /// `vec(ρ)[n + N·m] = ρ(n, m)`; `AρB ↦ (Bᵀ ⊗ A)`.
    ColumnStacking,
    /// `vec(ρ)[N·n + m] = ρ(n, m)`; `AρB ↦ (A ⊗ Bᵀ)`.
    RowStacking,
}

impl Vectorization {
    pub fn index(self, dim: usize, n: usize, m: usize) -> usize {
        match self {
            Vectorization::ColumnStacking => n + dim * m,
            Vectorization::RowStacking => dim * n + m,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Vectorization::ColumnStacking => "column-stacking",
            Vectorization::RowStacking => "row-stacking",
        }
    }
}

/// Dense `N²×N²` matrix of a superoperator, tagged with its vectorization.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvillianMatrix {
    space: FockSpace,
    entries: CMatrix,
    convention: Vectorization,
}

impl LiouvillianMatrix {
    pub fn from_entries(space: FockSpace, entries: CMatrix, convention: Vectorization) -> Result<Self> {
        let d = space.dim() * space.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self {
            space,
            entries,
            convention,
        })
    }

    pub fn zero(space: FockSpace) -> Self {
        let d = space.dim() * space.dim();
        Self {
            space,
            entries: CMatrix::zeros(d, d),
            convention: Vectorization::ColumnStacking,
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn convention(&self) -> Vectorization {
        self.convention
    }

    pub fn vectorize(&self, rho: &CMatrix) -> CVector {
        let n = self.space.dim();
        let mut v = CVector::zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                v[self.convention.index(n, i, j)] = rho[(i, j)];
            }
        }
        v
    }

    pub fn unvectorize(&self, v: &CVector) -> CMatrix {
        let n = self.space.dim();
        CMatrix::from_fn(n, n, |i, j| v[self.convention.index(n, i, j)])
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.space.check_matrix(rho)?;
        Ok(self.unvectorize(&(&self.entries * self.vectorize(rho))))
    }

    /// Superoperator composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.convention, other.convention, "vectorization conventions differ");
        Self {
            space: self.space,
            entries: linalg::matmul(&self.entries, &other.entries),
            convention: self.convention,
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            space: self.space,
            entries: &self.entries * c,
            convention: self.convention,
        }
    }

    /// `exp(self)` as a Liouvillian.
    pub fn exp(&self) -> Self {
        Self {
            space: self.space,
            entries: linalg::expm(&self.entries),
            convention: self.convention,
        }
    }
}

impl Add<&LiouvillianMatrix> for &LiouvillianMatrix {
    type Output = LiouvillianMatrix;

    fn add(self, rhs: &LiouvillianMatrix) -> LiouvillianMatrix {
        assert_eq!(self.convention, rhs.convention, "vectorization conventions differ");
        LiouvillianMatrix {
            space: self.space,
            entries: &self.entries + &rhs.entries,
            convention: self.convention,
        }
    }
}

impl Sub<&LiouvillianMatrix> for &LiouvillianMatrix {
    type Output = LiouvillianMatrix;

    fn sub(self, rhs: &LiouvillianMatrix) -> LiouvillianMatrix {
        assert_eq!(self.convention, rhs.convention, "vectorization conventions differ");
        LiouvillianMatrix {
            space: self.space,
            entries: &self.entries - &rhs.entries,
            convention: self.convention,
        }
    }
}

/// Column-stacked Liouvillian of `expr`.
pub fn build_liouvillian(expr: &SuperopExpr) -> LiouvillianMatrix {
    build_liouvillian_with(expr, Vectorization::ColumnStacking)
}

pub fn build_liouvillian_with(expr: &SuperopExpr, convention: Vectorization) -> LiouvillianMatrix {
    let n = expr.space.dim();
    let eye = CMatrix::identity(n, n);
    let mut entries = CMatrix::zeros(n * n, n * n);
    for t in &expr.terms {
        match t {
            Term::Sandwich(s) => {
                let a = s.left.as_ref().unwrap_or(&eye);
                let bt = s.right.as_ref().unwrap_or(&eye).transpose();
                let k = match convention {
                    Vectorization::ColumnStacking => kron(&bt, a),
                    Vectorization::RowStacking => kron(a, &bt),
                };
                entries += k * s.coeff;
            }
            Term::Diagonal(d) => {
                for i in 0..n {
                    for j in 0..n {
                        let idx = convention.index(n, i, j);
                        entries[(idx, idx)] += d.factor(i, j);
                    }
                }
            }
        }
    }
    LiouvillianMatrix {
        space: expr.space,
        entries,
        convention,
    }
}

/// Region of Fock matrix elements on which an infinite-dimension identity is
/// expected to survive truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SafeBlock {
    Full,
    /// `n, m ≤ max_index`.
    Box { max_index: usize },
    /// `n + m ≤ max_sum`.
    AntiDiagonal { max_sum: usize },
}

impl SafeBlock {
    /// `n, m ≤ N − 5`: room for two applications of a two-step raising
    /// operator before the edge is felt.
    pub fn commutator_default(space: FockSpace) -> Self {
        SafeBlock::Box {
            max_index: space.dim().saturating_sub(5),
        }
    }

    pub fn contains(&self, n: usize, m: usize) -> bool {
        match *self {
            SafeBlock::Full => true,
            SafeBlock::Box { max_index } => n <= max_index && m <= max_index,
            SafeBlock::AntiDiagonal { max_sum } => n + m <= max_sum,
        }
    }

    pub fn max_abs(&self, m: &CMatrix) -> f64 {
        let mut best = 0.0f64;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if self.contains(i, j) {
                    best = best.max(m[(i, j)].norm());
                }
            }
        }
        best
    }

    pub fn describe(&self) -> String {
        match *self {
            SafeBlock::Full => "full matrix".into(),
            SafeBlock::Box { max_index } => format!("n,m <= {max_index}"),
            SafeBlock::AntiDiagonal { max_sum } => format!("n+m <= {max_sum}"),
        }
    }
}
