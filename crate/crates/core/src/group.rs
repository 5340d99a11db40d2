//! The group algebra F[G] for G = (Z_m)^t, its regular representation, and
//! row selectors used during repair.
//!
//! Group elements are vectors of `t` digits mod `m`. They are addressed by a
//! canonical rank with the **first coordinate most significant**:
//! `rank(g) = sum_i g[i] * m^(t-1-i)`. All matrices over the algebra use this
//! basis order.
//!
//! An [`AlgebraElement`] is a sparse formal sum `sum_g a_g x_g` with
//! coefficients in GF(q); multiplication is convolution over the group. Its
//! regular representation is the `m^t x m^t` matrix of the multiplication map
//! `h -> h * a` written against row vectors: row `g` holds the coefficients
//! of `x_g * a`, i.e. entry `(g, g + v)` is `a_v`.
//!
//! A [`Selector`] is a sorted set of basis ranks, viewed as the 0/1 matrix
//! that picks those coordinates. Repair works with selectors of the form
//! `{g : g(w) == 0 mod sigma}`; when an algebra element never shifts
//! coordinate `w` modulo `sigma`, the selected rows of its representation can
//! be compressed to a small square matrix ([`Selector::restrict`]).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::matrix::FieldMatrix;

/// The abelian group (Z_m)^t.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    m: usize,
    t: usize,
}

impl GroupSpec {
    pub fn new(m: usize, t: usize) -> Result<Self> {
        if m < 1 || t < 1 {
            return Err(Error::Parameter(format!("degenerate group Z_{m}^{t}")));
        }
        let mut order = 1usize;
        for _ in 0..t {
            order = order
                .checked_mul(m)
                .ok_or_else(|| Error::Parameter(format!("group Z_{m}^{t} too large")))?;
        }
        if order > 1 << 20 {
            return Err(Error::Parameter(format!("group Z_{m}^{t} too large")));
        }
        Ok(GroupSpec { m, t })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// |G| = m^t.
    pub fn order(&self) -> usize {
        self.m.pow(self.t as u32)
    }

    /// Canonical rank of a digit vector; first coordinate most significant.
    pub fn rank(&self, v: &[usize]) -> Result<usize> {
        if v.len() != self.t {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} in Z_{}^{}",
                v.len(),
                self.m,
                self.t
            )));
        }
        let mut r = 0usize;
        for &d in v {
            if d >= self.m {
                return Err(Error::Parameter(format!("digit {d} out of range mod {}", self.m)));
            }
            r = r * self.m + d;
        }
        Ok(r)
    }

    /// Digit vector of a rank.
    pub fn unrank(&self, mut r: usize) -> Vec<usize> {
        debug_assert!(r < self.order());
        let mut v = vec![0usize; self.t];
        for i in (0..self.t).rev() {
            v[i] = r % self.m;
            r /= self.m;
        }
        v
    }

    /// Digit of `rank` at `coord` (0-based).
    pub fn digit(&self, rank: usize, coord: usize) -> usize {
        let shift = self.m.pow((self.t - 1 - coord) as u32);
        (rank / shift) % self.m
    }

    /// Componentwise addition mod m, on ranks.
    pub fn add(&self, a: usize, b: usize) -> usize {
        let mut out = 0usize;
        let mut place = 1usize;
        let (mut x, mut y) = (a, b);
        for _ in 0..self.t {
            let s = (x % self.m + y % self.m) % self.m;
            out += s * place;
            place *= self.m;
            x /= self.m;
            y /= self.m;
        }
        out
    }

    /// Additive inverse, on ranks.
    pub fn neg(&self, a: usize) -> usize {
        let mut out = 0usize;
        let mut place = 1usize;
        let mut x = a;
        for _ in 0..self.t {
            let d = x % self.m;
            out += if d == 0 { 0 } else { self.m - d } * place;
            place *= self.m;
            x /= self.m;
        }
        out
    }

    /// Rank of the standard basis vector `e_coord` (0-based coordinate).
    pub fn basis(&self, coord: usize) -> Result<usize> {
        if coord >= self.t {
            return Err(Error::Parameter(format!(
                "coordinate {coord} out of range for width {}",
                self.t
            )));
        }
        if self.m == 1 {
            return Ok(0);
        }
        Ok(self.m.pow((self.t - 1 - coord) as u32))
    }
}

/// Sparse element of F[G]: a formal sum of group basis vectors with nonzero
/// field coefficients, keyed by rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    field: PrimeField,
    group: GroupSpec,
    coeffs: BTreeMap<usize, FieldElement>,
}

impl AlgebraElement {
    pub fn zero(field: PrimeField, group: GroupSpec) -> Self {
        AlgebraElement {
            field,
            group,
            coeffs: BTreeMap::new(),
        }
    }

    /// The multiplicative identity `x_0`.
    pub fn one(field: PrimeField, group: GroupSpec) -> Self {
        Self::monomial(field, group, 1, 0)
    }

    /// `c * x_g` for a group rank `g`.
    pub fn monomial(field: PrimeField, group: GroupSpec, c: FieldElement, g: usize) -> Self {
        assert!(g < group.order(), "rank {g} out of range");
        let mut coeffs = BTreeMap::new();
        let c = field.elem(c);
        if c != 0 {
            coeffs.insert(g, c);
        }
        AlgebraElement { field, group, coeffs }
    }

    /// Builds from a dense coefficient slice indexed by rank.
    pub fn from_dense(field: PrimeField, group: GroupSpec, dense: &[FieldElement]) -> Result<Self> {
        if dense.len() != group.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a group of order {}",
                dense.len(),
                group.order()
            )));
        }
        let mut coeffs = BTreeMap::new();
        for (g, &c) in dense.iter().enumerate() {
            let c = field.elem(c);
            if c != 0 {
                coeffs.insert(g, c);
            }
        }
        Ok(AlgebraElement { field, group, coeffs })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, g: usize) -> FieldElement {
        self.coeffs.get(&g).copied().unwrap_or(0)
    }

    /// Ranks with nonzero coefficient, ascending.
    pub fn support(&self) -> impl Iterator<Item = (usize, FieldElement)> + '_ {
        self.coeffs.iter().map(|(&g, &c)| (g, c))
    }

    fn check_context(&self, other: &Self) -> Result<()> {
        if self.field != other.field || self.group != other.group {
            return Err(Error::ContextMismatch(
                "algebra elements from different contexts".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (&g, &c) in &other.coeffs {
            let v = self.field.add(out.coeff(g), c);
            if v == 0 {
                out.coeffs.remove(&g);
            } else {
                out.coeffs.insert(g, v);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = self.field.neg(*c);
        }
        out
    }

    pub fn scale(&self, c: FieldElement) -> Self {
        let c = self.field.elem(c);
        let mut out = Self::zero(self.field, self.group);
        if c == 0 {
            return out;
        }
        for (&g, &a) in &self.coeffs {
            out.coeffs.insert(g, self.field.mul(a, c));
        }
        out
    }

    /// Convolution product: `x_u * x_v = x_(u+v)` extended bilinearly.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let f = self.field;
        let mut acc: BTreeMap<usize, FieldElement> = BTreeMap::new();
        for (&ga, &ca) in &self.coeffs {
            for (&gb, &cb) in &other.coeffs {
                let g = self.group.add(ga, gb);
                let entry = acc.entry(g).or_insert(0);
                *entry = f.add(*entry, f.mul(ca, cb));
            }
        }
        acc.retain(|_, c| *c != 0);
        Ok(AlgebraElement {
            field: self.field,
            group: self.group,
            coeffs: acc,
        })
    }

    pub fn pow(&self, e: usize) -> Result<Self> {
        let mut acc = Self::one(self.field, self.group);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// The regular representation: row `g` holds the coefficients of
    /// `x_g * self`, so entry `(g, g+v)` is the coefficient of `x_v`.
    pub fn regular_representation(&self) -> FieldMatrix {
        let ell = self.group.order();
        let mut m = FieldMatrix::zeros(self.field, ell, ell);
        for g in 0..ell {
            for (v, c) in self.support() {
                let h = self.group.add(g, v);
                m[(g, h)] = self.field.add(m[(g, h)], c);
            }
        }
        m
    }

    /// Applies the representation to a column vector without materializing
    /// the matrix: `out[g] = sum_v a_v * vec[g + v]`.
    pub fn apply(&self, vec: &[FieldElement]) -> Result<Vec<FieldElement>> {
        let ell = self.group.order();
        if vec.len() != ell {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} over a group of order {ell}",
                vec.len()
            )));
        }
        let f = self.field;
        let mut out = vec![0u64; ell];
        for g in 0..ell {
            let mut acc = 0u64;
            for (v, c) in self.support() {
                acc = f.add(acc, f.mul(c, vec[self.group.add(g, v)]));
            }
            out[g] = acc;
        }
        Ok(out)
    }
}

/// Polynomial with coefficients in F[G]; index = degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraPolynomial {
    field: PrimeField,
    group: GroupSpec,
    coeffs: Vec<AlgebraElement>,
}

impl AlgebraPolynomial {
    pub fn from_coeffs(field: PrimeField, group: GroupSpec, coeffs: Vec<AlgebraElement>) -> Result<Self> {
        for c in &coeffs {
            if c.field() != field || c.group() != group {
                return Err(Error::ContextMismatch("polynomial coefficient context".into()));
            }
        }
        let mut p = AlgebraPolynomial { field, group, coeffs };
        p.normalize();
        Ok(p)
    }

    /// The constant polynomial `1`.
    pub fn one(field: PrimeField, group: GroupSpec) -> Self {
        AlgebraPolynomial {
            field,
            group,
            coeffs: vec![AlgebraElement::one(field, group)],
        }
    }

    /// `X - a`.
    pub fn x_minus(a: &AlgebraElement) -> Self {
        AlgebraPolynomial {
            field: a.field(),
            group: a.group(),
            coeffs: vec![a.neg(), AlgebraElement::one(a.field(), a.group())],
        }
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> AlgebraElement {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| AlgebraElement::zero(self.field, self.group))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.field != other.field || self.group != other.group {
            return Err(Error::ContextMismatch("polynomial contexts differ".into()));
        }
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(AlgebraPolynomial {
                field: self.field,
                group: self.group,
                coeffs: Vec::new(),
            });
        }
        let mut out =
            vec![AlgebraElement::zero(self.field, self.group); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b)?)?;
            }
        }
        let mut p = AlgebraPolynomial {
            field: self.field,
            group: self.group,
            coeffs: out,
        };
        p.normalize();
        Ok(p)
    }

    /// Horner evaluation at an algebra element.
    pub fn eval(&self, point: &AlgebraElement) -> Result<AlgebraElement> {
        if point.field() != self.field || point.group() != self.group {
            return Err(Error::ContextMismatch("evaluation point context".into()));
        }
        let mut acc = AlgebraElement::zero(self.field, self.group);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(point)?.add(c)?;
        }
        Ok(acc)
    }
}

/// `prod_j (X - c_j * x_(g_j))` for the given (scalar, rank) pairs. The empty
/// product is the constant polynomial 1.
pub fn annihilator_poly(
    field: PrimeField,
    group: GroupSpec,
    roots: &[(FieldElement, usize)],
) -> Result<AlgebraPolynomial> {
    let mut acc = AlgebraPolynomial::one(field, group);
    for &(c, g) in roots {
        let root = AlgebraElement::monomial(field, group, c, g);
        acc = acc.mul(&AlgebraPolynomial::x_minus(&root))?;
    }
    Ok(acc)
}

/// A sorted set of basis ranks, used as a row-selection matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selector {
    group: GroupSpec,
    rows: Vec<usize>,
}

impl Selector {
    /// Selects `{g : g(coord) == 0 mod modulus}`. `modulus` must divide `m`.
    pub fn build(group: GroupSpec, coord: usize, modulus: usize) -> Result<Self> {
        if coord >= group.t() {
            return Err(Error::Parameter(format!(
                "coordinate {coord} out of range for width {}",
                group.t()
            )));
        }
        if modulus == 0 || group.m() % modulus != 0 {
            return Err(Error::Parameter(format!(
                "modulus {modulus} does not divide {}",
                group.m()
            )));
        }
        let rows = (0..group.order())
            .filter(|&g| group.digit(g, coord) % modulus == 0)
            .collect();
        Ok(Selector { group, rows })
    }

    pub fn from_rows(group: GroupSpec, mut rows: Vec<usize>) -> Result<Self> {
        rows.sort_unstable();
        rows.dedup();
        if rows.iter().any(|&g| g >= group.order()) {
            return Err(Error::Parameter("selector row out of range".into()));
        }
        Ok(Selector { group, rows })
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn contains(&self, g: usize) -> bool {
        self.rows.binary_search(&g).is_ok()
    }

    pub fn is_subset_of(&self, other: &Selector) -> bool {
        self.group == other.group && self.rows.iter().all(|&g| other.contains(g))
    }

    /// Set union of row sets; all selectors must share a group.
    pub fn union_all(selectors: &[Selector]) -> Result<Selector> {
        let first = selectors
            .first()
            .ok_or_else(|| Error::Parameter("empty selector union".into()))?;
        let mut rows = Vec::new();
        for s in selectors {
            if s.group != first.group {
                return Err(Error::ContextMismatch("selector groups differ".into()));
            }
            rows.extend_from_slice(&s.rows);
        }
        Selector::from_rows(first.group, rows)
    }

    /// The 0/1 selection matrix of shape `dim x |G|`.
    pub fn as_matrix(&self, field: PrimeField) -> FieldMatrix {
        let mut m = FieldMatrix::zeros(field, self.rows.len(), self.group.order());
        for (p, &g) in self.rows.iter().enumerate() {
            m[(p, g)] = 1;
        }
        m
    }

    /// Extracts the selected entries of a dense vector, in row order.
    pub fn extract(&self, vec: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if vec.len() != self.group.order() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} over a group of order {}",
                vec.len(),
                self.group.order()
            )));
        }
        Ok(self.rows.iter().map(|&g| vec[g]).collect())
    }

    /// The selected rows of `rep(a)` as a `dim x |G|` matrix.
    pub fn rows_of_rep(&self, a: &AlgebraElement) -> Result<FieldMatrix> {
        if a.group() != self.group {
            return Err(Error::ContextMismatch("selector and element groups differ".into()));
        }
        let f = a.field();
        let mut m = FieldMatrix::zeros(f, self.rows.len(), self.group.order());
        for (p, &g) in self.rows.iter().enumerate() {
            for (v, c) in a.support() {
                let h = self.group.add(g, v);
                m[(p, h)] = f.add(m[(p, h)], c);
            }
        }
        Ok(m)
    }

    /// If the selected row set is invariant under right-multiplication by
    /// `rep(a)`, returns the unique `dim x dim` matrix `R` with
    /// `S * rep(a) = R * S`. Errors with [`Error::InvarianceViolation`] when
    /// some term of `a` moves a selected row outside the set, which signals
    /// that `a` shifts the selected coordinate.
    pub fn restrict(&self, a: &AlgebraElement) -> Result<FieldMatrix> {
        if a.group() != self.group {
            return Err(Error::ContextMismatch("selector and element groups differ".into()));
        }
        let f = a.field();
        let mut r = FieldMatrix::zeros(f, self.rows.len(), self.rows.len());
        for (p, &g) in self.rows.iter().enumerate() {
            for (v, c) in a.support() {
                let h = self.group.add(g, v);
                let Ok(p2) = self.rows.binary_search(&h) else {
                    return Err(Error::InvarianceViolation);
                };
                r[(p, p2)] = f.add(r[(p, p2)], c);
            }
        }
        Ok(r)
    }
}
