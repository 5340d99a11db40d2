//! Dense matrices over a prime field: product/rank/determinant/inverse and
//! linear solvers, all exact.
//!
//! Row-major storage, indexed by `(row, col)` tuples. Everything here is
//! plain Gaussian elimination; the matrices in this crate top out at a few
//! hundred rows, so no pivot-selection or blocking heuristics are needed.
//! [`FieldMatrix::solve_partial`] is the workhorse for repair: it solves a
//! consistent system that may be underdetermined overall and extracts only
//! the unknowns that are pinned to a unique value.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl FieldMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    /// Builds from row slices, reducing every entry into the field.
    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let mut m = Self::zeros(field, r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = field.elem(v);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn check_context(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ContextMismatch(format!(
                "GF({}) vs GF({})",
                self.field.q(),
                other.field.q()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = self.field.add(*a, b);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} - {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = self.field.sub(*a, b);
        }
        Ok(out)
    }

    pub fn scale(&self, c: FieldElement) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = self.field.mul(*a, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = self.field.neg(*a);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let q = f.q() as u128;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                let a = a as u128;
                for j in 0..other.cols {
                    let cur = out[(i, j)] as u128;
                    out[(i, j)] = ((cur + a * other[(k, j)] as u128) % q) as u64;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * vec[{}]",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let f = self.field;
        let mut out = vec![0u64; self.rows];
        for i in 0..self.rows {
            let mut acc = 0u64;
            for j in 0..self.cols {
                acc = f.add(acc, f.mul(self[(i, j)], v[j]));
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch("hcat row mismatch".into()));
        }
        let mut out = Self::zeros(self.field, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)];
            }
        }
        Ok(out)
    }

    /// Vertical concatenation `[self; other]`.
    pub fn vcat(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch("vcat column mismatch".into()));
        }
        let mut out = Self::zeros(self.field, self.rows + other.rows, self.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&other.data);
        Ok(out)
    }

    /// In-place reduced row echelon form. Returns the pivot column of each
    /// pivot row, in order.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(src) = (pivot_row..self.rows).find(|&r| self[(r, col)] != 0) else {
                continue;
            };
            if src != pivot_row {
                for j in 0..self.cols {
                    self.data.swap(src * self.cols + j, pivot_row * self.cols + j);
                }
            }
            let inv = f.inv(self[(pivot_row, col)]).expect("pivot nonzero");
            for j in col..self.cols {
                self[(pivot_row, j)] = f.mul(self[(pivot_row, j)], inv);
            }
            for r in 0..self.rows {
                if r == pivot_row || self[(r, col)] == 0 {
                    continue;
                }
                let factor = self[(r, col)];
                for j in col..self.cols {
                    let delta = f.mul(factor, self[(pivot_row, j)]);
                    self[(r, j)] = f.sub(self[(r, j)], delta);
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Determinant via forward elimination with sign tracking.
    pub fn det(&self) -> Result<FieldElement> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "determinant of {}x{}",
                self.rows, self.cols
            )));
        }
        let f = self.field;
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1u64;
        let mut negate = false;
        for col in 0..n {
            let Some(src) = (col..n).find(|&r| m[(r, col)] != 0) else {
                return Ok(0);
            };
            if src != col {
                for j in 0..n {
                    m.data.swap(src * n + j, col * n + j);
                }
                negate = !negate;
            }
            let pivot = m[(col, col)];
            det = f.mul(det, pivot);
            let inv = f.inv(pivot)?;
            for r in col + 1..n {
                if m[(r, col)] == 0 {
                    continue;
                }
                let factor = f.mul(m[(r, col)], inv);
                for j in col..n {
                    let delta = f.mul(factor, m[(col, j)]);
                    m[(r, j)] = f.sub(m[(r, j)], delta);
                }
            }
        }
        Ok(if negate { f.neg(det) } else { det })
    }

    pub fn invert(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "inverse of {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let aug = self.hcat(&Self::identity(self.field, n))?;
        let (red, pivots) = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return Err(Error::Singular);
        }
        let mut out = Self::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = red[(i, n + j)];
            }
        }
        Ok(out)
    }

    /// Solves `self * x = rhs` for a unique `x`; the system may be
    /// overdetermined but must be consistent with full column rank.
    pub fn solve(&self, rhs: &[FieldElement]) -> Result<Vec<FieldElement>> {
        let wanted: Vec<usize> = (0..self.cols).collect();
        self.solve_partial(rhs, &wanted)
    }

    /// Solves `self * x = rhs` and extracts the unknowns listed in `wanted`.
    ///
    /// The system must be consistent. Unknowns outside `wanted` may remain
    /// free; each wanted unknown must be pinned to a single value across the
    /// whole solution space, otherwise [`Error::Singular`] is returned.
    pub fn solve_partial(
        &self,
        rhs: &[FieldElement],
        wanted: &[usize],
    ) -> Result<Vec<FieldElement>> {
        if rhs.len() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "rhs has {} entries for {} equations",
                rhs.len(),
                self.rows
            )));
        }
        let n = self.cols;
        let mut aug = Self::zeros(self.field, self.rows, n + 1);
        for i in 0..self.rows {
            aug.data[i * (n + 1)..i * (n + 1) + n].copy_from_slice(self.row(i));
            aug[(i, n)] = self.field.elem(rhs[i]);
        }
        let pivots = aug.rref_in_place();
        if pivots.last() == Some(&n) {
            return Err(Error::Inconsistent);
        }
        let mut pivot_row_of_col = vec![None; n];
        for (row, &col) in pivots.iter().enumerate() {
            pivot_row_of_col[col] = Some(row);
        }
        let mut out = Vec::with_capacity(wanted.len());
        for &w in wanted {
            if w >= n {
                return Err(Error::ShapeMismatch(format!(
                    "unknown index {w} out of {n} columns"
                )));
            }
            let Some(row) = pivot_row_of_col[w] else {
                return Err(Error::Singular);
            };
            // A pivot variable is uniquely determined only if its row does not
            // couple it to any free column.
            for j in 0..n {
                if j != w && aug[(row, j)] != 0 && pivot_row_of_col[j].is_none() {
                    return Err(Error::Singular);
                }
            }
            out.push(aug[(row, n)]);
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for FieldMatrix {
    type Output = FieldElement;

    fn index(&self, (r, c): (usize, usize)) -> &FieldElement {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for FieldMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut FieldElement {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Checks the block Vandermonde determinant identity for pairwise commuting
/// square blocks `B_1, ..., B_b`: the determinant of the full matrix
/// `(B_j^(i-1))_{i,j}` must equal `prod_{i<j} det(B_j - B_i)`, the sign fixed
/// so that 1x1 blocks reduce to the classical Vandermonde determinant.
pub fn block_vandermonde_det_check(blocks: &[FieldMatrix]) -> Result<bool> {
    let b = blocks.len();
    if b == 0 {
        return Err(Error::Parameter("no blocks supplied".into()));
    }
    let field = blocks[0].field();
    let sz = blocks[0].rows();
    for blk in blocks {
        if !blk.is_square() || blk.rows() != sz {
            return Err(Error::ShapeMismatch("blocks must be square and equal-sized".into()));
        }
        if blk.field() != field {
            return Err(Error::ContextMismatch("blocks over different fields".into()));
        }
    }
    for i in 0..b {
        for j in i + 1..b {
            if blocks[i].mul(&blocks[j])? != blocks[j].mul(&blocks[i])? {
                return Err(Error::Parameter(format!("blocks {i} and {j} do not commute")));
            }
        }
    }
    // Assemble the big matrix row-block by row-block: powers 0..b of each block.
    let mut big = FieldMatrix::zeros(field, b * sz, b * sz);
    for j in 0..b {
        let mut pow = FieldMatrix::identity(field, sz);
        for i in 0..b {
            for r in 0..sz {
                for c in 0..sz {
                    big[(i * sz + r, j * sz + c)] = pow[(r, c)];
                }
            }
            if i + 1 < b {
                pow = pow.mul(&blocks[j])?;
            }
        }
    }
    let direct = big.det()?;
    let mut product = 1u64;
    for i in 0..b {
        for j in i + 1..b {
            product = field.mul(product, blocks[j].sub(&blocks[i])?.det()?);
        }
    }
    Ok(direct == product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::select_field;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn field() -> PrimeField {
        PrimeField::new(13, 2).unwrap()
    }

    fn random_matrix(f: PrimeField, n: usize, m: usize, rng: &mut StdRng) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(f, n, m);
        for i in 0..n {
            for j in 0..m {
                out[(i, j)] = rng.gen_range(0..f.q());
            }
        }
        out
    }

    #[test]
    fn identity_inverts_to_itself() {
        let id = FieldMatrix::identity(field(), 4);
        assert_eq!(id.invert().unwrap(), id);
        assert_eq!(id.det().unwrap(), 1);
        assert_eq!(id.rank(), 4);
    }

    #[test]
    fn inverse_roundtrip_random() {
        let f = field();
        let mut rng = StdRng::seed_from_u64(7);
        let mut found = 0;
        while found < 20 {
            let m = random_matrix(f, 5, 5, &mut rng);
            let Ok(inv) = m.invert() else { continue };
            found += 1;
            assert_eq!(m.mul(&inv).unwrap(), FieldMatrix::identity(f, 5));
            assert_eq!(inv.mul(&m).unwrap(), FieldMatrix::identity(f, 5));
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let f = field();
        let m = FieldMatrix::from_rows(f, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(matches!(m.invert(), Err(Error::Singular)));
        assert_eq!(m.det().unwrap(), 0);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn solve_recovers_known_vector() {
        let f = field();
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..20 {
            let m = random_matrix(f, 6, 6, &mut rng);
            if m.det().unwrap() == 0 {
                continue;
            }
            let x: Vec<u64> = (0..6).map(|_| rng.gen_range(0..f.q())).collect();
            let b = m.mat_vec(&x).unwrap();
            assert_eq!(m.solve(&b).unwrap(), x);
        }
    }

    #[test]
    fn solve_partial_pins_only_determined_unknowns() {
        let f = field();
        // x0 + x1 = 5, x0 + x1 + x2 = 9: x2 = 4 is pinned, x0/x1 are not.
        let m = FieldMatrix::from_rows(f, &[vec![1, 1, 0], vec![1, 1, 1]]).unwrap();
        assert_eq!(m.solve_partial(&[5, 9], &[2]).unwrap(), vec![4]);
        assert!(matches!(m.solve_partial(&[5, 9], &[0]), Err(Error::Singular)));
        // Inconsistent: x0 = 1 and x0 = 2.
        let m = FieldMatrix::from_rows(f, &[vec![1, 0, 0], vec![1, 0, 0]]).unwrap();
        assert!(matches!(m.solve_partial(&[1, 2], &[0]), Err(Error::Inconsistent)));
    }

    #[test]
    fn det_is_multiplicative() {
        let f = field();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_matrix(f, 4, 4, &mut rng);
            let b = random_matrix(f, 4, 4, &mut rng);
            let lhs = a.mul(&b).unwrap().det().unwrap();
            let rhs = f.mul(a.det().unwrap(), b.det().unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn det_sign_under_row_swap() {
        let f = field();
        let m = FieldMatrix::from_rows(f, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(m.det().unwrap(), f.neg(1));
    }

    #[test]
    fn block_vandermonde_scalar_case() {
        let f = field();
        // 1x1 blocks (3) and (7): det [[1,1],[3,7]] = 4 = 7 - 3.
        let b1 = FieldMatrix::from_rows(f, &[vec![3]]).unwrap();
        let b2 = FieldMatrix::from_rows(f, &[vec![7]]).unwrap();
        assert!(block_vandermonde_det_check(&[b1.clone(), b2]).unwrap());
        // Identical blocks: both sides vanish, identity still holds.
        let b3 = FieldMatrix::from_rows(f, &[vec![3]]).unwrap();
        assert!(block_vandermonde_det_check(&[b1, b3]).unwrap());
    }

    #[test]
    fn block_vandermonde_rejects_noncommuting() {
        let f = field();
        let a = FieldMatrix::from_rows(f, &[vec![0, 1], vec![0, 0]]).unwrap();
        let b = FieldMatrix::from_rows(f, &[vec![0, 0], vec![1, 0]]).unwrap();
        assert!(matches!(
            block_vandermonde_det_check(&[a, b]),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn block_vandermonde_commuting_polynomial_blocks() {
        // Polynomials in one matrix commute with each other.
        let f = select_field(4, 2).unwrap();
        let mut rng = StdRng::seed_from_u64(21);
        let base = random_matrix(f, 3, 3, &mut rng);
        let blocks: Vec<FieldMatrix> = (0..3)
            .map(|i| {
                let c0 = rng.gen_range(0..f.q());
                let c1 = rng.gen_range(1..f.q());
                base.scale(c1)
                    .add(&FieldMatrix::identity(f, 3).scale(c0))
                    .unwrap()
                    .add(&base.mul(&base).unwrap().scale(i as u64))
                    .unwrap()
            })
            .collect();
        assert!(block_vandermonde_det_check(&blocks).unwrap());
    }
}
