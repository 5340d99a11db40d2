//! Array codes whose parity-check blocks are powers of scaled group-algebra
//! monomials, and single-node repair for them.
//!
//! An [`ArrayCode`] stores `n` nodes of `ell = m^t` field symbols each. Node
//! `j` carries the evaluation point `alpha^j` and a monomial `x_(e_a[j])`;
//! the parity-check matrix has block `(i, j)` equal to the regular
//! representation of `(alpha^j x_(e_a[j]))^i` for `i = 0..n-k`. Every square
//! block submatrix is a block Vandermonde matrix of commuting blocks, and the
//! field is selected so all of them are invertible — so any `n - k` erasures
//! are decodable.
//!
//! [`BaseCode`] fixes the group modulus to the repair order `s` and adds the
//! repair workflow: a failed node `i` is rebuilt from `d = k + s - 1`
//! helpers, where a helper `j` with `a[j] != a[i]` reads and transmits only
//! the `ell / s` symbols indexed by `{g : g(a[i]) = 0 mod s}`, while a helper
//! sharing the failed node's coordinate transmits its whole chunk. Transfers
//! are verbatim reads of stored symbols (help-by-transfer); all the linear
//! algebra happens on the repair side.
//!
//! These fixed downloads are guaranteed to determine the failed node when no
//! *absent* node (neither failed nor helping) shares the failed node's
//! coordinate — in particular whenever coordinates are all distinct or
//! `d = n - 1`. When an absent node collides, the downloaded system can be
//! rank-deficient; repair then returns [`Error::Singular`] instead of an
//! arbitrary solution. Whether a colliding instance still determines the
//! node depends on the evaluation points, so the crate never promises it.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::group::{GroupSpec, Selector};
use crate::matrix::FieldMatrix;
use crate::recover::{recover_node, solve_for_symbols, NodeData};

/// The MDS array-code layer: encoding, parity checks, erasure decoding.
#[derive(Clone, Debug)]
pub struct ArrayCode {
    field: PrimeField,
    group: GroupSpec,
    n: usize,
    k: usize,
    /// Coordinate index (0-based, `< t`) of each node's monomial.
    assignment: Vec<usize>,
    /// Cached evaluation points `alpha^0 .. alpha^(n-1)`.
    points: Vec<FieldElement>,
}

impl ArrayCode {
    pub fn new(
        field: PrimeField,
        group: GroupSpec,
        n: usize,
        k: usize,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        if k < 1 || k >= n {
            return Err(Error::Parameter(format!("need 1 <= k < n, got k = {k}, n = {n}")));
        }
        if assignment.len() != n {
            return Err(Error::Parameter(format!(
                "{} coordinate assignments for {n} nodes",
                assignment.len()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&a| a >= group.t()) {
            return Err(Error::Parameter(format!(
                "assignment coordinate {bad} out of range for width {}",
                group.t()
            )));
        }
        let points = field.evaluation_points(n)?;
        if !field.verify_root_condition(n, group.m())? {
            return Err(Error::Parameter(format!(
                "GF({}) admits order-{} roots of unity among evaluation point ratios",
                field.q(),
                group.m()
            )));
        }
        Ok(ArrayCode {
            field,
            group,
            n,
            k,
            assignment,
            points,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.n - self.k
    }

    /// Symbols per node.
    pub fn ell(&self) -> usize {
        self.group.order()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn alpha_at(&self, j: usize) -> FieldElement {
        self.points[j]
    }

    /// Rank of `p * e_(a[j])`: where the degree-`p` parity block of node `j`
    /// shifts a basis row.
    pub(crate) fn monomial_shift(&self, j: usize, p: usize) -> Result<usize> {
        let base = self.group.basis(self.assignment[j])?;
        Ok(base * (p % self.group.m()))
    }

    /// The dense `r*ell x n*ell` parity-check matrix.
    pub fn parity_check(&self) -> Result<FieldMatrix> {
        let ell = self.ell();
        let r = self.r();
        let mut m = FieldMatrix::zeros(self.field, r * ell, self.n * ell);
        for p in 0..r {
            for j in 0..self.n {
                let coeff = self.field.pow(self.points[j], p as u64);
                let shift = self.monomial_shift(j, p)?;
                for g in 0..ell {
                    let h = self.group.add(g, shift);
                    m[(p * ell + g, j * ell + h)] = coeff;
                }
            }
        }
        Ok(m)
    }

    /// Checks invertibility of every `r*ell` square submatrix built from `r`
    /// block columns — the property that makes any `r` erasures decodable.
    pub fn verify_mds(&self) -> Result<bool> {
        let ell = self.ell();
        let r = self.r();
        for subset in combinations(self.n, r) {
            let mut m = FieldMatrix::zeros(self.field, r * ell, r * ell);
            for p in 0..r {
                for (b, &j) in subset.iter().enumerate() {
                    let coeff = self.field.pow(self.points[j], p as u64);
                    let shift = self.monomial_shift(j, p)?;
                    for g in 0..ell {
                        let h = self.group.add(g, shift);
                        m[(p * ell + g, b * ell + h)] = coeff;
                    }
                }
            }
            if m.rank() != r * ell {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Systematic encoding: the message fills nodes `0..k`, parity nodes are
    /// derived from the parity equations.
    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
        let ell = self.ell();
        if message.len() != self.k * ell {
            return Err(Error::ShapeMismatch(format!(
                "message of {} symbols, expected {}",
                message.len(),
                self.k * ell
            )));
        }
        let mut partial: Vec<Option<Vec<FieldElement>>> = Vec::with_capacity(self.n);
        for j in 0..self.k {
            let chunk: Vec<FieldElement> = message[j * ell..(j + 1) * ell]
                .iter()
                .map(|&v| self.field.elem(v))
                .collect();
            partial.push(Some(chunk));
        }
        partial.resize(self.n, None);
        self.erase_decode(&partial)
    }

    /// True iff the node contents satisfy every parity equation.
    pub fn is_codeword(&self, nodes: &[Vec<FieldElement>]) -> Result<bool> {
        let ell = self.ell();
        if nodes.len() != self.n || nodes.iter().any(|c| c.len() != ell) {
            return Err(Error::ShapeMismatch(format!(
                "expected {} nodes of {ell} symbols",
                self.n
            )));
        }
        for p in 0..self.r() {
            for g in 0..ell {
                let mut acc = 0u64;
                for j in 0..self.n {
                    let coeff = self.field.pow(self.points[j], p as u64);
                    let pos = self.group.add(g, self.monomial_shift(j, p)?);
                    acc = self.field.add(acc, self.field.mul(coeff, nodes[j][pos]));
                }
                if acc != 0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Rebuilds the full codeword from any subset of nodes with at most
    /// `r` entries missing.
    pub fn erase_decode(
        &self,
        partial: &[Option<Vec<FieldElement>>],
    ) -> Result<Vec<Vec<FieldElement>>> {
        let ell = self.ell();
        if partial.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "{} node slots for a length-{} code",
                partial.len(),
                self.n
            )));
        }
        let erased: Vec<usize> = (0..self.n).filter(|&j| partial[j].is_none()).collect();
        if erased.len() > self.r() {
            return Err(Error::TooManyErasures {
                erased: erased.len(),
                max: self.r(),
            });
        }
        for (j, slot) in partial.iter().enumerate() {
            if let Some(c) = slot {
                if c.len() != ell {
                    return Err(Error::ShapeMismatch(format!(
                        "node {j} has {} symbols, chunk length {ell}",
                        c.len()
                    )));
                }
            }
        }
        let mut known: BTreeMap<usize, NodeData> = BTreeMap::new();
        for (j, slot) in partial.iter().enumerate() {
            if let Some(c) = slot {
                known.insert(j, NodeData::Full(c));
            }
        }
        let recovered = solve_for_symbols(self, &known, &erased)?;
        let mut out = Vec::with_capacity(self.n);
        for (j, slot) in partial.iter().enumerate() {
            match slot {
                Some(c) => out.push(c.clone()),
                None => out.push(recovered[&j].clone()),
            }
        }
        Ok(out)
    }

    pub(crate) fn recover_one(
        &self,
        failed: usize,
        sigma: usize,
        available: &BTreeMap<usize, NodeData<'_>>,
    ) -> Result<Vec<FieldElement>> {
        recover_node(self, failed, sigma, available)
    }
}

/// Symbols a helper reads and ships during one chunk repair. Help-by-transfer
/// holds by construction: `symbols[p]` is the stored value at `accessed[p]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelperPayload {
    pub helper: usize,
    /// Ascending indices into the helper's stored chunk.
    pub accessed: Vec<usize>,
    pub symbols: Vec<FieldElement>,
}

/// A single-chunk code with repair order `s`: group (Z_s)^t, `d = k + s - 1`.
#[derive(Clone, Debug)]
pub struct BaseCode {
    code: ArrayCode,
    s: usize,
    t: usize,
    d: usize,
}

impl BaseCode {
    pub fn new(
        field: PrimeField,
        n: usize,
        k: usize,
        s: usize,
        t: usize,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        if n < 2 || k < 1 || k >= n {
            return Err(Error::Parameter(format!("need 1 <= k < n, got k = {k}, n = {n}")));
        }
        if s < 2 {
            return Err(Error::Parameter(format!(
                "repair order s = {s}; s = 1 would make repair a full rebuild"
            )));
        }
        if s > n - k {
            return Err(Error::Parameter(format!(
                "repair order s = {s} exceeds the redundancy r = {}",
                n - k
            )));
        }
        if t < 1 || t > n {
            return Err(Error::Parameter(format!("need 1 <= t <= n, got t = {t}")));
        }
        let group = GroupSpec::new(s, t)?;
        let code = ArrayCode::new(field, group, n, k, assignment)?;
        Ok(BaseCode {
            code,
            s,
            t,
            d: k + s - 1,
        })
    }

    pub fn array(&self) -> &ArrayCode {
        &self.code
    }

    pub fn field(&self) -> PrimeField {
        self.code.field()
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn k(&self) -> usize {
        self.code.k()
    }

    pub fn r(&self) -> usize {
        self.code.r()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Helper count for single-node repair.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Symbols per node: `s^t`.
    pub fn ell(&self) -> usize {
        self.code.ell()
    }

    pub fn assignment(&self) -> &[usize] {
        self.code.assignment()
    }

    pub fn parity_check(&self) -> Result<FieldMatrix> {
        self.code.parity_check()
    }

    pub fn verify_mds(&self) -> Result<bool> {
        self.code.verify_mds()
    }

    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
        self.code.encode(message)
    }

    pub fn is_codeword(&self, nodes: &[Vec<FieldElement>]) -> Result<bool> {
        self.code.is_codeword(nodes)
    }

    pub fn erase_decode(
        &self,
        partial: &[Option<Vec<FieldElement>>],
    ) -> Result<Vec<Vec<FieldElement>>> {
        self.code.erase_decode(partial)
    }

    /// The row set helpers with a differing coordinate are asked for:
    /// `{g : g(a[failed]) = 0 mod s}`.
    pub fn repair_selector(&self, failed: usize) -> Result<Selector> {
        if failed >= self.n() {
            return Err(Error::Parameter(format!("node index {failed} out of range")));
        }
        Selector::build(self.code.group(), self.assignment()[failed], self.s)
    }

    /// Fraction of a helper's chunk that repair reads: `1/s` when the
    /// helper's coordinate differs from the failed node's, else `1`.
    pub fn repair_fraction(&self, failed: usize, helper: usize) -> Result<Ratio<u64>> {
        if failed >= self.n() || helper >= self.n() || failed == helper {
            return Err(Error::Parameter(format!(
                "bad node pair ({failed}, {helper}) for n = {}",
                self.n()
            )));
        }
        Ok(if self.assignment()[failed] == self.assignment()[helper] {
            Ratio::from_integer(1)
        } else {
            Ratio::new(1, self.s as u64)
        })
    }

    fn check_helpers(&self, failed: usize, helpers: &[usize]) -> Result<()> {
        if failed >= self.n() {
            return Err(Error::Parameter(format!("node index {failed} out of range")));
        }
        if helpers.len() != self.d {
            return Err(Error::Parameter(format!(
                "{} helpers supplied, repair needs d = {}",
                helpers.len(),
                self.d
            )));
        }
        let mut seen = vec![false; self.n()];
        for &j in helpers {
            if j >= self.n() {
                return Err(Error::Parameter(format!("helper index {j} out of range")));
            }
            if j == failed {
                return Err(Error::Parameter(format!("failed node {j} cannot help")));
            }
            if seen[j] {
                return Err(Error::Parameter(format!("helper {j} listed twice")));
            }
            seen[j] = true;
        }
        Ok(())
    }

    /// What helper `j` reads from its chunk and ships for the repair of
    /// `failed` with helper set `helpers`.
    pub fn repair_helper_payload(
        &self,
        failed: usize,
        helper: usize,
        helpers: &[usize],
        chunk: &[FieldElement],
    ) -> Result<HelperPayload> {
        self.check_helpers(failed, helpers)?;
        if !helpers.contains(&helper) {
            return Err(Error::Parameter(format!("node {helper} is not in the helper set")));
        }
        if chunk.len() != self.ell() {
            return Err(Error::ShapeMismatch(format!(
                "helper chunk has {} symbols, expected {}",
                chunk.len(),
                self.ell()
            )));
        }
        let accessed: Vec<usize> = if self.assignment()[helper] == self.assignment()[failed] {
            (0..self.ell()).collect()
        } else {
            self.repair_selector(failed)?.rows().to_vec()
        };
        let symbols = accessed.iter().map(|&g| chunk[g]).collect();
        Ok(HelperPayload {
            helper,
            accessed,
            symbols,
        })
    }

    /// Rebuilds the failed chunk from helper payloads. `payloads` must hold
    /// exactly one payload per helper in `helpers`.
    pub fn repair_reconstruct(
        &self,
        failed: usize,
        helpers: &[usize],
        payloads: &[HelperPayload],
    ) -> Result<Vec<FieldElement>> {
        self.check_helpers(failed, helpers)?;
        if payloads.len() != helpers.len() {
            return Err(Error::Parameter(format!(
                "{} payloads for {} helpers",
                payloads.len(),
                helpers.len()
            )));
        }
        let sel = self.repair_selector(failed)?;
        let mut available: BTreeMap<usize, NodeData> = BTreeMap::new();
        for payload in payloads {
            let j = payload.helper;
            if !helpers.contains(&j) || available.contains_key(&j) {
                return Err(Error::Parameter(format!(
                    "payload from node {j} does not match the helper set"
                )));
            }
            if payload.symbols.len() != payload.accessed.len() {
                return Err(Error::ShapeMismatch(format!(
                    "payload from node {j}: {} indices, {} symbols",
                    payload.accessed.len(),
                    payload.symbols.len()
                )));
            }
            if self.assignment()[j] == self.assignment()[failed] {
                if payload.accessed.len() != self.ell()
                    || payload.accessed.iter().enumerate().any(|(i, &g)| i != g)
                {
                    return Err(Error::Parameter(format!(
                        "node {j} shares the failed coordinate and must ship its whole chunk"
                    )));
                }
                available.insert(j, NodeData::Full(&payload.symbols));
            } else {
                if payload.accessed != sel.rows() {
                    return Err(Error::Parameter(format!(
                        "node {j} must ship exactly the selected rows"
                    )));
                }
                available.insert(
                    j,
                    NodeData::Rows {
                        rows: &payload.accessed,
                        values: &payload.symbols,
                    },
                );
            }
        }
        if available.len() != helpers.len() {
            return Err(Error::Parameter("missing helper payloads".into()));
        }
        self.code.recover_one(failed, self.s, &available)
    }
}

/// All `r`-element subsets of `{0, .., n-1}` in lexicographic order.
pub(crate) fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        // Advance the rightmost index that can still move.
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
