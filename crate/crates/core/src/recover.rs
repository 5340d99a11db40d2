//! Shared recovery engine: solving for node contents from parity equations
//! plus whatever symbols are on hand.
//!
//! Two entry points:
//!
//! * [`solve_for_symbols`] — assembles the full parity system, substitutes
//!   every known symbol, and solves for the requested nodes. Used for erasure
//!   decoding and as the fallback repair path.
//! * [`recover_node`] — repairs one node with equation modulus `sigma`. When
//!   every absent node's monomial avoids the failed node's coordinate, the
//!   structured path applies: an annihilator polynomial cancels the absent
//!   nodes, partial helpers evolve through restricted operators, and a single
//!   `ell x ell` solve recovers the node. Otherwise the evolution step is not
//!   defined (the annihilator itself shifts the selected coordinate) and the
//!   engine falls back to [`solve_for_symbols`] over the same downloaded
//!   symbols — bandwidth is identical on both paths.

use std::collections::BTreeMap;

use crate::base_code::ArrayCode;
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::group::{annihilator_poly, AlgebraElement, Selector};
use crate::matrix::FieldMatrix;

/// What we hold of one node's chunk.
#[derive(Clone, Debug)]
pub(crate) enum NodeData<'a> {
    /// The whole chunk.
    Full(&'a [FieldElement]),
    /// Values at a sorted subset of positions.
    Rows {
        rows: &'a [usize],
        values: &'a [FieldElement],
    },
}

impl NodeData<'_> {
    fn value_at(&self, pos: usize) -> Option<FieldElement> {
        match self {
            NodeData::Full(v) => Some(v[pos]),
            NodeData::Rows { rows, values } => {
                rows.binary_search(&pos).ok().map(|i| values[i])
            }
        }
    }

    fn covers(&self, rows_needed: &[usize]) -> bool {
        match self {
            NodeData::Full(_) => true,
            NodeData::Rows { rows, .. } => {
                rows_needed.iter().all(|p| rows.binary_search(p).is_ok())
            }
        }
    }
}

/// Solves the parity system for the full contents of the `want` nodes.
///
/// `known` maps node indices to held symbols; every position not covered is
/// treated as an unknown. Nodes outside `known` and `want` may stay
/// undetermined — only the wanted nodes must be pinned. Shape errors aside,
/// failure modes are [`Error::Inconsistent`] (symbols contradict the parity
/// equations) and [`Error::Singular`] (the held symbols do not determine a
/// wanted node).
pub(crate) fn solve_for_symbols(
    code: &ArrayCode,
    known: &BTreeMap<usize, NodeData<'_>>,
    want: &[usize],
) -> Result<BTreeMap<usize, Vec<FieldElement>>> {
    let group = code.group();
    let field = code.field();
    let ell = group.order();
    let n = code.n();
    let r = code.r();

    for (&j, data) in known {
        if j >= n {
            return Err(Error::Parameter(format!("node index {j} out of range")));
        }
        match data {
            NodeData::Full(v) if v.len() != ell => {
                return Err(Error::ShapeMismatch(format!(
                    "node {j}: {} symbols, chunk length {ell}",
                    v.len()
                )))
            }
            NodeData::Rows { rows, values } if rows.len() != values.len() => {
                return Err(Error::ShapeMismatch(format!(
                    "node {j}: {} rows but {} values",
                    rows.len(),
                    values.len()
                )))
            }
            _ => {}
        }
    }
    for &j in want {
        if j >= n {
            return Err(Error::Parameter(format!("node index {j} out of range")));
        }
        if known.contains_key(&j) {
            return Err(Error::Parameter(format!("node {j} is both known and wanted")));
        }
    }

    // Column layout: one unknown per uncovered (node, position) pair.
    let mut col_of: Vec<Vec<Option<usize>>> = vec![vec![None; ell]; n];
    let mut ncols = 0usize;
    for (j, cols) in col_of.iter_mut().enumerate() {
        for (pos, slot) in cols.iter_mut().enumerate() {
            let held = known.get(&j).and_then(|d| d.value_at(pos));
            if held.is_none() {
                *slot = Some(ncols);
                ncols += 1;
            }
        }
    }

    let nrows = r * ell;
    let mut m = FieldMatrix::zeros(field, nrows, ncols);
    let mut rhs = vec![0u64; nrows];
    for p in 0..r {
        let apow: Vec<u64> = (0..n).map(|j| field.pow(code.alpha_at(j), p as u64)).collect();
        let shift: Vec<usize> = (0..n)
            .map(|j| code.monomial_shift(j, p))
            .collect::<Result<_>>()?;
        for g in 0..ell {
            let row = p * ell + g;
            for j in 0..n {
                let pos = group.add(g, shift[j]);
                match col_of[j][pos] {
                    Some(col) => {
                        let cur = m[(row, col)];
                        m[(row, col)] = field.add(cur, apow[j]);
                    }
                    None => {
                        let v = known[&j].value_at(pos).expect("covered position");
                        rhs[row] = field.sub(rhs[row], field.mul(apow[j], v));
                    }
                }
            }
        }
    }

    let mut wanted_cols = Vec::with_capacity(want.len() * ell);
    for &j in want {
        for pos in 0..ell {
            wanted_cols.push(col_of[j][pos].expect("wanted node is unknown"));
        }
    }
    let values = m.solve_partial(&rhs, &wanted_cols)?;
    let mut out = BTreeMap::new();
    for (idx, &j) in want.iter().enumerate() {
        out.insert(j, values[idx * ell..(idx + 1) * ell].to_vec());
    }
    Ok(out)
}

/// Recovers the chunk of `failed` using equation modulus `sigma` and the
/// symbols in `available` (the helper set for this step).
pub(crate) fn recover_node(
    code: &ArrayCode,
    failed: usize,
    sigma: usize,
    available: &BTreeMap<usize, NodeData<'_>>,
) -> Result<Vec<FieldElement>> {
    let group = code.group();
    if failed >= code.n() {
        return Err(Error::Parameter(format!("node index {failed} out of range")));
    }
    if available.contains_key(&failed) {
        return Err(Error::Parameter(format!("failed node {failed} listed as helper")));
    }
    let w = code.assignment()[failed];
    let sel = Selector::build(group, w, sigma)?;

    let absent: Vec<usize> = (0..code.n())
        .filter(|j| *j != failed && !available.contains_key(j))
        .collect();

    // The structured path needs the annihilator of the absent nodes to leave
    // coordinate `w` alone, and each partial helper to hold at least the
    // selected rows.
    let absent_clear = absent.iter().all(|&u| code.assignment()[u] != w);
    let coverage_ok = available.iter().all(|(&j, data)| {
        if code.assignment()[j] == w {
            matches!(data, NodeData::Full(_))
        } else {
            data.covers(sel.rows())
        }
    });
    // Equation budget: sigma - 1 + |absent| must stay below r.
    let degree_ok = sigma + absent.len() <= code.r();

    if absent_clear && coverage_ok && degree_ok {
        recover_structured(code, failed, sigma, &sel, &absent, available)
    } else {
        let recovered = solve_for_symbols(code, available, &[failed])?;
        Ok(recovered.into_iter().next().expect("one wanted node").1)
    }
}

fn recover_structured(
    code: &ArrayCode,
    failed: usize,
    sigma: usize,
    sel: &Selector,
    absent: &[usize],
    available: &BTreeMap<usize, NodeData<'_>>,
) -> Result<Vec<FieldElement>> {
    let group = code.group();
    let field = code.field();
    let ell = group.order();

    let roots: Vec<(FieldElement, usize)> = absent
        .iter()
        .map(|&u| Ok((code.alpha_at(u), group.basis(code.assignment()[u])?)))
        .collect::<Result<_>>()?;
    let h = annihilator_poly(field, group, &roots)?;

    let point = |j: usize| -> Result<AlgebraElement> {
        Ok(AlgebraElement::monomial(
            field,
            group,
            code.alpha_at(j),
            group.basis(code.assignment()[j])?,
        ))
    };

    // Left side: rows of rep((alpha_i x_i)^m h(alpha_i x_i)) selected by S,
    // stacked over m = 0..sigma. Right side: the matching combinations of
    // helper symbols, negated.
    let pt_failed = point(failed)?;
    let mut op_failed = h.eval(&pt_failed)?;
    let mut lhs: Option<FieldMatrix> = None;
    let mut rhs: Vec<FieldElement> = Vec::with_capacity(ell);

    // Per-helper evaluated operators, advanced by one power of the helper's
    // point each round.
    let mut helper_ops: BTreeMap<usize, AlgebraElement> = BTreeMap::new();
    for &j in available.keys() {
        helper_ops.insert(j, h.eval(&point(j)?)?);
    }

    for m in 0..sigma {
        let block = sel.rows_of_rep(&op_failed)?;
        lhs = Some(match lhs {
            None => block,
            Some(acc) => acc.vcat(&block)?,
        });

        let mut acc = vec![0u64; sel.dim()];
        for (&j, data) in available {
            let op = &helper_ops[&j];
            let contribution = match data {
                NodeData::Full(v) => sel.extract(&op.apply(v)?)?,
                NodeData::Rows { rows, values } => {
                    let selected: Vec<FieldElement> = sel
                        .rows()
                        .iter()
                        .map(|p| {
                            let i = rows.binary_search(p).expect("coverage checked");
                            values[i]
                        })
                        .collect();
                    sel.restrict(op)?.mat_vec(&selected)?
                }
            };
            for (a, c) in acc.iter_mut().zip(contribution) {
                *a = field.add(*a, c);
            }
        }
        rhs.extend(acc.into_iter().map(|v| field.neg(v)));

        if m + 1 < sigma {
            op_failed = op_failed.mul(&pt_failed)?;
            for (&j, op) in helper_ops.iter_mut() {
                *op = op.mul(&point(j)?)?;
            }
        }
    }

    let lhs = lhs.expect("sigma >= 1");
    if lhs.rows() != ell {
        return Err(Error::Internal(format!(
            "stacked repair system has {} rows, expected {ell}",
            lhs.rows()
        )));
    }
    match lhs.solve(&rhs) {
        Ok(x) => Ok(x),
        Err(Error::Singular) => Err(Error::Internal(
            "structured repair system is singular".into(),
        )),
        Err(e) => Err(e),
    }
}
