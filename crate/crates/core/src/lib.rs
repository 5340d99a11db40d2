//! MDS array codes over group algebras with low-bandwidth node repair.
//!
//! The crate builds storage codes in three layers:
//!
//! * [`base_code`] — array codes of length `n` over GF(q) whose parity-check
//!   blocks are powers of scaled group-algebra monomials. Any `n - k` node
//!   erasures are decodable, and a single node can be repaired from
//!   `d = k + s - 1` helpers, most of which only ship a `1/s` fraction of
//!   their data. The fixed helper downloads determine the failed node
//!   whenever no node *outside* the helper set shares the failed node's
//!   coordinate (always true when every node has a distinct coordinate, or
//!   when `d = n - 1`); otherwise repair reports the ambiguity as
//!   [`Error::Singular`] rather than guessing, and the node can still be
//!   rebuilt by decoding from any `k` full nodes.
//! * [`eps_msr`] — many independent copies ("chunks") of the base code, with
//!   per-chunk monomial assignments drawn from the words of an outer code
//!   ([`outer_code`]). The outer code's minimum distance caps how often a
//!   helper must fall back to a full-chunk transfer, which bounds the repair
//!   bandwidth within a factor `1 + eps` of `ell / s`.
//! * [`multi_repair`] — the same layering over the group (Z_zeta)^t with
//!   `zeta = lcm(1..=n-k)`, which supports repairing up to `n - k` failed
//!   nodes simultaneously from any admissible helper count.
//!
//! Supporting modules: [`field`] (prime fields and field selection),
//! [`group`] (the group algebra and its regular representation), and
//! [`matrix`] (exact linear algebra over GF(q)).

pub mod base_code;
pub mod error;
pub mod eps_msr;
pub mod field;
pub mod group;
pub mod matrix;
pub mod multi_repair;
pub mod outer_code;

mod recover;

pub use error::{Error, Result};
