//! Words that assign a monomial coordinate to every chunk of every node.
//!
//! A node's repair cost depends on how often its word agrees with a helper's
//! word: each agreeing chunk must be shipped whole, each disagreeing chunk
//! only fractionally. Keeping the words of distinct nodes far apart in
//! Hamming distance therefore caps the repair bandwidth. This module holds
//! the word set ([`OuterCode`]), a greedy constructor that meets a distance
//! target when the alphabet and length allow it, and the entropy estimates
//! that say when they do.

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Coordinates disagree in how many positions.
pub fn hamming_distance(a: &[usize], b: &[usize]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Base-`t` entropy of `x`, the exponent in alphabet-`t` ball-volume counts.
/// Zero at `x = 0`, one at `x = 1 - 1/t`.
pub fn q_ary_entropy(t: usize, x: f64) -> f64 {
    assert!(t >= 2, "entropy needs an alphabet of at least two symbols");
    assert!((0.0..=1.0).contains(&x), "entropy argument out of range");
    let t = t as f64;
    let mut h = x * (t - 1.0).ln();
    if x > 0.0 {
        h -= x * x.ln();
    }
    if x < 1.0 {
        h -= (1.0 - x) * (1.0 - x).ln();
    }
    h / t.ln()
}

/// A set of distinct, fixed-length words over `{0, .., alphabet-1}` with a
/// known minimum pairwise Hamming distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OuterCode {
    alphabet: usize,
    length: usize,
    words: Vec<Vec<usize>>,
    dist_min: usize,
}

impl OuterCode {
    /// Wraps explicit words, computing their minimum distance. A single word
    /// gets `dist_min = length` by convention.
    pub fn new(alphabet: usize, length: usize, words: Vec<Vec<usize>>) -> Result<Self> {
        if alphabet < 1 || length < 1 {
            return Err(Error::Parameter(format!(
                "degenerate word shape: alphabet {alphabet}, length {length}"
            )));
        }
        if words.is_empty() {
            return Err(Error::Parameter("no words supplied".into()));
        }
        for (i, w) in words.iter().enumerate() {
            if w.len() != length {
                return Err(Error::Parameter(format!(
                    "word {i} has length {}, expected {length}",
                    w.len()
                )));
            }
            if let Some(&bad) = w.iter().find(|&&c| c >= alphabet) {
                return Err(Error::Parameter(format!(
                    "word {i} uses symbol {bad} outside the {alphabet}-ary alphabet"
                )));
            }
        }
        let mut dist_min = length;
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                let d = hamming_distance(&words[i], &words[j]);
                if d == 0 {
                    return Err(Error::Parameter(format!("words {i} and {j} are equal")));
                }
                dist_min = dist_min.min(d);
            }
        }
        Ok(OuterCode {
            alphabet,
            length,
            words,
            dist_min,
        })
    }

    /// Smallest admissible distance for a relative-distance target:
    /// `ceil(delta * length)`.
    pub fn distance_requirement(delta: Ratio<u64>, length: usize) -> Result<usize> {
        if delta <= Ratio::from_integer(0) || delta > Ratio::from_integer(1) {
            return Err(Error::Parameter(format!(
                "relative distance {delta} outside (0, 1]"
            )));
        }
        Ok((delta * Ratio::from_integer(length as u64)).ceil().to_integer() as usize)
    }

    /// Greedy word selection in lexicographic order: keep a word iff it is at
    /// distance `>= dist_min` from everything kept so far, stop after `count`
    /// words. Fails with [`Error::Capacity`] when the space is exhausted
    /// first — the greedy sweep is deterministic, so the failure is a proof
    /// that these parameters cannot host `count` words at this distance.
    pub fn gv_greedy(alphabet: usize, length: usize, dist_min: usize, count: usize) -> Result<Self> {
        if alphabet < 1 || length < 1 {
            return Err(Error::Parameter(format!(
                "degenerate word shape: alphabet {alphabet}, length {length}"
            )));
        }
        if dist_min < 1 {
            return Err(Error::Parameter("minimum distance must be at least 1".into()));
        }
        if count < 1 {
            return Err(Error::Parameter("need at least one word".into()));
        }
        let space = (alphabet as u128).checked_pow(length as u32);
        match space {
            Some(total) if total <= 1 << 22 => {}
            _ => {
                return Err(Error::Parameter(format!(
                    "word space {alphabet}^{length} too large to sweep"
                )))
            }
        }
        let mut words: Vec<Vec<usize>> = Vec::with_capacity(count);
        let mut cur = vec![0usize; length];
        loop {
            if words
                .iter()
                .all(|w| hamming_distance(w, &cur) >= dist_min)
            {
                words.push(cur.clone());
                if words.len() == count {
                    break;
                }
            }
            // Lexicographic increment, most significant digit first.
            let mut pos = length;
            loop {
                if pos == 0 {
                    let achieved = words.len();
                    return Err(Error::Capacity {
                        requested: count,
                        achieved,
                    });
                }
                pos -= 1;
                cur[pos] += 1;
                if cur[pos] < alphabet {
                    break;
                }
                cur[pos] = 0;
            }
        }
        let dist_min = if words.len() == 1 { length } else { dist_min };
        // Recompute: the greedy threshold is a lower bound, the kept set may
        // do better.
        let code = OuterCode::new(alphabet, length, words)?;
        debug_assert!(code.dist_min >= dist_min.min(length));
        Ok(code)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of words.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, i: usize) -> &[usize] {
        &self.words[i]
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn dist_min(&self) -> usize {
        self.dist_min
    }

    /// Actual relative distance `dist_min / length`.
    pub fn delta(&self) -> Ratio<u64> {
        Ratio::new(self.dist_min as u64, self.length as u64)
    }

    /// `(length - dist_min) / length`: the worst-case fraction of chunk
    /// agreements between two nodes.
    pub fn one_minus_delta(&self) -> Ratio<u64> {
        Ratio::new(
            (self.length - self.dist_min) as u64,
            self.length as u64,
        )
    }

    /// Repair-bandwidth excess `(1 - delta) * multiplier`, where the
    /// multiplier is the per-chunk cost ratio of an agreeing helper
    /// (`s - 1` for single repair, `d - k` for multi-failure repair).
    pub fn epsilon(&self, multiplier: u64) -> Ratio<u64> {
        self.one_minus_delta() * Ratio::from_integer(multiplier)
    }

    /// Agreements between the words of nodes `i` and `j`.
    pub fn collisions(&self, i: usize, j: usize) -> usize {
        self.length - hamming_distance(&self.words[i], &self.words[j])
    }
}
