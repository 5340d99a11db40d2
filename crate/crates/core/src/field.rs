//! Prime-field arithmetic and field selection.
//!
//! A [`PrimeField`] bundles a prime modulus `q` with a primitive element
//! `alpha`. Elements are plain `u64` values kept in `[0, q)`; every operation
//! reduces modulo `q` using double-width intermediates, so any `q < 2^31` is
//! safe. The code-construction layers above need two number-theoretic
//! services beyond plain arithmetic: picking the smallest usable prime for a
//! given code size ([`select_field`]) and checking that no ratio of
//! evaluation points is a root of unity of a given order
//! ([`PrimeField::verify_root_condition`]).

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A field element value. Kept in `[0, q)` by the owning [`PrimeField`].
pub type FieldElement = u64;

/// GF(q) for a prime `q`, together with a fixed primitive element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeField {
    q: u64,
    alpha: u64,
}

impl PrimeField {
    /// Builds a field, verifying that `q` is prime, `q < 2^31`, and `alpha`
    /// generates the multiplicative group.
    pub fn new(q: u64, alpha: u64) -> Result<Self> {
        if q < 2 || !is_prime(q) {
            return Err(Error::Parameter(format!("modulus {q} is not prime")));
        }
        if q >= 1 << 31 {
            return Err(Error::Parameter(format!("modulus {q} exceeds 2^31")));
        }
        if alpha == 0 || alpha >= q {
            return Err(Error::Parameter(format!(
                "alpha {alpha} out of range for GF({q})"
            )));
        }
        let field = PrimeField { q, alpha };
        if !field.is_primitive(alpha) {
            return Err(Error::Parameter(format!(
                "alpha {alpha} is not primitive in GF({q})"
            )));
        }
        Ok(field)
    }

    /// Builds a field without the primitivity check. Intended for tests that
    /// deliberately plant a low-order `alpha`.
    #[doc(hidden)]
    pub fn raw(q: u64, alpha: u64) -> Self {
        assert!(is_prime(q) && alpha > 0 && alpha < q);
        PrimeField { q, alpha }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> FieldElement {
        v % self.q
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    /// Exponentiation by squaring.
    pub fn pow(&self, mut base: FieldElement, mut exp: u64) -> FieldElement {
        base %= self.q;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a % self.q == 0 {
            return Err(Error::ZeroInverse { q: self.q });
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// `alpha^j`, the evaluation point of node `j` (0-based).
    #[inline]
    pub fn alpha_pow(&self, j: usize) -> FieldElement {
        self.pow(self.alpha, j as u64)
    }

    /// The `n` evaluation points `alpha^0, ..., alpha^(n-1)`.
    ///
    /// Errors if `n > q - 1`, since the points would repeat.
    pub fn evaluation_points(&self, n: usize) -> Result<Vec<FieldElement>> {
        if n as u64 > self.q - 1 {
            return Err(Error::Parameter(format!(
                "{n} evaluation points requested but GF({}) has only {} nonzero elements",
                self.q,
                self.q - 1
            )));
        }
        let mut pts = Vec::with_capacity(n);
        let mut cur = 1u64;
        for _ in 0..n {
            pts.push(cur);
            cur = self.mul(cur, self.alpha);
        }
        Ok(pts)
    }

    /// Checks that `(alpha_i / alpha_j)^s != 1` for all distinct `i, j` in
    /// `[0, n)`, i.e. that no ratio of evaluation points is an s-th root of
    /// unity. Repair systems stay invertible exactly when this holds.
    pub fn verify_root_condition(&self, n: usize, s: usize) -> Result<bool> {
        let pts = self.evaluation_points(n)?;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let ratio = self.mul(pts[i], self.inv(pts[j])?);
                if self.pow(ratio, s as u64) == 1 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn is_primitive(&self, a: u64) -> bool {
        if self.q == 2 {
            return a == 1;
        }
        for p in prime_factors(self.q - 1) {
            if self.pow(a, (self.q - 1) / p) == 1 {
                return false;
            }
        }
        true
    }
}

/// Deterministic primality test by trial division; ample for moduli < 2^31.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive element of GF(q), scanning upward from 2.
pub fn find_primitive_element(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::Parameter(format!("modulus {q} is not prime")));
    }
    if q == 2 {
        return Ok(1);
    }
    let factors = prime_factors(q - 1);
    for a in 2..q {
        let mut primitive = true;
        for &p in &factors {
            let f = PrimeField { q, alpha: a };
            if f.pow(a, (q - 1) / p) == 1 {
                primitive = false;
                break;
            }
        }
        if primitive {
            return Ok(a);
        }
    }
    Err(Error::Internal(format!("GF({q}) has no primitive element")))
}

/// Picks the smallest prime `q` with `q >= gcd(s, q-1) * n + 1`, paired with
/// its smallest primitive element.
///
/// The inequality forces `(q-1) / gcd(s, q-1) >= n`, which makes
/// [`PrimeField::verify_root_condition`] hold for the resulting points: a
/// ratio `alpha^(i-j)` is an s-th root of unity only when `(q-1)/gcd(s, q-1)`
/// divides `i - j`, impossible for `0 < |i - j| < n`.
pub fn select_field(n: usize, s: usize) -> Result<PrimeField> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 nodes, got {n}")));
    }
    if s < 1 {
        return Err(Error::Parameter("repair order s must be positive".into()));
    }
    let mut q = 2u64;
    loop {
        if is_prime(q) {
            let g = (s as u64).gcd(&(q - 1));
            if q >= g * n as u64 + 1 {
                let alpha = find_primitive_element(q)?;
                return PrimeField::new(q, alpha);
            }
        }
        q += 1;
        if q >= 1 << 31 {
            return Err(Error::Parameter(format!(
                "no prime below 2^31 fits n = {n}, s = {s}"
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn arithmetic_basics() {
        let f = PrimeField::new(13, 2).unwrap();
        assert_eq!(f.mul(7, 2), 1);
        assert_eq!(f.add(12, 1), 0);
        assert_eq!(f.sub(0, 1), 12);
        assert_eq!(f.inv(7).unwrap(), 2);
        assert_eq!(f.mul(0, 5), 0);
        assert!(f.inv(0).is_err());
        assert!(f.inv(13).is_err());
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let f = PrimeField::new(11, 2).unwrap();
        assert_eq!(f.pow(3, 5), 1); // 243 = 22 * 11 + 1
        assert_eq!(f.pow(3, 0), 1);
        let mut acc = 1;
        for e in 0..20 {
            assert_eq!(f.pow(7, e), acc);
            acc = f.mul(acc, 7);
        }
    }

    #[test]
    fn field_laws_random() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for &q in &[5u64, 13, 101, 65537] {
            let alpha = find_primitive_element(q).unwrap();
            let f = PrimeField::new(q, alpha).unwrap();
            for _ in 0..200 {
                let a = rng.gen_range(0..q);
                let b = rng.gen_range(0..q);
                let c = rng.gen_range(0..q);
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.sub(f.add(a, b), b), a);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
            }
        }
    }

    #[test]
    fn primality_and_factors() {
        assert!(is_prime(2));
        assert!(is_prime(13));
        assert!(!is_prime(1));
        assert!(!is_prime(91)); // 7 * 13
        assert_eq!(prime_factors(12), vec![2, 3]);
        assert_eq!(prime_factors(13), vec![13]);
        assert_eq!(prime_factors(1), Vec::<u64>::new());
    }

    #[test]
    fn primitive_elements() {
        assert_eq!(find_primitive_element(3).unwrap(), 2);
        assert_eq!(find_primitive_element(5).unwrap(), 2);
        assert_eq!(find_primitive_element(13).unwrap(), 2);
        // 2 generates only the squares mod 7; the smallest generator is 3.
        assert_eq!(find_primitive_element(7).unwrap(), 3);
        assert!(PrimeField::new(13, 3).is_err()); // 3 has order 3 mod 13
    }

    #[test]
    fn select_field_smallest_examples() {
        let f = select_field(6, 2).unwrap();
        assert_eq!((f.q(), f.alpha()), (13, 2));
        // 3, 5, 7 all have gcd(2, q-1) = 2 and would need q >= 9; q = 9 is not
        // prime, so the scan lands on 11.
        let f = select_field(4, 2).unwrap();
        assert_eq!((f.q(), f.alpha()), (11, 2));
        let f = select_field(2, 2).unwrap();
        assert_eq!((f.q(), f.alpha()), (5, 2));
    }

    #[test]
    fn evaluation_points_powers_of_alpha() {
        let f = PrimeField::new(5, 2).unwrap();
        assert_eq!(f.evaluation_points(4).unwrap(), vec![1, 2, 4, 3]);
        assert!(f.evaluation_points(5).is_err());
        let f = PrimeField::new(13, 2).unwrap();
        let pts = f.evaluation_points(12).unwrap();
        let mut sorted = pts.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 12, "points must be distinct");
        assert!(pts.iter().all(|&p| p != 0));
    }

    #[test]
    fn root_condition_examples() {
        let f = select_field(6, 2).unwrap();
        assert!(f.verify_root_condition(6, 2).unwrap());
        // In GF(5) with alpha = 2 the ratio of points 1 and 4^(-1) is 4, and
        // 4^2 = 16 = 1, so the condition fails.
        let f = PrimeField::new(5, 2).unwrap();
        assert!(!f.verify_root_condition(4, 2).unwrap());
        assert!(f.verify_root_condition(1, 2).unwrap());
    }

    #[test]
    fn selected_fields_always_pass_root_condition() {
        for n in 2..=12 {
            for s in 1..=6 {
                let f = select_field(n, s).unwrap();
                assert!(
                    f.verify_root_condition(n, s).unwrap(),
                    "selected GF({}) fails for n = {n}, s = {s}",
                    f.q()
                );
            }
        }
    }
}
