//! Binary narrow-sense BCH codes of length 127.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::gf::{Gf128, ORDER};
use crate::{Bit, Error, Result};

/// Supported codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeId {
    #[serde(rename = "bch127-113")]
    Bch127_113,
    #[serde(rename = "bch127-92")]
    Bch127_92,
}

impl CodeId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CodeId::Bch127_113 => "bch127-113",
            CodeId::Bch127_92 => "bch127-92",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bch127-113" => Ok(CodeId::Bch127_113),
            "bch127-92" => Ok(CodeId::Bch127_92),
            _ => Err(Error::InvalidArgument("unknown code; expected bch127-113 or bch127-92")),
        }
    }

    fn t_corr(&self) -> usize {
        match self {
            CodeId::Bch127_113 => 2,
            CodeId::Bch127_92 => 5,
        }
    }
}

/// A `(127, k)` BCH code correcting `t` errors.
///
/// Codeword bit `i` is the coefficient of `x^i`; the message occupies bits
/// `n − k .. n` and the parity bits `0 .. n − k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BchCode {
    id: CodeId,
    k: usize,
    t: usize,
    generator: u128,
    field: Gf128,
}

impl BchCode {
    pub fn new(id: CodeId) -> Self {
        let field = Gf128::new();
        let t = id.t_corr();
        let generator = generator_poly(&field, t);
        let degree = 127 - generator.leading_zeros() as usize;
        BchCode { id, k: ORDER - degree, t, generator, field }
    }

    pub fn id(&self) -> CodeId {
        self.id
    }

    pub fn n(&self) -> usize {
        ORDER
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Generator polynomial, bit `i` = coefficient of `x^i`.
    pub fn generator(&self) -> u128 {
        self.generator
    }

    pub fn parity_len(&self) -> usize {
        ORDER - self.k
    }

    /// Remainder of a word polynomial modulo the generator.
    pub fn remainder(&self, word: u128) -> u128 {
        let deg = self.parity_len();
        let mut r = word;
        for i in (deg..ORDER).rev() {
            if r >> i & 1 == 1 {
                r ^= self.generator << (i - deg);
            }
        }
        r
    }
}

/// Product of the distinct minimal polynomials of `α, α^2, …, α^{2t}`.
fn generator_poly(field: &Gf128, t: usize) -> u128 {
    let mut covered = [false; ORDER];
    let mut g: u128 = 1;
    for i in 1..=2 * t {
        if covered[i] {
            continue;
        }
        // minimal polynomial over the cyclotomic coset of i
        let mut poly: Vec<u8> = vec![1];
        let mut c = i;
        loop {
            covered[c] = true;
            let root = field.alpha_pow(c as i64);
            let mut next = vec![0u8; poly.len() + 1];
            for (d, &p) in poly.iter().enumerate() {
                next[d + 1] ^= p;
                next[d] ^= field.mul(p, root);
            }
            poly = next;
            c = (2 * c) % ORDER;
            if c == i {
                break;
            }
        }
        let mut m: u128 = 0;
        for (d, &p) in poly.iter().enumerate() {
            debug_assert!(p <= 1);
            m |= u128::from(p) << d;
        }
        g = clmul(g, m);
    }
    g
}

fn clmul(a: u128, b: u128) -> u128 {
    let mut r = 0;
    for i in 0..128 - b.leading_zeros() as usize {
        if b >> i & 1 == 1 {
            r ^= a << i;
        }
    }
    r
}

fn pack(bits: &[Bit]) -> u128 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (u128::from(b & 1) << i))
}

fn unpack(word: u128, len: usize) -> Vec<Bit> {
    (0..len).map(|i| (word >> i & 1) as Bit).collect()
}

/// Systematic encoding of a `k`-bit message.
pub fn bch_encode(message: &[Bit], code: &BchCode) -> Result<Vec<Bit>> {
    if message.len() != code.k {
        return Err(Error::LengthMismatch { expected: code.k, actual: message.len() });
    }
    let shifted = pack(message) << code.parity_len();
    Ok(unpack(shifted | code.remainder(shifted), ORDER))
}

/// Result of bounded-distance decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HddOutcome {
    /// Decoded message; the uncorrected systematic bits on failure.
    pub message: Vec<Bit>,
    pub corrected: usize,
    /// More than `t` errors were detected.
    pub failure: bool,
}

/// Bounded-distance hard-decision decoding: syndromes, Berlekamp–Massey and
/// Chien search. Patterns of weight at most `t` are always corrected.
pub fn bch_decode_hdd(word: &[Bit], code: &BchCode) -> Result<HddOutcome> {
    if word.len() != ORDER {
        return Err(Error::LengthMismatch { expected: ORDER, actual: word.len() });
    }
    let f = &code.field;
    let mut received = pack(word);
    let message_of = |w: u128| unpack(w >> code.parity_len(), code.k);

    let syndromes: Vec<u8> = (1..=2 * code.t)
        .map(|j| (0..ORDER).filter(|&i| received >> i & 1 == 1).fold(0u8, |acc, i| acc ^ f.alpha_pow((i * j) as i64)))
        .collect();
    if syndromes.iter().all(|&s| s == 0) {
        return Ok(HddOutcome { message: message_of(received), corrected: 0, failure: false });
    }

    let locator = berlekamp_massey(f, &syndromes);
    let degree = locator.len() - 1;
    let failure = |w: u128| HddOutcome { message: message_of(w), corrected: 0, failure: true };
    if degree > code.t {
        return Ok(failure(received));
    }
    // Chien search: position i is in error when Λ(α^{-i}) = 0
    let mut positions = Vec::with_capacity(degree);
    for i in 0..ORDER {
        let value = locator.iter().enumerate().fold(0u8, |acc, (d, &c)| acc ^ f.mul(c, f.alpha_pow(-((i * d) as i64))));
        if value == 0 {
            positions.push(i);
        }
    }
    if positions.len() != degree {
        return Ok(failure(received));
    }
    for &i in &positions {
        received ^= 1u128 << i;
    }
    Ok(HddOutcome { message: message_of(received), corrected: positions.len(), failure: false })
}

/// Error-locator polynomial `Λ(x)` (lowest degree first, trailing zeros
/// trimmed).
fn berlekamp_massey(f: &Gf128, s: &[u8]) -> Vec<u8> {
    let mut c = vec![0u8; s.len() + 1];
    let mut b = vec![0u8; s.len() + 1];
    c[0] = 1;
    b[0] = 1;
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last = 1u8;
    for n in 0..s.len() {
        let mut d = s[n];
        for i in 1..=l {
            d ^= f.mul(c[i], s[n - i]);
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let scale = f.div(d, last);
        let prev = c.clone();
        for i in 0..c.len() - shift {
            c[i + shift] ^= f.mul(scale, b[i]);
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.truncate(l + 1);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits<R: Rng>(len: usize, rng: &mut R) -> Vec<Bit> {
        (0..len).map(|_| Bit::from(rng.random_bool(0.5))).collect()
    }

    #[test]
    fn code_dimensions() {
        let a = BchCode::new(CodeId::Bch127_113);
        assert_eq!((a.n(), a.k(), a.t(), a.parity_len()), (127, 113, 2, 14));
        let b = BchCode::new(CodeId::Bch127_92);
        assert_eq!((b.n(), b.k(), b.t(), b.parity_len()), (127, 92, 5, 35));
        // g(x) divides x^127 + 1
        for code in [a, b] {
            let mut r: u128 = (1u128 << 127) | 1;
            let deg = code.parity_len();
            for i in (deg..=127).rev() {
                if r >> i & 1 == 1 {
                    r ^= code.generator() << (i - deg);
                }
            }
            assert_eq!(r, 0);
        }
    }

    #[test]
    fn code_ids_round_trip() {
        for id in [CodeId::Bch127_113, CodeId::Bch127_92] {
            assert_eq!(CodeId::parse(id.as_str()).unwrap(), id);
        }
        assert!(CodeId::parse("polar128").is_err());
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let code = BchCode::new(CodeId::Bch127_92);
        assert!(bch_encode(&[0; 92], &code).unwrap().iter().all(|&b| b == 0));
        assert!(bch_encode(&[0; 91], &code).is_err());
        assert!(bch_decode_hdd(&[0; 126], &code).is_err());
    }

    #[test]
    fn codewords_are_systematic_and_divisible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for id in [CodeId::Bch127_113, CodeId::Bch127_92] {
            let code = BchCode::new(id);
            let m = random_bits(code.k(), &mut rng);
            let c = bch_encode(&m, &code).unwrap();
            assert_eq!(&c[code.parity_len()..], &m[..]);
            assert_eq!(code.remainder(pack(&c)), 0);
        }
    }

    #[test]
    fn round_trip_and_t_error_correction() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for id in [CodeId::Bch127_113, CodeId::Bch127_92] {
            let code = BchCode::new(id);
            for _ in 0..2000 {
                let m = random_bits(code.k(), &mut rng);
                let mut c = bch_encode(&m, &code).unwrap();
                let clean = bch_decode_hdd(&c, &code).unwrap();
                assert_eq!(clean.message, m);
                let weight = rng.random_range(1..=code.t());
                for i in sample(&mut rng, 127, weight) {
                    c[i] ^= 1;
                }
                let out = bch_decode_hdd(&c, &code).unwrap();
                assert!(!out.failure);
                assert_eq!(out.corrected, weight);
                assert_eq!(out.message, m);
            }
        }
    }

    #[test]
    fn beyond_t_errors_never_claim_exact_recovery_silently() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let code = BchCode::new(CodeId::Bch127_113);
        let mut failures = 0;
        for _ in 0..500 {
            let m = random_bits(code.k(), &mut rng);
            let mut c = bch_encode(&m, &code).unwrap();
            for i in sample(&mut rng, 127, 3) {
                c[i] ^= 1;
            }
            let out = bch_decode_hdd(&c, &code).unwrap();
            // a claimed success must land on a codeword other than the sent one
            if out.failure {
                failures += 1;
            } else {
                assert_ne!(out.message, m);
            }
        }
        assert!(failures > 0);
    }

    proptest! {
        #[test]
        fn sum_of_codewords_is_a_codeword(seed_a in any::<u64>(), seed_b in any::<u64>()) {
            let code = BchCode::new(CodeId::Bch127_92);
            let a = bch_encode(&random_bits(92, &mut ChaCha8Rng::seed_from_u64(seed_a)), &code).unwrap();
            let b = bch_encode(&random_bits(92, &mut ChaCha8Rng::seed_from_u64(seed_b)), &code).unwrap();
            let sum: Vec<Bit> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(code.remainder(pack(&sum)), 0);
            prop_assert_eq!(bch_encode(&sum[35..], &code).unwrap(), sum);
        }
    }
}
