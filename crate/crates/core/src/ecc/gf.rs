//! GF(2^7) arithmetic over the primitive polynomial x^7 + x^3 + 1.

/// Multiplicative group order.
pub const ORDER: usize = 127;
const PRIMITIVE: u16 = 0x89;

/// Exp/log tables of GF(128).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf128 {
    exp: [u8; 2 * ORDER],
    log: [u8; ORDER + 1],
}

impl Default for Gf128 {
    fn default() -> Self {
        Self::new()
    }
}

impl Gf128 {
    pub fn new() -> Self {
        let mut exp = [0u8; 2 * ORDER];
        let mut log = [0u8; ORDER + 1];
        let mut x: u16 = 1;
        for (i, e) in exp.iter_mut().enumerate().take(ORDER) {
            *e = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x80 != 0 {
                x ^= PRIMITIVE;
            }
        }
        for i in ORDER..2 * ORDER {
            exp[i] = exp[i - ORDER];
        }
        Gf128 { exp, log }
    }

    /// `α^k` for any integer exponent.
    pub fn alpha_pow(&self, k: i64) -> u8 {
        self.exp[k.rem_euclid(ORDER as i64) as usize]
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    /// `a / b`; `b` must be nonzero.
    pub fn div(&self, a: u8, b: u8) -> u8 {
        assert!(b != 0, "division by zero in GF(128)");
        if a == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + ORDER - self.log[b as usize] as usize]
        }
    }

    pub fn log(&self, a: u8) -> Option<usize> {
        (a != 0).then(|| self.log[a as usize] as usize)
    }
}
