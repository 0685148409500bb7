//! Arithmetic over GF(2^8), the finite field with 256 elements.
//!
//! The field is constructed modulo the primitive polynomial
//! `x^8 + x^4 + x^3 + x^2 + 1` (0x11D). Addition is XOR; multiplication is
//! carried out through exponent/logarithm tables built at compile time from
//! powers of the generator `x` (0x02), plus a full 256x256 product table so
//! that bulk slice operations cost one lookup per byte.
//!
//! All tables are `const`-evaluated and therefore immutable and safe to read
//! from any number of threads.

/// Reduction polynomial, including the leading x^8 term.
pub const REDUCTION_POLY: u16 = 0x11D;

/// Number of field elements.
pub const FIELD_SIZE: usize = 256;

/// An element of GF(2^8).
///
/// The wrapper is `repr(transparent)`, so slices of raw bytes can be
/// reinterpreted as field elements without cost where needed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(transparent)]
pub struct Gf(pub u8);

/// Exponent table: `EXP[i] = x^i` for `i` in `0..255`, duplicated once so
/// that `EXP[log(a) + log(b)]` never needs an explicit `% 255`.
const EXP: [u8; 510] = build_tables().0;

/// Logarithm table: `LOG[a]` is the discrete log of `a` base `x`.
/// `LOG[0]` is unused (zero has no logarithm) and holds 0.
const LOG: [u8; 256] = build_tables().1;

/// Full product table: `MUL[a][b] = a * b` in the field. 64 KiB, read-only.
static MUL: [[u8; 256]; 256] = build_mul_table();

/// Multiplicative inverses: `INV[a] = a^-1`; `INV[0]` is unused and holds 0.
const INV: [u8; 256] = build_inv_table();

const fn build_tables() -> ([u8; 510], [u8; 256]) {
    let mut exp = [0u8; 510];
    let mut log = [0u8; 256];
    let mut value: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = value as u8;
        exp[i + 255] = value as u8;
        log[value as usize] = i as u8;
        // Multiply by the generator x and reduce.
        value <<= 1;
        if value & 0x100 != 0 {
            value ^= REDUCTION_POLY;
        }
        i += 1;
    }
    (exp, log)
}

const fn build_mul_table() -> [[u8; 256]; 256] {
    let mut table = [[0u8; 256]; 256];
    let mut a = 1;
    while a < 256 {
        let mut b = 1;
        while b < 256 {
            let idx = LOG[a] as usize + LOG[b] as usize;
            table[a][b] = EXP[idx];
            b += 1;
        }
        a += 1;
    }
    table
}

const fn build_inv_table() -> [u8; 256] {
    let mut table = [0u8; 256];
    let mut a = 1;
    while a < 256 {
        table[a] = EXP[255 - LOG[a] as usize];
        a += 1;
    }
    table
}

impl Gf {
    /// Additive identity.
    pub const ZERO: Gf = Gf(0);
    /// Multiplicative identity.
    pub const ONE: Gf = Gf(1);

    /// Field addition (XOR). Identical to subtraction in characteristic 2.
    #[inline]
    pub const fn add(self, rhs: Gf) -> Gf {
        Gf(self.0 ^ rhs.0)
    }

    /// Field multiplication via the product table.
    #[inline]
    pub fn mul(self, rhs: Gf) -> Gf {
        Gf(MUL[self.0 as usize][rhs.0 as usize])
    }

    /// Multiplicative inverse, or `None` for zero.
    #[inline]
    pub fn inv(self) -> Option<Gf> {
        if self.0 == 0 {
            None
        } else {
            Some(Gf(INV[self.0 as usize]))
        }
    }

    /// Checked division: `None` when the divisor is zero.
    #[inline]
    pub fn checked_div(self, rhs: Gf) -> Option<Gf> {
        rhs.inv().map(|r| self.mul(r))
    }
}

impl core::ops::Add for Gf {
    type Output = Gf;
    #[inline]
    fn add(self, rhs: Gf) -> Gf {
        Gf::add(self, rhs)
    }
}

impl core::ops::Sub for Gf {
    type Output = Gf;
    #[inline]
    fn sub(self, rhs: Gf) -> Gf {
        Gf::add(self, rhs)
    }
}

impl core::ops::Mul for Gf {
    type Output = Gf;
    #[inline]
    fn mul(self, rhs: Gf) -> Gf {
        Gf::mul(self, rhs)
    }
}

impl core::ops::Div for Gf {
    type Output = Gf;
    /// Panics on division by zero, mirroring integer division.
    #[inline]
    fn div(self, rhs: Gf) -> Gf {
        self.checked_div(rhs).expect("division by zero in GF(2^8)")
    }
}

impl core::fmt::Debug for Gf {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Gf(0x{:02X})", self.0)
    }
}

/// `dst[i] ^= c * src[i]` for every byte. The workhorse of encode and decode.
///
/// # Panics
///
/// Panics if the slices differ in length.
pub fn mul_slice_xor(dst: &mut [u8], src: &[u8], c: Gf) {
    assert_eq!(dst.len(), src.len(), "slice length mismatch");
    match c {
        Gf::ZERO => {}
        Gf::ONE => {
            for (d, s) in dst.iter_mut().zip(src) {
                *d ^= s;
            }
        }
        _ => {
            let row = &MUL[c.0 as usize];
            for (d, s) in dst.iter_mut().zip(src) {
                *d ^= row[*s as usize];
            }
        }
    }
}

/// `dst[i] = c * dst[i]` for every byte.
pub fn mul_slice_in_place(dst: &mut [u8], c: Gf) {
    match c {
        Gf::ZERO => dst.fill(0),
        Gf::ONE => {}
        _ => {
            let row = &MUL[c.0 as usize];
            for d in dst.iter_mut() {
                *d = row[*d as usize];
            }
        }
    }
}
