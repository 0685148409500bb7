//! Systematic maximum-distance-separable erasure coding over GF(2^8).
//!
//! A block of `k` equal-length data symbols is expanded to `n = k + m`
//! symbols: the first `k` are the data unchanged, the remaining `m` are
//! parity rows of a Cauchy matrix applied to the data. Any `k` distinct
//! symbols of the `n` recover the block exactly, which is the defining MDS
//! property and holds because every square submatrix of a Cauchy matrix is
//! invertible.
//!
//! The matrix uses evaluation points `x_i = k + i` for parity rows and
//! `y_j = j` for data columns, giving `entry[i][j] = (x_i + y_j)^-1` with all
//! points distinct whenever `n <= 255`.

use alloc::vec::Vec;

use crate::gf256::{mul_slice_in_place, mul_slice_xor, Gf};

/// Largest supported total symbol count; evaluation points live in GF(2^8).
pub const MAX_TOTAL_SYMBOLS: usize = 255;

/// Geometry of one erasure-coded block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeParams {
    k: usize,
    m: usize,
    symbol_len: usize,
}

impl CodeParams {
    /// Validates and builds a code geometry.
    ///
    /// Requires `k >= 1`, `symbol_len >= 1`, and `k + m <= 255`. `m = 0` is
    /// the degenerate uncoded case and is allowed.
    pub fn new(k: usize, m: usize, symbol_len: usize) -> Result<Self, CodeError> {
        if k == 0 || symbol_len == 0 || k + m > MAX_TOTAL_SYMBOLS {
            return Err(CodeError::InvalidParams { k, m, symbol_len });
        }
        Ok(CodeParams { k, m, symbol_len })
    }

    /// Number of data symbols per block.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of parity symbols per block.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total symbols per block, `k + m`.
    pub fn n(&self) -> usize {
        self.k + self.m
    }

    /// Bytes per symbol.
    pub fn symbol_len(&self) -> usize {
        self.symbol_len
    }

    /// Code rate `k / n`.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }
}

/// One symbol of an encoded block: its position in `[0, n)` plus payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSymbol {
    pub index: u16,
    pub payload: Vec<u8>,
}

/// Errors reported by the coding routines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeError {
    /// Geometry violates `k >= 1`, `symbol_len >= 1`, or `k + m <= 255`.
    InvalidParams { k: usize, m: usize, symbol_len: usize },
    /// `encode` was given a number of symbols different from `k`.
    WrongSymbolCount { expected: usize, got: usize },
    /// A payload length disagrees with `symbol_len`.
    SymbolLength { expected: usize, got: usize },
    /// A symbol index is outside `[0, n)`.
    IndexOutOfRange { index: u16, n: usize },
    /// Fewer than `k` distinct symbols were supplied to `decode`.
    NotEnoughSymbols { have: usize, need: usize },
    /// Defensive guard; unreachable for a well-formed Cauchy system.
    SingularSystem,
}

impl core::fmt::Display for CodeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CodeError::InvalidParams { k, m, symbol_len } => write!(
                f,
                "invalid code parameters k={k} m={m} symbol_len={symbol_len} \
                 (need k >= 1, symbol_len >= 1, k + m <= {MAX_TOTAL_SYMBOLS})"
            ),
            CodeError::WrongSymbolCount { expected, got } => {
                write!(f, "expected {expected} data symbols, got {got}")
            }
            CodeError::SymbolLength { expected, got } => {
                write!(f, "symbol length {got} does not match configured {expected}")
            }
            CodeError::IndexOutOfRange { index, n } => {
                write!(f, "symbol index {index} outside block of {n} symbols")
            }
            CodeError::NotEnoughSymbols { have, need } => {
                write!(f, "cannot decode: {have} distinct symbols present, {need} required")
            }
            CodeError::SingularSystem => write!(f, "recovery system is singular"),
        }
    }
}

impl core::error::Error for CodeError {}

/// The `m x k` Cauchy parity matrix for a given geometry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CauchyMatrix {
    k: usize,
    m: usize,
    entries: Vec<Gf>,
}

impl CauchyMatrix {
    /// Builds the parity matrix with `entry[i][j] = ((k + i) ^ j)^-1`.
    pub fn new(k: usize, m: usize) -> Result<Self, CodeError> {
        if k == 0 || k + m > MAX_TOTAL_SYMBOLS {
            return Err(CodeError::InvalidParams { k, m, symbol_len: 1 });
        }
        let mut entries = Vec::with_capacity(m * k);
        for i in 0..m {
            for j in 0..k {
                entries.push(cauchy_entry(k, i, j));
            }
        }
        Ok(CauchyMatrix { k, m, entries })
    }

    /// Entry at parity row `i`, data column `j`.
    pub fn entry(&self, i: usize, j: usize) -> Gf {
        self.entries[i * self.k + j]
    }

    /// Parity row `i` as a slice of `k` coefficients.
    pub fn row(&self, i: usize) -> &[Gf] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }
}

/// Single Cauchy coefficient for parity row `i`, data column `j`.
///
/// The points `k + i` and `j` are distinct integers below 256, so their XOR
/// is never zero and the inverse always exists.
#[inline]
fn cauchy_entry(k: usize, i: usize, j: usize) -> Gf {
    Gf(((k + i) as u8) ^ (j as u8))
        .inv()
        .expect("evaluation points are disjoint")
}

/// Encodes `k` data symbols into `n = k + m` symbols, data first.
pub fn encode<S: AsRef<[u8]>>(
    params: &CodeParams,
    data: &[S],
) -> Result<Vec<EncodedSymbol>, CodeError> {
    if data.len() != params.k {
        return Err(CodeError::WrongSymbolCount {
            expected: params.k,
            got: data.len(),
        });
    }
    for symbol in data {
        if symbol.as_ref().len() != params.symbol_len {
            return Err(CodeError::SymbolLength {
                expected: params.symbol_len,
                got: symbol.as_ref().len(),
            });
        }
    }

    let mut out = Vec::with_capacity(params.n());
    for (j, symbol) in data.iter().enumerate() {
        out.push(EncodedSymbol {
            index: j as u16,
            payload: symbol.as_ref().to_vec(),
        });
    }
    for i in 0..params.m {
        let mut payload = alloc::vec![0u8; params.symbol_len];
        for (j, symbol) in data.iter().enumerate() {
            mul_slice_xor(&mut payload, symbol.as_ref(), cauchy_entry(params.k, i, j));
        }
        out.push(EncodedSymbol {
            index: (params.k + i) as u16,
            payload,
        });
    }
    Ok(out)
}

/// Recovers the original `k` data symbols from any `k` distinct received
/// symbols. Duplicate indices are tolerated; the first instance wins.
pub fn decode(
    params: &CodeParams,
    received: &[EncodedSymbol],
) -> Result<Vec<Vec<u8>>, CodeError> {
    let views: Vec<(u16, &[u8])> = received
        .iter()
        .map(|s| (s.index, s.payload.as_slice()))
        .collect();
    let mut out = Vec::new();
    decode_into(params, &views, &mut out)?;
    Ok(out)
}

/// Like [`decode`], but writes into `out`, reusing its buffers across calls.
///
/// This is the path for receivers decoding a continuous block stream: in
/// steady state it performs no payload allocations.
pub fn decode_into(
    params: &CodeParams,
    received: &[(u16, &[u8])],
    out: &mut Vec<Vec<u8>>,
) -> Result<(), CodeError> {
    let k = params.k;
    let n = params.n();
    let len = params.symbol_len;

    // Shape the output: k rows of symbol_len bytes, reusing capacity.
    out.truncate(k);
    while out.len() < k {
        out.push(Vec::new());
    }
    for row in out.iter_mut() {
        row.resize(len, 0);
    }

    // Classify received symbols; first instance of an index wins.
    let mut seen = [0u64; 4];
    let mut systematic: Vec<(usize, &[u8])> = Vec::new();
    let mut parities: Vec<(usize, &[u8])> = Vec::new();
    for &(index, payload) in received {
        let i = index as usize;
        if i >= n {
            return Err(CodeError::IndexOutOfRange { index, n });
        }
        if payload.len() != len {
            return Err(CodeError::SymbolLength {
                expected: len,
                got: payload.len(),
            });
        }
        if seen[i / 64] & (1 << (i % 64)) != 0 {
            continue;
        }
        seen[i / 64] |= 1 << (i % 64);
        if i < k {
            systematic.push((i, payload));
        } else {
            parities.push((i - k, payload));
        }
    }

    let erased = k - systematic.len();
    if parities.len() < erased {
        return Err(CodeError::NotEnoughSymbols {
            have: systematic.len() + parities.len(),
            need: k,
        });
    }

    for &(j, payload) in &systematic {
        out[j].copy_from_slice(payload);
    }
    if erased == 0 {
        return Ok(());
    }
    // Use the earliest-received parities beyond the required count.
    parities.truncate(erased);

    // Missing data indices, ascending. Solve the reduced system
    //   A x = b,  A[r][c] = cauchy(p_r, missing[c]),
    //   b[r] = parity_r - sum over present data of cauchy(p_r, j) * data[j],
    // storing b[r] directly in the output slot of missing[r] so the
    // elimination leaves each recovered symbol in place.
    let missing: Vec<usize> = (0..k)
        .filter(|j| seen[j / 64] & (1 << (j % 64)) == 0)
        .collect();

    let e = erased;
    let mut a: Vec<Gf> = Vec::with_capacity(e * e);
    for r in 0..e {
        let (pi, payload) = parities[r];
        for &col in &missing {
            a.push(cauchy_entry(k, pi, col));
        }
        let rhs = &mut out[missing[r]];
        rhs.copy_from_slice(payload);
        for &(j, src) in &systematic {
            mul_slice_xor(rhs, src, cauchy_entry(k, pi, j));
        }
    }

    // Gauss-Jordan elimination over GF(2^8), mirroring every row operation
    // onto the payload buffers.
    let mut pivot_row = [Gf::ZERO; MAX_TOTAL_SYMBOLS];
    for col in 0..e {
        let pivot = (col..e)
            .find(|&r| a[r * e + col] != Gf::ZERO)
            .ok_or(CodeError::SingularSystem)?;
        if pivot != col {
            for c2 in 0..e {
                a.swap(pivot * e + c2, col * e + c2);
            }
            out.swap(missing[pivot], missing[col]);
        }

        let inv = a[col * e + col].inv().ok_or(CodeError::SingularSystem)?;
        if inv != Gf::ONE {
            for c2 in col..e {
                a[col * e + c2] = a[col * e + c2] * inv;
            }
            mul_slice_in_place(&mut out[missing[col]], inv);
        }
        pivot_row[..e].copy_from_slice(&a[col * e..col * e + e]);

        for r in 0..e {
            if r == col {
                continue;
            }
            let factor = a[r * e + col];
            if factor == Gf::ZERO {
                continue;
            }
            for c2 in col..e {
                a[r * e + c2] = a[r * e + c2] + factor * pivot_row[c2];
            }
            let (dst, src) = two_rows(out, missing[r], missing[col]);
            mul_slice_xor(dst, src, factor);
        }
    }
    Ok(())
}

/// Disjoint mutable/shared borrows of two distinct rows.
fn two_rows(rows: &mut [Vec<u8>], dst: usize, src: usize) -> (&mut [u8], &[u8]) {
    debug_assert_ne!(dst, src);
    if dst < src {
        let (lo, hi) = rows.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = rows.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    }
}
