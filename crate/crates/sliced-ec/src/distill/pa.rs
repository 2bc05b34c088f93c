//! Toeplitz hashing over GF(2).
//!
//! The hash family is the set of out x in binary Toeplitz matrices, defined
//! by in + out - 1 seeded diagonal bits; matrix-vector products over GF(2)
//! make it linear, and the family is universal. Rows are sliding windows of
//! the diagonal bit string, so the product is computed with word-wide AND
//! plus popcount parity.

use rand::RngCore;

use crate::rng;

/// Hashes `input` (one bit per byte) to `output_len` bits with the Toeplitz
/// matrix drawn from `seed`.
pub fn toeplitz_hash(input: &[u8], output_len: usize, seed: u64) -> Vec<u8> {
    if output_len == 0 {
        return Vec::new();
    }
    let in_len = input.len();
    let diag_len = in_len + output_len - 1;

    // Diagonal bits, packed LSB-first, reversed so that row i of the matrix
    // is the window starting at bit (output_len - 1 - i).
    let mut rng = rng::seeded(seed);
    let mut diag = vec![0u8; diag_len];
    let mut k = 0;
    while k < diag_len {
        let mut word = rng.next_u64();
        for _ in 0..64 {
            if k >= diag_len {
                break;
            }
            diag[k] = (word & 1) as u8;
            word >>= 1;
            k += 1;
        }
    }
    let mut reversed = pack_bits_reversed(&diag);
    reversed.push(0); // pad so window extraction may read one word past

    let key = pack_bits(input);
    let mut out = Vec::with_capacity(output_len);
    for i in 0..output_len {
        let offset = output_len - 1 - i;
        let mut acc = 0u64;
        for (w, &word) in key.iter().enumerate() {
            acc ^= word & window_word(&reversed, offset, w);
        }
        out.push((acc.count_ones() & 1) as u8);
    }
    out
}

fn pack_bits(bits: &[u8]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (k, &b) in bits.iter().enumerate() {
        words[k / 64] |= u64::from(b & 1) << (k % 64);
    }
    words
}

fn pack_bits_reversed(bits: &[u8]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (k, &b) in bits.iter().rev().enumerate() {
        words[k / 64] |= u64::from(b & 1) << (k % 64);
    }
    words
}

/// 64 bits of `packed` starting at bit `offset + 64 * word`.
fn window_word(packed: &[u64], offset: usize, word: usize) -> u64 {
    let idx = offset / 64 + word;
    let shift = offset % 64;
    if shift == 0 {
        packed[idx]
    } else {
        (packed[idx] >> shift) | (packed[idx + 1] << (64 - shift))
    }
}
