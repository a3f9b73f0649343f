//! Bitmask encoding of index sets `S ⊆ [2n]`: bit `mu - 1` is set iff
//! `mu ∈ S`. Masks double as indices into length-`4^n` arrays.

pub fn mask_from_support(support: &[usize]) -> u32 {
    support.iter().fold(0u32, |m, &mu| m | (1 << (mu - 1)))
}

pub fn support_from_mask(mask: u32) -> Vec<usize> {
    (0..32)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| b + 1)
        .collect()
}

pub fn weight(mask: u32) -> usize {
    mask.count_ones() as usize
}

/// Complement within `[1, 2n]`.
pub fn complement(mask: u32, two_n: usize) -> u32 {
    !mask & ((1u32 << two_n) - 1)
}
