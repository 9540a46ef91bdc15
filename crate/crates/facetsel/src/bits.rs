//! Small fixed-capacity bitmask used for closure and coverage sets.

/// Bitmask over `len` positions, stored as u64 blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Mask {
    blocks: Vec<u64>,
    len: usize,
}

impl Mask {
    pub fn new(len: usize) -> Self {
        Mask {
            blocks: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.blocks[i / 64] |= 1 << (i % 64);
    }

    #[cfg(test)]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.blocks[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn union_with(&mut self, other: &Mask) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            let mut b = block;
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let tz = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(bi * 64 + tz)
                }
            })
        })
    }

    /// Sum of `weights[i]` over set bits.
    pub fn weight_sum(&self, weights: &[f64]) -> f64 {
        let mut total = 0.0;
        for (bi, &block) in self.blocks.iter().enumerate() {
            let mut b = block;
            while b != 0 {
                let tz = b.trailing_zeros() as usize;
                b &= b - 1;
                total += weights[bi * 64 + tz];
            }
        }
        total
    }

    /// Sum of `weights[i]` over bits set in `self` but not in `exclude`.
    pub fn weight_sum_minus(&self, exclude: &Mask, weights: &[f64]) -> f64 {
        debug_assert_eq!(self.len, exclude.len);
        let mut total = 0.0;
        for (bi, (&a, &e)) in self.blocks.iter().zip(&exclude.blocks).enumerate() {
            let mut b = a & !e;
            while b != 0 {
                let tz = b.trailing_zeros() as usize;
                b &= b - 1;
                total += weights[bi * 64 + tz];
            }
        }
        total
    }
}
