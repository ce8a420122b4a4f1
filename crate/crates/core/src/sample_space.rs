//! Small `t`-wise independent sample spaces of ±1 vectors.
//!
//! The construction is the dual of a binary BCH code. Variable `i` gets the
//! column `(1, α_i, α_i³, …, α_i^{t−1})` over GF(2^d), `d = ⌈log₂(n+1)⌉`,
//! with `α_i` the field element whose bit pattern is `i`. A seed `y` of
//! `1 + d·t/2` bits yields the point `x_i = (−1)^{⟨y, column_i⟩}`. Any `t + 1`
//! columns are linearly independent, so every character of order at most `t`
//! sums to zero over all seeds.

/// Primitive polynomials over GF(2), indexed by degree, with the leading
/// term included.
const PRIMITIVE_POLYNOMIALS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B,
    0x4443, 0x8003, 0x1100B,
];

/// Largest supported independence order.
pub const MAX_INDEPENDENCE: usize = 16;
/// Largest supported coordinate count for the BCH construction.
pub const MAX_BCH_COORDINATES: usize = (1 << 16) - 1;

/// Arithmetic in GF(2^d) modulo a fixed primitive polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryField {
    degree: u32,
    modulus: u32,
}

impl BinaryField {
    pub fn new(degree: u32) -> Self {
        assert!((1..=16).contains(&degree), "field degree must be in 1..=16");
        BinaryField {
            degree,
            modulus: PRIMITIVE_POLYNOMIALS[degree as usize],
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u32 {
        1 << self.degree
    }

    /// Carry-less product reduced modulo the field polynomial.
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let mut acc: u64 = 0;
        for bit in 0..self.degree {
            if b >> bit & 1 == 1 {
                acc ^= (a as u64) << bit;
            }
        }
        for bit in (self.degree..2 * self.degree).rev() {
            if acc >> bit & 1 == 1 {
                acc ^= (self.modulus as u64) << (bit - self.degree);
            }
        }
        acc as u32
    }

    pub fn pow(&self, a: u32, mut e: u32) -> u32 {
        let (mut base, mut acc) = (a, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Construction {
    FullCube,
    Bch { columns: Vec<u128>, seed_bits: u32 },
}

/// A multiset of ±1 vectors of length `n` on which every product of at most
/// `independence` distinct coordinates averages to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSpace {
    n: usize,
    independence: usize,
    construction: Construction,
}

impl SampleSpace {
    /// All of `{−1, +1}^n`, which is `n`-wise independent.
    pub fn full_cube(n: usize) -> Self {
        assert!(n < 128, "full cube too large to index");
        SampleSpace {
            n,
            independence: n,
            construction: Construction::FullCube,
        }
    }

    /// The BCH-dual construction regardless of size.
    pub fn bch(n: usize, t: usize) -> Self {
        assert!((1..=MAX_BCH_COORDINATES).contains(&n), "n must be in 1..=65535");
        assert!(t >= 2 && t.is_multiple_of(2) && t <= MAX_INDEPENDENCE, "t must be even and at most 16");
        let degree = usize::BITS - n.leading_zeros();
        let field = BinaryField::new(degree);
        let half = t / 2;
        let columns = (1..=n as u32)
            .map(|alpha| {
                (0..half).fold(0u128, |col, j| {
                    let power = field.pow(alpha, 2 * j as u32 + 1) as u128;
                    col | power << (j as u32 * degree)
                })
            })
            .collect();
        SampleSpace {
            n,
            independence: t,
            construction: Construction::Bch {
                columns,
                seed_bits: degree * half as u32,
            },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Guaranteed independence order.
    pub fn independence(&self) -> usize {
        self.independence
    }

    pub fn is_full_cube(&self) -> bool {
        self.construction == Construction::FullCube
    }

    /// `log₂` of the number of points.
    pub fn log2_len(&self) -> u32 {
        match &self.construction {
            Construction::FullCube => self.n as u32,
            Construction::Bch { seed_bits, .. } => seed_bits + 1,
        }
    }

    /// Number of points, if it fits in `u128`.
    pub fn len(&self) -> Option<u128> {
        1u128.checked_shl(self.log2_len()).filter(|_| self.log2_len() < 128)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Point `index` as a bit mask (bit `i` set means coordinate `i` is `−1`).
    /// Requires `n ≤ 128`.
    pub fn point_mask(&self, index: u128) -> u128 {
        assert!(self.n <= 128);
        match &self.construction {
            Construction::FullCube => {
                // coordinate 0 is the most significant counter bit
                (0..self.n).fold(0u128, |m, i| m | (index >> (self.n - 1 - i) & 1) << i)
            }
            Construction::Bch { columns, .. } => {
                let (seed, flip) = (index >> 1, index & 1);
                columns.iter().enumerate().fold(0u128, |m, (i, col)| {
                    let bit = ((seed & col).count_ones() as u128 + flip) & 1;
                    m | bit << i
                })
            }
        }
    }

    /// Point `index` as ±1 values.
    pub fn point(&self, index: u128) -> Vec<i8> {
        match &self.construction {
            Construction::FullCube => (0..self.n)
                .map(|i| if index >> (self.n - 1 - i) & 1 == 1 { -1 } else { 1 })
                .collect(),
            Construction::Bch { columns, .. } => {
                let (seed, flip) = (index >> 1, (index & 1) as u32);
                columns
                    .iter()
                    .map(|col| if ((seed & col).count_ones() + flip) & 1 == 1 { -1 } else { 1 })
                    .collect()
            }
        }
    }

    /// Points in index order. Iterating a space with `2^128` or more points
    /// stops at `2^128 − 1`.
    pub fn points(&self) -> impl Iterator<Item = Vec<i8>> + '_ {
        let end = self.len().unwrap_or(u128::MAX);
        (0..end).map(move |i| self.point(i))
    }

    /// `Σ_points Π_{i∈S} x_i`, by enumeration. Requires `n ≤ 128` and a
    /// space small enough to walk.
    pub fn character_sum(&self, subset: &[usize]) -> i128 {
        let mask = subset.iter().fold(0u128, |m, &i| m | 1 << i);
        let len = self.len().expect("space too large to enumerate");
        (0..len)
            .map(|idx| if (self.point_mask(idx) & mask).count_ones().is_multiple_of(2) { 1 } else { -1 })
            .sum()
    }
}

/// A `t`-wise independent space on `n` coordinates: the full cube when it is
/// no larger than the BCH construction, the BCH construction otherwise.
pub fn kwise_sample_space(n: usize, t: usize) -> SampleSpace {
    assert!(n >= 1, "need at least one coordinate");
    assert!(t.is_multiple_of(2) && t <= MAX_INDEPENDENCE, "t must be even and at most 16");
    let degree = usize::BITS - n.leading_zeros();
    let bch_log2 = 1 + degree as usize * (t / 2);
    if n <= bch_log2 {
        SampleSpace::full_cube(n)
    } else {
        SampleSpace::bch(n, t)
    }
}
