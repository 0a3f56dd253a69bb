//! Multi-indices over at most two spatial variables.
//!
//! The engine is limited to n ∈ {1, 2}, so a multi-index is a fixed pair of
//! exponents; for n = 1 the second entry is always zero.

pub const MAX_VARS: usize = 2;

/// Exponent multi-index α = (α₁, α₂).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub [u32; MAX_VARS]);

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex([0, 0])
    }

    pub fn unit(j: usize) -> Self {
        let mut e = [0, 0];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn from_slice(s: &[u32]) -> Self {
        let mut e = [0, 0];
        for (dst, src) in e.iter_mut().zip(s) {
            *dst = *src;
        }
        MultiIndex(e)
    }

    /// Total order |α|.
    pub fn order(&self) -> u32 {
        self.0[0] + self.0[1]
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex([self.0[0] + other.0[0], self.0[1] + other.0[1]])
    }

    pub fn add_unit(&self, j: usize) -> MultiIndex {
        let mut e = self.0;
        e[j] += 1;
        MultiIndex(e)
    }

    /// Component-wise subtraction; `None` when any component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let a = self.0[0].checked_sub(other.0[0])?;
        let b = self.0[1].checked_sub(other.0[1])?;
        Some(MultiIndex([a, b]))
    }

    /// True when η ≤ α component-wise.
    pub fn contains(&self, eta: &MultiIndex) -> bool {
        eta.0[0] <= self.0[0] && eta.0[1] <= self.0[1]
    }

    /// α! = α₁!·α₂!
    pub fn factorial(&self) -> u64 {
        factorial(self.0[0]) * factorial(self.0[1])
    }

    /// Binomial C(α, η) = Π C(αᵢ, ηᵢ); zero if η ⪇ α fails.
    pub fn binomial(&self, eta: &MultiIndex) -> u64 {
        if !self.contains(eta) {
            return 0;
        }
        binomial(self.0[0], eta.0[0]) * binomial(self.0[1], eta.0[1])
    }

    /// All multi-indices of exact order `r` in `n` variables, in a fixed
    /// deterministic order (first exponent descending).
    pub fn of_order(n: usize, r: u32) -> Vec<MultiIndex> {
        assert!(n >= 1 && n <= MAX_VARS);
        if n == 1 {
            vec![MultiIndex([r, 0])]
        } else {
            (0..=r).rev().map(|a| MultiIndex([a, r - a])).collect()
        }
    }

    /// Rank of `self` within `of_order(n, |self|)`.
    pub fn rank(&self, n: usize) -> usize {
        if n == 1 {
            0
        } else {
            (self.order() - self.0[0]) as usize
        }
    }

    /// All η with 0 ≤ η ≤ α component-wise, deterministic order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for a in 0..=self.0[0] {
            for b in 0..=self.0[1] {
                out.push(MultiIndex([a, b]));
            }
        }
        out
    }
}

pub fn factorial(k: u32) -> u64 {
    (1..=k as u64).product()
}

pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k as u64 {
        num *= n as u64 - i;
        den *= i + 1;
    }
    num / den
}
