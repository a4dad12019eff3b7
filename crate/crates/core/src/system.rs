//! Register description and base-d indexing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` qudits of `d` levels each. Basis states are ordered lexicographically
/// in their base-d digits with qudit 0 as the most significant digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuditSystem {
    d: usize,
    n: usize,
}

impl QuditSystem {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("qudit dimension d={d} must be >= 2")));
        }
        if n == 0 {
            return Err(Error::Domain("a register needs at least one qudit".into()));
        }
        if d.checked_pow(n as u32).is_none() {
            return Err(Error::Domain(format!("d^n overflows for d={d}, n={n}")));
        }
        Ok(Self { d, n })
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `N = d^n`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    /// Same `d` with `extra` more qudits appended at the least significant end.
    pub fn extended(&self, extra: usize) -> Result<Self> {
        Self::new(self.d, self.n + extra)
    }

    /// Digits `k_1 .. k_n` of `k`, most significant first.
    pub fn digits(&self, k: usize) -> Result<Vec<usize>> {
        if k >= self.dim() {
            return Err(Error::Domain(format!(
                "basis index {k} out of range for N={}",
                self.dim()
            )));
        }
        let mut digits = vec![0; self.n];
        let mut rest = k;
        for slot in digits.iter_mut().rev() {
            *slot = rest % self.d;
            rest /= self.d;
        }
        Ok(digits)
    }

    pub fn index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.n {
            return Err(Error::Domain(format!(
                "expected {} digits, got {}",
                self.n,
                digits.len()
            )));
        }
        digits.iter().try_fold(0usize, |acc, &x| {
            if x >= self.d {
                Err(Error::Domain(format!("digit {x} out of range for d={}", self.d)))
            } else {
                Ok(acc * self.d + x)
            }
        })
    }

    /// Stride of qudit `q` in the flat index.
    #[inline]
    pub fn stride(&self, q: usize) -> usize {
        self.d.pow((self.n - 1 - q) as u32)
    }

    /// Digit of qudit `q` in basis index `k` (no range check).
    #[inline]
    pub fn digit(&self, k: usize, q: usize) -> usize {
        (k / self.stride(q)) % self.d
    }
}

/// Free-function form of [`QuditSystem::digits`].
pub fn base_d_digits(k: usize, sys: &QuditSystem) -> Result<Vec<usize>> {
    sys.digits(k)
}

pub fn digits_to_index(digits: &[usize], sys: &QuditSystem) -> Result<usize> {
    sys.index(digits)
}
