use std::fmt;

use serde::{Deserialize, Serialize};

/// A word `w = w_1 ⋯ w_n` over `{0, …, b-1}`, naming the b-adic interval
/// `I_w = [t_w, t_w + b^{-n})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeAddress {
    base: usize,
    digits: Vec<u32>,
}

impl NodeAddress {
    pub fn root(base: usize) -> Self {
        Self { base, digits: Vec::new() }
    }

    pub fn new(base: usize, digits: Vec<u32>) -> Option<Self> {
        if base < 2 || digits.iter().any(|&d| d as usize >= base) {
            return None;
        }
        Some(Self { base, digits })
    }

    /// Parse a digit string such as `"0121"`.
    pub fn parse(base: usize, s: &str) -> Option<Self> {
        let digits = s.chars().map(|c| c.to_digit(36)).collect::<Option<Vec<u32>>>()?;
        Self::new(base, digits)
    }

    /// Address of the `index`-th word (lexicographic order) of length `level`.
    pub fn from_index(base: usize, level: usize, mut index: u64) -> Self {
        let mut digits = vec![0u32; level];
        for slot in digits.iter_mut().rev() {
            *slot = (index % base as u64) as u32;
            index /= base as u64;
        }
        Self { base, digits }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Lexicographic rank among words of the same length.
    pub fn index(&self) -> u64 {
        self.digits.iter().fold(0u64, |acc, &d| acc * self.base as u64 + d as u64)
    }

    /// Left endpoint `t_w = Σ w_k b^{-k}`.
    pub fn t(&self) -> f64 {
        self.index() as f64 / (self.base as f64).powi(self.level() as i32)
    }

    pub fn child(&self, digit: u32) -> Self {
        let mut digits = self.digits.clone();
        digits.push(digit);
        Self { base: self.base, digits }
    }

    pub fn prefix(&self, k: usize) -> Self {
        Self { base: self.base, digits: self.digits[..k].to_vec() }
    }

    /// Neighbor `w^{-1}`, `w^0 = w` or `w^{+1}` at the same length; `None`
    /// past either end of `[0, 1)`.
    pub fn neighbor(&self, direction: i8) -> Option<Self> {
        let mut digits = self.digits.clone();
        let top = self.base as u32 - 1;
        match direction {
            0 => Some(self.clone()),
            1 => {
                for d in digits.iter_mut().rev() {
                    if *d < top {
                        *d += 1;
                        return Some(Self { base: self.base, digits });
                    }
                    *d = 0;
                }
                None
            }
            -1 => {
                for d in digits.iter_mut().rev() {
                    if *d > 0 {
                        *d -= 1;
                        return Some(Self { base: self.base, digits });
                    }
                    *d = top;
                }
                None
            }
            _ => None,
        }
    }
}

impl fmt::Display for NodeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.digits {
            write!(f, "{}", std::char::from_digit(*d, 36).unwrap_or('?'))?;
        }
        Ok(())
    }
}
