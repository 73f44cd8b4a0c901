//! Fixed-length bitset used for occupancies and edge sets.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct Bitset {
    len: usize,
    words: Vec<u64>,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Bitset { len, words: vec![u64::MAX; len.div_ceil(64)] };
        b.clear_tail();
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn unset(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    pub fn assign(&mut self, i: usize, value: bool) {
        if value {
            self.set(i)
        } else {
            self.unset(i)
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    fn check_len(&self, other: &Bitset) -> Result<()> {
        if self.len != other.len {
            return Err(Error::WindowMismatch(format!("bitset lengths {} and {}", self.len, other.len)));
        }
        Ok(())
    }

    pub fn and(&self, other: &Bitset) -> Result<Bitset> {
        self.check_len(other)?;
        Ok(Bitset { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() })
    }

    pub fn or(&self, other: &Bitset) -> Result<Bitset> {
        self.check_len(other)?;
        Ok(Bitset { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect() })
    }

    pub fn or_assign(&mut self, other: &Bitset) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(())
    }

    pub fn not(&self) -> Bitset {
        let mut b = Bitset { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        b.clear_tail();
        b
    }

    pub fn is_subset_of(&self, other: &Bitset) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Packed little-endian bytes, bit `i` at byte `i / 8`, position `i % 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(nbytes);
        out
    }

    pub fn from_bytes(len: usize, bytes: &[u8]) -> Result<Bitset> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Format(format!(
                "bitset of {len} bits needs {} bytes, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut words = vec![0u64; len.div_ceil(64)];
        for (i, b) in bytes.iter().enumerate() {
            words[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        let mut b = Bitset { len, words };
        let before = b.count_ones();
        b.clear_tail();
        if b.count_ones() != before {
            return Err(Error::Format("bits set beyond bitset length".into()));
        }
        Ok(b)
    }
}
