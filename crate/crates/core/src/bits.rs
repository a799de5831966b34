//! Fixed-length bit strings used for simulated quantum keys, messages and
//! public announcements.

use std::fmt;
use std::ops::BitXor;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitsError {
    #[error("bit length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid hex string {0:?}")]
    InvalidHex(String),
    #[error("hex string {hex:?} holds fewer than {len} bits")]
    TooShort { hex: String, len: usize },
    #[error("segment {start}..{end} out of range for {len} bits")]
    OutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },
}

/// A string of `len` bits, stored MSB-first in bytes. Padding bits in the
/// final byte are always zero so derived equality is bitwise equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    bytes: Vec<u8>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            bytes: vec![0; len.div_ceil(8)],
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill(bytes.as_mut_slice());
        let mut s = BitString { len, bytes };
        s.clear_padding();
        s
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = BitString::zeros(0);
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Parses `hex` and keeps its leading `len` bits. Trailing bits beyond
    /// `len` must be zero.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self, BitsError> {
        let hex = hex.trim();
        if !hex.len().is_multiple_of(2) || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(BitsError::InvalidHex(hex.to_string()));
        }
        let mut bytes: Vec<u8> = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&hex[i..i + 2], 16))
            .collect::<Result<_, _>>()
            .map_err(|_| BitsError::InvalidHex(hex.to_string()))?;
        if bytes.len() * 8 < len {
            return Err(BitsError::TooShort {
                hex: hex.to_string(),
                len,
            });
        }
        let full = BitString {
            len: bytes.len() * 8,
            bytes: bytes.clone(),
        };
        if (len..full.len).any(|i| full.get(i)) {
            return Err(BitsError::InvalidHex(hex.to_string()));
        }
        bytes.truncate(len.div_ceil(8));
        Ok(BitString { len, bytes })
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for {} bits",
            self.len
        );
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for {} bits",
            self.len
        );
        let mask = 1u8 << (7 - i % 8);
        if value {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn is_zero(&self) -> bool {
        self.bytes.iter().all(|&b| b == 0)
    }

    /// Bits `start..start + n`.
    pub fn segment(&self, start: usize, n: usize) -> Result<BitString, BitsError> {
        if start + n > self.len {
            return Err(BitsError::OutOfRange {
                start,
                end: start + n,
                len: self.len,
            });
        }
        Ok(BitString::from_bits(
            (start..start + n).map(|i| self.get(i)),
        ))
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        if self.len != other.len {
            return Err(BitsError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(BitString {
            len: self.len,
            bytes: self
                .bytes
                .iter()
                .zip(&other.bytes)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn xor_assign(&mut self, other: &BitString) -> Result<(), BitsError> {
        if self.len != other.len {
            return Err(BitsError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        for (a, b) in self.bytes.iter_mut().zip(&other.bytes) {
            *a ^= b;
        }
        Ok(())
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
    }
}

impl BitXor for &BitString {
    type Output = BitString;

    /// Panics on length mismatch; use [`BitString::xor`] for a checked form.
    fn bitxor(self, rhs: &BitString) -> BitString {
        self.xor(rhs)
            .expect("xor of bit strings with different lengths")
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}:{})", self.len, self.to_hex())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Serialize, Deserialize)]
struct HexForm {
    len: usize,
    hex: String,
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        HexForm {
            len: self.len,
            hex: self.to_hex(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let form = HexForm::deserialize(deserializer)?;
        BitString::from_hex(&form.hex, form.len).map_err(serde::de::Error::custom)
    }
}
