use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A packet of symbols drawn from `Z_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QPacket {
    q: u32,
    symbols: Vec<u32>,
}

impl QPacket {
    pub fn new(q: u32, symbols: Vec<u32>) -> Result<Self> {
        if q < 2 {
            return Err(Error::domain(format!("modulus must be at least 2, got {q}")));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s >= q) {
            return Err(Error::domain(format!("symbol {s} out of range for q = {q}")));
        }
        Ok(Self { q, symbols })
    }

    pub fn zeros(q: u32, len: usize) -> Result<Self> {
        Self::new(q, vec![0; len])
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<u32> {
        self.symbols
    }

    fn check_compatible(&self, other: &QPacket) -> Result<()> {
        if self.q != other.q {
            return Err(Error::ModulusMismatch { left: self.q, right: other.q });
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }

    /// Symbol-wise modulo-q addition.
    pub fn add_mod(&self, other: &QPacket) -> Result<QPacket> {
        self.check_compatible(other)?;
        let symbols = self
            .symbols
            .iter()
            .zip(&other.symbols)
            .map(|(&a, &b)| (a + b) % self.q)
            .collect();
        Ok(QPacket { q: self.q, symbols })
    }

    /// Number of positions where the two packets differ.
    pub fn hamming_distance(&self, other: &QPacket) -> Result<usize> {
        self.check_compatible(other)?;
        Ok(self.symbols.iter().zip(&other.symbols).filter(|(a, b)| a != b).count())
    }
}

impl fmt::Display for QPacket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "] (q={})", self.q)
    }
}
