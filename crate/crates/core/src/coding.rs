//! Linear block codes over `Z_q` and the coded PNC uplink.
//!
//! Encoding is the row-vector/generator product modulo `q`, so every code
//! here commutes with symbol-wise modulo-q addition and the relay can decode
//! the sum of the two codewords directly to the sum of the two messages.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packet::QPacket;
use crate::phy::{self, NoiseModel, PamScheme, SumConstellation};

/// Largest codebook `decode_nearest` will enumerate.
pub const MAX_CODEBOOK: u64 = 1 << 20;
/// Codebooks up to this many stored symbols are cached after first use.
const CACHE_SYMBOLS: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeKind {
    Repetition,
    SingleParityCheck,
}

/// Compact code description: `rep:L` (repetition, k = 1) or `spc:K`
/// (single parity check, l = k + 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub kind: CodeKind,
    pub size: usize,
}

/// Upper bound on the `rep:L` / `spc:K` size accepted from text.
pub const MAX_SPEC_SIZE: usize = 4096;

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, size) = s
            .split_once(':')
            .ok_or_else(|| Error::Usage(format!("code spec {s:?} must look like rep:L or spc:K")))?;
        let kind = match kind.trim() {
            "rep" | "repetition" => CodeKind::Repetition,
            "spc" | "single-parity-check" => CodeKind::SingleParityCheck,
            other => return Err(Error::Usage(format!("unknown code kind {other:?}"))),
        };
        let size: usize = size
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("bad code size in {s:?}")))?;
        if size == 0 || size > MAX_SPEC_SIZE {
            return Err(Error::Usage(format!("code size must be in 1..={MAX_SPEC_SIZE}")));
        }
        Ok(CodeSpec { kind, size })
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CodeKind::Repetition => write!(f, "rep:{}", self.size),
            CodeKind::SingleParityCheck => write!(f, "spc:{}", self.size),
        }
    }
}

/// A `k x l` generator over `Z_q` in systematic form.
#[derive(Debug, Clone)]
pub struct RingLinearCode {
    q: u32,
    k: usize,
    l: usize,
    generator: Vec<Vec<u32>>,
    codebook: OnceLock<Vec<u32>>,
}

impl PartialEq for RingLinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.generator == other.generator
    }
}

impl RingLinearCode {
    /// The generator must contain a `k x k` identity among its columns.
    pub fn new(q: u32, generator: Vec<Vec<u32>>) -> Result<Self> {
        if q < 2 {
            return Err(Error::domain(format!("q must be at least 2, got {q}")));
        }
        let k = generator.len();
        let l = generator.first().map_or(0, Vec::len);
        if k == 0 || l < k {
            return Err(Error::domain(format!("invalid generator dimensions {k} x {l}")));
        }
        if generator.iter().any(|row| row.len() != l) {
            return Err(Error::domain("generator rows have unequal length"));
        }
        if generator.iter().flatten().any(|&g| g >= q) {
            return Err(Error::domain("generator entry outside Z_q"));
        }
        let unit_col = |i: usize| {
            (0..l).any(|j| (0..k).all(|r| generator[r][j] == u32::from(r == i)))
        };
        if !(0..k).all(unit_col) {
            return Err(Error::domain("generator has no systematic identity block"));
        }
        Ok(Self { q, k, l, generator, codebook: OnceLock::new() })
    }

    pub fn make(kind: CodeKind, q: u32, size: usize) -> Result<Self> {
        match kind {
            CodeKind::Repetition => {
                if size == 0 {
                    return Err(Error::domain("repetition length must be at least 1"));
                }
                Self::new(q, vec![vec![1; size]])
            }
            CodeKind::SingleParityCheck => {
                if size == 0 {
                    return Err(Error::domain("parity-check message length must be at least 1"));
                }
                let rows = (0..size)
                    .map(|i| {
                        let mut row = vec![0; size + 1];
                        row[i] = 1;
                        row[size] = q - 1;
                        row
                    })
                    .collect();
                Self::new(q, rows)
            }
        }
    }

    pub fn from_spec(spec: CodeSpec, q: u32) -> Result<Self> {
        Self::make(spec.kind, q, spec.size)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn generator(&self) -> &[Vec<u32>] {
        &self.generator
    }

    fn check_packet(&self, p: &QPacket, len: usize) -> Result<()> {
        if p.q() != self.q {
            return Err(Error::ModulusMismatch { left: p.q(), right: self.q });
        }
        if p.len() != len {
            return Err(Error::LengthMismatch { left: p.len(), right: len });
        }
        Ok(())
    }

    fn encode_into(&self, msg: &[u32], out: &mut [u32]) {
        let q = self.q as u64;
        for (j, o) in out.iter_mut().enumerate() {
            let acc = msg
                .iter()
                .zip(&self.generator)
                .fold(0u64, |acc, (&w, row)| (acc + w as u64 * row[j] as u64) % q);
            *o = acc as u32;
        }
    }

    pub fn encode(&self, w: &QPacket) -> Result<QPacket> {
        self.check_packet(w, self.k)?;
        let mut out = vec![0; self.l];
        self.encode_into(w.symbols(), &mut out);
        QPacket::new(self.q, out)
    }

    pub fn codebook_size(&self) -> Option<u64> {
        (self.q as u64).checked_pow(self.k as u32)
    }

    /// Minimum-Hamming-distance decoding by exhaustive search. Ties resolve to
    /// the lexicographically smallest message.
    pub fn decode_nearest(&self, r: &QPacket) -> Result<QPacket> {
        self.check_packet(r, self.l)?;
        let size = self
            .codebook_size()
            .filter(|&n| n <= MAX_CODEBOOK)
            .ok_or_else(|| {
                Error::Capability(format!(
                    "codebook q^k = {}^{} exceeds {MAX_CODEBOOK} entries",
                    self.q, self.k
                ))
            })?;
        let r = r.symbols();
        let dist = |cw: &[u32]| cw.iter().zip(r).filter(|(a, b)| a != b).count();

        let mut best = (usize::MAX, 0u64);
        if size * self.l as u64 <= CACHE_SYMBOLS {
            let book = self.codebook.get_or_init(|| self.build_codebook(size));
            for (idx, cw) in book.chunks_exact(self.l).enumerate() {
                let d = dist(cw);
                if d < best.0 {
                    best = (d, idx as u64);
                }
            }
        } else {
            let mut cw = vec![0; self.l];
            for idx in 0..size {
                self.encode_into(&self.message_at(idx), &mut cw);
                let d = dist(&cw);
                if d < best.0 {
                    best = (d, idx);
                }
            }
        }
        QPacket::new(self.q, self.message_at(best.1))
    }

    /// Message number `idx` in lexicographic order (first symbol most significant).
    fn message_at(&self, mut idx: u64) -> Vec<u32> {
        let q = self.q as u64;
        let mut msg = vec![0; self.k];
        for slot in msg.iter_mut().rev() {
            *slot = (idx % q) as u32;
            idx /= q;
        }
        msg
    }

    fn build_codebook(&self, size: u64) -> Vec<u32> {
        let mut book = vec![0; size as usize * self.l];
        for (idx, cw) in book.chunks_exact_mut(self.l).enumerate() {
            self.encode_into(&self.message_at(idx as u64), cw);
        }
        book
    }
}

/// Outcome of one coded PNC uplink trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    /// Message symbols where the decoded sum differs from the truth.
    pub symbol_errors: usize,
    /// Channel symbols where the demapped codeword sum was wrong.
    pub channel_symbol_errors: usize,
    pub packet_error: bool,
    pub decoded: QPacket,
    pub truth: QPacket,
}

/// Runs the relay-side PNC chain once with noise drawn from the model's seed.
pub fn pnc_chain_trial(
    c: &RingLinearCode,
    s: &PamScheme,
    w1: &QPacket,
    w2: &QPacket,
    nm: &NoiseModel,
) -> Result<ChainResult> {
    pnc_chain_trial_with(c, s, w1, w2, nm, &mut nm.rng())
}

/// Both ends encode with the same code and modulate with the same scheme; the
/// relay detects the superimposed signal, demaps to `U1 +q U2` and decodes that
/// straight to `W1 +q W2`.
pub fn pnc_chain_trial_with(
    c: &RingLinearCode,
    s: &PamScheme,
    w1: &QPacket,
    w2: &QPacket,
    nm: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<ChainResult> {
    if s.q() != c.q() {
        return Err(Error::ModulusMismatch { left: s.q(), right: c.q() });
    }
    let truth = w1.add_mod(w2)?;
    let u1 = c.encode(w1)?;
    let u2 = c.encode(w2)?;
    let y = phy::superimpose_with(&phy::modulate(&u1, s)?, &phy::modulate(&u2, s)?, nm, rng)?;
    let sc = SumConstellation::new(s);
    let demapped = phy::pnc_demap_packet(&phy::detect_sum(&y, &sc), c.q())?;
    let channel_symbol_errors = demapped.hamming_distance(&u1.add_mod(&u2)?)?;
    let decoded = c.decode_nearest(&demapped)?;
    let symbol_errors = decoded.hamming_distance(&truth)?;
    Ok(ChainResult {
        symbol_errors,
        channel_symbol_errors,
        packet_error: symbol_errors > 0,
        decoded,
        truth,
    })
}
