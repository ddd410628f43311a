//! Relay network-coding functions `W3 = f(W1, W2)` and the exact entropy
//! tests that decide whether a function lets both end nodes recover the
//! other's packet at the full broadcast rate.
//!
//! The sources are modeled as independent uniform symbols over `Z_q`, so the
//! joint distribution of `(W1, W2, W3)` has `q^2` equiprobable atoms and all
//! quantities are computed exactly by enumeration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packet::QPacket;

/// Default zero-test tolerance in bits.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest input alphabet accepted by the table parser.
pub const MAX_Q: u32 = 1024;
/// Largest output alphabet accepted by the table parser.
pub const MAX_M: u32 = 1 << 20;

const PMF_SUM_TOL: f64 = 1e-9;

/// Explicit `q x q` table with outputs in `{0, .., m-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetFn {
    q: u32,
    m: u32,
    table: Vec<u32>,
}

impl NetFn {
    /// `rows[a][b] = f(a, b)`.
    pub fn from_rows(q: u32, m: u32, rows: &[Vec<u32>]) -> Result<Self> {
        if q < 2 {
            return Err(Error::domain(format!("input alphabet must have q >= 2, got {q}")));
        }
        if m < 1 {
            return Err(Error::domain("output alphabet must be non-empty"));
        }
        if rows.len() != q as usize {
            return Err(Error::domain(format!("expected {q} rows, got {}", rows.len())));
        }
        let mut table = Vec::with_capacity((q * q) as usize);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != q as usize {
                return Err(Error::domain(format!(
                    "row {a} has {} entries, expected {q}",
                    row.len()
                )));
            }
            if let Some(&v) = row.iter().find(|&&v| v >= m) {
                return Err(Error::domain(format!("entry {v} in row {a} exceeds m - 1 = {}", m - 1)));
            }
            table.extend_from_slice(row);
        }
        Ok(Self { q, m, table })
    }

    fn from_fn(q: u32, m: u32, f: impl Fn(u32, u32) -> u32) -> Self {
        let table = (0..q).flat_map(|a| (0..q).map(move |b| (a, b))).map(|(a, b)| f(a, b)).collect();
        Self { q, m, table }
    }

    /// Bitwise XOR; `q` must be a power of two.
    pub fn xor(q: u32) -> Result<Self> {
        if q < 2 || !q.is_power_of_two() {
            return Err(Error::domain(format!("xor needs q a power of two, got {q}")));
        }
        Ok(Self::from_fn(q, q, |a, b| a ^ b))
    }

    /// Modulo-q addition.
    pub fn modq_add(q: u32) -> Result<Self> {
        check_q(q)?;
        Ok(Self::from_fn(q, q, |a, b| (a + b) % q))
    }

    /// Integer sum without wrap-around, output alphabet `2q - 1`.
    pub fn int_sum(q: u32) -> Result<Self> {
        check_q(q)?;
        Ok(Self::from_fn(q, 2 * q - 1, |a, b| a + b))
    }

    pub fn constant(q: u32, value: u32) -> Result<Self> {
        check_q(q)?;
        if value >= q {
            return Err(Error::domain(format!("constant {value} outside Z_{q}")));
        }
        Ok(Self::from_fn(q, q, move |_, _| value))
    }

    pub fn builtin(kind: Builtin, q: u32) -> Result<Self> {
        match kind {
            Builtin::Xor => Self::xor(q),
            Builtin::ModqAdd => Self::modq_add(q),
            Builtin::IntSum => Self::int_sum(q),
            Builtin::Const => Self::constant(q, 0),
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn get(&self, a: u32, b: u32) -> u32 {
        self.table[(a * self.q + b) as usize]
    }

    /// Returns a copy with `W1`'s alphabet relabeled: `g(a, b) = f(perm[a], b)`.
    pub fn relabel_first(&self, perm: &[u32]) -> Result<Self> {
        let mut seen = vec![false; self.q as usize];
        if perm.len() != self.q as usize {
            return Err(Error::domain("permutation length must equal q"));
        }
        for &p in perm {
            if p >= self.q || std::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::domain("not a permutation of Z_q"));
            }
        }
        Ok(Self::from_fn(self.q, self.m, |a, b| self.get(perm[a as usize], b)))
    }

    /// Symbol-wise application to two packets.
    ///
    /// The result carries modulus `m`, which must be at least 2 to form a packet.
    pub fn eval(&self, w1: &QPacket, w2: &QPacket) -> Result<QPacket> {
        for w in [w1, w2] {
            if w.q() != self.q {
                return Err(Error::ModulusMismatch { left: w.q(), right: self.q });
            }
        }
        if w1.len() != w2.len() {
            return Err(Error::LengthMismatch { left: w1.len(), right: w2.len() });
        }
        let out = w1
            .symbols()
            .iter()
            .zip(w2.symbols())
            .map(|(&a, &b)| self.get(a, b))
            .collect();
        QPacket::new(self.m.max(2), out)
    }

    /// Serializes to the plain-text table format read by [`NetFn::from_str`].
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.q, self.m);
        for a in 0..self.q {
            let row: Vec<String> = (0..self.q).map(|b| self.get(a, b).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

fn check_q(q: u32) -> Result<()> {
    if !(2..=MAX_Q).contains(&q) {
        return Err(Error::domain(format!("q must be in 2..={MAX_Q}, got {q}")));
    }
    Ok(())
}

/// Plain-text table format: a header line `q m`, then `q` rows of `q`
/// whitespace-separated entries in `0..m`. Blank lines and lines starting
/// with `#` are ignored.
impl FromStr for NetFn {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split_once('#').map_or(l, |(body, _)| body).trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty input".into() })?;
        let head = parse_ints(hline, header)?;
        let [q, m] = head[..] else {
            return Err(Error::Parse { line: hline, msg: "header must be `q m`".into() });
        };
        if !(2..=MAX_Q).contains(&q) {
            return Err(Error::Parse { line: hline, msg: format!("q must be in 2..={MAX_Q}") });
        }
        if !(1..=MAX_M).contains(&m) {
            return Err(Error::Parse { line: hline, msg: format!("m must be in 1..={MAX_M}") });
        }

        let mut rows = Vec::with_capacity(q as usize);
        for (line, body) in lines {
            if rows.len() == q as usize {
                return Err(Error::Parse { line, msg: "trailing data after table".into() });
            }
            let row = parse_ints(line, body)?;
            if row.len() != q as usize {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {q} entries, got {}", row.len()),
                });
            }
            if let Some(v) = row.iter().find(|&&v| v >= m) {
                return Err(Error::Parse { line, msg: format!("entry {v} not below m = {m}") });
            }
            rows.push(row);
        }
        if rows.len() != q as usize {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("expected {q} rows, got {}", rows.len()),
            });
        }
        NetFn::from_rows(q, m, &rows)
    }
}

fn parse_ints(line: usize, body: &str) -> Result<Vec<u32>> {
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<u32>()
                .map_err(|e| Error::Parse { line, msg: format!("bad integer {tok:?}: {e}") })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    Xor,
    ModqAdd,
    IntSum,
    Const,
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xor" => Ok(Builtin::Xor),
            "modq-add" => Ok(Builtin::ModqAdd),
            "int-sum" => Ok(Builtin::IntSum),
            "const" => Ok(Builtin::Const),
            other => Err(Error::Usage(format!(
                "unknown builtin {other:?} (expected xor, modq-add, int-sum, const)"
            ))),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Builtin::Xor => "xor",
            Builtin::ModqAdd => "modq-add",
            Builtin::IntSum => "int-sum",
            Builtin::Const => "const",
        })
    }
}

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

fn check_pmf<'a>(probs: impl Iterator<Item = &'a f64>) -> Result<()> {
    let mut sum = 0.0;
    for &p in probs {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::domain(format!("probability {p} is not in [0, inf)")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PMF_SUM_TOL {
        return Err(Error::domain(format!("pmf sums to {sum}, not 1")));
    }
    Ok(())
}

fn plogp_sum<'a>(probs: impl Iterator<Item = &'a f64>) -> f64 {
    -probs.filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Shannon entropy in bits, `0 log 0 = 0`.
pub fn entropy(pmf: &[f64]) -> Result<f64> {
    check_pmf(pmf.iter())?;
    Ok(plogp_sum(pmf.iter()))
}

/// Sparse joint distribution of two discrete variables `(X, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    atoms: BTreeMap<(u64, u64), f64>,
}

impl JointPmf {
    /// Duplicate `(x, y)` keys accumulate.
    pub fn new(entries: impl IntoIterator<Item = (u64, u64, f64)>) -> Result<Self> {
        let mut atoms = BTreeMap::new();
        let mut raw = Vec::new();
        for (x, y, p) in entries {
            raw.push(p);
            *atoms.entry((x, y)).or_insert(0.0) += p;
        }
        check_pmf(raw.iter())?;
        Ok(Self { atoms })
    }

    /// `rows[x][y] = P(X = x, Y = y)`.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().enumerate().flat_map(|(x, row)| {
            row.iter().enumerate().map(move |(y, &p)| (x as u64, y as u64, p))
        }))
    }

    fn marginal_x(&self) -> BTreeMap<u64, f64> {
        let mut m = BTreeMap::new();
        for (&(x, _), &p) in &self.atoms {
            *m.entry(x).or_insert(0.0) += p;
        }
        m
    }

    fn marginal_y(&self) -> BTreeMap<u64, f64> {
        let mut m = BTreeMap::new();
        for (&(_, y), &p) in &self.atoms {
            *m.entry(y).or_insert(0.0) += p;
        }
        m
    }

    pub fn entropy_x(&self) -> f64 {
        plogp_sum(self.marginal_x().values())
    }

    pub fn entropy_y(&self) -> f64 {
        plogp_sum(self.marginal_y().values())
    }

    pub fn joint_entropy(&self) -> f64 {
        plogp_sum(self.atoms.values())
    }
}

/// `H(X | Y) = -sum p(x, y) log2(p(x, y) / p(y))`.
pub fn conditional_entropy(joint: &JointPmf) -> f64 {
    let py = joint.marginal_y();
    let h: f64 = joint
        .atoms
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(&(_, y), &p)| -p * (p / py[&y]).log2())
        .sum();
    h.max(0.0)
}

/// `I(X; Y) = sum p(x, y) log2(p(x, y) / (p(x) p(y)))`.
pub fn mutual_information(joint: &JointPmf) -> f64 {
    let px = joint.marginal_x();
    let py = joint.marginal_y();
    let i: f64 = joint
        .atoms
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(&(x, y), &p)| p * (p / (px[&x] * py[&y])).log2())
        .sum();
    i.max(0.0)
}

// ---------------------------------------------------------------------------
// Condition checks
// ---------------------------------------------------------------------------

/// Independent uniform `(W1, W2)` pushed through `f`; each closure picks the
/// `(X, Y)` labels of one atom from `(w1, w2, w3)`.
fn induced(f: &NetFn, pick: impl Fn(u64, u64, u64) -> (u64, u64)) -> JointPmf {
    let q = f.q as u64;
    let p = 1.0 / (q * q) as f64;
    let mut atoms = BTreeMap::new();
    for a in 0..f.q {
        for b in 0..f.q {
            let c = f.get(a, b) as u64;
            let key = pick(a as u64, b as u64, c);
            *atoms.entry(key).or_insert(0.0) += p;
        }
    }
    JointPmf { atoms }
}

fn pair(m: u64, u: u64, w3: u64) -> u64 {
    u * m + w3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetFnReport {
    pub h_w2_given_w1w3: f64,
    pub h_w1_given_w2w3: f64,
    pub i_w3_w1: f64,
    pub i_w3_w2: f64,
    pub satisfies_recoverability: bool,
    pub satisfies_independence: bool,
    pub valid: bool,
}

/// Exact recoverability (`H(W2|W1,W3) = H(W1|W2,W3) = 0`) and independence
/// (`I(W3;W1) = I(W3;W2) = 0`) checks, with zero meaning `<= tol` bits.
pub fn check_conditions(f: &NetFn, tol: f64) -> Result<NetFnReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let m = f.m as u64;
    let h_w2_given_w1w3 = conditional_entropy(&induced(f, |a, b, c| (b, pair(m, a, c))));
    let h_w1_given_w2w3 = conditional_entropy(&induced(f, |a, b, c| (a, pair(m, b, c))));
    let i_w3_w1 = mutual_information(&induced(f, |a, _, c| (c, a)));
    let i_w3_w2 = mutual_information(&induced(f, |_, b, c| (c, b)));
    let satisfies_recoverability = h_w2_given_w1w3 <= tol && h_w1_given_w2w3 <= tol;
    let satisfies_independence = i_w3_w1 <= tol && i_w3_w2 <= tol;
    Ok(NetFnReport {
        h_w2_given_w1w3,
        h_w1_given_w2w3,
        i_w3_w1,
        i_w3_w2,
        satisfies_recoverability,
        satisfies_independence,
        valid: satisfies_recoverability && satisfies_independence,
    })
}

/// Residuals of the two information identities that hold for every
/// deterministic `f` under independent inputs:
///
/// * `H(W2|W1) - H(W3|W1) - H(W2|W3,W1)` (uses `H(W3|W1,W2) = 0`)
/// * `H(W3) - H(W3|W1) - I(W3;W1)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub recoverability: f64,
    pub independence: f64,
}

pub fn verify_identity_chain(f: &NetFn) -> IdentityResiduals {
    let m = f.m as u64;
    let h_w2_given_w1 = conditional_entropy(&induced(f, |a, b, _| (b, a)));
    let w3_w1 = induced(f, |a, _, c| (c, a));
    let h_w3_given_w1 = conditional_entropy(&w3_w1);
    let h_w2_given_w3w1 = conditional_entropy(&induced(f, |a, b, c| (b, pair(m, a, c))));
    let h_w3 = w3_w1.entropy_x();
    let i_w3_w1 = mutual_information(&w3_w1);
    IdentityResiduals {
        recoverability: (h_w2_given_w1 - h_w3_given_w1 - h_w2_given_w3w1).abs(),
        independence: (h_w3 - h_w3_given_w1 - i_w3_w1).abs(),
    }
}
