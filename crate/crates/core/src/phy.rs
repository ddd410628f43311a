//! Real-baseband q-ary PAM, the two-user superposition channel, midpoint
//! detection on the superimposed constellation and the PNC modulo-q demap.
//!
//! Noise is zero-mean real Gaussian with unit variance. A scheme at power `P`
//! uses amplitude scale `alpha = sqrt(3P / (q^2 - 1))`, so adjacent points in
//! both the single-user and the superimposed constellation sit `d = 2 alpha`
//! apart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packet::QPacket;

/// Modulation order plus amplitude scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PamScheme {
    q: u32,
    alpha: f64,
    power: f64,
}

impl PamScheme {
    /// Scheme whose uniform-symbol mean energy equals `power`.
    pub fn new(q: u32, power: f64) -> Result<Self> {
        check_order(q)?;
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::domain(format!("power must be positive and finite, got {power}")));
        }
        let alpha = (3.0 * power / (q as f64 * q as f64 - 1.0)).sqrt();
        Ok(Self { q, alpha, power })
    }

    pub fn from_snr_db(q: u32, snr_db: f64) -> Result<Self> {
        Self::new(q, crate::capacity::db_to_linear(snr_db))
    }

    pub fn with_alpha(q: u32, alpha: f64) -> Result<Self> {
        check_order(q)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("alpha must be positive and finite, got {alpha}")));
        }
        let power = alpha * alpha * (q as f64 * q as f64 - 1.0) / 3.0;
        Ok(Self { q, alpha, power })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Distance between adjacent constellation points.
    pub fn spacing(&self) -> f64 {
        2.0 * self.alpha
    }

    /// Amplitude of symbol `u`: `alpha * (2u - (q - 1))`.
    pub fn point(&self, u: u32) -> f64 {
        self.alpha * (2.0 * u as f64 - (self.q as f64 - 1.0))
    }

    /// Nearest single-user point; ties go to the lower symbol.
    pub fn detect(&self, y: f64) -> u32 {
        nearest_index(y, self.alpha, self.q - 1, self.q as usize - 1) as u32
    }
}

fn check_order(q: u32) -> Result<()> {
    // 2^16 keeps every sum index and q^2 well inside f64 and u32 range.
    if !(2..=1 << 16).contains(&q) {
        return Err(Error::domain(format!("modulation order must be in 2..=65536, got {q}")));
    }
    Ok(())
}

/// Index of the nearest point on the grid `alpha * (2i - offset)`,
/// `i = 0..=last`, using midpoint thresholds with ties toward the lower index.
fn nearest_index(y: f64, alpha: f64, offset: u32, last: usize) -> usize {
    // Position measured in midpoint units: midpoint j (between i = j and
    // i = j + 1) sits at k = j. The index is the count of midpoints < y.
    let k = (y / alpha + offset as f64 - 1.0) / 2.0;
    if k.is_nan() || k <= 0.0 {
        return 0;
    }
    let c = k.ceil();
    if c >= last as f64 {
        last
    } else {
        c as usize
    }
}

/// `x[k] = alpha * (2 u[k] - (q - 1))`.
pub fn modulate(u: &QPacket, s: &PamScheme) -> Result<Vec<f64>> {
    if u.q() != s.q {
        return Err(Error::ModulusMismatch { left: u.q(), right: s.q });
    }
    Ok(u.symbols().iter().map(|&sym| s.point(sym)).collect())
}

/// Constellation of `x1 + x2` for two equal-power schemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumConstellation {
    q: u32,
    alpha: f64,
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl SumConstellation {
    pub fn new(s: &PamScheme) -> Self {
        let q = s.q as usize;
        let n = 2 * q - 1;
        let q2 = (q * q) as f64;
        let points = (0..n).map(|m| s.alpha * (2.0 * m as f64 - 2.0 * (q as f64 - 1.0))).collect();
        let probs = (0..n).map(|m| (q - m.abs_diff(q - 1)) as f64 / q2).collect();
        Self { q: s.q, alpha: s.alpha, points, probs }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest point index for one sample.
    pub fn detect(&self, y: f64) -> usize {
        nearest_index(y, self.alpha, 2 * (self.q - 1), self.points.len() - 1)
    }
}

/// Receiver noise. The variance is one; the noiseless model exists for
/// exact-chain checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseModel {
    unit_variance: bool,
    seed: u64,
}

impl NoiseModel {
    pub fn unit(seed: u64) -> Self {
        Self { unit_variance: true, seed }
    }

    pub fn noiseless() -> Self {
        Self { unit_variance: false, seed: 0 }
    }

    pub fn variance(&self) -> f64 {
        if self.unit_variance {
            1.0
        } else {
            0.0
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// One noise draw from `rng` (zero for the noiseless model).
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.unit_variance {
            rng.sample(StandardNormal)
        } else {
            0.0
        }
    }
}

/// `y[k] = x1[k] + x2[k] + n[k]` with noise drawn from the model's own seed.
pub fn superimpose_and_noise(x1: &[f64], x2: &[f64], nm: &NoiseModel) -> Result<Vec<f64>> {
    superimpose_with(x1, x2, nm, &mut nm.rng())
}

/// As [`superimpose_and_noise`] but drawing from a caller-owned RNG.
pub fn superimpose_with(
    x1: &[f64],
    x2: &[f64],
    nm: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if x1.len() != x2.len() {
        return Err(Error::LengthMismatch { left: x1.len(), right: x2.len() });
    }
    Ok(x1.iter().zip(x2).map(|(a, b)| a + b + nm.sample(rng)).collect())
}

pub fn detect_sum(y: &[f64], sc: &SumConstellation) -> Vec<usize> {
    y.iter().map(|&v| sc.detect(v)).collect()
}

/// Maps a superimposed-constellation index to the modulo-q sum symbol.
pub fn pnc_demap(m: usize, q: u32) -> Result<u32> {
    if q < 2 || m > 2 * (q as usize - 1) {
        return Err(Error::domain(format!("sum index {m} out of range for q = {q}")));
    }
    Ok((m % q as usize) as u32)
}

/// Demaps a whole sequence of sum indices into a packet over `Z_q`.
pub fn pnc_demap_packet(indices: &[usize], q: u32) -> Result<QPacket> {
    let syms = indices.iter().map(|&m| pnc_demap(m, q)).collect::<Result<Vec<_>>>()?;
    QPacket::new(q, syms)
}

// ---------------------------------------------------------------------------
// Analytic error rates
// ---------------------------------------------------------------------------

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// `Pr(|n| >= a)` for unit-variance zero-mean Gaussian `n`.
pub fn gaussian_two_sided_tail(a: f64) -> Result<f64> {
    if a.is_nan() || a < 0.0 {
        return Err(Error::domain(format!("tail threshold must be >= 0, got {a}")));
    }
    Ok(erfc_scaled_arg(a))
}

/// `Pr(n >= a)` for `a >= 0`.
fn upper_tail(a: f64) -> f64 {
    0.5 * erfc_scaled_arg(a)
}

/// `erfc(a / sqrt 2)`, computed without forming `a / sqrt 2` in the
/// exponent so that `exp(-a^2 / 2)` stays exact to rounding.
fn erfc_scaled_arg(a: f64) -> f64 {
    if a == f64::INFINITY {
        return 0.0;
    }
    let z = a * std::f64::consts::FRAC_1_SQRT_2;
    let z2 = 0.5 * a * a;
    if z < 2.0 {
        1.0 - erf_series(z, z2)
    } else {
        erfc_continued_fraction(z, z2)
    }
}

/// `erf z = (2/sqrt pi) e^{-z^2} sum_n (2z^2)^n z / (1*3*...*(2n+1))`.
///
/// All terms are positive, so there is no cancellation for moderate `z`.
fn erf_series(z: f64, z2: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    while term > sum * 1e-17 {
        n += 1.0;
        term *= 2.0 * z2 / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 * FRAC_1_SQRT_PI * (-z2).exp() * sum
}

/// Even contraction of the Laplace continued fraction,
/// `erfc z = (2z/sqrt pi) e^{-z^2} / (2z^2+1 - 1*2/(2z^2+5 - 3*4/(2z^2+9 - ...)))`,
/// evaluated with the modified Lentz method.
fn erfc_continued_fraction(z: f64, z2: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let b0 = 2.0 * z2 + 1.0;
    let mut f = b0;
    let mut c = b0;
    let mut d = 0.0;
    for n in 1..10_000 {
        let nf = n as f64;
        let a = -(2.0 * nf - 1.0) * (2.0 * nf);
        let b = 2.0 * z2 + 4.0 * nf + 1.0;
        d = b + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    2.0 * z * FRAC_1_SQRT_PI * (-z2).exp() / f
}

/// Single-user SER with midpoint detection, `((q-1)/q) Pr(|n| >= d/2)`.
pub fn ser_p2p_analytic(s: &PamScheme) -> f64 {
    let q = s.q as f64;
    (q - 1.0) / q * erfc_scaled_arg(s.alpha)
}

/// SER of midpoint detection on the superimposed constellation.
///
/// The two end points err one-sidedly and every interior point errs
/// two-sidedly; weighting by the triangular prior gives
/// `((q^2-1)/q^2) Pr(|n| >= d/2)`.
pub fn ser_sum_analytic(s: &PamScheme) -> f64 {
    let sc = SumConstellation::new(s);
    let one_sided = upper_tail(s.alpha);
    let two_sided = erfc_scaled_arg(s.alpha);
    let last = sc.len() - 1;
    sc.probs
        .iter()
        .enumerate()
        .map(|(m, &p)| if m == 0 || m == last { p * one_sided } else { p * two_sided })
        .sum()
}

/// Exact SER of the modulo-q symbol after midpoint detection and demapping.
///
/// A detection error only counts when it moves the sum index by a step that
/// is not a multiple of `q`, so this never exceeds [`ser_sum_analytic`].
pub fn ser_pnc_analytic(s: &PamScheme) -> f64 {
    let sc = SumConstellation::new(s);
    let last = sc.len() as i64 - 1;
    let q = s.q as i64;
    let alpha = s.alpha;
    // Probability that noise moves the detected index from m by exactly
    // `step` (> 0) positions upward, given `room` positions available above.
    let shift = |step: i64, room: i64| -> f64 {
        let lo = upper_tail(alpha * (2 * step - 1) as f64);
        if step == room {
            lo
        } else {
            lo - upper_tail(alpha * (2 * step + 1) as f64)
        }
    };
    let mut total = 0.0;
    for (m, &p) in sc.probs.iter().enumerate() {
        let m = m as i64;
        let mut err = 0.0;
        for step in (1..=last - m).filter(|st| st % q != 0) {
            err += shift(step, last - m);
        }
        for step in (1..=m).filter(|st| st % q != 0) {
            err += shift(step, m);
        }
        total += p * err;
    }
    total
}
