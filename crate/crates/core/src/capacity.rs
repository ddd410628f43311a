//! Capacity upper bound, phase time allocation and achievable exchange rates.
//!
//! All powers are linear SNRs with the receiver noise variance fixed at one,
//! and every rate is in bits per real channel use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transmit powers of the two end nodes (`p1`, `p2`) and the relay (`p3`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl PowerProfile {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2), ("p3", p3)] {
            check_power(name, p)?;
        }
        Ok(Self { p1, p2, p3 })
    }

    /// Builds a profile from powers given in dB.
    pub fn from_db(p1_db: f64, p2_db: f64, p3_db: f64) -> Result<Self> {
        Self::new(db_to_linear(p1_db), db_to_linear(p2_db), db_to_linear(p3_db))
    }

    pub fn weaker_end(&self) -> f64 {
        self.p1.min(self.p2)
    }

    pub fn stronger_end(&self) -> f64 {
        self.p1.max(self.p2)
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.p1, self.p2, self.p3).map(|_| ())
    }
}

fn check_power(name: &str, p: f64) -> Result<()> {
    if !p.is_finite() || p < 0.0 {
        return Err(Error::domain(format!("{name} must be finite and non-negative, got {p}")));
    }
    Ok(())
}

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub upper_bound: f64,
    pub t1_opt: f64,
    pub uplink_rate: f64,
    pub downlink_rate: f64,
    /// Both phase rates are zero; `t1_opt` is then the conventional 1/2.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SicRegime {
    /// `ps >= pw + pw^2`: the weaker stream's interference-free rate is the bottleneck.
    StrongDominates,
    /// `ps < pw + pw^2`: the first-decoded stronger stream is the bottleneck.
    Intermediate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SicRateReport {
    pub rate_strong: f64,
    pub rate_weak: f64,
    pub min_rate: f64,
    pub regime: SicRegime,
}

/// Gaussian channel capacity `log2(1 + p) / 2`.
pub fn shannon_rate(p: f64) -> Result<f64> {
    check_power("power", p)?;
    Ok(0.5 * (1.0 + p).log2())
}

/// Best exchange rate over the uplink/downlink time split.
///
/// Returns `(rate, t1)` where `t1` is the uplink time fraction that makes
/// `t1 * uplink == (1 - t1) * downlink`.
pub fn combine_rates(uplink: f64, downlink: f64) -> (f64, f64) {
    let total = uplink + downlink;
    if total <= 0.0 {
        return (0.0, 0.5);
    }
    (uplink * downlink / total, downlink / total)
}

/// Cut-set upper bound on the symmetric exchange rate.
pub fn upper_bound(pp: &PowerProfile) -> Result<BoundReport> {
    pp.validate()?;
    let uplink_rate = shannon_rate(pp.weaker_end())?;
    let downlink_rate = shannon_rate(pp.p3)?;
    let (upper_bound, t1_opt) = combine_rates(uplink_rate, downlink_rate);
    Ok(BoundReport {
        upper_bound,
        t1_opt,
        uplink_rate,
        downlink_rate,
        degenerate: uplink_rate == 0.0 && downlink_rate == 0.0,
    })
}

/// Separated multiple access: the stronger end is decoded first treating the
/// weaker one as noise, then removed before decoding the weaker end.
pub fn sic_rates(pp: &PowerProfile) -> Result<SicRateReport> {
    pp.validate()?;
    let pw = pp.weaker_end();
    let ps = pp.stronger_end();
    let rate_strong = 0.5 * (1.0 + ps / (pw + 1.0)).log2();
    let rate_weak = shannon_rate(pw)?;
    let regime = if ps >= pw + pw * pw {
        SicRegime::StrongDominates
    } else {
        SicRegime::Intermediate
    };
    Ok(SicRateReport {
        rate_strong,
        rate_weak,
        min_rate: rate_strong.min(rate_weak),
        regime,
    })
}

/// Rate lost by separated decoding against the uplink cut-set bound in the
/// intermediate regime `pw <= ps <= pw + pw^2`.
pub fn low_snr_gap(pw: f64, ps: f64) -> Result<f64> {
    check_power("pw", pw)?;
    check_power("ps", ps)?;
    if ps < pw || ps > pw + pw * pw {
        return Err(Error::domain(format!(
            "gap is defined for pw <= ps <= pw + pw^2, got pw = {pw}, ps = {ps}"
        )));
    }
    let gap = shannon_rate(pw)? - 0.5 * (1.0 + ps / (pw + 1.0)).log2();
    // Rounding at the upper regime edge can dip a hair below zero.
    Ok(gap.max(0.0))
}

/// Lower bound on the first-decoded rate in the intermediate regime, which
/// depends on the weaker power only.
pub fn intermediate_rate_floor(pw: f64) -> Result<f64> {
    check_power("pw", pw)?;
    Ok(0.5 * (1.0 + pw - pw * pw / (pw + 1.0)).log2())
}

/// Exchange rates achieved by the two relaying strategies at a power profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyRates {
    pub bound: BoundReport,
    pub sic: SicRateReport,
    /// Separated uplink combined with network-coded broadcast.
    pub sic_exchange_rate: f64,
    pub sic_t1: f64,
    /// PNC uplink with a capacity-achieving modulo-q code: the uplink runs at
    /// the weaker end's Gaussian capacity, so this coincides with the bound.
    pub pnc_exchange_rate: f64,
    pub pnc_t1: f64,
}

pub fn strategy_rates(pp: &PowerProfile) -> Result<StrategyRates> {
    let bound = upper_bound(pp)?;
    let sic = sic_rates(pp)?;
    let (sic_exchange_rate, sic_t1) = combine_rates(sic.min_rate, bound.downlink_rate);
    let (pnc_exchange_rate, pnc_t1) = combine_rates(bound.uplink_rate, bound.downlink_rate);
    Ok(StrategyRates {
        bound,
        sic,
        sic_exchange_rate,
        sic_t1,
        pnc_exchange_rate,
        pnc_t1,
    })
}
