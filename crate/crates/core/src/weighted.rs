//! Estimators under weighted (PPS) Poisson sampling with known seeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_probs, check_taus, DataVector, Outcome};
use crate::oblivious::{self, OrKind, VarianceMethod, VarianceReport};
use crate::oracle;

/// Weight-oblivious view of a binary weighted outcome: entries not sampled
/// but with u_i ≤ p_i are known zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedBinaryOutcome {
    pub values: Vec<Option<f64>>,
}

impl MappedBinaryOutcome {
    pub fn to_outcome(&self) -> Outcome {
        Outcome::new(self.values.clone(), None).expect("mapped values are binary")
    }
}

pub fn map_binary_outcome(o: &Outcome, p: &[f64]) -> Result<MappedBinaryOutcome> {
    check_probs(p)?;
    o.check_r(p.len())?;
    let seeds = o.require_seeds()?;
    let values = o
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            Some(1.0) => Ok(Some(1.0)),
            Some(x) => Err(Error::NonBinary(*x)),
            None if seeds.get(i) <= p[i] => Ok(Some(0.0)),
            None => Ok(None),
        })
        .collect::<Result<_>>()?;
    Ok(MappedBinaryOutcome { values })
}

/// OR over binary data via the oblivious estimators on the mapped outcome.
pub fn est_or_ws(o: &Outcome, p: &[f64], kind: OrKind) -> Result<f64> {
    oblivious::est_or(&map_binary_outcome(o, p)?.to_outcome(), p, kind)
}

/// The same estimators written directly in terms of S and the seeds.
/// L and U are defined for r = 2; HT for any r.
pub fn est_or_ws_table(o: &Outcome, p: &[f64], kind: OrKind) -> Result<f64> {
    check_probs(p)?;
    o.check_r(p.len())?;
    let u = o.require_seeds()?.values();
    if let Some(x) = o.values().iter().flatten().find(|&&x| x != 1.0) {
        return Err(Error::NonBinary(*x));
    }
    let any = o.sampled_count() > 0;
    if kind == OrKind::Ht {
        let all_low = u.iter().zip(p).all(|(u, p)| u <= p);
        return Ok(if all_low && any { 1.0 / p.iter().product::<f64>() } else { 0.0 });
    }
    if p.len() != 2 {
        return Err(Error::Unsupported("OR tables are stated for r = 2".into()));
    }
    let (p1, p2) = (p[0], p[1]);
    let (s1, s2) = (o.is_sampled(0), o.is_sampled(1));
    let (lo1, lo2) = (u[0] <= p1, u[1] <= p2);
    Ok(match kind {
        OrKind::L => {
            let d = p1 + p2 - p1 * p2;
            match (s1, s2) {
                (false, false) => 0.0,
                (true, true) => 1.0 / d,
                (true, false) if !lo2 => 1.0 / d,
                (false, true) if !lo1 => 1.0 / d,
                (true, false) => 1.0 / (p1 * d),
                (false, true) => 1.0 / (p2 * d),
            }
        }
        OrKind::U => {
            let d = 1.0 + (1.0 - p1 - p2).max(0.0);
            match (s1, s2) {
                (false, false) => 0.0,
                (true, false) if !lo2 => 1.0 / (p1 * d),
                (false, true) if !lo1 => 1.0 / (p2 * d),
                _ => {
                    // the "else" row, in terms of the inferred binary values
                    let (x1, x2) = (s1 as u8 as f64, s2 as u8 as f64);
                    (1.0 - (x1 * (1.0 - p2) + x2 * (1.0 - p1)) / d) / (p1 * p2)
                }
            }
        }
        OrKind::Ht => unreachable!(),
    })
}

fn check_tau(o: &Outcome, tau_star: &[f64]) -> Result<()> {
    check_taus(tau_star)?;
    o.check_r(tau_star.len())
}

/// Inverse-probability estimator over the outcomes that determine max(v).
pub fn est_max_ht_ws(o: &Outcome, tau_star: &[f64]) -> Result<f64> {
    check_tau(o, tau_star)?;
    let u = o.require_seeds()?.values();
    if o.sampled_count() == 0 {
        return Ok(0.0);
    }
    let m = o.max_sampled();
    let hidden = (0..o.r()).filter(|&i| !o.is_sampled(i)).map(|i| u[i] * tau_star[i]).fold(0.0, f64::max);
    if hidden > m {
        return Ok(0.0);
    }
    Ok(m / tau_star.iter().map(|t| (m / t).min(1.0)).product::<f64>())
}

/// φ(S) for r = 2: unsampled entries take min{max sampled, u_i τ_i*}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedDeterminingVector {
    pub v1: f64,
    pub v2: f64,
}

impl WeightedDeterminingVector {
    /// Index (0 or 1) of the larger entry; ties report 0.
    pub fn which_max(&self) -> usize {
        (self.v2 > self.v1) as usize
    }
}

pub fn phi_max_l_ws(o: &Outcome, tau_star: &[f64]) -> Result<WeightedDeterminingVector> {
    if o.r() != 2 {
        return Err(Error::Unsupported(format!("weighted max^(L) is defined for r = 2, got r = {}", o.r())));
    }
    check_tau(o, tau_star)?;
    let u = o.require_seeds()?.values();
    let (v1, v2) = match (o.value(0), o.value(1)) {
        (None, None) => (0.0, 0.0),
        (Some(a), None) => (a, (u[1] * tau_star[1]).min(a)),
        (None, Some(b)) => ((u[0] * tau_star[0]).min(b), b),
        (Some(a), Some(b)) => (a, b),
    };
    Ok(WeightedDeterminingVector { v1, v2 })
}

/// Piece of the estimator that applies to a determining vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WsRegime {
    Zero,
    /// smaller entry at or above its threshold
    BothAbove,
    /// larger entry at or above its threshold, smaller below
    MaxAbove,
    /// both entries at or below both thresholds
    BelowBoth,
    /// larger entry between the two thresholds
    Between,
}

/// Regime of a determining vector given as (a, b), a ≥ b, with thresholds
/// permuted the same way.
pub fn ws_regime(a: f64, b: f64, ta: f64, tb: f64) -> WsRegime {
    if a == 0.0 {
        WsRegime::Zero
    } else if b >= tb {
        WsRegime::BothAbove
    } else if a >= ta {
        WsRegime::MaxAbove
    } else if a <= ta.min(tb) {
        WsRegime::BelowBoth
    } else {
        WsRegime::Between
    }
}

/// Estimate as a function of the determining vector (a, b), a ≥ b.
pub fn max_l_ws_from_phi(a: f64, b: f64, ta: f64, tb: f64) -> Result<f64> {
    if !(a >= b && b >= 0.0) {
        return Err(Error::InvalidData(format!("determining vector ({a}, {b}) must satisfy a ≥ b ≥ 0")));
    }
    let regime = ws_regime(a, b, ta, tb);
    if matches!(regime, WsRegime::BelowBoth | WsRegime::Between) && b == 0.0 {
        return Err(Error::InvalidData("determining vector has a zero entry on a sampled outcome".into()));
    }
    let big = ta + tb;
    let tt = ta * tb;
    Ok(match regime {
        WsRegime::Zero => 0.0,
        WsRegime::BothAbove => b + (a - b) / (a / ta).min(1.0),
        WsRegime::MaxAbove => a,
        WsRegime::BelowBoth => {
            tt / (big - a)
                + tt * (ta - a) / (a * big) * ((big - b) * a / (b * (big - a))).ln()
                + (a - b) * tt * (ta - a) / (a * (big - b) * (big - a))
        }
        WsRegime::Between => {
            big - tt / a
                + tt * (ta - a) / (a * big) * ((big - b) * tb / (b * ta)).ln()
                + tb * (ta - a) * (tb - b) / ((big - b) * a)
        }
    })
}

/// max^(L) for r = 2 under PPS with known seeds.
pub fn est_max_l_ws_r2(o: &Outcome, tau_star: &[f64]) -> Result<f64> {
    let phi = phi_max_l_ws(o, tau_star)?;
    if phi.which_max() == 0 {
        max_l_ws_from_phi(phi.v1, phi.v2, tau_star[0], tau_star[1])
    } else {
        max_l_ws_from_phi(phi.v2, phi.v1, tau_star[1], tau_star[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WsEstimator {
    Ht,
    L,
}

/// Default absolute tolerance for the numeric variance.
pub const WS_QUAD_TOL: f64 = 1e-9;

pub fn var_max_ws(v: &DataVector, tau_star: &[f64], est: WsEstimator) -> Result<VarianceReport> {
    check_taus(tau_star)?;
    if v.r() != 2 || tau_star.len() != 2 {
        return Err(Error::Unsupported("weighted max variance is defined for r = 2".into()));
    }
    match est {
        WsEstimator::Ht => {
            let m = v.max();
            let pr: f64 = tau_star.iter().map(|t| (m / t).min(1.0)).product();
            let value = if m == 0.0 { 0.0 } else { m * m * (1.0 / pr - 1.0) };
            Ok(VarianceReport { value, method: VarianceMethod::ClosedForm })
        }
        WsEstimator::L => {
            let m = oracle::quad_moments(|o: &Outcome| est_max_l_ws_r2(o, tau_star), tau_star, v, WS_QUAD_TOL)?;
            Ok(VarianceReport { value: m.variance, method: VarianceMethod::Quadrature })
        }
    }
}
