//! Sum aggregates over selected keys: distinct count of two binary
//! instances, max dominance of two weighted instances, and a generic sum of
//! per-key estimates.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_probs, DataVector, Outcome, SeedVector};
use crate::oblivious::{var_closed_form, VarEstimator};
use crate::sampling::{effective_probability, InstanceTable, KeyedSample, SampleDesign};
use crate::sum::csum;
use crate::weighted::{est_max_ht_ws, est_max_l_ws_r2, var_max_ws, WsEstimator};

/// Where a key sampled in at least one of two binary instances stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KeyCategory {
    /// in the first sample; second entry unknown
    OneUnknown,
    UnknownOne,
    OneOne,
    /// in the first sample; second entry provably 0
    OneZero,
    ZeroOne,
}

impl KeyCategory {
    pub fn label(self) -> &'static str {
        match self {
            KeyCategory::OneUnknown => "F_1?",
            KeyCategory::UnknownOne => "F_?1",
            KeyCategory::OneOne => "F_11",
            KeyCategory::OneZero => "F_10",
            KeyCategory::ZeroOne => "F_01",
        }
    }

    pub const ALL: [KeyCategory; 5] = [KeyCategory::OneUnknown, KeyCategory::UnknownOne, KeyCategory::OneOne, KeyCategory::OneZero, KeyCategory::ZeroOne];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateKind {
    Ht,
    L,
    /// user-supplied per-key estimator
    Custom,
}

impl std::fmt::Display for AggregateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AggregateKind::Ht => "HT",
            AggregateKind::L => "L",
            AggregateKind::Custom => "custom",
        })
    }
}

impl std::str::FromStr for AggregateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ht" => Ok(Self::Ht),
            "l" => Ok(Self::L),
            _ => Err(Error::InvalidParameter(format!("unknown estimator kind `{s}` (expected ht or l)"))),
        }
    }
}

/// Which keys a query sums over.
#[derive(Debug, Clone)]
pub enum Selection {
    All,
    Prefix(String),
    Regex(regex::Regex),
}

impl Selection {
    /// `all`, `prefix:<p>` or `regex:<re>`; anything else is a prefix.
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() || s == "all" {
            Ok(Selection::All)
        } else if let Some(re) = s.strip_prefix("regex:") {
            regex::Regex::new(re).map(Selection::Regex).map_err(|e| Error::InvalidParameter(e.to_string()))
        } else {
            Ok(Selection::Prefix(s.strip_prefix("prefix:").unwrap_or(s).to_string()))
        }
    }

    pub fn matches(&self, key: &str) -> bool {
        match self {
            Selection::All => true,
            Selection::Prefix(p) => key.starts_with(p.as_str()),
            Selection::Regex(re) => re.is_match(key),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Selection::All => "all".into(),
            Selection::Prefix(p) => format!("prefix:{p}"),
            Selection::Regex(re) => format!("regex:{}", re.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub estimate: f64,
    /// None when no prediction is available from the sample alone
    pub predicted_variance: Option<f64>,
    pub kind: AggregateKind,
    pub selection: String,
    pub key_counts: BTreeMap<String, usize>,
}

/// Inclusion probability of a key with value 1 in the sample's instance.
fn unit_probability(s: &KeyedSample) -> Result<f64> {
    effective_probability(s, 1.0)
}

#[derive(Clone, Copy, PartialEq)]
enum Entry {
    One,
    Zero,
    Unknown,
}

fn entry_state(s: &KeyedSample, key: &str, p: f64) -> Result<Entry> {
    match s.value_of(key) {
        Some(v) if v == 1.0 => Ok(Entry::One),
        Some(v) if v == 0.0 => Ok(Entry::Zero),
        Some(v) => Err(Error::NonBinary(v)),
        None if s.seed_of(key) < p => Ok(Entry::Zero),
        None => Ok(Entry::Unknown),
    }
}

/// Categorize every key sampled in either instance. Seeds of keys missing
/// from a sample are recomputed from that sample's salt.
pub fn classify_keys(s1: &KeyedSample, s2: &KeyedSample) -> Result<BTreeMap<String, KeyCategory>> {
    let (p1, p2) = (unit_probability(s1)?, unit_probability(s2)?);
    let keys: BTreeSet<&str> = s1.entries.keys().chain(s2.entries.keys()).map(String::as_str).collect();
    let mut out = BTreeMap::new();
    for key in keys {
        let cat = match (entry_state(s1, key, p1)?, entry_state(s2, key, p2)?) {
            (Entry::One, Entry::Unknown) => KeyCategory::OneUnknown,
            (Entry::Unknown, Entry::One) => KeyCategory::UnknownOne,
            (Entry::One, Entry::One) => KeyCategory::OneOne,
            (Entry::One, Entry::Zero) => KeyCategory::OneZero,
            (Entry::Zero, Entry::One) => KeyCategory::ZeroOne,
            _ => continue,
        };
        out.insert(key.to_string(), cat);
    }
    Ok(out)
}

fn category_counts<'a>(cats: impl Iterator<Item = &'a KeyCategory>) -> BTreeMap<KeyCategory, usize> {
    let mut counts: BTreeMap<KeyCategory, usize> = KeyCategory::ALL.iter().map(|&c| (c, 0)).collect();
    for c in cats {
        *counts.get_mut(c).expect("all categories present") += 1;
    }
    counts
}

/// Distinct count |A ∪ B| of the selected keys from categorized samples.
/// The predicted variance plugs the estimated union size and Jaccard
/// coefficient into [`predict_distinct_variance`].
pub fn est_distinct(categories: &BTreeMap<String, KeyCategory>, selection: &Selection, p1: f64, p2: f64, kind: AggregateKind) -> Result<AggregateReport> {
    check_probs(&[p1, p2])?;
    let counts = category_counts(categories.iter().filter(|(k, _)| selection.matches(k)).map(|(_, c)| c));
    let n = |c: KeyCategory| counts[&c] as f64;
    let both = p1 * p2;
    let d = p1 + p2 - both;
    let estimate = match kind {
        AggregateKind::Ht => (n(KeyCategory::OneOne) + n(KeyCategory::OneZero) + n(KeyCategory::ZeroOne)) / both,
        AggregateKind::L => {
            (n(KeyCategory::OneUnknown) + n(KeyCategory::UnknownOne) + n(KeyCategory::OneOne)) / d
                + n(KeyCategory::OneZero) / (p1 * d)
                + n(KeyCategory::ZeroOne) / (p2 * d)
        }
        AggregateKind::Custom => return Err(Error::InvalidParameter("distinct count needs HT or L".into())),
    };
    let intersection = n(KeyCategory::OneOne) / both;
    let jaccard = if estimate > 0.0 { (intersection / estimate).clamp(0.0, 1.0) } else { 0.0 };
    let predicted = predict_distinct_variance(estimate, jaccard, p1, p2, kind)?;
    Ok(AggregateReport {
        estimate,
        predicted_variance: Some(predicted),
        kind,
        selection: selection.describe(),
        key_counts: counts.into_iter().map(|(c, n)| (c.label().to_string(), n)).collect(),
    })
}

/// Classify and estimate in one step, with each instance's inclusion
/// probability taken from its sample (the threshold surrogate for bottom-k).
pub fn est_distinct_samples(s1: &KeyedSample, s2: &KeyedSample, selection: &Selection, kind: AggregateKind) -> Result<AggregateReport> {
    let cats = classify_keys(s1, s2)?;
    est_distinct(&cats, selection, unit_probability(s1)?, unit_probability(s2)?, kind)
}

/// Variance of the distinct-count estimator for a union of size `d` with
/// Jaccard coefficient `j`. Keys in only one set are split evenly between
/// the two sides when p1 ≠ p2.
pub fn predict_distinct_variance(d: f64, j: f64, p1: f64, p2: f64, kind: AggregateKind) -> Result<f64> {
    check_probs(&[p1, p2])?;
    if !(0.0..=1.0).contains(&j) {
        return Err(Error::InvalidParameter(format!("Jaccard coefficient {j} outside [0,1]")));
    }
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!("union size {d} must be nonnegative")));
    }
    let p = [p1, p2];
    let var = |v: [f64; 2], est| -> Result<f64> { Ok(var_closed_form(&DataVector::new(v.to_vec())?, &p, est)?.value) };
    match kind {
        AggregateKind::Ht => Ok(d * (1.0 / (p1 * p2) - 1.0)),
        AggregateKind::L => {
            let one_side = 0.5 * (var([1.0, 0.0], VarEstimator::OrL)? + var([0.0, 1.0], VarEstimator::OrL)?);
            Ok(d * j * var([1.0, 1.0], VarEstimator::OrL)? + d * (1.0 - j) * one_side)
        }
        AggregateKind::Custom => Err(Error::InvalidParameter("distinct count needs HT or L".into())),
    }
}

/// Smallest common sampling rate p whose predicted coefficient of variation
/// for a union of `n` keys is at most `cv_target` (bisection to 1e-9).
pub fn required_p(n: f64, j: f64, cv_target: f64, kind: AggregateKind) -> Result<f64> {
    if !(cv_target > 0.0) {
        return Err(Error::InvalidParameter("cv target must be positive".into()));
    }
    if !(n > 0.0) {
        return Err(Error::InvalidParameter("union size must be positive".into()));
    }
    let cv = |p: f64| predict_distinct_variance(n, j, p, p, kind).map(|v| v.max(0.0).sqrt() / n);
    if cv(1.0)? > cv_target {
        return Err(Error::Infeasible(format!("cv {cv_target} is not reachable even at p = 1")));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if cv(mid)? <= cv_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Sum of per-key estimates over keys sampled in any of the samples and
/// passing the selection. Each key's outcome carries the sampled values and
/// every instance's seed (recomputed where the key was not sampled).
pub fn sum_aggregate<E>(per_key: E, samples: &[&KeyedSample], selection: &Selection, kind: AggregateKind) -> Result<AggregateReport>
where
    E: Fn(&str, &Outcome) -> Result<f64> + Sync,
{
    let keys: BTreeSet<&str> = samples.iter().flat_map(|s| s.entries.keys()).map(String::as_str).filter(|k| selection.matches(k)).collect();
    let keys: Vec<&str> = keys.into_iter().collect();
    let estimates: Vec<f64> = keys
        .par_iter()
        .map(|&key| {
            let values = samples.iter().map(|s| s.value_of(key)).collect();
            let seeds = SeedVector::new(samples.iter().map(|s| s.seed_of(key)).collect())?;
            per_key(key, &Outcome::new(values, Some(seeds))?)
        })
        .collect::<Result<_>>()?;
    let mut key_counts = BTreeMap::new();
    key_counts.insert("keys".to_string(), keys.len());
    for (i, s) in samples.iter().enumerate() {
        key_counts.insert(format!("sampled_{}", i + 1), s.entries.keys().filter(|k| selection.matches(k)).count());
    }
    Ok(AggregateReport { estimate: csum(estimates), predicted_variance: None, kind, selection: selection.describe(), key_counts })
}

fn pps_tau(s: &KeyedSample) -> Result<f64> {
    match s.design {
        SampleDesign::Pps { tau_star } => Ok(tau_star),
        _ => Err(Error::Unsupported("max dominance needs PPS samples".into())),
    }
}

/// Σ over selected keys of max(v_1, v_2), from two PPS samples with seeds.
/// For HT the report carries the unbiased variance estimate Σ x̂²(1 − π).
pub fn est_max_dominance(s1: &KeyedSample, s2: &KeyedSample, selection: &Selection, kind: AggregateKind) -> Result<AggregateReport> {
    let tau = [pps_tau(s1)?, pps_tau(s2)?];
    let mut report = match kind {
        AggregateKind::Ht => sum_aggregate(|_, o| est_max_ht_ws(o, &tau), &[s1, s2], selection, kind)?,
        AggregateKind::L => sum_aggregate(|_, o| est_max_l_ws_r2(o, &tau), &[s1, s2], selection, kind)?,
        AggregateKind::Custom => return Err(Error::InvalidParameter("max dominance needs HT or L".into())),
    };
    if kind == AggregateKind::Ht {
        let var = sum_aggregate(
            |_, o| {
                let x = est_max_ht_ws(o, &tau)?;
                let m = o.max_sampled();
                let pi: f64 = tau.iter().map(|t| (m / t).min(1.0)).product();
                Ok(if x > 0.0 { x * x * (1.0 - pi) } else { 0.0 })
            },
            &[s1, s2],
            selection,
            kind,
        )?;
        report.predicted_variance = Some(var.estimate);
    }
    Ok(report)
}

/// Exact variance of the max-dominance estimator given the full data
/// (per-key variances add under independent seeds).
pub fn max_dominance_variance(a: &InstanceTable, b: &InstanceTable, tau_star: [f64; 2], selection: &Selection, kind: AggregateKind) -> Result<f64> {
    let est = match kind {
        AggregateKind::Ht => WsEstimator::Ht,
        AggregateKind::L => WsEstimator::L,
        AggregateKind::Custom => return Err(Error::InvalidParameter("max dominance needs HT or L".into())),
    };
    let keys: BTreeSet<&str> = a.iter().chain(b.iter()).map(|(k, _)| k).filter(|k| selection.matches(k)).collect();
    let keys: Vec<&str> = keys.into_iter().collect();
    let vars: Vec<f64> = keys
        .par_iter()
        .map(|k| {
            let v = DataVector::new(vec![a.get(k), b.get(k)])?;
            if v.max() == 0.0 {
                return Ok(0.0);
            }
            Ok(var_max_ws(&v, &tau_star, est)?.value)
        })
        .collect::<Result<_>>()?;
    Ok(csum(vars))
}
