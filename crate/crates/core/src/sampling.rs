//! Samplers: per-key Poisson sampling of a data vector, and per-instance
//! Poisson / bottom-k sampling of keyed tables.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hash::{derive_salt, hash_seed};
use crate::model::{check_probs, check_taus, Coordination, DataVector, Outcome, RankFamily, SamplingSpec, Scheme, SeedVector};

/// i ∈ S iff u_i < p_i.
pub fn sample_oblivious(v: &DataVector, p: &[f64], seeds: &SeedVector, seeds_visible: bool) -> Result<Outcome> {
    check_probs(p)?;
    check_lengths(v.r(), p.len(), seeds.len())?;
    let values = v.values().iter().zip(p).zip(seeds.values()).map(|((&x, &pi), &u)| (u < pi).then_some(x)).collect();
    Outcome::new(values, seeds_visible.then(|| seeds.clone()))
}

/// i ∈ S iff v_i ≥ u_i τ_i* and v_i > 0.
pub fn sample_pps(v: &DataVector, tau_star: &[f64], seeds: &SeedVector, seeds_visible: bool) -> Result<Outcome> {
    check_taus(tau_star)?;
    check_lengths(v.r(), tau_star.len(), seeds.len())?;
    let values = v
        .values()
        .iter()
        .zip(tau_star)
        .zip(seeds.values())
        .map(|((&x, &t), &u)| (x > 0.0 && x >= u * t).then_some(x))
        .collect();
    Outcome::new(values, seeds_visible.then(|| seeds.clone()))
}

/// Sample one data vector under a Poisson spec.
pub fn sample(v: &DataVector, spec: &SamplingSpec, seeds: &SeedVector) -> Result<Outcome> {
    match &spec.scheme {
        Scheme::ObliviousPoisson { p } => sample_oblivious(v, p, seeds, spec.seeds_visible),
        Scheme::WeightedPps { tau_star } => sample_pps(v, tau_star, seeds, spec.seeds_visible),
        Scheme::BottomK { .. } => Err(Error::Unsupported("bottom-k samples whole instances, not single vectors".into())),
    }
}

fn check_lengths(r: usize, params: usize, seeds: usize) -> Result<()> {
    if params != r {
        return Err(Error::LengthMismatch { expected: r, got: params });
    }
    if seeds != r {
        return Err(Error::LengthMismatch { expected: r, got: seeds });
    }
    Ok(())
}

pub fn rank_value(family: RankFamily, w: f64, u: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::InvalidParameter(format!("rank weight {w} must be positive")));
    }
    Ok(match family {
        RankFamily::Exp => -(-u).ln_1p() / w,
        RankFamily::Pps => u / w,
    })
}

/// Salt of each instance: identical under shared-seed coordination.
pub fn instance_salts(base: u64, r: usize, coordination: Coordination) -> Vec<u64> {
    (0..r as u64)
        .map(|i| match coordination {
            Coordination::SharedSeed => base,
            Coordination::Independent => derive_salt(base, i),
        })
        .collect()
}

/// Seed vector of `key` across instances with the given salts.
pub fn seeds_for_key(salts: &[u64], key: &[u8]) -> SeedVector {
    SeedVector::new(salts.iter().map(|&s| hash_seed(s, key)).collect()).expect("hash seeds lie in [0,1)")
}

/// One instance: key → nonnegative value. Zero entries may be omitted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceTable {
    entries: BTreeMap<String, f64>,
}

impl InstanceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: f64) -> Result<()> {
        let key = key.into();
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidData(format!("value {value} for key `{key}` is not finite and nonnegative")));
        }
        if self.entries.insert(key.clone(), value).is_some() {
            return Err(Error::InvalidData(format!("duplicate key `{key}`")));
        }
        Ok(())
    }

    pub fn from_pairs<K: Into<String>>(pairs: impl IntoIterator<Item = (K, f64)>) -> Result<Self> {
        let mut t = Self::new();
        for (k, v) in pairs {
            t.insert(k, v)?;
        }
        Ok(t)
    }

    pub fn get(&self, key: &str) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn positive_keys(&self) -> impl Iterator<Item = &str> {
        self.iter().filter(|(_, v)| *v > 0.0).map(|(k, _)| k)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleDesign {
    Oblivious { p: f64 },
    Pps { tau_star: f64 },
    /// `threshold` is the (k+1)-st smallest rank, +∞ if there is none.
    BottomK { k: usize, family: RankFamily, threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledEntry {
    pub value: f64,
    pub seed: f64,
}

/// Sample of one instance together with what is needed to recompute seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyedSample {
    pub salt: u64,
    pub design: SampleDesign,
    pub entries: BTreeMap<String, SampledEntry>,
}

impl KeyedSample {
    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Seed of any key; unsampled keys are recomputed from the salt.
    pub fn seed_of(&self, key: &str) -> f64 {
        self.entries.get(key).map_or_else(|| hash_seed(self.salt, key.as_bytes()), |e| e.seed)
    }

    pub fn value_of(&self, key: &str) -> Option<f64> {
        self.entries.get(key).map(|e| e.value)
    }
}

/// Oblivious Poisson sample with rate p over `universe` (defaults to the
/// table's own keys, which must then list zero-valued keys explicitly).
pub fn sample_instance_oblivious(table: &InstanceTable, universe: Option<&[String]>, p: f64, salt: u64) -> Result<KeyedSample> {
    check_probs(&[p])?;
    let mut entries = BTreeMap::new();
    let mut visit = |key: &str| {
        let u = hash_seed(salt, key.as_bytes());
        if u < p {
            entries.insert(key.to_string(), SampledEntry { value: table.get(key), seed: u });
        }
    };
    match universe {
        Some(keys) => keys.iter().for_each(|k| visit(k)),
        None => table.iter().for_each(|(k, _)| visit(k)),
    }
    Ok(KeyedSample { salt, design: SampleDesign::Oblivious { p }, entries })
}

/// Poisson PPS sample with threshold τ*.
pub fn sample_instance_pps(table: &InstanceTable, tau_star: f64, salt: u64) -> Result<KeyedSample> {
    check_taus(&[tau_star])?;
    let entries = table
        .iter()
        .filter_map(|(k, v)| {
            let u = hash_seed(salt, k.as_bytes());
            (v > 0.0 && v >= u * tau_star).then(|| (k.to_string(), SampledEntry { value: v, seed: u }))
        })
        .collect();
    Ok(KeyedSample { salt, design: SampleDesign::Pps { tau_star }, entries })
}

/// The k positive-valued keys of smallest rank; ties by key order.
pub fn sample_bottomk(table: &InstanceTable, k: usize, family: RankFamily, salt: u64) -> Result<KeyedSample> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut ranked: Vec<(f64, &str, f64, f64)> = table
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(key, v)| {
            let u = hash_seed(salt, key.as_bytes());
            Ok((rank_value(family, v, u)?, key, v, u))
        })
        .collect::<Result<_>>()?;
    // keys are already in byte order, so a stable sort on rank breaks ties by key
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let threshold = ranked.get(k).map_or(f64::INFINITY, |x| x.0);
    let entries = ranked.iter().take(k).map(|&(_, key, value, seed)| (key.to_string(), SampledEntry { value, seed })).collect();
    Ok(KeyedSample { salt, design: SampleDesign::BottomK { k, family, threshold }, entries })
}

/// Inclusion probability of a key with the given value under the sample's
/// design; for bottom-k this is the threshold-conditioned surrogate.
pub fn effective_probability(s: &KeyedSample, value: f64) -> Result<f64> {
    if !(value > 0.0) {
        return Err(Error::InvalidParameter(format!("value {value} must be positive")));
    }
    Ok(match s.design {
        SampleDesign::Oblivious { p } => p,
        SampleDesign::Pps { tau_star } => (value / tau_star).min(1.0),
        SampleDesign::BottomK { threshold, .. } if threshold.is_infinite() => 1.0,
        SampleDesign::BottomK { family: RankFamily::Pps, threshold, .. } => (value * threshold).min(1.0),
        SampleDesign::BottomK { family: RankFamily::Exp, threshold, .. } => -(-value * threshold).exp_m1(),
    })
}
