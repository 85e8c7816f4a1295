//! Data behind the standard plots (variance ratios, OR curves, weighted
//! max variance, sample-size planning) and reproducible Monte Carlo drivers
//! for the two aggregate applications on synthetic data.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::aggregates::{est_distinct_samples, est_max_dominance, predict_distinct_variance, required_p, AggregateKind, Selection};
use crate::error::{Error, Result};
use crate::hash::{derive_salt, hash_seed};
use crate::io::write_config_header;
use crate::model::{DataVector, FunctionTag, Outcome, RankFamily, SamplingSpec};
use crate::oblivious::{est_ht, est_max_l_r2, est_max_u_r2, est_or, var_closed_form, OrKind, UVariant, VarEstimator};
use crate::oracle::{exact_moments, quad_moments, DEFAULT_QUAD_TOL};
use crate::sampling::{sample_bottomk, sample_instance_oblivious, sample_instance_pps, InstanceTable};
use crate::sum::csum;
use crate::weighted::est_max_l_ws_r2;

/// Write a `# config:` line followed by serialized rows.
pub fn write_rows<W: Write, T: Serialize>(mut w: W, config: &BTreeMap<String, serde_json::Value>, rows: &[T]) -> Result<()> {
    write_config_header(&mut w, config)?;
    let mut wr = csv::Writer::from_writer(w);
    for row in rows {
        wr.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

/// Evenly spaced grid including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig1Row {
    pub ratio: f64,
    pub var_l_over_ht: f64,
    pub var_u_over_ht: f64,
}

/// Variance of max^(L) and symmetric max^(U) relative to HT on (1, ratio),
/// p = (1/2, 1/2), by exact enumeration.
pub fn fig1(ratios: &[f64]) -> Result<Vec<Fig1Row>> {
    let p = [0.5, 0.5];
    let spec = SamplingSpec::oblivious(p.to_vec())?;
    ratios
        .iter()
        .map(|&ratio| {
            if !(0.0..=1.0).contains(&ratio) {
                return Err(Error::InvalidParameter(format!("ratio {ratio} outside [0,1]")));
            }
            let v = DataVector::new(vec![1.0, ratio])?;
            let ht = exact_moments(|o: &Outcome| est_ht(o, &p, FunctionTag::Max), &spec, &v)?.variance;
            let l = exact_moments(|o: &Outcome| est_max_l_r2(o, p[0], p[1]), &spec, &v)?.variance;
            let u = exact_moments(|o: &Outcome| est_max_u_r2(o, p[0], p[1], UVariant::Symmetric), &spec, &v)?.variance;
            Ok(Fig1Row { ratio, var_l_over_ht: l / ht, var_u_over_ht: u / ht })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig2Row {
    pub p: f64,
    pub var_or_ht: f64,
    pub var_or_l_11: f64,
    pub var_or_l_10: f64,
    pub var_or_u_11: f64,
    pub var_or_u_10: f64,
}

/// OR variances on (1,1) and (1,0) at p_1 = p_2 = p. Closed forms are
/// cross-checked against enumeration; a disagreement is an error.
pub fn fig2(ps: &[f64]) -> Result<Vec<Fig2Row>> {
    ps.iter()
        .map(|&p| {
            let pv = [p, p];
            let spec = SamplingSpec::oblivious(pv.to_vec())?;
            let one_one = DataVector::new(vec![1.0, 1.0])?;
            let one_zero = DataVector::new(vec![1.0, 0.0])?;
            let checked = |v: &DataVector, est: VarEstimator, kind: OrKind| -> Result<f64> {
                let closed = var_closed_form(v, &pv, est)?.value;
                let enumerated = exact_moments(|o: &Outcome| est_or(o, &pv, kind), &spec, v)?.variance;
                if (closed - enumerated).abs() > 1e-10 * (1.0 + closed.abs()) {
                    return Err(Error::InvalidData(format!("closed form {closed} disagrees with enumeration {enumerated} at p={p}")));
                }
                Ok(closed)
            };
            let enumerated = |v: &DataVector| exact_moments(|o: &Outcome| est_or(o, &pv, OrKind::U), &spec, v).map(|m| m.variance);
            Ok(Fig2Row {
                p,
                var_or_ht: checked(&one_one, VarEstimator::Ht(FunctionTag::Or), OrKind::Ht)?,
                var_or_l_11: checked(&one_one, VarEstimator::OrL, OrKind::L)?,
                var_or_l_10: checked(&one_zero, VarEstimator::OrL, OrKind::L)?,
                var_or_u_11: enumerated(&one_one)?,
                var_or_u_10: enumerated(&one_zero)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig4Row {
    pub rho: f64,
    pub min_over_max: f64,
    pub var_l: f64,
    pub var_ht: f64,
    pub ratio: f64,
}

/// Weighted max with known seeds, τ* = (1, 1), v = (ρ, ρ·ratio): normalized
/// variances of max^(L) and HT by quadrature over the seed square.
pub fn fig4(rhos: &[f64], ratios: &[f64]) -> Result<Vec<Fig4Row>> {
    let tau = [1.0, 1.0];
    let cells: Vec<(f64, f64)> = rhos.iter().flat_map(|&r| ratios.iter().map(move |&q| (r, q))).collect();
    cells
        .par_iter()
        .map(|&(rho, q)| {
            if !(rho > 0.0 && rho <= 1.0) || !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidParameter(format!("need ρ in (0,1] and ratio in [0,1], got ({rho}, {q})")));
            }
            let v = DataVector::new(vec![rho, rho * q])?;
            let l = quad_moments(|o: &Outcome| est_max_l_ws_r2(o, &tau), &tau, &v, DEFAULT_QUAD_TOL)?.variance;
            let ht = quad_moments(|o: &Outcome| crate::weighted::est_max_ht_ws(o, &tau), &tau, &v, DEFAULT_QUAD_TOL)?.variance;
            Ok(Fig4Row { rho, min_over_max: q, var_l: l, var_ht: ht, ratio: ht / l })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig6Row {
    pub n: f64,
    pub s_ht: f64,
    pub s_l: f64,
    pub ratio: f64,
}

/// Expected sample size pN needed for a distinct count of a union of N keys
/// with Jaccard coefficient J to reach coefficient of variation `cv`.
pub fn fig6(ns: &[f64], j: f64, cv: f64) -> Result<Vec<Fig6Row>> {
    ns.iter()
        .map(|&n| {
            let s_ht = required_p(n, j, cv, AggregateKind::Ht)? * n;
            let s_l = required_p(n, j, cv, AggregateKind::L)? * n;
            Ok(Fig6Row { n, s_ht, s_l, ratio: s_l / s_ht })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McStats {
    pub trials: usize,
    pub mean: f64,
    /// unbiased sample variance
    pub variance: f64,
    pub stderr: f64,
}

impl McStats {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::InvalidParameter("need at least 2 trials".into()));
        }
        let n = xs.len() as f64;
        let mean = csum(xs.iter().copied()) / n;
        let variance = csum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
        Ok(Self { trials: xs.len(), mean, variance, stderr: (variance / n).sqrt() })
    }
}

/// Two binary instances over key sets A and B with |A| = |B| = `n_per_set`
/// and |A ∩ B| = `intersection`.
pub fn synthetic_sets(n_per_set: usize, intersection: usize) -> Result<(InstanceTable, InstanceTable)> {
    if intersection > n_per_set {
        return Err(Error::InvalidParameter("intersection larger than the sets".into()));
    }
    let common = (0..intersection).map(|i| format!("c{i}"));
    let a = InstanceTable::from_pairs(common.clone().chain((intersection..n_per_set).map(|i| format!("a{i}"))).map(|k| (k, 1.0)))?;
    let b = InstanceTable::from_pairs(common.chain((intersection..n_per_set).map(|i| format!("b{i}"))).map(|k| (k, 1.0)))?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DistinctDesign {
    Poisson { p: f64 },
    Pps { tau_star: f64 },
    BottomK { k: usize, family: RankFamily },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinctMc {
    pub truth: f64,
    pub jaccard: f64,
    pub ht: McStats,
    pub l: McStats,
    /// None for bottom-k, whose inclusion probability is data dependent
    pub predicted_ht: Option<f64>,
    pub predicted_l: Option<f64>,
}

/// Repeat the distinct-count estimate over `trials` independent salt pairs.
pub fn distinct_mc(a: &InstanceTable, b: &InstanceTable, design: DistinctDesign, selection: &Selection, trials: usize, salt: u64) -> Result<DistinctMc> {
    let union: std::collections::BTreeSet<&str> = a.positive_keys().chain(b.positive_keys()).filter(|k| selection.matches(k)).collect();
    let inter = union.iter().filter(|k| a.get(k) > 0.0 && b.get(k) > 0.0).count() as f64;
    let truth = union.len() as f64;
    let jaccard = if truth > 0.0 { inter / truth } else { 0.0 };
    let runs = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (s1, s2) = (derive_salt(salt, 2 * t), derive_salt(salt, 2 * t + 1));
            let (x, y) = match design {
                DistinctDesign::Poisson { p } => (sample_instance_oblivious(a, None, p, s1)?, sample_instance_oblivious(b, None, p, s2)?),
                DistinctDesign::Pps { tau_star } => (sample_instance_pps(a, tau_star, s1)?, sample_instance_pps(b, tau_star, s2)?),
                DistinctDesign::BottomK { k, family } => (sample_bottomk(a, k, family, s1)?, sample_bottomk(b, k, family, s2)?),
            };
            let ht = est_distinct_samples(&x, &y, selection, AggregateKind::Ht)?.estimate;
            let l = est_distinct_samples(&x, &y, selection, AggregateKind::L)?.estimate;
            Ok((ht, l))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (ht, l): (Vec<f64>, Vec<f64>) = runs.into_iter().unzip();
    let predict = |kind| match design {
        DistinctDesign::Poisson { p } => predict_distinct_variance(truth, jaccard, p, p, kind).map(Some),
        DistinctDesign::Pps { tau_star } => {
            let p = (1.0 / tau_star).min(1.0);
            predict_distinct_variance(truth, jaccard, p, p, kind).map(Some)
        }
        DistinctDesign::BottomK { .. } => Ok(None),
    };
    Ok(DistinctMc {
        truth,
        jaccard,
        ht: McStats::from_samples(&ht)?,
        l: McStats::from_samples(&l)?,
        predicted_ht: predict(AggregateKind::Ht)?,
        predicted_l: predict(AggregateKind::L)?,
    })
}

/// Two weighted instances over `n_keys` keys: 60% of keys appear in both
/// (with correlated values), 20% in each alone. Values are skewed toward
/// small numbers and lie in [0.01, 0.99].
pub fn synthetic_weighted_pair(n_keys: usize, gen_salt: u64) -> Result<(InstanceTable, InstanceTable)> {
    let mut a = InstanceTable::new();
    let mut b = InstanceTable::new();
    let u = |tag: &str, key: &str| hash_seed(gen_salt, format!("{tag}/{key}").as_bytes());
    for i in 0..n_keys {
        let key = format!("k{i}");
        let presence = u("presence", &key);
        let va = 0.01 + 0.98 * u("a", &key).powi(3);
        let vb = 0.01 + 0.98 * u("b", &key).powi(3);
        if presence < 0.6 {
            a.insert(&key, va)?;
            b.insert(&key, (va * (0.5 + u("corr", &key))).clamp(0.01, 0.99))?;
        } else if presence < 0.8 {
            a.insert(&key, va)?;
        } else {
            b.insert(&key, vb)?;
        }
    }
    Ok((a, b))
}

/// τ* giving an expected sample of `rate`·|keys| when all values are below τ*.
pub fn tau_for_rate(t: &InstanceTable, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!("rate {rate} outside (0,1]")));
    }
    let total = csum(t.iter().map(|(_, v)| v));
    let tau = total / (rate * t.len() as f64);
    let max = t.iter().map(|(_, v)| v).fold(0.0, f64::max);
    if !(tau > max) {
        return Err(Error::InvalidParameter(format!("rate {rate} puts τ* = {tau} below the largest value {max}")));
    }
    Ok(tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxdomRow {
    pub rate: f64,
    pub tau_1: f64,
    pub tau_2: f64,
    pub truth: f64,
    pub mean_ht: f64,
    pub mean_l: f64,
    pub nvar_ht: f64,
    pub nvar_l: f64,
    pub ratio: f64,
}

/// HT and L max-dominance estimates over `trials` independent salt pairs.
pub fn maxdom_trials(a: &InstanceTable, b: &InstanceTable, tau_star: [f64; 2], selection: &Selection, trials: usize, salt: u64) -> Result<(McStats, McStats)> {
    let runs = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s1 = sample_instance_pps(a, tau_star[0], derive_salt(salt, 2 * t))?;
            let s2 = sample_instance_pps(b, tau_star[1], derive_salt(salt, 2 * t + 1))?;
            Ok((
                est_max_dominance(&s1, &s2, selection, AggregateKind::Ht)?.estimate,
                est_max_dominance(&s1, &s2, selection, AggregateKind::L)?.estimate,
            ))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (ht, l): (Vec<f64>, Vec<f64>) = runs.into_iter().unzip();
    Ok((McStats::from_samples(&ht)?, McStats::from_samples(&l)?))
}

/// Max-dominance estimates over `trials` salt pairs at each sampling rate;
/// normalized variance is the empirical variance over truth².
pub fn maxdom_mc(a: &InstanceTable, b: &InstanceTable, rates: &[f64], trials: usize, salt: u64) -> Result<Vec<MaxdomRow>> {
    let keys: std::collections::BTreeSet<&str> = a.iter().chain(b.iter()).map(|(k, _)| k).collect();
    let truth = csum(keys.iter().map(|k| a.get(k).max(b.get(k))));
    rates
        .iter()
        .map(|&rate| {
            let (t1, t2) = (tau_for_rate(a, rate)?, tau_for_rate(b, rate)?);
            let (ht, l) = maxdom_trials(a, b, [t1, t2], &Selection::All, trials, salt)?;
            Ok(MaxdomRow {
                rate,
                tau_1: t1,
                tau_2: t2,
                truth,
                mean_ht: ht.mean,
                mean_l: l.mean,
                nvar_ht: ht.variance / (truth * truth),
                nvar_l: l.variance / (truth * truth),
                ratio: ht.variance / l.variance,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_endpoints() {
        let rows = fig1(&[0.0, 1.0]).unwrap();
        assert!((rows[0].var_l_over_ht - 11.0 / 27.0).abs() < 1e-12);
        assert!((rows[1].var_l_over_ht - 1.0 / 9.0).abs() < 1e-12);
        assert!(rows.iter().all(|r| r.var_l_over_ht <= 1.0 && r.var_u_over_ht <= 1.0));
    }

    #[test]
    fn fig2_half() {
        let r = fig2(&[0.5]).unwrap()[0];
        assert!((r.var_or_ht - 3.0).abs() < 1e-12);
        assert!((r.var_or_l_11 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fig4_ht_column() {
        let rows = fig4(&[0.3], &[0.0, 0.5]).unwrap();
        for r in rows {
            assert!((r.var_ht - (1.0 - 0.09)).abs() < 1e-9);
        }
    }

    #[test]
    fn synthetic_sets_shape() {
        let (a, b) = synthetic_sets(10, 4).unwrap();
        assert_eq!((a.len(), b.len()), (10, 10));
        assert_eq!(a.positive_keys().filter(|k| b.get(k) > 0.0).count(), 4);
    }

    #[test]
    fn weighted_pair_is_below_tau() {
        let (a, b) = synthetic_weighted_pair(1000, 1).unwrap();
        assert!(a.len() > 700 && b.len() > 700);
        assert!(tau_for_rate(&a, 0.2).unwrap() > 1.0);
        assert!(tau_for_rate(&a, 1.0).is_err());
    }

    #[test]
    fn rows_carry_config() {
        let mut cfg = BTreeMap::new();
        cfg.insert("salt".into(), serde_json::json!(1));
        let mut buf = Vec::new();
        write_rows(&mut buf, &cfg, &fig6(&[1e4], 0.0, 0.1).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# config: {\"salt\":1}"));
        assert_eq!(lines.next(), Some("n,s_ht,s_l,ratio"));
    }
}
