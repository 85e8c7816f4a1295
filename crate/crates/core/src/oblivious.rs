//! Estimators for max and OR under weight-oblivious Poisson sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_probs, DataVector, FunctionTag, Outcome, SamplingSpec};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrKind {
    Ht,
    L,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UVariant {
    Symmetric,
    Asymmetric,
}

fn check_p(o: &Outcome, p: &[f64]) -> Result<()> {
    check_probs(p)?;
    o.check_r(p.len())
}

fn require_r2(o: &Outcome) -> Result<()> {
    if o.r() != 2 {
        return Err(Error::Unsupported(format!("closed form defined for r = 2, got r = {}", o.r())));
    }
    Ok(())
}

fn require_binary(o: &Outcome) -> Result<()> {
    match o.values().iter().flatten().find(|&&x| x != 0.0 && x != 1.0) {
        Some(&x) => Err(Error::NonBinary(x)),
        None => Ok(()),
    }
}

fn full_values(o: &Outcome) -> Vec<f64> {
    o.values().iter().map(|v| v.unwrap_or(0.0)).collect()
}

/// Horvitz–Thompson: positive only when every entry is sampled.
pub fn est_ht(o: &Outcome, p: &[f64], f: FunctionTag) -> Result<f64> {
    check_p(o, p)?;
    if !o.is_full() {
        return Ok(0.0);
    }
    Ok(f.eval(&full_values(o)) / p.iter().product::<f64>())
}

/// max^(L) for r = 2 with arbitrary inclusion probabilities.
pub fn est_max_l_r2(o: &Outcome, p1: f64, p2: f64) -> Result<f64> {
    check_p(o, &[p1, p2])?;
    let d = p1 + p2 - p1 * p2;
    Ok(match (o.value(0), o.value(1)) {
        (None, None) => 0.0,
        (Some(v), None) | (None, Some(v)) => v / d,
        (Some(v1), Some(v2)) => v1.max(v2) / (p1 * p2) - ((1.0 / p2 - 1.0) * v1 + (1.0 / p1 - 1.0) * v2) / d,
    })
}

/// Coefficients α of max^(L) for uniform p, with prefix sums A_h = Σ_{i≤h} α_i.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub alpha: Vec<f64>,
    pub prefix: Vec<f64>,
    pub p: f64,
}

impl CoefficientVector {
    pub fn r(&self) -> usize {
        self.alpha.len()
    }
}

/// Solve the triangular system for A_r, A_{r-1}, …, A_1 in O(r²).
///
/// Binomial weights C(k,l)((1-p)/p)^l are updated by ratio recurrence so no
/// factorials are formed. The A_h grow like p^{-h}; results overflow once
/// p^{-r} leaves binary64 range, which is reported as an error.
pub fn coeff_max_l_uniform(r: usize, p: f64) -> Result<CoefficientVector> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    check_probs(&[p])?;
    let q = (1.0 - p) / p;
    let miss = 1.0 - p;
    // a[h] holds A_h, 1-based
    let mut a = vec![0.0; r + 1];
    a[r] = 1.0 / (1.0 - miss.powi(r as i32));
    let mut weights = Vec::with_capacity(r);
    for k in 0..r.saturating_sub(1) {
        let c = 1.0 - miss.powi((r - k - 1) as i32);
        weights.clear();
        weights.push(1.0);
        for l in 1..=k {
            let prev = weights[l - 1];
            weights.push(prev * q * (k - l + 1) as f64 / l as f64);
        }
        let mut t = 0.0;
        for l in 1..=k {
            t += weights[l] * (a[r - k + l] - c * a[r - k + l - 1]);
        }
        a[r - k - 1] = (a[r - k] + t) / c;
    }
    let prefix: Vec<f64> = a[1..].to_vec();
    if prefix.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("coefficients overflow binary64 for r = {r}, p = {p}")));
    }
    let alpha = prefix.iter().enumerate().map(|(i, &ah)| if i == 0 { ah } else { ah - prefix[i - 1] }).collect();
    Ok(CoefficientVector { alpha, prefix, p })
}

/// Relative residuals of the defining linear relations, one per k = 0..r-2:
/// |Σ_l C(k,l) p^{k-l}(1-p)^l (A_{r-k+l} − c A_{r-k+l-1})| divided by the sum
/// of absolute values of the terms.
pub fn coefficient_residuals(c: &CoefficientVector) -> Vec<f64> {
    let (r, p) = (c.r(), c.p);
    let a = |h: usize| c.prefix[h - 1];
    (0..r.saturating_sub(1))
        .map(|k| {
            let cc = 1.0 - (1.0 - p).powi((r - k - 1) as i32);
            let mut b = p.powi(k as i32);
            let (mut sum, mut scale) = (0.0, 0.0);
            for l in 0..=k {
                if l > 0 {
                    b *= (1.0 - p) / p * (k - l + 1) as f64 / l as f64;
                }
                let (hi, lo) = (a(r - k + l), cc * a(r - k + l - 1));
                sum += b * (hi - lo);
                scale += b * (hi.abs() + lo.abs());
            }
            if scale == 0.0 {
                0.0
            } else {
                sum.abs() / scale
            }
        })
        .collect()
}

/// φ(S) sorted nonincreasingly: unsampled slots take the largest sampled value.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminingVector(pub Vec<f64>);

pub fn determining_vector(o: &Outcome) -> Option<DeterminingVector> {
    if o.sampled_count() == 0 {
        return None;
    }
    let mut z: Vec<f64> = o.values().iter().flatten().copied().collect();
    z.sort_by(|a, b| b.total_cmp(a));
    let mut u = vec![z[0]; o.r() - z.len()];
    u.extend(z);
    Some(DeterminingVector(u))
}

pub fn est_max_l_uniform(o: &Outcome, coeffs: &CoefficientVector) -> Result<f64> {
    o.check_r(coeffs.r())?;
    Ok(match determining_vector(o) {
        None => 0.0,
        Some(DeterminingVector(u)) => coeffs.alpha.iter().zip(&u).map(|(a, x)| a * x).sum(),
    })
}

/// Prefix sums A_1..A_r for non-uniform p listed in sorting-permutation
/// order (entry 1 belongs to the largest value). Complete for r ≤ 3.
pub fn prefix_sums_general(p: &[f64]) -> Result<Vec<f64>> {
    check_probs(p)?;
    let r = p.len();
    if r > 3 {
        return Err(Error::Unsupported("non-uniform prefix sums are implemented for r ≤ 3".into()));
    }
    let a_r = |p: &[f64]| 1.0 / (1.0 - p.iter().map(|x| 1.0 - x).product::<f64>());
    let a_r1 = |p: &[f64]| a_r(p) / (1.0 - p[..p.len() - 1].iter().map(|x| 1.0 - x).product::<f64>());
    let mut out = vec![0.0; r];
    out[r - 1] = a_r(p);
    if r >= 2 {
        out[r - 2] = a_r1(p);
    }
    if r == 3 {
        let mut swapped = p.to_vec();
        swapped.swap(1, 2);
        out[0] = (a_r1(p) + a_r1(&swapped) - a_r(p)) / p[0];
    }
    Ok(out)
}

/// Top two prefix sums (A_r, A_{r-1}) for any r.
pub fn top_prefix_sums(p: &[f64]) -> Result<(f64, f64)> {
    check_probs(p)?;
    if p.len() < 2 {
        return Err(Error::InvalidParameter("A_{r-1} needs r ≥ 2".into()));
    }
    let miss_all: f64 = p.iter().map(|x| 1.0 - x).product();
    let a_r = 1.0 / (1.0 - miss_all);
    let miss_head: f64 = p[..p.len() - 1].iter().map(|x| 1.0 - x).product();
    Ok((a_r, a_r / (1.0 - miss_head)))
}

/// max^(L) for r ≤ 3 with arbitrary p.
pub fn est_max_l_general(o: &Outcome, p: &[f64]) -> Result<f64> {
    check_p(o, p)?;
    if p.len() > 3 {
        return Err(Error::Unsupported("non-uniform max^(L) is implemented for r ≤ 3".into()));
    }
    if o.sampled_count() == 0 {
        return Ok(0.0);
    }
    let fill = o.max_sampled();
    let phi: Vec<f64> = o.values().iter().map(|v| v.unwrap_or(fill)).collect();
    let mut order: Vec<usize> = (0..phi.len()).collect();
    order.sort_by(|&i, &j| phi[j].total_cmp(&phi[i]));
    let permuted: Vec<f64> = order.iter().map(|&i| p[i]).collect();
    let a = prefix_sums_general(&permuted)?;
    Ok(order.iter().enumerate().map(|(h, &i)| (if h == 0 { a[0] } else { a[h] - a[h - 1] }) * phi[i]).sum())
}

/// Keyed samples store only keys present in an instance; an absent key
/// whose recomputed seed fell below p_i was sampled with value 0.
pub fn resolve_known_zeros(o: &Outcome, p: &[f64]) -> Result<Outcome> {
    check_p(o, p)?;
    let u = o.require_seeds()?.values();
    let values = o.values().iter().zip(u).zip(p).map(|((v, u), p)| v.or((u < p).then_some(0.0))).collect();
    Outcome::new(values, None)
}

/// max^(L) by the cheapest applicable path: closed form for r = 2, the
/// coefficient vector for uniform p, prefix sums otherwise (r ≤ 3).
pub fn est_max_l(o: &Outcome, p: &[f64]) -> Result<f64> {
    check_p(o, p)?;
    match p.len() {
        1 => est_ht(o, p, FunctionTag::Max),
        2 => est_max_l_r2(o, p[0], p[1]),
        r if p.iter().all(|&x| x == p[0]) => est_max_l_uniform(o, &coeff_max_l_uniform(r, p[0])?),
        _ => est_max_l_general(o, p),
    }
}

/// max^(U) for r = 2: prioritizes vectors with fewer positive entries.
pub fn est_max_u_r2(o: &Outcome, p1: f64, p2: f64, variant: UVariant) -> Result<f64> {
    check_p(o, &[p1, p2])?;
    Ok(match variant {
        UVariant::Symmetric => {
            let d = 1.0 + (1.0 - p1 - p2).max(0.0);
            match (o.value(0), o.value(1)) {
                (None, None) => 0.0,
                (Some(v), None) => v / (p1 * d),
                (None, Some(v)) => v / (p2 * d),
                (Some(v1), Some(v2)) => (v1.max(v2) - (v1 * (1.0 - p2) + v2 * (1.0 - p1)) / d) / (p1 * p2),
            }
        }
        UVariant::Asymmetric => {
            let m = (1.0 - p1).max(p2);
            match (o.value(0), o.value(1)) {
                (None, None) => 0.0,
                (Some(v), None) => v / p1,
                (None, Some(v)) => v / m,
                (Some(v1), Some(v2)) => (v1.max(v2) - p2 * (1.0 - p1) / m * v2 - (1.0 - p2) * v1) / (p1 * p2),
            }
        }
    })
}

/// OR over binary data.
pub fn est_or(o: &Outcome, p: &[f64], kind: OrKind) -> Result<f64> {
    check_p(o, p)?;
    require_binary(o)?;
    match kind {
        OrKind::Ht => est_ht(o, p, FunctionTag::Or),
        OrKind::L if p.len() == 2 => {
            // closed form on the determining vector
            if o.sampled_count() == 0 {
                return Ok(0.0);
            }
            let fill = o.max_sampled();
            let (v1, v2) = (o.value(0).unwrap_or(fill), o.value(1).unwrap_or(fill));
            let or = v1.max(v2);
            let (p1, p2) = (p[0], p[1]);
            Ok(or / (p1 * p2) - ((1.0 / p2 - 1.0) * v1 + (1.0 / p1 - 1.0) * v2) / (p1 + p2 - p1 * p2))
        }
        OrKind::L if p.iter().all(|&x| x == p[0]) => est_max_l_uniform(o, &coeff_max_l_uniform(p.len(), p[0])?),
        OrKind::L => est_max_l_general(o, p),
        OrKind::U => {
            require_r2(o)?;
            est_max_u_r2(o, p[0], p[1], UVariant::Symmetric)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarEstimator {
    Ht(FunctionTag),
    OrL,
    OrU,
    MaxLR2,
    MaxUR2(UVariant),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    ClosedForm,
    Enumerated,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub value: f64,
    pub method: VarianceMethod,
}

/// Variance of an oblivious estimator: a closed form where one is known,
/// exact enumeration otherwise (flagged in `method`).
pub fn var_closed_form(v: &DataVector, p: &[f64], est: VarEstimator) -> Result<VarianceReport> {
    check_probs(p)?;
    if v.r() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), got: v.r() });
    }
    let closed = |value| Ok(VarianceReport { value, method: VarianceMethod::ClosedForm });
    let x = v.values();
    match est {
        VarEstimator::Ht(f) => {
            let fv = f.eval(x);
            closed(fv * fv * (1.0 / p.iter().product::<f64>() - 1.0))
        }
        VarEstimator::OrL if v.r() == 2 && v.is_binary() => {
            let (p1, p2) = (p[0], p[1]);
            let d = p1 + p2 - p1 * p2;
            let one_zero = |p1: f64, p2: f64| {
                (1.0 - p1) + p1 * (1.0 - p2) * (1.0 / d - 1.0).powi(2) + p1 * p2 * (1.0 / (p1 * d) - 1.0).powi(2)
            };
            match (x[0] > 0.0, x[1] > 0.0) {
                (false, false) => closed(0.0),
                (true, true) => closed(1.0 / d - 1.0),
                (true, false) => closed(one_zero(p1, p2)),
                (false, true) => closed(one_zero(p2, p1)),
            }
        }
        _ => {
            let spec = SamplingSpec::oblivious(p.to_vec())?;
            let estimator = |o: &Outcome| match est {
                VarEstimator::Ht(f) => est_ht(o, p, f),
                VarEstimator::OrL => est_or(o, p, OrKind::L),
                VarEstimator::OrU => est_or(o, p, OrKind::U),
                VarEstimator::MaxLR2 => est_max_l_r2(o, p[0], p.get(1).copied().unwrap_or(f64::NAN)),
                VarEstimator::MaxUR2(variant) => est_max_u_r2(o, p[0], p.get(1).copied().unwrap_or(f64::NAN), variant),
            };
            let m = oracle::exact_moments(estimator, &spec, v)?;
            Ok(VarianceReport { value: m.variance, method: VarianceMethod::Enumerated })
        }
    }
}
