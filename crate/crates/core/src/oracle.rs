//! Reference computation of estimator moments: exact enumeration for
//! discrete schemes, quadrature over the seed square for weighted r = 2, and
//! reproducible Monte Carlo. Also dominance and monotonicity checks.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hash::hash_seed;
use crate::model::{consistent_set, check_taus, Coordination, DataVector, Outcome, SamplingSpec, Scheme, SeedVector};
use crate::quadrature;
use crate::sampling;
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentMethod {
    Exact,
    Quadrature { tol: f64 },
    MonteCarlo { trials: usize, stderr: f64 },
}

impl std::fmt::Display for MomentMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MomentMethod::Exact => write!(f, "exact"),
            MomentMethod::Quadrature { tol } => write!(f, "quadrature(tol={tol:e})"),
            MomentMethod::MonteCarlo { trials, stderr } => write!(f, "montecarlo(trials={trials},stderr={stderr:e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub mean: f64,
    pub variance: f64,
    pub method: MomentMethod,
}

/// Every outcome a data vector can produce under a discrete scheme, with
/// its probability. Zero-probability patterns are skipped.
///
/// Weighted PPS is supported for binary data only; each seed cell
/// (u_i ≤ p_i or u_i > p_i, p_i = min{1, 1/τ_i*}) is represented by its
/// midpoint seed, so the enumeration is exact for estimators that depend on
/// the seeds only through their cells.
pub fn enumerate_outcomes(spec: &SamplingSpec, v: &DataVector) -> Result<Vec<(Outcome, f64)>> {
    spec.validate()?;
    let (p, weighted): (Vec<f64>, bool) = match &spec.scheme {
        Scheme::ObliviousPoisson { p } => (p.clone(), false),
        Scheme::WeightedPps { tau_star } if v.is_binary() => (tau_star.iter().map(|t| (1.0 / t).min(1.0)).collect(), true),
        Scheme::WeightedPps { .. } => return Err(Error::Unsupported("continuous weighted scheme: use quadrature".into())),
        Scheme::BottomK { .. } => return Err(Error::Unsupported("bottom-k outcomes depend on other keys".into())),
    };
    if v.r() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), got: v.r() });
    }
    let r = v.r();
    if r > 24 {
        return Err(Error::Unsupported(format!("enumeration over 2^{r} patterns")));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << r) {
        let low = |i: usize| mask >> i & 1 == 1;
        let prob: f64 = (0..r).map(|i| if low(i) { p[i] } else { 1.0 - p[i] }).product();
        if prob == 0.0 {
            continue;
        }
        let seeds = SeedVector::new((0..r).map(|i| if low(i) { p[i] / 2.0 } else { (1.0 + p[i]) / 2.0 }).collect())?;
        let outcome = if weighted {
            let Scheme::WeightedPps { tau_star } = &spec.scheme else { unreachable!() };
            sampling::sample_pps(v, tau_star, &seeds, spec.seeds_visible)?
        } else {
            sampling::sample_oblivious(v, &p, &seeds, spec.seeds_visible)?
        };
        out.push((outcome, prob));
    }
    Ok(out)
}

fn two_pass(weighted: &[(f64, f64)]) -> (f64, f64) {
    let mean = weighted.iter().map(|(w, e)| w * e).collect::<CompensatedSum>().value();
    let var = weighted.iter().map(|(w, e)| w * (e - mean) * (e - mean)).collect::<CompensatedSum>().value();
    (mean, var.max(0.0))
}

pub fn exact_moments<E>(est: E, spec: &SamplingSpec, v: &DataVector) -> Result<MomentReport>
where
    E: Fn(&Outcome) -> Result<f64>,
{
    let pairs = enumerate_outcomes(spec, v)?
        .into_iter()
        .map(|(o, pr)| Ok((pr, est(&o)?)))
        .collect::<Result<Vec<_>>>()?;
    let (mean, variance) = two_pass(&pairs);
    Ok(MomentReport { mean, variance, method: MomentMethod::Exact })
}

const QUAD_MAX_INTERVALS: usize = 4000;

/// Mean and variance over the seed square for r = 2 PPS with known seeds.
pub fn quad_moments<E>(est: E, tau_star: &[f64], v: &DataVector, tol: f64) -> Result<MomentReport>
where
    E: Fn(&Outcome) -> Result<f64>,
{
    check_taus(tau_star)?;
    if v.r() != 2 || tau_star.len() != 2 {
        return Err(Error::Unsupported("quadrature is implemented for r = 2".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let x = v.values();
    let axis = |i: usize| quadrature::breakpoints(0.0, 1.0, x.iter().map(|xj| xj / tau_star[i]));
    let (pts1, pts2) = (axis(0), axis(1));
    let inner_tol = tol / 4.0;
    let outer = |u1: f64| -> Result<[f64; 2]> {
        let inner = |u2: f64| -> Result<[f64; 2]> {
            let seeds = SeedVector::new(vec![u1, u2])?;
            let o = sampling::sample_pps(v, tau_star, &seeds, true)?;
            let e = est(&o)?;
            Ok([e, e * e])
        };
        Ok(quadrature::integrate(inner, &pts2, inner_tol, QUAD_MAX_INTERVALS)?.0)
    };
    let ([m1, m2], _) = quadrature::integrate(outer, &pts1, tol / 2.0, QUAD_MAX_INTERVALS)?;
    Ok(MomentReport { mean: m1, variance: (m2 - m1 * m1).max(0.0), method: MomentMethod::Quadrature { tol } })
}

/// Seeds of trial `t`: instance i hashes its index under salt + t. Shared-seed
/// coordination hashes the same key for every instance.
pub fn trial_seeds(salt: u64, t: u64, r: usize, coordination: Coordination) -> SeedVector {
    let s = salt.wrapping_add(t);
    let u = (0..r as u64)
        .map(|i| {
            let key = match coordination {
                Coordination::Independent => i,
                Coordination::SharedSeed => 0,
            };
            hash_seed(s, &key.to_le_bytes())
        })
        .collect();
    SeedVector::new(u).expect("hash seeds lie in [0,1)")
}

pub fn mc_moments<E>(est: E, spec: &SamplingSpec, v: &DataVector, trials: usize, salt: u64) -> Result<MomentReport>
where
    E: Fn(&Outcome) -> Result<f64> + Sync,
{
    if trials < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 trials".into()));
    }
    spec.validate()?;
    let estimates = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let seeds = trial_seeds(salt, t, v.r(), spec.coordination);
            est(&sampling::sample(v, spec, &seeds)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = trials as f64;
    let mean = estimates.iter().copied().collect::<CompensatedSum>().value() / n;
    let ss = estimates.iter().map(|e| (e - mean) * (e - mean)).collect::<CompensatedSum>().value();
    let variance = ss / (n - 1.0);
    Ok(MomentReport { mean, variance, method: MomentMethod::MonteCarlo { trials, stderr: (variance / n).sqrt() } })
}

/// Default tolerance used by [`moments`] for the weighted r = 2 case.
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

/// Exact moments where the scheme is discrete, quadrature for continuous
/// weighted r = 2 data.
pub fn moments<E>(est: E, spec: &SamplingSpec, v: &DataVector) -> Result<MomentReport>
where
    E: Fn(&Outcome) -> Result<f64>,
{
    match &spec.scheme {
        Scheme::WeightedPps { tau_star } if !v.is_binary() && spec.seeds_visible => quad_moments(est, tau_star, v, DEFAULT_QUAD_TOL),
        _ => exact_moments(est, spec, v),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominancePoint {
    pub vector: Vec<f64>,
    pub var_a: f64,
    pub var_b: f64,
    /// VAR_A exceeds VAR_B by more than the tolerance
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub points: Vec<DominancePoint>,
}

impl DominanceReport {
    pub fn violations(&self) -> impl Iterator<Item = &DominancePoint> {
        self.points.iter().filter(|p| p.violation)
    }

    pub fn holds(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Does A have variance ≤ B (+ tol) at every grid point?
pub fn check_dominance<A, B>(est_a: A, est_b: B, spec: &SamplingSpec, grid: &[DataVector], tol: f64) -> Result<DominanceReport>
where
    A: Fn(&Outcome) -> Result<f64>,
    B: Fn(&Outcome) -> Result<f64>,
{
    let points = grid
        .iter()
        .map(|v| {
            let var_a = moments(&est_a, spec, v)?.variance;
            let var_b = moments(&est_b, spec, v)?.variance;
            Ok(DominancePoint { vector: v.values().to_vec(), var_a, var_b, violation: var_a > var_b + tol })
        })
        .collect::<Result<_>>()?;
    Ok(DominanceReport { points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneViolation {
    /// outcome with the smaller consistent set
    pub finer: Outcome,
    pub coarser: Outcome,
    pub finer_estimate: f64,
    pub coarser_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub pairs_checked: usize,
    pub violations: Vec<MonotoneViolation>,
}

impl MonotoneReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Over all outcome pairs (S, S′) of `v` with V*(S) ⊆ V*(S′), flag
/// est(S) < est(S′) − tol.
pub fn check_monotone<E>(est: E, spec: &SamplingSpec, v: &DataVector, tol: f64) -> Result<MonotoneReport>
where
    E: Fn(&Outcome) -> Result<f64>,
{
    let outcomes: Vec<(Outcome, f64, crate::model::ConsistentSet)> = enumerate_outcomes(spec, v)?
        .into_iter()
        .map(|(o, _)| {
            let e = est(&o)?;
            let cs = consistent_set(&o, spec)?;
            Ok((o, e, cs))
        })
        .collect::<Result<_>>()?;
    let mut report = MonotoneReport { pairs_checked: 0, violations: Vec::new() };
    for (i, (o1, e1, c1)) in outcomes.iter().enumerate() {
        for (j, (o2, e2, c2)) in outcomes.iter().enumerate() {
            if i == j || !c1.is_subset_of(c2) {
                continue;
            }
            report.pairs_checked += 1;
            if *e1 < *e2 - tol {
                report.violations.push(MonotoneViolation { finer: o1.clone(), coarser: o2.clone(), finer_estimate: *e1, coarser_estimate: *e2 });
            }
        }
    }
    Ok(report)
}

/// One row of a moments report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub vector: Vec<f64>,
    pub report: MomentReport,
    pub flag: String,
}

pub fn write_report_csv<W: Write>(w: W, rows: &[ReportRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(["vector", "mean", "variance", "method", "flag"]).map_err(io)?;
    for row in rows {
        let vec = row.vector.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        wr.write_record([vec, row.report.mean.to_string(), row.report.variance.to_string(), row.report.method.to_string(), row.flag.clone()])
            .map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FunctionTag;
    use crate::oblivious::{est_ht, est_max_l_r2};

    fn dv(v: &[f64]) -> DataVector {
        DataVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_probabilities_sum_to_one() {
        let spec = SamplingSpec::oblivious(vec![0.2, 0.5, 0.8]).unwrap();
        let total: f64 = enumerate_outcomes(&spec, &dv(&[1.0, 2.0, 3.0])).unwrap().iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let spec = SamplingSpec::pps(vec![2.0, 0.5]).unwrap();
        let outs = enumerate_outcomes(&spec, &dv(&[1.0, 0.0])).unwrap();
        assert_eq!(outs.len(), 2); // second entry is always in its low cell
        assert!((outs.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_examples() {
        let spec = SamplingSpec::oblivious(vec![0.5, 0.5]).unwrap();
        let m = exact_moments(|o: &Outcome| est_max_l_r2(o, 0.5, 0.5), &spec, &dv(&[1.0, 0.0])).unwrap();
        assert!((m.mean - 1.0).abs() < 1e-12 && (m.variance - 11.0 / 9.0).abs() < 1e-12);
        let m = exact_moments(|o: &Outcome| est_ht(o, &[0.5, 0.5], FunctionTag::Max), &spec, &dv(&[1.0, 1.0])).unwrap();
        assert!((m.mean - 1.0).abs() < 1e-12 && (m.variance - 3.0).abs() < 1e-12);
        let m = exact_moments(|o: &Outcome| est_max_l_r2(o, 0.5, 0.5), &spec, &dv(&[0.0, 0.0])).unwrap();
        assert_eq!((m.mean, m.variance), (0.0, 0.0));
    }

    #[test]
    fn continuous_weighted_needs_quadrature() {
        let spec = SamplingSpec::pps(vec![1.0, 1.0]).unwrap();
        assert!(matches!(exact_moments(|_: &Outcome| Ok(0.0), &spec, &dv(&[0.5, 0.2])), Err(Error::Unsupported(_))));
    }

    #[test]
    fn mc_is_reproducible_and_validates_trials() {
        let spec = SamplingSpec::oblivious(vec![0.5, 0.5]).unwrap();
        let est = |o: &Outcome| est_max_l_r2(o, 0.5, 0.5);
        let a = mc_moments(est, &spec, &dv(&[1.0, 0.0]), 1000, 3).unwrap();
        let b = mc_moments(est, &spec, &dv(&[1.0, 0.0]), 1000, 3).unwrap();
        assert_eq!(a, b);
        assert!(mc_moments(est, &spec, &dv(&[1.0, 0.0]), 1, 3).is_err());
    }

    #[test]
    fn shared_seed_trials_coincide() {
        let s = trial_seeds(9, 4, 3, Coordination::SharedSeed);
        assert!(s.values().iter().all(|&u| u == s.get(0)));
    }

    #[test]
    fn report_csv_layout() {
        let mut buf = Vec::new();
        let row = ReportRow { vector: vec![1.0, 0.0], report: MomentReport { mean: 1.0, variance: 0.5, method: MomentMethod::Exact }, flag: "ok".into() };
        write_report_csv(&mut buf, &[row]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "vector,mean,variance,method,flag\n1 0,1,0.5,exact,ok\n");
    }
}
