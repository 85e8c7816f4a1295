//! Domain types shared by every estimator: data vectors, sampling specs,
//! seeds, outcomes and the consistent-set record.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values a single key takes across the r instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DataVector(Vec<f64>);

impl DataVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidData("empty vector".into()));
        }
        if let Some(x) = values.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidData(format!("entry {x} is not a finite nonnegative value")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// 1 if any entry is positive.
    pub fn or(&self) -> f64 {
        if self.0.iter().any(|&x| x > 0.0) {
            1.0
        } else {
            0.0
        }
    }

    /// Number of entries strictly below the maximum (-1 for the zero vector).
    /// This is the score of the order under which max^(L) is optimal.
    pub fn l_score(&self) -> i64 {
        let m = self.max();
        if m == 0.0 {
            return -1;
        }
        self.0.iter().filter(|&&x| x < m).count() as i64
    }

    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0 || x == 1.0)
    }
}

impl TryFrom<Vec<f64>> for DataVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DataVector> for Vec<f64> {
    fn from(v: DataVector) -> Self {
        v.0
    }
}

/// Target functions supported by the generic (HT / solver) paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionTag {
    Max,
    Or,
    Min,
    Range,
}

impl FunctionTag {
    pub fn eval(self, v: &[f64]) -> f64 {
        let max = v.iter().copied().fold(0.0, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        match self {
            FunctionTag::Max => max,
            FunctionTag::Or => (max > 0.0) as u8 as f64,
            FunctionTag::Min => min,
            FunctionTag::Range => max - min,
        }
    }
}

impl std::str::FromStr for FunctionTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Self::Max),
            "or" => Ok(Self::Or),
            "min" => Ok(Self::Min),
            "range" => Ok(Self::Range),
            _ => Err(Error::InvalidParameter(format!("unknown function `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankFamily {
    Exp,
    Pps,
}

impl std::str::FromStr for RankFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(Self::Exp),
            "pps" => Ok(Self::Pps),
            _ => Err(Error::InvalidParameter(format!("unknown rank family `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    ObliviousPoisson { p: Vec<f64> },
    WeightedPps { tau_star: Vec<f64> },
    BottomK { k: usize, family: RankFamily },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordination {
    #[default]
    Independent,
    SharedSeed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub scheme: Scheme,
    #[serde(default)]
    pub seeds_visible: bool,
    #[serde(default)]
    pub coordination: Coordination,
}

pub(crate) fn check_probs(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidParameter("empty probability list".into()));
    }
    match p.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        Some(x) => Err(Error::InvalidParameter(format!("probability {x} outside (0,1]"))),
        None => Ok(()),
    }
}

pub(crate) fn check_taus(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return Err(Error::InvalidParameter("empty threshold list".into()));
    }
    match t.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        Some(x) => Err(Error::InvalidParameter(format!("threshold {x} must be positive"))),
        None => Ok(()),
    }
}

impl SamplingSpec {
    pub fn oblivious(p: Vec<f64>) -> Result<Self> {
        check_probs(&p)?;
        Ok(Self { scheme: Scheme::ObliviousPoisson { p }, seeds_visible: false, coordination: Coordination::Independent })
    }

    /// Weighted PPS; seeds are visible by default since every weighted
    /// estimator here needs them.
    pub fn pps(tau_star: Vec<f64>) -> Result<Self> {
        check_taus(&tau_star)?;
        Ok(Self { scheme: Scheme::WeightedPps { tau_star }, seeds_visible: true, coordination: Coordination::Independent })
    }

    pub fn bottom_k(k: usize, family: RankFamily) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Ok(Self { scheme: Scheme::BottomK { k, family }, seeds_visible: true, coordination: Coordination::Independent })
    }

    pub fn with_seeds_visible(mut self, visible: bool) -> Self {
        self.seeds_visible = visible;
        self
    }

    pub fn with_coordination(mut self, c: Coordination) -> Self {
        self.coordination = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.scheme {
            Scheme::ObliviousPoisson { p } => check_probs(p),
            Scheme::WeightedPps { tau_star } => check_taus(tau_star),
            Scheme::BottomK { k, .. } if *k < 1 => Err(Error::InvalidParameter("k must be at least 1".into())),
            Scheme::BottomK { .. } => Ok(()),
        }
    }

    /// Number of instances, when the scheme fixes it.
    pub fn r(&self) -> Option<usize> {
        match &self.scheme {
            Scheme::ObliviousPoisson { p } => Some(p.len()),
            Scheme::WeightedPps { tau_star } => Some(tau_star.len()),
            Scheme::BottomK { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SeedVector(Vec<f64>);

impl SeedVector {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        match u.iter().find(|x| !(0.0..1.0).contains(*x)) {
            Some(x) => Err(Error::InvalidParameter(format!("seed {x} outside [0,1)"))),
            None => Ok(Self(u)),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for SeedVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SeedVector> for Vec<f64> {
    fn from(v: SeedVector) -> Self {
        v.0
    }
}

/// What an estimator sees for one key: which entries were sampled (with
/// their values) and, in known-seeds mode, the seed vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    values: Vec<Option<f64>>,
    seeds: Option<SeedVector>,
}

impl Outcome {
    pub fn new(values: Vec<Option<f64>>, seeds: Option<SeedVector>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidData("outcome over zero instances".into()));
        }
        if let Some(s) = &seeds {
            if s.len() != values.len() {
                return Err(Error::LengthMismatch { expected: values.len(), got: s.len() });
            }
        }
        if let Some(x) = values.iter().flatten().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidData(format!("sampled value {x} is not finite and nonnegative")));
        }
        Ok(Self { values, seeds })
    }

    /// Outcome with nothing sampled.
    pub fn empty(r: usize, seeds: Option<SeedVector>) -> Result<Self> {
        Self::new(vec![None; r], seeds)
    }

    pub fn r(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> Option<f64> {
        self.values[i]
    }

    pub fn is_sampled(&self, i: usize) -> bool {
        self.values[i].is_some()
    }

    pub fn sampled_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_full(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn sampled_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter_map(|(i, v)| v.map(|_| i))
    }

    /// Largest sampled value, 0 for the empty outcome.
    pub fn max_sampled(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn seeds(&self) -> Option<&SeedVector> {
        self.seeds.as_ref()
    }

    pub fn require_seeds(&self) -> Result<&SeedVector> {
        self.seeds.as_ref().ok_or(Error::SeedsUnavailable)
    }

    pub fn without_seeds(mut self) -> Self {
        self.seeds = None;
        self
    }

    /// All entries sampled; convenient for full-information cases.
    pub fn full(v: &[f64]) -> Result<Self> {
        Self::new(v.iter().map(|&x| Some(x)).collect(), None)
    }

    pub(crate) fn check_r(&self, r: usize) -> Result<()> {
        if self.r() != r {
            return Err(Error::LengthMismatch { expected: r, got: self.r() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Exact(f64),
    /// v_i < bound (strict: equality would have been sampled)
    UpperBound(f64),
    Unconstrained,
}

impl Constraint {
    pub fn admits(&self, x: f64) -> bool {
        match *self {
            Constraint::Exact(v) => x == v,
            Constraint::UpperBound(b) => x < b,
            Constraint::Unconstrained => x >= 0.0,
        }
    }

    /// Every value admitted by `self` is admitted by `other`.
    pub fn within(&self, other: &Constraint) -> bool {
        match (*self, *other) {
            (_, Constraint::Unconstrained) => true,
            (Constraint::Exact(a), Constraint::Exact(b)) => a == b,
            (Constraint::Exact(a), Constraint::UpperBound(b)) => a < b,
            (Constraint::UpperBound(a), Constraint::UpperBound(b)) => a <= b,
            (Constraint::UpperBound(_), Constraint::Exact(_)) | (Constraint::Unconstrained, _) => false,
        }
    }
}

/// Constraint record describing every data vector that could have produced
/// an outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistentSet(pub Vec<Constraint>);

impl ConsistentSet {
    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.0.len() && self.0.iter().zip(v).all(|(c, &x)| c.admits(x))
    }

    pub fn is_subset_of(&self, other: &ConsistentSet) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.within(b))
    }
}

pub fn consistent_set(outcome: &Outcome, spec: &SamplingSpec) -> Result<ConsistentSet> {
    if let Some(r) = spec.r() {
        outcome.check_r(r)?;
    }
    let constraints = match &spec.scheme {
        Scheme::WeightedPps { tau_star } if spec.seeds_visible => {
            let seeds = outcome.require_seeds()?;
            outcome
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| match v {
                    Some(x) => Constraint::Exact(*x),
                    None => Constraint::UpperBound(seeds.get(i) * tau_star[i]),
                })
                .collect()
        }
        // bottom-k: unsampled entries depend on the other keys' ranks, so
        // nothing is inferred per key
        _ => outcome
            .values()
            .iter()
            .map(|v| v.map_or(Constraint::Unconstrained, Constraint::Exact))
            .collect(),
    };
    Ok(ConsistentSet(constraints))
}
