//! Order-based optimal estimators over finite domains.
//!
//! Outcomes are grouped into classes (outcomes no estimator can tell apart),
//! and an estimator is a table class → value. Vectors are processed in a
//! user-supplied order; each fixes the estimate on the classes it is the
//! first to be consistent with.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_probs, DataVector, FunctionTag, Outcome, SamplingSpec, Scheme, SeedVector};
use crate::qp::Qp;

/// Absolute tolerance for unbiasedness and sign decisions.
pub const SOLVER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiniteScheme {
    Oblivious { p: Vec<f64> },
    /// binary data, PPS with p_i = min{1, 1/τ_i*}, seeds visible
    WeightedBinaryKnownSeeds { p: Vec<f64> },
    WeightedBinaryUnknownSeeds { p: Vec<f64> },
}

impl FiniteScheme {
    pub fn p(&self) -> &[f64] {
        match self {
            FiniteScheme::Oblivious { p } | FiniteScheme::WeightedBinaryKnownSeeds { p } | FiniteScheme::WeightedBinaryUnknownSeeds { p } => p,
        }
    }

    fn is_binary_weighted(&self) -> bool {
        !matches!(self, FiniteScheme::Oblivious { .. })
    }

    pub fn from_spec(spec: &SamplingSpec) -> Result<Self> {
        spec.validate()?;
        match &spec.scheme {
            Scheme::ObliviousPoisson { p } => Ok(FiniteScheme::Oblivious { p: p.clone() }),
            Scheme::WeightedPps { tau_star } => {
                let p = tau_star.iter().map(|t| (1.0 / t).min(1.0)).collect();
                Ok(if spec.seeds_visible { FiniteScheme::WeightedBinaryKnownSeeds { p } } else { FiniteScheme::WeightedBinaryUnknownSeeds { p } })
            }
            Scheme::BottomK { .. } => Err(Error::Unsupported("bottom-k has no per-key finite outcome classes".into())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiniteProblem {
    pub domain: Vec<DataVector>,
    pub f: Vec<f64>,
    pub scheme: FiniteScheme,
}

impl FiniteProblem {
    pub fn new(domain: Vec<DataVector>, f: Vec<f64>, scheme: FiniteScheme) -> Result<Self> {
        check_probs(scheme.p())?;
        if domain.is_empty() {
            return Err(Error::InvalidData("empty domain".into()));
        }
        if f.len() != domain.len() {
            return Err(Error::LengthMismatch { expected: domain.len(), got: f.len() });
        }
        if let Some(x) = f.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidData(format!("target value {x} must be finite and nonnegative")));
        }
        let r = scheme.p().len();
        for v in &domain {
            if v.r() != r {
                return Err(Error::LengthMismatch { expected: r, got: v.r() });
            }
            if scheme.is_binary_weighted() && !v.is_binary() {
                return Err(Error::Unsupported("weighted finite schemes require a binary domain".into()));
            }
        }
        Ok(Self { domain, f, scheme })
    }

    pub fn with_function(domain: Vec<DataVector>, func: FunctionTag, scheme: FiniteScheme) -> Result<Self> {
        let f = domain.iter().map(|v| func.eval(v.values())).collect();
        Self::new(domain, f, scheme)
    }

    pub fn r(&self) -> usize {
        self.scheme.p().len()
    }
}

/// All vectors of length r over the given value set, in lexicographic order.
pub fn grid_domain(values: &[f64], r: usize) -> Result<Vec<DataVector>> {
    let n = values.len();
    let total = n.checked_pow(r as u32).ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
    (0..total)
        .map(|mut idx| {
            let mut v = vec![0.0; r];
            for slot in v.iter_mut().rev() {
                *slot = values[idx % n];
                idx /= n;
            }
            DataVector::new(v)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassEntry {
    Unsampled,
    Value(f64),
}

/// Information an estimator sees: per entry, a known value or nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeClass(pub Vec<ClassEntry>);

impl OutcomeClass {
    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|e| match e {
                ClassEntry::Unsampled => "?".to_string(),
                ClassEntry::Value(x) => x.to_string(),
            })
            .collect();
        format!("({})", parts.join(","))
    }

    fn key(&self) -> Vec<Option<u64>> {
        self.0
            .iter()
            .map(|e| match e {
                ClassEntry::Unsampled => None,
                ClassEntry::Value(x) => Some((x + 0.0).to_bits()),
            })
            .collect()
    }

    /// A representative outcome of this class under the scheme.
    pub fn to_outcome(&self, scheme: &FiniteScheme) -> Outcome {
        let p = scheme.p();
        let entries = self.0.iter();
        match scheme {
            FiniteScheme::Oblivious { .. } => {
                Outcome::new(entries.map(|e| if let ClassEntry::Value(x) = e { Some(*x) } else { None }).collect(), None)
            }
            FiniteScheme::WeightedBinaryKnownSeeds { .. } => {
                let values = entries.clone().map(|e| if *e == ClassEntry::Value(1.0) { Some(1.0) } else { None }).collect();
                let seeds = entries.zip(p).map(|(e, p)| if *e == ClassEntry::Unsampled { (1.0 + p) / 2.0 } else { p / 2.0 }).collect();
                Outcome::new(values, Some(SeedVector::new(seeds).expect("cell midpoints lie in [0,1)")))
            }
            FiniteScheme::WeightedBinaryUnknownSeeds { .. } => {
                Outcome::new(entries.map(|e| if *e == ClassEntry::Value(1.0) { Some(1.0) } else { None }).collect(), None)
            }
        }
        .expect("class values are valid")
    }
}

/// Outcome classes with PR[class | v] for every domain vector.
#[derive(Debug, Clone)]
pub struct ClassTable {
    pub classes: Vec<OutcomeClass>,
    /// prob[v][c]
    pub prob: Vec<Vec<f64>>,
}

pub fn enumerate_outcome_classes(problem: &FiniteProblem) -> Result<ClassTable> {
    let r = problem.r();
    if r > 16 {
        return Err(Error::Unsupported(format!("enumeration over 2^{r} patterns")));
    }
    let p = problem.scheme.p();
    let unknown = matches!(problem.scheme, FiniteScheme::WeightedBinaryUnknownSeeds { .. });
    let mut index: HashMap<Vec<Option<u64>>, usize> = HashMap::new();
    let mut classes = Vec::new();
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    for v in &problem.domain {
        let mut row = Vec::new();
        for mask in 0u32..(1 << r) {
            // bit set: entry in its low cell (sampled, or a known zero)
            let low = |i: usize| mask >> i & 1 == 1;
            let pr: f64 = (0..r).map(|i| if low(i) { p[i] } else { 1.0 - p[i] }).product();
            if pr == 0.0 {
                continue;
            }
            let class = OutcomeClass(
                (0..r)
                    .map(|i| {
                        let x = v.values()[i];
                        match (low(i), unknown) {
                            (true, true) if x == 0.0 => ClassEntry::Unsampled,
                            (true, _) => ClassEntry::Value(x),
                            (false, _) => ClassEntry::Unsampled,
                        }
                    })
                    .collect(),
            );
            let c = *index.entry(class.key()).or_insert_with(|| {
                classes.push(class.clone());
                classes.len() - 1
            });
            row.push((c, pr));
        }
        sparse.push(row);
    }
    let prob = sparse
        .into_iter()
        .map(|row| {
            let mut dense = vec![0.0; classes.len()];
            for (c, pr) in row {
                dense[c] += pr;
            }
            dense
        })
        .collect();
    Ok(ClassTable { classes, prob })
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderSpec {
    /// domain indices, earliest first
    TotalOrder(Vec<usize>),
    /// score per domain vector; lower first, equal scores form one group
    KeyedOrder(Vec<f64>),
    /// ordered batches of domain indices
    Partition(Vec<Vec<usize>>),
}

impl OrderSpec {
    pub fn keyed_by(domain: &[DataVector], score: impl Fn(&DataVector) -> f64) -> Self {
        OrderSpec::KeyedOrder(domain.iter().map(score).collect())
    }

    /// Zero first, then by number of entries below the maximum.
    pub fn l_order(domain: &[DataVector]) -> Self {
        Self::keyed_by(domain, |v| v.l_score() as f64)
    }

    /// Batches by number of positive entries.
    pub fn by_positive_count(domain: &[DataVector]) -> Self {
        let r = domain.first().map_or(0, DataVector::r);
        let mut batches = vec![Vec::new(); r + 1];
        for (i, v) in domain.iter().enumerate() {
            batches[v.values().iter().filter(|&&x| x > 0.0).count()].push(i);
        }
        OrderSpec::Partition(batches.into_iter().filter(|b| !b.is_empty()).collect())
    }

    /// Groups of domain indices in processing order.
    fn groups(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        let check_cover = |groups: &[Vec<usize>]| {
            let mut seen = vec![false; n];
            for &i in groups.iter().flatten() {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidParameter(format!("order lists vector {i} twice or out of range")));
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidParameter("order does not cover the domain".into()));
            }
            Ok(())
        };
        let groups = match self {
            OrderSpec::TotalOrder(rank) => rank.iter().map(|&i| vec![i]).collect(),
            OrderSpec::Partition(batches) => batches.clone(),
            OrderSpec::KeyedOrder(scores) => {
                if scores.len() != n {
                    return Err(Error::LengthMismatch { expected: n, got: scores.len() });
                }
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
                let mut groups: Vec<Vec<usize>> = Vec::new();
                for i in idx {
                    match groups.last_mut() {
                        Some(g) if scores[g[0]] == scores[i] => g.push(i),
                        _ => groups.push(vec![i]),
                    }
                }
                groups
            }
        };
        check_cover(&groups)?;
        Ok(groups)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableStatus {
    Ok,
    /// no unbiased estimator exists along the order: the vector has no
    /// undetermined outcomes left but its expectation is off
    Failure { vector: Vec<f64> },
    /// an unbiased table exists but assigns a negative estimate
    NegativityViolated { vector: Vec<f64>, class: String, value: f64 },
}

#[derive(Debug, Clone)]
pub struct EstimatorTable {
    pub classes: Vec<OutcomeClass>,
    /// None for classes never reached (after a failure)
    pub estimates: Vec<Option<f64>>,
    pub status: TableStatus,
}

impl EstimatorTable {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.classes.iter().position(|c| c.label() == label).and_then(|i| self.estimates[i])
    }

    /// max over domain vectors of |E[est | v] − f(v)|.
    pub fn unbiasedness_residual(&self, table: &ClassTable, problem: &FiniteProblem) -> f64 {
        table
            .prob
            .iter()
            .zip(&problem.f)
            .map(|(row, f)| {
                let e: f64 = row.iter().zip(&self.estimates).map(|(p, x)| p * x.unwrap_or(f64::NAN)).filter(|x| !x.is_nan()).sum();
                (e - f).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Variance of the table's estimator on domain vector `v`.
    pub fn variance(&self, table: &ClassTable, problem: &FiniteProblem, v: usize) -> f64 {
        let f = problem.f[v];
        table.prob[v].iter().zip(&self.estimates).map(|(p, x)| if *p > 0.0 { p * (x.unwrap_or(0.0) - f).powi(2) } else { 0.0 }).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record(["outcome_class", "estimate"]).map_err(io)?;
        for (c, e) in self.classes.iter().zip(&self.estimates) {
            wr.write_record([c.label(), e.map_or(String::new(), |x| x.to_string())]).map_err(io)?;
        }
        wr.flush()?;
        Ok(())
    }
}

struct State<'a> {
    problem: &'a FiniteProblem,
    table: &'a ClassTable,
    est: Vec<Option<f64>>,
    status: TableStatus,
}

impl<'a> State<'a> {
    fn new(problem: &'a FiniteProblem, table: &'a ClassTable) -> Self {
        Self { problem, table, est: vec![None; table.classes.len()], status: TableStatus::Ok }
    }

    fn open_classes(&self, v: usize) -> Vec<usize> {
        (0..self.est.len()).filter(|&c| self.table.prob[v][c] > 0.0 && self.est[c].is_none()).collect()
    }

    /// Expectation contributed by already-assigned classes.
    fn f0(&self, v: usize) -> f64 {
        self.table.prob[v].iter().zip(&self.est).map(|(p, x)| x.map_or(0.0, |x| p * x)).sum()
    }

    fn tol(&self, v: usize) -> f64 {
        SOLVER_TOL * (1.0 + self.problem.f[v].abs())
    }

    fn fail(mut self, v: usize) -> EstimatorTable {
        self.status = TableStatus::Failure { vector: self.problem.domain[v].values().to_vec() };
        self.finish()
    }

    fn assign(&mut self, v: usize, c: usize, x: f64) {
        self.est[c] = Some(x);
        if x < -SOLVER_TOL && self.status == TableStatus::Ok {
            self.status = TableStatus::NegativityViolated {
                vector: self.problem.domain[v].values().to_vec(),
                class: self.table.classes[c].label(),
                value: x,
            };
        }
    }

    fn finish(self) -> EstimatorTable {
        EstimatorTable { classes: self.table.classes.clone(), estimates: self.est, status: self.status }
    }

    /// Open classes per group member, rejecting groups that share one.
    fn group_classes(&self, group: &[usize]) -> Result<Vec<Vec<usize>>> {
        let sets: Vec<Vec<usize>> = group.iter().map(|&v| self.open_classes(v)).collect();
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for (k, set) in sets.iter().enumerate() {
            for &c in set {
                if let Some(other) = owner.insert(c, k) {
                    return Err(Error::AmbiguousOrder(format!(
                        "vectors {:?} and {:?} share the undetermined outcome {}",
                        self.problem.domain[group[other]].values(),
                        self.problem.domain[group[k]].values(),
                        self.table.classes[c].label()
                    )));
                }
            }
        }
        Ok(sets)
    }
}

fn reject_partition(order: &OrderSpec) -> Result<()> {
    if matches!(order, OrderSpec::Partition(_)) {
        return Err(Error::InvalidParameter("use solve_partition for batch orders".into()));
    }
    Ok(())
}

/// Unconstrained order-based estimator: each vector spreads its residual
/// expectation evenly (as a constant) over its newly determined outcomes.
pub fn solve_order(problem: &FiniteProblem, order: &OrderSpec) -> Result<EstimatorTable> {
    reject_partition(order)?;
    let table = enumerate_outcome_classes(problem)?;
    let groups = order.groups(problem.domain.len())?;
    let mut st = State::new(problem, &table);
    for group in &groups {
        let sets = st.group_classes(group)?;
        let f0: Vec<f64> = group.iter().map(|&v| st.f0(v)).collect();
        for ((&v, open), f0) in group.iter().zip(&sets).zip(f0) {
            let residual = problem.f[v] - f0;
            let pr: f64 = open.iter().map(|&c| table.prob[v][c]).sum();
            if open.is_empty() {
                if residual.abs() > st.tol(v) {
                    return Ok(st.fail(v));
                }
                continue;
            }
            for &c in open {
                st.assign(v, c, residual / pr);
            }
        }
    }
    Ok(st.finish())
}

/// Order-based estimator with nonnegativity: each vector minimizes its own
/// variance subject to unbiasedness, estimates ≥ 0, and keeping every later
/// vector's accumulated expectation at most its target.
pub fn solve_order_nonneg(problem: &FiniteProblem, order: &OrderSpec) -> Result<EstimatorTable> {
    reject_partition(order)?;
    let table = enumerate_outcome_classes(problem)?;
    let groups = order.groups(problem.domain.len())?;
    let flat: Vec<usize> = groups.iter().flatten().copied().collect();
    let mut st = State::new(problem, &table);
    let mut pos = 0;
    for group in &groups {
        st.group_classes(group)?;
        for &v in group {
            pos += 1;
            let open = st.open_classes(v);
            let target = problem.f[v];
            let residual = target - st.f0(v);
            if open.is_empty() {
                if residual.abs() > st.tol(v) {
                    return Ok(st.fail(v));
                }
                continue;
            }
            let w: Vec<f64> = open.iter().map(|&c| table.prob[v][c]).collect();
            let mut qp = Qp::weighted_least_squares(&w, &vec![target; open.len()]);
            qp.eq.push((w.clone(), residual));
            if !add_later_constraints(&st, &mut qp, &open, &flat[pos..]) {
                return Ok(st.fail(v));
            }
            add_bounds(&mut qp, open.len());
            match qp.solve() {
                Ok(sol) => {
                    for (&c, x) in open.iter().zip(sol.x) {
                        st.assign(v, c, x);
                    }
                }
                Err(Error::Infeasible(_)) => return Ok(st.fail(v)),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(st.finish())
}

/// E[est | w] ≤ f(w) for every later vector w. Returns false if a later
/// vector is already over its target through fixed classes only.
fn add_later_constraints(st: &State, qp: &mut Qp, vars: &[usize], later: &[usize]) -> bool {
    for &w in later {
        let row: Vec<f64> = vars.iter().map(|&c| st.table.prob[w][c]).collect();
        let slack = st.problem.f[w] - st.f0(w);
        if row.iter().all(|&x| x == 0.0) {
            if slack < -st.tol(w) {
                return false;
            }
            continue;
        }
        qp.le.push((row, slack));
    }
    true
}

fn add_bounds(qp: &mut Qp, n: usize) {
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = -1.0;
        qp.le.push((row, 0.0));
    }
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(r - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, r - 1);
            out.push(p);
        }
    }
    out
}

/// Batch estimator: per batch, minimize the sum of the batch vectors'
/// variances subject to unbiasedness on the batch, nonnegativity, and the
/// expectation caps of later batches. With `symmetric`, estimates are tied
/// across coordinate permutations that leave the sampling probabilities
/// unchanged.
pub fn solve_partition(problem: &FiniteProblem, order: &OrderSpec, symmetric: bool) -> Result<EstimatorTable> {
    let OrderSpec::Partition(_) = order else {
        return Err(Error::InvalidParameter("solve_partition needs a partition order".into()));
    };
    let table = enumerate_outcome_classes(problem)?;
    let groups = order.groups(problem.domain.len())?;
    let r = problem.r();
    if symmetric && r > 8 {
        return Err(Error::Unsupported("symmetry constraints are enumerated for r ≤ 8".into()));
    }
    let p = problem.scheme.p();
    let perms: Vec<Vec<usize>> = if symmetric {
        permutations(r).into_iter().filter(|s| s.iter().enumerate().any(|(i, &j)| i != j) && s.iter().enumerate().all(|(i, &j)| p[i] == p[j])).collect()
    } else {
        Vec::new()
    };
    let keys: HashMap<Vec<Option<u64>>, usize> = table.classes.iter().enumerate().map(|(i, c)| (c.key(), i)).collect();
    let mut st = State::new(problem, &table);
    let mut done = 0;
    for group in &groups {
        done += group.len();
        let mut vars: Vec<usize> = Vec::new();
        for &v in group {
            for c in st.open_classes(v) {
                if !vars.contains(&c) {
                    vars.push(c);
                }
            }
        }
        vars.sort_unstable();
        let col: HashMap<usize, usize> = vars.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let w: Vec<f64> = vars.iter().map(|&c| group.iter().map(|&v| table.prob[v][c]).sum()).collect();
        let mut qp = Qp::weighted_least_squares(&w, &vec![0.0; vars.len()]);
        for &v in group {
            let row: Vec<f64> = vars.iter().map(|&c| table.prob[v][c]).collect();
            let residual = problem.f[v] - st.f0(v);
            if row.iter().all(|&x| x == 0.0) {
                if residual.abs() > st.tol(v) {
                    return Ok(st.fail(v));
                }
                continue;
            }
            qp.eq.push((row, residual));
        }
        for s in &perms {
            for (k, &c) in vars.iter().enumerate() {
                let image = OutcomeClass((0..r).map(|i| table.classes[c].0[s[i]]).collect());
                if let Some(&k2) = keys.get(&image.key()).and_then(|c2| col.get(c2)) {
                    if k2 > k {
                        let mut row = vec![0.0; vars.len()];
                        row[k] = 1.0;
                        row[k2] = -1.0;
                        qp.eq.push((row, 0.0));
                    }
                }
            }
        }
        let later: Vec<usize> = groups.iter().flatten().skip(done).copied().collect();
        if !add_later_constraints(&st, &mut qp, &vars, &later) {
            return Ok(st.fail(group[0]));
        }
        add_bounds(&mut qp, vars.len());
        if vars.is_empty() {
            continue;
        }
        match qp.solve() {
            Ok(sol) => {
                for (&c, x) in vars.iter().zip(sol.x) {
                    st.assign(group[0], c, x);
                }
            }
            Err(Error::Infeasible(_)) => return Ok(st.fail(group[0])),
            Err(e) => return Err(e),
        }
    }
    Ok(st.finish())
}

/// Problem file: domain, targets (explicit or by function), scheme, and how
/// to order the domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub domain: Vec<Vec<f64>>,
    #[serde(default)]
    pub f: Option<Vec<f64>>,
    #[serde(default)]
    pub function: Option<FunctionTag>,
    pub scheme: SamplingSpec,
    pub order: OrderFile,
    #[serde(default)]
    pub method: SolveMethod,
    #[serde(default)]
    pub symmetric: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderFile {
    Total { ranking: Vec<usize> },
    Keyed { scores: Vec<f64> },
    /// zero first, then by number of entries below the max
    LScore,
    Partition { batches: Vec<Vec<usize>> },
    /// batches by number of positive entries
    PositiveCount,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    #[default]
    Order,
    Nonneg,
    Partition,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }

    pub fn build(&self) -> Result<(FiniteProblem, OrderSpec)> {
        let domain = self.domain.iter().map(|v| DataVector::new(v.clone())).collect::<Result<Vec<_>>>()?;
        let scheme = FiniteScheme::from_spec(&self.scheme)?;
        let problem = match (&self.f, self.function) {
            (Some(f), _) => FiniteProblem::new(domain, f.clone(), scheme)?,
            (None, Some(func)) => FiniteProblem::with_function(domain, func, scheme)?,
            (None, None) => return Err(Error::InvalidData("problem needs `f` or `function`".into())),
        };
        let order = match &self.order {
            OrderFile::Total { ranking } => OrderSpec::TotalOrder(ranking.clone()),
            OrderFile::Keyed { scores } => OrderSpec::KeyedOrder(scores.clone()),
            OrderFile::LScore => OrderSpec::l_order(&problem.domain),
            OrderFile::Partition { batches } => OrderSpec::Partition(batches.clone()),
            OrderFile::PositiveCount => OrderSpec::by_positive_count(&problem.domain),
        };
        Ok((problem, order))
    }

    pub fn solve(&self) -> Result<EstimatorTable> {
        let (problem, order) = self.build()?;
        match self.method {
            SolveMethod::Order => solve_order(&problem, &order),
            SolveMethod::Nonneg => solve_order_nonneg(&problem, &order),
            SolveMethod::Partition => solve_partition(&problem, &order, self.symmetric),
        }
    }
}
