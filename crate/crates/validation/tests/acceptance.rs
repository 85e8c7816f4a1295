//! Acceptance checks. One line per criterion; the process exits nonzero if
//! any criterion fails. Tolerances are pinned here and printed with the
//! measured values.

use std::time::Instant;

use dispersed::aggregates::Selection;
use dispersed::experiments::{self, DistinctDesign};
use dispersed::oblivious::{self, OrKind, UVariant, VarEstimator};
use dispersed::oracle::{exact_moments, quad_moments};
use dispersed::solver::{self, FiniteProblem, FiniteScheme, OrderSpec, TableStatus};
use dispersed::weighted::{self, WsRegime};
use dispersed::{hash_seed, sampling, DataVector, FunctionTag, Outcome, SamplingSpec, SeedVector};

type Res<T> = Result<T, String>;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Res<Verdict> {
    Ok(Verdict { pass, detail })
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn dv(v: &[f64]) -> DataVector {
    DataVector::new(v.to_vec()).unwrap()
}

fn vmax(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn moments<F: Fn(&Outcome) -> dispersed::Result<f64>>(f: F, p: &[f64], v: &[f64]) -> Res<(f64, f64)> {
    let m = exact_moments(f, &SamplingSpec::oblivious(p.to_vec()).map_err(e)?, &dv(v)).map_err(e)?;
    Ok((m.mean, m.variance))
}

/// {0..4}^2 for r = 2; 25 hashed vectors over {0..4} for larger r (the zero
/// vector and an all-equal vector included).
fn grid(r: usize) -> Vec<Vec<f64>> {
    if r == 2 {
        return (0..25).map(|i| vec![(i / 5) as f64, (i % 5) as f64]).collect();
    }
    let mut g = vec![vec![0.0; r], vec![3.0; r]];
    let mut i = 0u64;
    while g.len() < 25 {
        let v: Vec<f64> = (0..r).map(|j| (hash_seed(0xACCE97 + r as u64, format!("{i}:{j}").as_bytes()) * 5.0).floor()).collect();
        if !g.contains(&v) {
            g.push(v);
        }
        i += 1;
    }
    g
}

fn binary_grid(r: usize) -> Vec<Vec<f64>> {
    (0..1u32 << r).map(|m| (0..r).map(|i| (m >> i & 1) as f64).collect()).collect()
}

const PS: [f64; 3] = [0.2, 0.5, 0.8];

fn c1() -> Res<Verdict> {
    const TOL: f64 = 1e-12;
    let t0 = Instant::now();
    let mut worst: (f64, String) = (0.0, String::new());
    let mut count = 0;
    let mut check = |name: &str, p: &[f64], v: &[f64], f: &dyn Fn(&Outcome) -> dispersed::Result<f64>| -> Res<()> {
        let (mean, _) = moments(f, p, v)?;
        let err = (mean - vmax(v)).abs();
        count += 1;
        if err > worst.0 {
            worst = (err, format!("{name} p={p:?} v={v:?}"));
        }
        Ok(())
    };
    for &p in &PS {
        for r in 2..=4 {
            let pv = vec![p; r];
            let c = oblivious::coeff_max_l_uniform(r, p).map_err(e)?;
            for v in grid(r) {
                check("HT", &pv, &v, &|o| oblivious::est_ht(o, &pv, FunctionTag::Max))?;
                check("max^L uniform", &pv, &v, &|o| oblivious::est_max_l_uniform(o, &c))?;
            }
            for v in binary_grid(r) {
                for k in [OrKind::Ht, OrKind::L] {
                    check(&format!("OR {k:?}"), &pv, &v, &|o| oblivious::est_or(o, &pv, k))?;
                }
            }
        }
        for &p2 in &PS {
            let pv = [p, p2];
            for v in grid(2) {
                check("max^L r=2", &pv, &v, &|o| oblivious::est_max_l_r2(o, p, p2))?;
                for variant in [UVariant::Symmetric, UVariant::Asymmetric] {
                    check(&format!("max^U {variant:?}"), &pv, &v, &|o| oblivious::est_max_u_r2(o, p, p2, variant))?;
                }
            }
            for v in binary_grid(2) {
                for k in [OrKind::Ht, OrKind::L, OrKind::U] {
                    check(&format!("OR {k:?}"), &pv, &v, &|o| oblivious::est_or(o, &pv, k))?;
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        worst.0 <= TOL && secs < 10.0,
        format!("{count} (estimator, p, v) cases, max |E−f| = {:.2e} at {} (tol {TOL:e}); {secs:.2} s (limit 10 s)", worst.0, worst.1),
    )
}

fn c2() -> Res<Verdict> {
    const TOL: f64 = 1e-12;
    let p = [0.5, 0.5];
    let mut worst = 0.0f64;
    for v in [1.0, 2.5, 7.0] {
        let (_, l_eq) = moments(|o| oblivious::est_max_l_r2(o, 0.5, 0.5), &p, &[v, v])?;
        let (_, l_zero) = moments(|o| oblivious::est_max_l_r2(o, 0.5, 0.5), &p, &[v, 0.0])?;
        let (_, ht) = moments(|o| oblivious::est_ht(o, &p, FunctionTag::Max), &p, &[v, v])?;
        let v2 = v * v;
        for (got, want) in [(l_eq, v2 / 3.0), (l_zero, 11.0 * v2 / 9.0), (ht, 3.0 * v2)] {
            worst = worst.max((got - want).abs() / v2);
        }
    }
    verdict(worst <= TOL, format!("VAR[max^L|(v,v)]=v²/3, VAR[max^L|(v,0)]=11v²/9, VAR[HT]=3v² for v∈{{1,2.5,7}}: max rel err {worst:.2e} (tol {TOL:e})"))
}

fn c3() -> Res<Verdict> {
    const TOL: f64 = 1e-12;
    let mut worst = 0.0f64;
    for i in 1..=19 {
        let p = 0.05 * i as f64;
        let pv = [p, p];
        let ht_closed = 1.0 / (p * p) - 1.0;
        let l11_closed = 1.0 / (2.0 * p - p * p) - 1.0;
        for v in [[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]] {
            let (_, var) = moments(|o| oblivious::est_or(o, &pv, OrKind::Ht), &pv, &v)?;
            let lib = oblivious::var_closed_form(&dv(&v), &pv, VarEstimator::Ht(FunctionTag::Or)).map_err(e)?.value;
            worst = worst.max((var - ht_closed).abs() / ht_closed.max(1.0)).max((lib - ht_closed).abs() / ht_closed.max(1.0));
        }
        let (_, var) = moments(|o| oblivious::est_or(o, &pv, OrKind::L), &pv, &[1.0, 1.0])?;
        let lib = oblivious::var_closed_form(&dv(&[1.0, 1.0]), &pv, VarEstimator::OrL).map_err(e)?.value;
        worst = worst.max((var - l11_closed).abs() / l11_closed.max(1.0)).max((lib - l11_closed).abs() / l11_closed.max(1.0));
        let (_, var) = moments(|o| oblivious::est_or(o, &pv, OrKind::L), &pv, &[1.0, 0.0])?;
        let lib = oblivious::var_closed_form(&dv(&[1.0, 0.0]), &pv, VarEstimator::OrL).map_err(e)?.value;
        worst = worst.max((var - lib).abs() / lib.max(1.0));
    }
    let p = 1e-3;
    let asym = oblivious::var_closed_form(&dv(&[1.0, 1.0]), &[p, p], VarEstimator::OrL).map_err(e)?.value * 2.0 * p;
    verdict(
        worst <= TOL && (0.9..=1.1).contains(&asym),
        format!("OR HT / OR^L closed forms vs enumeration, p=0.05..0.95: max rel err {worst:.2e} (tol {TOL:e}); VAR[OR^L|(1,1)]·2p at p=1e-3 = {asym:.4} (range [0.9, 1.1])"),
    )
}

fn c4() -> Res<Verdict> {
    const TOL: f64 = 1e-12;
    const RES_TOL: f64 = 1e-10;
    let mut coef_err = 0.0f64;
    let mut sum_err = 0.0f64;
    let mut res_worst = 0.0f64;
    let mut sign_ok = true;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    for i in 1..=9 {
        let p = 0.1 * i as f64;
        let q = 1.0 - p;
        let a2 = oblivious::coeff_max_l_uniform(2, p).map_err(e)?.alpha;
        let want2 = [1.0 / (p * p * (2.0 - p)), -q / (p * p * (2.0 - p))];
        let a3 = oblivious::coeff_max_l_uniform(3, p).map_err(e)?.alpha;
        let d3 = 3.0 - 3.0 * p + p * p;
        let want3 = [(2.0 - 2.0 * p + p * p) / (p.powi(3) * (2.0 - p) * d3), -q / (p.powi(3) * d3), -q * q / (p * p * (2.0 - p) * d3)];
        for (g, w) in a2.iter().zip(&want2).chain(a3.iter().zip(&want3)) {
            coef_err = coef_err.max(rel(*g, *w));
        }
        for r in 1..=50 {
            let c = oblivious::coeff_max_l_uniform(r, p).map_err(e)?;
            let total: f64 = c.alpha.iter().sum();
            let scale: f64 = c.alpha.iter().map(|a| a.abs()).sum();
            sum_err = sum_err.max((total - 1.0 / (1.0 - q.powi(r as i32))).abs() / scale);
            res_worst = oblivious::coefficient_residuals(&c).into_iter().fold(res_worst, f64::max);
            if r <= 4 {
                let a = &c.alpha;
                sign_ok &= a[0] > 0.0 && a[0] <= 1.0 / p.powi(r as i32) * (1.0 + 1e-12) && a[1..].iter().all(|x| *x < 0.0);
            }
        }
    }
    let t0 = Instant::now();
    let big = oblivious::coeff_max_l_uniform(2000, 0.9);
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        coef_err <= TOL && sum_err <= TOL && res_worst <= RES_TOL && sign_ok && big.is_ok() && secs < 1.0,
        format!(
            "r=2,3 forms max rel err {coef_err:.2e} (tol {TOL:e}); Σα rel err {sum_err:.2e} (relative to Σ|α|, tol {TOL:e}); residuals r≤50 max {res_worst:.2e} (tol {RES_TOL:e}); signs r≤4 {}; r=2000 (p=0.9) {} in {secs:.3} s (limit 1 s)",
            if sign_ok { "ok" } else { "VIOLATED" },
            if big.is_ok() { "solved" } else { "FAILED" }
        ),
    )
}

fn c5() -> Res<Verdict> {
    const MEAN_TOL: f64 = 1e-6;
    const RATIO_SLACK: f64 = 1e-3;
    const HT_TOL: f64 = 1e-9;
    let t0 = Instant::now();
    let shapes = [
        [0.5, 0.25],
        [0.25, 0.5],
        [0.9, 0.1],
        [0.3, 0.3],
        [0.7, 0.0],
        [1.5, 0.4],
        [0.4, 1.5],
        [2.5, 0.4],
        [2.5, 1.5],
        [3.5, 0.8],
        [4.0, 2.5],
        [1.2, 1.1],
        [0.05, 0.02],
    ];
    let mut points: Vec<([f64; 2], [f64; 2])> = vec![([0.0, 0.0], [1.0, 1.0])];
    for tau in [[1.0, 1.0], [1.0, 2.0], [3.0, 1.0]] {
        points.extend(shapes.iter().map(|v| (*v, tau)));
    }
    let mut regimes: Vec<WsRegime> = Vec::new();
    let (mut mean_worst, mut ht_worst) = (0.0f64, 0.0f64);
    let mut ratio_fail: Vec<String> = Vec::new();
    let mut ratio_min = f64::INFINITY;
    let mut ht_better: Vec<String> = Vec::new();
    let mut ratio_checked = 0;
    for (v, tau) in &points {
        let (a, b, ta, tb) = if v[0] >= v[1] { (v[0], v[1], tau[0], tau[1]) } else { (v[1], v[0], tau[1], tau[0]) };
        let reg = weighted::ws_regime(a, b, ta, tb);
        if !regimes.contains(&reg) {
            regimes.push(reg);
        }
        let l = quad_moments(|o| weighted::est_max_l_ws_r2(o, tau), tau, &dv(v), 1e-9).map_err(e)?;
        mean_worst = mean_worst.max((l.mean - a).abs());
        let ht = quad_moments(|o| weighted::est_max_ht_ws(o, tau), tau, &dv(v), 1e-11).map_err(e)?;
        if a > 0.0 && a < ta.min(tb) {
            let ratio = ht.variance / l.variance;
            // ρ = max(v)/τ* needs a common threshold; elsewhere only note
            // points where HT does better than L
            if ta == tb {
                let rho = a / ta;
                ratio_checked += 1;
                ratio_min = ratio_min.min(ratio);
                if ratio < (1.0 + rho) / rho - RATIO_SLACK {
                    ratio_fail.push(format!("v={v:?} τ*={tau:?}: {ratio:.3} < {:.3}", (1.0 + rho) / rho));
                }
                ht_worst = ht_worst.max((ht.variance / (ta * ta) - (1.0 - rho * rho)).abs());
            } else if ratio < 1.0 {
                ht_better.push(format!("v={v:?} τ*={tau:?}: {ratio:.3}"));
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let all_regimes = regimes.len() == 5;
    verdict(
        mean_worst <= MEAN_TOL && all_regimes && ratio_fail.is_empty() && ht_worst <= HT_TOL && secs < 60.0,
        format!(
            "{} points, {} regimes; max |E[max^L_ws]−max| = {mean_worst:.2e} (tol {MEAN_TOL:e}); HT var/τ*² vs 1−ρ²: {ht_worst:.2e} (tol {HT_TOL:e}); VAR[HT]/VAR[L] ≥ (1+ρ)/ρ−{RATIO_SLACK} at equal τ*: {} of {} interior points violate (min ratio {ratio_min:.3}{}); unequal τ* with VAR[HT] < VAR[L]: [{}]; {secs:.1} s (limit 60 s)",
            points.len(),
            regimes.len(),
            ratio_fail.len(),
            ratio_checked,
            ratio_fail.first().map(|s| format!(", e.g. {s}")).unwrap_or_default(),
            ht_better.join("; ")
        ),
    )
}

fn table_vs<F: Fn(&Outcome) -> dispersed::Result<f64>>(problem: &FiniteProblem, t: &solver::EstimatorTable, f: F) -> Res<f64> {
    if t.status != TableStatus::Ok {
        return Err(format!("solver status {:?}", t.status));
    }
    let mut worst = 0.0f64;
    for (c, x) in t.classes.iter().zip(&t.estimates) {
        let want = f(&c.to_outcome(&problem.scheme)).map_err(e)?;
        worst = worst.max((x.ok_or("unassigned class")? - want).abs());
    }
    Ok(worst)
}

fn c6() -> Res<Verdict> {
    const TOL: f64 = 1e-9;
    let (mut alg1, mut alg2, mut plus) = (0.0f64, 0.0f64, 0.0f64);
    for p in [[0.5, 0.5], [0.3, 0.7], [0.8, 0.2]] {
        let obl = FiniteScheme::Oblivious { p: p.to_vec() };
        let bin = solver::grid_domain(&[0.0, 1.0], 2).map_err(e)?;
        let grid = solver::grid_domain(&[0.0, 1.0, 2.0, 3.0], 2).map_err(e)?;

        let or = FiniteProblem::with_function(bin.clone(), FunctionTag::Or, obl.clone()).map_err(e)?;
        let t = solver::solve_order(&or, &OrderSpec::l_order(&bin)).map_err(e)?;
        alg1 = alg1.max(table_vs(&or, &t, |o| oblivious::est_or(o, &p, OrKind::L))?);
        let mx = FiniteProblem::with_function(grid.clone(), FunctionTag::Max, obl.clone()).map_err(e)?;
        let t = solver::solve_order(&mx, &OrderSpec::l_order(&grid)).map_err(e)?;
        alg1 = alg1.max(table_vs(&mx, &t, |o| oblivious::est_max_l_r2(o, p[0], p[1]))?);

        let t = solver::solve_partition(&or, &OrderSpec::by_positive_count(&bin), true).map_err(e)?;
        alg2 = alg2.max(table_vs(&or, &t, |o| oblivious::est_or(o, &p, OrKind::U))?);
        for w in [1.0, 2.5] {
            let d = solver::grid_domain(&[0.0, w], 2).map_err(e)?;
            let mx = FiniteProblem::with_function(d.clone(), FunctionTag::Max, obl.clone()).map_err(e)?;
            let t = solver::solve_partition(&mx, &OrderSpec::by_positive_count(&d), true).map_err(e)?;
            alg2 = alg2.max(table_vs(&mx, &t, |o| oblivious::est_max_u_r2(o, p[0], p[1], UVariant::Symmetric))?);

            // (0,0) ≺ (w,0) ≺ (0,w) ≺ (w,w)
            let pos = |v: [f64; 2]| d.iter().position(|x| x.values() == v).unwrap();
            let order = OrderSpec::TotalOrder(vec![pos([0.0, 0.0]), pos([w, 0.0]), pos([0.0, w]), pos([w, w])]);
            let t = solver::solve_order_nonneg(&mx, &order).map_err(e)?;
            plus = plus.max(table_vs(&mx, &t, |o| oblivious::est_max_u_r2(o, p[0], p[1], UVariant::Asymmetric))?);
        }
    }
    verdict(
        alg1 <= TOL && alg2 <= TOL && plus <= TOL,
        format!("p∈{{(.5,.5),(.3,.7),(.8,.2)}}: order vs OR^L/max^L {alg1:.2e}; symmetric partition vs OR^U/max^U {alg2:.2e}; nonneg order vs U_as {plus:.2e} (tol {TOL:e})"),
    )
}

fn c7() -> Res<Verdict> {
    const TOL: f64 = 1e-12;
    let d = solver::grid_domain(&[0.0, 1.0], 2).map_err(e)?;
    let problem = FiniteProblem::with_function(d.clone(), FunctionTag::Or, FiniteScheme::WeightedBinaryUnknownSeeds { p: vec![0.3, 0.3] }).map_err(e)?;
    let pos = |v: [f64; 2]| d.iter().position(|x| x.values() == v).unwrap();
    let order = OrderSpec::TotalOrder(vec![pos([0.0, 0.0]), pos([1.0, 0.0]), pos([0.0, 1.0]), pos([1.0, 1.0])]);
    let t = solver::solve_order(&problem, &order).map_err(e)?;
    let full = t.get("(1,1)").ok_or("no (1,1) class")?;
    // 1 = 2·(0.3·0.7)·(1/0.3) + 0.09·x
    let want = (1.0 - 2.0 * 0.21 / 0.3) / 0.09;
    let neg = matches!(t.status, TableStatus::NegativityViolated { .. });
    let nn = solver::solve_order_nonneg(&problem, &order).map_err(e)?;
    let failure = matches!(nn.status, TableStatus::Failure { .. });
    verdict(
        (full - want).abs() <= TOL && (want + 40.0 / 9.0).abs() <= TOL && neg && failure,
        format!("est((1,1)) = {full:.15} (want −40/9, tol {TOL:e}); status {}; nonneg variant {}", if neg { "NegativityViolated" } else { "NOT flagged" }, if failure { "Failure" } else { "NOT Failure" }),
    )
}

fn c8() -> Res<Verdict> {
    const TOL: f64 = 1e-12;
    let mut prob_equal = true;
    let mut est_worst = 0.0f64;
    let mut cells = 0;
    for &p1 in &PS {
        for &p2 in &PS {
            let p = vec![p1, p2];
            let d = solver::grid_domain(&[0.0, 1.0], 2).map_err(e)?;
            let obl = solver::enumerate_outcome_classes(&FiniteProblem::with_function(d.clone(), FunctionTag::Or, FiniteScheme::Oblivious { p: p.clone() }).map_err(e)?).map_err(e)?;
            let ws = solver::enumerate_outcome_classes(&FiniteProblem::with_function(d.clone(), FunctionTag::Or, FiniteScheme::WeightedBinaryKnownSeeds { p: p.clone() }).map_err(e)?).map_err(e)?;
            for (ci, c) in ws.classes.iter().enumerate() {
                match obl.classes.iter().position(|x| x == c) {
                    Some(oi) => prob_equal &= (0..d.len()).all(|v| ws.prob[v][ci] == obl.prob[v][oi]),
                    None => prob_equal = false,
                }
            }
            prob_equal &= ws.classes.len() == obl.classes.len();
            let tau: Vec<f64> = p.iter().map(|x| 1.0 / x).collect();
            for v in binary_grid(2) {
                for i in 0..10 {
                    for j in 0..10 {
                        let u = SeedVector::new(vec![(i as f64 + 0.5) / 10.0, (j as f64 + 0.5) / 10.0]).map_err(e)?;
                        let o = sampling::sample_pps(&dv(&v), &tau, &u, true).map_err(e)?;
                        for k in [OrKind::Ht, OrKind::L, OrKind::U] {
                            let a = weighted::est_or_ws(&o, &p, k).map_err(e)?;
                            let b = weighted::est_or_ws_table(&o, &p, k).map_err(e)?;
                            est_worst = est_worst.max((a - b).abs());
                        }
                        cells += 1;
                    }
                }
            }
        }
    }
    verdict(
        prob_equal && est_worst <= TOL,
        format!("class probabilities weighted-known-seeds vs oblivious: {}; mapped vs table OR estimates over {cells} seed cells: max diff {est_worst:.2e} (tol {TOL:e})", if prob_equal { "identical" } else { "DIFFER" }),
    )
}

fn c9() -> Res<Verdict> {
    const VAR_TOL: f64 = 0.10;
    let t0 = Instant::now();
    let n = 10_000;
    // J = I / (2n − I) = 1/2
    let inter = (2 * n + 1) / 3;
    let (a, b) = experiments::synthetic_sets(n, inter).map_err(e)?;
    let mc = experiments::distinct_mc(&a, &b, DistinctDesign::Poisson { p: 0.1 }, &Selection::All, 1000, 0x5EED).map_err(e)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s, pred) in [("HT", mc.ht, mc.predicted_ht), ("L", mc.l, mc.predicted_l)] {
        let pred = pred.ok_or("no prediction")?;
        let z = (s.mean - mc.truth) / s.stderr;
        let vr = s.variance / pred;
        ok &= z.abs() <= 3.0 && (vr - 1.0).abs() <= VAR_TOL;
        parts.push(format!("{name}: mean {:.1} (z={z:+.2}), var/pred {vr:.3}", s.mean));
    }
    let row = experiments::fig6(&[1e8], 0.0, 0.1).map_err(e)?[0];
    ok &= (0.45..=0.55).contains(&row.ratio);
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    verdict(
        ok,
        format!(
            "truth {} (J={:.4}); {} (|z| ≤ 3, var within {:.0}%); s_L/s_HT at J=0, N=1e8 = {:.4} (range [0.45, 0.55]); {secs:.1} s (limit 60 s)",
            mc.truth,
            mc.jaccard,
            parts.join("; "),
            VAR_TOL * 100.0,
            row.ratio
        ),
    )
}

fn c10() -> Res<Verdict> {
    const RATIO_MIN: f64 = 2.0;
    let (a, b) = experiments::synthetic_weighted_pair(10_000, 1).map_err(e)?;
    let rates = [0.01, 0.02, 0.05, 0.1, 0.2];
    let rows = experiments::maxdom_mc(&a, &b, &rates, 200, 0x5EED).map_err(e)?;
    let ratio_min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let mono = |f: fn(&experiments::MaxdomRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let (mono_ht, mono_l) = (mono(|r| r.nvar_ht), mono(|r| r.nvar_l));
    verdict(
        ratio_min >= RATIO_MIN && mono_ht && mono_l,
        format!(
            "rates {rates:?}, 200 trials: VAR[HT]/VAR[L] per rate [{}] (min {ratio_min:.3}, need ≥ {RATIO_MIN}); normalized variance decreasing: HT {}, L {}",
            rows.iter().map(|r| format!("{:.2}", r.ratio)).collect::<Vec<_>>().join(", "),
            mono_ht,
            mono_l
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Res<Verdict>); 10] = [
        ("exact unbiasedness of the oblivious estimators", c1),
        ("variance values at p=1/2, r=2", c2),
        ("OR variance closed forms and small-p asymptotics", c3),
        ("uniform-p coefficient recursion", c4),
        ("weighted known-seeds max estimators", c5),
        ("solver reproduces the closed-form tables", c6),
        ("signed solution without seed information", c7),
        ("binary weighted/oblivious equivalence", c8),
        ("distinct count Monte Carlo", c9),
        ("synthetic max dominance", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let v = f().unwrap_or_else(|msg| Verdict { pass: false, detail: format!("error: {msg}") });
        if !v.pass {
            failed += 1;
        }
        println!("[{}] {:>2}. {name} — {} ({:.1} s)", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail, t0.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
