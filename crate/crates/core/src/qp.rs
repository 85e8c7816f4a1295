//! Small dense strictly convex quadratic programs
//!
//!   minimize ½ xᵀGx + aᵀx  subject to  Eᵢx = eᵢ,  Cⱼx ≤ cⱼ
//!
//! solved with the Goldfarb–Idnani dual active-set method. Starting from the
//! unconstrained minimizer, violated constraints are added one at a time
//! (equalities first, never dropped); inequalities whose multipliers would
//! turn negative are dropped. Every solution is checked against the KKT
//! conditions before it is returned.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Qp {
    pub g: DMatrix<f64>,
    pub a: DVector<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub le: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// KKT stationarity residual (∞-norm, relative)
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// KKT acceptance threshold.
pub const KKT_TOL: f64 = 1e-9;

/// Active constraint written as nᵀx ≥ b (equalities keep their row).
#[derive(Debug, Clone)]
struct Active {
    n: DVector<f64>,
    b: f64,
    is_eq: bool,
}

impl Qp {
    /// Diagonal objective Σ wᵢ(xᵢ − tᵢ)² (up to a constant).
    pub fn weighted_least_squares(w: &[f64], target: &[f64]) -> Self {
        let n = w.len();
        let g = DMatrix::from_diagonal(&DVector::from_iterator(n, w.iter().map(|x| 2.0 * x)));
        let a = DVector::from_iterator(n, w.iter().zip(target).map(|(w, t)| -2.0 * w * t));
        Self { g, a, eq: Vec::new(), le: Vec::new() }
    }

    pub fn solve(&self) -> Result<QpSolution> {
        let n = self.a.len();
        if n == 0 {
            let bad = self.eq.iter().any(|(_, e)| e.abs() > KKT_TOL) || self.le.iter().any(|(_, c)| *c < -KKT_TOL);
            if bad {
                return Err(Error::Infeasible("constraints on an empty variable set are violated".into()));
            }
            return Ok(QpSolution { x: Vec::new(), kkt_residual: 0.0, iterations: 0 });
        }
        let chol = self.g.clone().cholesky().ok_or_else(|| Error::InvalidParameter("QP objective is not positive definite".into()))?;
        let ginv = chol.inverse();
        let mut x = -(&ginv * &self.a);
        let scale = 1.0 + self.a.amax() + self.g.amax();

        let rows: Vec<Active> = self
            .eq
            .iter()
            .map(|(r, b)| Active { n: DVector::from_column_slice(r), b: *b, is_eq: true })
            .chain(self.le.iter().map(|(r, b)| Active { n: -DVector::from_column_slice(r), b: -b, is_eq: false }))
            .collect();
        for r in &rows {
            if r.n.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: r.n.len() });
            }
        }

        let mut active: Vec<Active> = Vec::new();
        let mut u: Vec<f64> = Vec::new();
        let mut done_eq = vec![false; self.eq.len()];
        let max_iter = 50 * (n + rows.len()) + 100;
        let mut iterations = 0;

        loop {
            // pick a violated constraint: pending equalities first, then the most violated inequality
            let mut pick: Option<(usize, Active)> = None;
            for (k, done) in done_eq.iter().enumerate() {
                if !done {
                    let r = &rows[k];
                    let s = r.n.dot(&x) - r.b;
                    let cand = if s > 0.0 { Active { n: -&r.n, b: -r.b, is_eq: true } } else { r.clone() };
                    pick = Some((k, cand));
                    break;
                }
            }
            if pick.is_none() {
                let mut worst = 0.0;
                for (k, r) in rows.iter().enumerate().skip(self.eq.len()) {
                    let s = r.n.dot(&x) - r.b;
                    if s < -feas_tol(r, &x) && s / (1.0 + r.n.norm()) < worst {
                        worst = s / (1.0 + r.n.norm());
                        pick = Some((k, r.clone()));
                    }
                }
            }
            let Some((k, np)) = pick else { break };

            let mut u_plus = 0.0;
            loop {
                iterations += 1;
                if iterations > max_iter {
                    return Err(Error::Infeasible("QP active-set iteration limit reached".into()));
                }
                let s = np.n.dot(&x) - np.b;
                let (z, r) = step_direction(&ginv, &active, &np.n)?;
                let zn = z.dot(&np.n);
                let z_small = z.amax() <= 1e-12 * (1.0 + np.n.amax()) * ginv.amax().max(1.0);
                // partial step: largest move keeping inequality multipliers ≥ 0
                let mut t1 = f64::INFINITY;
                let mut drop = None;
                for (j, aj) in active.iter().enumerate() {
                    if !aj.is_eq && r[j] > 0.0 {
                        let t = u[j] / r[j];
                        if t < t1 {
                            t1 = t;
                            drop = Some(j);
                        }
                    }
                }
                if z_small {
                    if s.abs() <= feas_tol(&np, &x) && np.is_eq {
                        // implied by the active equalities
                        break;
                    }
                    let Some(j) = drop else {
                        return Err(Error::Infeasible("constraints are inconsistent".into()));
                    };
                    for (i, ui) in u.iter_mut().enumerate() {
                        *ui -= t1 * r[i];
                    }
                    u_plus += t1;
                    active.remove(j);
                    u.remove(j);
                    continue;
                }
                let t2 = if s >= 0.0 { 0.0 } else { -s / zn };
                let t = t1.min(t2);
                x += &z * t;
                for (i, ui) in u.iter_mut().enumerate() {
                    *ui -= t * r[i];
                }
                u_plus += t;
                if t2 <= t1 {
                    active.push(np.clone());
                    u.push(u_plus);
                    break;
                }
                let j = drop.expect("finite partial step has a blocking constraint");
                active.remove(j);
                u.remove(j);
            }
            if k < self.eq.len() {
                done_eq[k] = true;
            }
        }

        // verify KKT: Gx + a = Σ u_j n_j, u_j ≥ 0 for inequalities, feasibility
        let mut grad = &self.g * &x + &self.a;
        for (aj, uj) in active.iter().zip(&u) {
            grad -= &aj.n * *uj;
        }
        let kkt_residual = grad.amax() / scale;
        let dual_ok = active.iter().zip(&u).all(|(a, &uj)| a.is_eq || uj >= -KKT_TOL * scale);
        let primal = rows
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let s = r.n.dot(&x) - r.b;
                let viol = if k < self.eq.len() { s.abs() } else { (-s).max(0.0) };
                viol / (1.0 + r.b.abs() + r.n.amax() * x_scale(&x))
            })
            .fold(0.0, f64::max);
        if kkt_residual > KKT_TOL || !dual_ok || primal > KKT_TOL {
            return Err(Error::Infeasible(format!(
                "QP solution failed KKT check (stationarity {kkt_residual:e}, primal {primal:e}, dual ok {dual_ok})"
            )));
        }
        Ok(QpSolution { x: x.iter().copied().collect(), kkt_residual, iterations })
    }
}

fn feas_tol(r: &Active, x: &DVector<f64>) -> f64 {
    1e-11 * (1.0 + r.b.abs() + r.n.amax() * x_scale(x))
}

fn x_scale(x: &DVector<f64>) -> f64 {
    x.amax().max(1.0)
}

/// Primal direction z = H n and dual direction r for the current active set.
fn step_direction(ginv: &DMatrix<f64>, active: &[Active], np: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let gn = ginv * np;
    if active.is_empty() {
        return Ok((gn, DVector::zeros(0)));
    }
    let n = np.len();
    let nmat = DMatrix::from_fn(n, active.len(), |i, j| active[j].n[i]);
    let gnm = ginv * &nmat;
    let m = nmat.transpose() * &gnm;
    let rhs = nmat.transpose() * &gn;
    let r = m.lu().solve(&rhs).ok_or_else(|| Error::Infeasible("active constraints became dependent".into()))?;
    let z = gn - gnm * &r;
    Ok((z, r))
}
