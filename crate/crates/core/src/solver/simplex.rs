//! Bounded-variable revised simplex with a dense inverse basis.
//!
//! Rows become equalities with one slack each; phase 1 adds oriented
//! artificial columns only for rows whose slack cannot absorb the initial
//! residual, so the starting basis is always the identity. The inverse basis
//! is maintained by product-form updates and refactorized periodically from
//! scratch. Pricing is Dantzig's rule with a permanent switch to Bland's
//! rule after a degenerate stall, which keeps the method finite.

use super::linalg;
use super::{LpSolution, LpStatus, SolverError, FEASIBILITY_TOL, OPTIMALITY_TOL};
use crate::model::{MilpModel, Sense};

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE_TOL: f64 = 1e-12;
const REFACTOR_INTERVAL: u32 = 128;
const STALL_THRESHOLD: u32 = 500;
const MAX_ITERATIONS: u64 = 400_000;

struct Simplex {
    m: usize,
    n_struct: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    value: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
    artificials: Vec<usize>,
    bland: bool,
    stall: u32,
    pivots_since_refactor: u32,
    iterations: u64,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

/// Solves the LP relaxation of `model` with the supplied bound vectors
/// (which may tighten the model's own, as branch and bound does).
pub(crate) fn solve_lp_bounded(
    model: &MilpModel,
    lower: &[f64],
    upper: &[f64],
) -> Result<LpSolution, SolverError> {
    let mut simplex = Simplex::build(model, lower, upper);
    simplex.run()
}

impl Simplex {
    fn build(model: &MilpModel, lower: &[f64], upper: &[f64]) -> Simplex {
        let n_struct = model.num_vars();
        let m = model.num_rows();
        assert_eq!(lower.len(), n_struct);
        assert_eq!(upper.len(), n_struct);

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_struct + m];
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        let mut cost = model.objective.clone();
        let mut rhs = Vec::with_capacity(m);
        for (i, row) in model.rows.iter().enumerate() {
            for &(var, coef) in &row.terms {
                cols[var].push((i, coef));
            }
            let slack = n_struct + i;
            cols[slack].push((i, 1.0));
            let (slo, shi) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lo.push(slo);
            hi.push(shi);
            cost.push(0.0);
            rhs.push(row.rhs);
        }

        // Nonbasic starting values: the finite bound nearest zero effort
        // (lower when finite, else upper, else zero for free variables).
        let mut value = vec![0.0; n_struct + m];
        for j in 0..n_struct {
            value[j] = if lo[j].is_finite() {
                lo[j]
            } else if hi[j].is_finite() {
                hi[j]
            } else {
                0.0
            };
        }

        // Row residuals with every structural at its starting value decide
        // whether the slack can be basic or an artificial must be.
        let mut residual = rhs.clone();
        for j in 0..n_struct {
            if value[j] != 0.0 {
                for &(i, coef) in &cols[j] {
                    residual[i] -= coef * value[j];
                }
            }
        }

        let mut basis = Vec::with_capacity(m);
        let mut artificials = Vec::new();
        for i in 0..m {
            let slack = n_struct + i;
            let r = residual[i];
            if r >= lo[slack] && r <= hi[slack] {
                value[slack] = r;
                basis.push(slack);
            } else {
                value[slack] = if r > hi[slack] { hi[slack] } else { lo[slack] };
                let art = cols.len();
                cols.push(vec![(i, 1.0)]);
                let t = r - value[slack];
                if t >= 0.0 {
                    lo.push(0.0);
                    hi.push(f64::INFINITY);
                } else {
                    lo.push(f64::NEG_INFINITY);
                    hi.push(0.0);
                }
                cost.push(0.0);
                value.push(t);
                basis.push(art);
                artificials.push(art);
            }
        }

        let mut is_basic = vec![false; cols.len()];
        for &var in &basis {
            is_basic[var] = true;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }

        Simplex {
            m,
            n_struct,
            cols,
            lower: lo,
            upper: hi,
            cost,
            rhs,
            value,
            basis,
            is_basic,
            binv,
            artificials,
            bland: false,
            stall: 0,
            pivots_since_refactor: 0,
            iterations: 0,
        }
    }

    fn run(&mut self) -> Result<LpSolution, SolverError> {
        if !self.artificials.is_empty() {
            let mut phase1_cost = vec![0.0; self.cols.len()];
            for &art in &self.artificials {
                phase1_cost[art] = if self.upper[art] == 0.0 { -1.0 } else { 1.0 };
            }
            let real_cost = std::mem::replace(&mut self.cost, phase1_cost);
            loop {
                match self.iterate()? {
                    Step::Optimal => break,
                    Step::Unbounded => {
                        return Err(SolverError::NumericalFailure(
                            "phase 1 reported unbounded".into(),
                        ))
                    }
                    Step::Moved => {}
                }
            }
            let infeasibility: f64 = self
                .artificials
                .iter()
                .map(|&art| self.value[art].abs())
                .sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
            if infeasibility > FEASIBILITY_TOL * scale {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    primal: self.value[..self.n_struct].to_vec(),
                    duals: Vec::new(),
                    objective: f64::INFINITY,
                });
            }
            for &art in &self.artificials.clone() {
                self.lower[art] = 0.0;
                self.upper[art] = 0.0;
                if !self.is_basic[art] {
                    self.value[art] = 0.0;
                }
            }
            self.cost = real_cost;
            self.bland = false;
            self.stall = 0;
        }

        loop {
            match self.iterate()? {
                Step::Optimal => break,
                Step::Unbounded => {
                    return Ok(LpSolution {
                        status: LpStatus::Unbounded,
                        primal: self.value[..self.n_struct].to_vec(),
                        duals: Vec::new(),
                        objective: f64::NEG_INFINITY,
                    })
                }
                Step::Moved => {}
            }
        }

        self.refactor()?;
        let duals = self.dual_values();
        let objective = self
            .cost
            .iter()
            .zip(self.value.iter())
            .map(|(c, x)| c * x)
            .sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            primal: self.value[..self.n_struct].to_vec(),
            duals,
            objective,
        })
    }

    fn iterate(&mut self) -> Result<Step, SolverError> {
        self.iterations += 1;
        if self.iterations > MAX_ITERATIONS {
            return Err(SolverError::NumericalFailure(
                "simplex iteration limit exceeded".into(),
            ));
        }

        let y = self.dual_values();
        let entering = self.price(&y);
        let (q, sigma) = match entering {
            None => return Ok(Step::Optimal),
            Some(pair) => pair,
        };

        let w = self.ftran(q);
        let (delta, leave) = self.ratio_test(q, sigma, &w);
        let delta = match delta {
            None => return Ok(Step::Unbounded),
            Some(d) => d,
        };

        if delta <= RATIO_TIE_TOL {
            self.stall += 1;
            if self.stall > STALL_THRESHOLD {
                self.bland = true;
            }
        } else {
            self.stall = 0;
        }

        let step = sigma * delta;
        if delta > 0.0 {
            for k in 0..self.m {
                if w[k] != 0.0 {
                    self.value[self.basis[k]] -= step * w[k];
                }
            }
            self.value[q] += step;
        }

        match leave {
            None => {
                // Bound flip: the entering variable traverses to its other
                // bound without a basis change.
                self.value[q] = if sigma > 0.0 {
                    self.upper[q]
                } else {
                    self.lower[q]
                };
            }
            Some((r, hits_upper)) => {
                let leaving = self.basis[r];
                self.value[leaving] = if hits_upper {
                    self.upper[leaving]
                } else {
                    self.lower[leaving]
                };
                self.is_basic[leaving] = false;
                self.is_basic[q] = true;
                self.basis[r] = q;
                self.update_binv(r, &w)?;
                self.pivots_since_refactor += 1;
                if self.pivots_since_refactor >= REFACTOR_INTERVAL {
                    self.refactor()?;
                }
            }
        }
        Ok(Step::Moved)
    }

    /// y = c_B B^-1, the duals of the equality-form rows under the current
    /// cost vector.
    fn dual_values(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &var) in self.basis.iter().enumerate() {
            let cb = self.cost[var];
            if cb != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for i in 0..m {
                    y[i] += cb * row[i];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost[j];
        for &(i, coef) in &self.cols[j] {
            d -= y[i] * coef;
        }
        d
    }

    /// Chooses the entering variable and its direction: +1 to increase from
    /// the lower bound (or zero for free variables), -1 to decrease from the
    /// upper bound. Dantzig pricing by default, Bland's rule when stalled.
    fn price(&self, y: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols.len() {
            if self.is_basic[j] {
                continue;
            }
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if hi - lo <= 0.0 {
                continue;
            }
            let free = lo == f64::NEG_INFINITY && hi == f64::INFINITY;
            let at_lower = !free && self.value[j] <= lo + FEASIBILITY_TOL;
            let at_upper = !free && self.value[j] >= hi - FEASIBILITY_TOL;
            let d = self.reduced_cost(j, y);
            let candidate = if (free || at_lower) && d < -OPTIMALITY_TOL {
                Some((j, 1.0, -d))
            } else if (free || at_upper) && d > OPTIMALITY_TOL {
                Some((j, -1.0, d))
            } else {
                None
            };
            let (cj, sigma, score) = match candidate {
                None => continue,
                Some(c) => c,
            };
            if self.bland {
                return Some((cj, sigma));
            }
            match best {
                Some((_, _, best_score)) if best_score >= score => {}
                _ => best = Some((cj, sigma, score)),
            }
        }
        best.map(|(j, sigma, _)| (j, sigma))
    }

    fn ftran(&self, q: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        for &(i, coef) in &self.cols[q] {
            if coef != 0.0 {
                for k in 0..m {
                    w[k] += self.binv[k * m + i] * coef;
                }
            }
        }
        w
    }

    /// Bounded ratio test. Returns the step length (None when unbounded)
    /// and the leaving row with the bound it hits, or None for a bound flip
    /// of the entering variable.
    fn ratio_test(
        &self,
        q: usize,
        sigma: f64,
        w: &[f64],
    ) -> (Option<f64>, Option<(usize, bool)>) {
        let range = self.upper[q] - self.lower[q];
        let mut best_delta = if range.is_finite() { range } else { f64::INFINITY };
        let mut leave: Option<(usize, bool)> = None;
        let mut best_pivot = 0.0f64;

        for k in 0..self.m {
            let wk = w[k];
            if wk.abs() <= PIVOT_TOL {
                continue;
            }
            let var = self.basis[k];
            let xb = self.value[var];
            let swk = sigma * wk;
            let (raw, hits_upper) = if swk > 0.0 {
                if self.lower[var] == f64::NEG_INFINITY {
                    continue;
                }
                ((xb - self.lower[var]) / swk, false)
            } else {
                if self.upper[var] == f64::INFINITY {
                    continue;
                }
                ((xb - self.upper[var]) / swk, true)
            };
            let delta_k = raw.max(0.0);

            let improves = delta_k < best_delta - RATIO_TIE_TOL;
            let ties = !improves && delta_k <= best_delta + RATIO_TIE_TOL;
            let take = if improves {
                true
            } else if ties {
                match (self.bland, leave) {
                    // A tie against the bound-flip option prefers the flip.
                    (_, None) => false,
                    // Bland: lowest leaving variable index.
                    (true, Some((kr, _))) => var < self.basis[kr],
                    // Dantzig: largest pivot magnitude for stability.
                    (false, Some(_)) => wk.abs() > best_pivot,
                }
            } else {
                false
            };
            if take {
                best_delta = delta_k.min(best_delta);
                leave = Some((k, hits_upper));
                best_pivot = wk.abs();
            }
        }

        if best_delta == f64::INFINITY {
            (None, None)
        } else {
            (Some(best_delta), leave)
        }
    }

    /// Product-form update of the inverse basis after column q replaces the
    /// basic variable in row r (w = B^-1 A_q already computed).
    fn update_binv(&mut self, r: usize, w: &[f64]) -> Result<(), SolverError> {
        let m = self.m;
        let pivot = w[r];
        if pivot.abs() <= PIVOT_TOL {
            // The ratio test guards pivot magnitude, so this indicates a
            // numerically degenerate basis; rebuild from scratch instead.
            return self.refactor();
        }
        for j in 0..m {
            self.binv[r * m + j] /= pivot;
        }
        for k in 0..m {
            if k == r {
                continue;
            }
            let factor = w[k];
            if factor == 0.0 {
                continue;
            }
            for j in 0..m {
                self.binv[k * m + j] -= factor * self.binv[r * m + j];
            }
        }
        Ok(())
    }

    /// Rebuilds the inverse basis from the basis columns and recomputes the
    /// basic values from scratch, clearing accumulated drift.
    fn refactor(&mut self) -> Result<(), SolverError> {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (k, &var) in self.basis.iter().enumerate() {
            for &(i, coef) in &self.cols[var] {
                b[i * m + k] = coef;
            }
        }
        self.binv = linalg::invert(&b, m).ok_or_else(|| {
            SolverError::NumericalFailure("singular basis during refactorization".into())
        })?;

        let mut residual = self.rhs.clone();
        for j in 0..self.cols.len() {
            if self.is_basic[j] || self.value[j] == 0.0 {
                continue;
            }
            for &(i, coef) in &self.cols[j] {
                residual[i] -= coef * self.value[j];
            }
        }
        for k in 0..m {
            let row = &self.binv[k * m..(k + 1) * m];
            let mut x = 0.0;
            for i in 0..m {
                x += row[i] * residual[i];
            }
            self.value[self.basis[k]] = x;
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }
}
