//! Exact two-phase simplex over rationals with Bland's rule.
//!
//! Solves `max c.x` subject to rows `a.x <= b` or `a.x = b`, `x >= 0`, with
//! every `b >= 0`. Bland's rule rules out cycling, so termination is
//! guaranteed on degenerate programs.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, Q)>,
    pub kind: RowKind,
    pub rhs: Q,
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub vars: usize,
    pub objective: Vec<(usize, Q)>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

impl Program {
    pub fn new(vars: usize) -> Self {
        Program {
            vars,
            ..Default::default()
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Q)>, kind: RowKind, rhs: Q) {
        assert!(!rhs.is_negative(), "right-hand sides must be non-negative");
        self.rows.push(Row { coeffs, kind, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    /// `rows[i]` holds the coefficients then the right-hand side.
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    cols: usize,
    artificial_from: usize,
}

impl Tableau {
    fn build(p: &Program) -> Self {
        let slacks = p.rows.iter().filter(|r| r.kind == RowKind::Le).count();
        let artificials = p.rows.len() - slacks;
        let artificial_from = p.vars + slacks;
        let cols = artificial_from + artificials;
        let mut rows = Vec::with_capacity(p.rows.len());
        let mut basis = Vec::with_capacity(p.rows.len());
        let (mut next_slack, mut next_art) = (p.vars, artificial_from);
        for r in &p.rows {
            let mut row = vec![Q::zero(); cols + 1];
            for (j, c) in &r.coeffs {
                row[*j] += c;
            }
            row[cols] = r.rhs.clone();
            match r.kind {
                RowKind::Le => {
                    row[next_slack] = Q::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                RowKind::Eq => {
                    row[next_art] = Q::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            cols,
            artificial_from,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost` over columns `< limit`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[Q], limit: usize) -> bool {
        loop {
            // Reduced cost of column j: cost_j - sum_i cost_basis(i) a_ij.
            let entering = (0..limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut rc = cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    if !row[j].is_zero() {
                        rc -= &cost[self.basis[i]] * &row[j];
                    }
                }
                rc.is_positive()
            });
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.cols] / &row[c];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn run(mut self, p: &Program) -> LpOutcome {
        let mut phase1 = vec![Q::zero(); self.cols];
        for c in phase1.iter_mut().skip(self.artificial_from) {
            *c = -Q::one();
        }
        self.optimize(&phase1, self.cols);
        let infeasibility: Q = self
            .basis
            .iter()
            .zip(&self.rows)
            .filter(|(&b, _)| b >= self.artificial_from)
            .map(|(_, row)| row[self.cols].clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis; rows where that
        // is impossible are redundant.
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_from {
                match (0..self.artificial_from).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        let mut cost = vec![Q::zero(); self.cols];
        for (j, c) in &p.objective {
            cost[*j] += c;
        }
        if !self.optimize(&cost, self.artificial_from) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Q::zero(); p.vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < p.vars {
                x[b] = row[self.cols].clone();
            }
        }
        let value = p.objective.iter().map(|(j, c)| c * &x[*j]).sum();
        LpOutcome::Optimal { value, x }
    }
}

/// Exact rational value of a finite float.
pub fn rational(x: f64) -> Q {
    Q::from_float(x).expect("finite value")
}

pub fn to_f64(q: &Q) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}
