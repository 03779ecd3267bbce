//! Dense two-phase simplex over exact rationals.
//!
//! Sized for the small programs that come up here (a handful of variables,
//! a few dozen constraints). Bland's rule throughout, so the method
//! terminates on degenerate programs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Minimize `objective · x` over free variables `x` subject to the constraints.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    n_vars: usize,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        point: Vec<Rational>,
    },
    Infeasible,
    /// The objective decreases without bound along `direction` from a feasible point.
    Unbounded {
        direction: Vec<Rational>,
    },
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, objective: vec![Rational::zero(); n_vars], constraints: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn minimize(mut self, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), self.n_vars);
        self.objective = objective;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.n_vars);
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    n_cols: usize,
    first_artificial: usize,
}

impl Tableau {
    // columns: x⁺ (n) | x⁻ (n) | one slack per inequality | one artificial per row
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.n_vars;
        let n_slack = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let n_rows = lp.constraints.len();
        let first_artificial = 2 * n + n_slack;
        let n_cols = first_artificial + n_rows;
        let mut rows = Vec::with_capacity(n_rows);
        let mut rhs = Vec::with_capacity(n_rows);
        let mut slack = 2 * n;
        for (r, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); n_cols];
            for (j, a) in c.coeffs.iter().enumerate() {
                row[j] = a.clone();
                row[n + j] = -a.clone();
            }
            match c.relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            let mut b = c.rhs.clone();
            if b.is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
                b = -b;
            }
            row[first_artificial + r] = Rational::one();
            rows.push(row);
            rhs.push(b);
        }
        let basis = (0..n_rows).map(|r| first_artificial + r).collect();
        Self { rows, rhs, basis, n_cols, first_artificial }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = &*x / &p;
        }
        self.rhs[r] = &self.rhs[r] / &p;
        let (prow, pb) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (x, y) in self.rows[i].iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
            self.rhs[i] = &self.rhs[i] - &(&f * &pb);
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[Rational], allowed: usize) -> Vec<Rational> {
        let mut d: Vec<Rational> = cost[..allowed].to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                if !self.rows[r][j].is_zero() {
                    *dj = &*dj - &(cb * &self.rows[r][j]);
                }
            }
        }
        d
    }

    /// Runs the simplex on `cost` over columns `< allowed`. Returns the
    /// entering column of an unbounded ray, if any.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> Option<usize> {
        loop {
            let d = self.reduced_costs(cost, allowed);
            let Some(c) = d.iter().position(|x| x.is_negative()) else {
                return None;
            };
            let mut leave: Option<(Rational, usize, usize)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / &row[c];
                let better = match &leave {
                    None => true,
                    Some((best, _, b)) => ratio < *best || (ratio == *best && self.basis[r] < *b),
                };
                if better {
                    leave = Some((ratio, r, self.basis[r]));
                }
            }
            match leave {
                Some((_, r, _)) => self.pivot(r, c),
                None => return Some(c),
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let n = lp.n_vars;
        let mut phase1 = vec![Rational::zero(); self.n_cols];
        for x in phase1.iter_mut().skip(self.first_artificial) {
            *x = Rational::one();
        }
        self.optimize(&phase1, self.n_cols);
        let infeasibility: Rational = self
            .basis
            .iter()
            .zip(&self.rhs)
            .filter(|(b, _)| **b >= self.first_artificial)
            .map(|(_, v)| v.clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive remaining (zero-level) artificials out of the basis
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                    Some(j) => self.pivot(r, j),
                    None => {
                        self.rows.remove(r);
                        self.rhs.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }

        let mut cost = vec![Rational::zero(); self.n_cols];
        for (j, c) in lp.objective.iter().enumerate() {
            cost[j] = c.clone();
            cost[n + j] = -c.clone();
        }
        if let Some(c) = self.optimize(&cost, self.first_artificial) {
            let mut dir = vec![Rational::zero(); self.first_artificial];
            dir[c] = Rational::one();
            for (r, &b) in self.basis.iter().enumerate() {
                dir[b] = -self.rows[r][c].clone();
            }
            let direction = (0..n).map(|j| &dir[j] - &dir[n + j]).collect();
            return LpOutcome::Unbounded { direction };
        }
        let mut vals = vec![Rational::zero(); self.first_artificial];
        for (r, &b) in self.basis.iter().enumerate() {
            vals[b] = self.rhs[r].clone();
        }
        let point: Vec<Rational> = (0..n).map(|j| &vals[j] - &vals[n + j]).collect();
        let value = lp.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
        LpOutcome::Optimal { value, point }
    }
}

/// Whether `p` is a convex combination of `points`.
pub fn in_convex_hull(p: &[Rational], points: &[Vec<Rational>]) -> bool {
    if points.is_empty() {
        return false;
    }
    let k = points.len();
    let mut lp = LinearProgram::new(k);
    for (i, _) in points.iter().enumerate() {
        let mut e = vec![Rational::zero(); k];
        e[i] = Rational::one();
        lp.constrain(e, Relation::Ge, Rational::zero());
    }
    lp.constrain(vec![Rational::one(); k], Relation::Eq, Rational::one());
    for (d, pd) in p.iter().enumerate() {
        lp.constrain(points.iter().map(|q| q[d].clone()).collect(), Relation::Eq, pd.clone());
    }
    !matches!(lp.solve(), LpOutcome::Infeasible)
}

/// Vertices of the convex hull of `points`, deduplicated and sorted.
pub fn hull_vertices(points: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    (0..pts.len())
        .filter(|&i| {
            let others: Vec<_> = pts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| q.clone()).collect();
            !in_convex_hull(&pts[i], &others)
        })
        .map(|i| pts[i].clone())
        .collect()
}
