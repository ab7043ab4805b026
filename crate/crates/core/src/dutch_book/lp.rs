//! Dense two-phase simplex with Bland's rule, generic over the field.
//!
//! Problems here have a handful of rows and columns, so a full tableau is
//! fine. With exact rationals Bland's rule guarantees termination and every
//! sign decision is exact.

use crate::scalar::LpScalar;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome<S> {
    /// `duals[i]` prices row i of the original system.
    Optimal { x: Vec<S>, value: S, duals: Vec<S> },
    Infeasible,
    Unbounded,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    /// z_j - c_j per column, current objective value in the last slot.
    obj: Vec<S>,
    basis: Vec<usize>,
}

impl<S: LpScalar> Tableau<S> {
    fn rhs(&self, i: usize) -> &S {
        self.rows[i].last().expect("rhs column")
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        }
        self.basis[r] = col;
    }

    /// Maximizes over columns `< allowed`. Returns false if unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.obj[j].is_neg()) else {
                return true;
            };
            let mut best: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

/// maximize c·x subject to A x = b, x ≥ 0.
pub(crate) fn maximize<S: LpScalar>(a: &[Vec<S>], b: &[S], c: &[S]) -> LpOutcome<S> {
    let m = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|r| r.len() == n) && b.len() == m);
    let zero = S::zero;
    let one = S::one;

    // Columns: n structural, m artificial, rhs.
    let mut rows = Vec::with_capacity(m);
    let flips: Vec<bool> = b.iter().map(|bi| bi.is_negative()).collect();
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        let flip = flips[i];
        let mut row: Vec<S> = ai
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        row.extend((0..m).map(|k| if k == i { one() } else { zero() }));
        row.push(if flip { -bi.clone() } else { bi.clone() });
        rows.push(row);
    }
    let width = n + m + 1;

    // Phase 1: maximize -Σ artificials.
    let mut obj = vec![zero(); width];
    for row in &rows {
        for j in 0..n {
            obj[j] = obj[j].clone() - row[j].clone();
        }
        obj[width - 1] = obj[width - 1].clone() - row[width - 1].clone();
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
    };
    t.run(n + m);
    let infeasibility = -t.obj[width - 1].clone();
    if infeasibility > S::pivot_epsilon() && infeasibility.to_f64_lossy() > feasibility_tolerance::<S>() {
        return LpOutcome::Infeasible;
    }

    // Drive artificials out; drop rows that are redundant.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| t.rows[i][j].is_pos() || t.rows[i][j].is_neg()) {
                t.pivot(i, col);
            } else {
                t.rows.remove(i);
                t.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }

    // Phase 2.
    let mut obj = vec![zero(); width];
    for j in 0..n {
        obj[j] = -c[j].clone();
    }
    for (row, &bj) in t.rows.iter().zip(&t.basis) {
        let cb = c[bj].clone();
        if cb.is_zero() {
            continue;
        }
        for (o, v) in obj.iter_mut().zip(row) {
            *o = o.clone() + cb.clone() * v.clone();
        }
    }
    // Artificial columns never re-enter, but their reduced costs track
    // c_B·B⁻¹, which are the row duals.
    t.obj = obj;
    if !t.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![zero(); n];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.rhs(i).clone();
        }
    }
    let value = t.obj[width - 1].clone();
    let duals = (0..m)
        .map(|i| {
            let y = t.obj[n + i].clone();
            if flips[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    LpOutcome::Optimal { x, value, duals }
}

fn feasibility_tolerance<S: LpScalar>() -> f64 {
    // exact fields have a zero pivot epsilon, so any positive residual counts
    if S::pivot_epsilon().is_zero() {
        0.0
    } else {
        1e-9
    }
}
