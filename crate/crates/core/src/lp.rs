//! Dense two-phase simplex method for the small linear programs behind the
//! intersection checks. Entering columns follow Bland's rule; problem sizes
//! here are a dozen variables at most.

use nalgebra::{DMatrix, DVector};

const PIVOT_EPS: f64 = 1e-11;
const RATIO_TIE: f64 = 1e-12;
const PIVOT_SHARE: f64 = 1e-3;
const REDUCED_COST_EPS: f64 = 1e-13;
const FEASIBILITY_EPS: f64 = 1e-10;
/// Rows whose original columns are all below this after phase one are
/// treated as redundant.
const REDUNDANT_EPS: f64 = 1e-9;
const MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over the first `allowed` columns.
    /// Returns false when the objective is unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        let rhs = self.rhs();
        for _ in 0..MAX_ITERS {
            // Columns whose positive entries are all below the pivot
            // threshold cannot enter; a truly unbounded ray has none at all.
            let mut unbounded = false;
            let entering = (0..allowed).find(|&j| {
                if self.obj[j] >= -REDUCED_COST_EPS {
                    return false;
                }
                let top = self.rows.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max);
                if top <= 0.0 {
                    unbounded = true;
                }
                top > PIVOT_EPS
            });
            let Some(col) = entering else { return !unbounded };
            // Bland's rule among near-tied ratios, but skip pivots far
            // smaller than the best candidate; those wreck the tableau.
            let ties: Vec<usize> = {
                let min_ratio = self
                    .rows
                    .iter()
                    .filter(|row| row[col] > PIVOT_EPS)
                    .map(|row| row[rhs] / row[col])
                    .fold(f64::INFINITY, f64::min);
                (0..self.rows.len())
                    .filter(|&i| {
                        let row = &self.rows[i];
                        row[col] > PIVOT_EPS && row[rhs] / row[col] <= min_ratio + RATIO_TIE
                    })
                    .collect()
            };
            let biggest = ties.iter().map(|&i| self.rows[i][col]).fold(0.0f64, f64::max);
            let leave = ties
                .iter()
                .copied()
                .filter(|&i| self.rows[i][col] >= PIVOT_SHARE * biggest)
                .min_by_key(|&i| self.basis[i])
                .map(|i| (i, 0.0));
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, col),
            }
        }
        true
    }
}

/// Re-solves the final basis directly against the original data. Long
/// pivot sequences accumulate error in the tableau right-hand side.
fn polish(a: &[Vec<f64>], b: &[f64], x: &mut [f64], basis: &[usize]) {
    let n = x.len();
    let cols: Vec<usize> = basis.iter().copied().filter(|&j| j < n).collect();
    if cols.is_empty() {
        return;
    }
    let m = a.len();
    let mat = DMatrix::from_fn(m, cols.len(), |i, k| a[i][cols[k]]);
    let rhs = DVector::from_column_slice(b);
    let Ok(sol) = mat.svd(true, true).solve(&rhs, 1e-13) else { return };
    if sol.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return;
    }
    for (k, &j) in cols.iter().enumerate() {
        x[j] = sol[k].max(0.0);
    }
}

/// Maximizes `c·x` subject to `a x = b`, `x ≥ 0`.
pub fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n);
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut t = vec![0.0; width];
        for j in 0..n {
            t[j] = sign * row[j];
        }
        t[n + i] = 1.0;
        t[width - 1] = sign * b[i];
        rows.push(t);
    }
    let mut obj = vec![0.0; width];
    for row in &rows {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[width - 1] -= row[width - 1];
    }
    let mut tab = Tableau { rows, obj, basis: (n..n + m).collect(), width };
    tab.run(n + m);

    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if tab.obj[width - 1] < -FEASIBILITY_EPS * scale {
        return LpOutcome::Infeasible;
    }
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= n {
            let best = (0..n).max_by(|&x, &y| tab.rows[i][x].abs().total_cmp(&tab.rows[i][y].abs()));
            match best {
                Some(j) if tab.rows[i][j].abs() > REDUNDANT_EPS => tab.pivot(i, j),
                _ => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut obj = vec![0.0; width];
    for j in 0..n {
        obj[j] = -c[j];
    }
    for (i, &bj) in tab.basis.iter().enumerate() {
        let cb = if bj < n { c[bj] } else { 0.0 };
        if cb != 0.0 {
            for (v, t) in obj.iter_mut().zip(&tab.rows[i]) {
                *v += cb * t;
            }
        }
    }
    obj[n..n + m].fill(0.0);
    tab.obj = obj;
    if !tab.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj < n {
            x[bj] = tab.rows[i][width - 1];
        }
    }
    polish(a, b, &mut x, &tab.basis);
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(o: LpOutcome) -> f64 {
        match o {
            LpOutcome::Optimal { value, .. } => value,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn simple_optimum() {
        // max x + y, x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let v = value(maximize(&a, &[4.0, 6.0], &[1.0, 1.0, 0.0, 0.0]));
        assert!((v - 2.8).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![vec![1.0, 1.0]];
        assert_eq!(maximize(&a, &[-1.0], &[1.0, 0.0]), LpOutcome::Infeasible);
        let a = vec![vec![1.0, -1.0]];
        assert_eq!(maximize(&a, &[1.0], &[1.0, 0.0]), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let v = value(maximize(&a, &[1.0, 2.0], &[0.0, 1.0]));
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // Classic cycling example (Beale) made equality form with slacks.
        let a = vec![
            vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let c = [0.75, -150.0, 0.02, -6.0, 0.0, 0.0, 0.0];
        let v = value(maximize(&a, &[0.0, 0.0, 1.0], &c));
        assert!((v - 0.05).abs() < 1e-9);
    }
}
