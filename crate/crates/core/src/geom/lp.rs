//! Dense two-phase simplex for the small feasibility problems behind
//! region membership and segment clipping.
//!
//! Problems are in standard form: minimize `c.x` subject to `A x = b`,
//! `x >= 0`. Pivoting uses Bland's rule, so cycling cannot occur.

pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    // objective row: reduced costs, last entry holds -value
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let pv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= pv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(prow.iter()) {
                *v -= f * p;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over the columns `allowed`. Returns false when unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        let rhs = self.ncols;
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j] < -PIVOT_TOL) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOL {
                    let ratio = row[rhs] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }
}

/// Solve `min c.x  s.t.  A x = b, x >= 0`.
pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, arow) in a.iter().enumerate() {
        debug_assert_eq!(arow.len(), n);
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; ncols + 1];
        for j in 0..n {
            row[j] = sign * arow[j];
        }
        row[n + i] = 1.0;
        row[ncols] = sign * b[i];
        rows.push(row);
    }
    // phase one: minimize the sum of artificials
    let mut obj = vec![0.0; ncols + 1];
    for row in &rows {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[ncols] -= row[ncols];
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
        ncols,
    };
    t.run(ncols);
    let scale = 1.0 + b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if -t.obj[ncols] > FEAS_TOL * scale {
        return LpOutcome::Infeasible;
    }
    // drive remaining artificials out of the basis
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| t.rows[r][j].abs() > 1e-9) {
                Some(j) => t.pivot(r, j),
                None => {
                    // redundant row
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    // phase two
    let mut obj = vec![0.0; ncols + 1];
    obj[..n].copy_from_slice(c);
    for (i, &bv) in t.basis.iter().enumerate() {
        let f = obj[bv];
        if f != 0.0 {
            let row = &t.rows[i];
            for (v, p) in obj.iter_mut().zip(row.iter()) {
                *v -= f * p;
            }
        }
    }
    t.obj = obj;
    if !t.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[i][ncols].max(0.0);
        }
    }
    let value = c.iter().zip(x.iter()).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_optimum() {
        // min -x - y  s.t. x + s1 = 1, y + s2 = 2
        let a = vec![vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 1.0]];
        match solve(&a, &[1.0, 2.0], &[-1.0, -1.0, 0.0, 0.0]) {
            LpOutcome::Optimal { value, x } => {
                assert!((value + 3.0).abs() < 1e-12);
                assert!((x[0] - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x + y = -1 with x, y >= 0
        assert_eq!(solve(&[vec![1.0, 1.0]], &[-1.0], &[0.0, 0.0]), LpOutcome::Infeasible);
        // min -x s.t. x - y = 0
        assert_eq!(solve(&[vec![1.0, -1.0]], &[0.0], &[-1.0, 0.0]), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_redundant_rows() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        match solve(&a, &[1.0, 2.0], &[1.0, 0.0]) {
            LpOutcome::Optimal { value, .. } => assert!(value.abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
