//! LU factorization of a simplex basis.
//!
//! Column singletons are peeled off first, then row singletons, and whatever
//! is left (the bump) gets a dense LU with partial pivoting. The permuted
//! basis is block upper triangular:
//!
//! ```text
//!   [ U_a  X    Y   ]   column-singleton pivots (upper triangular)
//!   [ 0    K    Z   ]   dense bump
//!   [ 0    0    L_c ]   row-singleton pivots (lower triangular)
//! ```
//!
//! Master-problem bases are mostly slack and unit columns, so the bump stays
//! small.

const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug)]
pub(crate) struct Singular {
    /// Basis positions whose column could not be pivoted.
    pub positions: Vec<usize>,
    /// Rows left without a pivot, same length as `positions`.
    pub rows: Vec<usize>,
}

struct Pivot {
    row: usize,
    pos: usize,
    value: f64,
}

pub(crate) struct Factor {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    upper: Vec<Pivot>,
    lower: Vec<Pivot>,
    bump_rows: Vec<usize>,
    bump_cols: Vec<usize>,
    in_bump_row: Vec<bool>,
    /// Row-major LU of the permuted bump; unit lower diagonal implied.
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Factor {
    pub fn new(m: usize, cols: Vec<Vec<(usize, f64)>>) -> Result<Factor, Singular> {
        debug_assert_eq!(cols.len(), m);
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (c, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                if v != 0.0 {
                    row_cols[r].push(c);
                }
            }
        }
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];
        let mut col_count: Vec<usize> = cols.iter().map(|c| c.iter().filter(|e| e.1 != 0.0).count()).collect();
        let mut row_count: Vec<usize> = row_cols.iter().map(|c| c.len()).collect();

        let mut upper = Vec::new();
        let mut stack: Vec<usize> = (0..m).rev().filter(|&c| col_count[c] == 1).collect();
        while let Some(c) = stack.pop() {
            if !col_active[c] || col_count[c] != 1 {
                continue;
            }
            let Some(&(r, v)) = cols[c].iter().find(|&&(r, v)| v != 0.0 && row_active[r]) else {
                continue;
            };
            if v.abs() < PIVOT_TOL {
                continue;
            }
            row_active[r] = false;
            col_active[c] = false;
            for &c2 in &row_cols[r] {
                if col_active[c2] {
                    col_count[c2] -= 1;
                    if col_count[c2] == 1 {
                        stack.push(c2);
                    }
                }
            }
            upper.push(Pivot { row: r, pos: c, value: v });
        }

        for r in 0..m {
            if row_active[r] {
                row_count[r] = row_cols[r].iter().filter(|&&c| col_active[c]).count();
            }
        }
        let mut lower = Vec::new();
        let mut stack: Vec<usize> = (0..m).rev().filter(|&r| row_active[r] && row_count[r] == 1).collect();
        while let Some(r) = stack.pop() {
            if !row_active[r] || row_count[r] != 1 {
                continue;
            }
            let Some(&c) = row_cols[r].iter().find(|&&c| col_active[c]) else {
                continue;
            };
            let v = cols[c].iter().filter(|e| e.0 == r).map(|e| e.1).sum::<f64>();
            if v.abs() < PIVOT_TOL {
                continue;
            }
            row_active[r] = false;
            col_active[c] = false;
            for &(r2, v2) in &cols[c] {
                if v2 != 0.0 && row_active[r2] {
                    row_count[r2] -= 1;
                    if row_count[r2] == 1 {
                        stack.push(r2);
                    }
                }
            }
            lower.push(Pivot { row: r, pos: c, value: v });
        }

        let bump_rows: Vec<usize> = (0..m).filter(|&r| row_active[r]).collect();
        let bump_cols: Vec<usize> = (0..m).filter(|&c| col_active[c]).collect();
        let k = bump_rows.len();
        debug_assert_eq!(k, bump_cols.len());
        let mut local_row = vec![usize::MAX; m];
        for (i, &r) in bump_rows.iter().enumerate() {
            local_row[r] = i;
        }
        let mut lu = vec![0.0; k * k];
        for (jj, &c) in bump_cols.iter().enumerate() {
            for &(r, v) in &cols[c] {
                if local_row[r] != usize::MAX {
                    lu[local_row[r] * k + jj] += v;
                }
            }
        }
        let mut perm: Vec<usize> = (0..k).collect();
        let mut bad_cols = Vec::new();
        let mut pivot_row_of_col = vec![usize::MAX; k];
        // Right-looking elimination; rows are swapped physically.
        let mut next_row = 0;
        for col in 0..k {
            let mut best = next_row;
            let mut best_val = 0.0;
            for i in next_row..k {
                let v = lu[i * k + col].abs();
                if v > best_val {
                    best_val = v;
                    best = i;
                }
            }
            if best_val < PIVOT_TOL {
                bad_cols.push(col);
                continue;
            }
            if best != next_row {
                for j in 0..k {
                    lu.swap(best * k + j, next_row * k + j);
                }
                perm.swap(best, next_row);
            }
            let p = lu[next_row * k + col];
            for i in next_row + 1..k {
                let f = lu[i * k + col] / p;
                if f != 0.0 {
                    lu[i * k + col] = f;
                    for j in col + 1..k {
                        lu[i * k + j] -= f * lu[next_row * k + j];
                    }
                } else {
                    lu[i * k + col] = 0.0;
                }
            }
            pivot_row_of_col[col] = next_row;
            next_row += 1;
        }
        if !bad_cols.is_empty() {
            let rows = perm[next_row..].iter().map(|&i| bump_rows[i]).collect();
            return Err(Singular {
                positions: bad_cols.iter().map(|&j| bump_cols[j]).collect(),
                rows,
            });
        }
        debug_assert!(pivot_row_of_col.iter().enumerate().all(|(c, &r)| c == r));

        let mut in_bump_row = vec![false; m];
        for &r in &bump_rows {
            in_bump_row[r] = true;
        }
        Ok(Factor {
            m,
            cols,
            upper,
            lower,
            bump_rows,
            bump_cols,
            in_bump_row,
            lu,
            perm,
        })
    }

    /// Solves `B x = b`; `b` is indexed by row, the result by basis position.
    pub fn ftran(&self, b: &[f64]) -> Vec<f64> {
        let mut work = b.to_vec();
        let mut x = vec![0.0; self.m];
        for p in &self.lower {
            let xv = work[p.row] / p.value;
            x[p.pos] = xv;
            if xv != 0.0 {
                for &(r, v) in &self.cols[p.pos] {
                    if r != p.row {
                        work[r] -= v * xv;
                    }
                }
            }
        }
        let k = self.bump_rows.len();
        if k > 0 {
            let mut y: Vec<f64> = self.perm.iter().map(|&i| work[self.bump_rows[i]]).collect();
            for i in 0..k {
                let mut s = y[i];
                for j in 0..i {
                    s -= self.lu[i * k + j] * y[j];
                }
                y[i] = s;
            }
            for i in (0..k).rev() {
                let mut s = y[i];
                for j in i + 1..k {
                    s -= self.lu[i * k + j] * y[j];
                }
                y[i] = s / self.lu[i * k + i];
            }
            for (jj, &c) in self.bump_cols.iter().enumerate() {
                let xv = y[jj];
                x[c] = xv;
                if xv != 0.0 {
                    for &(r, v) in &self.cols[c] {
                        if !self.in_bump_row[r] {
                            work[r] -= v * xv;
                        }
                    }
                }
            }
        }
        for p in self.upper.iter().rev() {
            let xv = work[p.row] / p.value;
            x[p.pos] = xv;
            if xv != 0.0 {
                for &(r, v) in &self.cols[p.pos] {
                    if r != p.row {
                        work[r] -= v * xv;
                    }
                }
            }
        }
        x
    }

    /// Solves `B^T y = c`; `c` is indexed by basis position, the result by row.
    pub fn btran(&self, c: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for p in &self.upper {
            let mut s = c[p.pos];
            for &(r, v) in &self.cols[p.pos] {
                if r != p.row {
                    s -= v * y[r];
                }
            }
            y[p.row] = s / p.value;
        }
        let k = self.bump_rows.len();
        if k > 0 {
            let mut rhs: Vec<f64> = self
                .bump_cols
                .iter()
                .map(|&col| {
                    let mut s = c[col];
                    for &(r, v) in &self.cols[col] {
                        if !self.in_bump_row[r] {
                            s -= v * y[r];
                        }
                    }
                    s
                })
                .collect();
            // U^T u = rhs
            for i in 0..k {
                let mut s = rhs[i];
                for j in 0..i {
                    s -= self.lu[j * k + i] * rhs[j];
                }
                rhs[i] = s / self.lu[i * k + i];
            }
            // L^T v = u
            for i in (0..k).rev() {
                let mut s = rhs[i];
                for j in i + 1..k {
                    s -= self.lu[j * k + i] * rhs[j];
                }
                rhs[i] = s;
            }
            for (i, &pi) in self.perm.iter().enumerate() {
                y[self.bump_rows[pi]] = rhs[i];
            }
        }
        for p in self.lower.iter().rev() {
            let mut s = c[p.pos];
            for &(r, v) in &self.cols[p.pos] {
                if r != p.row {
                    s -= v * y[r];
                }
            }
            y[p.row] = s / p.value;
        }
        y
    }
}
