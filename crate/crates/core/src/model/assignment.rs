//! Minimum-cost one-to-one assignment (shortest augmenting path form of the
//! Hungarian method) for small rectangular cost matrices.

/// Optimal assignment of size `min(rows, cols)` for a row-major `rows x cols`
/// cost matrix. Returns `(total, pairs)` with pairs as `(row, col)` sorted by row.
pub fn min_cost_assignment(cost: &[f64], rows: usize, cols: usize) -> (f64, Vec<(usize, usize)>) {
    assert_eq!(cost.len(), rows * cols, "cost matrix shape");
    if rows == 0 || cols == 0 {
        return (0.0, Vec::new());
    }
    if rows > cols {
        let transposed: Vec<f64> = (0..cols)
            .flat_map(|c| (0..rows).map(move |r| (r, c)))
            .map(|(r, c)| cost[r * cols + c])
            .collect();
        let (total, pairs) = solve(&transposed, cols, rows);
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().map(|(c, r)| (r, c)).collect();
        pairs.sort_unstable();
        return (total, pairs);
    }
    solve(cost, rows, cols)
}

/// `n <= m`. Potentials `u`, `v`; `way` tracks the augmenting path.
fn solve(cost: &[f64], n: usize, m: usize) -> (f64, Vec<(usize, usize)>) {
    let at = |i: usize, j: usize| cost[(i - 1) * m + (j - 1)];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // col_owner[j] = row matched to column j (1-based, 0 = free)
    let mut col_owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        col_owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = at(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| col_owner[j] != 0)
        .map(|j| (col_owner[j] - 1, j - 1))
        .collect();
    pairs.sort_unstable();
    let total = pairs.iter().map(|&(r, c)| cost[r * m + c]).sum();
    (total, pairs)
}
