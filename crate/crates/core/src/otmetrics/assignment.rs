//! Exact dense linear assignment by shortest augmenting paths with dual
//! variables (the Jonker-Volgenant scheme). O(n³) worst case, far faster on
//! geometric instances.

/// Returns (col_of_row, total_cost). `cost` is a row-major n×n matrix.
pub fn solve_dense(n: usize, cost: impl Fn(usize, usize) -> f64) -> (Vec<usize>, f64) {
    assert!(n > 0);
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut col_of_row = vec![usize::MAX; n];
    let mut row_of_col = vec![usize::MAX; n];

    for cur_row in 0..n {
        // Dijkstra over columns from cur_row in the reduced-cost graph.
        let mut shortest = vec![f64::INFINITY; n];
        let mut path = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut min_val = 0.0f64;
        let mut i = cur_row;
        let mut sink = usize::MAX;
        while sink == usize::MAX {
            let mut lowest = f64::INFINITY;
            let mut index = usize::MAX;
            for j in 0..n {
                if done[j] {
                    continue;
                }
                let r = min_val + cost(i, j) - u[i] - v[j];
                if r < shortest[j] {
                    shortest[j] = r;
                    path[j] = i;
                }
                if shortest[j] < lowest
                    || (shortest[j] == lowest && row_of_col[j] == usize::MAX)
                {
                    lowest = shortest[j];
                    index = j;
                }
            }
            min_val = lowest;
            debug_assert!(min_val.is_finite(), "assignment infeasible");
            let j = index;
            done[j] = true;
            if row_of_col[j] == usize::MAX {
                sink = j;
            } else {
                i = row_of_col[j];
            }
        }
        // dual updates
        u[cur_row] += min_val;
        for i2 in 0..n {
            if i2 != cur_row && col_of_row[i2] != usize::MAX && done[col_of_row[i2]] {
                u[i2] += min_val - shortest[col_of_row[i2]];
            }
        }
        for j in 0..n {
            if done[j] {
                v[j] -= min_val - shortest[j];
            }
        }
        // augment backwards from the sink
        let mut j = sink;
        loop {
            let i2 = path[j];
            row_of_col[j] = i2;
            let prev = col_of_row[i2];
            col_of_row[i2] = j;
            if i2 == cur_row {
                break;
            }
            j = prev;
        }
    }
    let total = (0..n).map(|i| cost(i, col_of_row[i])).sum();
    (col_of_row, total)
}
