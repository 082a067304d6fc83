//! Bottleneck (∞-Wasserstein) matching between equal-size point clouds:
//! the smallest threshold T such that the bipartite graph of pairs with
//! distance ≤ T admits a perfect matching. The threshold search expands
//! geometrically from the row/column nearest-neighbour lower bound, then
//! binary-searches the exact critical distance among the collected
//! candidates; feasibility is decided by Hopcroft-Karp on the sparse graph.

use crate::geometry::Vec3;

/// Returns (critical distance, matching as col_of_row).
pub fn bottleneck_match(xs: &[Vec3], ys: &[Vec3]) -> (f64, Vec<usize>) {
    let n = xs.len();
    assert_eq!(n, ys.len());
    assert!(n > 0);

    // nearest-neighbour lower bound for the threshold
    let mut lower = 0.0f64;
    let mut col_min = vec![f64::INFINITY; n];
    for x in xs {
        let mut row_min = f64::INFINITY;
        for (j, y) in ys.iter().enumerate() {
            let d = (*x - *y).norm();
            row_min = row_min.min(d);
            col_min[j] = col_min[j].min(d);
        }
        lower = lower.max(row_min);
    }
    for &c in &col_min {
        lower = lower.max(c);
    }

    let mut threshold = lower;
    loop {
        // candidate edges with distance ≤ threshold
        let mut edges: Vec<(f64, u32, u32)> = Vec::new();
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                let d = (*x - *y).norm();
                if d <= threshold {
                    edges.push((d, i as u32, j as u32));
                }
            }
        }
        edges.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if let Some(result) = solve_within(n, &edges) {
            return result;
        }
        threshold *= 1.5;
    }
}

/// Smallest prefix of the sorted edge list admitting a perfect matching,
/// located by binary search over distinct distances.
fn solve_within(n: usize, edges: &[(f64, u32, u32)]) -> Option<(f64, Vec<usize>)> {
    if edges.len() < n {
        return None;
    }
    let mut best = hopcroft_karp(n, edges.len(), edges)?;
    // prefix boundaries at distinct distances
    let mut boundaries: Vec<usize> = Vec::new();
    for k in 0..edges.len() {
        if k + 1 == edges.len() || edges[k + 1].0 > edges[k].0 {
            boundaries.push(k + 1);
        }
    }
    let mut feasible = boundaries.len() - 1;
    let mut infeasible: isize = -1;
    while infeasible + 1 < feasible as isize {
        let mid = ((infeasible + 1 + feasible as isize) / 2) as usize;
        match hopcroft_karp(n, boundaries[mid], edges) {
            Some(m) => {
                feasible = mid;
                best = m;
            }
            None => infeasible = mid as isize,
        }
    }
    Some((edges[boundaries[feasible] - 1].0, best))
}

/// Maximum bipartite matching on the first `k` edges; `Some(col_of_row)`
/// if perfect.
fn hopcroft_karp(n: usize, k: usize, edges: &[(f64, u32, u32)]) -> Option<Vec<usize>> {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(_, i, j) in &edges[..k] {
        adj[i as usize].push(j);
    }
    const NIL: u32 = u32::MAX;
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; n];
    let mut dist = vec![0u32; n];
    let mut queue = std::collections::VecDeque::new();

    loop {
        // BFS layers from free left vertices
        queue.clear();
        let mut found_free = false;
        for u in 0..n {
            if match_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u as u32);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut layer_limit = u32::MAX;
        while let Some(u) = queue.pop_front() {
            if dist[u as usize] >= layer_limit {
                continue;
            }
            for &v in &adj[u as usize] {
                let w = match_r[v as usize];
                if w == NIL {
                    layer_limit = layer_limit.min(dist[u as usize] + 1);
                    found_free = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found_free {
            break;
        }
        // DFS augmentations within layers
        fn dfs(
            u: usize,
            adj: &[Vec<u32>],
            match_l: &mut [u32],
            match_r: &mut [u32],
            dist: &mut [u32],
        ) -> bool {
            for idx in 0..adj[u].len() {
                let v = adj[u][idx] as usize;
                let w = match_r[v];
                if w == u32::MAX
                    || (dist[w as usize] == dist[u] + 1
                        && dfs(w as usize, adj, match_l, match_r, dist))
                {
                    match_l[u] = v as u32;
                    match_r[v] = u as u32;
                    return true;
                }
            }
            dist[u] = u32::MAX;
            false
        }
        for u in 0..n {
            if match_l[u] == NIL {
                dfs(u, &adj, &mut match_l, &mut match_r, &mut dist);
            }
        }
    }

    if match_l.iter().all(|&v| v != NIL) {
        Some(match_l.iter().map(|&v| v as usize).collect())
    } else {
        None
    }
}
