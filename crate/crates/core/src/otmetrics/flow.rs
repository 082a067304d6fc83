//! Exact Kantorovich transport between weighted discrete measures by
//! successive shortest augmenting paths with node potentials (min-cost flow
//! on the complete bipartite graph; arcs are uncapacitated so every
//! augmentation exhausts a source or a sink and at most m+n augmentations
//! occur).

use std::collections::HashMap;

/// Solves min Σ f_ij c(i,j) subject to the transportation constraints.
/// Supplies and demands must be nonnegative with equal totals (up to
/// roundoff). Returns the sparse plan and its cost.
pub fn transport(
    supplies: &[f64],
    demands: &[f64],
    cost: impl Fn(usize, usize) -> f64 + Sync,
) -> (Vec<(usize, usize, f64)>, f64) {
    let m = supplies.len();
    let n = demands.len();
    assert!(m > 0 && n > 0);
    let mut a: Vec<f64> = supplies.to_vec();
    let mut b: Vec<f64> = demands.to_vec();
    // potentials keeping residual reduced costs nonnegative
    let mut pi_s = vec![0.0f64; m];
    let mut pi_t = vec![0.0f64; n];
    let mut flow: HashMap<(u32, u32), f64> = HashMap::new();
    // sources that ever pushed into sink j (flow may have returned to zero;
    // entries are lazily skipped)
    let mut sources_into: Vec<Vec<u32>> = vec![Vec::new(); n];

    let total: f64 = a.iter().sum();
    let mut remaining = total;
    let finish_tol = 1e-15 * total.max(1.0);

    // node indexing: 0..m sources, m..m+n sinks
    let nn = m + n;
    let mut dist = vec![f64::INFINITY; nn];
    let mut prev = vec![usize::MAX; nn];
    let mut settled = vec![false; nn];

    while remaining > finish_tol {
        for d in dist.iter_mut() {
            *d = f64::INFINITY;
        }
        for s in settled.iter_mut() {
            *s = false;
        }
        for p in prev.iter_mut() {
            *p = usize::MAX;
        }
        for i in 0..m {
            if a[i] > 0.0 {
                dist[i] = 0.0;
            }
        }
        let mut sink_found = usize::MAX;
        loop {
            let mut best = f64::INFINITY;
            let mut node = usize::MAX;
            for v in 0..nn {
                if !settled[v] && dist[v] < best {
                    best = dist[v];
                    node = v;
                }
            }
            if node == usize::MAX {
                break;
            }
            settled[node] = true;
            if node >= m {
                let j = node - m;
                if b[j] > 0.0 {
                    sink_found = node;
                    break;
                }
                for &iu in &sources_into[j] {
                    let i = iu as usize;
                    if settled[i] || *flow.get(&(iu, j as u32)).unwrap_or(&0.0) <= 0.0 {
                        continue;
                    }
                    let rc = -(cost(i, j) - pi_s[i] + pi_t[j]);
                    let cand = dist[node] + rc.max(0.0);
                    if cand < dist[i] {
                        dist[i] = cand;
                        prev[i] = node;
                    }
                }
            } else {
                let i = node;
                for j in 0..n {
                    let v = m + j;
                    if settled[v] {
                        continue;
                    }
                    let rc = cost(i, j) - pi_s[i] + pi_t[j];
                    let cand = dist[node] + rc.max(0.0);
                    if cand < dist[v] {
                        dist[v] = cand;
                        prev[v] = node;
                    }
                }
            }
        }
        assert!(sink_found != usize::MAX, "transport network disconnected");

        // Johnson potential update, capped at the sink distance
        let d_sink = dist[sink_found];
        for i in 0..m {
            pi_s[i] += dist[i].min(d_sink);
        }
        for j in 0..n {
            pi_t[j] -= dist[m + j].min(d_sink);
        }

        // bottleneck along the augmenting path
        let mut push = b[sink_found - m];
        let mut v = sink_found;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if !(u < m && v >= m) {
                // backward arc: v is the source, u the sink
                let key = (v as u32, (u - m) as u32);
                push = push.min(*flow.get(&key).unwrap_or(&0.0));
            }
            v = u;
        }
        let path_root = v;
        debug_assert!(path_root < m);
        push = push.min(a[path_root]);
        debug_assert!(push > 0.0);

        let mut v = sink_found;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u < m && v >= m {
                let j = v - m;
                let key = (u as u32, j as u32);
                let e = flow.entry(key).or_insert(0.0);
                if *e == 0.0 {
                    sources_into[j].push(u as u32);
                }
                *e += push;
            } else {
                let key = (v as u32, (u - m) as u32);
                let e = flow.get_mut(&key).unwrap();
                *e -= push;
                if *e <= 0.0 {
                    *e = 0.0;
                }
            }
            v = u;
        }
        a[path_root] -= push;
        b[sink_found - m] -= push;
        remaining -= push;
    }

    let mut plan: Vec<(usize, usize, f64)> = flow
        .into_iter()
        .filter(|(_, f)| *f > 0.0)
        .map(|((i, j), f)| (i as usize, j as usize, f))
        .collect();
    plan.sort_unstable_by_key(|&(i, j, _)| (i, j));
    let total_cost = plan.iter().map(|&(i, j, f)| f * cost(i, j)).sum();
    (plan, total_cost)
}
