//! Exact discrete optimal transport by the transportation simplex.
//!
//! The basis is a spanning tree of the bipartite supply/demand graph,
//! started from the north-west corner rule. Entering cells are the most
//! negative reduced cost with lexicographic ties; after a run of
//! degenerate pivots the solver falls back to Bland's rule, which cannot
//! cycle. All choices are deterministic.

use crate::error::{Error, Result};

const REDUCED_COST_TOL: f64 = 1e-12;
const DEGENERATE_RUN_LIMIT: usize = 50;

/// A transport plan as sparse `(row, column, mass)` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub pivots: usize,
}

impl TransportPlan {
    pub fn row_sums(&self, rows: usize) -> Vec<f64> {
        let mut s = vec![0.0; rows];
        for &(i, _, w) in &self.entries {
            s[i] += w;
        }
        s
    }

    pub fn column_sums(&self, cols: usize) -> Vec<f64> {
        let mut s = vec![0.0; cols];
        for &(_, j, w) in &self.entries {
            s[j] += w;
        }
        s
    }
}

/// Row-major cost matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(crate::error::dimension(
                "cost matrix",
                rows * cols,
                data.len(),
            ));
        }
        Ok(CostMatrix { rows, cols, data })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

struct Basis {
    // (row, col, flow)
    cells: Vec<(usize, usize, f64)>,
}

fn north_west_corner(a: &[f64], b: &[f64]) -> Basis {
    let (s, t) = (a.len(), b.len());
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    let mut cells = Vec::with_capacity(s + t - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let q = a[i].min(b[j]).max(0.0);
        cells.push((i, j, q));
        a[i] -= q;
        b[j] -= q;
        if i == s - 1 && j == t - 1 {
            break;
        }
        if i == s - 1 {
            j += 1;
        } else if j == t - 1 || a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    Basis { cells }
}

/// Minimizes `Σ c_ij x_ij` over couplings of `supply` and `demand`.
///
/// Both marginals must be nonnegative with equal totals (within 1e-9).
pub fn solve(supply: &[f64], demand: &[f64], cost: &CostMatrix) -> Result<TransportPlan> {
    let (s, t) = (supply.len(), demand.len());
    if s == 0 || t == 0 || cost.rows != s || cost.cols != t {
        return Err(crate::error::dimension(
            "transport problem",
            s * t,
            cost.data.len(),
        ));
    }
    let (ts, tt): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (ts - tt).abs() > 1e-9 || supply.iter().chain(demand).any(|&x| x < 0.0) {
        return Err(Error::Validation(
            "transport marginals are unbalanced".into(),
        ));
    }
    let mut basis = north_west_corner(supply, demand);
    let n = s + t;
    let mut pivots = 0;
    let mut degenerate_run = 0;
    let mut u = vec![0.0; s];
    let mut v = vec![0.0; t];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let max_pivots = 50 * n * n + 1000;
    loop {
        // Tree adjacency: node i < s is a row, node s + j a column.
        for a in &mut adj {
            a.clear();
        }
        for (k, &(i, j, _)) in basis.cells.iter().enumerate() {
            adj[i].push(k);
            adj[s + j].push(k);
        }
        // Potentials by traversal from row 0; parent edges for cycle search.
        parent.iter_mut().for_each(|p| *p = None);
        order.clear();
        let mut seen = vec![false; n];
        seen[0] = true;
        u[0] = 0.0;
        order.push(0);
        let mut head = 0;
        while head < order.len() {
            let node = order[head];
            head += 1;
            for &k in &adj[node] {
                let (i, j, _) = basis.cells[k];
                let other = if node < s { s + j } else { i };
                if !seen[other] {
                    seen[other] = true;
                    if other >= s {
                        v[j] = cost.at(i, j) - u[i];
                    } else {
                        u[i] = cost.at(i, j) - v[j];
                    }
                    parent[other] = Some((node, k));
                    order.push(other);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Validation(
                "transport basis lost connectivity".into(),
            ));
        }
        let bland = degenerate_run >= DEGENERATE_RUN_LIMIT;
        let mut entering: Option<(usize, usize)> = None;
        let mut best = -REDUCED_COST_TOL;
        'scan: for i in 0..s {
            for j in 0..t {
                let r = cost.at(i, j) - u[i] - v[j];
                if r < best {
                    entering = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = entering else { break };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Validation(
                "transport simplex did not converge".into(),
            ));
        }
        // Path from column ej up to the root and from row ei up to the root;
        // the cycle is their symmetric part plus the entering cell.
        let path_to_root = |mut node: usize| {
            let mut edges = Vec::new();
            let mut nodes = vec![node];
            while let Some((p, k)) = parent[node] {
                edges.push(k);
                nodes.push(p);
                node = p;
            }
            (nodes, edges)
        };
        let (nodes_c, edges_c) = path_to_root(s + ej);
        let (nodes_r, edges_r) = path_to_root(ei);
        // Trim the common suffix (shared ancestry).
        let (mut a, mut b) = (nodes_c.len(), nodes_r.len());
        while a > 0 && b > 0 && nodes_c[a - 1] == nodes_r[b - 1] {
            a -= 1;
            b -= 1;
        }
        // Edges from column ej to the meeting node, then back down to row ei.
        let mut cycle: Vec<usize> = edges_c[..a].to_vec();
        cycle.extend(edges_r[..b].iter().rev());
        // Walking from ej, the first edge loses mass, the next gains, ...
        let mut theta = f64::INFINITY;
        let mut leaving: Option<usize> = None;
        for (pos, &k) in cycle.iter().enumerate() {
            if pos % 2 == 0 {
                let (i, j, x) = basis.cells[k];
                let better = match leaving {
                    None => true,
                    Some(l) => {
                        let (li, lj, lx) = basis.cells[l];
                        x < lx || (x == lx && (i, j) < (li, lj))
                    }
                };
                if better {
                    theta = x;
                    leaving = Some(k);
                }
            }
        }
        let leaving = leaving.expect("cycle has a decreasing edge");
        degenerate_run = if theta <= 0.0 { degenerate_run + 1 } else { 0 };
        for (pos, &k) in cycle.iter().enumerate() {
            let x = &mut basis.cells[k].2;
            if pos % 2 == 0 {
                *x = (*x - theta).max(0.0);
            } else {
                *x += theta;
            }
        }
        basis.cells[leaving] = (ei, ej, theta);
    }
    let mut entries: Vec<(usize, usize, f64)> =
        basis.cells.into_iter().filter(|c| c.2 > 0.0).collect();
    entries.sort_by_key(|x| (x.0, x.1));
    let cost_value = entries.iter().map(|&(i, j, x)| x * cost.at(i, j)).sum();
    Ok(TransportPlan {
        entries,
        cost: cost_value,
        pivots,
    })
}

/// Cheapest-cell-first feasible coupling; an upper bound on the optimum.
pub fn greedy_upper_bound(supply: &[f64], demand: &[f64], cost: &CostMatrix) -> TransportPlan {
    let (mut a, mut b) = (supply.to_vec(), demand.to_vec());
    let mut cells: Vec<(usize, usize)> = (0..supply.len())
        .flat_map(|i| (0..demand.len()).map(move |j| (i, j)))
        .collect();
    cells.sort_by(|&(i, j), &(k, l)| {
        cost.at(i, j)
            .total_cmp(&cost.at(k, l))
            .then((i, j).cmp(&(k, l)))
    });
    let mut entries = Vec::new();
    for (i, j) in cells {
        let q = a[i].min(b[j]);
        if q > 0.0 {
            entries.push((i, j, q));
            a[i] -= q;
            b[j] -= q;
        }
    }
    entries.sort_by_key(|x| (x.0, x.1));
    let value = entries.iter().map(|&(i, j, x)| x * cost.at(i, j)).sum();
    TransportPlan {
        entries,
        cost: value,
        pivots: 0,
    }
}
