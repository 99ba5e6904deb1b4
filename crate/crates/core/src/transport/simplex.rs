//! Primal network simplex for the balanced transportation problem.
//!
//! The spanning tree is rooted at an artificial node joined to every supply
//! and demand node by a high-cost arc. Entering arcs are chosen by block
//! pricing; leaving arcs follow Cunningham's rule (last blocking arc met when
//! walking the cycle from its apex in the direction of flow), which keeps the
//! tree strongly feasible and rules out cycling.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) struct Solution<S> {
    /// `(row, column, mass)` for every arc carrying positive flow.
    pub entries: Vec<(usize, usize, S)>,
    pub cost: S,
}

struct Network<'a, S> {
    n_rows: usize,
    n_cols: usize,
    cost: &'a [S],
    artificial_cost: S,
    flow: Vec<S>,
    in_tree: Vec<bool>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<S>,
    children: Vec<Vec<usize>>,
}

impl<S: Scalar> Network<'_, S> {
    fn real_arcs(&self) -> usize {
        self.n_rows * self.n_cols
    }

    fn root(&self) -> usize {
        self.n_rows + self.n_cols
    }

    fn tail(&self, arc: usize) -> usize {
        let m = self.real_arcs();
        if arc < m {
            arc / self.n_cols
        } else if arc - m < self.n_rows {
            arc - m
        } else {
            self.root()
        }
    }

    fn head(&self, arc: usize) -> usize {
        let m = self.real_arcs();
        if arc < m {
            self.n_rows + arc % self.n_cols
        } else if arc - m < self.n_rows {
            self.root()
        } else {
            arc - m
        }
    }

    fn arc_cost(&self, arc: usize) -> S {
        if arc < self.real_arcs() {
            self.cost[arc]
        } else {
            self.artificial_cost
        }
    }

    fn reduced_cost(&self, arc: usize) -> S {
        self.arc_cost(arc) + self.potential[self.tail(arc)] - self.potential[self.head(arc)]
    }

    fn join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.depth[u] >= self.depth[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    fn refresh_node(&mut self, v: usize) {
        let p = self.parent[v];
        let arc = self.pred[v];
        self.depth[v] = self.depth[p] + 1;
        let c = self.arc_cost(arc);
        self.potential[v] = if self.tail(arc) == v { self.potential[p] - c } else { self.potential[p] + c };
    }

    fn detach(&mut self, v: usize) {
        let p = self.parent[v];
        let pos = self.children[p].iter().position(|&c| c == v).expect("child registered with its parent");
        self.children[p].swap_remove(pos);
    }

    fn pivot(&mut self, entering: usize) -> Result<()> {
        let (s, t) = (self.tail(entering), self.head(entering));
        let apex = self.join(s, t);

        let mut delta = S::infinity();
        let mut leaving_node = None;
        let mut on_tail_side = true;
        let mut u = s;
        while u != apex {
            let arc = self.pred[u];
            if self.tail(arc) == u && self.flow[arc] < delta {
                delta = self.flow[arc];
                leaving_node = Some(u);
            }
            u = self.parent[u];
        }
        u = t;
        while u != apex {
            let arc = self.pred[u];
            if self.head(arc) == u && self.flow[arc] <= delta {
                delta = self.flow[arc];
                leaving_node = Some(u);
                on_tail_side = false;
            }
            u = self.parent[u];
        }
        let u_out = leaving_node.ok_or(Error::NotConverged { what: "network simplex (unbounded cycle)", iterations: 0 })?;

        if delta > S::zero() {
            self.flow[entering] += delta;
            for (start, forward_is_up) in [(s, false), (t, true)] {
                let mut u = start;
                while u != apex {
                    let arc = self.pred[u];
                    let up = self.tail(arc) == u;
                    if up == forward_is_up {
                        self.flow[arc] += delta;
                    } else {
                        self.flow[arc] -= delta;
                    }
                    u = self.parent[u];
                }
            }
        }

        let (w, other) = if on_tail_side { (s, t) } else { (t, s) };
        let mut path = vec![w];
        while *path.last().unwrap() != u_out {
            path.push(self.parent[*path.last().unwrap()]);
        }
        let leaving = self.pred[u_out];
        let old_pred: Vec<usize> = path.iter().map(|&v| self.pred[v]).collect();
        for &v in &path {
            self.detach(v);
        }
        for (i, &v) in path.iter().enumerate() {
            let (new_parent, new_pred) = if i == 0 { (other, entering) } else { (path[i - 1], old_pred[i - 1]) };
            self.parent[v] = new_parent;
            self.pred[v] = new_pred;
            self.children[new_parent].push(v);
        }
        self.in_tree[leaving] = false;
        self.in_tree[entering] = true;

        let mut stack = vec![w];
        while let Some(v) = stack.pop() {
            self.refresh_node(v);
            stack.extend(self.children[v].iter().copied());
        }
        Ok(())
    }
}

/// Minimizes `Σ c_ij π_ij` over couplings of `supply` and `demand`
/// (`cost` is row-major, `supply.len() × demand.len()`).
pub(crate) fn solve<S: Scalar>(supply: &[S], demand: &[S], cost: &[S]) -> Result<Solution<S>> {
    let (n_rows, n_cols) = (supply.len(), demand.len());
    let m = n_rows * n_cols;
    debug_assert_eq!(cost.len(), m);
    let nodes = n_rows + n_cols;
    let max_cost = cost.iter().fold(S::zero(), |acc, c| acc.max(c.abs()));
    let artificial_cost = (max_cost + S::one()) * S::from_usize_(nodes);

    let root = nodes;
    let mut net = Network {
        n_rows,
        n_cols,
        cost,
        artificial_cost,
        flow: vec![S::zero(); m + nodes],
        in_tree: vec![false; m + nodes],
        parent: vec![root; nodes + 1],
        pred: vec![usize::MAX; nodes + 1],
        depth: vec![0; nodes + 1],
        potential: vec![S::zero(); nodes + 1],
        children: vec![Vec::new(); nodes + 1],
    };
    for v in 0..nodes {
        let arc = m + v;
        net.pred[v] = arc;
        net.in_tree[arc] = true;
        net.depth[v] = 1;
        net.children[root].push(v);
        if v < n_rows {
            net.flow[arc] = supply[v];
            net.potential[v] = -artificial_cost;
        } else {
            net.flow[arc] = demand[v - n_rows];
            net.potential[v] = artificial_cost;
        }
    }

    let threshold = -S::lit(32.0) * S::epsilon() * artificial_cost;
    let block = ((m as f64).sqrt().ceil() as usize).max(10).min(m.max(1));
    let max_pivots = 50 * m + 10_000;
    let mut next = 0;
    let mut pivots = 0;
    loop {
        let mut best = None;
        let mut best_rc = threshold;
        let mut in_block = 0;
        for _ in 0..m {
            let arc = next;
            next = if next + 1 == m { 0 } else { next + 1 };
            if !net.in_tree[arc] {
                let rc = net.reduced_cost(arc);
                if rc < best_rc {
                    best_rc = rc;
                    best = Some(arc);
                }
            }
            in_block += 1;
            if in_block == block {
                if best.is_some() {
                    break;
                }
                in_block = 0;
            }
        }
        let Some(entering) = best else { break };
        net.pivot(entering)?;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::NotConverged { what: "network simplex", iterations: pivots });
        }
    }

    let mut entries = Vec::new();
    let mut total = S::zero();
    for arc in 0..m {
        if net.flow[arc] > S::zero() {
            entries.push((arc / n_cols, arc % n_cols, net.flow[arc]));
            total += net.flow[arc] * cost[arc];
        }
    }
    Ok(Solution { entries, cost: total })
}
