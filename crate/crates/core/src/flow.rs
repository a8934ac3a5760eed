//! Max-flow (Dinic) over integer or floating capacities, and a min-cost flow
//! by successive shortest paths.

use std::collections::VecDeque;
use std::ops::{Add, Sub};

pub(crate) trait Capacity: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> {
    const ZERO: Self;
    const INF: Self;
    /// True when the residual capacity is usable.
    fn positive(self) -> bool;
    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Capacity for i128 {
    const ZERO: Self = 0;
    const INF: Self = i128::MAX / 4;
    fn positive(self) -> bool {
        self > 0
    }
}

/// Residual capacities below this are treated as exhausted.
pub(crate) const FLOAT_EPS: f64 = 1e-15;

impl Capacity for f64 {
    const ZERO: Self = 0.0;
    const INF: Self = f64::INFINITY;
    fn positive(self) -> bool {
        self > FLOAT_EPS
    }
}

#[derive(Clone, Debug)]
struct Edge<C> {
    to: usize,
    cap: C,
    orig: C,
}

#[derive(Clone, Debug)]
pub(crate) struct FlowNet<C> {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge<C>>,
}

impl<C: Capacity> FlowNet<C> {
    pub fn new(nodes: usize) -> Self {
        FlowNet { adj: vec![Vec::new(); nodes], edges: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, cap: C) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to: v, cap, orig: cap });
        self.edges.push(Edge { to: u, cap: C::ZERO, orig: C::ZERO });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    /// Flow currently routed through edge `id`.
    pub fn flow(&self, id: usize) -> C {
        self.edges[id].orig - self.edges[id].cap
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if level[v] == usize::MAX && self.edges[e].cap.positive() {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    fn push(&mut self, u: usize, t: usize, limit: C, level: &[usize], it: &mut [usize]) -> C {
        if u == t {
            return limit;
        }
        while it[u] < self.adj[u].len() {
            let e = self.adj[u][it[u]];
            let v = self.edges[e].to;
            if self.edges[e].cap.positive() && level[v] == level[u] + 1 {
                let got = self.push(v, t, limit.min(self.edges[e].cap), level, it);
                if got.positive() {
                    self.edges[e].cap = self.edges[e].cap - got;
                    self.edges[e ^ 1].cap = self.edges[e ^ 1].cap + got;
                    return got;
                }
            }
            it[u] += 1;
        }
        C::ZERO
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> C {
        let mut total = C::ZERO;
        while let Some(level) = self.levels(s, t) {
            let mut it = vec![0usize; self.adj.len()];
            loop {
                let got = self.push(s, t, C::INF, &level, &mut it);
                if !got.positive() {
                    break;
                }
                total = total + got;
            }
        }
        total
    }
}

/// Min-cost flow with float capacities and non-negative costs.
pub(crate) struct CostFlowNet {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    cost: Vec<f64>,
}

impl CostFlowNet {
    pub fn new(nodes: usize) -> Self {
        CostFlowNet { adj: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new(), cost: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64, cost: f64) {
        let id = self.to.len();
        self.to.extend([v, u]);
        self.cap.extend([cap, 0.0]);
        self.cost.extend([cost, -cost]);
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
    }

    /// Sends up to `amount` from `s` to `t` at minimum cost; returns
    /// `(sent, cost)`.
    pub fn min_cost_flow(&mut self, s: usize, t: usize, amount: f64) -> (f64, f64) {
        let n = self.adj.len();
        let mut sent = 0.0;
        let mut total_cost = 0.0;
        while amount - sent > FLOAT_EPS {
            // Bellman-Ford queue variant; graphs here are small.
            let mut dist = vec![f64::INFINITY; n];
            let mut prev = vec![usize::MAX; n];
            let mut in_queue = vec![false; n];
            dist[s] = 0.0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                in_queue[u] = false;
                for &e in &self.adj[u] {
                    if self.cap[e] > FLOAT_EPS {
                        let v = self.to[e];
                        let nd = dist[u] + self.cost[e];
                        if nd < dist[v] - 1e-13 {
                            dist[v] = nd;
                            prev[v] = e;
                            if !in_queue[v] {
                                in_queue[v] = true;
                                queue.push_back(v);
                            }
                        }
                    }
                }
            }
            if dist[t].is_infinite() {
                break;
            }
            let mut push = amount - sent;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            sent += push;
            total_cost += push * dist[t];
        }
        (sent, total_cost)
    }
}
