//! Directed communication graphs and the row/column-stochastic mixing pair.
//!
//! Edge `(i, j)` means agent `i` transmits to agent `j`. The pull matrix `R`
//! has `R[i][j] > 0` only when `(j, i)` is an edge, and so does the push
//! matrix `C`.
//!
//! The random model is a directed ring `0 -> 1 -> ... -> n-1 -> 0` plus
//! independent extra edges; the ring keeps every generated graph strongly
//! connected without rejection sampling. Weights are uniform
//! (`1/|in(i)|` for `R`, `1/|out(j)|` for `C`).

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Matrix};

/// Perron-vector entries above this count as spanning-tree-root mass.
pub const ROOT_THRESHOLD: f64 = 1e-9;
/// Power-iteration stopping residual (infinity norm, vector scaled to sum `n`).
pub const PERRON_TOLERANCE: f64 = 1e-12;
pub const PERRON_MAX_ITERATIONS: usize = 1_000_000;
/// Plain iterations attempted before switching to the averaged iteration.
const PLAIN_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Digraph {
    /// Builds a graph from `(src, dst)` pairs; self-loops are added for every node.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(crate::error::domain("graph needs at least one node"));
        }
        let mut set: BTreeSet<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(crate::error::domain(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            set.insert((i, j));
        }
        Ok(Self { n, edges: set })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.edges.contains(&(src, dst))
    }

    /// Nodes that transmit to `i`, including `i` itself.
    pub fn in_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.has_edge(j, i)).collect()
    }

    /// Nodes that receive from `j`, including `j` itself.
    pub fn out_neighbors(&self, j: usize) -> Vec<usize> {
        self.edges.range((j, 0)..(j + 1, 0)).map(|&(_, d)| d).collect()
    }

    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut adj = vec![Vec::new(); self.n];
        for &(s, d) in &self.edges {
            adj[s].push(d);
        }
        bfs(&adj, start)
    }

    pub fn is_strongly_connected(&self) -> bool {
        (0..self.n).all(|s| self.reachable_from(s).iter().all(|&r| r))
    }

    /// Plain-text edge list: `n` on the first line, then one `src dst` per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for &(i, j) in &self.edges {
            let _ = writeln!(s, "{i} {j}");
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(no, l)| (no + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let bad = |line: usize, msg: &str| Error::Config {
            path: "<edge list>".into(),
            message: format!("line {line}: {msg}"),
        };
        let (no, first) = lines.next().ok_or_else(|| bad(1, "missing node count"))?;
        let n: usize = first.parse().map_err(|_| bad(no, "node count is not an integer"))?;
        let mut edges = Vec::new();
        for (no, line) in lines {
            let mut it = line.split_whitespace();
            let mut next = || -> Result<usize> {
                it.next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| bad(no, "expected `src dst`"))
            };
            edges.push((next()?, next()?));
        }
        Digraph::from_edges(n, edges)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut text = String::new();
        for line in std::io::BufReader::new(file).lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Self::parse_edge_list(&text)
    }
}

fn bfs(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Directed ring plus each other ordered pair with probability `extra_edge_prob`.
pub fn generate_digraph(n: usize, extra_edge_prob: f64, seed: u64) -> Result<Digraph> {
    if n == 0 {
        return Err(crate::error::domain("graph needs at least one node"));
    }
    if !(0.0..=1.0).contains(&extra_edge_prob) {
        return Err(crate::error::domain(format!(
            "extra_edge_prob {extra_edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((i, (i + 1) % n));
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || j == (i + 1) % n {
                continue;
            }
            // draw for every pair so the stream layout does not depend on the probability
            let u: f64 = rng.gen();
            if u < extra_edge_prob {
                edges.push((i, j));
            }
        }
    }
    Digraph::from_edges(n, edges)
}

/// Row-stochastic pull matrix, column-stochastic push matrix, and their Perron vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingPair {
    pub r: Matrix,
    pub c: Matrix,
    /// Left eigenvector of `R` for eigenvalue 1, entries sum to `n`.
    pub u_r: Vec<f64>,
    /// Right eigenvector of `C` for eigenvalue 1, entries sum to `n`.
    pub u_c: Vec<f64>,
}

impl MixingPair {
    /// Wraps hand-built matrices, computing their Perron vectors.
    pub fn from_matrices(r: Matrix, c: Matrix) -> Result<Self> {
        let n = r.rows();
        for (name, m) in [("R", &r), ("C", &c)] {
            if m.shape() != (n, n) {
                return Err(Error::Dimension {
                    expected: format!("{name} of shape {n}x{n}"),
                    got: format!("{:?}", m.shape()),
                });
            }
            if m.as_slice().iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(crate::error::domain(format!("{name} has a negative or non-finite entry")));
            }
        }
        let u_r = left_perron(&r)?;
        let u_c = left_perron(&c.transpose())?;
        Ok(Self { r, c, u_r, u_c })
    }

    pub fn n(&self) -> usize {
        self.r.rows()
    }

    /// Number of agents other than `i` that pull agent `i`'s x-message.
    pub fn r_out_degree(&self, i: usize) -> usize {
        (0..self.n()).filter(|&j| j != i && self.r[(j, i)] > 0.0).count()
    }

    /// Number of agents other than `i` that receive agent `i`'s y-message.
    pub fn c_out_degree(&self, i: usize) -> usize {
        (0..self.n()).filter(|&j| j != i && self.c[(j, i)] > 0.0).count()
    }

    /// Dense CSV of `R` then a blank line then `C`, for debugging.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (name, m) in [("R", &self.r), ("C", &self.c)] {
            let _ = writeln!(s, "# {name}");
            for row in m.row_iter() {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
                let _ = writeln!(s, "{}", cells.join(","));
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Uniform-weight mixing pair supported on `g`.
pub fn build_mixing_pair(g: &Digraph) -> Result<MixingPair> {
    let n = g.n();
    let mut r = Matrix::zeros(n, n);
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        let ins = g.in_neighbors(i);
        let w = 1.0 / ins.len() as f64;
        for j in ins {
            r[(i, j)] = w;
        }
        let outs = g.out_neighbors(i);
        let w = 1.0 / outs.len() as f64;
        for j in outs {
            c[(j, i)] = w;
        }
    }
    MixingPair::from_matrices(r, c)
}

/// Left eigenvector `v` with `vᵀM = vᵀ`, nonnegative, scaled to sum `n`.
///
/// Plain power iteration first; if that stalls (periodic support) the lazy
/// iteration `v <- (v + vᵀM) / 2` takes over, which has the same fixed point.
pub fn left_perron(m: &Matrix) -> Result<Vec<f64>> {
    let n = m.rows();
    let scale = n as f64;
    let mut v = vec![1.0; n];
    let mut residual = f64::INFINITY;
    for it in 0..PERRON_MAX_ITERATIONS {
        let mut next = m.left_mul_vec(&v);
        if it >= PLAIN_ITERATIONS {
            for (a, b) in next.iter_mut().zip(&v) {
                *a = 0.5 * (*a + b);
            }
        }
        let sum: f64 = next.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(crate::error::domain("matrix has no nonnegative Perron vector"));
        }
        for x in next.iter_mut() {
            *x *= scale / sum;
        }
        let mv = m.left_mul_vec(&next);
        residual = norm_inf(&mv.iter().zip(&next).map(|(a, b)| a - b).collect::<Vec<_>>());
        v = next;
        if residual <= PERRON_TOLERANCE {
            return Ok(v);
        }
    }
    Err(Error::Convergence {
        residual,
        iterations: PERRON_MAX_ITERATIONS,
    })
}

/// Outcome of checking the stochasticity and root-intersection conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// `‖R·1 − 1‖∞`
    pub row_stochastic_residual: f64,
    /// `‖1ᵀC − 1ᵀ‖∞`
    pub col_stochastic_residual: f64,
    /// `‖u_Rᵀ(R − I)‖∞`
    pub u_r_residual: f64,
    /// `‖(C − I)u_C‖∞`
    pub u_c_residual: f64,
    pub roots_r: Vec<usize>,
    pub roots_ct: Vec<usize>,
    pub intersection_nonempty: bool,
    pub u_r_dot_u_c: f64,
}

impl AssumptionReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.row_stochastic_residual <= tol
            && self.col_stochastic_residual <= tol
            && self.intersection_nonempty
            && self.u_r_dot_u_c > 0.0
    }
}

pub fn check_mixing_assumption(pair: &MixingPair) -> AssumptionReport {
    let unit_residual = |v: Vec<f64>| v.iter().fold(0.0f64, |m, x| m.max((x - 1.0).abs()));
    let row_stochastic_residual = unit_residual(pair.r.row_sums());
    let col_stochastic_residual = unit_residual(pair.c.col_sums());
    let ur_r = pair.r.left_mul_vec(&pair.u_r);
    let u_r_residual = ur_r
        .iter()
        .zip(&pair.u_r)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let c_uc = pair.c.mul_vec(&pair.u_c);
    let u_c_residual = c_uc
        .iter()
        .zip(&pair.u_c)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let support = |u: &[f64]| -> Vec<usize> {
        u.iter()
            .enumerate()
            .filter(|(_, &x)| x > ROOT_THRESHOLD)
            .map(|(i, _)| i)
            .collect()
    };
    let roots_r = support(&pair.u_r);
    let roots_ct = support(&pair.u_c);
    let intersection_nonempty = roots_r.iter().any(|i| roots_ct.contains(i));
    let u_r_dot_u_c = crate::linalg::dot(&pair.u_r, &pair.u_c);
    AssumptionReport {
        row_stochastic_residual,
        col_stochastic_residual,
        u_r_residual,
        u_c_residual,
        roots_r,
        roots_ct,
        intersection_nonempty,
        u_r_dot_u_c,
    }
}
