//! Random-surfer popularity over the hyperlink graph.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("link graph has no nodes")]
    EmptyGraph,
    #[error("damping must lie strictly between 0 and 1, got {0}")]
    BadDamping(f64),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Directed graph over URLs with dense node ids in first-seen order.
/// Self-loops are dropped and parallel edges collapsed on insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkGraph {
    nodes: Vec<String>,
    ids: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    edge_set: HashSet<(usize, usize)>,
}

impl LinkGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, url: &str) -> usize {
        if let Some(&id) = self.ids.get(url) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(url.to_owned());
        self.ids.insert(url.to_owned(), id);
        id
    }

    /// Returns whether a new edge was recorded.
    pub fn add_edge(&mut self, from: &str, to: &str) -> bool {
        let a = self.add_node(from);
        let b = self.add_node(to);
        if a == b || !self.edge_set.insert((a, b)) {
            return false;
        }
        self.edges.push((a, b));
        true
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn id(&self, url: &str) -> Option<usize> {
        self.ids.get(url).copied()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_urls(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }

    /// Sorted `(from, to)` URL pairs, for comparing graphs irrespective of ids.
    pub fn edge_set_by_url(&self) -> BTreeSet<(String, String)> {
        self.edge_urls()
            .map(|(a, b)| (a.to_owned(), b.to_owned()))
            .collect()
    }

    /// Subgraph over `fetched` (in that order), keeping only edges whose two
    /// endpoints were fetched.
    pub fn restricted_to<S: AsRef<str>>(&self, fetched: &[S]) -> LinkGraph {
        let mut g = LinkGraph::new();
        for u in fetched {
            g.add_node(u.as_ref());
        }
        for (a, b) in self.edge_urls() {
            if g.id(a).is_some() && g.id(b).is_some() {
                g.add_edge(a, b);
            }
        }
        g
    }

    /// `from<TAB>to` per edge, in insertion order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (a, b) in self.edge_urls() {
            let _ = writeln!(out, "{a}\t{b}");
        }
        out
    }

    pub fn parse_tsv(text: &str, path: &Path) -> Result<Self, RankError> {
        let mut g = LinkGraph::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (a, b) = line.split_once('\t').ok_or_else(|| RankError::Parse {
                path: path.to_owned(),
                line: idx + 1,
                message: "expected from_url<TAB>to_url".into(),
            })?;
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self, RankError> {
        let text = fs::read_to_string(path).map_err(|source| RankError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse_tsv(&text, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankParams {
    pub damping: f64,
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            damping: 0.85,
            eps: 1e-8,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub scores: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Power iteration from the uniform vector. Mass held by nodes without
/// outlinks is spread evenly over all nodes every step. Stops once the L1
/// change between iterates drops below `eps`.
pub fn pagerank(graph: &LinkGraph, params: &PageRankParams) -> Result<RankVector, RankError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(RankError::EmptyGraph);
    }
    let d = params.damping;
    if !(d > 0.0 && d < 1.0) {
        return Err(RankError::BadDamping(d));
    }

    let mut out_degree = vec![0usize; n];
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in graph.edges() {
        out_degree[a] += 1;
        incoming[b].push(a);
    }
    let dangling: Vec<usize> = (0..n).filter(|&v| out_degree[v] == 0).collect();

    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations_used = 0;
    let mut converged = false;
    while iterations_used < params.max_iter {
        iterations_used += 1;
        let dangling_mass: f64 = dangling.iter().map(|&v| rank[v]).sum();
        let base = (1.0 - d) / nf + d * dangling_mass / nf;
        for v in 0..n {
            let inflow: f64 = incoming[v]
                .iter()
                .map(|&u| rank[u] / out_degree[u] as f64)
                .sum();
            next[v] = base + d * inflow;
        }
        // renormalize away floating drift
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < params.eps {
            converged = true;
            break;
        }
    }
    Ok(RankVector {
        scores: rank,
        iterations_used,
        converged,
    })
}

/// `url<TAB>score` lines, highest score first, ties by URL.
pub fn ranks_to_tsv(graph: &LinkGraph, ranks: &RankVector) -> String {
    let mut rows: Vec<(&str, f64)> = graph
        .nodes()
        .iter()
        .map(String::as_str)
        .zip(ranks.scores.iter().copied())
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut out = String::new();
    for (url, score) in rows {
        let _ = writeln!(out, "{url}\t{score:.17e}");
    }
    out
}

pub fn load_ranks(path: &Path) -> Result<HashMap<String, f64>, RankError> {
    let text = fs::read_to_string(path).map_err(|source| RankError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut out = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let parsed = line
            .rsplit_once('\t')
            .and_then(|(u, s)| s.parse::<f64>().ok().map(|s| (u, s)));
        let (url, score) = parsed.ok_or_else(|| RankError::Parse {
            path: path.to_owned(),
            line: idx + 1,
            message: "expected url<TAB>score".into(),
        })?;
        out.insert(url.to_owned(), score);
    }
    Ok(out)
}
