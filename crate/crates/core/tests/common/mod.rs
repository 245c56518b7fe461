//! Brute-force reference implementations shared by the integration suites.
//! Nothing here calls into the index or scorer beyond reading inputs.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use synseek::link_rank::LinkGraph;
use synseek::synonym_table::SynonymTable;
use synseek::text_index::{DocId, Document};
use synseek::Term;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub const WORDS: &[&str] = &[
    "car", "auto", "vehicle", "data", "mining", "knowledge", "discovery", "jet", "airplane",
    "tree", "avl", "red", "black", "fast",
];

/// Lowercase alphanumeric runs, written independently of the crate tokenizer.
pub fn naive_words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Start offsets of every occurrence of `phrase` in `tokens`.
pub fn naive_matches(tokens: &[String], phrase: &[String]) -> Vec<u32> {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return Vec::new();
    }
    (0..=tokens.len() - phrase.len())
        .filter(|&i| tokens[i..i + phrase.len()] == *phrase)
        .map(|i| i as u32)
        .collect()
}

pub fn doc_tokens(doc: &Document) -> Vec<String> {
    naive_words(&format!("{} {} {}", doc.title, doc.meta_description, doc.body))
}

pub fn random_text(rng: &mut StdRng, max_words: usize) -> String {
    let n = rng.gen_range(0..=max_words);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let w = WORDS.choose(rng).unwrap();
        out.push(if rng.gen_bool(0.1) { w.to_uppercase() } else { w.to_string() });
    }
    let sep = if rng.gen_bool(0.5) { " " } else { ", " };
    out.join(sep)
}

pub fn random_corpus(rng: &mut StdRng, max_docs: usize) -> Vec<Document> {
    let n = rng.gen_range(1..=max_docs);
    (0..n)
        .map(|i| Document {
            doc_id: i as DocId,
            source: format!("doc{i}.txt"),
            title: if rng.gen_bool(0.3) { random_text(rng, 3) } else { String::new() },
            meta_description: if rng.gen_bool(0.2) { random_text(rng, 4) } else { String::new() },
            body: random_text(rng, 25),
            outlinks: vec![],
        })
        .collect()
}

pub fn random_term(rng: &mut StdRng) -> Term {
    let words = rng.gen_range(1..=2);
    let parts: Vec<&str> = (0..words).map(|_| *WORDS.choose(rng).unwrap()).collect();
    Term::new(&parts.join(" ")).unwrap()
}

pub fn random_table(rng: &mut StdRng, max_keywords: usize) -> SynonymTable {
    let mut table = SynonymTable::new();
    let n = rng.gen_range(0..=max_keywords);
    for _ in 0..n {
        let kw = random_term(rng);
        for _ in 0..rng.gen_range(1..=3) {
            let syn = random_term(rng);
            if syn != kw {
                table.insert(kw.clone(), syn).unwrap();
            }
        }
    }
    table
}

pub fn random_query(rng: &mut StdRng) -> String {
    let n = rng.gen_range(1..=3);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Reference scorer over an explicit group structure `[(original, [(member words, weight)])]`.
pub struct NaiveScorer<'a> {
    pub docs: &'a [Document],
    pub k1: f64,
    pub b: f64,
    pub alpha: f64,
}

impl NaiveScorer<'_> {
    /// doc_id -> (final, relevancy)
    pub fn score(
        &self,
        groups: &[Vec<(Vec<String>, f64)>],
        popularity: Option<&BTreeMap<DocId, f64>>,
    ) -> BTreeMap<DocId, (f64, f64)> {
        let tokens: Vec<Vec<String>> = self.docs.iter().map(doc_tokens).collect();
        let n = self.docs.len() as f64;
        let avg = tokens.iter().map(|t| t.len() as f64).sum::<f64>() / n;
        let mut relevancy: BTreeMap<DocId, f64> = BTreeMap::new();
        for (d, doc) in self.docs.iter().enumerate() {
            let len = tokens[d].len() as f64;
            let mut total = 0.0;
            let mut matched = false;
            for group in groups {
                let mut best: f64 = 0.0;
                for (words, weight) in group {
                    let tf = naive_matches(&tokens[d], words).len() as f64;
                    if tf == 0.0 {
                        continue;
                    }
                    matched = true;
                    let df = tokens
                        .iter()
                        .filter(|t| !naive_matches(t, words).is_empty())
                        .count() as f64;
                    let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                    let s = weight * idf * tf * (self.k1 + 1.0)
                        / (tf + self.k1 * (1.0 - self.b + self.b * len / avg));
                    best = best.max(s);
                }
                total += best;
            }
            if matched {
                relevancy.insert(doc.doc_id, total);
            }
        }
        let Some(pop) = popularity else {
            return relevancy.into_iter().map(|(d, r)| (d, (r, r))).collect();
        };
        let r_max = relevancy.values().cloned().fold(0.0, f64::max);
        let p_max = relevancy
            .keys()
            .map(|d| pop.get(d).copied().unwrap_or(0.0))
            .fold(0.0, f64::max);
        relevancy
            .into_iter()
            .map(|(d, r)| {
                let p = pop.get(&d).copied().unwrap_or(0.0);
                let rn = if r_max > 0.0 { r / r_max } else { r };
                let pn = if p_max > 0.0 { p / p_max } else { p };
                (d, ((1.0 - self.alpha) * rn + self.alpha * pn, r))
            })
            .collect()
    }
}

/// Dense power iteration: uniform start, dangling columns spread uniformly,
/// stop on L1 change below `eps`.
pub fn dense_pagerank(n: usize, edges: &[(usize, usize)], d: f64, eps: f64, max_iter: usize) -> Vec<f64> {
    let mut uniq: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(a, b) in edges {
        if a != b {
            uniq.insert((a, b));
        }
    }
    let mut out = vec![0usize; n];
    for &(a, _) in &uniq {
        out[a] += 1;
    }
    let mut m = vec![vec![0.0; n]; n];
    for &(a, b) in &uniq {
        m[b][a] += 1.0 / out[a] as f64;
    }
    for a in 0..n {
        if out[a] == 0 {
            for row in m.iter_mut() {
                row[a] = 1.0 / n as f64;
            }
        }
    }
    let mut r = vec![1.0 / n as f64; n];
    for _ in 0..max_iter {
        let next: Vec<f64> = (0..n)
            .map(|i| (1.0 - d) / n as f64 + d * (0..n).map(|j| m[i][j] * r[j]).sum::<f64>())
            .collect();
        let delta: f64 = r.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        r = next;
        if delta < eps {
            break;
        }
    }
    r
}

pub fn graph_from(n: usize, edges: &[(usize, usize)]) -> LinkGraph {
    let mut g = LinkGraph::new();
    for i in 0..n {
        g.add_node(&format!("n{i}"));
    }
    for &(a, b) in edges {
        g.add_edge(&format!("n{a}"), &format!("n{b}"));
    }
    g
}

pub fn random_graph(rng: &mut StdRng, n: usize) -> Vec<(usize, usize)> {
    let p = rng.gen_range(0.0..0.6);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Synonym neighbourhood reachable within `depth` steps, brute force over all pairs.
pub fn closure(table: &SynonymTable, start: &Term, depth: usize, symmetric: bool) -> BTreeSet<Term> {
    let pairs: Vec<(Term, Term)> = table
        .to_map()
        .into_iter()
        .flat_map(|(k, syns)| syns.into_iter().map(move |s| (k.clone(), s)))
        .collect();
    let mut reached: HashMap<Term, usize> = HashMap::from([(start.clone(), 0)]);
    for step in 1..=depth {
        let frontier: Vec<Term> = reached
            .iter()
            .filter(|(_, &d)| d == step - 1)
            .map(|(t, _)| t.clone())
            .collect();
        for t in frontier {
            for (k, s) in &pairs {
                if *k == t && !reached.contains_key(s) {
                    reached.insert(s.clone(), step);
                }
                if symmetric && *s == t && !reached.contains_key(k) {
                    reached.insert(k.clone(), step);
                }
            }
        }
    }
    reached.remove(start);
    reached.into_keys().collect()
}
