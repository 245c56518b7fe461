//! Keyword to synonym mapping stored as a separately chained hash table.
//!
//! Each bucket holds a singly linked list of keyword entries; each entry owns
//! a singly linked chain of synonym links that ends at a `None` sentinel.
//! Lookup walks the bucket chain to the keyword, then walks the synonym chain.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::hash::fnv1a64;
use crate::term::{normalize_term, InvalidTerm, Term};

pub const INITIAL_BUCKETS: usize = 16;
pub const MAX_LOAD_FACTOR: f64 = 0.75;

#[derive(Debug, Error)]
pub enum SynonymError {
    #[error("keyword {0:?} cannot be its own synonym")]
    SelfSynonym(String),
    #[error(transparent)]
    InvalidTerm(#[from] InvalidTerm),
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

struct Link {
    term: Term,
    next: Option<Box<Link>>,
}

/// Ordered, duplicate-free chain of synonyms for one keyword.
#[derive(Default)]
pub struct SynonymChain {
    head: Option<Box<Link>>,
    len: usize,
}

impl SynonymChain {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> ChainIter<'_> {
        ChainIter {
            cursor: self.head.as_deref(),
        }
    }

    pub fn contains(&self, term: &Term) -> bool {
        self.iter().any(|t| t == term)
    }

    /// Appends at the tail unless already present. Returns whether it was added.
    fn push(&mut self, term: Term) -> bool {
        let mut slot = &mut self.head;
        while let Some(link) = slot {
            if link.term == term {
                return false;
            }
            slot = &mut link.next;
        }
        *slot = Some(Box::new(Link { term, next: None }));
        self.len += 1;
        true
    }
}

impl Drop for SynonymChain {
    fn drop(&mut self) {
        let mut cur = self.head.take();
        while let Some(mut link) = cur {
            cur = link.next.take();
        }
    }
}

impl fmt::Debug for SynonymChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

pub struct ChainIter<'a> {
    cursor: Option<&'a Link>,
}

impl<'a> Iterator for ChainIter<'a> {
    type Item = &'a Term;

    fn next(&mut self) -> Option<&'a Term> {
        let link = self.cursor?;
        self.cursor = link.next.as_deref();
        Some(&link.term)
    }
}

struct Entry {
    keyword: Term,
    chain: SynonymChain,
    next: Option<Box<Entry>>,
}

/// Result of probing the table for a keyword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub bucket: usize,
    /// Bucket-chain entries examined. For a hit this is the 1-based position of
    /// the keyword in its bucket; for a miss it is the chain length plus the
    /// terminal sentinel.
    pub probes: usize,
    pub found: bool,
}

pub struct SynonymTable {
    buckets: Vec<Option<Box<Entry>>>,
    entry_count: usize,
}

impl fmt::Debug for SynonymTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SynonymTable")
            .field("bucket_count", &self.buckets.len())
            .field("entries", &self.to_map())
            .finish()
    }
}

impl Default for SynonymTable {
    fn default() -> Self {
        Self::new()
    }
}

impl SynonymTable {
    pub fn new() -> Self {
        Self::with_buckets(INITIAL_BUCKETS)
    }

    fn with_buckets(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let mut buckets = Vec::with_capacity(n);
        buckets.resize_with(n, || None);
        Self {
            buckets,
            entry_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entry_count
    }

    pub fn is_empty(&self) -> bool {
        self.entry_count == 0
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn load_factor(&self) -> f64 {
        self.entry_count as f64 / self.buckets.len() as f64
    }

    pub fn bucket_of(&self, keyword: &Term) -> usize {
        (fnv1a64(keyword.as_str().as_bytes()) as usize) & (self.buckets.len() - 1)
    }

    /// Adds `synonym` to the end of `keyword`'s chain. Returns `Ok(false)` if
    /// the pair was already present.
    pub fn insert(&mut self, keyword: Term, synonym: Term) -> Result<bool, SynonymError> {
        if keyword == synonym {
            return Err(SynonymError::SelfSynonym(keyword.as_str().to_owned()));
        }
        let bucket = self.bucket_of(&keyword);
        let mut slot = &mut self.buckets[bucket];
        while let Some(entry) = slot {
            if entry.keyword == keyword {
                return Ok(entry.chain.push(synonym));
            }
            slot = &mut entry.next;
        }
        let mut chain = SynonymChain::default();
        chain.push(synonym);
        *slot = Some(Box::new(Entry {
            keyword,
            chain,
            next: None,
        }));
        self.entry_count += 1;
        if self.load_factor() > MAX_LOAD_FACTOR {
            self.grow();
        }
        Ok(true)
    }

    fn grow(&mut self) {
        let mut bigger = Self::with_buckets(self.buckets.len() * 2);
        for head in std::mem::take(&mut self.buckets) {
            let mut cur = head;
            while let Some(mut entry) = cur {
                cur = entry.next.take();
                let bucket = bigger.bucket_of(&entry.keyword);
                let mut slot = &mut bigger.buckets[bucket];
                while let Some(e) = slot {
                    slot = &mut e.next;
                }
                *slot = Some(entry);
            }
        }
        bigger.entry_count = self.entry_count;
        *self = bigger;
    }

    fn find(&self, keyword: &Term) -> (Option<&Entry>, Probe) {
        let bucket = self.bucket_of(keyword);
        let mut probes = 0;
        let mut cur = self.buckets[bucket].as_deref();
        while let Some(entry) = cur {
            probes += 1;
            if entry.keyword == *keyword {
                let probe = Probe {
                    bucket,
                    probes,
                    found: true,
                };
                return (Some(entry), probe);
            }
            cur = entry.next.as_deref();
        }
        let probe = Probe {
            bucket,
            probes: probes + 1,
            found: false,
        };
        (None, probe)
    }

    pub fn chain(&self, keyword: &Term) -> Option<&SynonymChain> {
        self.find(keyword).0.map(|e| &e.chain)
    }

    /// Synonyms of `keyword` in insertion order; empty when the keyword is absent.
    pub fn lookup(&self, keyword: &Term) -> Vec<Term> {
        self.chain(keyword)
            .map(|c| c.iter().cloned().collect())
            .unwrap_or_default()
    }

    pub fn probe(&self, keyword: &Term) -> Probe {
        self.find(keyword).1
    }

    pub fn contains_keyword(&self, keyword: &Term) -> bool {
        self.find(keyword).0.is_some()
    }

    /// Keyword entries in bucket order, then chain order.
    pub fn entries(&self) -> impl Iterator<Item = (&Term, &SynonymChain)> {
        self.buckets.iter().flat_map(|head| {
            let mut cur = head.as_deref();
            std::iter::from_fn(move || {
                let e = cur?;
                cur = e.next.as_deref();
                Some((&e.keyword, &e.chain))
            })
        })
    }

    /// Keywords whose chain contains `term`, sorted.
    pub fn keywords_linking_to(&self, term: &Term) -> Vec<Term> {
        let mut out: Vec<Term> = self
            .entries()
            .filter(|(_, chain)| chain.contains(term))
            .map(|(k, _)| k.clone())
            .collect();
        out.sort();
        out
    }

    /// Every keyword and synonym known to the table.
    pub fn vocabulary(&self) -> HashSet<Term> {
        let mut vocab = HashSet::new();
        for (k, chain) in self.entries() {
            vocab.insert(k.clone());
            vocab.extend(chain.iter().cloned());
        }
        vocab
    }

    /// Keyword to chain mapping, sorted by keyword.
    pub fn to_map(&self) -> BTreeMap<Term, Vec<Term>> {
        self.entries()
            .map(|(k, c)| (k.clone(), c.iter().cloned().collect()))
            .collect()
    }

    pub fn chain_stats(&self) -> ChainStats {
        let mut histogram = Vec::new();
        let mut max_chain_len = 0;
        let mut used = 0;
        for head in &self.buckets {
            let mut len = 0;
            let mut cur = head.as_deref();
            while let Some(e) = cur {
                len += 1;
                cur = e.next.as_deref();
            }
            if histogram.len() <= len {
                histogram.resize(len + 1, 0);
            }
            histogram[len] += 1;
            max_chain_len = max_chain_len.max(len);
            if len > 0 {
                used += 1;
            }
        }
        ChainStats {
            bucket_count: self.buckets.len(),
            entry_count: self.entry_count,
            max_chain_len,
            mean_chain_len: self.entry_count as f64 / self.buckets.len() as f64,
            mean_nonempty_chain_len: if used == 0 {
                0.0
            } else {
                self.entry_count as f64 / used as f64
            },
            synonym_links: self.entries().map(|(_, c)| c.len()).sum(),
            histogram,
        }
    }

    pub fn load(path: &Path) -> Result<Self, SynonymError> {
        let mut table = Self::new();
        table.import(path)?;
        Ok(table)
    }

    /// Merges the rows of a synonym file into this table. Returns the number of
    /// (keyword, synonym) pairs newly added.
    pub fn import(&mut self, path: &Path) -> Result<usize, SynonymError> {
        let text = fs::read_to_string(path).map_err(|source| SynonymError::Io {
            path: path.to_owned(),
            source,
        })?;
        self.import_str(&text, path)
    }

    fn import_str(&mut self, text: &str, path: &Path) -> Result<usize, SynonymError> {
        let parse_err = |line: usize, message: String| SynonymError::Parse {
            path: path.to_owned(),
            line,
            message,
        };
        let mut added = 0;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (kw, syns) = line
                .split_once('\t')
                .ok_or_else(|| parse_err(lineno, "expected keyword<TAB>synonyms".into()))?;
            let keyword =
                normalize_term(kw).map_err(|_| parse_err(lineno, "empty keyword".into()))?;
            let mut any = false;
            for raw in syns.split(',') {
                if raw.trim().is_empty() {
                    continue;
                }
                let syn = normalize_term(raw).expect("non-blank");
                if syn == keyword {
                    return Err(parse_err(lineno, format!("{keyword:?} lists itself")));
                }
                any = true;
                if self.insert(keyword.clone(), syn)? {
                    added += 1;
                }
            }
            if !any {
                return Err(parse_err(lineno, "keyword has no synonyms".into()));
            }
        }
        Ok(added)
    }

    pub fn parse(text: &str) -> Result<Self, SynonymError> {
        let mut table = Self::new();
        table.import_str(text, Path::new("<memory>"))?;
        Ok(table)
    }

    /// Serializes to the tab-separated format, keywords sorted so output is
    /// stable regardless of bucket layout.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, chain) in self.to_map() {
            let syns: Vec<&str> = chain.iter().map(Term::as_str).collect();
            let _ = writeln!(out, "{}\t{}", k, syns.join(","));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), SynonymError> {
        fs::write(path, self.to_tsv()).map_err(|source| SynonymError::Io {
            path: path.to_owned(),
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStats {
    pub bucket_count: usize,
    pub entry_count: usize,
    pub max_chain_len: usize,
    /// Entries per bucket, i.e. the load factor.
    pub mean_chain_len: f64,
    pub mean_nonempty_chain_len: f64,
    pub synonym_links: usize,
    /// `histogram[n]` = number of buckets whose chain holds `n` keywords.
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpansionOptions {
    /// Also follow chains backwards: a keyword whose chain holds the term counts
    /// as a synonym of the term.
    pub symmetric: bool,
    /// 0 disables expansion, 1 fetches direct synonyms only.
    pub transitive_depth: usize,
    pub max_synonyms_per_term: usize,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self {
            symmetric: false,
            transitive_depth: 1,
            max_synonyms_per_term: 16,
        }
    }
}

impl ExpansionOptions {
    pub fn disabled() -> Self {
        Self {
            transitive_depth: 0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Original,
    /// Reached from this original query term (at any depth).
    SynonymOf(Term),
}

/// Expands `terms` through the table. Every distinct input term comes first,
/// tagged `Original`, in input order; then, per input term, its synonyms in
/// breadth-first order. Inputs are never re-tagged as synonyms. A term reached
/// from two different inputs appears once per input.
pub fn expand_terms(
    table: &SynonymTable,
    terms: &[Term],
    opts: &ExpansionOptions,
) -> Vec<(Term, Origin)> {
    let mut originals: Vec<&Term> = Vec::new();
    let mut seen_original = HashSet::new();
    for t in terms {
        if seen_original.insert(t) {
            originals.push(t);
        }
    }
    let mut out: Vec<(Term, Origin)> = originals
        .iter()
        .map(|t| ((*t).clone(), Origin::Original))
        .collect();
    if opts.transitive_depth == 0 || opts.max_synonyms_per_term == 0 {
        return out;
    }

    let reverse = opts.symmetric.then(|| reverse_links(table));
    let neighbours = |t: &Term| -> Vec<Term> {
        let mut next = table.lookup(t);
        if let Some(rev) = &reverse {
            if let Some(back) = rev.get(t) {
                next.extend(back.iter().cloned());
            }
        }
        next
    };

    for root in originals {
        let mut visited: HashSet<Term> = HashSet::new();
        visited.insert(root.clone());
        let mut queue = VecDeque::from([(root.clone(), 0usize)]);
        let mut taken = 0;
        'bfs: while let Some((term, depth)) = queue.pop_front() {
            if depth == opts.transitive_depth {
                continue;
            }
            for n in neighbours(&term) {
                if !visited.insert(n.clone()) {
                    continue;
                }
                queue.push_back((n.clone(), depth + 1));
                if seen_original.contains(&n) {
                    continue;
                }
                out.push((n, Origin::SynonymOf(root.clone())));
                taken += 1;
                if taken == opts.max_synonyms_per_term {
                    break 'bfs;
                }
            }
        }
    }
    out
}

fn reverse_links(table: &SynonymTable) -> HashMap<Term, Vec<Term>> {
    let mut rev: HashMap<Term, Vec<Term>> = HashMap::new();
    for (k, chain) in table.entries() {
        for s in chain.iter() {
            rev.entry(s.clone()).or_default().push(k.clone());
        }
    }
    for v in rev.values_mut() {
        v.sort();
    }
    rev
}
