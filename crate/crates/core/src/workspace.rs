//! On-disk layout shared by the pipeline stages.
//!
//! ```text
//! <root>/corpus/          fetched bodies, or hand-placed .html/.txt files
//! <root>/crawl.manifest   url, status, fetch_time, depth, content_hash, body path
//! <root>/links.tsv        from_url<TAB>to_url
//! <root>/index.dat        inverted index
//! <root>/synonyms.tsv     keyword<TAB>syn1,syn2,...
//! <root>/ranks.tsv        url<TAB>score, best first
//! <root>/config.toml      optional ranking / expansion / pagerank settings
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use url::Url;

use crate::crawler::{parse_page, ContentKind, CrawlResult, FetchRecord, FetchStatus};
use crate::link_rank::{
    load_ranks, pagerank, ranks_to_tsv, LinkGraph, PageRankParams, RankError, RankVector,
};
use crate::query_engine::{Popularity, RankParams};
use crate::synonym_table::{ExpansionOptions, SynonymError, SynonymTable};
use crate::text_index::{DocId, Document, IndexError, InvertedIndex};

pub const CORPUS_DIR: &str = "corpus";
pub const MANIFEST: &str = "crawl.manifest";
pub const LINKS: &str = "links.tsv";
pub const INDEX: &str = "index.dat";
pub const SYNONYMS: &str = "synonyms.tsv";
pub const RANKS: &str = "ranks.tsv";
pub const CONFIG: &str = "config.toml";

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("{what} not found at {path} ({hint})")]
    Missing {
        what: &'static str,
        path: PathBuf,
        hint: &'static str,
    },
    #[error("corpus at {0} has no .html, .htm or .txt documents")]
    EmptyCorpus(PathBuf),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Synonyms(#[from] SynonymError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl WorkspaceError {
    /// Whether the failure is a missing or malformed input artifact, as
    /// opposed to a failure while running.
    pub fn is_input_error(&self) -> bool {
        match self {
            WorkspaceError::Missing { .. }
            | WorkspaceError::EmptyCorpus(_)
            | WorkspaceError::Parse { .. }
            | WorkspaceError::Config { .. } => true,
            WorkspaceError::Index(e) => matches!(e, IndexError::Parse { .. }),
            WorkspaceError::Synonyms(e) => matches!(e, SynonymError::Parse { .. }),
            WorkspaceError::Rank(e) => matches!(e, RankError::Parse { .. }),
            WorkspaceError::Io { source, .. } => source.kind() == io::ErrorKind::NotFound,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RankingSection {
    k1: f64,
    b: f64,
    synonym_weight: f64,
    popularity_blend: f64,
}

impl Default for RankingSection {
    fn default() -> Self {
        let p = RankParams::default();
        Self {
            k1: p.k1,
            b: p.b,
            synonym_weight: p.synonym_weight,
            popularity_blend: p.popularity_blend,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ExpansionSection {
    symmetric: bool,
    transitive_depth: usize,
    max_synonyms_per_term: usize,
}

impl Default for ExpansionSection {
    fn default() -> Self {
        let o = ExpansionOptions::default();
        Self {
            symmetric: o.symmetric,
            transitive_depth: o.transitive_depth,
            max_synonyms_per_term: o.max_synonyms_per_term,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PageRankSection {
    damping: f64,
    eps: f64,
    max_iter: usize,
}

impl Default for PageRankSection {
    fn default() -> Self {
        let p = PageRankParams::default();
        Self {
            damping: p.damping,
            eps: p.eps,
            max_iter: p.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    ranking: RankingSection,
    expansion: ExpansionSection,
    pagerank: PageRankSection,
}

/// Settings read from `config.toml`; every key is optional.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Config {
    pub ranking: RankParams,
    pub expansion: ExpansionOptions,
    pub pagerank: PageRankParams,
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> Result<Self, WorkspaceError> {
        let bad = |message: String| WorkspaceError::Config {
            path: path.to_owned(),
            message,
        };
        let file: ConfigFile = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        let config = Config {
            ranking: RankParams {
                k1: file.ranking.k1,
                b: file.ranking.b,
                synonym_weight: file.ranking.synonym_weight,
                popularity_blend: file.ranking.popularity_blend,
            },
            expansion: ExpansionOptions {
                symmetric: file.expansion.symmetric,
                transitive_depth: file.expansion.transitive_depth,
                max_synonyms_per_term: file.expansion.max_synonyms_per_term,
            },
            pagerank: PageRankParams {
                damping: file.pagerank.damping,
                eps: file.pagerank.eps,
                max_iter: file.pagerank.max_iter,
            },
        };
        config.ranking.validate().map_err(|e| bad(e.to_string()))?;
        if config.expansion.max_synonyms_per_term == 0 {
            return Err(bad("max_synonyms_per_term must be at least 1".into()));
        }
        if !(config.pagerank.damping > 0.0 && config.pagerank.damping < 1.0) {
            return Err(bad("damping must lie strictly between 0 and 1".into()));
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub record: FetchRecord,
    /// Body path relative to the workspace root, for `ok` records.
    pub body_path: Option<String>,
}

pub fn manifest_line(entry: &ManifestEntry) -> String {
    let r = &entry.record;
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}",
        r.url,
        r.status,
        r.fetch_time,
        r.depth,
        r.content_hash.map_or_else(|| "-".to_owned(), |h| format!("{h:016x}")),
        entry.body_path.as_deref().unwrap_or("-"),
    )
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<Vec<ManifestEntry>, WorkspaceError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| WorkspaceError::Parse {
            path: path.to_owned(),
            line: idx + 1,
            message: message.to_owned(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(err("expected 6 tab-separated fields"));
        }
        let status: FetchStatus = f[1].parse().map_err(|e: String| err(&e))?;
        let fetch_time = f[2].parse().map_err(|_| err("bad fetch_time"))?;
        let depth = f[3].parse().map_err(|_| err("bad depth"))?;
        let content_hash = match f[4] {
            "-" => None,
            h => Some(u64::from_str_radix(h, 16).map_err(|_| err("bad content_hash"))?),
        };
        if content_hash.is_some() != (status == FetchStatus::Ok) {
            return Err(err("content_hash must be present exactly for ok records"));
        }
        let body_path = (f[5] != "-").then(|| f[5].to_owned());
        if status == FetchStatus::Ok && body_path.is_none() {
            return Err(err("ok record without body path"));
        }
        out.push(ManifestEntry {
            record: FetchRecord {
                url: f[0].to_owned(),
                status,
                fetch_time,
                depth,
                content_hash,
            },
            body_path,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexSummary {
    pub doc_count: usize,
    pub term_count: usize,
    /// Present when a link graph was available to rank.
    pub ranks: Option<RankVector>,
    pub from_manifest: bool,
}

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn require(&self, name: &str, what: &'static str, hint: &'static str) -> Result<PathBuf, WorkspaceError> {
        let path = self.path(name);
        if path.exists() {
            Ok(path)
        } else {
            Err(WorkspaceError::Missing { what, path, hint })
        }
    }

    pub fn config(&self) -> Result<Config, WorkspaceError> {
        let path = self.path(CONFIG);
        match fs::read_to_string(&path) {
            Ok(text) => Config::parse(&text, &path),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Config::default()),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    /// Writes bodies under `corpus/`, the manifest and the link file. Bodies
    /// listed by a previous manifest are removed first.
    pub fn write_crawl(&self, crawl: &CrawlResult) -> Result<Vec<ManifestEntry>, WorkspaceError> {
        let corpus = self.path(CORPUS_DIR);
        fs::create_dir_all(&corpus).map_err(io_err(&corpus))?;
        let manifest_path = self.path(MANIFEST);
        if manifest_path.exists() {
            for old in self.read_manifest()? {
                if let Some(p) = old.body_path {
                    let _ = fs::remove_file(self.root.join(p));
                }
            }
        }

        let mut entries = Vec::with_capacity(crawl.records.len());
        let mut docs = crawl.bodies.iter().enumerate();
        for record in &crawl.records {
            let body_path = if record.status == FetchStatus::Ok {
                let (i, (body, kind)) = docs.next().expect("one body per ok record");
                let ext = match kind {
                    ContentKind::Html => "html",
                    ContentKind::Text => "txt",
                };
                let rel = format!("{CORPUS_DIR}/{i:05}.{ext}");
                let path = self.root.join(&rel);
                fs::write(&path, body).map_err(io_err(&path))?;
                Some(rel)
            } else {
                None
            };
            entries.push(ManifestEntry {
                record: record.clone(),
                body_path,
            });
        }
        let mut text = String::new();
        for e in &entries {
            text.push_str(&manifest_line(e));
            text.push('\n');
        }
        fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
        let links = self.path(LINKS);
        fs::write(&links, crawl.link_graph.to_tsv()).map_err(io_err(&links))?;
        Ok(entries)
    }

    pub fn read_manifest(&self) -> Result<Vec<ManifestEntry>, WorkspaceError> {
        let path = self.require(MANIFEST, "crawl manifest", "run `crawl` first")?;
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        parse_manifest(&text, &path)
    }

    /// Documents from the crawl manifest when one exists, otherwise every
    /// `.html`/`.htm`/`.txt` file under `corpus/` in path order.
    pub fn load_documents(&self) -> Result<(Vec<Document>, bool), WorkspaceError> {
        if self.path(MANIFEST).exists() {
            let mut docs = Vec::new();
            for entry in self.read_manifest()? {
                let Some(rel) = entry.body_path else {
                    continue;
                };
                let path = self.root.join(&rel);
                let body = fs::read_to_string(&path).map_err(io_err(&path))?;
                let url = Url::parse(&entry.record.url).map_err(|e| WorkspaceError::Parse {
                    path: self.path(MANIFEST),
                    line: docs.len() + 1,
                    message: format!("bad url: {e}"),
                })?;
                let kind = if rel.ends_with(".txt") {
                    ContentKind::Text
                } else {
                    ContentKind::Html
                };
                docs.push(parse_page(docs.len() as DocId, &url, &body, kind));
            }
            if docs.is_empty() {
                return Err(WorkspaceError::EmptyCorpus(self.path(MANIFEST)));
            }
            return Ok((docs, true));
        }

        let corpus = self.require(CORPUS_DIR, "corpus directory", "run `crawl` or add files to corpus/")?;
        let mut files = Vec::new();
        collect_files(&corpus, &mut files)?;
        files.sort();
        let mut docs = Vec::new();
        for path in files {
            let kind = match path.extension().and_then(|e| e.to_str()) {
                Some("html" | "htm") => ContentKind::Html,
                Some("txt") => ContentKind::Text,
                _ => continue,
            };
            let body = fs::read_to_string(&path).map_err(io_err(&path))?;
            let rel = path
                .strip_prefix(&corpus)
                .expect("walked from corpus")
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            let id = docs.len() as DocId;
            let url = Url::parse("file:///").expect("static url");
            let mut doc = parse_page(id, &url, &body, kind);
            doc.source = rel;
            doc.outlinks.clear();
            docs.push(doc);
        }
        if docs.is_empty() {
            return Err(WorkspaceError::EmptyCorpus(corpus));
        }
        Ok((docs, false))
    }

    /// Builds `index.dat` from the corpus and, when a crawl link file exists,
    /// `ranks.tsv` over the fetched pages.
    pub fn build_index(&self) -> Result<IndexSummary, WorkspaceError> {
        let config = self.config()?;
        let (docs, from_manifest) = self.load_documents()?;
        let index = InvertedIndex::build(&docs)?;
        index.save(&self.path(INDEX))?;

        let links_path = self.path(LINKS);
        let ranks = if from_manifest && links_path.exists() {
            let crawl_graph = LinkGraph::load(&links_path)?;
            let fetched: Vec<&str> = docs.iter().map(|d| d.source.as_str()).collect();
            let graph = crawl_graph.restricted_to(&fetched);
            let ranks = pagerank(&graph, &config.pagerank)?;
            let out = self.path(RANKS);
            fs::write(&out, ranks_to_tsv(&graph, &ranks)).map_err(io_err(&out))?;
            Some(ranks)
        } else {
            let stale = self.path(RANKS);
            if stale.exists() {
                fs::remove_file(&stale).map_err(io_err(&stale))?;
            }
            None
        };
        Ok(IndexSummary {
            doc_count: index.doc_count(),
            term_count: index.term_count(),
            ranks,
            from_manifest,
        })
    }

    pub fn load_index(&self) -> Result<InvertedIndex, WorkspaceError> {
        let path = self.require(INDEX, "index", "run `index` first")?;
        Ok(InvertedIndex::load(&path)?)
    }

    /// The synonym table; an absent file is an empty table.
    pub fn load_synonyms(&self) -> Result<SynonymTable, WorkspaceError> {
        let path = self.path(SYNONYMS);
        if !path.exists() {
            return Ok(SynonymTable::new());
        }
        Ok(SynonymTable::load(&path)?)
    }

    pub fn save_synonyms(&self, table: &SynonymTable) -> Result<(), WorkspaceError> {
        fs::create_dir_all(&self.root).map_err(io_err(&self.root))?;
        Ok(table.save(&self.path(SYNONYMS))?)
    }

    /// Popularity from `ranks.tsv`, if present.
    pub fn load_popularity(&self, index: &InvertedIndex) -> Result<Option<Popularity>, WorkspaceError> {
        let path = self.path(RANKS);
        if !path.exists() {
            return Ok(None);
        }
        let scores = load_ranks(&path)?;
        Ok(Some(Popularity::from_url_scores(index, &scores)))
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), WorkspaceError> {
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// `index --stats` text.
pub fn describe_index(index: &InvertedIndex) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "doc_count\t{}", index.doc_count());
    let _ = writeln!(out, "term_count\t{}", index.term_count());
    let _ = writeln!(out, "avg_doc_length\t{:.4}", index.avg_doc_length());
    out
}
