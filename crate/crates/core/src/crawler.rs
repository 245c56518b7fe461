//! Breadth-first crawler: fetch pages through a [`Fetcher`], read titles and
//! meta tags, follow anchors, and record the link graph.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use scraper::{Html, Node, Selector};
use thiserror::Error;
use url::Url;

use crate::hash::fnv1a64;
use crate::link_rank::LinkGraph;
use crate::robots::Robots;
use crate::text_index::{DocId, Document};

pub const USER_AGENT: &str = concat!("synseek/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error("no seed URLs given")]
    NoSeeds,
    #[error("invalid seed {seed:?}: {reason}")]
    BadSeed { seed: String, reason: String },
    #[error("no seed could be fetched")]
    EmptyCrawl,
    #[error("max_pages must be at least 1")]
    ZeroPages,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrawlConfig {
    pub seeds: Vec<String>,
    pub max_pages: usize,
    pub max_depth: usize,
    pub same_host_only: bool,
    pub politeness_delay: Duration,
    pub revisit_interval: Duration,
    pub parallel_fetches: usize,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        Self {
            seeds: Vec::new(),
            max_pages: 100,
            max_depth: 5,
            same_host_only: true,
            politeness_delay: Duration::from_millis(200),
            revisit_interval: Duration::from_secs(86_400),
            parallel_fetches: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContentKind {
    Html,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchOutcome {
    Ok { body: String, kind: ContentKind },
    HttpError(u16),
    Unreachable,
    /// Not fetched: robots exclusion, unsupported content type, or outside the
    /// fetcher's reach.
    Skipped,
}

/// Source of pages. Implementations must be safe to call from several threads.
pub trait Fetcher: Sync {
    fn fetch(&self, url: &Url) -> FetchOutcome;

    /// Whether the per-host politeness delay applies to this source.
    fn polite(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchStatus {
    Ok,
    HttpError(u16),
    Unreachable,
    Skipped,
}

impl fmt::Display for FetchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FetchStatus::Ok => f.write_str("ok"),
            FetchStatus::HttpError(code) => write!(f, "http_error:{code}"),
            FetchStatus::Unreachable => f.write_str("unreachable"),
            FetchStatus::Skipped => f.write_str("skipped"),
        }
    }
}

impl FromStr for FetchStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ok" => Ok(FetchStatus::Ok),
            "unreachable" => Ok(FetchStatus::Unreachable),
            "skipped" => Ok(FetchStatus::Skipped),
            _ => s
                .strip_prefix("http_error:")
                .and_then(|c| c.parse().ok())
                .map(FetchStatus::HttpError)
                .ok_or_else(|| format!("unknown fetch status {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchRecord {
    pub url: String,
    pub status: FetchStatus,
    /// Seconds since the Unix epoch.
    pub fetch_time: u64,
    /// FNV-1a of the raw body; present iff `status` is `Ok`.
    pub content_hash: Option<u64>,
    pub depth: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PageMeta {
    pub title: String,
    pub meta_description: String,
    pub meta_keywords: String,
}

#[derive(Debug, Clone, Default)]
pub struct CrawlResult {
    pub documents: Vec<Document>,
    /// Raw body of each document, parallel to `documents`.
    pub bodies: Vec<(String, ContentKind)>,
    pub records: Vec<FetchRecord>,
    /// Edges from every fetched page to every link it carries, fetched or not.
    pub link_graph: LinkGraph,
}

impl CrawlResult {
    pub fn fetched_urls(&self) -> Vec<&str> {
        self.documents.iter().map(|d| d.source.as_str()).collect()
    }
}

fn fetchable(url: &Url) -> bool {
    matches!(url.scheme(), "http" | "https" | "file")
}

/// Absolute targets of every `<a href>`, fragments stripped, first occurrence
/// kept. Links with schemes we cannot fetch (mailto:, javascript:) are dropped.
pub fn extract_links(html: &str, base: &Url) -> Vec<Url> {
    let doc = Html::parse_document(html);
    let sel = Selector::parse("a[href]").expect("static selector");
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in doc.select(&sel) {
        let Some(href) = a.value().attr("href") else {
            continue;
        };
        let Ok(mut url) = base.join(href.trim()) else {
            continue;
        };
        url.set_fragment(None);
        if fetchable(&url) && seen.insert(url.to_string()) {
            out.push(url);
        }
    }
    out
}

pub fn extract_meta(html: &str) -> PageMeta {
    let doc = Html::parse_document(html);
    let title_sel = Selector::parse("title").expect("static selector");
    let meta_sel = Selector::parse("meta[name][content]").expect("static selector");
    let title = doc
        .select(&title_sel)
        .next()
        .map(|t| collapse(&t.text().collect::<String>()))
        .unwrap_or_default();
    let mut meta = PageMeta {
        title,
        ..Default::default()
    };
    for m in doc.select(&meta_sel) {
        let name = m.value().attr("name").unwrap_or("").to_ascii_lowercase();
        let content = collapse(m.value().attr("content").unwrap_or(""));
        match name.as_str() {
            "description" if meta.meta_description.is_empty() => meta.meta_description = content,
            "keywords" if meta.meta_keywords.is_empty() => meta.meta_keywords = content,
            _ => {}
        }
    }
    meta
}

/// Visible text outside `<head>`, scripts and styles.
pub fn extract_text(html: &str) -> String {
    let doc = Html::parse_document(html);
    let mut parts = Vec::new();
    for node in doc.tree.root().descendants() {
        let Node::Text(text) = node.value() else {
            continue;
        };
        let hidden = node.ancestors().any(|a| match a.value() {
            Node::Element(e) => matches!(
                e.name(),
                "head" | "script" | "style" | "noscript" | "template" | "title"
            ),
            _ => false,
        });
        if !hidden && !text.trim().is_empty() {
            parts.push(text.trim().to_owned());
        }
    }
    collapse(&parts.join(" "))
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Builds the indexable document for a fetched body.
pub fn parse_page(doc_id: DocId, url: &Url, body: &str, kind: ContentKind) -> Document {
    match kind {
        ContentKind::Html => {
            let meta = extract_meta(body);
            Document {
                doc_id,
                source: url.to_string(),
                title: meta.title,
                meta_description: meta.meta_description,
                body: extract_text(body),
                outlinks: extract_links(body, url)
                    .into_iter()
                    .map(String::from)
                    .collect(),
            }
        }
        ContentKind::Text => Document {
            doc_id,
            source: url.to_string(),
            body: body.to_owned(),
            ..Default::default()
        },
    }
}

fn host_key(url: &Url) -> String {
    match (url.host_str(), url.port_or_known_default()) {
        (Some(h), Some(p)) => format!("{h}:{p}"),
        (Some(h), None) => h.to_owned(),
        _ => String::new(),
    }
}

pub fn parse_seed(seed: &str) -> Result<Url, CrawlError> {
    let bad = |reason: String| CrawlError::BadSeed {
        seed: seed.to_owned(),
        reason,
    };
    let mut url = match Url::parse(seed) {
        Ok(u) => u,
        Err(url::ParseError::RelativeUrlWithoutBase) => {
            let mut path = fs::canonicalize(seed).map_err(|e| bad(e.to_string()))?;
            if path.is_dir() && path.join("index.html").is_file() {
                path.push("index.html");
            }
            let url = if path.is_dir() {
                Url::from_directory_path(&path)
            } else {
                Url::from_file_path(&path)
            };
            url.map_err(|_| bad("not an absolute path".into()))?
        }
        Err(e) => return Err(bad(e.to_string())),
    };
    if !fetchable(&url) {
        return Err(bad(format!("unsupported scheme {}", url.scheme())));
    }
    url.set_fragment(None);
    Ok(url)
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn crawl(config: &CrawlConfig, fetcher: &dyn Fetcher) -> Result<CrawlResult, CrawlError> {
    crawl_with_clock(config, fetcher, &unix_now)
}

/// Breadth-first crawl with a FIFO frontier. Fetches run in batches of up to
/// `parallel_fetches` URLs with distinct hosts; results are recorded in
/// frontier order, so output is deterministic for a deterministic fetcher.
pub fn crawl_with_clock(
    config: &CrawlConfig,
    fetcher: &dyn Fetcher,
    clock: &(dyn Fn() -> u64 + Sync),
) -> Result<CrawlResult, CrawlError> {
    if config.seeds.is_empty() {
        return Err(CrawlError::NoSeeds);
    }
    if config.max_pages == 0 {
        return Err(CrawlError::ZeroPages);
    }
    let seeds = config
        .seeds
        .iter()
        .map(|s| parse_seed(s))
        .collect::<Result<Vec<_>, _>>()?;
    let seed_hosts: HashSet<String> = seeds.iter().map(host_key).collect();

    let mut result = CrawlResult::default();
    let mut frontier: VecDeque<(Url, usize)> = VecDeque::new();
    let mut enqueued: HashSet<String> = HashSet::new();
    for s in seeds {
        if enqueued.insert(s.to_string()) {
            frontier.push_back((s, 0));
        }
    }

    let last_fetch: Mutex<HashMap<String, Instant>> = Mutex::new(HashMap::new());
    let parallel = config.parallel_fetches.max(1);

    while !frontier.is_empty() && result.records.len() < config.max_pages {
        let budget = (config.max_pages - result.records.len()).min(parallel);
        let mut batch: Vec<(Url, usize)> = Vec::with_capacity(budget);
        let mut batch_hosts = HashSet::new();
        while batch.len() < budget {
            let Some((url, _)) = frontier.front() else {
                break;
            };
            if !batch_hosts.insert(host_key(url)) {
                break;
            }
            batch.push(frontier.pop_front().expect("front exists"));
        }

        let outcomes: Vec<(FetchOutcome, u64)> = thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .map(|(url, _)| {
                    let last_fetch = &last_fetch;
                    scope.spawn(move || {
                        if fetcher.polite() {
                            wait_for_host(last_fetch, &host_key(url), config.politeness_delay);
                        }
                        let outcome = fetcher.fetch(url);
                        if fetcher.polite() {
                            last_fetch
                                .lock()
                                .expect("politeness map poisoned")
                                .insert(host_key(url), Instant::now());
                        }
                        (outcome, clock())
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("fetch thread panicked"))
                .collect()
        });

        for ((url, depth), (outcome, fetch_time)) in batch.into_iter().zip(outcomes) {
            let url_s = url.to_string();
            let (status, hash) = match &outcome {
                FetchOutcome::Ok { body, .. } => (FetchStatus::Ok, Some(fnv1a64(body.as_bytes()))),
                FetchOutcome::HttpError(c) => (FetchStatus::HttpError(*c), None),
                FetchOutcome::Unreachable => (FetchStatus::Unreachable, None),
                FetchOutcome::Skipped => (FetchStatus::Skipped, None),
            };
            result.records.push(FetchRecord {
                url: url_s.clone(),
                status,
                fetch_time,
                content_hash: hash,
                depth,
            });
            let FetchOutcome::Ok { body, kind } = outcome else {
                continue;
            };
            let doc = parse_page(result.documents.len() as DocId, &url, &body, kind);
            result.link_graph.add_node(&url_s);
            for link in &doc.outlinks {
                result.link_graph.add_edge(&url_s, link);
                if depth >= config.max_depth || enqueued.contains(link) {
                    continue;
                }
                let Ok(target) = Url::parse(link) else {
                    continue;
                };
                if config.same_host_only && !seed_hosts.contains(&host_key(&target)) {
                    continue;
                }
                enqueued.insert(link.clone());
                frontier.push_back((target, depth + 1));
            }
            result.documents.push(doc);
            result.bodies.push((body, kind));
        }
    }

    if result.documents.is_empty() {
        return Err(CrawlError::EmptyCrawl);
    }
    Ok(result)
}

fn wait_for_host(last_fetch: &Mutex<HashMap<String, Instant>>, host: &str, delay: Duration) {
    let previous = last_fetch
        .lock()
        .expect("politeness map poisoned")
        .get(host)
        .copied();
    if let Some(prev) = previous {
        let ready = prev + delay;
        let now = Instant::now();
        if ready > now {
            thread::sleep(ready - now);
        }
    }
}

pub fn due_for_revisit(record: &FetchRecord, config: &CrawlConfig, now: u64) -> bool {
    now.saturating_sub(record.fetch_time) >= config.revisit_interval.as_secs()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Revisit {
    /// Same content hash; only `fetch_time` moved.
    Unchanged(FetchRecord),
    Changed {
        record: FetchRecord,
        body: String,
        kind: ContentKind,
    },
    Failed(FetchRecord),
}

/// Fetches `record.url` again and compares content hashes.
pub fn revisit(record: &FetchRecord, fetcher: &dyn Fetcher, now: u64) -> Revisit {
    let Ok(url) = Url::parse(&record.url) else {
        return Revisit::Failed(FetchRecord {
            status: FetchStatus::Skipped,
            content_hash: None,
            fetch_time: now,
            ..record.clone()
        });
    };
    match fetcher.fetch(&url) {
        FetchOutcome::Ok { body, kind } => {
            let hash = fnv1a64(body.as_bytes());
            let refreshed = FetchRecord {
                status: FetchStatus::Ok,
                fetch_time: now,
                content_hash: Some(hash),
                ..record.clone()
            };
            if record.content_hash == Some(hash) {
                Revisit::Unchanged(refreshed)
            } else {
                Revisit::Changed {
                    record: refreshed,
                    body,
                    kind,
                }
            }
        }
        other => {
            let status = match other {
                FetchOutcome::HttpError(c) => FetchStatus::HttpError(c),
                FetchOutcome::Unreachable => FetchStatus::Unreachable,
                _ => FetchStatus::Skipped,
            };
            Revisit::Failed(FetchRecord {
                status,
                fetch_time: now,
                content_hash: None,
                ..record.clone()
            })
        }
    }
}

/// Serves `file://` URLs from beneath a root directory. Directory URLs map to
/// their `index.html`. Only `.html`, `.htm` and `.txt` files are served.
#[derive(Debug, Clone)]
pub struct LocalFetcher {
    root: PathBuf,
}

impl LocalFetcher {
    pub fn new(root: &Path) -> std::io::Result<Self> {
        Ok(Self {
            root: fs::canonicalize(root)?,
        })
    }
}

impl Fetcher for LocalFetcher {
    fn fetch(&self, url: &Url) -> FetchOutcome {
        if url.scheme() != "file" {
            return FetchOutcome::Skipped;
        }
        let Ok(mut path) = url.to_file_path() else {
            return FetchOutcome::Unreachable;
        };
        if path.is_dir() {
            path.push("index.html");
        }
        let Ok(path) = fs::canonicalize(&path) else {
            return FetchOutcome::Unreachable;
        };
        if !path.starts_with(&self.root) {
            return FetchOutcome::Skipped;
        }
        let kind = match path.extension().and_then(|e| e.to_str()) {
            Some("html" | "htm") => ContentKind::Html,
            Some("txt") => ContentKind::Text,
            _ => return FetchOutcome::Skipped,
        };
        match fs::read_to_string(&path) {
            Ok(body) => FetchOutcome::Ok { body, kind },
            Err(_) => FetchOutcome::Unreachable,
        }
    }

    fn polite(&self) -> bool {
        false
    }
}

/// Blocking HTTP(S) fetcher. Follows up to 5 redirects, accepts only
/// `text/html` and `text/plain`, and honors robots.txt per origin.
pub struct HttpFetcher {
    agent: ureq::Agent,
    robots: Mutex<HashMap<String, Robots>>,
}

impl Default for HttpFetcher {
    fn default() -> Self {
        Self::new()
    }
}

impl HttpFetcher {
    pub fn new() -> Self {
        let agent = ureq::AgentBuilder::new()
            .user_agent(USER_AGENT)
            .redirects(5)
            .timeout(Duration::from_secs(15))
            .build();
        Self {
            agent,
            robots: Mutex::new(HashMap::new()),
        }
    }

    fn robots_for(&self, url: &Url) -> Robots {
        let origin = url.origin().ascii_serialization();
        if let Some(r) = self.robots.lock().expect("robots cache poisoned").get(&origin) {
            return r.clone();
        }
        let robots = url
            .join("/robots.txt")
            .ok()
            .and_then(|u| self.agent.get(u.as_str()).call().ok())
            .and_then(|resp| resp.into_string().ok())
            .map(|text| Robots::parse(&text, USER_AGENT))
            .unwrap_or_else(Robots::allow_all);
        self.robots
            .lock()
            .expect("robots cache poisoned")
            .insert(origin, robots.clone());
        robots
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, url: &Url) -> FetchOutcome {
        if !matches!(url.scheme(), "http" | "https") {
            return FetchOutcome::Skipped;
        }
        if !self.robots_for(url).allows(url.path()) {
            return FetchOutcome::Skipped;
        }
        match self.agent.get(url.as_str()).call() {
            Ok(resp) => {
                let kind = match resp.content_type() {
                    "text/html" => ContentKind::Html,
                    "text/plain" => ContentKind::Text,
                    _ => return FetchOutcome::Skipped,
                };
                match resp.into_string() {
                    Ok(body) => FetchOutcome::Ok { body, kind },
                    Err(_) => FetchOutcome::Unreachable,
                }
            }
            Err(ureq::Error::Status(code, _)) => FetchOutcome::HttpError(code),
            Err(ureq::Error::Transport(_)) => FetchOutcome::Unreachable,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct MapFetcher(HashMap<String, String>);

    impl Fetcher for MapFetcher {
        fn fetch(&self, url: &Url) -> FetchOutcome {
            match self.0.get(url.as_str()) {
                Some(b) => FetchOutcome::Ok {
                    body: b.clone(),
                    kind: ContentKind::Html,
                },
                None => FetchOutcome::HttpError(404),
            }
        }
        fn polite(&self) -> bool {
            false
        }
    }

    fn site(pages: &[(&str, &str)]) -> MapFetcher {
        MapFetcher(
            pages
                .iter()
                .map(|(u, b)| (u.to_string(), b.to_string()))
                .collect(),
        )
    }

    fn config(seed: &str, max_pages: usize) -> CrawlConfig {
        CrawlConfig {
            seeds: vec![seed.into()],
            max_pages,
            politeness_delay: Duration::ZERO,
            ..Default::default()
        }
    }

    #[test]
    fn links_resolved_and_deduplicated() {
        let base = Url::parse("http://s/a.html").unwrap();
        let links = extract_links(r#"<a href="b.html">b</a>"#, &base);
        assert_eq!(links, vec![Url::parse("http://s/b.html").unwrap()]);
        assert!(extract_links("<p>nothing</p>", &base).is_empty());
        let dup = extract_links(
            r##"<a href="b.html">1</a><a href="b.html#top">2</a><a href="/b.html">3</a>"##,
            &base,
        );
        assert_eq!(dup.len(), 1);
        let skipped = extract_links(r#"<a href="mailto:x@y">m</a><a href="c">c</a>"#, &base);
        assert_eq!(skipped, vec![Url::parse("http://s/c").unwrap()]);
    }

    #[test]
    fn meta_fields() {
        let m = extract_meta("<html><head><title>Cars</title></head></html>");
        assert_eq!(m.title, "Cars");
        assert_eq!(extract_meta("<p>hi</p>"), PageMeta::default());
        let m = extract_meta(
            r#"<meta name="keywords" content="auto, vehicle"><meta name="Description" content="All about  cars">"#,
        );
        assert_eq!(m.meta_keywords, "auto, vehicle");
        assert_eq!(m.meta_description, "All about cars");
    }

    #[test]
    fn visible_text_only() {
        let t = extract_text(
            "<html><head><title>T</title><style>p{}</style></head><body><p>Hello <b>world</b></p><script>x()</script></body></html>",
        );
        assert_eq!(t, "Hello world");
    }

    #[test]
    fn single_page_budget_records_outlinks_only() {
        let f = site(&[
            ("http://s/", r#"<a href="a">a</a><a href="b">b</a>"#),
            ("http://s/a", "a"),
        ]);
        let r = crawl_with_clock(&config("http://s/", 1), &f, &|| 7).unwrap();
        assert_eq!(r.documents.len(), 1);
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.link_graph.node_count(), 3);
        assert_eq!(r.link_graph.edges().len(), 2);
        assert_eq!(r.records[0].fetch_time, 7);
        assert!(r.records[0].content_hash.is_some());
    }

    #[test]
    fn failing_seed_is_empty_crawl() {
        let f = site(&[]);
        assert!(matches!(
            crawl(&config("http://s/", 10), &f),
            Err(CrawlError::EmptyCrawl)
        ));
        let mut c = config("http://s/", 10);
        c.seeds.clear();
        assert!(matches!(crawl(&c, &f), Err(CrawlError::NoSeeds)));
    }

    #[test]
    fn failures_recorded_not_fatal() {
        let f = site(&[("http://s/", r#"<a href="gone">x</a><a href="ok">y</a>"#), ("http://s/ok", "fine")]);
        let r = crawl_with_clock(&config("http://s/", 10), &f, &|| 0).unwrap();
        let statuses: Vec<_> = r.records.iter().map(|r| r.status).collect();
        assert_eq!(
            statuses,
            [FetchStatus::Ok, FetchStatus::HttpError(404), FetchStatus::Ok]
        );
        assert_eq!(r.records[1].content_hash, None);
    }

    #[test]
    fn depth_and_host_limits() {
        let f = site(&[
            ("http://s/", r#"<a href="d1">1</a><a href="http://other/">o</a>"#),
            ("http://s/d1", r#"<a href="d2">2</a>"#),
            ("http://s/d2", "deep"),
            ("http://other/", "elsewhere"),
        ]);
        let mut c = config("http://s/", 10);
        c.max_depth = 1;
        let r = crawl_with_clock(&c, &f, &|| 0).unwrap();
        assert_eq!(r.fetched_urls(), ["http://s/", "http://s/d1"]);
        assert!(r.records.iter().all(|rec| rec.depth <= 1));

        c.same_host_only = false;
        c.max_depth = 5;
        let r = crawl_with_clock(&c, &f, &|| 0).unwrap();
        assert_eq!(r.documents.len(), 4);
    }

    #[test]
    fn politeness_delay_spaces_same_host_fetches() {
        struct Slow(MapFetcher);
        impl Fetcher for Slow {
            fn fetch(&self, url: &Url) -> FetchOutcome {
                self.0.fetch(url)
            }
        }
        let f = Slow(site(&[
            ("http://s/", r#"<a href="a">a</a><a href="b">b</a>"#),
            ("http://s/a", "a"),
            ("http://s/b", "b"),
        ]));
        let mut c = config("http://s/", 10);
        c.politeness_delay = Duration::from_millis(40);
        let start = Instant::now();
        let r = crawl(&c, &f).unwrap();
        assert_eq!(r.documents.len(), 3);
        assert!(start.elapsed() >= Duration::from_millis(80));
    }

    #[test]
    fn status_text_round_trip() {
        for s in [
            FetchStatus::Ok,
            FetchStatus::HttpError(503),
            FetchStatus::Unreachable,
            FetchStatus::Skipped,
        ] {
            assert_eq!(s.to_string().parse::<FetchStatus>().unwrap(), s);
        }
        assert!("bogus".parse::<FetchStatus>().is_err());
    }

    #[test]
    fn revisit_schedule() {
        let c = CrawlConfig::default();
        let interval = c.revisit_interval.as_secs();
        let rec = FetchRecord {
            url: "http://s/".into(),
            status: FetchStatus::Ok,
            fetch_time: 1_000_000,
            content_hash: Some(fnv1a64(b"same")),
            depth: 0,
        };
        let now = rec.fetch_time;
        assert!(!due_for_revisit(&rec, &c, now));
        assert!(!due_for_revisit(&rec, &c, now + interval - 1));
        assert!(due_for_revisit(&rec, &c, now + interval));
        assert!(due_for_revisit(&rec, &c, now + 2 * interval));

        let f = site(&[("http://s/", "same")]);
        match revisit(&rec, &f, now + interval) {
            Revisit::Unchanged(r) => {
                assert_eq!(r.content_hash, rec.content_hash);
                assert_eq!(r.fetch_time, now + interval);
            }
            other => panic!("expected unchanged, got {other:?}"),
        }
        let changed = site(&[("http://s/", "different")]);
        assert!(matches!(revisit(&rec, &changed, now), Revisit::Changed { .. }));
        let gone = site(&[]);
        assert!(matches!(revisit(&rec, &gone, now), Revisit::Failed(_)));
    }
}
