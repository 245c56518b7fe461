use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use synseek::crawler::{self, CrawlConfig, CrawlError, HttpFetcher, LocalFetcher};
use synseek::evaluation::{evaluate_engine, EvalError, JudgmentSet};
use synseek::query_engine::{render_jsonl, render_table, QueryError, SearchEngine, DEFAULT_PAGE_SIZE};
use synseek::synonym_table::{SynonymError, SynonymTable};
use synseek::workspace::{describe_index, Workspace, WorkspaceError};
use synseek::Term;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Synonym-expanding search engine: crawl, index, query and evaluate.
#[derive(Debug, Parser)]
#[command(name = "synseek", version)]
struct Cli {
    /// Workspace directory holding corpus/, index.dat, synonyms.tsv, ...
    #[arg(short, long, global = true, default_value = ".")]
    workspace: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Crawl from seed URLs (or a local directory) into the workspace
    Crawl(CrawlArgs),
    /// Build index.dat (and ranks.tsv after a crawl) from the corpus
    Index {
        /// Print document and term counts
        #[arg(long)]
        stats: bool,
    },
    /// Manage the synonym table
    #[command(subcommand)]
    Synonyms(SynonymsCmd),
    /// Search the index
    Query(QueryArgs),
    /// Compare keyword-only and expanded retrieval against judgments
    Eval(EvalArgs),
    /// Time random lookups against the synonym table
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FetcherKind {
    /// http(s) seeds use HTTP, paths use the local fetcher
    Auto,
    Http,
    Local,
}

#[derive(Debug, Args)]
struct CrawlArgs {
    /// Seed URL or local path; repeatable
    #[arg(long = "seed", required = true)]
    seeds: Vec<String>,
    #[arg(long, value_enum, default_value_t = FetcherKind::Auto)]
    fetcher: FetcherKind,
    /// Directory the local fetcher may read (default: the seed's directory)
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    max_pages: u64,
    #[arg(long, default_value_t = 5)]
    max_depth: usize,
    /// Follow links to hosts other than the seeds'
    #[arg(long)]
    allow_offsite: bool,
    /// Minimum gap between fetches to one host
    #[arg(long, default_value_t = 200)]
    politeness_delay_ms: u64,
    #[arg(long, default_value_t = 86_400)]
    revisit_interval_secs: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    parallel: u64,
}

#[derive(Debug, Subcommand)]
enum SynonymsCmd {
    /// Append a synonym to a keyword's chain
    Add { keyword: String, synonym: String },
    /// Print a keyword's chain, or the whole table
    List { keyword: Option<String> },
    /// Merge a keyword<TAB>syn1,syn2 file into the table
    Import { file: PathBuf },
    /// Bucket and chain statistics
    Stats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Jsonl,
}

#[derive(Debug, Args)]
struct QueryArgs {
    text: String,
    /// Search the literal query terms only
    #[arg(long)]
    no_expand: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    page: u64,
    #[arg(long, default_value_t = DEFAULT_PAGE_SIZE as u64, value_parser = clap::value_parser!(u64).range(1..))]
    page_size: u64,
    /// Show term groups and per-result match breakdown
    #[arg(long)]
    explain: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Judgments file (default: <workspace>/judgments.tsv)
    #[arg(long)]
    judgments: Option<PathBuf>,
    /// Cutoffs, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10])]
    k: Vec<usize>,
    /// Report path prefix; writes <prefix>.txt and <prefix>.jsonl
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Benchmark a generated table with this many keywords instead of synonyms.tsv
    #[arg(long)]
    generate: Option<usize>,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    lookups: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Runtime(String),
}

impl From<WorkspaceError> for Failure {
    fn from(e: WorkspaceError) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<SynonymError> for Failure {
    fn from(e: SynonymError) -> Self {
        match e {
            SynonymError::SelfSynonym(_) | SynonymError::InvalidTerm(_) => Failure::Usage(e.to_string()),
            SynonymError::Parse { .. } | SynonymError::Io { .. } => Failure::Input(e.to_string()),
        }
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BadK | EvalError::Query { .. } => Failure::Usage(e.to_string()),
            EvalError::UndefinedRecall => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let ws = Workspace::new(&cli.workspace);
    let result = match cli.command {
        Command::Crawl(args) => cmd_crawl(&ws, args),
        Command::Index { stats } => cmd_index(&ws, stats),
        Command::Synonyms(cmd) => cmd_synonyms(&ws, cmd),
        Command::Query(args) => cmd_query(&ws, args),
        Command::Eval(args) => cmd_eval(&ws, args),
        Command::Bench(args) => cmd_bench(&ws, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn local_root(args: &CrawlArgs) -> Result<PathBuf, Failure> {
    if let Some(r) = &args.root {
        return Ok(r.clone());
    }
    let seed = Path::new(&args.seeds[0]);
    if seed.is_dir() {
        Ok(seed.to_owned())
    } else {
        seed.parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_owned)
            .or_else(|| Some(PathBuf::from(".")))
            .ok_or_else(|| Failure::Usage("cannot infer --root".into()))
    }
}

fn cmd_crawl(ws: &Workspace, args: CrawlArgs) -> Result<(), Failure> {
    let config = CrawlConfig {
        seeds: args.seeds.clone(),
        max_pages: args.max_pages as usize,
        max_depth: args.max_depth,
        same_host_only: !args.allow_offsite,
        politeness_delay: Duration::from_millis(args.politeness_delay_ms),
        revisit_interval: Duration::from_secs(args.revisit_interval_secs),
        parallel_fetches: args.parallel as usize,
    };
    let use_http = match args.fetcher {
        FetcherKind::Http => true,
        FetcherKind::Local => false,
        FetcherKind::Auto => args.seeds.iter().all(|s| s.starts_with("http://") || s.starts_with("https://")),
    };
    let result = if use_http {
        crawler::crawl(&config, &HttpFetcher::new())
    } else {
        let root = local_root(&args)?;
        let fetcher = LocalFetcher::new(&root)
            .map_err(|e| Failure::Input(format!("{}: {e}", root.display())))?;
        crawler::crawl(&config, &fetcher)
    };
    let result = result.map_err(|e| match e {
        CrawlError::EmptyCrawl => Failure::Runtime(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    })?;
    let entries = ws.write_crawl(&result)?;
    println!(
        "crawled {} pages ({} fetch records, {} links) into {}",
        result.documents.len(),
        entries.len(),
        result.link_graph.edges().len(),
        ws.root().display()
    );
    Ok(())
}

fn cmd_index(ws: &Workspace, stats: bool) -> Result<(), Failure> {
    let summary = ws.build_index()?;
    println!(
        "indexed {} documents ({} terms){}",
        summary.doc_count,
        summary.term_count,
        match &summary.ranks {
            Some(r) => format!(", ranked {} pages in {} iterations", r.scores.len(), r.iterations_used),
            None => String::new(),
        }
    );
    if stats {
        print!("{}", describe_index(&ws.load_index()?));
    }
    Ok(())
}

fn cmd_synonyms(ws: &Workspace, cmd: SynonymsCmd) -> Result<(), Failure> {
    match cmd {
        SynonymsCmd::Add { keyword, synonym } => {
            let mut table = ws.load_synonyms()?;
            let added = table.insert(Term::new(&keyword).map_err(SynonymError::from)?, Term::new(&synonym).map_err(SynonymError::from)?)?;
            ws.save_synonyms(&table)?;
            if !added {
                println!("already present");
            }
        }
        SynonymsCmd::List { keyword } => {
            let table = ws.load_synonyms()?;
            match keyword {
                Some(k) => {
                    let k = Term::new(&k).map_err(SynonymError::from)?;
                    for s in table.lookup(&k) {
                        println!("{s}");
                    }
                }
                None => print!("{}", table.to_tsv()),
            }
        }
        SynonymsCmd::Import { file } => {
            let mut table = ws.load_synonyms()?;
            let added = table.import(&file)?;
            ws.save_synonyms(&table)?;
            println!("imported {added} pairs; table holds {} keywords", table.len());
        }
        SynonymsCmd::Stats => {
            let stats = ws.load_synonyms()?.chain_stats();
            println!("bucket_count\t{}", stats.bucket_count);
            println!("entry_count\t{}", stats.entry_count);
            println!("synonym_links\t{}", stats.synonym_links);
            println!("load_factor\t{:.4}", stats.mean_chain_len);
            println!("mean_nonempty_chain_len\t{:.4}", stats.mean_nonempty_chain_len);
            println!("max_chain_len\t{}", stats.max_chain_len);
            for (len, count) in stats.histogram.iter().enumerate() {
                println!("chain_len={len}\t{count}");
            }
        }
    }
    Ok(())
}

fn cmd_query(ws: &Workspace, args: QueryArgs) -> Result<(), Failure> {
    if args.text.trim().is_empty() {
        return Err(Failure::Usage("query text is empty".into()));
    }
    let config = ws.config()?;
    let index = ws.load_index()?;
    let table = ws.load_synonyms()?;
    let popularity = ws.load_popularity(&index)?;
    let engine = SearchEngine::new(&index, &table)
        .with_popularity(popularity.as_ref())
        .with_params(config.ranking)
        .with_expansion(config.expansion);
    let expand = !args.no_expand;
    let serp = engine.search(&args.text, expand, args.page as usize, args.page_size as usize)?;
    match args.format {
        OutputFormat::Jsonl => print!("{}", render_jsonl(&serp, &index)),
        OutputFormat::Table => {
            let eq = if args.explain {
                Some(engine.expand(&args.text, expand)?)
            } else {
                None
            };
            print!("{}", render_table(&serp, &index, eq.as_ref()));
        }
    }
    Ok(())
}

fn cmd_eval(ws: &Workspace, args: EvalArgs) -> Result<(), Failure> {
    if args.k.is_empty() || args.k.contains(&0) {
        return Err(Failure::Usage("--k takes positive cutoffs".into()));
    }
    let path = args.judgments.unwrap_or_else(|| ws.path("judgments.tsv"));
    if !path.exists() {
        return Err(Failure::Input(format!("judgments file not found at {}", path.display())));
    }
    let judgments = JudgmentSet::load(&path)?;
    let config = ws.config()?;
    let index = ws.load_index()?;
    let table = ws.load_synonyms()?;
    let popularity = ws.load_popularity(&index)?;
    let engine = SearchEngine::new(&index, &table)
        .with_popularity(popularity.as_ref())
        .with_params(config.ranking)
        .with_expansion(config.expansion);
    let report = evaluate_engine(&engine, &judgments, &args.k)?;
    let prefix = args.out.unwrap_or_else(|| ws.path("report"));
    let txt = prefix.with_extension("txt");
    let jsonl = prefix.with_extension("jsonl");
    let table_text = report.to_table();
    fs::write(&txt, &table_text).map_err(|e| Failure::Runtime(format!("{}: {e}", txt.display())))?;
    fs::write(&jsonl, report.to_jsonl()).map_err(|e| Failure::Runtime(format!("{}: {e}", jsonl.display())))?;
    print!("{table_text}");
    Ok(())
}

fn generated_table(keywords: usize, rng: &mut StdRng) -> SynonymTable {
    let mut table = SynonymTable::new();
    for i in 0..keywords {
        let kw = Term::new(&format!("kw{i:07}")).expect("non-empty");
        for _ in 0..rng.gen_range(1..=3) {
            let syn = Term::new(&format!("syn{:07}", rng.gen_range(0..keywords.max(1)))).expect("non-empty");
            table.insert(kw.clone(), syn).expect("distinct prefixes");
        }
    }
    table
}

fn percentile(sorted: &[usize], q: f64) -> usize {
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx]
}

fn cmd_bench(ws: &Workspace, args: BenchArgs) -> Result<(), Failure> {
    let mut rng = StdRng::seed_from_u64(args.seed);
    let table = match args.generate {
        Some(n) => generated_table(n, &mut rng),
        None => ws.load_synonyms()?,
    };
    let stats = table.chain_stats();
    println!(
        "table: {} keywords, {} buckets, load factor {:.4}, max chain {}",
        stats.entry_count, stats.bucket_count, stats.mean_chain_len, stats.max_chain_len
    );
    let keys: Vec<Term> = table.entries().map(|(k, _)| k.clone()).collect();
    if keys.is_empty() {
        println!("lookups: 0 (table is empty)");
        return Ok(());
    }
    let picks: Vec<&Term> = (0..args.lookups)
        .map(|_| keys.choose(&mut rng).expect("non-empty"))
        .collect();

    let mut probes: Vec<usize> = picks.iter().map(|k| table.probe(k).probes).collect();
    let start = Instant::now();
    let mut fetched = 0usize;
    for k in &picks {
        fetched += table.lookup(k).len();
    }
    let elapsed = start.elapsed();

    probes.sort_unstable();
    let mean = probes.iter().sum::<usize>() as f64 / probes.len() as f64;
    println!("lookups: {}", picks.len());
    println!(
        "probes: mean {:.4}  p50 {}  p90 {}  p99 {}  max {}",
        mean,
        percentile(&probes, 0.5),
        percentile(&probes, 0.9),
        percentile(&probes, 0.99),
        probes.last().copied().unwrap_or(0)
    );
    println!(
        "wall: {:.3} ms total, {:.1} ns/lookup, {} synonyms fetched",
        elapsed.as_secs_f64() * 1e3,
        elapsed.as_nanos() as f64 / picks.len() as f64,
        fetched
    );
    Ok(())
}
