mod common;

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use synseek::crawler::{
    crawl, crawl_with_clock, revisit, CrawlConfig, CrawlError, FetchStatus, HttpFetcher,
    LocalFetcher, Revisit,
};

use common::fixtures;

fn site() -> PathBuf {
    fixtures().join("site")
}

fn local_config(max_pages: usize) -> CrawlConfig {
    CrawlConfig {
        seeds: vec![site().join("index.html").to_string_lossy().into_owned()],
        max_pages,
        politeness_delay: Duration::ZERO,
        ..Default::default()
    }
}

fn file_names(urls: impl IntoIterator<Item = String>) -> Vec<String> {
    urls.into_iter()
        .map(|u| u.rsplit('/').next().unwrap().to_string())
        .collect()
}

#[test]
fn local_crawl_is_breadth_first_and_repeatable() {
    let fetcher = LocalFetcher::new(&site()).unwrap();
    let a = crawl_with_clock(&local_config(50), &fetcher, &|| 42).unwrap();
    let b = crawl_with_clock(&local_config(50), &fetcher, &|| 42).unwrap();
    let order = file_names(a.records.iter().map(|r| r.url.clone()));
    assert_eq!(
        order,
        ["index.html", "a.html", "b.html", "c.html", "d.html", "e.html", "f.html", "g.html", "h.html", "i.html"]
    );
    let depths: Vec<usize> = a.records.iter().map(|r| r.depth).collect();
    assert_eq!(depths, [0, 1, 1, 1, 2, 2, 2, 3, 3, 3]);
    assert!(a.records.iter().all(|r| r.status == FetchStatus::Ok && r.fetch_time == 42));
    assert_eq!(a.records, b.records);
    assert_eq!(a.link_graph.to_tsv(), b.link_graph.to_tsv());
    // the offsite anchor is recorded in the crawl graph but never fetched
    assert_eq!(a.link_graph.edges().len(), 15);
}

#[test]
fn max_pages_bounds_fetch_attempts() {
    let fetcher = LocalFetcher::new(&site()).unwrap();
    let r = crawl(&local_config(1), &fetcher).unwrap();
    assert_eq!(r.records.len(), 1);
    assert_eq!(r.documents.len(), 1);
    assert!(matches!(
        crawl(&local_config(0), &fetcher),
        Err(CrawlError::ZeroPages)
    ));
}

#[test]
fn max_depth_zero_fetches_only_seeds() {
    let fetcher = LocalFetcher::new(&site()).unwrap();
    let config = CrawlConfig {
        max_depth: 0,
        ..local_config(50)
    };
    let r = crawl(&config, &fetcher).unwrap();
    assert_eq!(r.documents.len(), 1);
}

#[test]
fn revisit_detects_changes() {
    let dir = tempfile::tempdir().unwrap();
    let page = dir.path().join("p.html");
    fs::write(&page, "<html><title>one</title><body>first</body></html>").unwrap();
    let fetcher = LocalFetcher::new(dir.path()).unwrap();
    let config = CrawlConfig {
        seeds: vec![page.to_string_lossy().into_owned()],
        politeness_delay: Duration::ZERO,
        ..Default::default()
    };
    let r = crawl_with_clock(&config, &fetcher, &|| 100).unwrap();
    let rec = &r.records[0];
    assert!(matches!(revisit(rec, &fetcher, 200), Revisit::Unchanged(r) if r.fetch_time == 200));
    fs::write(&page, "<html><title>two</title><body>second</body></html>").unwrap();
    match revisit(rec, &fetcher, 300) {
        Revisit::Changed { record, .. } => {
            assert_eq!(record.fetch_time, 300);
            assert_ne!(record.content_hash, rec.content_hash);
        }
        other => panic!("expected a change, got {other:?}"),
    }
    fs::remove_file(&page).unwrap();
    assert!(matches!(revisit(rec, &fetcher, 400), Revisit::Failed(_)));
}

/// Serves the fixture site, closing the connection after each response.
fn serve(robots: &'static str) -> u16 {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            thread::spawn(move || respond(stream, robots));
        }
    });
    port
}

fn respond(mut stream: TcpStream, robots: &str) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request = String::new();
    if reader.read_line(&mut request).is_err() {
        return;
    }
    let mut line = String::new();
    while reader.read_line(&mut line).is_ok_and(|n| n > 2) {
        line.clear();
    }
    let path = request.split_whitespace().nth(1).unwrap_or("/").to_string();
    let (status, ctype, body) = match path.as_str() {
        "/robots.txt" => ("200 OK", "text/plain", robots.as_bytes().to_vec()),
        "/image.png" => ("200 OK", "image/png", vec![0x89, b'P', b'N', b'G']),
        p => match fs::read(site().join(p.trim_start_matches('/'))) {
            Ok(b) => ("200 OK", "text/html; charset=utf-8", b),
            Err(_) => ("404 Not Found", "text/plain", b"missing".to_vec()),
        },
    };
    let head = format!(
        "HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    let _ = stream.write_all(head.as_bytes());
    let _ = stream.write_all(&body);
}

fn http_config(port: u16, path: &str) -> CrawlConfig {
    CrawlConfig {
        seeds: vec![format!("http://127.0.0.1:{port}{path}")],
        max_pages: 50,
        politeness_delay: Duration::from_millis(5),
        ..Default::default()
    }
}

#[test]
fn http_crawl_honors_robots() {
    let port = serve("User-agent: *\nDisallow: /h.html\n");
    let r = crawl(&http_config(port, "/index.html"), &HttpFetcher::new()).unwrap();
    assert_eq!(r.records.len(), 10);
    let h = r.records.iter().find(|r| r.url.ends_with("/h.html")).unwrap();
    assert_eq!(h.status, FetchStatus::Skipped);
    let docs: BTreeSet<String> = file_names(r.documents.iter().map(|d| d.source.clone()))
        .into_iter()
        .collect();
    assert_eq!(docs.len(), 9);
    assert!(!docs.contains("h.html"));
    let home = r.documents.iter().find(|d| d.source.ends_with("/index.html")).unwrap();
    assert!(!home.title.is_empty());
}

#[test]
fn http_crawl_reports_missing_and_unsupported_pages() {
    let port = serve("");
    let fetcher = HttpFetcher::new();
    assert!(matches!(
        crawl(&http_config(port, "/nope.html"), &fetcher),
        Err(CrawlError::EmptyCrawl)
    ));
    let mut config = http_config(port, "/nope.html");
    config.seeds.push(format!("http://127.0.0.1:{port}/image.png"));
    config.seeds.push(format!("http://127.0.0.1:{port}/a.html"));
    config.max_depth = 0;
    let r = crawl(&config, &fetcher).unwrap();
    let statuses: Vec<FetchStatus> = r.records.iter().map(|r| r.status).collect();
    assert_eq!(
        statuses,
        [FetchStatus::HttpError(404), FetchStatus::Skipped, FetchStatus::Ok]
    );
}

#[test]
fn unreachable_seed_gives_empty_crawl() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let err = crawl(&http_config(port, "/"), &HttpFetcher::new()).unwrap_err();
    assert!(matches!(err, CrawlError::EmptyCrawl));
}
