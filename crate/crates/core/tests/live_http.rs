//! Live-path coverage: HttpFetcher and the ingest subcommand against a
//! local HTTP server standing in for the publishers.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use newsburst::fetch::{FetchError, Fetcher, HttpFetcher};

struct StaticSite {
    server: Arc<tiny_http::Server>,
    base: String,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl StaticSite {
    /// Binds first so routes can embed the server's own base URL.
    fn start(build_routes: impl FnOnce(&str) -> Vec<(String, &'static str, Vec<u8>)>) -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
        let base = format!("http://{}", server.server_addr().to_ip().unwrap());
        let routes = build_routes(&base);
        let serving = Arc::clone(&server);
        let thread = std::thread::spawn(move || {
            for request in serving.incoming_requests() {
                let found = routes.iter().find(|(path, _, _)| path == request.url());
                let _ = match found {
                    Some((_, content_type, body)) => {
                        let header = tiny_http::Header::from_bytes(
                            &b"Content-Type"[..],
                            content_type.as_bytes(),
                        )
                        .unwrap();
                        request.respond(
                            tiny_http::Response::from_data(body.clone()).with_header(header),
                        )
                    }
                    None => request.respond(
                        tiny_http::Response::from_string("not found").with_status_code(404),
                    ),
                };
            }
        });
        Self {
            server,
            base,
            thread: Some(thread),
        }
    }
}

impl Drop for StaticSite {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

#[test]
fn http_fetcher_gets_bytes_and_reports_statuses() {
    let site = StaticSite::start(|_| {
        vec![(
            "/page.html".to_string(),
            "text/html",
            b"<html>ok</html>".to_vec(),
        )]
    });
    let fetcher = HttpFetcher::new(Path::new("."));

    let bytes = fetcher.fetch(&format!("{}/page.html", site.base)).unwrap();
    assert_eq!(bytes, b"<html>ok</html>");

    match fetcher.fetch(&format!("{}/missing", site.base)) {
        Err(FetchError::Http { status: 404, .. }) => {}
        other => panic!("expected 404, got {other:?}"),
    }

    assert!(matches!(
        fetcher.fetch("ftp://example.org/x"),
        Err(FetchError::UnsupportedScheme { .. })
    ));
}

#[test]
fn ingest_subcommand_pulls_articles_over_http() {
    let site = StaticSite::start(|base| {
        let feed = format!(
            r#"<?xml version="1.0"?><rss version="2.0"><channel><title>Live</title>
            <item><title>Zpráva po drátě</title><link>{base}/page.html</link><guid>live-1</guid>
            <pubDate>Thu, 01 Oct 2020 09:00:00 GMT</pubDate></item></channel></rss>"#
        );
        let page = r#"<html><body>
            <p class="perex">Shrnutí zprávy.</p>
            <div class="content"><p>První odstavec textu zprávy.</p><p>Druhý odstavec.</p></div>
            </body></html>"#;
        vec![
            ("/feed.xml".to_string(), "application/rss+xml", feed.into_bytes()),
            ("/page.html".to_string(), "text/html", page.as_bytes().to_vec()),
        ]
    });

    let workdir = tempfile::tempdir().unwrap();
    let config = workdir.path().join("config.toml");
    std::fs::write(
        &config,
        format!(
            r#"
            [embedding]
            provider = "hash"
            dimension = 32

            [[sources]]
            source_id = "live"
            name = "Live"
            feed_url = "{}/feed.xml"
            perex_selector = "p.perex"
            body_selector = "div.content p"
            "#,
            site.base
        ),
    )
    .unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_newsburst"))
        .args([
            "--config",
            config.to_str().unwrap(),
            "--now",
            "2020-10-01T12:00:00Z",
            "--workdir",
            workdir.path().to_str().unwrap(),
            "ingest",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("fetched 1 articles"), "{stdout}");

    let stored: Vec<_> = std::fs::read_dir(workdir.path().join("data/articles"))
        .unwrap()
        .map(|d| d.unwrap().path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    assert_eq!(stored.len(), 1);
    let record: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&stored[0]).unwrap()).unwrap();
    assert_eq!(record["title"], "Zpráva po drátě");
    assert_eq!(record["body"], "První odstavec textu zprávy.\n\nDruhý odstavec.");
    assert_eq!(record["source_id"], "live");
}
