//! Webhook delivery against a scripted local endpoint.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use newsburst::compose::{CropRect, FontTier, ImageSpec, Post};
use newsburst::publish::publish_webhook;
use newsburst::score::{PostCategory, Region};

fn post() -> Post {
    Post {
        post_id: "pwh1".into(),
        representative_article_id: "a1".into(),
        title: "Titulek".into(),
        description: "Popis události.".into(),
        image: ImageSpec {
            source_image_url: "u".into(),
            crop: CropRect { x: 0, y: 0, side: 4 },
            frame_color: [1, 2, 3],
            frame_width: 1,
            title_text: "Titulek".into(),
            font_tier: FontTier::Large,
        },
        category: PostCategory {
            region: Region::National,
            important: false,
        },
        link: "https://example.cz/a1".into(),
        hashtags: vec![],
        created_at: "2020-10-01T12:00:00Z".parse().unwrap(),
    }
}

struct Mock {
    server: Arc<tiny_http::Server>,
    hits: Arc<AtomicUsize>,
    thread: Option<std::thread::JoinHandle<Vec<String>>>,
}

/// Responds with `status` to every request, recording request summaries.
fn scripted_endpoint(status: u16, body: &'static str) -> (String, Mock) {
    let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
    let addr = server.server_addr().to_ip().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let serving = Arc::clone(&server);
    let counting = Arc::clone(&hits);
    let thread = std::thread::spawn(move || {
        let mut seen = Vec::new();
        for mut request in serving.incoming_requests() {
            counting.fetch_add(1, Ordering::SeqCst);
            let auth = request
                .headers()
                .iter()
                .find(|h| h.field.equiv("Authorization"))
                .map(|h| h.value.to_string())
                .unwrap_or_default();
            let content_type = request
                .headers()
                .iter()
                .find(|h| h.field.equiv("Content-Type"))
                .map(|h| h.value.to_string())
                .unwrap_or_default();
            let mut body_bytes = Vec::new();
            request.as_reader().read_to_end(&mut body_bytes).unwrap();
            seen.push(format!(
                "auth={auth} type={content_type} body_len={} has_caption={}",
                body_bytes.len(),
                String::from_utf8_lossy(&body_bytes).contains("Popis události.")
            ));
            let response = tiny_http::Response::from_string(body).with_status_code(status);
            let _ = request.respond(response);
        }
        seen
    });
    (
        format!("http://{addr}/hook"),
        Mock {
            server,
            hits,
            thread: Some(thread),
        },
    )
}

impl Mock {
    fn finish(mut self) -> (usize, Vec<String>) {
        self.server.unblock();
        let seen = self.thread.take().unwrap().join().unwrap();
        (self.hits.load(Ordering::SeqCst), seen)
    }
}

#[test]
fn webhook_success_carries_auth_and_multipart_payload() {
    let (endpoint, mock) = scripted_endpoint(200, "id-12345");
    let receipt = publish_webhook(&post(), b"PNGBYTES", &endpoint, "secret-token", 1).unwrap();
    let (hits, seen) = mock.finish();

    assert!(receipt.delivered());
    match &receipt.outcome {
        newsburst::publish::Outcome::Delivered { detail } => assert_eq!(detail, "id-12345"),
        other => panic!("unexpected outcome {other:?}"),
    }
    assert_eq!(hits, 1);
    assert!(seen[0].contains("auth=Bearer secret-token"), "{}", seen[0]);
    assert!(seen[0].contains("type=multipart/form-data; boundary="), "{}", seen[0]);
    assert!(seen[0].contains("has_caption=true"), "{}", seen[0]);
}

#[test]
fn webhook_gives_up_after_three_attempts_on_500() {
    let (endpoint, mock) = scripted_endpoint(500, "boom");
    let receipt = publish_webhook(&post(), b"PNG", &endpoint, "secret", 1).unwrap();
    let (hits, _) = mock.finish();

    assert!(receipt.failed());
    assert_eq!(hits, 3, "expected exactly 3 attempts");
    match &receipt.outcome {
        newsburst::publish::Outcome::Failed { error } => {
            assert!(error.contains("500"), "{error}");
            assert!(error.contains("3 attempts"), "{error}");
        }
        other => panic!("unexpected outcome {other:?}"),
    }
}

#[test]
fn webhook_unreachable_endpoint_fails_without_panicking() {
    // nothing listens on this port
    let receipt = publish_webhook(&post(), b"PNG", "http://127.0.0.1:9/unreachable", "t", 1).unwrap();
    assert!(receipt.failed());
}
