use std::sync::{Arc, Mutex, Once};
use std::thread;
use std::time::Duration;

use maskfix_core::filler::{
    prompt_fill, sequential_fill, span_fill, FillError, FillRequest, HttpTransport, Transcript, API_KEY_ENV,
};
use serde_json::{json, Value};

const KEY: &str = "test-credential";

fn set_key() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| std::env::set_var(API_KEY_ENV, KEY));
}

/// Local endpoint answering each JSON request with `reply(body)` after
/// `delay`. Records request bodies and whether the bearer header arrived.
struct Endpoint {
    url: String,
    seen: Arc<Mutex<Vec<(Value, bool)>>>,
}

fn serve(delay: Duration, reply: impl Fn(&Value) -> String + Send + 'static) -> Endpoint {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let port = server.server_addr().to_ip().unwrap().port();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for mut request in server.incoming_requests() {
            let mut body = String::new();
            request.as_reader().read_to_string(&mut body).unwrap();
            let body: Value = serde_json::from_str(&body).unwrap_or(Value::Null);
            let authorized = request
                .headers()
                .iter()
                .any(|h| h.field.equiv("Authorization") && h.value.as_str() == format!("Bearer {KEY}"));
            log.lock().unwrap().push((body.clone(), authorized));
            thread::sleep(delay);
            let response = tiny_http::Response::from_string(reply(&body))
                .with_header("Content-Type: application/json".parse::<tiny_http::Header>().unwrap());
            let _ = request.respond(response);
        }
    });
    Endpoint {
        url: format!("http://127.0.0.1:{port}/fill"),
        seen,
    }
}

fn transport(url: &str, timeout: Duration, transcript: Transcript) -> HttpTransport {
    set_key();
    HttpTransport::new(url.to_string(), timeout, 2, transcript)
}

fn request(beam: usize) -> FillRequest {
    FillRequest {
        context_text: "// return allResultsMatch(n, MAY_BE_STRING_PREDICATE);\nstatic boolean mayBeString(Node n) {\n  return <mask>(n, MAY_BE_STRING_PREDICATE);\n}".into(),
        masked_line: "  return <mask>(n, MAY_BE_STRING_PREDICATE);".into(),
        mask_count: 1,
        beam_size: beam,
        mask_token: "<mask>".into(),
    }
}

#[test]
fn span_fill_over_http_keeps_backend_ranking() {
    let endpoint = serve(Duration::ZERO, |_| {
        json!({"candidates": [
            {"fills": ["anyResultsMatch</s>"], "score": -0.1},
            {"fills": ["allResultsMatch"], "score": -0.9},
            {"fills": ["mayBeStringResult"], "score": -2.5}
        ]})
        .to_string()
    });
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("filler.jsonl");
    let t = transport(&endpoint.url, Duration::from_secs(5), Transcript::create(&log).unwrap());
    let fills = span_fill(&request(250), &t, "span").unwrap();
    let texts: Vec<&str> = fills.iter().map(|f| f.fills[0].as_str()).collect();
    assert_eq!(texts, ["anyResultsMatch", "allResultsMatch", "mayBeStringResult"]);

    let seen = endpoint.seen.lock().unwrap();
    let (body, authorized) = &seen[0];
    assert!(authorized);
    assert_eq!(body["mask_token"], "<mask>");
    assert_eq!(body["mask_count"], 1);
    assert_eq!(body["beam"], 250);
    assert!(body["context"].as_str().unwrap().contains("return <mask>(n, MAY_BE_STRING_PREDICATE);"));

    let transcript = std::fs::read_to_string(&log).unwrap();
    let kinds: Vec<String> = transcript
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["kind"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(kinds, ["request", "reply"]);
}

#[test]
fn span_fill_truncates_to_beam() {
    let endpoint = serve(Duration::ZERO, |_| {
        json!({"candidates": [{"fills": ["a"], "score": -1}, {"fills": ["b"], "score": -2}]}).to_string()
    });
    let t = transport(&endpoint.url, Duration::from_secs(5), Transcript::disabled());
    assert_eq!(span_fill(&request(1), &t, "span").unwrap().len(), 1);
}

#[test]
fn empty_candidate_list_is_not_an_error() {
    let endpoint = serve(Duration::ZERO, |_| json!({"candidates": []}).to_string());
    let t = transport(&endpoint.url, Duration::from_secs(5), Transcript::disabled());
    assert!(span_fill(&request(10), &t, "span").unwrap().is_empty());
}

#[test]
fn transport_failures_are_classified() {
    let garbage = serve(Duration::ZERO, |_| "not json".to_string());
    let t = transport(&garbage.url, Duration::from_secs(5), Transcript::disabled());
    assert!(matches!(span_fill(&request(5), &t, "span"), Err(FillError::MalformedResponse(_))));

    let wrong_shape = serve(Duration::ZERO, |_| json!({"text": "x"}).to_string());
    let t = transport(&wrong_shape.url, Duration::from_secs(5), Transcript::disabled());
    assert!(matches!(span_fill(&request(5), &t, "span"), Err(FillError::MalformedResponse(_))));

    let slow = serve(Duration::from_secs(3), |_| json!({"candidates": []}).to_string());
    let t = transport(&slow.url, Duration::from_millis(300), Transcript::disabled());
    assert!(matches!(span_fill(&request(5), &t, "span"), Err(FillError::Timeout)));

    // Nothing listens on port 9 of the loopback interface.
    let t = transport("http://127.0.0.1:9/fill", Duration::from_secs(2), Transcript::disabled());
    assert!(matches!(span_fill(&request(5), &t, "span"), Err(FillError::EndpointUnreachable(_))));
}

#[test]
fn prompt_fill_over_http() {
    let endpoint = serve(Duration::ZERO, |body| {
        let prompt = body["prompt"].as_str().unwrap_or_default();
        let text = if prompt.starts_with(
            "Next token prediction task, the first line is a comment to help prediction, just return 250 possible predictions for <mask> with highest probability:",
        ) {
            "1. lastIndexOf\n2. indexOf"
        } else {
            ""
        };
        json!({ "text": text }).to_string()
    });
    let t = transport(&endpoint.url, Duration::from_secs(5), Transcript::disabled());
    let fills = prompt_fill(&request(250), &t, "prompt").unwrap();
    let texts: Vec<&str> = fills.iter().map(|f| f.fills[0].as_str()).collect();
    assert_eq!(texts, ["lastIndexOf", "indexOf"]);
    assert!(fills[0].score > fills[1].score);
}

#[test]
fn sequential_fill_over_http_keeps_first_token() {
    // Scores favour `any` for the first token after the masked callee.
    let endpoint = serve(Duration::ZERO, |body| {
        let context = body["context"].as_str().unwrap();
        let placed_any = context.contains("return any<mask>");
        let candidates = if placed_any {
            json!([{"fills": ["ResultsMatch"], "score": -0.2}, {"fills": ["Match"], "score": -1.5}])
        } else {
            json!([{"fills": ["any"], "score": -0.3}, {"fills": ["all"], "score": -0.4}])
        };
        json!({ "candidates": candidates }).to_string()
    });
    let t = transport(&endpoint.url, Duration::from_secs(5), Transcript::disabled());
    let fills = sequential_fill(&request(5), &t, (1, 2), "sequential").unwrap();
    let texts: Vec<&str> = fills.iter().map(|f| f.fills[0].as_str()).collect();
    assert_eq!(texts[0], "any");
    assert!(texts.contains(&"anyResultsMatch"));
    assert!(fills.windows(2).all(|w| w[0].score >= w[1].score));
}
