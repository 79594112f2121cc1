//! Chat-completion client for OpenAI-compatible endpoints.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use super::backend::{BackendError, ChatMessage, ModelBackend};
use super::{BackendConfig, SamplingParams};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "GATESMITH_API_KEY";

/// Replace every occurrence of `secret` with a placeholder.
pub fn redact(text: &str, secret: Option<&str>) -> String {
    match secret {
        Some(s) if !s.is_empty() => text.replace(s, "[redacted]"),
        _ => text.to_owned(),
    }
}

/// Counting gate bounding concurrent requests.
#[derive(Debug)]
struct InFlight {
    cap: usize,
    used: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut used = self.used.lock().unwrap_or_else(|p| p.into_inner());
        while *used >= self.cap {
            used = self.freed.wait(used).unwrap_or_else(|p| p.into_inner());
        }
        *used += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut used = self.0.used.lock().unwrap_or_else(|p| p.into_inner());
        *used -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Debug)]
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    api_key: Option<String>,
    retries: u32,
    backoff: Duration,
    gate: InFlight,
}

enum Attempt {
    Done(String),
    Retry(BackendError),
    Fatal(BackendError),
}

impl HttpBackend {
    /// Build from config; the key comes from [`API_KEY_ENV`] if set.
    pub fn from_config(cfg: &BackendConfig) -> Result<Self, BackendError> {
        HttpBackend::new(cfg, std::env::var(API_KEY_ENV).ok())
    }

    pub fn new(cfg: &BackendConfig, api_key: Option<String>) -> Result<Self, BackendError> {
        if cfg.max_in_flight == 0 {
            return Err(BackendError::Config("max_in_flight must be at least 1".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs.max(1)))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(HttpBackend {
            client,
            endpoint: cfg.endpoint.clone(),
            model: cfg.model.clone(),
            api_key: api_key.filter(|k| !k.is_empty()),
            retries: cfg.retries,
            backoff: Duration::from_millis(cfg.backoff_ms),
            gate: InFlight {
                cap: cfg.max_in_flight,
                used: Mutex::new(0),
                freed: Condvar::new(),
            },
        })
    }

    fn body(&self, messages: &[ChatMessage], params: &SamplingParams) -> Value {
        json!({
            "model": self.model,
            "messages": messages,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "seed": params.seed,
        })
    }

    fn attempt(&self, body: &Value) -> Attempt {
        let _permit = self.gate.acquire();
        let mut req = self.client.post(&self.endpoint).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Retry(BackendError::Transport(redact(&e.to_string(), self.api_key.as_deref())))
            }
        };
        let status = resp.status();
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(BackendError::Transport(e.to_string())),
        };
        let text = redact(&text, self.api_key.as_deref());
        log::debug!("response {status}: {text}");
        if !status.is_success() {
            let err = BackendError::Status {
                status: status.as_u16(),
                body: text.chars().take(500).collect(),
            };
            return if status.as_u16() == 429 || status.is_server_error() {
                Attempt::Retry(err)
            } else {
                Attempt::Fatal(err)
            };
        }
        let parsed: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => return Attempt::Fatal(BackendError::Malformed(e.to_string())),
        };
        match parsed.pointer("/choices/0/message/content").and_then(Value::as_str) {
            Some(content) => Attempt::Done(content.to_owned()),
            None => Attempt::Fatal(BackendError::Malformed("no choices[0].message.content".into())),
        }
    }
}

impl ModelBackend for HttpBackend {
    fn complete(&self, messages: &[ChatMessage], params: &SamplingParams) -> Result<String, BackendError> {
        let body = self.body(messages, params);
        log::debug!(
            "POST {} (authorization: {}) {}",
            self.endpoint,
            if self.api_key.is_some() { "Bearer [redacted]" } else { "none" },
            redact(&body.to_string(), self.api_key.as_deref())
        );
        let attempts = self.retries + 1;
        let mut last = None;
        for i in 0..attempts {
            if i > 0 {
                let wait = self.backoff * 2u32.saturating_pow(i - 1);
                log::warn!("retrying chat completion in {wait:?} ({}/{})", i, self.retries);
                std::thread::sleep(wait);
            }
            match self.attempt(&body) {
                Attempt::Done(s) => return Ok(s),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(e) => last = Some(e),
            }
        }
        Err(BackendError::Exhausted {
            attempts,
            last: last.map(|e| e.to_string()).unwrap_or_default(),
        })
    }

    fn label(&self) -> String {
        format!("http:{}", self.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// Serve canned (status, body) responses, one per connection, and
    /// collect the request bodies and headers seen.
    fn serve(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut head = String::new();
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    head.push_str(&line);
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                log.lock().unwrap().push(head + &String::from_utf8(buf).unwrap());
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        (url, seen)
    }

    fn cfg(url: &str) -> BackendConfig {
        BackendConfig {
            endpoint: url.to_owned(),
            model: "m1".into(),
            backoff_ms: 1,
            ..BackendConfig::default()
        }
    }

    const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"hello"}}]}"#;

    #[test]
    fn retries_server_errors_then_succeeds() {
        let (url, seen) = serve(vec![(500, "{}".into()), (429, "{}".into()), (200, OK.into())]);
        let b = HttpBackend::new(&cfg(&url), Some("sk-secret".into())).unwrap();
        let out = b.complete(&[ChatMessage::user("hi")], &SamplingParams::default()).unwrap();
        assert_eq!(out, "hello");
        let seen = seen.lock().unwrap();
        assert_eq!(seen.len(), 3);
        assert!(seen[0].to_ascii_lowercase().contains("authorization: bearer sk-secret"));
        assert!(seen[0].contains(r#""model":"m1""#));
        assert!(seen[0].contains(r#""role":"user""#));
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, seen) = serve(vec![(401, r#"{"error":"bad key sk-secret"}"#.into())]);
        let b = HttpBackend::new(&cfg(&url), Some("sk-secret".into())).unwrap();
        match b.complete(&[ChatMessage::user("hi")], &SamplingParams::default()) {
            Err(BackendError::Status { status: 401, body }) => {
                assert!(!body.contains("sk-secret"));
                assert!(body.contains("[redacted]"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(seen.lock().unwrap().len(), 1);
    }

    #[test]
    fn gives_up_after_bounded_retries() {
        let (url, seen) = serve(vec![(503, "{}".into()); 4]);
        let b = HttpBackend::new(&cfg(&url), None).unwrap();
        let err = b.complete(&[ChatMessage::user("hi")], &SamplingParams::default()).unwrap_err();
        assert!(matches!(err, BackendError::Exhausted { attempts: 4, .. }));
        assert_eq!(seen.lock().unwrap().len(), 4);
    }

    #[test]
    fn malformed_body() {
        let (url, _) = serve(vec![(200, r#"{"choices":[]}"#.into())]);
        let b = HttpBackend::new(&cfg(&url), None).unwrap();
        assert!(matches!(
            b.complete(&[ChatMessage::user("hi")], &SamplingParams::default()),
            Err(BackendError::Malformed(_))
        ));
    }

    #[test]
    fn in_flight_cap_holds() {
        let gate = Arc::new(InFlight {
            cap: 2,
            used: Mutex::new(0),
            freed: Condvar::new(),
        });
        let peak = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (gate, peak) = (Arc::clone(&gate), Arc::clone(&peak));
                std::thread::spawn(move || {
                    let _p = gate.acquire();
                    let now = *gate.used.lock().unwrap();
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(5));
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }

    #[test]
    fn redaction() {
        assert_eq!(redact("key=abc123 and abc123", Some("abc123")), "key=[redacted] and [redacted]");
        assert_eq!(redact("x", None), "x");
        assert_eq!(redact("x", Some("")), "x");
    }
}
