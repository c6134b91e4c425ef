//! Chat-completions HTTP backends.
//!
//! Requests are `POST {endpoint}` with body
//! `{"model": ..., "messages": [{"role": "user", "content": ...}], "temperature": 0}`
//! and the reply text is read from `choices[0].message.content`. The API key,
//! if any, is taken from the environment variable named in the config and
//! sent as a bearer token; it is never stored in the config itself.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::LanguagePair;
use crate::detect::{Category, TokenLevelClassifier, TokenVerdict};
use crate::synth::prompts::{render, ANNOTATION, REPLACEMENT, TOKEN_CLASSIFICATION, TRANSLATION};
use crate::synth::{language_name, TokenCsGenerator, Translator};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
    pub retries: u32,
    /// First retry delay; doubled for each further retry.
    pub backoff_ms: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: String::new(),
            api_key_env: None,
            timeout_secs: 60,
            retries: 3,
            backoff_ms: 500,
        }
    }
}

pub struct ChatClient {
    cfg: RemoteConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
}

impl std::fmt::Debug for ChatClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChatClient")
            .field("cfg", &self.cfg)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

enum Failure {
    Retry(String),
    Fatal(String),
}

impl ChatClient {
    pub fn new(cfg: RemoteConfig) -> Result<Self> {
        if cfg.endpoint.is_empty() {
            return Err(Error::Config("remote backend needs an endpoint".into()));
        }
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                Error::Config(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(ChatClient { cfg, agent, api_key })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.cfg
    }

    fn attempt(&self, body: &str) -> std::result::Result<String, Failure> {
        let mut req = self
            .agent
            .post(&self.cfg.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send(body).map_err(|e| Failure::Retry(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Retry(e.to_string()))?;
        match status {
            200..=299 => {}
            429 | 500..=599 => return Err(Failure::Retry(format!("HTTP {status}"))),
            _ => return Err(Failure::Fatal(format!("HTTP {status}: {}", text.chars().take(200).collect::<String>()))),
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Fatal(format!("bad JSON reply: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| Failure::Fatal("reply has no choices[0].message.content".into()))
    }

    /// Sends one user message and returns the reply text.
    pub fn complete(&self, prompt: &str) -> Result<String> {
        let body = json!({
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        })
        .to_string();
        let mut delay = Duration::from_millis(self.cfg.backoff_ms);
        let mut last = String::new();
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                std::thread::sleep(delay);
                delay *= 2;
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(msg)) => return Err(Error::Backend(msg)),
                Err(Failure::Retry(msg)) => {
                    log::warn!("{}: attempt {} failed: {msg}", self.cfg.endpoint, attempt + 1);
                    last = msg;
                }
            }
        }
        Err(Error::Backend(format!(
            "{} failed after {} attempts: {last}",
            self.cfg.endpoint,
            self.cfg.retries + 1
        )))
    }
}

#[derive(Debug)]
pub struct RemoteTranslator {
    client: ChatClient,
}

impl RemoteTranslator {
    pub fn new(client: ChatClient) -> Self {
        RemoteTranslator { client }
    }
}

impl Translator for RemoteTranslator {
    fn translate(&self, text: &str, src: &str, tgt: &str) -> Result<String> {
        let prompt = render(TRANSLATION, language_name(src), language_name(tgt), text);
        Ok(self.client.complete(&prompt)?.trim().to_string())
    }
}

/// Token-level generator driven by the annotation/replacement prompts, e.g.
/// a model fine-tuned on exported SFT records.
#[derive(Debug)]
pub struct RemoteGenerator {
    client: ChatClient,
}

impl RemoteGenerator {
    pub fn new(client: ChatClient) -> Self {
        RemoteGenerator { client }
    }
}

impl TokenCsGenerator for RemoteGenerator {
    fn annotate(&self, sentence: &str, src: &str, tgt: &str) -> Result<String> {
        let prompt = render(ANNOTATION, language_name(src), language_name(tgt), sentence);
        Ok(self.client.complete(&prompt)?.trim().to_string())
    }

    fn replace(&self, sentence: &str, src: &str, tgt: &str) -> Result<String> {
        let prompt = render(REPLACEMENT, language_name(src), language_name(tgt), sentence);
        Ok(self.client.complete(&prompt)?.trim().to_string())
    }
}

/// Reads the last `box(1)` / `box(2)` marker of a classification reply.
pub fn parse_box(reply: &str) -> Option<Category> {
    let one = reply.rfind("box(1)");
    let two = reply.rfind("box(2)");
    match (one, two) {
        (Some(a), Some(b)) if a > b => Some(Category::Annotation),
        (Some(_), Some(_)) => Some(Category::Replacement),
        (Some(_), None) => Some(Category::Annotation),
        (None, Some(_)) => Some(Category::Replacement),
        (None, None) => None,
    }
}

#[derive(Debug)]
pub struct RemoteTokenClassifier {
    client: ChatClient,
    pair: LanguagePair,
}

impl RemoteTokenClassifier {
    pub fn new(client: ChatClient, pair: LanguagePair) -> Self {
        RemoteTokenClassifier { client, pair }
    }
}

impl TokenLevelClassifier for RemoteTokenClassifier {
    fn classify(&self, segment: &str, sentence: &str) -> Result<TokenVerdict> {
        // The segment is foreign material, so its script names the inserted
        // language.
        let counts = self.pair.profile().counts(segment);
        let (doc, cs) = if counts.secondary > 0 {
            (self.pair.primary(), self.pair.secondary())
        } else {
            (self.pair.secondary(), self.pair.primary())
        };
        let prompt = render(TOKEN_CLASSIFICATION, language_name(doc), language_name(cs), sentence);
        let reply = self.client.complete(&prompt)?;
        let category = parse_box(&reply)
            .ok_or_else(|| Error::Backend(format!("no box(1)/box(2) in reply: {reply:?}")))?;
        Ok(TokenVerdict {
            category,
            confidence: 1.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};

    use super::*;

    /// Serves the canned `(status, body)` replies in order and records the
    /// raw requests.
    fn mock(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = seen.clone();
        std::thread::spawn(move || {
            for (status, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);
                let mut head = String::new();
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    head.push_str(&line);
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                }
                let mut payload = vec![0; len];
                reader.read_exact(&mut payload).unwrap();
                head.push_str(&String::from_utf8_lossy(&payload));
                log.lock().unwrap().push(head);
                let mut stream = reader.into_inner();
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        (format!("http://{addr}/v1/chat/completions"), seen)
    }

    fn reply(content: &str) -> String {
        json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
    }

    fn client(endpoint: String, key_env: Option<&str>) -> ChatClient {
        ChatClient::new(RemoteConfig {
            endpoint,
            model: "m".into(),
            api_key_env: key_env.map(str::to_string),
            timeout_secs: 5,
            retries: 3,
            backoff_ms: 1,
        })
        .unwrap()
    }

    #[test]
    fn request_shape_and_reply() {
        let (url, seen) = mock(vec![(200, reply(" 我们买水果。 "))]);
        let t = RemoteTranslator::new(client(url, None));
        assert_eq!(t.translate("We buy fruit.", "en", "zh").unwrap(), "我们买水果。");
        let req = seen.lock().unwrap()[0].clone();
        assert!(req.starts_with("POST /v1/chat/completions"));
        let body: Value = serde_json::from_str(&req[req.find('{').unwrap()..]).unwrap();
        assert_eq!(body["temperature"], 0);
        assert_eq!(body["model"], "m");
        assert_eq!(body["messages"][0]["role"], "user");
        assert!(body["messages"][0]["content"].as_str().unwrap().ends_with("We buy fruit."));
    }

    #[test]
    fn retries_server_errors() {
        let (url, seen) = mock(vec![
            (500, "{}".into()),
            (503, "{}".into()),
            (200, reply("ok")),
        ]);
        assert_eq!(client(url, None).complete("hi").unwrap(), "ok");
        assert_eq!(seen.lock().unwrap().len(), 3);
    }

    #[test]
    fn gives_up_after_retries() {
        let (url, _) = mock(vec![(500, "{}".into()); 4]);
        let err = client(url, None).complete("hi").unwrap_err();
        assert!(err.to_string().contains("4 attempts"), "{err}");
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, seen) = mock(vec![(400, "{\"error\":\"bad\"}".into())]);
        assert!(client(url, None).complete("hi").is_err());
        assert_eq!(seen.lock().unwrap().len(), 1);
    }

    #[test]
    fn key_from_environment() {
        std::env::set_var("CSKIT_TEST_REMOTE_KEY", "sekrit");
        let (url, seen) = mock(vec![(200, reply("x"))]);
        let c = client(url, Some("CSKIT_TEST_REMOTE_KEY"));
        assert!(!format!("{c:?}").contains("sekrit"));
        c.complete("hi").unwrap();
        assert!(seen.lock().unwrap()[0].contains("Bearer sekrit"));
        assert!(ChatClient::new(RemoteConfig {
            api_key_env: Some("CSKIT_TEST_REMOTE_KEY_MISSING".into()),
            ..RemoteConfig::default()
        })
        .is_err());
    }

    #[test]
    fn classifier_parses_box() {
        let (url, seen) = mock(vec![
            (200, reply(r#""剃须刀" explains razor. Formatting result: \\box(1)"#)),
            (200, reply("Directly used. Formatting result: \\\\box(2)")),
        ]);
        let pair: LanguagePair = "en-zh".parse().unwrap();
        let c = RemoteTokenClassifier::new(client(url, None), pair);
        let v = c.classify("剃须刀", "a razor (剃须刀)").unwrap();
        assert_eq!(v.category, Category::Annotation);
        let v = c.classify("茶馆", "at a nearby 茶馆.").unwrap();
        assert_eq!(v.category, Category::Replacement);
        let prompts = seen.lock().unwrap();
        assert!(prompts[0].contains("Given an English sentence containing Chinese code-switching"));
        assert_eq!(parse_box("no marker"), None);
    }
}
