//! Blocking client for the service's HTTP API.

use std::time::Duration;

use gcs_core::mission::MissionReport;
use gcs_core::store::SnapshotMeta;
use reqwest::blocking::{Client as Http, RequestBuilder};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use thiserror::Error;

use crate::service::{ApiError, CommandReply, ConnectInfo, ProcessResponse, StateView};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("{status}: {} ({:?})", .error.detail, .error.code)]
    Api {
        status: u16,
        error: ApiError,
    },
    #[error("unexpected {status} response: {body}")]
    Unexpected { status: u16, body: String },
    #[error(transparent)]
    Http(#[from] reqwest::Error),
}

impl ClientError {
    pub fn api(&self) -> Option<&ApiError> {
        match self {
            ClientError::Api { error, .. } => Some(error),
            _ => None,
        }
    }

    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Api { status, .. } | ClientError::Unexpected { status, .. } => Some(*status),
            ClientError::Http(e) => e.status().map(|s| s.as_u16()),
        }
    }
}

pub type ClientResult<T> = Result<T, ClientError>;

pub struct Client {
    base: String,
    http: Http,
}

impl Client {
    pub fn new(base: impl Into<String>) -> ClientResult<Self> {
        let http = Http::builder().timeout(Duration::from_secs(300)).build()?;
        Ok(Self {
            base: base.into().trim_end_matches('/').to_string(),
            http,
        })
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn send(&self, req: RequestBuilder) -> ClientResult<reqwest::blocking::Response> {
        let resp = req.send()?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let body = resp.text()?;
        Err(match serde_json::from_str::<ApiError>(&body) {
            Ok(error) => ClientError::Api {
                status: status.as_u16(),
                error,
            },
            Err(_) => ClientError::Unexpected {
                status: status.as_u16(),
                body,
            },
        })
    }

    fn get<T: DeserializeOwned>(&self, path: &str) -> ClientResult<T> {
        Ok(self.send(self.http.get(self.url(path)))?.json()?)
    }

    fn post<T: DeserializeOwned>(&self, path: &str, body: &Value) -> ClientResult<T> {
        Ok(self.send(self.http.post(self.url(path)).json(body))?.json()?)
    }

    pub fn health(&self) -> ClientResult<Value> {
        self.get("/health")
    }

    pub fn state(&self) -> ClientResult<StateView> {
        self.get("/state")
    }

    pub fn events(&self) -> ClientResult<Value> {
        self.get("/events")
    }

    pub fn connect(&self, retries: Option<u32>) -> ClientResult<ConnectInfo> {
        let body = match retries {
            Some(n) => json!({ "retries": n }),
            None => json!({}),
        };
        self.post("/connect", &body)
    }

    pub fn command(&self, text: &str) -> ClientResult<CommandReply> {
        self.post("/command", &json!({ "command": text }))
    }

    pub fn square(&self, side_cm: u32) -> ClientResult<MissionReport> {
        self.post("/mission/square", &json!({ "side_cm": side_cm }))
    }

    pub fn script(&self, name: &str, script: &str) -> ClientResult<MissionReport> {
        self.post("/mission/script", &json!({ "name": name, "script": script }))
    }

    pub fn snap(&self) -> ClientResult<SnapshotMeta> {
        self.post("/snap", &json!({}))
    }

    pub fn snapshots(&self) -> ClientResult<Vec<SnapshotMeta>> {
        self.get("/snapshots")
    }

    pub fn snapshot_ppm(&self, id: &str) -> ClientResult<Vec<u8>> {
        Ok(self.send(self.http.get(self.url(&format!("/snapshots/{id}"))))?.bytes()?.to_vec())
    }

    pub fn snapshot_meta(&self, id: &str) -> ClientResult<SnapshotMeta> {
        self.get(&format!("/snapshots/{id}/meta"))
    }

    /// `pipeline` is the JSON array of enhancement steps, sent verbatim.
    pub fn process(&self, snapshot_id: &str, pipeline: &Value) -> ClientResult<ProcessResponse> {
        self.post(
            "/process",
            &json!({ "snapshot_id": snapshot_id, "pipeline": pipeline }),
        )
    }
}
