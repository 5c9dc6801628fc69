use serde::Serialize;
use serde_json::Value;

/// Everything that determines a report, with defaults already resolved.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tower: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frak_p: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_s: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<u32>,
    /// The input document as read, so the report can be replayed without the file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig { command: command.to_string(), ..Default::default() }
    }
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub config: &'a RunConfig,
    pub status: &'a str,
    pub result: &'a Value,
}

impl<'a> Report<'a> {
    pub fn new(config: &'a RunConfig, status: &'a str, result: &'a Value) -> Self {
        Report {
            tool: "iwasawa",
            version: env!("CARGO_PKG_VERSION"),
            core_version: iwasawa_core::VERSION,
            config,
            status,
            result,
        }
    }
}
