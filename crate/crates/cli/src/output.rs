use std::io::Write;
use std::path::Path;

use serde::Serialize;
use shapcredit::prelude::*;

use crate::config::RunConfig;

/// Run provenance attached to every output record.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub nature: Nature,
    pub measure: MeasureKind,
    pub target: TargetKind,
    pub log_base: f64,
}

impl RunMeta {
    pub fn new(command: &'static str, cfg: &RunConfig, nature: Nature, measure: &Measure) -> Self {
        let regression = cfg.plan().is_some();
        RunMeta {
            tool: "shapcredit",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.seed(),
            method: cfg.method_name(),
            samples: regression.then(|| cfg.samples.unwrap_or(crate::config::DEFAULT_SAMPLES)),
            nature,
            measure: measure.kind,
            target: cfg.target(),
            log_base: measure.entropy_base,
        }
    }
}

#[derive(Serialize)]
pub struct ReportLine<'a> {
    pub index: usize,
    #[serde(flatten)]
    pub report: &'a AttributionReport,
    pub run: &'a RunMeta,
}

/// Write one JSON document per line, to `out` or standard output.
pub fn write_lines<T: Serialize>(out: Option<&Path>, records: &[T]) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    write_text(out, &text)
}

pub fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
