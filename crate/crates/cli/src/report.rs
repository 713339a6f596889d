use std::collections::BTreeMap;
use std::fmt;

use riemann_wp::num::{fmt_rational, to_f64};
use riemann_wp::sim::Estimate;
use riemann_wp::verify::{witness_strings, CwpBoundReport, Provenance, Status, Verdict};
use serde::Serialize;

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

/// One task's outcome. Serialized as-is for `--json`.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub task: String,
    /// verified, refuted, unknown, estimated, encoded or error.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, String>>,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub solver_time_ms: u64,
    pub query_nodes: u64,
    pub assumptions: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transformer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cwp: Option<CwpSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encoding: Option<String>,
    #[serde(skip)]
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct CwpSummary {
    pub ratio: String,
    pub side_condition: String,
    #[serde(rename = "N_denominator")]
    pub n_denominator: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateSummary {
    pub mean: f64,
    /// The sample mean as an exact rational.
    pub mean_exact: String,
    pub std_error: f64,
    pub violated_fraction: f64,
    pub samples: u64,
    /// Some run hit the step cap.
    pub partial: bool,
}

impl Report {
    fn blank(task: &str, status: &str, exit_code: i32) -> Report {
        Report {
            task: task.to_string(),
            status: status.to_string(),
            witness: None,
            n: None,
            solver_time_ms: 0,
            query_nodes: 0,
            assumptions: vec![],
            transformer: None,
            reason: None,
            notes: vec![],
            cwp: None,
            estimate: None,
            encoding: None,
            exit_code,
        }
    }

    fn with_provenance(mut self, p: &Provenance) -> Report {
        self.n = p.n;
        self.transformer = p.kind.map(|k| k.name().to_string());
        self.solver_time_ms = p.solver_time.as_millis() as u64;
        self.query_nodes = p.query_nodes;
        self
    }

    pub fn from_verdict(task: &str, v: &Verdict) -> Report {
        let mut r = Report::blank(task, v.status.name(), v.status.exit_code()).with_provenance(&v.provenance);
        match &v.status {
            Status::Refuted(s) => r.witness = Some(witness_strings(s)),
            Status::Unknown(reason) => r.reason = Some(reason.clone()),
            Status::Verified => {}
        }
        r.assumptions = v.assumptions.clone();
        r.notes = v.notes.clone();
        r
    }

    pub fn from_cwp(task: &str, b: &CwpBoundReport) -> Report {
        let mut r = Report::blank(task, "verified", 0).with_provenance(&b.provenance());
        r.assumptions = b.assumptions();
        r.cwp = Some(CwpSummary { ratio: b.ratio(), side_condition: b.side_condition.clone(), n_denominator: b.n_denominator });
        r
    }

    pub fn from_estimate(task: &str, e: &Estimate) -> Report {
        let mut r = Report::blank(task, "estimated", if e.partial { 2 } else { 0 });
        if e.partial {
            r.reason = Some("some runs exhausted the step budget; the estimate is not comparable to wp".into());
        }
        r.estimate = Some(EstimateSummary {
            mean: to_f64(&e.mean),
            mean_exact: fmt_rational(&e.mean),
            std_error: e.std_error,
            violated_fraction: e.violated_fraction,
            samples: e.samples,
            partial: e.partial,
        });
        r
    }

    pub fn encoded(task: &str, n: u32, text: String) -> Report {
        let mut r = Report::blank(task, "encoded", 0);
        r.n = Some(n);
        r.encoding = Some(text);
        r
    }

    pub fn error(task: &str, exit_code: i32, msg: String) -> Report {
        let mut r = Report::blank(task, "error", exit_code);
        r.reason = Some(msg);
        r
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.task, self.status)?;
        if let (Some(t), Some(n)) = (&self.transformer, self.n) {
            write!(f, " ({t}, N = {n})")?;
        }
        if let Some(w) = &self.witness {
            let parts: Vec<String> = w.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            write!(f, "\n  witness: {{{}}}", parts.join(", "))?;
        }
        if let Some(c) = &self.cwp {
            write!(f, "\n  cwp <= {} wherever {} (N' = {})", c.ratio, c.side_condition, c.n_denominator)?;
        }
        if let Some(e) = &self.estimate {
            write!(f, "\n  mean {:.6} +- {:.6} (std error), {} samples, violated {:.4}", e.mean, e.std_error, e.samples, e.violated_fraction)?;
        }
        if let Some(r) = &self.reason {
            write!(f, "\n  reason: {r}")?;
        }
        for a in &self.assumptions {
            write!(f, "\n  assumed: {a}")?;
        }
        if self.solver_time_ms > 0 || self.query_nodes > 0 {
            write!(f, "\n  solver {} ms, {} query nodes", self.solver_time_ms, self.query_nodes)?;
        }
        Ok(())
    }
}
