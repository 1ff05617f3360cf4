use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use vrcoint::statistics::TestSettings;
use vrcoint::{DeterministicCase, DetrendMode, TestKind, TestStatistic};

use crate::data::Provenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Reject,
    FailToReject,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub test: TestKind,
    pub case: DeterministicCase,
    pub detrend: DetrendMode,
    pub m: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub statistic: f64,
    /// Level (as written in the table) to critical value.
    pub critical_values: BTreeMap<String, f64>,
    pub level: f64,
    /// `None` when no critical value is available at `level`.
    pub decision: Option<Decision>,
    pub settings: TestSettings,
    /// Seed of the critical value simulation.
    pub seed: Option<u64>,
    pub data: Provenance,
}

impl TestReport {
    pub fn new(stat: TestStatistic, m: usize, t: usize, table: Option<&vrcoint::asymptotics::QuantileTable>, level: f64, data: Provenance) -> Self {
        let critical_values: BTreeMap<String, f64> = table
            .map(|q| q.levels.iter().zip(&q.values).map(|(l, v)| (l.to_string(), *v)).collect())
            .unwrap_or_default();
        let decision = table.and_then(|q| q.value_at(level)).map(|cv| {
            if stat.value < cv {
                Decision::Reject
            } else {
                Decision::FailToReject
            }
        });
        Self {
            test: stat.kind,
            case: stat.settings.case,
            detrend: stat.settings.detrend,
            m,
            t,
            statistic: stat.value,
            critical_values,
            level,
            decision,
            settings: stat.settings,
            seed: table.map(|q| q.seed),
            data,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} test, case {}, {} detrending", self.test, self.case, self.detrend);
        let _ = writeln!(
            out,
            "  data       {}: {} on {} (T = {}, m = {}{})",
            self.data.file.display(),
            self.data.lhs,
            self.data.rhs.join(", "),
            self.t,
            self.m,
            if self.data.log { ", logs" } else { "" }
        );
        if let (Some(a), Some(b)) = (&self.data.first_label, &self.data.last_label) {
            let _ = writeln!(out, "  sample     {a} to {b}");
        }
        let _ = writeln!(out, "  statistic  {}", self.statistic);
        if self.critical_values.is_empty() {
            let _ = writeln!(out, "  critical   none available");
        } else {
            let cv: Vec<String> = self.critical_values.iter().map(|(l, v)| format!("{l}: {v}")).collect();
            let _ = writeln!(out, "  critical   {}", cv.join(", "));
        }
        let decision = match self.decision {
            Some(Decision::Reject) => "reject no cointegration",
            Some(Decision::FailToReject) => "fail to reject no cointegration",
            None => "undetermined (no critical value)",
        };
        let _ = writeln!(out, "  decision   {decision} at level {}", self.level);
        let s = &self.settings;
        let mut parts = Vec::new();
        if let Some(p) = s.lag {
            parts.push(format!("lag={p}"));
        }
        if let Some(c) = s.criterion {
            parts.push(format!("criterion={c}"));
        }
        if let Some(p) = s.p_max {
            parts.push(format!("p_max={p}"));
        }
        if let Some(k) = s.kernel {
            parts.push(format!("kernel={k}"));
        }
        if let Some(b) = s.bandwidth {
            parts.push(format!("bandwidth={b}"));
        }
        if let Some(w) = s.lag_window {
            parts.push(format!("window={w}"));
        }
        if s.lrv_nonpositive == Some(true) {
            parts.push("long-run variance estimate nonpositive".into());
        }
        if let Some(seed) = self.seed {
            parts.push(format!("table_seed={seed}"));
        }
        if !parts.is_empty() {
            let _ = writeln!(out, "  settings   {}", parts.join(" "));
        }
        out
    }
}
