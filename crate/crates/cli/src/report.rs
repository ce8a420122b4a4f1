//! Versioned run report, rendered as JSON or plain text.

use std::fmt::Write;

use serde::Serialize;

use tlbsat::CnfInstance;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct InstanceSummary {
    pub r: usize,
    pub n: u32,
    pub m: u64,
}

impl From<&CnfInstance> for InstanceSummary {
    fn from(f: &CnfInstance) -> Self {
        InstanceSummary {
            r: f.r(),
            n: f.n(),
            m: f.m(),
        }
    }
}

/// Exact integers that may exceed 64 bits are strings.
#[derive(Debug, Clone, Serialize, PartialEq, Eq, Default)]
pub struct Stats {
    pub term_count: usize,
    pub l2: String,
    pub weight_sum: String,
    pub support_size: usize,
    pub threshold: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_max: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Default)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// `(2^r − 1)·m + k`, as a decimal string.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_numerator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sat: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guaranteed_sat: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<Stats>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub kernel_paths: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSummary>,
    /// Significant variables of the reduced 2-CNF.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub significant: Option<usize>,
    /// Leaf count of the star packing behind `guaranteed_sat`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaves: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckResult>>,
    pub timing_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq, Default)]
pub struct KernelSummary {
    pub n: u32,
    pub m: u64,
    pub k: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_weight: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_clauses: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub significant: Option<usize>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GeneratorEcho {
    pub family: String,
    pub r: usize,
    pub n: u32,
    pub m: usize,
    pub seed: u64,
    pub bias: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub cases: u64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            schema: SCHEMA_VERSION,
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn with_instance(mut self, f: &CnfInstance) -> Self {
        self.instance = Some(f.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |key: &str, value: &dyn std::fmt::Display| {
            writeln!(out, "{key}: {value}").unwrap();
        };
        line("command", &self.command);
        if let Some(i) = &self.instance {
            line("instance", &format!("r={} n={} m={}", i.r, i.n, i.m));
        }
        if let Some(v) = &self.verdict {
            line("verdict", v);
        }
        if let Some(r) = &self.route {
            line("route", r);
        }
        if let Some(k) = self.k {
            line("k", &k);
        }
        if let Some(b) = &self.bound_numerator {
            line("bound_numerator", b);
        }
        if let Some(s) = self.sat {
            line("sat", &s);
        }
        if let Some(g) = self.guaranteed_sat {
            line("guaranteed_sat", &g);
        }
        if let Some(s) = self.significant {
            line("significant", &s);
        }
        if let Some(t) = self.leaves {
            line("leaves", &t);
        }
        if let Some(s) = &self.stats {
            line(
                "stats",
                &format!(
                    "terms={} l2={} weight_sum={} support={} threshold={}",
                    s.term_count, s.l2, s.weight_sum, s.support_size, s.threshold
                ),
            );
            if let Some(max) = &s.search_max {
                line("search_max", max);
            }
        }
        if let Some(k) = &self.kernel {
            let mut desc = format!("n={} m={} k={}", k.n, k.m, k.k);
            if let Some(e) = k.equations {
                write!(desc, " equations={e}").unwrap();
            }
            if let Some(w) = &k.total_weight {
                write!(desc, " W={w}").unwrap();
            }
            if let Some(o) = k.offset_clauses {
                write!(desc, " offset={o}").unwrap();
            }
            if let Some(s) = k.significant {
                write!(desc, " significant={s}").unwrap();
            }
            line("kernel", &desc);
        }
        for p in &self.kernel_paths {
            line("written", p);
        }
        if let Some(g) = &self.generator {
            line(
                "generator",
                &format!("family={} r={} n={} m={} seed={} bias={}", g.family, g.r, g.n, g.m, g.seed, g.bias),
            );
        }
        if let Some(checks) = &self.checks {
            for c in checks {
                let status = if c.passed { "ok" } else { "FAILED" };
                let mut desc = format!("{status} ({} cases)", c.cases);
                if let Some(f) = &c.failure {
                    write!(desc, ": {f}").unwrap();
                }
                line(&format!("check {}", c.name), &desc);
            }
        }
        if let Some(w) = &self.witness {
            let values: Vec<String> = w.iter().map(|v| v.to_string()).collect();
            line("witness", &values.join(" "));
        }
        if let Some(s) = self.seed {
            line("seed", &s);
        }
        line("timing_ms", &format!("{:.3}", self.timing_ms));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_has_schema_and_skips_empty_fields() {
        let report = RunReport::new("avg");
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["command"], "avg");
        assert!(v.get("verdict").is_none());
        assert!(report.to_text().contains("command: avg"));
    }
}
