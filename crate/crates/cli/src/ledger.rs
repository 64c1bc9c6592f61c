//! Per-claim verdicts of the verify suite.

use serde::Serialize;

use crate::config::Scale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A trend claim whose sequences moved as required.
    Trend,
    ReportOnly,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Trend => "trend",
            Verdict::ReportOnly => "report-only",
        }
    }
}

/// `(number, id, anchor)` of every claim, in order.
pub const CLAIMS: [(u8, &str, &str); 10] = [
    (1, "commute-identity", "commute time identity τ(v,w)+τ(w,v) = 2|E|R_eff"),
    (2, "resistance-oracle", "closed-form resistances and R_eff ≤ hop distance"),
    (3, "gff-fidelity", "GFF increments E(η_v−η_w)² = R_eff"),
    (4, "closed-form-m", "E max of the field on an edge and on P3"),
    (5, "iid-max", "expected maximum of s iid normals"),
    (6, "cover-oracle", "Monte Carlo cover time vs exact subset recursion"),
    (7, "giant-statistics", "sizes and tree depths of the sampled giant"),
    (8, "skeleton-lemmas", "hierarchy properties A–D, chain budgets, dyadic pair counts"),
    (9, "headline-trend", "M√(2ε)/ln N and τ_cov/(n ln²N) trend toward 1; τ_cov/(|E|M²) bounded"),
    (10, "feige-sanity", "cover times inside [0.9 n ln n, 1.1 (4/27) n³]"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimRecord {
    pub number: u8,
    pub id: String,
    pub anchor: String,
    /// Headline measurement; its meaning is given by `band`.
    pub measured: f64,
    pub band: String,
    pub verdict: Verdict,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<Series>,
}

impl ClaimRecord {
    pub fn new(number: u8, measured: f64, band: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        let (_, id, anchor) = CLAIMS[number as usize - 1];
        ClaimRecord {
            number,
            id: id.to_string(),
            anchor: anchor.to_string(),
            measured,
            band: band.into(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail: detail.into(),
            series: Vec::new(),
        }
    }

    pub fn succeeded(&self) -> bool {
        matches!(self.verdict, Verdict::Pass | Verdict::Trend | Verdict::ReportOnly)
    }

    /// `[PASS] 1 commute-identity: ...` line.
    pub fn line(&self) -> String {
        let tag = if self.succeeded() { "PASS" } else { "FAIL" };
        format!(
            "[{tag}] {:>2} {:<18} {:<11} measured={:<12.6} band={} ({})",
            self.number,
            self.id,
            self.verdict.as_str(),
            self.measured,
            self.band,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimsLedger {
    pub master_seed: u64,
    pub scale: Scale,
    pub git: String,
    pub config: String,
    pub claims: Vec<ClaimRecord>,
}

impl ClaimsLedger {
    /// Every claim id appears exactly once and nothing else does.
    pub fn is_complete(&self) -> bool {
        self.claims.len() == CLAIMS.len() && CLAIMS.iter().all(|(_, id, _)| self.claims.iter().filter(|c| c.id == *id).count() == 1)
    }

    pub fn all_succeeded(&self) -> bool {
        self.claims.iter().all(ClaimRecord::succeeded)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_succeeded() && self.is_complete() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger serializes") + "\n"
    }

    /// Aligned human-readable table.
    pub fn table(&self) -> String {
        let rows: Vec<[String; 5]> = self
            .claims
            .iter()
            .map(|c| {
                [c.number.to_string(), c.id.clone(), c.verdict.as_str().to_string(), format!("{:.6}", c.measured), c.band.clone()]
            })
            .collect();
        let head = ["#", "claim", "verdict", "measured", "band"].map(String::from);
        let mut width = head.clone().map(|h| h.len());
        for r in &rows {
            for (w, cell) in width.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let fmt = |r: &[String; 5]| {
            let cells: Vec<String> = r.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
            cells.join("  ").trim_end().to_string() + "\n"
        };
        let mut s = fmt(&head);
        s.push_str(&fmt(&width.map(|w| "-".repeat(w))));
        for r in &rows {
            s.push_str(&fmt(r));
        }
        for c in &self.claims {
            for series in &c.series {
                let pts: Vec<String> = series.grid.iter().zip(&series.values).map(|(g, v)| format!("{g}:{v:.4}")).collect();
                s.push_str(&format!("{} {}: {}\n", c.id, series.name, pts.join(" ")));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger(claims: Vec<ClaimRecord>) -> ClaimsLedger {
        ClaimsLedger { master_seed: 1, scale: Scale::Quick, git: "x".into(), config: "y".into(), claims }
    }

    #[test]
    fn completeness_and_exit_codes() {
        let all: Vec<_> = (1..=10).map(|i| ClaimRecord::new(i, 0.0, "-", true, "")).collect();
        let l = ledger(all.clone());
        assert!(l.is_complete());
        assert_eq!(l.exit_code(), 0);
        let mut missing = all.clone();
        missing.pop();
        assert!(!ledger(missing).is_complete());
        let mut dup = all.clone();
        dup[9] = ClaimRecord::new(9, 0.0, "-", true, "");
        assert!(!ledger(dup).is_complete());
        let mut failed = all;
        failed[0].verdict = Verdict::Fail;
        assert_eq!(ledger(failed).exit_code(), 1);
    }

    #[test]
    fn table_is_aligned() {
        let l = ledger((1..=10).map(|i| ClaimRecord::new(i, i as f64, "[0, 1]", i != 3, "")).collect());
        let t = l.table();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 12);
        let col = lines[0].find("verdict").unwrap();
        assert!(lines[2..].iter().all(|l| l[col..].starts_with("pass") || l[col..].starts_with("fail")));
    }
}
