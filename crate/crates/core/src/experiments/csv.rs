use std::fmt::Write as _;

use crate::analytic::LeakageResult;

pub const CSV_HEADER: &str = "scheduler,lambda,omega,kind,leakage_bits_per_slot,ratio,ci_low,ci_high,horizon,trials,seed";

/// Simulation parameters attached to empirical rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunInfo {
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub result: LeakageResult,
    pub run: Option<RunInfo>,
}

impl CsvRow {
    pub fn analytic(result: LeakageResult) -> Self {
        CsvRow { result, run: None }
    }

    pub fn render(&self) -> String {
        let r = &self.result;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12}")).unwrap_or_default();
        let (ci_lo, ci_hi) = match r.ci {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let (h, t, s) = match self.run {
            Some(i) => (i.horizon.to_string(), i.trials.to_string(), i.seed.to_string()),
            None => Default::default(),
        };
        format!(
            "{},{},{},{},{:.12},{:.12},{},{},{},{},{}",
            r.scheme.name(),
            r.lambda,
            opt(r.omega),
            r.kind.name(),
            r.bits_per_slot,
            r.ratio,
            opt(ci_lo),
            opt(ci_hi),
            h,
            t,
            s
        )
    }
}

/// Renders `#`-prefixed config lines, the header, the rows sorted by (scheduler,
/// lambda, kind), then `#`-prefixed trailing notes. Lines end in LF.
pub fn render_csv<'a>(config: impl IntoIterator<Item = (&'a str, String)>, mut rows: Vec<CsvRow>, notes: &[String]) -> String {
    rows.sort_by(|a, b| {
        a.result
            .scheme
            .cmp(&b.result.scheme)
            .then(a.result.lambda.total_cmp(&b.result.lambda))
            .then(a.result.kind.name().cmp(b.result.kind.name()))
    });
    let mut out = String::new();
    for (k, v) in config {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &rows {
        out.push_str(&row.render());
        out.push('\n');
    }
    for note in notes {
        let _ = writeln!(out, "# {note}");
    }
    out
}
