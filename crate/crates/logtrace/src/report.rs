//! Analysis of a model and its text and JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use logtrace_core::fan::{enumerate_points, is_snc, log_smooth_consistency, validate, DecoratedModel, FanPoint, Violation};
use logtrace_core::invariants::{default_horizon, main_theorem_check, trace_report, zeta};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRow {
    pub id: String,
    pub height: usize,
    pub s: Option<u64>,
    pub s_prime: Option<u64>,
    pub lambda: u64,
    pub chi: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSmoothVerdict {
    pub claimed: bool,
    pub consistent: bool,
    /// `trace(1) = volume`, checked when the claim survives the consistency check
    pub trace_one_equals_volume: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub residue_char: u64,
    pub points_by_height: BTreeMap<usize, usize>,
    pub points: Vec<PointRow>,
    pub horizon: u64,
    pub volume: i64,
    pub traces: BTreeMap<u64, i64>,
    pub zeta_factors: BTreeMap<u64, i64>,
    pub zeta: String,
    pub error_term: i64,
    pub snc: bool,
    pub log_smooth: LogSmoothVerdict,
    pub timing_us: u64,
}

/// Why an analysis stopped.
#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("model failed validation")]
    Invalid(Vec<Violation>),
    #[error("model is inconsistent with its log smoothness claim")]
    Inconsistent(Vec<Violation>),
    #[error(transparent)]
    Core(#[from] logtrace_core::Error),
}

impl AnalysisError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AnalysisError::Invalid(_) => 1,
            AnalysisError::Inconsistent(_) => 2,
            AnalysisError::Core(logtrace_core::Error::Inconsistent(_)) => 2,
            AnalysisError::Core(_) => 1,
        }
    }

    pub fn details(&self) -> String {
        match self {
            AnalysisError::Invalid(v) | AnalysisError::Inconsistent(v) => v
                .iter()
                .map(|v| format!("{self}: {}: {}", v.location, v.message))
                .collect::<Vec<_>>()
                .join("\n"),
            AnalysisError::Core(e) => format!("error: {e}"),
        }
    }
}

/// Validated points of a model, or the validation violations.
pub fn points(model: &DecoratedModel) -> Result<Vec<FanPoint>, AnalysisError> {
    let report = validate(model)?;
    if !report.is_ok() {
        return Err(AnalysisError::Invalid(report.violations));
    }
    Ok(enumerate_points(model)?)
}

/// Runs validation, the log smooth consistency gate and every invariant.
/// `max_d` defaults to [`default_horizon`].
pub fn analyze(model: &DecoratedModel, max_d: Option<u64>) -> Result<AnalysisReport, AnalysisError> {
    let start = Instant::now();
    let points = points(model)?;
    let consistency = log_smooth_consistency(model, &points);
    if !consistency.is_ok() {
        return Err(AnalysisError::Inconsistent(consistency.violations));
    }
    let p = model.residue_char;
    let horizon = max_d.unwrap_or_else(|| default_horizon(&points));
    let traces = trace_report(&points, p, horizon)?;
    let z = zeta(&points);
    let claim_checked = model.log_smooth_claimed && p > 0;
    let trace_one_equals_volume = if claim_checked {
        main_theorem_check(&points)?;
        Some(true)
    } else {
        None
    };
    let mut points_by_height = BTreeMap::new();
    for x in &points {
        *points_by_height.entry(x.height).or_insert(0) += 1;
    }
    Ok(AnalysisReport {
        residue_char: p,
        points_by_height,
        points: points
            .iter()
            .map(|x| PointRow {
                id: x.id.clone(),
                height: x.height,
                s: x.s,
                s_prime: x.s_prime,
                lambda: x.lambda,
                chi: x.chi,
            })
            .collect(),
        horizon,
        volume: traces.volume,
        traces: traces.traces,
        zeta: z.to_string(),
        zeta_factors: z.factors,
        error_term: traces.error_term,
        snc: is_snc(&points).snc,
        log_smooth: LogSmoothVerdict {
            claimed: model.log_smooth_claimed,
            consistent: true,
            trace_one_equals_volume,
        },
        timing_us: start.elapsed().as_micros() as u64,
    })
}

impl AnalysisReport {
    /// The error term identity, re-checked before anything is rendered.
    pub fn check(&self) -> Result<(), String> {
        let t1 = self.traces.get(&1).copied().ok_or("report has no trace(1)")?;
        if self.error_term != t1 - self.volume {
            return Err(format!(
                "error term {} differs from trace(1) - volume = {}",
                self.error_term,
                t1 - self.volume
            ));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> Result<String, String> {
        self.check()?;
        Ok(serde_json::to_string_pretty(self).expect("reports serialize") + "\n")
    }

    pub fn to_text(&self) -> Result<String, String> {
        self.check()?;
        let mut out = String::new();
        let heights: Vec<String> = self.points_by_height.iter().map(|(h, n)| format!("{n} of height {h}")).collect();
        let _ = writeln!(out, "residue characteristic {}; points: {}", self.residue_char, heights.join(", "));
        let _ = writeln!(out, "{:<28} {:>6} {:>4} {:>4} {:>6} {:>4}", "point", "height", "s", "s'", "lambda", "chi");
        for x in &self.points {
            let opt = |v: Option<u64>| v.map_or("-".to_string(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{:<28} {:>6} {:>4} {:>4} {:>6} {:>4}",
                x.id,
                x.height,
                opt(x.s),
                opt(x.s_prime),
                x.lambda,
                x.chi
            );
        }
        let _ = writeln!(out, "volume      {}", self.volume);
        let traces: Vec<String> = self.traces.iter().map(|(d, t)| format!("{d}:{t}")).collect();
        let _ = writeln!(out, "traces      {}", traces.join(" "));
        let _ = writeln!(out, "zeta        {}", self.zeta);
        let _ = writeln!(out, "error term  {}", self.error_term);
        let _ = writeln!(out, "snc         {}", self.snc);
        let verdict = match (self.log_smooth.claimed, self.log_smooth.trace_one_equals_volume) {
            (false, _) => "not claimed".to_string(),
            (true, None) => "claimed, nothing to check in characteristic 0".to_string(),
            (true, Some(ok)) => format!("claimed, consistent, trace(1) = volume: {ok}"),
        };
        let _ = writeln!(out, "log smooth  {verdict}");
        let _ = writeln!(out, "time        {} us", self.timing_us);
        Ok(out)
    }

    /// The blocks that must agree between a model and its subdivisions.
    pub fn invariant_blocks(&self) -> (i64, &BTreeMap<u64, i64>, &BTreeMap<u64, i64>, i64) {
        (self.volume, &self.traces, &self.zeta_factors, self.error_term)
    }
}
