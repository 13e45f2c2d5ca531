//! The machine-parseable run report: one `key = value` line per field,
//! in a fixed order so seeded runs emit identical documents (timing lines
//! are the only nondeterministic part and carry a dedicated prefix).

use std::fmt;
use std::time::Duration;

use ksdrift::{KsResult, TransformReport};

pub struct RunReport {
    pub kind: &'static str,
    pub fields: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub timings: Vec<(&'static str, Duration)>,
}

impl RunReport {
    pub fn new(kind: &'static str) -> Self {
        RunReport {
            kind,
            fields: Vec::new(),
            warnings: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn field(&mut self, key: &str, value: impl fmt::Display) {
        self.fields.push((key.to_owned(), value.to_string()));
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn time(&mut self, phase: &'static str, elapsed: Duration) {
        self.timings.push((phase, elapsed));
    }

    /// Verdict fields, flattened.
    pub fn verdict(&mut self, result: &KsResult) {
        self.field("verdict.d_stat", result.d_stat);
        self.field("verdict.t_stat", result.t_stat);
        self.field("verdict.p_value", result.p_value);
        self.field("verdict.n_effective", result.n_effective);
        self.field("verdict.alpha", result.alpha);
        self.field("verdict.reject", result.reject);
    }

    /// Transform stage summary (the mapped values themselves are not
    /// echoed).
    pub fn transform(&mut self, report: &TransformReport) {
        self.field("transform.m", report.m);
        self.field("transform.n_reference", report.n_reference);
        self.field("transform.ratio", report.ratio);
        self.field("transform.dithered", report.dithered);
        match report.seed_used {
            Some(seed) => self.field("transform.seed_used", seed),
            None => self.field("transform.seed_used", "none"),
        }
        self.field("transform.ratio_warning", report.ratio_warning);
        if report.ratio_warning {
            self.warn(format!(
                "comparison/reference size ratio {:.3} is at or above the recommended \
                 bound 0.2; the transform test's level degrades as this ratio grows",
                report.ratio
            ));
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "report = {}", self.kind)?;
        for (key, value) in &self.fields {
            writeln!(f, "{key} = {value}")?;
        }
        for (i, warning) in self.warnings.iter().enumerate() {
            writeln!(f, "warning.{i} = {warning}")?;
        }
        for (phase, elapsed) in &self.timings {
            writeln!(f, "timing.{phase}_ms = {}", elapsed.as_millis())?;
        }
        Ok(())
    }
}
