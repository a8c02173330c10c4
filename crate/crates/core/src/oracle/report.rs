use std::fmt::Write as _;
use std::io::{self, Write};

/// Points pass when within this many standard errors, whatever the tolerances.
pub const STANDARD_ERROR_MULTIPLIER: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportPoint {
    pub x: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub standard_error: Option<f64>,
    pub pass: bool,
}

/// Closed form against oracle, point by point.
///
/// A point passes iff
/// `|closed_form - oracle| <= max(atol, rtol * |closed_form|, 5 * standard_error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub atol: f64,
    pub rtol: f64,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub points: Vec<ReportPoint>,
}

impl OracleReport {
    pub fn new(quantity: impl Into<String>, atol: f64, rtol: f64) -> Self {
        Self {
            quantity: quantity.into(),
            atol,
            rtol,
            seed: None,
            samples: None,
            points: Vec::new(),
        }
    }

    pub fn with_sampling(mut self, seed: u64, samples: u64) -> Self {
        self.seed = Some(seed);
        self.samples = Some(samples);
        self
    }

    pub fn push(&mut self, x: f64, closed_form: f64, oracle: f64, standard_error: Option<f64>) -> &ReportPoint {
        let abs_err = (closed_form - oracle).abs();
        let rel_err = if closed_form != 0.0 {
            abs_err / closed_form.abs()
        } else if abs_err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let allowed = self
            .atol
            .max(self.rtol * closed_form.abs())
            .max(STANDARD_ERROR_MULTIPLIER * standard_error.unwrap_or(0.0));
        let pass = abs_err <= allowed;
        self.points.push(ReportPoint {
            x,
            closed_form,
            oracle,
            abs_err,
            rel_err,
            standard_error,
            pass,
        });
        self.points.last().expect("just pushed")
    }

    /// True when there is at least one point and every point passes.
    pub fn passed(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(|p| p.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportPoint> {
        self.points.iter().filter(|p| !p.pass)
    }

    pub fn max_abs_err(&self) -> f64 {
        self.points.iter().map(|p| p.abs_err).fold(0.0, f64::max)
    }

    pub fn max_rel_err(&self) -> f64 {
        self.points.iter().map(|p| p.rel_err).fold(0.0, f64::max)
    }

    pub const CSV_HEADER: &'static str = "quantity,x,closed_form,oracle,abs_err,rel_err,standard_error,pass";

    /// Rows in the crate's CSV dialect (no header).
    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.quantity,
                crate::fmt_num(p.x),
                crate::fmt_num(p.closed_form),
                crate::fmt_num(p.oracle),
                crate::fmt_num(p.abs_err),
                crate::fmt_num(p.rel_err),
                p.standard_error.map_or_else(|| "NA".to_string(), crate::fmt_num),
                if p.pass { "pass" } else { "FAIL" },
            )?;
        }
        Ok(())
    }

    /// One summary line plus one line per failing point.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "[{}] {}: {} points, max abs err {:.3e}, max rel err {:.3e} (atol {:.1e}, rtol {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.quantity,
            self.points.len(),
            self.max_abs_err(),
            self.max_rel_err(),
            self.atol,
            self.rtol,
        );
        if let (Some(seed), Some(n)) = (self.seed, self.samples) {
            let _ = write!(s, " [seed {seed}, {n} samples]");
        }
        for p in self.failures() {
            let _ = write!(
                s,
                "\n    x = {:.6}: closed form {:.12e}, oracle {:.12e}, se {}",
                p.x,
                p.closed_form,
                p.oracle,
                p.standard_error.map_or_else(|| "-".into(), |e| format!("{e:.3e}")),
            );
        }
        s
    }
}
