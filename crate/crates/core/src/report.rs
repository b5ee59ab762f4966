//! SER reports, confidence intervals, and CSV formatting.
//!
//! CSV schemas are part of the tool contract and are pinned by golden tests:
//! rates use fixed decimal notation with 6 significant digits.

/// Error counts for one (detector, SNR) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SerRow {
    pub detector: String,
    pub snr_db: f64,
    pub symbols: u64,
    pub errors: u64,
}

impl SerRow {
    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.errors as f64 / self.symbols as f64
        }
    }

    /// Wilson 95% score interval for the error probability.
    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.symbols)
    }
}

/// Wilson score interval at 95% coverage.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Per-(detector, SNR) SER table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SerReport {
    pub rows: Vec<SerRow>,
}

impl SerReport {
    pub const CSV_HEADER: &'static str = "detector,snr_db,symbols,errors,ser,ci_low,ci_high";

    pub fn row(&self, detector: &str, snr_db: f64) -> Option<&SerRow> {
        self.rows
            .iter()
            .find(|r| r.detector == detector && (r.snr_db - snr_db).abs() < 1e-9)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let (lo, hi) = r.interval();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.detector,
                format_db(r.snr_db),
                r.symbols,
                r.errors,
                format_rate(r.ser()),
                format_rate(lo),
                format_rate(hi)
            ));
        }
        out
    }
}

/// SNR axis values: two fixed decimals.
pub fn format_db(v: f64) -> String {
    format!("{v:.2}")
}

/// Fixed decimal notation with 6 significant digits.
pub fn format_rate(v: f64) -> String {
    if v == 0.0 {
        return "0.000000".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 24) as usize;
    format!("{v:.decimals$}")
}

/// Loss values in training history: six decimals.
pub fn format_loss(v: f64) -> String {
    format!("{v:.6}")
}
