//! Country Gini panels: CSV ingestion, per-year reports, published
//! reference values and synthetic fixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::output::{fixed6, format_fixed};
use crate::stats::{
    alarm_level_at, histogram, render_ascii_histogram, summary, AlarmResult, Bin, JbResult,
    StatsError, SummaryStats, DEFAULT_SIGNIFICANCE, MIN_JB_SAMPLES,
};

/// Published two-sigma alarm levels for the country panel, by year.
pub const REFERENCE_ALARM_LEVELS: [(i32, f64); 3] = [(1995, 0.579695), (2000, 0.573449), (2005, 0.560313)];

/// Informal alarm level published for 1990, a year whose panel fails the
/// normality test.
pub const REFERENCE_INFORMAL_1990: f64 = 0.605506;

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PanelError {
    #[error("cannot read panel: {0}")]
    Io(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("missing column '{0}'")]
    MissingColumn(&'static str),
    #[error("line {line}: cannot parse {field} value '{value}'")]
    BadNumeric {
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: duplicate entry for ({country}, {year})")]
    DuplicateKey { line: u64, country: String, year: i32 },
    #[error("line {line}: Gini {value} is outside [0, 1] after unit conversion")]
    OutOfRange { line: u64, value: f64 },
    #[error("no observations for year {0}")]
    UnknownYear(i32),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Percent,
    Fraction,
}

impl FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "percent" => Ok(Units::Percent),
            "fraction" => Ok(Units::Fraction),
            other => Err(format!("unknown units '{other}' (expected percent or fraction)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GiniRecord {
    pub country: String,
    pub year: i32,
    /// Fraction in `[0, 1]`.
    pub gini: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GiniPanel {
    records: Vec<GiniRecord>,
    source_units: Units,
}

impl GiniPanel {
    /// Validates ranges and `(country, year)` uniqueness. Values are
    /// fractions.
    pub fn from_records(records: Vec<GiniRecord>) -> Result<Self, PanelError> {
        let mut seen = BTreeSet::new();
        for (i, r) in records.iter().enumerate() {
            let line = i as u64 + 2;
            if !(0.0..=1.0).contains(&r.gini) {
                return Err(PanelError::OutOfRange { line, value: r.gini });
            }
            if !seen.insert((r.country.clone(), r.year)) {
                return Err(PanelError::DuplicateKey {
                    line,
                    country: r.country.clone(),
                    year: r.year,
                });
            }
        }
        Ok(Self {
            records,
            source_units: Units::Fraction,
        })
    }

    pub fn records(&self) -> &[GiniRecord] {
        &self.records
    }

    pub fn source_units(&self) -> Units {
        self.source_units
    }

    pub fn years(&self) -> Vec<i32> {
        let set: BTreeSet<i32> = self.records.iter().map(|r| r.year).collect();
        set.into_iter().collect()
    }

    /// Gini values for one year, in file order.
    pub fn year_values(&self, year: i32) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.year == year)
            .map(|r| r.gini)
            .collect()
    }

    /// Writes `country,year,gini` with fractions in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), PanelError> {
        self.write_csv_as(out, Units::Fraction)
    }

    /// Writes the panel in the given units. Percent cells are the fraction's
    /// shortest form with the decimal point moved, so ingestion with the
    /// same units gives back identical values.
    pub fn write_csv_as<W: Write>(&self, out: W, units: Units) -> Result<(), PanelError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["country", "year", "gini"])
            .map_err(|e| PanelError::Io(e.to_string()))?;
        for r in &self.records {
            let cell = match units {
                Units::Fraction => r.gini.to_string(),
                Units::Percent => shift_decimal_right(&r.gini.to_string(), 2),
            };
            w.write_record([r.country.as_str(), &r.year.to_string(), &cell])
                .map_err(|e| PanelError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| PanelError::Io(e.to_string()))
    }
}

/// Parses a Gini cell. Plain decimal percents are converted by moving the
/// decimal point in the text, so `35.2` percent and `0.352` parse to the same
/// float.
fn parse_gini(text: &str, units: Units) -> Option<f64> {
    let value = match units {
        Units::Fraction => text.parse::<f64>().ok()?,
        Units::Percent => match shift_decimal_left(text, 2) {
            Some(shifted) => shifted.parse::<f64>().ok()?,
            None => text.parse::<f64>().ok()? / 100.0,
        },
    };
    value.is_finite().then_some(value)
}

/// `"0.352"` -> `"35.2"` for unsigned plain decimals.
fn shift_decimal_right(text: &str, places: usize) -> String {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let frac = format!("{frac:0<places$}");
    let (moved, rest) = frac.split_at(places);
    let int = format!("{int}{moved}");
    let int = int.trim_start_matches('0');
    let int = if int.is_empty() { "0" } else { int };
    let rest = rest.trim_end_matches('0');
    if rest.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{rest}")
    }
}

/// `"35.2"` -> `"0.352"`; `None` for anything but unsigned plain decimals.
fn shift_decimal_left(text: &str, places: usize) -> Option<String> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let padded = format!("{int:0>width$}", width = places + 1);
    let (head, tail) = padded.split_at(padded.len() - places);
    Some(format!("{head}.{tail}{frac}"))
}

pub fn ingest_csv(path: &Path, units: Units) -> Result<GiniPanel, PanelError> {
    let file = std::fs::File::open(path).map_err(|e| PanelError::Io(format!("{}: {e}", path.display())))?;
    ingest_reader(file, units)
}

/// Reads a `country,year,gini` panel. Percent values are divided by 100.
pub fn ingest_reader<R: Read>(reader: R, units: Units) -> Result<GiniPanel, PanelError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| PanelError::Csv(e.to_string()))?.clone();
    let column = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
            .ok_or(PanelError::MissingColumn(name))
    };
    let (ci, yi, gi) = (column("country")?, column("year")?, column("gini")?);

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| PanelError::Csv(e.to_string()))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| row.get(i).unwrap_or("");
        let country = field(ci).to_string();
        let year: i32 = field(yi).parse().map_err(|_| PanelError::BadNumeric {
            line,
            field: "year",
            value: field(yi).to_string(),
        })?;
        let gini = parse_gini(field(gi), units).ok_or_else(|| PanelError::BadNumeric {
            line,
            field: "gini",
            value: field(gi).to_string(),
        })?;
        if !(0.0..=1.0).contains(&gini) {
            return Err(PanelError::OutOfRange { line, value: gini });
        }
        if !seen.insert((country.clone(), year)) {
            return Err(PanelError::DuplicateKey { line, country, year });
        }
        records.push(GiniRecord { country, year, gini });
    }
    Ok(GiniPanel {
        records,
        source_units: units,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub bins: usize,
    pub significance: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            significance: DEFAULT_SIGNIFICANCE,
        }
    }
}

/// Published value for a year next to what the panel gives under both
/// standard-deviation conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceComparison {
    #[serde(serialize_with = "fixed6")]
    pub reference: f64,
    /// Bessel-corrected standard deviation (the report's convention).
    #[serde(serialize_with = "fixed6")]
    pub sample_convention: f64,
    /// `1/n` standard deviation.
    #[serde(serialize_with = "fixed6")]
    pub population_convention: f64,
    /// Whether the report's value equals the reference at six decimals.
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearReport {
    pub year: i32,
    pub n_countries: usize,
    pub summary: SummaryStats,
    pub jb: Option<JbResult>,
    pub alarm: AlarmResult,
    pub histogram: Vec<Bin>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceComparison>,
}

impl YearReport {
    /// The alarm level, only when normality is not rejected.
    pub fn headline_alarm(&self) -> Option<f64> {
        self.alarm.valid.then_some(self.alarm.alarm_level)
    }

    /// Human-readable report. An alarm level that fails the normality
    /// check is printed only when `force` is set, marked informal.
    pub fn render_text(&self, force: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Year {}: {} countries", self.year, self.n_countries);
        let opt = |x: Option<f64>| x.map(format_fixed).unwrap_or_else(|| "undefined".into());
        let _ = writeln!(s, "  mean      {}", format_fixed(self.summary.mean));
        let _ = writeln!(s, "  std dev   {}", format_fixed(self.summary.std_dev));
        let _ = writeln!(s, "  skewness  {}", opt(self.summary.skewness));
        let _ = writeln!(s, "  kurtosis  {}", opt(self.summary.kurtosis));
        let _ = writeln!(s, "  min       {}", format_fixed(self.summary.min));
        let _ = writeln!(s, "  max       {}", format_fixed(self.summary.max));
        match &self.jb {
            Some(jb) => {
                let _ = writeln!(
                    s,
                    "  Jarque-Bera {} (p = {}){}",
                    format_fixed(jb.statistic),
                    format_fixed(jb.p_value),
                    if jb.rejects_at(self.alarm.significance) { ", normality rejected" } else { "" }
                );
            }
            None => {
                let _ = writeln!(s, "  Jarque-Bera undefined (zero variance)");
            }
        }
        match self.headline_alarm() {
            Some(a) => {
                let _ = writeln!(s, "  alarm level {}", format_fixed(a));
            }
            None if force => {
                let _ = writeln!(
                    s,
                    "  alarm level {} (informal: normality not supported, not appropriate as a threshold)",
                    format_fixed(self.alarm.alarm_level)
                );
            }
            None => {
                let _ = writeln!(s, "  alarm level not reported: normality rejected at the {} level", self.alarm.significance);
            }
        }
        if let Some(r) = &self.reference {
            let _ = writeln!(
                s,
                "  published {} / sample-sd {} / population-sd {}: {}",
                format_fixed(r.reference),
                format_fixed(r.sample_convention),
                format_fixed(r.population_convention),
                if r.matches { "match" } else { "discrepancy" }
            );
        }
        s.push_str(&render_ascii_histogram(&self.histogram, 40));
        s
    }
}

pub fn reference_alarm(year: i32) -> Option<f64> {
    REFERENCE_ALARM_LEVELS
        .iter()
        .find(|(y, _)| *y == year)
        .map(|(_, v)| *v)
        .or((year == 1990).then_some(REFERENCE_INFORMAL_1990))
}

/// Summary, normality test, alarm level and histogram for one year.
pub fn year_report(panel: &GiniPanel, year: i32, options: ReportOptions) -> Result<YearReport, PanelError> {
    let values = panel.year_values(year);
    if values.is_empty() {
        return Err(PanelError::UnknownYear(year));
    }
    if values.len() < MIN_JB_SAMPLES {
        return Err(StatsError::TooFewSamples {
            needed: MIN_JB_SAMPLES,
            got: values.len(),
        }
        .into());
    }
    let summary = summary(&values)?;
    let alarm = alarm_level_at(&values, options.significance)?;
    let histogram = histogram(&values, options.bins)?;
    Ok(YearReport {
        year,
        n_countries: values.len(),
        jb: alarm.normality,
        summary,
        alarm,
        histogram,
        reference: None,
    })
}

/// Attaches the published value for the year, if there is one.
pub fn with_reference(mut report: YearReport) -> YearReport {
    if let Some(reference) = reference_alarm(report.year) {
        let n = report.n_countries as f64;
        let population_sd = report.alarm.std_dev * ((n - 1.0) / n).sqrt();
        let sample_convention = report.alarm.alarm_level;
        report.reference = Some(ReferenceComparison {
            reference,
            sample_convention,
            population_convention: report.alarm.mean + 2.0 * population_sd,
            matches: format_fixed(sample_convention) == format_fixed(reference),
        });
    }
    report
}

/// Reports for every year in the panel that has enough observations.
pub fn all_year_reports(panel: &GiniPanel, options: ReportOptions) -> BTreeMap<i32, Result<YearReport, PanelError>> {
    panel
        .years()
        .into_iter()
        .map(|y| (y, year_report(panel, y, options)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticLaw {
    Normal { mean: f64, std_dev: f64 },
    /// `offset + Exp(mean)`, strongly right-skewed.
    ShiftedExponential { offset: f64, mean: f64 },
}

/// Seeded synthetic panel, redrawing any value outside `[0, 1]`. Each year
/// gets its own stream derived from `seed` and the year.
pub fn synthetic_panel(years: &[i32], countries: usize, law: SyntheticLaw, seed: u64) -> GiniPanel {
    let mut records = Vec::with_capacity(years.len() * countries);
    for &year in years {
        let stream = seed ^ (year as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        let mut draw = || -> f64 {
            loop {
                let x = match law {
                    SyntheticLaw::Normal { mean, std_dev } => {
                        Normal::new(mean, std_dev).expect("valid normal").sample(&mut rng)
                    }
                    SyntheticLaw::ShiftedExponential { offset, mean } => {
                        offset + Exp::new(1.0 / mean).expect("valid rate").sample(&mut rng)
                    }
                };
                if (0.0..=1.0).contains(&x) {
                    return x;
                }
            }
        };
        for c in 0..countries {
            records.push(GiniRecord {
                country: format!("C{c:03}"),
                year,
                gini: draw(),
            });
        }
    }
    GiniPanel {
        records,
        source_units: Units::Fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(text: &str, units: Units) -> Result<GiniPanel, PanelError> {
        ingest_reader(text.as_bytes(), units)
    }

    #[test]
    fn percent_shift_is_textual() {
        assert_eq!(shift_decimal_left("35.2", 2).as_deref(), Some("0.352"));
        assert_eq!(shift_decimal_left("5", 2).as_deref(), Some("0.05"));
        assert_eq!(shift_decimal_left(".5", 2).as_deref(), Some("0.005"));
        assert_eq!(shift_decimal_left("100", 2).as_deref(), Some("1.00"));
        assert_eq!(shift_decimal_left("1e2", 2), None);
        assert_eq!(shift_decimal_right("0.352", 2), "35.2");
        assert_eq!(shift_decimal_right("0.05", 2), "5");
        assert_eq!(shift_decimal_right("1", 2), "100");
        assert_eq!(shift_decimal_right("0.000001", 2), "0.0001");
        assert_eq!(shift_decimal_left("-3", 2), None);
        assert_eq!(parse_gini("35.2", Units::Percent), Some(0.352));
        assert_eq!(parse_gini("4e1", Units::Percent), Some(0.4));
        assert_eq!(parse_gini("nan", Units::Percent), None);
    }

    #[test]
    fn percent_values_are_converted() {
        let p = ingest("country,year,gini\nNarnia,1995,35.2\n", Units::Percent).unwrap();
        assert!((p.records()[0].gini - 0.352).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_reports_line() {
        let e = ingest("country,year,gini\nA,1995,40\nNarnia,1995,152\n", Units::Percent).unwrap_err();
        assert_eq!(e, PanelError::OutOfRange { line: 3, value: 1.52 });
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let e = ingest("country,year,gini\nNarnia,1995,35\nNarnia,1995,36\n", Units::Percent).unwrap_err();
        assert!(matches!(e, PanelError::DuplicateKey { line: 3, .. }));
    }

    #[test]
    fn missing_column_and_bad_numbers() {
        assert_eq!(
            ingest("country,gini\nA,3\n", Units::Percent).unwrap_err(),
            PanelError::MissingColumn("year")
        );
        assert!(matches!(
            ingest("country,year,gini\nA,19x5,3\n", Units::Percent).unwrap_err(),
            PanelError::BadNumeric { line: 2, field: "year", .. }
        ));
        assert!(matches!(
            ingest("country,year,gini\nA,1995,\n", Units::Percent).unwrap_err(),
            PanelError::BadNumeric { line: 2, field: "gini", .. }
        ));
    }

    #[test]
    fn crlf_and_column_order() {
        let p = ingest("gini,country,year\r\n0.3,A,2000\r\n0.4,B,2000\r\n", Units::Fraction).unwrap();
        assert_eq!(p.year_values(2000), vec![0.3, 0.4]);
    }

    #[test]
    fn unknown_year_and_small_samples() {
        let p = synthetic_panel(&[2000], 5, SyntheticLaw::Normal { mean: 0.4, std_dev: 0.08 }, 1);
        assert_eq!(
            year_report(&p, 1999, ReportOptions::default()).unwrap_err(),
            PanelError::UnknownYear(1999)
        );
        assert!(matches!(
            year_report(&p, 2000, ReportOptions::default()).unwrap_err(),
            PanelError::Stats(StatsError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn reference_lookup() {
        assert_eq!(reference_alarm(1995), Some(0.579695));
        assert_eq!(reference_alarm(2000), Some(0.573449));
        assert_eq!(reference_alarm(2005), Some(0.560313));
        assert_eq!(reference_alarm(1990), Some(0.605506));
        assert_eq!(reference_alarm(2010), None);
    }

    #[test]
    fn invalid_report_suppresses_headline() {
        let p = synthetic_panel(
            &[1990],
            140,
            SyntheticLaw::ShiftedExponential { offset: 0.25, mean: 0.1 },
            3,
        );
        let r = year_report(&p, 1990, ReportOptions::default()).unwrap();
        assert!(!r.alarm.valid);
        assert_eq!(r.headline_alarm(), None);
        assert!(r.render_text(false).contains("not reported"));
        assert!(r.render_text(true).contains("informal"));
    }
}
