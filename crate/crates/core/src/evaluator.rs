//! Survey scoring for the 13-item, 4-point instrument.
//!
//! Means are held as integer hundredths and rounded half-up before they are
//! labelled, so classification never depends on floating point.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::par::*;

pub const DEFAULT_INSTRUMENT_CSV: &str = include_str!("../assets/instrument.csv");
pub const SURVEY_FIXTURE_CSV: &str = include_str!("../assets/survey_fixture.csv");
pub const INSTRUMENT_ITEMS: usize = 13;

/// A mean in hundredths: `372` is 3.72.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct Hundredths(pub u32);

impl Hundredths {
    /// `numerator / denominator` rounded half-up to two decimals.
    pub fn from_ratio(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0);
        Self(((200 * numerator + denominator) / (2 * denominator)) as u32)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Hundredths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl From<Hundredths> for f64 {
    fn from(h: Hundredths) -> f64 {
        h.as_f64()
    }
}

impl TryFrom<f64> for Hundredths {
    type Error = String;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        if !(0.0..=1000.0).contains(&v) {
            return Err(format!("mean {v} out of range"));
        }
        Ok(Self((v * 100.0).round() as u32))
    }
}

impl FromStr for Hundredths {
    type Err = String;

    /// Accepts `3`, `3.7` or `3.72`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("`{s}` is not a two-decimal mean");
        let (whole, frac) = s.trim().split_once('.').unwrap_or((s.trim(), ""));
        if frac.len() > 2 || whole.is_empty() {
            return Err(bad());
        }
        let whole: u32 = whole.parse().map_err(|_| bad())?;
        let frac: u32 = if frac.is_empty() {
            0
        } else {
            format!("{frac:0<2}").parse().map_err(|_| bad())?
        };
        Ok(Self(whole * 100 + frac))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    NotAchieved,
    PartiallyAchieved,
    Achieved,
    FullyAchieved,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::NotAchieved => "Not Achieved",
            Label::PartiallyAchieved => "Partially Achieved",
            Label::Achieved => "Achieved",
            Label::FullyAchieved => "Fully Achieved",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleRange {
    pub lower: Hundredths,
    pub upper: Hundredths,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationScale {
    ranges: Vec<ScaleRange>,
}

impl InterpretationScale {
    /// Ranges must be ascending and contiguous at 0.01 steps.
    pub fn new(ranges: Vec<ScaleRange>) -> Result<Self, EvalError> {
        if ranges.is_empty() {
            return Err(EvalError::InvalidScale("no ranges".into()));
        }
        for r in &ranges {
            if r.lower > r.upper {
                return Err(EvalError::InvalidScale(format!(
                    "range {}-{} is inverted",
                    r.lower, r.upper
                )));
            }
        }
        for w in ranges.windows(2) {
            if w[1].lower.0 != w[0].upper.0 + 1 {
                return Err(EvalError::InvalidScale(format!(
                    "gap or overlap between {} and {}",
                    w[0].upper, w[1].lower
                )));
            }
        }
        Ok(Self { ranges })
    }

    pub fn ranges(&self) -> &[ScaleRange] {
        &self.ranges
    }

    pub fn min(&self) -> Hundredths {
        self.ranges[0].lower
    }

    pub fn max(&self) -> Hundredths {
        self.ranges[self.ranges.len() - 1].upper
    }
}

impl Default for InterpretationScale {
    /// 1.00-1.75 not achieved, 1.76-2.50 partially achieved, 2.51-3.25
    /// achieved, 3.26-4.00 fully achieved.
    fn default() -> Self {
        let r = |lo, hi, label| ScaleRange {
            lower: Hundredths(lo),
            upper: Hundredths(hi),
            label,
        };
        Self::new(vec![
            r(100, 175, Label::NotAchieved),
            r(176, 250, Label::PartiallyAchieved),
            r(251, 325, Label::Achieved),
            r(326, 400, Label::FullyAchieved),
        ])
        .expect("default scale is contiguous")
    }
}

pub fn interpret(mean: Hundredths, scale: &InterpretationScale) -> Result<Label, EvalError> {
    scale
        .ranges
        .iter()
        .find(|r| r.lower <= mean && mean <= r.upper)
        .map(|r| r.label)
        .ok_or(EvalError::OutOfScale(mean))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver {
    EpicMeaning,
    Development,
    Empowerment,
    Ownership,
    SocialInfluence,
    Scarcity,
    Unpredictability,
    LossAvoidance,
}

impl Driver {
    pub const ALL: [Driver; 8] = [
        Driver::EpicMeaning,
        Driver::Development,
        Driver::Empowerment,
        Driver::Ownership,
        Driver::SocialInfluence,
        Driver::Scarcity,
        Driver::Unpredictability,
        Driver::LossAvoidance,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            Driver::EpicMeaning => "epic_meaning",
            Driver::Development => "development",
            Driver::Empowerment => "empowerment",
            Driver::Ownership => "ownership",
            Driver::SocialInfluence => "social_influence",
            Driver::Scarcity => "scarcity",
            Driver::Unpredictability => "unpredictability",
            Driver::LossAvoidance => "loss_avoidance",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Driver::EpicMeaning => "Epic meaning and calling",
            Driver::Development => "Development and accomplishment",
            Driver::Empowerment => "Empowerment of creativity and feedback",
            Driver::Ownership => "Ownership and possession",
            Driver::SocialInfluence => "Social influence and relatedness",
            Driver::Scarcity => "Scarcity and impatience",
            Driver::Unpredictability => "Unpredictability and curiosity",
            Driver::LossAvoidance => "Loss and avoidance",
        }
    }
}

impl FromStr for Driver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Driver::ALL
            .into_iter()
            .find(|d| d.slug() == s.trim())
            .ok_or_else(|| format!("unknown driver `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    Student,
    Expert,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Student, Group::Expert];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Student => "Student",
            Group::Expert => "Expert",
        }
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "student" => Ok(Group::Student),
            "expert" => Ok(Group::Expert),
            other => Err(format!("unknown group `{other}` (student|expert)")),
        }
    }
}

/// One problem in an input file; `line` is 1-based and counts the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("mean {0} is outside the interpretation scale")]
    OutOfScale(Hundredths),
    #[error("no responses for item {item_id} from group {group:?}")]
    NoResponses { item_id: String, group: Group },
    #[error("driver {0:?} has no item statistics")]
    MissingDriver(Driver),
    #[error("invalid interpretation scale: {0}")]
    InvalidScale(String),
    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),
    #[error("{source_name}: {} problem(s)\n{}", .diagnostics.len(), render_diagnostics(.diagnostics))]
    Validation {
        source_name: String,
        diagnostics: Vec<Diagnostic>,
    },
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentItem {
    pub item_id: String,
    pub driver: Driver,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instrument {
    items: Vec<InstrumentItem>,
}

impl Instrument {
    pub fn new(items: Vec<InstrumentItem>) -> Result<Self, EvalError> {
        if items.len() != INSTRUMENT_ITEMS {
            return Err(EvalError::InvalidInstrument(format!(
                "expected {INSTRUMENT_ITEMS} items, found {}",
                items.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.item_id.as_str()) {
                return Err(EvalError::InvalidInstrument(format!(
                    "duplicate item id {}",
                    item.item_id
                )));
            }
        }
        Ok(Self { items })
    }

    /// CSV with header `item_id,driver,prompt`.
    pub fn from_csv(text: &str, source_name: &str) -> Result<Self, EvalError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        check_header(&mut reader, &["item_id", "driver", "prompt"], source_name)?;
        let mut items = Vec::new();
        let mut diagnostics = Vec::new();
        for record in reader.records() {
            let record = match record {
                Ok(r) => r,
                Err(e) => {
                    diagnostics.push(csv_diag(&e));
                    continue;
                }
            };
            let line = record.position().map_or(0, |p| p.line());
            match record.get(1).unwrap_or("").parse::<Driver>() {
                Ok(driver) => items.push(InstrumentItem {
                    item_id: record[0].to_string(),
                    driver,
                    prompt: record.get(2).unwrap_or("").to_string(),
                }),
                Err(message) => diagnostics.push(Diagnostic { line, message }),
            }
        }
        if !diagnostics.is_empty() {
            return Err(EvalError::Validation {
                source_name: source_name.into(),
                diagnostics,
            });
        }
        Self::new(items)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        Self::from_csv(&read_input(path)?, &path.display().to_string())
    }

    pub fn items(&self) -> &[InstrumentItem] {
        &self.items
    }

    pub fn item(&self, item_id: &str) -> Option<&InstrumentItem> {
        self.items.iter().find(|i| i.item_id == item_id)
    }

    /// Drivers that own at least one item, in order of first appearance.
    pub fn drivers(&self) -> Vec<Driver> {
        let mut out = Vec::new();
        for item in &self.items {
            if !out.contains(&item.driver) {
                out.push(item.driver);
            }
        }
        out
    }
}

impl Default for Instrument {
    fn default() -> Self {
        Self::from_csv(DEFAULT_INSTRUMENT_CSV, "bundled instrument").expect("bundled instrument is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub respondent_id: String,
    pub group: Group,
    pub item_id: String,
    pub rating: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponseSet {
    rows: Vec<Response>,
}

impl SurveyResponseSet {
    /// Ratings must be 1..=4 and every item must exist in `instrument`.
    pub fn new(rows: Vec<Response>, instrument: &Instrument) -> Result<Self, EvalError> {
        let diagnostics: Vec<Diagnostic> = rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                row_problem(r, instrument).map(|message| Diagnostic {
                    line: i as u64 + 1,
                    message,
                })
            })
            .collect();
        if diagnostics.is_empty() {
            Ok(Self { rows })
        } else {
            Err(EvalError::Validation {
                source_name: "responses".into(),
                diagnostics,
            })
        }
    }

    /// CSV with header `respondent_id,group,item_id,rating`. Every bad line
    /// is reported, not only the first.
    pub fn from_csv(text: &str, instrument: &Instrument, source_name: &str) -> Result<Self, EvalError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        check_header(
            &mut reader,
            &["respondent_id", "group", "item_id", "rating"],
            source_name,
        )?;
        let mut rows = Vec::new();
        let mut diagnostics = Vec::new();
        for record in reader.records() {
            let record = match record {
                Ok(r) => r,
                Err(e) => {
                    diagnostics.push(csv_diag(&e));
                    continue;
                }
            };
            let line = record.position().map_or(0, |p| p.line());
            let mut push = |message: String| diagnostics.push(Diagnostic { line, message });
            let group = match record[1].parse::<Group>() {
                Ok(g) => g,
                Err(m) => {
                    push(m);
                    continue;
                }
            };
            let rating = match record[3].parse::<u8>() {
                Ok(r) => r,
                Err(_) => {
                    push(format!("rating `{}` is not an integer", &record[3]));
                    continue;
                }
            };
            let row = Response {
                respondent_id: record[0].to_string(),
                group,
                item_id: record[2].to_string(),
                rating,
            };
            match row_problem(&row, instrument) {
                Some(m) => push(m),
                None => rows.push(row),
            }
        }
        if diagnostics.is_empty() {
            Ok(Self { rows })
        } else {
            Err(EvalError::Validation {
                source_name: source_name.into(),
                diagnostics,
            })
        }
    }

    pub fn load(path: impl AsRef<Path>, instrument: &Instrument) -> Result<Self, EvalError> {
        let path = path.as_ref();
        Self::from_csv(&read_input(path)?, instrument, &path.display().to_string())
    }

    /// The bundled response set matching the published student item means.
    pub fn fixture() -> Self {
        Self::from_csv(SURVEY_FIXTURE_CSV, &Instrument::default(), "bundled fixture")
            .expect("bundled fixture is valid")
    }

    pub fn rows(&self) -> &[Response] {
        &self.rows
    }

    pub fn groups(&self) -> Vec<Group> {
        Group::ALL
            .into_iter()
            .filter(|g| self.rows.iter().any(|r| r.group == *g))
            .collect()
    }
}

fn row_problem(r: &Response, instrument: &Instrument) -> Option<String> {
    if !(1..=4).contains(&r.rating) {
        Some(format!("rating {} outside 1..=4", r.rating))
    } else if instrument.item(&r.item_id).is_none() {
        Some(format!("item `{}` is not in the instrument", r.item_id))
    } else {
        None
    }
}

fn read_input(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|e| EvalError::Validation {
        source_name: path.display().to_string(),
        diagnostics: vec![Diagnostic {
            line: 0,
            message: e.to_string(),
        }],
    })
}

fn check_header(reader: &mut csv::Reader<&[u8]>, expected: &[&str], source_name: &str) -> Result<(), EvalError> {
    let fail = |message: String| EvalError::Validation {
        source_name: source_name.into(),
        diagnostics: vec![Diagnostic { line: 1, message }],
    };
    let headers = reader.headers().map_err(|e| fail(e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(fail(format!(
            "header must be `{}`, found `{}`",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

fn csv_diag(e: &csv::Error) -> Diagnostic {
    Diagnostic {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemStat {
    pub item_id: String,
    pub group: Group,
    pub n: u64,
    pub mean: Hundredths,
    pub label: Label,
}

pub fn item_mean(
    responses: &SurveyResponseSet,
    item_id: &str,
    group: Group,
    scale: &InterpretationScale,
) -> Result<ItemStat, EvalError> {
    let (n, sum) = responses
        .rows
        .iter()
        .filter(|r| r.group == group && r.item_id == item_id)
        .fold((0u64, 0u64), |(n, s), r| (n + 1, s + r.rating as u64));
    if n == 0 {
        return Err(EvalError::NoResponses {
            item_id: item_id.to_string(),
            group,
        });
    }
    let mean = Hundredths::from_ratio(sum, n);
    Ok(ItemStat {
        item_id: item_id.to_string(),
        group,
        n,
        mean,
        label: interpret(mean, scale)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverSummary {
    pub driver: Driver,
    pub group: Group,
    pub items: u64,
    pub mean: Hundredths,
    pub label: Label,
}

/// Unweighted mean of each driver's item means, per group present in
/// `stats`. Drivers with no items in the instrument are skipped; a driver
/// that has items but no statistics for a group is an error.
pub fn driver_summary(
    stats: &[ItemStat],
    instrument: &Instrument,
    scale: &InterpretationScale,
) -> Result<Vec<DriverSummary>, EvalError> {
    let groups: Vec<Group> = Group::ALL
        .into_iter()
        .filter(|g| stats.iter().any(|s| s.group == *g))
        .collect();
    let mut out = Vec::new();
    for driver in instrument.drivers() {
        for &group in &groups {
            let means: Vec<u64> = stats
                .iter()
                .filter(|s| {
                    s.group == group
                        && instrument
                            .item(&s.item_id)
                            .is_some_and(|i| i.driver == driver)
                })
                .map(|s| s.mean.0 as u64)
                .collect();
            if means.is_empty() {
                return Err(EvalError::MissingDriver(driver));
            }
            let mean = Hundredths::from_ratio(means.iter().sum::<u64>(), means.len() as u64 * 100);
            out.push(DriverSummary {
                driver,
                group,
                items: means.len() as u64,
                mean,
                label: interpret(mean, scale)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub instrument: Instrument,
    pub stats: Vec<ItemStat>,
    pub summaries: Vec<DriverSummary>,
}

/// Item statistics for every (item, group) pair in instrument order with
/// students first, followed by the driver summaries.
pub fn evaluate(
    instrument: &Instrument,
    responses: &SurveyResponseSet,
    scale: &InterpretationScale,
) -> Result<Report, EvalError> {
    let groups = responses.groups();
    let pairs: Vec<(&InstrumentItem, Group)> = instrument
        .items()
        .iter()
        .flat_map(|item| groups.iter().map(move |&g| (item, g)))
        .collect();
    let stats = pairs
        .par_iter()
        .map(|(item, group)| item_mean(responses, &item.item_id, *group, scale))
        .collect::<Result<Vec<_>, _>>()?;
    let summaries = driver_summary(&stats, instrument, scale)?;
    Ok(Report {
        instrument: instrument.clone(),
        stats,
        summaries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Structured,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(format!("unknown format `{other}` (text|csv|structured)")),
        }
    }
}

#[derive(Serialize)]
struct StructuredItem<'a> {
    item_id: &'a str,
    driver: Driver,
    prompt: &'a str,
    group: Group,
    n: u64,
    mean: Hundredths,
    interpretation: &'static str,
}

#[derive(Serialize)]
struct StructuredDriver {
    driver: Driver,
    title: &'static str,
    group: Group,
    items: u64,
    mean: Hundredths,
    interpretation: &'static str,
}

#[derive(Serialize)]
struct StructuredReport<'a> {
    items: Vec<StructuredItem<'a>>,
    drivers: Vec<StructuredDriver>,
}

pub fn render_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Structured => {
            let doc = StructuredReport {
                items: report
                    .stats
                    .iter()
                    .map(|s| {
                        let item = report.instrument.item(&s.item_id).expect("stat for known item");
                        StructuredItem {
                            item_id: &s.item_id,
                            driver: item.driver,
                            prompt: &item.prompt,
                            group: s.group,
                            n: s.n,
                            mean: s.mean,
                            interpretation: s.label.as_str(),
                        }
                    })
                    .collect(),
                drivers: report
                    .summaries
                    .iter()
                    .map(|d| StructuredDriver {
                        driver: d.driver,
                        title: d.driver.title(),
                        group: d.group,
                        items: d.items,
                        mean: d.mean,
                        interpretation: d.label.as_str(),
                    })
                    .collect(),
            };
            let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
            out.push('\n');
            out
        }
    }
}

fn render_text(report: &Report) -> String {
    let mut out = String::new();
    writeln!(out, "Survey report").unwrap();
    for driver in report.instrument.drivers() {
        writeln!(out).unwrap();
        writeln!(out, "{}", driver.title()).unwrap();
        for item in report.instrument.items().iter().filter(|i| i.driver == driver) {
            writeln!(out, "  {}  {}", item.item_id, item.prompt).unwrap();
            for s in report.stats.iter().filter(|s| s.item_id == item.item_id) {
                writeln!(
                    out,
                    "      {:<8} n={:<4} mean={}  {}",
                    s.group.as_str(),
                    s.n,
                    s.mean,
                    s.label
                )
                .unwrap();
            }
        }
        for d in report.summaries.iter().filter(|d| d.driver == driver) {
            writeln!(
                out,
                "  driver  {:<8} items={:<2} mean={}  {}",
                d.group.as_str(),
                d.items,
                d.mean,
                d.label
            )
            .unwrap();
        }
    }
    out
}

fn render_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "row", "driver", "item_id", "group", "n", "mean", "interpretation", "prompt",
    ])
    .unwrap();
    for s in &report.stats {
        let item = report.instrument.item(&s.item_id).expect("stat for known item");
        w.write_record([
            "item",
            item.driver.slug(),
            &s.item_id,
            s.group.as_str(),
            &s.n.to_string(),
            &s.mean.to_string(),
            s.label.as_str(),
            &item.prompt,
        ])
        .unwrap();
    }
    for d in &report.summaries {
        w.write_record([
            "driver",
            d.driver.slug(),
            "",
            d.group.as_str(),
            &d.items.to_string(),
            &d.mean.to_string(),
            d.label.as_str(),
            "",
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> Hundredths {
        s.parse().unwrap()
    }

    #[test]
    fn interpret_examples() {
        let scale = InterpretationScale::default();
        assert_eq!(interpret(h("3.71"), &scale), Ok(Label::FullyAchieved));
        assert_eq!(interpret(h("1.75"), &scale), Ok(Label::NotAchieved));
        assert_eq!(interpret(h("1.76"), &scale), Ok(Label::PartiallyAchieved));
        assert_eq!(interpret(h("2.51"), &scale), Ok(Label::Achieved));
        assert_eq!(interpret(h("4"), &scale), Ok(Label::FullyAchieved));
        assert_eq!(interpret(h("0.99"), &scale), Err(EvalError::OutOfScale(h("0.99"))));
        assert_eq!(interpret(h("4.01"), &scale), Err(EvalError::OutOfScale(h("4.01"))));
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(Hundredths::from_ratio(223, 60), h("3.72"));
        assert_eq!(Hundredths::from_ratio(11, 3), h("3.67"));
        assert_eq!(Hundredths::from_ratio(7, 2), h("3.50"));
        // 3.585 exactly: half-up gives 3.59
        assert_eq!(Hundredths::from_ratio(717, 200), h("3.59"));
        assert_eq!(Hundredths::from_ratio(3585, 1000), h("3.59"));
        assert_eq!(Hundredths::from_ratio(35849, 10000), h("3.58"));
    }

    fn set(ratings: &[(Group, u8)]) -> SurveyResponseSet {
        let rows = ratings
            .iter()
            .enumerate()
            .map(|(i, &(group, rating))| Response {
                respondent_id: format!("r{i}"),
                group,
                item_id: "q01".into(),
                rating,
            })
            .collect();
        SurveyResponseSet::new(rows, &Instrument::default()).unwrap()
    }

    #[test]
    fn item_mean_examples() {
        let scale = InterpretationScale::default();
        let mut ratings = vec![(Group::Student, 4); 43];
        ratings.extend(vec![(Group::Student, 3); 17]);
        let stat = item_mean(&set(&ratings), "q01", Group::Student, &scale).unwrap();
        assert_eq!((stat.n, stat.mean, stat.label), (60, h("3.72"), Label::FullyAchieved));

        let stat = item_mean(&set(&[(Group::Expert, 4); 3]), "q01", Group::Expert, &scale).unwrap();
        assert_eq!(stat.mean, h("4.00"));

        let three = [(Group::Expert, 4), (Group::Expert, 4), (Group::Expert, 3)];
        let stat = item_mean(&set(&three), "q01", Group::Expert, &scale).unwrap();
        assert_eq!(stat.mean, h("3.67"));

        assert_eq!(
            item_mean(&set(&three), "q01", Group::Student, &scale),
            Err(EvalError::NoResponses {
                item_id: "q01".into(),
                group: Group::Student
            })
        );
    }

    fn stat(item: &str, mean: &str) -> ItemStat {
        ItemStat {
            item_id: item.into(),
            group: Group::Student,
            n: 60,
            mean: h(mean),
            label: Label::FullyAchieved,
        }
    }

    #[test]
    fn driver_summary_examples() {
        let scale = InterpretationScale::default();
        let instrument = Instrument::default();
        let means = [
            "3.72", "3.70", "3.70", "3.62", "3.67", "3.50", "3.62", "3.65", "3.70", "3.67", "3.70",
            "3.75", "3.67",
        ];
        let stats: Vec<ItemStat> = instrument
            .items()
            .iter()
            .zip(means)
            .map(|(i, m)| stat(&i.item_id, m))
            .collect();
        let summary = driver_summary(&stats, &instrument, &scale).unwrap();
        let get = |d| summary.iter().find(|s| s.driver == d).unwrap().mean;
        assert_eq!(get(Driver::EpicMeaning), h("3.71"));
        assert_eq!(get(Driver::Empowerment), h("3.59"));
        assert_eq!(get(Driver::Ownership), h("3.62"));
        assert_eq!(get(Driver::SocialInfluence), h("3.68"));

        // A driver with items but no stats for the group.
        let partial: Vec<ItemStat> = stats.iter().filter(|s| s.item_id != "q07").cloned().collect();
        assert_eq!(
            driver_summary(&partial, &instrument, &scale),
            Err(EvalError::MissingDriver(Driver::Ownership))
        );
    }

    #[test]
    fn default_instrument_shape() {
        let instrument = Instrument::default();
        assert_eq!(instrument.items().len(), 13);
        assert_eq!(instrument.drivers().len(), 7);
        assert!(!instrument.drivers().contains(&Driver::Scarcity));
    }

    #[test]
    fn csv_diagnostics_are_line_numbered() {
        let instrument = Instrument::default();
        let text = "respondent_id,group,item_id,rating\n\
                    a,student,q01,4\n\
                    b,teacher,q01,4\n\
                    c,student,q99,3\n\
                    d,expert,q02,5\n\
                    e,expert,q02,x\n";
        let err = SurveyResponseSet::from_csv(text, &instrument, "in.csv").unwrap_err();
        let EvalError::Validation { diagnostics, .. } = err else {
            panic!("wrong error {err:?}")
        };
        let lines: Vec<u64> = diagnostics.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![3, 4, 5, 6]);

        let err = SurveyResponseSet::from_csv("id,group\n", &instrument, "in.csv").unwrap_err();
        assert!(matches!(err, EvalError::Validation { .. }));
    }

    #[test]
    fn instrument_rejects_bad_files() {
        let mut text = String::from(DEFAULT_INSTRUMENT_CSV);
        text.push_str("q14,ownership,extra\n");
        assert!(matches!(
            Instrument::from_csv(&text, "x"),
            Err(EvalError::InvalidInstrument(_))
        ));
        let text = DEFAULT_INSTRUMENT_CSV.replace("ownership", "owning");
        assert!(matches!(
            Instrument::from_csv(&text, "x"),
            Err(EvalError::Validation { .. })
        ));
    }

    #[test]
    fn scale_validation() {
        let r = |lo, hi, label| ScaleRange {
            lower: Hundredths(lo),
            upper: Hundredths(hi),
            label,
        };
        assert!(InterpretationScale::new(vec![r(100, 175, Label::NotAchieved), r(177, 400, Label::Achieved)]).is_err());
        assert!(InterpretationScale::new(vec![r(100, 175, Label::NotAchieved), r(175, 400, Label::Achieved)]).is_err());
        assert!(InterpretationScale::new(vec![]).is_err());
    }

    #[test]
    fn report_formats_agree() {
        let report = evaluate(
            &Instrument::default(),
            &SurveyResponseSet::fixture(),
            &InterpretationScale::default(),
        )
        .unwrap();
        let text = render_report(&report, ReportFormat::Text);
        let csv_out = render_report(&report, ReportFormat::Csv);
        let json: serde_json::Value =
            serde_json::from_str(&render_report(&report, ReportFormat::Structured)).unwrap();

        let mut reader = csv::Reader::from_reader(csv_out.as_bytes());
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert!(rows.iter().all(|r| r.len() == 8));
        assert_eq!(rows.len(), 13 * 2 + 7 * 2);
        for (row, item) in rows.iter().zip(json["items"].as_array().unwrap()) {
            assert_eq!(row[2], *item["item_id"].as_str().unwrap());
            let mean: Hundredths = row[5].parse().unwrap();
            assert_eq!(mean.as_f64(), item["mean"].as_f64().unwrap());
            assert!(text.contains(&format!("mean={}", &row[5])));
        }
    }
}
