//! Record ingestion, publication-date repair and the month-indexed document store.
//!
//! Records arrive as CSV (RFC 4180) or JSON lines with a declared column map.
//! Records without an abstract are dropped first, then records whose date cannot be
//! resolved to a month. Season dates ("Summer 1998", "SPR 2004") are mapped through a
//! [`SeasonMap`]; year-only dates resolve to a configurable month.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::Tokenizer;

pub const DOCUMENT_STORE_FORMAT: &str = "topic-resonance/documents";
pub const DOCUMENT_STORE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("required column `{0}` not found in input header")]
    MissingColumn(String),
    #[error("invalid month `{0}`, expected YYYY-MM")]
    InvalidMonth(String),
    #[error("document store: {0}")]
    Store(String),
}

/// Calendar month, stored as the number of months since 1970-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Month(pub i32);

impl Month {
    pub const EPOCH_YEAR: i32 = 1970;

    /// `month` is 1-based.
    pub fn from_ym(year: i32, month: u32) -> Self {
        debug_assert!((1..=12).contains(&month));
        Month((year - Self::EPOCH_YEAR) * 12 + month as i32 - 1)
    }

    pub fn year(self) -> i32 {
        Self::EPOCH_YEAR + self.0.div_euclid(12)
    }

    pub fn month(self) -> u32 {
        self.0.rem_euclid(12) as u32 + 1
    }

    pub fn index(self) -> i32 {
        self.0
    }

    pub fn offset(self, months: i32) -> Self {
        Month(self.0 + months)
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for Month {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CorpusError::InvalidMonth(s.to_string());
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        if !(1..=12).contains(&month) {
            return Err(bad());
        }
        Ok(Month::from_ym(year, month))
    }
}

impl TryFrom<String> for Month {
    type Error = CorpusError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Month> for String {
    fn from(m: Month) -> String {
        m.to_string()
    }
}

/// One bibliographic record as read from the input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: Option<String>,
    pub venue: String,
    pub authors: Vec<String>,
    pub date_raw: String,
}

/// One retained publication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
    pub month: Month,
    pub venue: String,
    pub authors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    /// 1-based record number within the input stream.
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Well-formed records seen. Malformed rows are counted separately.
    pub total: usize,
    pub excluded_no_abstract: usize,
    pub excluded_no_date: usize,
    pub repaired_season_dates: usize,
    pub year_only_dates: usize,
    pub retained: usize,
    pub malformed: usize,
    pub errors: Vec<RowError>,
}

/// Month (1-12) assigned to each season label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeasonMap {
    pub spring: u32,
    pub summer: u32,
    pub autumn: u32,
    pub winter: u32,
}

impl Default for SeasonMap {
    fn default() -> Self {
        SeasonMap { spring: 4, summer: 7, autumn: 10, winter: 1 }
    }
}

impl SeasonMap {
    fn lookup(&self, word: &str) -> Option<u32> {
        match word {
            "spring" | "spr" => Some(self.spring),
            "summer" | "sum" => Some(self.summer),
            "autumn" | "aut" | "fall" | "fal" => Some(self.autumn),
            "winter" | "win" => Some(self.winter),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, m) in
            [("spring", self.spring), ("summer", self.summer), ("autumn", self.autumn), ("winter", self.winter)]
        {
            if !(1..=12).contains(&m) {
                return Err(format!("season `{name}` maps to month {m}, expected 1-12"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestConfig {
    pub season_map: SeasonMap,
    /// Month assigned to year-only dates; `None` drops them as unresolvable.
    pub year_only_month: Option<u32>,
    /// Prepend the title to the abstract before tokenizing.
    pub include_title: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig { season_map: SeasonMap::default(), year_only_month: Some(6), include_title: false }
    }
}

/// How a raw date string was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolvedDate {
    Exact(Month),
    Season(Month),
    YearOnly(Month),
}

impl ResolvedDate {
    pub fn month(self) -> Month {
        match self {
            ResolvedDate::Exact(m) | ResolvedDate::Season(m) | ResolvedDate::YearOnly(m) => m,
        }
    }
}

const MONTH_NAMES: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

fn month_word(word: &str) -> Option<u32> {
    if word == "sept" {
        return Some(9);
    }
    if word.len() < 3 {
        return None;
    }
    MONTH_NAMES
        .iter()
        .position(|name| *name == word || (word.len() == 3 && name.starts_with(word)))
        .map(|i| i as u32 + 1)
}

/// Resolve a free-form publication date to a month.
///
/// Accepts `YYYY-MM`, `YYYY/MM`, `YYYY-MM-DD`, month names (`Jul 1998`, `JUL 15 1998`),
/// seasons (`Summer 1998`, `1998 SPR`) and, when `year_only_month` is set, bare years.
pub fn resolve_date(raw: &str, config: &IngestConfig) -> Option<ResolvedDate> {
    let lowered = raw.trim().to_lowercase();
    let parts: Vec<&str> = lowered.split(|c: char| !c.is_alphanumeric()).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return None;
    }

    let mut year: Option<(usize, i32)> = None;
    for (i, p) in parts.iter().enumerate() {
        if p.len() == 4 && p.chars().all(|c| c.is_ascii_digit()) {
            if year.is_some() {
                return None;
            }
            year = Some((i, p.parse().ok()?));
        }
    }
    let (year_pos, year) = year?;

    let mut season = None;
    let mut named_month = None;
    for p in parts.iter().filter(|p| p.chars().all(char::is_alphabetic)) {
        if let Some(m) = config.season_map.lookup(p) {
            season = Some(m);
        } else {
            named_month = Some(month_word(p)?);
        }
    }

    match (named_month, season) {
        (Some(m), _) => return Some(ResolvedDate::Exact(Month::from_ym(year, m))),
        (None, Some(m)) => return Some(ResolvedDate::Season(Month::from_ym(year, m))),
        (None, None) => {}
    }

    // numeric month only when it directly follows a leading year
    if year_pos == 0 && parts.len() >= 2 {
        let m: u32 = parts[1].parse().ok()?;
        return (1..=12).contains(&m).then(|| ResolvedDate::Exact(Month::from_ym(year, m)));
    }
    if parts.len() == 1 {
        return config.year_only_month.map(|m| ResolvedDate::YearOnly(Month::from_ym(year, m)));
    }
    None
}

/// Apply exclusion and date-repair rules to a record stream.
///
/// Malformed rows (parse errors, duplicate ids) are collected in the report and never
/// abort the stream.
pub fn ingest<I>(records: I, config: &IngestConfig, tokenizer: &Tokenizer) -> (Vec<Document>, IngestReport)
where
    I: IntoIterator<Item = Result<RawRecord, RowError>>,
{
    let mut report = IngestReport::default();
    let mut docs = Vec::new();
    let mut seen = HashSet::new();

    for (i, item) in records.into_iter().enumerate() {
        let record = match item {
            Ok(r) => r,
            Err(e) => {
                report.malformed += 1;
                report.errors.push(e);
                continue;
            }
        };
        if !seen.insert(record.id.clone()) {
            report.malformed += 1;
            report.errors.push(RowError { row: i + 1, message: format!("duplicate id `{}`", record.id) });
            continue;
        }
        report.total += 1;

        let tokens = match record.abstract_text.as_deref().map(str::trim) {
            Some(text) if !text.is_empty() => {
                if config.include_title {
                    let mut t = tokenizer.tokenize(&record.title);
                    t.extend(tokenizer.tokenize(text));
                    t
                } else {
                    tokenizer.tokenize(text)
                }
            }
            _ => Vec::new(),
        };
        if tokens.is_empty() {
            report.excluded_no_abstract += 1;
            continue;
        }

        let month = match resolve_date(&record.date_raw, config) {
            Some(resolved) => {
                match resolved {
                    ResolvedDate::Season(_) => report.repaired_season_dates += 1,
                    ResolvedDate::YearOnly(_) => report.year_only_dates += 1,
                    ResolvedDate::Exact(_) => {}
                }
                resolved.month()
            }
            None => {
                report.excluded_no_date += 1;
                continue;
            }
        };

        docs.push(Document { id: record.id, tokens, month, venue: record.venue, authors: record.authors });
    }
    report.retained = docs.len();
    (docs, report)
}

/// Partition documents by month. Every month between the first and last is present,
/// possibly with an empty bin.
pub fn bin_by_month(docs: &[Document]) -> BTreeMap<Month, Vec<&Document>> {
    let mut bins: BTreeMap<Month, Vec<&Document>> = BTreeMap::new();
    let (Some(lo), Some(hi)) = (docs.iter().map(|d| d.month).min(), docs.iter().map(|d| d.month).max()) else {
        return bins;
    };
    for m in lo.0..=hi.0 {
        bins.insert(Month(m), Vec::new());
    }
    for d in docs {
        bins.get_mut(&d.month).expect("month within range").push(d);
    }
    bins
}

/// Names of the logical input columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ColumnMap {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub venue: String,
    pub authors: String,
    pub date: String,
    pub author_delimiter: char,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            id: "id".into(),
            title: "title".into(),
            abstract_text: "abstract".into(),
            venue: "venue".into(),
            authors: "authors".into(),
            date: "date".into(),
            author_delimiter: ';',
        }
    }
}

impl ColumnMap {
    fn split_authors(&self, field: &str) -> Vec<String> {
        field.split(self.author_delimiter).map(str::trim).filter(|a| !a.is_empty()).map(String::from).collect()
    }
}

fn non_empty(s: Option<&str>) -> Option<String> {
    s.map(str::trim).filter(|s| !s.is_empty()).map(String::from)
}

/// Read records from CSV with a header row. The title column is optional.
pub fn read_csv<R: std::io::Read>(
    reader: R,
    columns: &ColumnMap,
) -> Result<Vec<Result<RawRecord, RowError>>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = |name: &str| find(name).ok_or_else(|| CorpusError::MissingColumn(name.to_string()));
    let id_col = required(&columns.id)?;
    let abs_col = required(&columns.abstract_text)?;
    let venue_col = required(&columns.venue)?;
    let auth_col = required(&columns.authors)?;
    let date_col = required(&columns.date)?;
    let title_col = find(&columns.title);

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let rec = match row {
            Ok(r) => r,
            Err(e) => {
                out.push(Err(RowError { row: row_no, message: e.to_string() }));
                continue;
            }
        };
        let id = rec.get(id_col).map(str::trim).unwrap_or_default();
        if id.is_empty() {
            out.push(Err(RowError { row: row_no, message: "empty id".into() }));
            continue;
        }
        out.push(Ok(RawRecord {
            id: id.to_string(),
            title: title_col.and_then(|c| rec.get(c)).unwrap_or_default().trim().to_string(),
            abstract_text: non_empty(rec.get(abs_col)),
            venue: rec.get(venue_col).unwrap_or_default().trim().to_string(),
            authors: columns.split_authors(rec.get(auth_col).unwrap_or_default()),
            date_raw: rec.get(date_col).unwrap_or_default().trim().to_string(),
        }));
    }
    Ok(out)
}

/// Read records from JSON lines. `authors` may be an array or a delimited string.
pub fn read_jsonl<R: BufRead>(reader: R, columns: &ColumnMap) -> Result<Vec<Result<RawRecord, RowError>>, CorpusError> {
    use serde_json::Value;

    let mut out = Vec::new();
    let mut row_no = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        row_no += 1;
        let value: Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                out.push(Err(RowError { row: row_no, message: e.to_string() }));
                continue;
            }
        };
        let text = |key: &str| -> Option<String> {
            match value.get(key)? {
                Value::String(s) => Some(s.clone()),
                Value::Number(n) => Some(n.to_string()),
                _ => None,
            }
        };
        let Some(id) = non_empty(text(&columns.id).as_deref()) else {
            out.push(Err(RowError { row: row_no, message: format!("missing `{}`", columns.id) }));
            continue;
        };
        let authors = match value.get(&columns.authors) {
            Some(Value::Array(items)) => items
                .iter()
                .filter_map(Value::as_str)
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .map(String::from)
                .collect(),
            Some(Value::String(s)) => columns.split_authors(s),
            _ => Vec::new(),
        };
        out.push(Ok(RawRecord {
            id,
            title: text(&columns.title).unwrap_or_default().trim().to_string(),
            abstract_text: non_empty(text(&columns.abstract_text).as_deref()),
            venue: text(&columns.venue).unwrap_or_default().trim().to_string(),
            authors,
            date_raw: text(&columns.date).unwrap_or_default().trim().to_string(),
        }));
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreHeader {
    format: String,
    version: u32,
    count: usize,
}

/// Write the document store as JSON lines, preceded by a header line carrying the format version.
pub fn write_documents<W: Write>(mut writer: W, docs: &[Document]) -> Result<(), CorpusError> {
    let header =
        StoreHeader { format: DOCUMENT_STORE_FORMAT.into(), version: DOCUMENT_STORE_VERSION, count: docs.len() };
    serde_json::to_writer(&mut writer, &header)?;
    writer.write_all(b"\n")?;
    for d in docs {
        serde_json::to_writer(&mut writer, d)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_documents<R: BufRead>(reader: R) -> Result<Vec<Document>, CorpusError> {
    let mut lines = reader.lines();
    let header: StoreHeader = match lines.next() {
        Some(line) => serde_json::from_str(&line?)?,
        None => return Err(CorpusError::Store("empty file".into())),
    };
    if header.format != DOCUMENT_STORE_FORMAT || header.version != DOCUMENT_STORE_VERSION {
        return Err(CorpusError::Store(format!("unsupported format {} v{}", header.format, header.version)));
    }
    let mut docs = Vec::with_capacity(header.count);
    for line in lines {
        let line = line?;
        if !line.trim().is_empty() {
            docs.push(serde_json::from_str(&line)?);
        }
    }
    if docs.len() != header.count {
        return Err(CorpusError::Store(format!("header declares {} documents, found {}", header.count, docs.len())));
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, abs: Option<&str>, date: &str) -> Result<RawRecord, RowError> {
        Ok(RawRecord {
            id: id.into(),
            title: "Title".into(),
            abstract_text: abs.map(String::from),
            venue: "NeurIPS".into(),
            authors: vec!["Doe, Jane".into()],
            date_raw: date.into(),
        })
    }

    #[test]
    fn month_roundtrip() {
        let m = Month::from_ym(1986, 1);
        assert_eq!(m.to_string(), "1986-01");
        assert_eq!("1998-07".parse::<Month>().unwrap(), Month::from_ym(1998, 7));
        assert_eq!(Month::from_ym(1969, 12).to_string(), "1969-12");
        assert!("1998-13".parse::<Month>().is_err());
    }

    #[test]
    fn season_dates_use_map() {
        let cfg = IngestConfig::default();
        assert_eq!(resolve_date("Summer 1998", &cfg), Some(ResolvedDate::Season(Month::from_ym(1998, 7))));
        assert_eq!(resolve_date("SPR 2004", &cfg), Some(ResolvedDate::Season(Month::from_ym(2004, 4))));
        assert_eq!(resolve_date("Fall 2010", &cfg), Some(ResolvedDate::Season(Month::from_ym(2010, 10))));
        assert_eq!(resolve_date("WIN 2001", &cfg), Some(ResolvedDate::Season(Month::from_ym(2001, 1))));
        let custom = IngestConfig { season_map: SeasonMap { summer: 6, ..SeasonMap::default() }, ..cfg };
        assert_eq!(resolve_date("summer 1998", &custom).unwrap().month(), Month::from_ym(1998, 6));
    }

    #[test]
    fn date_formats() {
        let cfg = IngestConfig::default();
        assert_eq!(resolve_date("2018-07", &cfg), Some(ResolvedDate::Exact(Month::from_ym(2018, 7))));
        assert_eq!(resolve_date("2018/7/15", &cfg), Some(ResolvedDate::Exact(Month::from_ym(2018, 7))));
        assert_eq!(resolve_date("JUL 15 2018", &cfg), Some(ResolvedDate::Exact(Month::from_ym(2018, 7))));
        assert_eq!(resolve_date("September 2001", &cfg), Some(ResolvedDate::Exact(Month::from_ym(2001, 9))));
        assert_eq!(resolve_date("2001", &cfg), Some(ResolvedDate::YearOnly(Month::from_ym(2001, 6))));
        let strict = IngestConfig { year_only_month: None, ..IngestConfig::default() };
        assert_eq!(resolve_date("2001", &strict), None);
        for bad in ["", "n/a", "2018-13", "soon 2018", "1999 2000", "12 2018"] {
            assert_eq!(resolve_date(bad, &cfg), None, "{bad}");
        }
    }

    #[test]
    fn exclusions_are_disjoint_and_reconcile() {
        let tok = Tokenizer::default();
        let recs = vec![
            record("a", Some("neural networks learn"), "2001-03"),
            record("b", None, "garbage"),
            record("c", Some("   "), "2001-03"),
            record("d", Some("kernel machines"), "garbage"),
            record("e", Some("topic models"), "Summer 1998"),
            Err(RowError { row: 6, message: "bad row".into() }),
            record("a", Some("duplicate"), "2001-03"),
        ];
        let (docs, rep) = ingest(recs, &IngestConfig::default(), &tok);
        assert_eq!(rep.total, 5);
        assert_eq!(rep.excluded_no_abstract, 2);
        assert_eq!(rep.excluded_no_date, 1);
        assert_eq!(rep.repaired_season_dates, 1);
        assert_eq!(rep.malformed, 2);
        assert_eq!(rep.retained, rep.total - rep.excluded_no_abstract - rep.excluded_no_date);
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].month, Month::from_ym(1998, 7));
    }

    #[test]
    fn empty_stream() {
        let (docs, rep) = ingest(Vec::new(), &IngestConfig::default(), &Tokenizer::default());
        assert!(docs.is_empty());
        assert_eq!(rep, IngestReport::default());
    }

    #[test]
    fn title_switch() {
        let tok = Tokenizer::default();
        let cfg = IngestConfig { include_title: true, ..IngestConfig::default() };
        let (docs, _) = ingest(vec![record("a", Some("graphs"), "2001-01")], &cfg, &tok);
        assert_eq!(docs[0].tokens, vec!["title", "graphs"]);
    }

    #[test]
    fn bins_include_empty_months() {
        let mk = |id: &str, m: i32| Document {
            id: id.into(),
            tokens: vec!["x".into()],
            month: Month(m),
            venue: String::new(),
            authors: vec![],
        };
        let docs = vec![mk("a", 5), mk("b", 5), mk("c", 7)];
        let bins = bin_by_month(&docs);
        let sizes: Vec<(i32, usize)> = bins.iter().map(|(m, v)| (m.0, v.len())).collect();
        assert_eq!(sizes, vec![(5, 2), (6, 0), (7, 1)]);
        assert_eq!(bin_by_month(&docs[..1]).len(), 1);
        assert!(bin_by_month(&[]).is_empty());
    }

    #[test]
    fn csv_reader_collects_row_errors() {
        let data = "id,title,abstract,venue,authors,date\n\
                    1,T,\"An abstract, with comma\",ICML,\"Smith, J.; Doe, Jane\",2001-02\n\
                    ,T,x,ICML,a,2001\n\
                    3,T,y,ICML\n";
        let rows = read_csv(data.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(rows.len(), 3);
        let first = rows[0].as_ref().unwrap();
        assert_eq!(first.authors, vec!["Smith, J.", "Doe, Jane"]);
        assert_eq!(first.abstract_text.as_deref(), Some("An abstract, with comma"));
        assert!(rows[1].is_err());
        assert!(rows[2].is_err());
        let missing = read_csv("id,abstract\n".as_bytes(), &ColumnMap::default());
        assert!(matches!(missing, Err(CorpusError::MissingColumn(c)) if c == "venue"));
    }

    #[test]
    fn jsonl_reader_accepts_author_arrays() {
        let data = r#"{"id":"x1","abstract":"text here","venue":"AAAI","authors":["BENGIO, YOSHUA"],"date":"2019-05"}
{"id":"x2","abstract":"more","venue":"AAAI","authors":"A; B","date":"2019"}
not json
"#;
        let rows = read_jsonl(data.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(rows[0].as_ref().unwrap().authors, vec!["BENGIO, YOSHUA"]);
        assert_eq!(rows[1].as_ref().unwrap().authors, vec!["A", "B"]);
        assert_eq!(rows[2].as_ref().unwrap_err().row, 3);
    }

    #[test]
    fn document_store_roundtrip() {
        let docs = vec![Document {
            id: "p1".into(),
            tokens: vec!["deep".into(), "learning".into()],
            month: Month::from_ym(2012, 3),
            venue: "NIPS".into(),
            authors: vec!["Hinton, Geoffrey".into()],
        }];
        let mut buf = Vec::new();
        write_documents(&mut buf, &docs).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(r#"{"format":"topic-resonance/documents","version":1"#));
        assert_eq!(read_documents(buf.as_slice()).unwrap(), docs);
        assert!(read_documents(&b"{\"format\":\"other\",\"version\":1,\"count\":0}\n"[..]).is_err());
    }
}
