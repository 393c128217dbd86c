//! Monthly topic probability series, user-defined topic groups and Pearson correlation.
//!
//! A series spans every month from the corpus's first to its last. Months without documents
//! are gaps (`None`), never zeros, and correlations only use months where both series have data.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Month;

#[derive(Debug, Error)]
pub enum TrendsError {
    #[error("no documents")]
    Empty,
    #[error("{thetas} topic distributions for {months} months")]
    LengthMismatch { thetas: usize, months: usize },
    #[error("topic {topic} out of range for {num_topics} topics")]
    TopicOutOfRange { topic: usize, num_topics: usize },
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("topic {topic} assigned to both `{first}` and `{second}`")]
    DuplicateTopic { topic: usize, first: String, second: String },
    #[error("need at least 3 shared months, got {0}")]
    InsufficientOverlap(usize),
    #[error("series is constant over the shared months; correlation undefined")]
    ConstantSeries,
    #[error("smoothing width must be odd and positive, got {0}")]
    InvalidWidth(usize),
    #[error("group map row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSeries {
    pub id: String,
    pub months: Vec<Month>,
    /// Mean probability per month; `None` where the month has no documents.
    pub values: Vec<Option<f64>>,
    /// Documents per month.
    pub support: Vec<usize>,
}

impl TopicSeries {
    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    /// `(month, value)` for months with data.
    pub fn points(&self) -> impl Iterator<Item = (Month, f64)> + '_ {
        self.months.iter().zip(&self.values).filter_map(|(m, v)| Some((*m, (*v)?)))
    }
}

fn check_inputs<T: AsRef<[f64]>>(thetas: &[T], months: &[Month]) -> Result<usize, TrendsError> {
    if thetas.len() != months.len() {
        return Err(TrendsError::LengthMismatch { thetas: thetas.len(), months: months.len() });
    }
    thetas.first().map(|t| t.as_ref().len()).ok_or(TrendsError::Empty)
}

/// Monthly mean of `value(doc)`, over the full month range of `months`.
fn monthly_mean<F: Fn(usize) -> f64>(id: String, months: &[Month], value: F) -> TopicSeries {
    let first = *months.iter().min().expect("non-empty");
    let last = *months.iter().max().expect("non-empty");
    let n = (last.0 - first.0 + 1) as usize;
    let mut sums = vec![0.0; n];
    let mut support = vec![0usize; n];
    for (i, m) in months.iter().enumerate() {
        let slot = (m.0 - first.0) as usize;
        sums[slot] += value(i);
        support[slot] += 1;
    }
    TopicSeries {
        id,
        months: (0..n).map(|i| first.offset(i as i32)).collect(),
        values: sums.iter().zip(&support).map(|(s, &c)| (c > 0).then(|| s / c as f64)).collect(),
        support,
    }
}

pub fn topic_series<T: AsRef<[f64]>>(thetas: &[T], months: &[Month], topic: usize) -> Result<TopicSeries, TrendsError> {
    let k = check_inputs(thetas, months)?;
    if topic >= k {
        return Err(TrendsError::TopicOutOfRange { topic, num_topics: k });
    }
    Ok(monthly_mean(format!("topic_{topic}"), months, |i| thetas[i].as_ref()[topic]))
}

/// One series per topic.
pub fn all_topic_series<T: AsRef<[f64]>>(thetas: &[T], months: &[Month]) -> Result<Vec<TopicSeries>, TrendsError> {
    let k = check_inputs(thetas, months)?;
    (0..k).map(|t| topic_series(thetas, months, t)).collect()
}

/// Partial assignment of topics to group labels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupMap {
    groups: BTreeMap<usize, String>,
}

impl GroupMap {
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, TrendsError>
    where
        I: IntoIterator<Item = (usize, S)>,
        S: Into<String>,
    {
        let mut groups: BTreeMap<usize, String> = BTreeMap::new();
        for (topic, label) in pairs {
            let label = label.into();
            if let Some(prev) = groups.get(&topic) {
                if *prev != label {
                    return Err(TrendsError::DuplicateTopic { topic, first: prev.clone(), second: label });
                }
            }
            groups.insert(topic, label);
        }
        Ok(GroupMap { groups })
    }

    /// Two-column CSV with header `topic_id,group_label`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, TrendsError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut pairs = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let bad = |message: String| TrendsError::BadRow { row, message };
            if rec.len() != 2 {
                return Err(bad(format!("expected 2 fields, got {}", rec.len())));
            }
            let topic = rec[0].parse::<usize>().map_err(|e| bad(format!("topic id `{}`: {e}", &rec[0])))?;
            if rec[1].is_empty() {
                return Err(bad("empty group label".into()));
            }
            pairs.push((topic, rec[1].to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn group_of(&self, topic: usize) -> Option<&str> {
        self.groups.get(&topic).map(String::as_str)
    }

    /// Distinct labels in sorted order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.groups.values().map(String::as_str).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn members(&self, label: &str) -> Vec<usize> {
        self.groups.iter().filter(|(_, l)| *l == label).map(|(t, _)| *t).collect()
    }
}

/// Monthly mean of the summed probability of the group's member topics.
pub fn group_series<T: AsRef<[f64]>>(
    thetas: &[T],
    months: &[Month],
    groups: &GroupMap,
    label: &str,
) -> Result<TopicSeries, TrendsError> {
    let k = check_inputs(thetas, months)?;
    let members = groups.members(label);
    if members.is_empty() {
        return Err(TrendsError::UnknownGroup(label.to_string()));
    }
    if let Some(&topic) = members.iter().find(|&&t| t >= k) {
        return Err(TrendsError::TopicOutOfRange { topic, num_topics: k });
    }
    Ok(monthly_mean(format!("group_{label}"), months, |i| {
        let theta = thetas[i].as_ref();
        members.iter().map(|&t| theta[t]).sum()
    }))
}

/// Centered moving average over `width` months. Each output is the mean of the non-gap
/// values in the window; gap months stay gaps. Width 1 returns the series unchanged.
pub fn moving_average(series: &TopicSeries, width: usize) -> Result<TopicSeries, TrendsError> {
    if width == 0 || width.is_multiple_of(2) {
        return Err(TrendsError::InvalidWidth(width));
    }
    let half = width / 2;
    let n = series.len();
    let values = (0..n)
        .map(|i| {
            series.values[i]?;
            let window = &series.values[i.saturating_sub(half)..(i + half + 1).min(n)];
            let present: Vec<f64> = window.iter().flatten().copied().collect();
            Some(present.iter().sum::<f64>() / present.len() as f64)
        })
        .collect();
    Ok(TopicSeries { id: series.id.clone(), months: series.months.clone(), values, support: series.support.clone() })
}

/// Sample Pearson correlation of two equally long samples.
pub fn pearson_values(x: &[f64], y: &[f64]) -> Result<f64, TrendsError> {
    let n = x.len().min(y.len());
    if x.len() != y.len() || n < 3 {
        return Err(TrendsError::InsufficientOverlap(n));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(TrendsError::ConstantSeries);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Correlation over the months where both series have data.
pub fn pearson(a: &TopicSeries, b: &TopicSeries) -> Result<f64, TrendsError> {
    let bmap: BTreeMap<Month, f64> = b.points().collect();
    let (x, y): (Vec<f64>, Vec<f64>) = a.points().filter_map(|(m, v)| Some((v, *bmap.get(&m)?))).unzip();
    pearson_values(&x, &y)
}

/// Long-format CSV with columns `series_id, month, value, n_docs`; gaps have an empty value.
pub fn write_series_csv<W: Write>(writer: W, series: &[TopicSeries]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["series_id", "month", "value", "n_docs"])?;
    for s in series {
        for ((m, v), n) in s.months.iter().zip(&s.values).zip(&s.support) {
            w.write_record([s.id.clone(), m.to_string(), v.map(|x| x.to_string()).unwrap_or_default(), n.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
