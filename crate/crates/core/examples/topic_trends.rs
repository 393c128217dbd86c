//! Monthly topic prevalence, grouped series, smoothing and correlation.
//!
//! ```text
//! cargo run --example topic_trends
//! ```

use std::error::Error;

use topic_resonance::corpus::Month;
use topic_resonance::lda::{sample_documents, SamplerConfig};
use topic_resonance::synthetic::block_topics;
use topic_resonance::trends::{all_topic_series, group_series, moving_average, pearson, GroupMap, TopicSeries};

pub struct Trends {
    pub topics: Vec<TopicSeries>,
    pub groups: Vec<TopicSeries>,
    pub group_correlation: f64,
}

pub fn run_example() -> Result<Trends, Box<dyn Error>> {
    let beta = block_topics(4, 80, 0.9, 5);
    let docs = sample_documents(&SamplerConfig { alpha: vec![0.2; 4], xi: 30.0, seed: 6 }, &beta, 480)?;
    // Topic 0 gains weight over four years while the other topics recede.
    let thetas: Vec<Vec<f64>> = docs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let drift = i as f64 / docs.len() as f64;
            let mut t: Vec<f64> =
                d.theta.iter().enumerate().map(|(k, p)| if k == 0 { p + drift } else { *p }).collect();
            let s: f64 = t.iter().sum();
            t.iter_mut().for_each(|x| *x /= s);
            t
        })
        .collect();
    let months: Vec<Month> = (0..docs.len()).map(|i| Month::from_ym(2010, 1).offset((i / 10) as i32)).collect();

    let topics = all_topic_series(&thetas, &months)?;
    let map = GroupMap::from_pairs([(0, "rising"), (1, "rest"), (2, "rest"), (3, "rest")])?;
    let groups: Vec<TopicSeries> = map
        .labels()
        .into_iter()
        .map(|label| group_series(&thetas, &months, &map, label).and_then(|s| moving_average(&s, 5)))
        .collect::<Result<_, _>>()?;
    let group_correlation = pearson(&groups[0], &groups[1])?;
    Ok(Trends { topics, groups, group_correlation })
}

fn main() -> Result<(), Box<dyn Error>> {
    let t = run_example()?;
    for s in t.topics.iter().chain(&t.groups) {
        let pts: Vec<(_, f64)> = s.points().collect();
        let (first, last) = (pts.first().unwrap(), pts.last().unwrap());
        println!("{:<14} {} {:.3} -> {} {:.3}", s.id, first.0, first.1, last.0, last.1);
    }
    println!("pearson({}, {}) = {:.3}", t.groups[0].id, t.groups[1].id, t.group_correlation);
    Ok(())
}
