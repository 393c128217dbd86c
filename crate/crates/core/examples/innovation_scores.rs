//! Novelty, transience and resonance of documents against the surrounding months, and the
//! regression of resonance on novelty.
//!
//! ```text
//! cargo run --example innovation_scores -- [WINDOW_MONTHS]
//! ```

use std::error::Error;

use topic_resonance::corpus::Month;
use topic_resonance::innovation::{
    novelty_effectiveness, valid_points, InnovationScore, InnovationScorer, RegressionFit,
};

pub fn run_example(window: u32) -> Result<(Vec<InnovationScore>, RegressionFit), Box<dyn Error>> {
    // Three topics; the field shifts from topic 0 to topic 2 in month 24. doc_20_0 anticipates
    // the shift, doc_12_0 is a one-off that nobody follows.
    let mut thetas = Vec::new();
    let mut months = Vec::new();
    let mut ids = Vec::new();
    for m in 0..48 {
        for j in 0..3 {
            let base = if m < 24 { [0.8, 0.15, 0.05] } else { [0.1, 0.15, 0.75] };
            let wobble = 0.01 * ((m * 3 + j) % 5) as f64;
            let mut t = vec![base[0] - wobble, base[1] + wobble, base[2]];
            if j == 0 && m == 12 {
                t = vec![0.05, 0.9, 0.05];
            }
            if j == 0 && m == 20 {
                t = vec![0.1, 0.15, 0.75];
            }
            thetas.push(t);
            months.push(Month::from_ym(2000, 1).offset(m));
            ids.push(format!("doc_{m}_{j}"));
        }
    }
    let scores = InnovationScorer::new(&thetas, &months, 1e-10)?.score_all(&ids, window)?;
    let fit = novelty_effectiveness(&valid_points(&scores))?;
    Ok((scores, fit))
}

fn main() -> Result<(), Box<dyn Error>> {
    let window = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(6);
    let (scores, fit) = run_example(window)?;
    let valid = scores.iter().filter(|s| s.valid).count();
    println!("{valid} of {} documents have full {window}-month windows", scores.len());
    for id in ["doc_12_0", "doc_20_0", "doc_30_1"] {
        let s = scores.iter().find(|s| s.doc_id == id).unwrap();
        println!("{id}: novelty {:?} transience {:?} resonance {:?}", s.novelty, s.transience, s.resonance);
    }
    println!("resonance = {:.3} + {:.3} * novelty (n={})", fit.intercept, fit.slope, fit.n_points);
    Ok(())
}
