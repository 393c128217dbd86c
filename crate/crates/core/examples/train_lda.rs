//! Fit online LDA on a corpus sampled from known topics and measure how well they are recovered.
//!
//! ```text
//! cargo run --release --example train_lda -- [SEED]
//! ```

use std::error::Error;

use topic_resonance::lda::{fit_online, infer_corpus, sample_corpus, top_words, SamplerConfig};
use topic_resonance::synthetic::{best_permutation_cosine, block_topics};
use topic_resonance::textprep::VocabSignature;
use topic_resonance::{LdaConfig, TopicModel};

pub struct Trained {
    pub model: TopicModel,
    /// Mean cosine between true and recovered topics under the best matching.
    pub recovery: f64,
    pub matching: Vec<usize>,
    /// Fraction of documents whose dominant inferred topic is the matched dominant true topic.
    pub dominant_agreement: f64,
}

pub fn run_example(seed: u64) -> Result<Trained, Box<dyn Error>> {
    let k = 5;
    let beta = block_topics(k, 100, 0.9, seed);
    let sampler = SamplerConfig { alpha: vec![0.1; k], xi: 40.0, seed: seed + 1 };
    let (bows, truth) = sample_corpus(&sampler, &beta, 2000)?;
    let config = LdaConfig { num_topics: k, minibatch_size: 256, passes: 10, seed: seed + 2, ..LdaConfig::default() };
    let model = fit_online(&bows, &VocabSignature::synthetic(100), &config)?;

    let recovered: Vec<Vec<f64>> = (0..k).map(|t| model.topic_word(t)).collect();
    let (recovery, matching) = best_permutation_cosine(&beta, &recovered);
    let inferred = infer_corpus(&bows, &model)?;
    let agree = truth.iter().zip(&inferred).filter(|(t, i)| matching[t.argmax()] == i.argmax()).count();
    Ok(Trained { model, recovery, matching, dominant_agreement: agree as f64 / bows.len() as f64 })
}

fn main() -> Result<(), Box<dyn Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(11);
    let t = run_example(seed)?;
    println!("mean cosine to planted topics: {:.3}", t.recovery);
    println!("dominant topic agreement: {:.1}%", 100.0 * t.dominant_agreement);
    println!("alpha: {:?}", t.model.alpha());
    for (true_topic, &topic) in t.matching.iter().enumerate() {
        let words: Vec<String> = top_words(&t.model, topic, 6)?.iter().map(|(w, p)| format!("{w}:{p:.3}")).collect();
        println!("planted {true_topic} -> topic {topic}: {}", words.join(" "));
    }
    Ok(())
}
