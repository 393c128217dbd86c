//! Synthetic corpora for tests, examples and the bundled pipeline fixture.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Month, RawRecord};
use crate::lda::{sample_documents, LdaError, SamplerConfig};

/// K topics over V terms. Topic k puts `block_mass` of its probability on its own
/// contiguous block of `V / K` terms (randomly weighted) and spreads the rest uniformly.
pub fn block_topics(num_topics: usize, n_terms: usize, block_mass: f64, seed: u64) -> Vec<Vec<f64>> {
    assert!(num_topics >= 1 && n_terms >= num_topics);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = n_terms / num_topics;
    (0..num_topics)
        .map(|k| {
            let weights: Vec<f64> = (0..block).map(|_| rng.random_range(0.5..1.5)).collect();
            let wsum: f64 = weights.iter().sum();
            let mut row = vec![(1.0 - block_mass) / n_terms as f64; n_terms];
            for (i, w) in weights.iter().enumerate() {
                row[k * block + i] += block_mass * w / wsum;
            }
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= total);
            row
        })
        .collect()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Mean cosine similarity under the best one-to-one matching of recovered topics to
/// true topics, found by trying every permutation. `perm[i]` is the recovered topic
/// matched to true topic `i`. Intended for K up to about 8.
pub fn best_permutation_cosine(truth: &[Vec<f64>], recovered: &[Vec<f64>]) -> (f64, Vec<usize>) {
    assert_eq!(truth.len(), recovered.len());
    let k = truth.len();
    let sims: Vec<Vec<f64>> = truth.iter().map(|t| recovered.iter().map(|r| cosine(t, r)).collect()).collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for perm in permutations(k) {
        let score = perm.iter().enumerate().map(|(i, &j)| sims[i][j]).sum::<f64>() / k as f64;
        if score > best.0 {
            best = (score, perm);
        }
    }
    best
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Deterministic pronounceable token for term `i` (three consonant-vowel syllables).
pub fn pseudo_word(i: usize) -> String {
    let n_syl = CONSONANTS.len() * VOWELS.len();
    let mut s = String::with_capacity(6);
    let mut x = i;
    for _ in 0..3 {
        let syl = x % n_syl;
        x /= n_syl;
        s.push(CONSONANTS[syl / VOWELS.len()] as char);
        s.push(VOWELS[syl % VOWELS.len()] as char);
    }
    s
}

const VENUES: [&str; 4] = ["NeurIPS", "ICML", "JMLR", "AAAI"];

/// Author pool; each entry lists the spellings a name appears under.
const AUTHORS: [&[&str]; 12] = [
    &["BENGIO, YOSHUA", "Yoshua Bengio"],
    &["Smith, John", "J. Smith"],
    &["Garcia, Maria"],
    &["Li, Wei"],
    &["Müller, Jürgen", "Jurgen Muller"],
    &["Okafor, Ngozi"],
    &["Tanaka, Hiroshi"],
    &["Novak, Petra"],
    &["Haddad, Karim"],
    &["Silva, Ana"],
    &["Kowalski, Jan"],
    &["Nguyen, Thi"],
];

/// Bibliographic records drawn from a K=5 LDA sampler over 100 pseudo-words, spread over
/// 48 months starting 2001-01. A few records are deliberately broken: missing abstracts,
/// unparseable dates, season and year-only dates.
pub fn fixture_records(n_docs: usize, seed: u64) -> Result<Vec<RawRecord>, LdaError> {
    let k = 5;
    let beta = block_topics(k, 100, 0.9, seed);
    let docs =
        sample_documents(&SamplerConfig { alpha: vec![0.1; k], xi: 40.0, seed: seed.wrapping_add(1) }, &beta, n_docs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let seasons = ["Spring", "Summer", "Autumn", "Winter"];

    let mut out = Vec::with_capacity(n_docs);
    for (i, d) in docs.iter().enumerate() {
        let month = Month::from_ym(2001, 1).offset((i * 48 / n_docs.max(1)) as i32);
        let date_raw = match i % 37 {
            5 => format!("{} {}", seasons[i % 4], month.year()),
            11 => month.year().to_string(),
            23 => "in press".to_string(),
            _ => month.to_string(),
        };
        let words: Vec<String> = d.tokens.iter().map(|&t| pseudo_word(t as usize)).collect();
        let abstract_text = if i % 41 == 17 { None } else { Some(words.join(" ")) };
        let dominant = d.theta.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(t, _)| t).unwrap_or(0);
        let venue =
            if rng.random_bool(0.7) { VENUES[dominant % VENUES.len()] } else { *VENUES.choose(&mut rng).unwrap() };
        let n_auth = rng.random_range(1..=3);
        let mut authors: Vec<String> = Vec::new();
        while authors.len() < n_auth {
            let variants = AUTHORS.choose(&mut rng).unwrap();
            let name = variants.choose(&mut rng).unwrap().to_string();
            if !authors.contains(&name) {
                authors.push(name);
            }
        }
        out.push(RawRecord {
            id: format!("doc{i:04}"),
            title: format!("Synthetic paper {i}"),
            abstract_text,
            venue: venue.to_string(),
            authors,
            date_raw,
        });
    }
    Ok(out)
}

/// Write records as CSV with the default column names and `;`-separated authors.
pub fn write_records_csv<W: std::io::Write>(writer: W, records: &[RawRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "title", "abstract", "venue", "authors", "date"])?;
    for r in records {
        w.write_record([
            r.id.as_str(),
            r.title.as_str(),
            r.abstract_text.as_deref().unwrap_or(""),
            r.venue.as_str(),
            r.authors.join("; ").as_str(),
            r.date_raw.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_topics_are_distributions() {
        for row in block_topics(5, 100, 0.9, 1) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|p| *p > 0.0));
        }
    }

    #[test]
    fn permutation_matching_finds_shuffle() {
        let t = block_topics(4, 40, 0.9, 2);
        let shuffled = vec![t[2].clone(), t[0].clone(), t[3].clone(), t[1].clone()];
        let (score, perm) = best_permutation_cosine(&t, &shuffled);
        assert!((score - 1.0).abs() < 1e-12);
        assert_eq!(perm, vec![1, 3, 0, 2]);
        assert_eq!(permutations(5).len(), 120);
    }

    #[test]
    fn pseudo_words_are_distinct_tokens() {
        let tok = crate::textprep::Tokenizer::default();
        let words: Vec<String> = (0..100).map(pseudo_word).collect();
        let mut uniq = words.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 100);
        for w in &words {
            assert_eq!(tok.tokenize(w), vec![w.clone()]);
        }
    }
}
