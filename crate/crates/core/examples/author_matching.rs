//! Normalize author name variants, match two name lists and deduplicate a name list.
//!
//! ```text
//! cargo run --example author_matching
//! ```

use std::error::Error;

use topic_resonance::entities::{dedupe_names, match_names, name_similarity, normalize_name, Assignment};

pub const LEFT: [&str; 4] = ["BENGIO, YOSHUA", "Smith, John", "Müller, Jürgen", "Okafor, Ngozi"];
pub const RIGHT: [&str; 4] = ["Jurgen Muller", "Yoshua Bengio", "J. Smith", "Tanaka, Hiroshi"];

pub fn run_example() -> Result<(Assignment, Vec<usize>), Box<dyn Error>> {
    let left: Vec<Vec<String>> = LEFT.iter().map(|n| normalize_name(n)).collect::<Result<_, _>>()?;
    let right: Vec<Vec<String>> = RIGHT.iter().map(|n| normalize_name(n)).collect::<Result<_, _>>()?;
    let assignment = match_names(&left, &right, 0.75);
    let all: Vec<Vec<String>> = left.into_iter().chain(right).collect();
    Ok((assignment, dedupe_names(&all, 0.75)))
}

fn main() -> Result<(), Box<dyn Error>> {
    let (assignment, clusters) = run_example()?;
    for &(a, b, s) in &assignment.pairs {
        println!("{:<16} <-> {:<16} {s:.2}", LEFT[a], RIGHT[b]);
    }
    for &a in &assignment.unmatched_a {
        println!("{:<16} unmatched", LEFT[a]);
    }
    let names: Vec<&str> = LEFT.iter().chain(&RIGHT).copied().collect();
    println!("\nidentities:");
    for c in 0..=clusters.iter().copied().max().unwrap_or(0) {
        let members: Vec<&str> = names.iter().zip(&clusters).filter(|(_, k)| **k == c).map(|(n, _)| *n).collect();
        println!("  {c}: {}", members.join(" | "));
    }
    let sim = name_similarity(&normalize_name("J. Smith")?, &normalize_name("Smith, John")?);
    println!("\nsimilarity(J. Smith, Smith, John) = {sim}");
    Ok(())
}
