//! Author name normalization and fuzzy deduplication, and aggregation of innovation scores
//! per author or venue.
//!
//! Names are compared as sorted multisets of segments. Similarity is
//! `(exact + 0.5 · initial) / max(|A|, |B|)`, where `exact` counts shared segments and
//! `initial` counts single letters in one name that pair with a longer segment of the other
//! starting with that letter. Variants are merged by solving a linear assignment problem on
//! `1 - similarity` and keeping assigned pairs at or above the threshold.
//!
//! A multi-author paper counts in full for each of its authors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::Document;
use crate::innovation::{ols, zscore, InnovationError, InnovationScore};

pub const DEFAULT_THRESHOLD: f64 = 0.75;
pub const DEFAULT_TOP_AUTHORS: usize = 1000;

/// Cost given to forbidden cells of an assignment problem; far above any `1 - similarity`.
const FORBIDDEN: f64 = 1e6;

#[derive(Debug, Error)]
pub enum EntityError {
    #[error("name `{0}` is empty after normalization")]
    EmptyName(String),
    #[error("{scores} scores for {docs} documents")]
    LengthMismatch { scores: usize, docs: usize },
    #[error("score {index} belongs to `{found}`, expected `{expected}`")]
    MisalignedScores { index: usize, expected: String, found: String },
    #[error("entity population too small: {0}")]
    Population(#[from] InnovationError),
}

/// Sorted, lowercased, diacritic-free name segments. `"Surname, Given"` is read as
/// `"Given Surname"`.
pub fn normalize_name(raw: &str) -> Result<Vec<String>, EntityError> {
    let ordered = match raw.split_once(',') {
        Some((surname, given)) => format!("{given} {surname}"),
        None => raw.to_string(),
    };
    let folded: String = ordered.nfd().filter(|c| !is_combining_mark(*c)).collect::<String>().to_lowercase();
    let mut segments: Vec<String> =
        folded.split(|c: char| !c.is_alphanumeric()).filter(|s| !s.is_empty()).map(str::to_string).collect();
    if segments.is_empty() {
        return Err(EntityError::EmptyName(raw.to_string()));
    }
    segments.sort();
    Ok(segments)
}

/// A deduplicated identity and the spellings it was seen under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalName {
    pub variants: BTreeSet<String>,
    pub segments: Vec<String>,
    pub display: String,
}

fn is_initial(s: &str) -> bool {
    s.chars().count() == 1
}

fn first_char(s: &str) -> char {
    s.chars().next().expect("segments are non-empty")
}

/// Symmetric score in `[0, 1]`; 1 for identical segment multisets.
pub fn name_similarity(a: &[String], b: &[String]) -> f64 {
    let denom = a.len().max(b.len());
    if denom == 0 {
        return 0.0;
    }
    let mut rest_b: Vec<&str> = b.iter().map(String::as_str).collect();
    let mut rest_a: Vec<&str> = Vec::new();
    let mut exact = 0usize;
    for s in a {
        match rest_b.iter().position(|t| t == s) {
            Some(i) => {
                rest_b.swap_remove(i);
                exact += 1;
            }
            None => rest_a.push(s),
        }
    }
    let tally = |segs: &[&str]| {
        let mut initials: BTreeMap<char, usize> = BTreeMap::new();
        let mut full: BTreeMap<char, usize> = BTreeMap::new();
        for s in segs {
            let map = if is_initial(s) { &mut initials } else { &mut full };
            *map.entry(first_char(s)).or_default() += 1;
        }
        (initials, full)
    };
    let (ia, fa) = tally(&rest_a);
    let (ib, fb) = tally(&rest_b);
    let pair = |i: &BTreeMap<char, usize>, f: &BTreeMap<char, usize>| -> usize {
        i.iter().map(|(c, n)| (*n).min(f.get(c).copied().unwrap_or(0))).sum()
    };
    let initial = pair(&ia, &fb) + pair(&ib, &fa);
    (exact as f64 + 0.5 * initial as f64) / denom as f64
}

/// Minimum-cost assignment of rows to distinct columns. Every row is assigned when there are
/// at least as many columns as rows, and every column otherwise. Returns the column of each
/// row and the total cost. Shortest augmenting path with potentials, `O(n² m)`.
pub fn solve_lap(cost: &[Vec<f64>]) -> (Vec<Option<usize>>, f64) {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return (vec![None; rows], 0.0);
    }
    if rows > cols {
        let transposed: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| cost[i][j]).collect()).collect();
        let (col_to_row, total) = solve_lap(&transposed);
        let mut out = vec![None; rows];
        for (j, i) in col_to_row.iter().enumerate() {
            if let Some(i) = i {
                out[*i] = Some(j);
            }
        }
        return (out, total);
    }
    let (n, m) = (rows, cols);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    let mut total = 0.0;
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
            total += cost[p[j] - 1][j - 1];
        }
    }
    (out, total)
}

/// Accepted pairs `(a, b, similarity)` and the indices left unmatched on each side.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_a: Vec<usize>,
    pub unmatched_b: Vec<usize>,
}

fn similarity_matrix(a: &[Vec<String>], b: &[Vec<String>]) -> Vec<Vec<f64>> {
    a.par_iter().map(|x| b.iter().map(|y| name_similarity(x, y)).collect()).collect()
}

fn assign(sim: &[Vec<f64>], n_b: usize, threshold: f64, forbid_diagonal: bool) -> Assignment {
    let cost: Vec<Vec<f64>> = sim
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter().enumerate().map(|(j, s)| if forbid_diagonal && i == j { FORBIDDEN } else { 1.0 - s }).collect()
        })
        .collect();
    let (cols, _) = solve_lap(&cost);
    let mut out = Assignment::default();
    let mut used_b = vec![false; n_b];
    for (i, c) in cols.iter().enumerate() {
        match c {
            Some(j) if !(forbid_diagonal && i == *j) && sim[i][*j] >= threshold => {
                used_b[*j] = true;
                out.pairs.push((i, *j, sim[i][*j]));
            }
            _ => out.unmatched_a.push(i),
        }
    }
    out.unmatched_b = (0..n_b).filter(|j| !used_b[*j]).collect();
    out
}

/// Match two name lists one-to-one, rejecting assigned pairs below `threshold`.
pub fn match_names(a: &[Vec<String>], b: &[Vec<String>], threshold: f64) -> Assignment {
    assign(&similarity_matrix(a, b), b.len(), threshold, false)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Cluster id for each name. Identical segment lists always share a cluster; distinct ones
/// are linked through a self-assignment with the diagonal forbidden. Cluster ids follow
/// first appearance.
pub fn dedupe_names(names: &[Vec<String>], threshold: f64) -> Vec<usize> {
    let mut keys: Vec<&Vec<String>> = Vec::new();
    let mut key_of: Vec<usize> = Vec::with_capacity(names.len());
    let mut index: HashMap<&Vec<String>, usize> = HashMap::new();
    for n in names {
        let k = *index.entry(n).or_insert_with(|| {
            keys.push(n);
            keys.len() - 1
        });
        key_of.push(k);
    }
    let distinct: Vec<Vec<String>> = keys.iter().map(|k| (*k).clone()).collect();
    let mut parent: Vec<usize> = (0..distinct.len()).collect();
    if distinct.len() > 1 {
        let sim = similarity_matrix(&distinct, &distinct);
        for (i, j, _) in assign(&sim, distinct.len(), threshold, true).pairs {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut cluster_of_root: HashMap<usize, usize> = HashMap::new();
    key_of
        .iter()
        .map(|&k| {
            let root = find(&mut parent, k);
            let next = cluster_of_root.len();
            *cluster_of_root.entry(root).or_insert(next)
        })
        .collect()
}

/// Names whose count is at least the count of the `n`-th most frequent, so ties at the
/// cutoff are all kept. Sorted by count descending, then name.
pub fn top_n_with_ties(counts: &BTreeMap<String, usize>, n: usize) -> Vec<(String, usize)> {
    let mut sorted: Vec<(String, usize)> = counts.iter().map(|(k, v)| (k.clone(), *v)).collect();
    sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if n == 0 {
        return Vec::new();
    }
    if let Some(&(_, cutoff)) = sorted.get(n - 1) {
        sorted.retain(|(_, c)| *c >= cutoff);
    }
    sorted
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Author,
    Venue,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Author => "author",
            EntityKind::Venue => "venue",
        })
    }
}

/// Selected entities and, for every document, the entities it is attributed to.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityGroups {
    pub kind: EntityKind,
    pub names: Vec<String>,
    pub members: Vec<Vec<usize>>,
}

/// Result of selecting and deduplicating frequent authors.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthorResolution {
    /// Raw spellings selected by publication count, ties at the cutoff included.
    pub selected: usize,
    pub identities: Vec<CanonicalName>,
    pub groups: EntityGroups,
}

/// Pick the `top_n` most published author spellings (keeping ties), merge variants, and
/// attribute every document to each identity among its authors.
pub fn resolve_authors(docs: &[Document], top_n: usize, threshold: f64) -> AuthorResolution {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for d in docs {
        let unique: BTreeSet<&str> = d.authors.iter().map(|a| a.trim()).filter(|a| !a.is_empty()).collect();
        for a in unique {
            *counts.entry(a.to_string()).or_default() += 1;
        }
    }
    let selected: Vec<(String, usize)> = top_n_with_ties(&counts, top_n)
        .into_iter()
        .filter(|(name, _)| match normalize_name(name) {
            Ok(_) => true,
            Err(e) => {
                log::warn!("skipping author: {e}");
                false
            }
        })
        .collect();
    let segments: Vec<Vec<String>> = selected.iter().map(|(n, _)| normalize_name(n).expect("checked above")).collect();
    let cluster = dedupe_names(&segments, threshold);
    let n_clusters = cluster.iter().copied().max().map_or(0, |c| c + 1);

    let mut identities =
        vec![CanonicalName { variants: BTreeSet::new(), segments: Vec::new(), display: String::new() }; n_clusters];
    let mut best: Vec<(usize, String)> = vec![(0, String::new()); n_clusters];
    let mut lookup: HashMap<&str, usize> = HashMap::new();
    for (((name, count), segs), &c) in selected.iter().zip(&segments).zip(&cluster) {
        let id = &mut identities[c];
        id.variants.insert(name.clone());
        let (best_count, best_name) = &best[c];
        if *count > *best_count || (*count == *best_count && name < best_name) {
            best[c] = (*count, name.clone());
            id.segments = segs.clone();
        }
        lookup.insert(name.as_str(), c);
    }
    for (id, (_, name)) in identities.iter_mut().zip(best) {
        id.display = name;
    }
    let members = docs
        .iter()
        .map(|d| {
            let ids: BTreeSet<usize> = d.authors.iter().filter_map(|a| lookup.get(a.trim()).copied()).collect();
            ids.into_iter().collect()
        })
        .collect();
    let names = identities.iter().map(|i| i.display.clone()).collect();
    AuthorResolution {
        selected: selected.len(),
        identities,
        groups: EntityGroups { kind: EntityKind::Author, names, members },
    }
}

/// Venues by verbatim name; `top_n` keeps the most frequent ones, ties included.
pub fn venue_groups(docs: &[Document], top_n: Option<usize>) -> EntityGroups {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for d in docs.iter().filter(|d| !d.venue.is_empty()) {
        *counts.entry(d.venue.clone()).or_default() += 1;
    }
    let mut names: Vec<String> = match top_n {
        Some(n) => top_n_with_ties(&counts, n).into_iter().map(|(k, _)| k).collect(),
        None => counts.keys().cloned().collect(),
    };
    names.sort();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let members = docs.iter().map(|d| index.get(d.venue.as_str()).map(|&i| vec![i]).unwrap_or_default()).collect();
    EntityGroups { kind: EntityKind::Venue, names, members }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityProfile {
    pub name: String,
    pub kind: EntityKind,
    /// Documents attributed to the entity.
    pub n_publications: usize,
    /// Attributed documents with valid scores.
    pub n_docs: usize,
    pub mean_novelty: f64,
    pub mean_resonance: f64,
    pub z_novelty: f64,
    pub z_resonance: f64,
    pub delta_z: f64,
}

/// Per-entity mean novelty and resonance over valid documents, z-scored within the entity
/// population, with `Δz` from the regression of `z(R)` on `z(N)`. Entities without valid
/// documents are dropped. Output follows `groups.names` order.
pub fn aggregate(
    groups: &EntityGroups,
    docs: &[Document],
    scores: &[InnovationScore],
) -> Result<Vec<EntityProfile>, EntityError> {
    if scores.len() != docs.len() || groups.members.len() != docs.len() {
        return Err(EntityError::LengthMismatch { scores: scores.len(), docs: docs.len() });
    }
    if let Some((i, (d, s))) = docs.iter().zip(scores).enumerate().find(|(_, (d, s))| d.id != s.doc_id) {
        return Err(EntityError::MisalignedScores { index: i, expected: d.id.clone(), found: s.doc_id.clone() });
    }
    let n = groups.names.len();
    let mut publications = vec![0usize; n];
    let mut valid = vec![0usize; n];
    let mut sum_n = vec![0.0; n];
    let mut sum_r = vec![0.0; n];
    for (members, s) in groups.members.iter().zip(scores) {
        for &e in members {
            publications[e] += 1;
            if let (true, Some(nv), Some(rv)) = (s.valid, s.novelty, s.resonance) {
                valid[e] += 1;
                sum_n[e] += nv;
                sum_r[e] += rv;
            }
        }
    }
    let kept: Vec<usize> = (0..n)
        .filter(|&e| {
            if valid[e] == 0 {
                log::warn!("{} `{}` has no validly scored documents; excluded", groups.kind, groups.names[e]);
            }
            valid[e] > 0
        })
        .collect();
    let mean_n: Vec<f64> = kept.iter().map(|&e| sum_n[e] / valid[e] as f64).collect();
    let mean_r: Vec<f64> = kept.iter().map(|&e| sum_r[e] / valid[e] as f64).collect();
    let zn = zscore(&mean_n)?;
    let zr = zscore(&mean_r)?;
    let fit = ols(&zn, &zr)?;
    Ok(kept
        .iter()
        .enumerate()
        .map(|(i, &e)| EntityProfile {
            name: groups.names[e].clone(),
            kind: groups.kind,
            n_publications: publications[e],
            n_docs: valid[e],
            mean_novelty: mean_n[i],
            mean_resonance: mean_r[i],
            z_novelty: zn[i],
            z_resonance: zr[i],
            delta_z: zr[i] - fit.predict(zn[i]),
        })
        .collect())
}

/// Profiles sorted by `Δz` descending, ties by name.
pub fn rank_by_delta_z(profiles: &[EntityProfile]) -> Vec<EntityProfile> {
    let mut out = profiles.to_vec();
    out.sort_by(|a, b| b.delta_z.total_cmp(&a.delta_z).then_with(|| a.name.cmp(&b.name)));
    out
}

/// CSV with columns `name, kind, n_publications, n_docs, mean_novelty, mean_resonance,
/// z_novelty, z_resonance, delta_z`, in the given order.
pub fn write_rankings_csv<W: Write>(writer: W, profiles: &[EntityProfile]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "name",
        "kind",
        "n_publications",
        "n_docs",
        "mean_novelty",
        "mean_resonance",
        "z_novelty",
        "z_resonance",
        "delta_z",
    ])?;
    for p in profiles {
        w.write_record([
            p.name.clone(),
            p.kind.to_string(),
            p.n_publications.to_string(),
            p.n_docs.to_string(),
            p.mean_novelty.to_string(),
            p.mean_resonance.to_string(),
            p.z_novelty.to_string(),
            p.z_resonance.to_string(),
            p.delta_z.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadrantSpec {
    /// Entities taken from each end of the `z(N)` ranking.
    pub novelty_n: usize,
    /// Entities taken from each end of the `z(R)` ranking within each novelty slice.
    pub resonance_n: usize,
}

impl Default for QuadrantSpec {
    fn default() -> Self {
        QuadrantSpec { novelty_n: 100, resonance_n: 5 }
    }
}

/// `(quadrant label, profile)` rows: high/low novelty slices, each split into its highest
/// and lowest resonance entries.
pub fn quadrants(profiles: &[EntityProfile], spec: &QuadrantSpec) -> Vec<(&'static str, EntityProfile)> {
    let mut by_n = profiles.to_vec();
    by_n.sort_by(|a, b| b.z_novelty.total_cmp(&a.z_novelty).then_with(|| a.name.cmp(&b.name)));
    let take = spec.novelty_n.min(by_n.len());
    let high: Vec<EntityProfile> = by_n[..take].to_vec();
    let low: Vec<EntityProfile> = by_n[by_n.len() - take..].iter().rev().cloned().collect();
    let mut out = Vec::new();
    for (slice, hi_label, lo_label) in [
        (high, "high_novelty_high_resonance", "high_novelty_low_resonance"),
        (low, "low_novelty_high_resonance", "low_novelty_low_resonance"),
    ] {
        let mut by_r = slice;
        by_r.sort_by(|a, b| b.z_resonance.total_cmp(&a.z_resonance).then_with(|| a.name.cmp(&b.name)));
        let k = spec.resonance_n.min(by_r.len());
        out.extend(by_r[..k].iter().cloned().map(|p| (hi_label, p)));
        out.extend(by_r[by_r.len() - k..].iter().rev().cloned().map(|p| (lo_label, p)));
    }
    out
}

/// CSV with columns `quadrant, name, z_novelty, z_resonance, delta_z`.
pub fn write_quadrants_csv<W: Write>(writer: W, rows: &[(&str, EntityProfile)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["quadrant", "name", "z_novelty", "z_resonance", "delta_z"])?;
    for (q, p) in rows {
        w.write_record([
            q.to_string(),
            p.name.clone(),
            p.z_novelty.to_string(),
            p.z_resonance.to_string(),
            p.delta_z.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Month;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn segs(raw: &str) -> Vec<String> {
        normalize_name(raw).unwrap()
    }

    #[test]
    fn normalization() {
        assert_eq!(segs("BENGIO, YOSHUA"), vec!["bengio", "yoshua"]);
        assert_eq!(segs("Yoshua Bengio"), segs("BENGIO, YOSHUA"));
        assert_eq!(segs("J. Smith"), vec!["j", "smith"]);
        assert_eq!(segs("Müller, Jürgen"), segs("Jurgen Muller"));
        assert_eq!(segs("Jean-Luc  Picard"), vec!["jean", "luc", "picard"]);
        assert!(matches!(normalize_name(" ,. "), Err(EntityError::EmptyName(_))));
    }

    #[test]
    fn similarity_fixtures() {
        let bengio = name_similarity(&segs("BENGIO, YOSHUA"), &segs("Yoshua Bengio"));
        assert_eq!(bengio, 1.0);
        assert!(name_similarity(&segs("Li, Wei"), &segs("Garcia, Maria")) <= 0.2);
        assert!(name_similarity(&segs("J. Smith"), &segs("John Smith")) >= DEFAULT_THRESHOLD);
        assert!(name_similarity(&segs("J. Smith"), &segs("Jane Doe")) < DEFAULT_THRESHOLD);
        assert!(name_similarity(&segs("Wei Li"), &segs("Wei Zhang")) < DEFAULT_THRESHOLD);
        // initial handling is symmetric: {j, smith} vs {john, smith} = (1 + 0.5) / 2
        assert_eq!(name_similarity(&segs("John Smith"), &segs("J. Smith")), 0.75);
    }

    fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
        let (r, c) = (cost.len(), cost[0].len());
        let (small, large) = (r.min(c), r.max(c));
        let at = |i: usize, j: usize| if r <= c { cost[i][j] } else { cost[j][i] };
        let mut best = f64::INFINITY;
        fn go(
            i: usize,
            small: usize,
            large: usize,
            used: &mut Vec<bool>,
            acc: f64,
            best: &mut f64,
            at: &dyn Fn(usize, usize) -> f64,
        ) {
            if i == small {
                *best = best.min(acc);
                return;
            }
            for j in 0..large {
                if !used[j] {
                    used[j] = true;
                    go(i + 1, small, large, used, acc + at(i, j), best, at);
                    used[j] = false;
                }
            }
        }
        go(0, small, large, &mut vec![false; large], 0.0, &mut best, &at);
        best
    }

    #[test]
    fn lap_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let r = rng.random_range(1..=7);
            let c = rng.random_range(1..=7);
            let cost: Vec<Vec<f64>> = (0..r).map(|_| (0..c).map(|_| rng.random::<f64>()).collect()).collect();
            let (assign, total) = solve_lap(&cost);
            assert!((total - brute_force_min(&cost)).abs() < 1e-12);
            let cols: BTreeSet<usize> = assign.iter().flatten().copied().collect();
            assert_eq!(cols.len(), r.min(c));
            assert_eq!(assign.iter().flatten().count(), r.min(c));
        }
    }

    #[test]
    fn matching_rejects_weak_pairs() {
        let a = vec![segs("Li, Wei")];
        let b = vec![segs("Garcia, Maria")];
        let m = match_names(&a, &b, DEFAULT_THRESHOLD);
        assert!(m.pairs.is_empty());
        assert_eq!((m.unmatched_a, m.unmatched_b), (vec![0], vec![0]));

        let a = vec![segs("J. Smith"), segs("Ana Silva")];
        let b = vec![segs("Silva, Ana"), segs("Okafor, Ngozi"), segs("Smith, John")];
        let m = match_names(&a, &b, DEFAULT_THRESHOLD);
        assert_eq!(m.pairs, vec![(0, 2, 0.75), (1, 0, 1.0)]);
        assert_eq!(m.unmatched_b, vec![1]);
    }

    #[test]
    fn dedupe_clusters_variants() {
        let raw = ["BENGIO, YOSHUA", "Garcia, Maria", "Yoshua Bengio", "J. Smith", "Smith, John", "Li, Wei"];
        let names: Vec<Vec<String>> = raw.iter().map(|r| segs(r)).collect();
        assert_eq!(dedupe_names(&names, DEFAULT_THRESHOLD), vec![0, 1, 0, 2, 2, 3]);
    }

    #[test]
    fn ties_at_cutoff_are_kept() {
        let counts: BTreeMap<String, usize> =
            [("a", 5), ("b", 3), ("c", 3), ("d", 3), ("e", 1)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let top = top_n_with_ties(&counts, 2);
        assert_eq!(top.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>(), vec!["a", "b", "c", "d"]);
        assert_eq!(top_n_with_ties(&counts, 10).len(), 5);
    }

    fn doc(id: &str, venue: &str, authors: &[&str]) -> Document {
        Document {
            id: id.into(),
            tokens: vec![],
            month: Month(0),
            venue: venue.into(),
            authors: authors.iter().map(|a| a.to_string()).collect(),
        }
    }

    fn score(id: &str, n: f64, r: f64, valid: bool) -> InnovationScore {
        InnovationScore {
            doc_id: id.into(),
            month: Month(0),
            window_months: 12,
            novelty: valid.then_some(n),
            transience: valid.then_some(n - r),
            resonance: valid.then_some(r),
            valid,
        }
    }

    #[test]
    fn author_resolution_and_aggregation() {
        let docs = vec![
            doc("0", "A", &["BENGIO, YOSHUA", "Li, Wei"]),
            doc("1", "A", &["Yoshua Bengio"]),
            doc("2", "B", &["Li, Wei", "Garcia, Maria"]),
            doc("3", "C", &["Garcia, Maria", "Yoshua Bengio"]),
            doc("4", "C", &["Okafor, Ngozi"]),
        ];
        let scores = vec![
            score("0", 1.0, 0.2, true),
            score("1", 2.0, 0.4, true),
            score("2", 0.5, -0.1, true),
            score("3", 1.5, 0.3, true),
            score("4", 9.0, 9.0, false),
        ];
        let res = resolve_authors(&docs, 4, DEFAULT_THRESHOLD);
        assert_eq!(res.selected, 5);
        assert_eq!(res.identities.len(), 4);
        let bengio = res.groups.names.iter().position(|n| n == "Yoshua Bengio").unwrap();
        assert_eq!(res.identities[bengio].variants.len(), 2);
        assert_eq!(res.groups.members[0].len(), 2);
        assert_eq!(res.groups.members[4].len(), 1);

        // the only paper by Okafor has no valid score, so three profiles remain
        let profiles = aggregate(&res.groups, &docs, &scores).unwrap();
        assert_eq!(profiles.len(), 3);
        let b = profiles.iter().find(|p| p.name == "Yoshua Bengio").unwrap();
        assert_eq!((b.n_publications, b.n_docs), (3, 3));
        assert!((b.mean_novelty - 1.5).abs() < 1e-12);
        let mean_dz = profiles.iter().map(|p| p.delta_z).sum::<f64>() / profiles.len() as f64;
        assert!(mean_dz.abs() < 1e-9);

        let venues = aggregate(&venue_groups(&docs, None), &docs, &scores).unwrap();
        assert_eq!(venues.iter().map(|p| p.name.as_str()).collect::<Vec<_>>(), vec!["A", "B", "C"]);
        assert_eq!(venues[2].n_publications, 2);
        assert_eq!(venues[2].n_docs, 1);
    }

    #[test]
    fn weighted_entity_means_recover_document_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let venues = ["a", "b", "c", "d"];
        let docs: Vec<Document> = (0..200).map(|i| doc(&i.to_string(), venues[rng.random_range(0..4)], &[])).collect();
        let scores: Vec<InnovationScore> =
            (0..200).map(|i| score(&i.to_string(), rng.random(), rng.random(), i % 7 != 0)).collect();
        let profiles = aggregate(&venue_groups(&docs, None), &docs, &scores).unwrap();
        let total: usize = profiles.iter().map(|p| p.n_docs).sum();
        let weighted = profiles.iter().map(|p| p.mean_novelty * p.n_docs as f64).sum::<f64>() / total as f64;
        let valid: Vec<f64> = scores.iter().filter(|s| s.valid).map(|s| s.novelty.unwrap()).collect();
        assert!((weighted - valid.iter().sum::<f64>() / valid.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn single_entity_population_is_an_error() {
        let docs = vec![doc("0", "A", &[]), doc("1", "A", &[])];
        let scores = vec![score("0", 1.0, 0.5, true), score("1", 2.0, 0.5, true)];
        assert!(matches!(aggregate(&venue_groups(&docs, None), &docs, &scores), Err(EntityError::Population(_))));
    }

    #[test]
    fn quadrant_selection() {
        let profiles: Vec<EntityProfile> = (0..10)
            .map(|i| EntityProfile {
                name: format!("e{i}"),
                kind: EntityKind::Author,
                n_publications: 1,
                n_docs: 1,
                mean_novelty: 0.0,
                mean_resonance: 0.0,
                z_novelty: i as f64,
                z_resonance: ((i * 7) % 10) as f64,
                delta_z: 0.0,
            })
            .collect();
        let rows = quadrants(&profiles, &QuadrantSpec { novelty_n: 4, resonance_n: 1 });
        let got: Vec<(&str, &str)> = rows.iter().map(|(q, p)| (*q, p.name.as_str())).collect();
        assert_eq!(
            got,
            vec![
                ("high_novelty_high_resonance", "e7"),
                ("high_novelty_low_resonance", "e6"),
                ("low_novelty_high_resonance", "e1"),
                ("low_novelty_low_resonance", "e0"),
            ]
        );
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(raw in "[A-Za-zÀ-ÿ ,.'-]{1,30}") {
            if let Ok(s) = normalize_name(&raw) {
                prop_assert_eq!(normalize_name(&s.join(" ")).unwrap(), s);
            }
        }

        #[test]
        fn similarity_symmetric_and_reflexive(a in "[a-d]{1,4}( [a-d]{1,4}){0,3}", b in "[a-d]{1,4}( [a-d]{1,4}){0,3}") {
            let (x, y) = (segs(&a), segs(&b));
            prop_assert_eq!(name_similarity(&x, &y), name_similarity(&y, &x));
            prop_assert_eq!(name_similarity(&x, &x), 1.0);
            prop_assert!((0.0..=1.0).contains(&name_similarity(&x, &y)));
        }
    }
}
