//! Seeded synthetic corpora for tests, benches, and the bundled example data.
//!
//! The generator lays out `block_count` dense citation communities of
//! `block_size` journals each, plus one hub journal that cites into and is
//! cited from every block. Each journal carries a heavy-tailed citing
//! productivity that scales all of its outgoing counts; the shared row
//! intensity keeps cross-block correlations near zero (so one factor per
//! block is recoverable) while raw cosines between blocks stay below the
//! usual edge threshold, leaving the hub as the only strong bridge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CitationCorpus, JournalRef};

/// Seed of the corpus bundled under `fixtures/`.
pub const BUNDLED_SEED: u64 = 2010;

/// Focal journal id used by the generator.
pub const FOCAL_ID: &str = "hub";

const BLOCK_NAMES: [&str; 8] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
];

fn block_name(index: usize) -> String {
    BLOCK_NAMES
        .get(index)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("blk{index}"))
}

fn title_case(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Log-uniform draw in `[lo, hi]`.
fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo * (hi / lo).powf(rng.random_range(0.0..1.0))
}

/// Deterministic block-structured corpus.
pub fn synthetic_corpus(block_count: usize, block_size: usize, seed: u64) -> CitationCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = CitationCorpus::new(format!(
        "synthetic-{block_count}x{block_size}-seed{seed}"
    ));

    corpus.upsert_journal(JournalRef {
        id: FOCAL_ID.to_owned(),
        name: "Hub Review".to_owned(),
        impact_factor: Some(3.0),
    });

    let mut block_ids: Vec<Vec<String>> = Vec::with_capacity(block_count);
    for b in 0..block_count {
        let name = block_name(b);
        let mut ids = Vec::with_capacity(block_size);
        for j in 1..=block_size {
            let id = format!("{name}-{j}");
            let impact = (rng.random_range(0.5f64..3.5) * 100.0).round() / 100.0;
            corpus.upsert_journal(JournalRef {
                id: id.clone(),
                name: format!("{} Journal {j}", title_case(&name)),
                impact_factor: Some(impact),
            });
            ids.push(id);
        }
        block_ids.push(ids);
    }

    let all_ids: Vec<String> = block_ids.iter().flatten().cloned().collect();
    let productivity: std::collections::BTreeMap<String, f64> = all_ids
        .iter()
        .map(|id| (id.clone(), log_uniform(&mut rng, 1.0, 8.0)))
        .collect();
    let productivity_of = |id: &str| productivity[id];

    // Compose counts in a map first: later passes never override earlier ones.
    let mut records: std::collections::BTreeMap<(String, String), u64> = Default::default();
    let add = |records: &mut std::collections::BTreeMap<(String, String), u64>,
               citing: &str,
               cited: &str,
               count: u64| {
        records
            .entry((citing.to_owned(), cited.to_owned()))
            .or_insert(count);
    };

    // Hub flows: every block journal both imports from and exports to the hub.
    for ids in &block_ids {
        for id in ids {
            let outgoing = rng.random_range(2..=4);
            let incoming = rng.random_range(2..=4);
            add(&mut records, FOCAL_ID, id, outgoing);
            add(&mut records, id, FOCAL_ID, incoming);
        }
    }

    // Dense within-block citation traffic with heavy-tailed counts.
    for ids in &block_ids {
        for citing in ids {
            let intensity = productivity_of(citing);
            for cited in ids {
                if citing == cited {
                    continue;
                }
                let hit = rng.random_bool(0.95);
                let count = (intensity * log_uniform(&mut rng, 2.0, 12.0)).round().max(2.0);
                if hit {
                    add(&mut records, citing, cited, count as u64);
                }
            }
        }
    }

    // Sparse background noise, scaled by the citing journal's productivity.
    for citing in &all_ids {
        let intensity = productivity_of(citing);
        for cited in &all_ids {
            if citing == cited {
                continue;
            }
            let hit = rng.random_bool(0.2);
            let count = (intensity * log_uniform(&mut rng, 0.5, 1.5)).round().max(1.0);
            if hit {
                add(&mut records, citing, cited, count as u64);
            }
        }
    }

    // Occasional self-citation to exercise the diagonal.
    for ids in &block_ids {
        for id in ids {
            let hit = rng.random_bool(0.3);
            let count = rng.random_range(1..=5);
            if hit {
                add(&mut records, id, id, count);
            }
        }
    }

    for ((citing, cited), count) in records {
        corpus.insert_record(&citing, &cited, count).unwrap();
    }
    corpus
}

/// The corpus shipped under `fixtures/`: three 9-journal blocks plus the hub.
pub fn bundled_corpus() -> CitationCorpus {
    let mut corpus = synthetic_corpus(3, 9, BUNDLED_SEED);
    corpus.set_label("bundled".to_owned());
    corpus
}
