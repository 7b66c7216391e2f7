//! Seeded synthetic folksonomies with a power-law tag distribution and
//! planted synonym groups.
//!
//! Resources are grouped into topics. Each topic owns a slice of the
//! vocabulary, organised into concepts: a concept is a single tag or a
//! synonym group of interchangeable tags. A resource carries a few of its
//! topic's concepts; a bookmark picks some of them and renders each as a
//! tag, choosing a synonym by the user's standing preference. A small set
//! of general tags is shared by all topics.

use std::collections::HashMap;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::index::sample_weighted;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Folksonomy;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_users: usize,
    pub n_resources: usize,
    /// Vocabulary size, general tags included.
    pub n_tags: usize,
    /// Exponent of the discrete power law behind tag weights.
    pub tag_popularity_exponent: f64,
    /// Inclusive range of concepts rendered per bookmark.
    pub tags_per_bookmark: (usize, usize),
    /// Number of planted groups of interchangeable tags.
    pub synonym_groups: usize,
    pub synonym_group_size: usize,
    pub n_bookmarks: usize,
    /// Resources per topic.
    pub topic_size: usize,
    pub concepts_per_resource: usize,
    pub n_general_tags: usize,
    /// Chance that a bookmark also carries its topic's general tag.
    pub general_tag_prob: f64,
    /// Zipf exponent of resource popularity; 0 is uniform.
    pub resource_popularity_exponent: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_users: 600,
            n_resources: 3_000,
            n_tags: 2_000,
            tag_popularity_exponent: 2.0,
            tags_per_bookmark: (1, 2),
            synonym_groups: 300,
            synonym_group_size: 2,
            n_bookmarks: 4_000,
            topic_size: 15,
            concepts_per_resource: 8,
            n_general_tags: 30,
            general_tag_prob: 0.1,
            resource_popularity_exponent: 0.0,
            seed: 7,
        }
    }
}

const WEIGHT_CAP: u64 = 1_000;

impl SynthSpec {
    pub fn n_topics(&self) -> usize {
        self.n_resources.div_ceil(self.topic_size.max(1))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InfeasibleSpec(msg));
        let (lo, hi) = self.tags_per_bookmark;
        if self.n_users == 0 || self.n_resources == 0 || self.n_tags == 0 || self.n_bookmarks == 0 {
            return fail("users, resources, tags and bookmarks must all be positive".into());
        }
        if self.tag_popularity_exponent.is_nan() || self.tag_popularity_exponent <= 1.0 {
            return fail(format!(
                "tag_popularity_exponent must exceed 1, got {}",
                self.tag_popularity_exponent
            ));
        }
        if lo == 0 || lo > hi {
            return fail(format!(
                "tags_per_bookmark range {lo}..={hi} is empty or starts at 0"
            ));
        }
        if hi > self.n_tags {
            return fail(format!(
                "tags_per_bookmark max {hi} exceeds n_tags {}",
                self.n_tags
            ));
        }
        if self.synonym_group_size < 2 {
            return fail("synonym_group_size must be at least 2".into());
        }
        if self.synonym_groups > self.n_tags / 2 {
            return fail(format!(
                "synonym_groups {} exceeds n_tags / 2 = {}",
                self.synonym_groups,
                self.n_tags / 2
            ));
        }
        if self.topic_size == 0 || self.concepts_per_resource == 0 {
            return fail("topic_size and concepts_per_resource must be positive".into());
        }
        let topic_tags = self.n_tags.saturating_sub(self.n_general_tags);
        if topic_tags < self.n_topics() {
            return fail(format!(
                "{} topic tags cannot cover {} topics",
                topic_tags,
                self.n_topics()
            ));
        }
        if self.synonym_groups * self.synonym_group_size > topic_tags {
            return fail("synonym groups need more tags than the topics own".into());
        }
        if self.general_tag_prob > 0.0 && self.n_general_tags == 0 {
            return fail("general_tag_prob > 0 needs general tags".into());
        }
        if !(0.0..=1.0).contains(&self.general_tag_prob) || self.resource_popularity_exponent < 0.0
        {
            return fail("general_tag_prob must lie in [0,1], popularity exponent >= 0".into());
        }
        Ok(())
    }
}

/// Weighted sampler over `1..=WEIGHT_CAP` with `P(w) ~ w^-alpha`.
fn power_law(alpha: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=WEIGHT_CAP).map(|w| (w as f64).powf(-alpha))).expect("positive weights")
}

/// A concept: one tag or a synonym group, with its sampling weight.
struct Concept {
    tags: Vec<usize>,
    weight: f64,
}

pub fn generate_synthetic(spec: &SynthSpec) -> Result<Folksonomy> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights = power_law(spec.tag_popularity_exponent);
    let draw_weight = |rng: &mut ChaCha8Rng| (weights.sample(rng) + 1) as f64;

    let n_topics = spec.n_topics();
    let n_topic_tags = spec.n_tags - spec.n_general_tags;

    // Synonym groups take the first tag ids; the rest are single-tag
    // concepts. Concepts are dealt to topics round-robin after a shuffle.
    let mut concepts = Vec::new();
    let mut next = 0;
    for _ in 0..spec.synonym_groups {
        concepts.push(Concept {
            tags: (next..next + spec.synonym_group_size).collect(),
            weight: draw_weight(&mut rng),
        });
        next += spec.synonym_group_size;
    }
    while next < n_topic_tags {
        concepts.push(Concept {
            tags: vec![next],
            weight: draw_weight(&mut rng),
        });
        next += 1;
    }
    let mut order: Vec<usize> = (0..concepts.len()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let mut topic_concepts: Vec<Vec<usize>> = vec![Vec::new(); n_topics];
    for (i, &c) in order.iter().enumerate() {
        topic_concepts[i % n_topics].push(c);
    }

    let general: Vec<usize> = (n_topic_tags..spec.n_tags).collect();
    let topic_general: Vec<Option<usize>> = (0..n_topics)
        .map(|_| (!general.is_empty()).then(|| general[rng.random_range(0..general.len())]))
        .collect();

    let mut resource_concepts = Vec::with_capacity(spec.n_resources);
    for r in 0..spec.n_resources {
        let pool = &topic_concepts[r / spec.topic_size];
        let m = spec.concepts_per_resource.min(pool.len());
        let picked = sample_weighted(&mut rng, pool.len(), |i| concepts[pool[i]].weight, m)
            .expect("positive weights");
        resource_concepts.push(picked.into_iter().map(|i| pool[i]).collect::<Vec<_>>());
    }

    let resource_pick = {
        let mut w: Vec<f64> = (1..=spec.n_resources)
            .map(|k| (k as f64).powf(-spec.resource_popularity_exponent))
            .collect();
        rand::seq::SliceRandom::shuffle(w.as_mut_slice(), &mut rng);
        WeightedIndex::new(w).expect("positive weights")
    };

    let mut f = Folksonomy::new();
    let mut preference: HashMap<(usize, usize), usize> = HashMap::new();
    let (lo, hi) = spec.tags_per_bookmark;
    for _ in 0..spec.n_bookmarks {
        let r = resource_pick.sample(&mut rng);
        let u = rng.random_range(0..spec.n_users);
        let carried = &resource_concepts[r];
        let m = rng.random_range(lo..=hi).min(carried.len());
        let picked = sample_weighted(&mut rng, carried.len(), |i| concepts[carried[i]].weight, m)
            .expect("positive weights");
        let (user, resource) = (format!("u{u}"), format!("r{r}"));
        for i in picked {
            let c = &concepts[carried[i]];
            let tag = match c.tags.len() {
                1 => c.tags[0],
                n => *preference
                    .entry((u, carried[i]))
                    .or_insert_with(|| c.tags[rng.random_range(0..n)]),
            };
            f.add(&user, &resource, &format!("t{tag}"));
        }
        if let Some(g) = topic_general[r / spec.topic_size] {
            if rng.random::<f64>() < spec.general_tag_prob {
                f.add(&user, &resource, &format!("t{g}"));
            }
        }
    }
    Ok(f)
}
