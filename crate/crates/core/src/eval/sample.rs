//! Stratified gold-template sampling.

use std::collections::{BTreeMap, HashMap};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gold::{GoldPair, Stratum};
use crate::align::Mapping;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumQuota {
    pub stratum: Stratum,
    pub size: usize,
}

pub fn default_quotas() -> Vec<StratumQuota> {
    [
        (Stratum::Exact, 50),
        (Stratum::High, 100),
        (Stratum::Mid, 100),
        (Stratum::Borderline, 50),
    ]
    .into_iter()
    .map(|(stratum, size)| StratumQuota { stratum, size })
    .collect()
}

/// Largest-remainder apportionment of `size` slots over `pools`
/// (name, pool size), capped by pool size.
///
/// When `size` is at least the number of non-empty pools, each of them gets a
/// slot, taken from the largest allocation. Remainder ties go to the
/// lexicographically smaller name.
pub fn apportion(pools: &[(String, usize)], size: usize) -> Vec<usize> {
    let total: usize = pools.iter().map(|(_, n)| n).sum();
    if total == 0 || size == 0 {
        return vec![0; pools.len()];
    }
    let size = size.min(total);
    let mut alloc: Vec<usize> = Vec::with_capacity(pools.len());
    let mut rema: Vec<(usize, usize)> = Vec::with_capacity(pools.len());
    for (_, n) in pools {
        // exact integer arithmetic: quota = size * n / total
        let num = size * n;
        alloc.push((num / total).min(*n));
        rema.push((num % total, *n));
    }
    let mut order: Vec<usize> = (0..pools.len()).collect();
    order.sort_by(|&a, &b| rema[b].0.cmp(&rema[a].0).then_with(|| pools[a].0.cmp(&pools[b].0)));
    let mut left = size - alloc.iter().sum::<usize>();
    while left > 0 {
        let before = left;
        for &i in &order {
            if left == 0 {
                break;
            }
            if alloc[i] < pools[i].1 {
                alloc[i] += 1;
                left -= 1;
            }
        }
        if left == before {
            break;
        }
    }
    let present = pools.iter().filter(|(_, n)| *n > 0).count();
    if size >= present {
        while let Some(empty) = (0..pools.len()).find(|&i| pools[i].1 > 0 && alloc[i] == 0) {
            let donor = (0..pools.len())
                .filter(|&i| alloc[i] > 1)
                .max_by(|&a, &b| alloc[a].cmp(&alloc[b]).then_with(|| pools[b].0.cmp(&pools[a].0)));
            let Some(donor) = donor else { break };
            alloc[donor] -= 1;
            alloc[empty] += 1;
        }
    }
    alloc
}

/// Draw an unlabelled gold template from `mappings`.
///
/// Pairs are deduplicated by (topic, term, ontology) keeping the highest
/// similarity, banded into strata, apportioned across ontologies by pool
/// share, and drawn without replacement with a ChaCha8 stream seeded by
/// `seed`. Output is ordered by stratum, ontology, topic and term.
pub fn stratified_sample(mappings: &[Mapping], quotas: &[StratumQuota], seed: u64) -> Result<Vec<GoldPair>> {
    let mut best: HashMap<(&str, &str, &str), f64> = HashMap::new();
    for m in mappings {
        let e = best.entry(m.key()).or_insert(m.similarity);
        if m.similarity > *e {
            *e = m.similarity;
        }
    }
    let mut pools: BTreeMap<Stratum, BTreeMap<&str, Vec<(&str, &str, f64)>>> = BTreeMap::new();
    for ((topic, term, onto), sim) in best {
        if let Some(s) = Stratum::of(sim) {
            pools.entry(s).or_default().entry(onto).or_default().push((topic, term, sim));
        }
    }
    for by_onto in pools.values_mut() {
        for v in by_onto.values_mut() {
            v.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for q in quotas {
        let empty = BTreeMap::new();
        let by_onto = pools.get(&q.stratum).unwrap_or(&empty);
        let available: usize = by_onto.values().map(Vec::len).sum();
        if available < q.size {
            return Err(Error::invalid(format!(
                "stratum {} needs {} pairs but the pool holds {available} (short by {})",
                q.stratum,
                q.size,
                q.size - available
            )));
        }
        let names: Vec<(String, usize)> = by_onto.iter().map(|(o, v)| (o.to_string(), v.len())).collect();
        let alloc = apportion(&names, q.size);
        let mut drawn = Vec::new();
        for ((onto, pool), k) in by_onto.iter().zip(alloc) {
            for (topic, term, sim) in pool.sample(&mut rng, k) {
                drawn.push(GoldPair {
                    topic_id: topic.to_string(),
                    term_id: term.to_string(),
                    ontology: onto.to_string(),
                    similarity: *sim,
                    stratum: q.stratum,
                    label: None,
                });
            }
        }
        drawn.sort_by(|a, b| (&a.ontology, &a.topic_id, &a.term_id).cmp(&(&b.ontology, &b.topic_id, &b.term_id)));
        out.extend(drawn);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pools(v: &[(&str, usize)]) -> Vec<(String, usize)> {
        v.iter().map(|(n, c)| (n.to_string(), *c)).collect()
    }

    #[test]
    fn seventy_five_twenty_five() {
        assert_eq!(apportion(&pools(&[("a", 75), ("b", 25)]), 20), vec![15, 5]);
    }

    #[test]
    fn single_ontology_takes_all() {
        assert_eq!(apportion(&pools(&[("a", 40)]), 20), vec![20]);
    }

    #[test]
    fn tiny_pool_still_gets_a_slot() {
        assert_eq!(apportion(&pools(&[("a", 990), ("b", 10)]), 10), vec![9, 1]);
        // fewer slots than ontologies: no guarantee
        assert_eq!(apportion(&pools(&[("a", 90), ("b", 5), ("c", 5)]), 1), vec![1, 0, 0]);
    }

    #[test]
    fn caps_at_pool_size() {
        assert_eq!(apportion(&pools(&[("a", 2), ("b", 100)]), 100), vec![2, 98]);
        assert_eq!(apportion(&pools(&[("a", 2), ("b", 3)]), 5), vec![2, 3]);
    }

    #[test]
    fn remainder_ties_by_name() {
        assert_eq!(apportion(&pools(&[("b", 1), ("a", 1)]), 1), vec![0, 1]);
    }
}
