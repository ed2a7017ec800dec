//! Level-wise Apriori over per-map element-kind sets.
//!
//! The item universe is the ten [`ElementKind`]s, so itemsets are stored as
//! 10-bit masks with bit `i` standing for `ElementKind::ALL[i]`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::MiningError;
use crate::model::ElementKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemSet(u16);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn from_bits(bits: u16) -> Self {
        ItemSet(bits & 0x3ff)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, kind: ElementKind) -> bool {
        self.0 & (1 << kind.index()) != 0
    }

    pub fn insert(&mut self, kind: ElementKind) {
        self.0 |= 1 << kind.index();
    }

    pub fn is_subset_of(self, other: ItemSet) -> bool {
        self.0 & other.0 == self.0
    }

    pub fn union(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 | other.0)
    }

    /// Kinds in canonical order.
    pub fn kinds(self) -> Vec<ElementKind> {
        ElementKind::ALL.into_iter().filter(|&k| self.contains(k)).collect()
    }

    /// Lexicographic comparison of the canonical kind sequences.
    pub fn lex_cmp(self, other: ItemSet) -> std::cmp::Ordering {
        self.kinds().cmp(&other.kinds())
    }
}

impl FromIterator<ElementKind> for ItemSet {
    fn from_iter<T: IntoIterator<Item = ElementKind>>(iter: T) -> Self {
        let mut set = ItemSet::EMPTY;
        for kind in iter {
            set.insert(kind);
        }
        set
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.kinds().into_iter().map(ElementKind::as_str).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// The distinct element kinds present on one map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    pub items: ItemSet,
}

impl Transaction {
    pub fn new(kinds: impl IntoIterator<Item = ElementKind>) -> Self {
        Self { items: kinds.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequentItemset {
    pub items: ItemSet,
    pub support: f64,
    pub support_count: u64,
}

fn canonical_order(a: &FrequentItemset, b: &FrequentItemset) -> std::cmp::Ordering {
    a.items
        .len()
        .cmp(&b.items.len())
        .then(b.support_count.cmp(&a.support_count))
        .then(a.items.lex_cmp(b.items))
}

fn support_counts(transactions: &[Transaction], candidates: &[ItemSet]) -> Vec<u64> {
    let mut counts = vec![0u64; candidates.len()];
    for t in transactions {
        for (count, cand) in counts.iter_mut().zip(candidates) {
            if cand.is_subset_of(t.items) {
                *count += 1;
            }
        }
    }
    counts
}

/// Every itemset whose support reaches `min_support`, sorted by size
/// ascending, support descending, then items lexicographically.
pub fn apriori(transactions: &[Transaction], min_support: f64) -> Result<Vec<FrequentItemset>, MiningError> {
    if !(min_support > 0.0 && min_support <= 1.0) {
        return Err(MiningError::InvalidThreshold(min_support));
    }
    if transactions.is_empty() {
        return Err(MiningError::NoTransactions);
    }
    let n = transactions.len() as f64;
    let frequent = |count: u64| count as f64 / n >= min_support;

    let mut result = Vec::new();
    let mut level: Vec<ItemSet> = ElementKind::ALL.iter().map(|&k| std::iter::once(k).collect()).collect();
    while !level.is_empty() {
        let counts = support_counts(transactions, &level);
        let survivors: Vec<ItemSet> = level
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| frequent(c))
            .map(|(&s, &c)| {
                result.push(FrequentItemset { items: s, support: c as f64 / n, support_count: c });
                s
            })
            .collect();
        level = next_candidates(&survivors);
    }
    result.sort_by(canonical_order);
    Ok(result)
}

/// Join frequent k-sets that differ in one item, then drop any candidate
/// with an infrequent k-subset.
fn next_candidates(frequent: &[ItemSet]) -> Vec<ItemSet> {
    let known: BTreeSet<ItemSet> = frequent.iter().copied().collect();
    let mut out = BTreeSet::new();
    for (i, &a) in frequent.iter().enumerate() {
        for &b in &frequent[i + 1..] {
            let joined = a.union(b);
            if joined.len() != a.len() + 1 {
                continue;
            }
            let all_subsets_frequent = joined
                .kinds()
                .into_iter()
                .all(|k| known.contains(&ItemSet::from_bits(joined.bits() & !(1 << k.index()))));
            if all_subsets_frequent {
                out.insert(joined);
            }
        }
    }
    out.into_iter().collect()
}

/// The `limit` highest-support itemsets with exactly `size` items.
pub fn top_itemsets(itemsets: &[FrequentItemset], size: usize, limit: usize) -> Vec<FrequentItemset> {
    let mut sized: Vec<FrequentItemset> = itemsets.iter().filter(|s| s.items.len() == size).cloned().collect();
    sized.sort_by(canonical_order);
    sized.truncate(limit);
    sized
}

fn support_of(itemsets: &[FrequentItemset], set: ItemSet) -> Result<f64, MiningError> {
    if set.is_empty() {
        return Ok(1.0);
    }
    itemsets
        .iter()
        .find(|s| s.items == set)
        .map(|s| s.support)
        .ok_or_else(|| MiningError::NotFrequent(set.to_string()))
}

/// `support(numerator) / support(denominator)`, the share of maps holding the
/// denominator kinds that also hold the numerator kinds.
pub fn conditional_rate(itemsets: &[FrequentItemset], numerator: ItemSet, denominator: ItemSet) -> Result<f64, MiningError> {
    if !denominator.is_subset_of(numerator) {
        return Err(MiningError::NotSubset);
    }
    let den = support_of(itemsets, denominator)?;
    if den == 0.0 {
        return Err(MiningError::ZeroDenominator);
    }
    Ok(support_of(itemsets, numerator)? / den)
}

/// Support counts for an arbitrary list of itemsets, independent of any
/// threshold.
pub fn count_support(transactions: &[Transaction], sets: &[ItemSet]) -> HashMap<ItemSet, u64> {
    sets.iter().copied().zip(support_counts(transactions, sets)).collect()
}
