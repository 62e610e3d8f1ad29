//! Frequent explanation itemsets: mining, ranking and pair building.
//!
//! After the classifier is scored on the feedback set, each trace lands in
//! one confusion quadrant. The top explanation items of the traces in a
//! quadrant form transactions, and apriori mining over them yields the
//! quadrant's frequent explanation itemsets (FEIs). The M-score
//!
//! ```text
//! M(cl,T)(i) = |T_cl ∩ T_i| / |T_cl|  −  |T_¬cl ∩ T_i| / |T_¬cl|
//! ```
//!
//! measures how well an itemset `i` discriminates class `cl` from its
//! complement over traces `T`; six rankings (positive/negative predictions,
//! correct/wrong within each) select the top-k itemsets that are finally
//! combined into per-quadrant pairs `(characterization, items to shuffle)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{predict_dataset, ClassifierError, ForestModel};
use crate::encoding::EncodedDataset;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    TruePositive,
    FalsePositive,
    TrueNegative,
    FalseNegative,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::TruePositive,
        Quadrant::FalsePositive,
        Quadrant::TrueNegative,
        Quadrant::FalseNegative,
    ];

    pub fn short(self) -> &'static str {
        match self {
            Quadrant::TruePositive => "TP",
            Quadrant::FalsePositive => "FP",
            Quadrant::TrueNegative => "TN",
            Quadrant::FalseNegative => "FN",
        }
    }

    pub fn is_correct(self) -> bool {
        matches!(self, Quadrant::TruePositive | Quadrant::TrueNegative)
    }
}

#[derive(Debug, Error)]
pub enum FeiError {
    #[error("the feedback dataset is empty")]
    EmptyDataset,
    #[error("quadrant {} holds no traces", .0.short())]
    EmptyQuadrant(Quadrant),
    #[error("cannot compute an M-score over an empty class ({context})")]
    EmptyClass { context: String },
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Trace ids per confusion quadrant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    quadrants: BTreeMap<Quadrant, BTreeSet<String>>,
}

impl ConfusionMatrix {
    pub fn quadrant(&self, q: Quadrant) -> &BTreeSet<String> {
        &self.quadrants[&q]
    }

    pub fn counts(&self) -> BTreeMap<Quadrant, usize> {
        self.quadrants.iter().map(|(q, ids)| (*q, ids.len())).collect()
    }

    /// Trace ids with a positive prediction (TP ∪ FP).
    pub fn predicted_positive(&self) -> BTreeSet<String> {
        self.union_of(&[Quadrant::TruePositive, Quadrant::FalsePositive])
    }

    /// Trace ids with a negative prediction (TN ∪ FN).
    pub fn predicted_negative(&self) -> BTreeSet<String> {
        self.union_of(&[Quadrant::TrueNegative, Quadrant::FalseNegative])
    }

    fn union_of(&self, qs: &[Quadrant]) -> BTreeSet<String> {
        qs.iter().flat_map(|q| self.quadrant(*q).iter().cloned()).collect()
    }
}

/// Predict every feedback row and place its trace id in the quadrant given
/// by (gold label, predicted label).
pub fn build_confusion_matrix(
    model: &ForestModel,
    feedback: &EncodedDataset,
) -> Result<ConfusionMatrix, FeiError> {
    if feedback.rows.is_empty() {
        return Err(FeiError::EmptyDataset);
    }
    let predicted = predict_dataset(model, feedback)?;
    let mut quadrants: BTreeMap<Quadrant, BTreeSet<String>> =
        Quadrant::ALL.iter().map(|q| (*q, BTreeSet::new())).collect();
    for ((gold, pred), id) in feedback.labels.iter().zip(&predicted).zip(&feedback.trace_ids) {
        let q = match (gold.is_positive(), pred.is_positive()) {
            (true, true) => Quadrant::TruePositive,
            (false, true) => Quadrant::FalsePositive,
            (false, false) => Quadrant::TrueNegative,
            (true, false) => Quadrant::FalseNegative,
        };
        quadrants.get_mut(&q).unwrap().insert(id.clone());
    }
    Ok(ConfusionMatrix { quadrants })
}

/// One explanation item: a feature-value pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Item {
    pub feature: String,
    pub value: Value,
}

impl Item {
    pub fn new(feature: impl Into<String>, value: Value) -> Item {
        Item { feature: feature.into(), value }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.feature, self.value)
    }
}

/// A frequent explanation itemset mined from one quadrant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fei {
    pub items: BTreeSet<Item>,
    pub quadrant: Quadrant,
    /// Fraction of the quadrant's transactions containing the itemset.
    pub support: f64,
}

impl fmt::Display for Fei {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", readable_conjunction(&self.items))
    }
}

/// The report-friendly form, e.g. `CType=Gold AND PClaims=No`.
pub fn readable_conjunction(items: &BTreeSet<Item>) -> String {
    items.iter().map(Item::to_string).collect::<Vec<_>>().join(" AND ")
}

/// Apriori over per-trace transactions: all itemsets of size 1..=`max_size`
/// whose support reaches `min_support`. Output is ordered by size, then
/// support descending, then lexicographic items.
pub fn mine_feis(
    transactions: &[BTreeSet<Item>],
    quadrant: Quadrant,
    min_support: f64,
    max_size: usize,
) -> Result<Vec<Fei>, FeiError> {
    if transactions.is_empty() {
        return Err(FeiError::EmptyQuadrant(quadrant));
    }
    let n = transactions.len() as f64;
    let support_of = |itemset: &[Item]| -> f64 {
        transactions
            .iter()
            .filter(|txn| itemset.iter().all(|i| txn.contains(i)))
            .count() as f64
            / n
    };

    // level 1
    let mut all_items: BTreeSet<Item> = BTreeSet::new();
    for txn in transactions {
        all_items.extend(txn.iter().cloned());
    }
    let mut current: Vec<(Vec<Item>, f64)> = all_items
        .into_iter()
        .filter_map(|item| {
            let s = support_of(std::slice::from_ref(&item));
            (s >= min_support).then_some((vec![item], s))
        })
        .collect();

    let mut out: Vec<Fei> = Vec::new();
    let mut level = 1usize;
    while !current.is_empty() && level <= max_size {
        for (items, support) in &current {
            out.push(Fei {
                items: items.iter().cloned().collect(),
                quadrant,
                support: *support,
            });
        }
        level += 1;
        if level > max_size {
            break;
        }

        // join step: extend each k-itemset with every later frequent single
        // that shares its first k−1 items, then prune by downward closure
        let frequent_prev: BTreeSet<&[Item]> =
            current.iter().map(|(items, _)| items.as_slice()).collect();
        let mut next: Vec<(Vec<Item>, f64)> = Vec::new();
        for i in 0..current.len() {
            for j in i + 1..current.len() {
                let (a, b) = (&current[i].0, &current[j].0);
                if a[..a.len() - 1] != b[..b.len() - 1] {
                    continue;
                }
                let mut candidate = a.clone();
                candidate.push(b[b.len() - 1].clone());
                let closed = (0..candidate.len()).all(|drop| {
                    let sub: Vec<Item> = candidate
                        .iter()
                        .enumerate()
                        .filter(|(idx, _)| *idx != drop)
                        .map(|(_, it)| it.clone())
                        .collect();
                    frequent_prev.contains(sub.as_slice())
                });
                if !closed {
                    continue;
                }
                let s = support_of(&candidate);
                if s >= min_support {
                    next.push((candidate, s));
                }
            }
        }
        current = next;
    }

    out.sort_by(|a, b| {
        a.items
            .len()
            .cmp(&b.items.len())
            .then_with(|| b.support.total_cmp(&a.support))
            .then_with(|| a.items.cmp(&b.items))
    });
    Ok(out)
}

/// Does this row satisfy every item of the set? Exact value equality,
/// `unknown` included.
pub fn row_satisfies(
    items: &BTreeSet<Item>,
    row: &[Value],
    feature_index: &BTreeMap<&str, usize>,
) -> bool {
    items.iter().all(|item| {
        feature_index
            .get(item.feature.as_str())
            .is_some_and(|&idx| row[idx] == item.value)
    })
}

fn feature_index(dataset: &EncodedDataset) -> BTreeMap<&str, usize> {
    dataset
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.as_str(), i))
        .collect()
}

/// Equation-style M-score of an itemset for class `cl_ids` versus
/// `not_cl_ids` over the given dataset.
pub fn m_score(
    items: &BTreeSet<Item>,
    cl_ids: &BTreeSet<String>,
    not_cl_ids: &BTreeSet<String>,
    dataset: &EncodedDataset,
) -> Result<f64, FeiError> {
    if cl_ids.is_empty() || not_cl_ids.is_empty() {
        return Err(FeiError::EmptyClass {
            context: format!("|cl|={}, |¬cl|={}", cl_ids.len(), not_cl_ids.len()),
        });
    }
    let index = feature_index(dataset);
    let mut cl_hits = 0usize;
    let mut not_cl_hits = 0usize;
    for (row, id) in dataset.rows.iter().zip(&dataset.trace_ids) {
        let in_cl = cl_ids.contains(id);
        let in_not = not_cl_ids.contains(id);
        if !(in_cl || in_not) {
            continue;
        }
        if row_satisfies(items, row, &index) {
            if in_cl {
                cl_hits += 1;
            } else {
                not_cl_hits += 1;
            }
        }
    }
    Ok(cl_hits as f64 / cl_ids.len() as f64 - not_cl_hits as f64 / not_cl_ids.len() as f64)
}

/// A FEI together with the M-score that ranked it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFei {
    pub fei: Fei,
    pub m_score: f64,
    /// Which ranking produced the score, e.g. `M(+,T)` or `M(wrong,T+)`.
    pub context: String,
}

/// The six ranked, top-k FEI lists.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectedFeis {
    pub i_plus: Vec<RankedFei>,
    pub i_minus: Vec<RankedFei>,
    pub i_tp: Vec<RankedFei>,
    pub i_fp: Vec<RankedFei>,
    pub i_tn: Vec<RankedFei>,
    pub i_fn: Vec<RankedFei>,
    /// Rankings skipped because one class side was empty.
    pub skipped: Vec<String>,
}

/// Rank each quadrant's FEIs with the appropriate M-score and keep the top
/// `k` of each of the six lists. A ranking whose class or complement is
/// empty yields an empty list and a note in `skipped`.
pub fn rank_and_select(
    feis: &BTreeMap<Quadrant, Vec<Fei>>,
    matrix: &ConfusionMatrix,
    dataset: &EncodedDataset,
    k: usize,
) -> SelectedFeis {
    assert!(k >= 1, "selection threshold k must be positive");
    let empty: Vec<Fei> = Vec::new();
    let of = |q: Quadrant| feis.get(&q).unwrap_or(&empty);

    let pred_pos = matrix.predicted_positive();
    let pred_neg = matrix.predicted_negative();
    let tp = matrix.quadrant(Quadrant::TruePositive);
    let fp = matrix.quadrant(Quadrant::FalsePositive);
    let tn = matrix.quadrant(Quadrant::TrueNegative);
    let fn_ = matrix.quadrant(Quadrant::FalseNegative);

    let mut selected = SelectedFeis::default();

    let rank = |name: &str,
                    pool: Vec<Fei>,
                    cl: &BTreeSet<String>,
                    not_cl: &BTreeSet<String>,
                    out: &mut Vec<RankedFei>,
                    skipped: &mut Vec<String>| {
        if pool.is_empty() {
            return;
        }
        if cl.is_empty() || not_cl.is_empty() {
            skipped.push(format!(
                "{name}: class sides {}/{} traces, ranking skipped",
                cl.len(),
                not_cl.len()
            ));
            return;
        }
        let mut ranked: Vec<RankedFei> = pool
            .into_iter()
            .map(|fei| {
                let score = m_score(&fei.items, cl, not_cl, dataset)
                    .expect("class sides checked non-empty");
                RankedFei { fei, m_score: score, context: name.to_string() }
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.m_score
                .total_cmp(&a.m_score)
                .then_with(|| b.fei.support.total_cmp(&a.fei.support))
                .then_with(|| a.fei.items.cmp(&b.fei.items))
        });
        ranked.truncate(k);
        *out = ranked;
    };

    // positive/negative prediction discriminators over all of T
    let i_plus_pool = dedupe_union(of(Quadrant::TruePositive), of(Quadrant::FalsePositive));
    let i_minus_pool = dedupe_union(of(Quadrant::TrueNegative), of(Quadrant::FalseNegative));
    let mut skipped = Vec::new();
    rank("M(+,T)", i_plus_pool, &pred_pos, &pred_neg, &mut selected.i_plus, &mut skipped);
    rank("M(-,T)", i_minus_pool, &pred_neg, &pred_pos, &mut selected.i_minus, &mut skipped);

    // correct/wrong discriminators within each predicted class
    rank("M(correct,T+)", of(Quadrant::TruePositive).clone(), tp, fp, &mut selected.i_tp, &mut skipped);
    rank("M(wrong,T+)", of(Quadrant::FalsePositive).clone(), fp, tp, &mut selected.i_fp, &mut skipped);
    rank("M(correct,T-)", of(Quadrant::TrueNegative).clone(), tn, fn_, &mut selected.i_tn, &mut skipped);
    rank("M(wrong,T-)", of(Quadrant::FalseNegative).clone(), fn_, tn, &mut selected.i_fn, &mut skipped);

    selected.skipped = skipped;
    selected
}

/// Union of two quadrants' FEIs for the prediction-level rankings,
/// deduplicated by itemset (the higher support survives).
fn dedupe_union(a: &[Fei], b: &[Fei]) -> Vec<Fei> {
    let mut by_items: BTreeMap<BTreeSet<Item>, Fei> = BTreeMap::new();
    for fei in a.iter().chain(b) {
        by_items
            .entry(fei.items.clone())
            .and_modify(|existing| {
                if fei.support > existing.support {
                    *existing = fei.clone();
                }
            })
            .or_insert_with(|| fei.clone());
    }
    by_items.into_values().collect()
}

/// One shuffle-plan pair: a characterization of quadrant traces plus the
/// items whose feature values get shuffled (empty for correct quadrants).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeiPair {
    pub characterization: BTreeSet<Item>,
    pub to_shuffle: BTreeSet<Item>,
    pub quadrant: Quadrant,
}

/// Per-quadrant pair sets P*.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairSets {
    pub tp: BTreeSet<FeiPair>,
    pub fp: BTreeSet<FeiPair>,
    pub tn: BTreeSet<FeiPair>,
    pub fn_: BTreeSet<FeiPair>,
}

impl PairSets {
    pub fn quadrant(&self, q: Quadrant) -> &BTreeSet<FeiPair> {
        match q {
            Quadrant::TruePositive => &self.tp,
            Quadrant::FalsePositive => &self.fp,
            Quadrant::TrueNegative => &self.tn,
            Quadrant::FalseNegative => &self.fn_,
        }
    }

    /// Pairs of the wrong quadrants, FP first, in set order.
    pub fn wrong_pairs(&self) -> impl Iterator<Item = &FeiPair> {
        self.fp.iter().chain(self.fn_.iter())
    }

    /// Characterizations of the correct quadrants.
    pub fn correct_characterizations(&self) -> impl Iterator<Item = &BTreeSet<Item>> {
        self.tp.iter().chain(self.tn.iter()).map(|p| &p.characterization)
    }
}

/// Cross the prediction-level lists with the quadrant lists into up to k²
/// pairs per quadrant: `(i1 ∪ i2, ∅)` for correct quadrants, `(i1 ∪ i2,
/// i2)` for wrong ones.
pub fn build_pairs(selected: &SelectedFeis) -> PairSets {
    let cross = |level: &[RankedFei], quadrant_list: &[RankedFei], q: Quadrant| {
        let mut set = BTreeSet::new();
        for i1 in level {
            for i2 in quadrant_list {
                let characterization: BTreeSet<Item> =
                    i1.fei.items.union(&i2.fei.items).cloned().collect();
                let to_shuffle = if q.is_correct() {
                    BTreeSet::new()
                } else {
                    i2.fei.items.clone()
                };
                set.insert(FeiPair { characterization, to_shuffle, quadrant: q });
            }
        }
        set
    };
    PairSets {
        tp: cross(&selected.i_plus, &selected.i_tp, Quadrant::TruePositive),
        fp: cross(&selected.i_plus, &selected.i_fp, Quadrant::FalsePositive),
        tn: cross(&selected.i_minus, &selected.i_tn, Quadrant::TrueNegative),
        fn_: cross(&selected.i_minus, &selected.i_fn, Quadrant::FalseNegative),
    }
}
