//! Binning timestamped contact records into per-window edge observations.
//!
//! Each window contributes one Bernoulli trial per node pair (scaled by
//! `trials_per_window`): a success when the pair has at least one contact
//! inside the window, a failure otherwise. Windows mapping to the same
//! output graph accumulate, so a graph fed by `m` windows carries `m`
//! trials per pair.

use std::collections::{BTreeSet, HashMap};

use ndarray::Array2;

use super::GraphObservations;
use crate::error::{Error, Result};

/// One timestamped contact between two distinct nodes.
///
/// Ids are free-form tokens; `a != b` is enforced when records are parsed
/// or ingested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactRecord {
    pub t: i64,
    pub a: String,
    pub b: String,
}

/// A half-open observation window `[start, end)` feeding output graph
/// `graph`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
    pub graph: usize,
}

/// Validated binning layout: pairwise-disjoint windows and an optional node
/// whitelist.
#[derive(Debug, Clone)]
pub struct BinningSpec {
    /// Sorted by `start`; disjointness is checked at construction.
    windows: Vec<TimeWindow>,
    whitelist: Option<Vec<String>>,
}

impl BinningSpec {
    pub fn new(windows: Vec<TimeWindow>, whitelist: Option<Vec<String>>) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::NoWindows);
        }
        for w in &windows {
            if w.end <= w.start {
                return Err(Error::Schema {
                    message: format!("window [{}, {}) is empty or inverted", w.start, w.end),
                });
            }
        }
        let mut sorted = windows;
        sorted.sort_by_key(|w| (w.start, w.end));
        for pair in sorted.windows(2) {
            if pair[0].end > pair[1].start {
                return Err(Error::OverlappingWindows {
                    a_start: pair[0].start,
                    a_end: pair[0].end,
                    b_start: pair[1].start,
                    b_end: pair[1].end,
                });
            }
        }
        let whitelist = match whitelist {
            None => None,
            Some(raw) => {
                let mut seen = BTreeSet::new();
                let mut ids = Vec::new();
                for id in raw {
                    if seen.insert(id.clone()) {
                        ids.push(id);
                    }
                }
                if ids.len() < 2 {
                    return Err(Error::EmptyWhitelist);
                }
                Some(ids)
            }
        };
        Ok(Self { windows: sorted, whitelist })
    }

    /// Number of output graphs: one past the largest graph index used.
    pub fn num_graphs(&self) -> usize {
        self.windows.iter().map(|w| w.graph + 1).max().unwrap_or(0)
    }

    pub fn windows(&self) -> &[TimeWindow] {
        &self.windows
    }

    pub fn whitelist(&self) -> Option<&[String]> {
        self.whitelist.as_deref()
    }

    /// Index (into the sorted window list) of the window containing `t`.
    fn window_index_at(&self, t: i64) -> Option<usize> {
        let idx = self.windows.partition_point(|w| w.start <= t);
        if idx == 0 {
            return None;
        }
        let candidate = idx - 1;
        (t < self.windows[candidate].end).then_some(candidate)
    }
}

/// Output of [`ingest_contacts`]: one undirected graph per graph index and
/// the node-id relabeling applied to reach contiguous 0-based indices.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub graphs: Vec<GraphObservations>,
    /// `node_ids[v]` is the original id of node `v`.
    pub node_ids: Vec<String>,
    /// Records that fell inside a window with both endpoints retained.
    pub used_records: usize,
    /// Records outside every window or touching a non-whitelisted node.
    pub dropped_records: usize,
}

/// Bins contact records into undirected edge counts per output graph.
///
/// Nodes are relabeled `0..n-1` following the whitelist's order when one is
/// given, otherwise the sorted distinct ids seen inside windows. Duplicate
/// contacts within one window collapse to a single success, so the result
/// depends on neither record order nor multiplicity.
pub fn ingest_contacts(
    records: &[ContactRecord],
    binning: &BinningSpec,
    trials_per_window: u64,
) -> Result<Ingested> {
    if trials_per_window == 0 {
        return Err(Error::Schema {
            message: "trials_per_window must be at least 1".to_string(),
        });
    }
    for r in records {
        if r.a == r.b {
            return Err(Error::Schema {
                message: format!("contact record joins node `{}` with itself", r.a),
            });
        }
    }

    let node_ids: Vec<String> = match binning.whitelist() {
        Some(ids) => ids.to_vec(),
        None => {
            let mut ids: BTreeSet<&str> = BTreeSet::new();
            for r in records {
                if binning.window_index_at(r.t).is_some() {
                    ids.insert(&r.a);
                    ids.insert(&r.b);
                }
            }
            ids.into_iter().map(String::from).collect()
        }
    };
    if node_ids.len() < 2 {
        return Err(Error::EmptyWhitelist);
    }
    let index_of: HashMap<&str, usize> =
        node_ids.iter().enumerate().map(|(v, id)| (id.as_str(), v)).collect();

    let mut present: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    let mut used = 0usize;
    for r in records {
        let (Some(w), Some(&a), Some(&b)) = (
            binning.window_index_at(r.t),
            index_of.get(r.a.as_str()),
            index_of.get(r.b.as_str()),
        ) else {
            continue;
        };
        used += 1;
        present.insert((w, a.min(b), a.max(b)));
    }

    let n = node_ids.len();
    let num_graphs = binning.num_graphs();
    let mut windows_per_graph = vec![0u64; num_graphs];
    for w in binning.windows() {
        windows_per_graph[w.graph] += 1;
    }

    let mut y = vec![Array2::<u64>::zeros((n, n)); num_graphs];
    for &(w, i, j) in &present {
        let g = binning.windows()[w].graph;
        y[g][(i, j)] += trials_per_window;
        y[g][(j, i)] += trials_per_window;
    }

    let mut graphs = Vec::with_capacity(num_graphs);
    for (g, y_g) in y.into_iter().enumerate() {
        let per_pair = windows_per_graph[g] * trials_per_window;
        let mut trials = Array2::<u64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    trials[(i, j)] = per_pair;
                }
            }
        }
        graphs.push(GraphObservations::new(false, y_g, trials)?);
    }

    Ok(Ingested {
        graphs,
        node_ids,
        used_records: used,
        dropped_records: records.len() - used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: i64, a: &str, b: &str) -> ContactRecord {
        ContactRecord { t, a: a.to_string(), b: b.to_string() }
    }

    fn one_window() -> BinningSpec {
        BinningSpec::new(vec![TimeWindow { start: 0, end: 100, graph: 0 }], None).unwrap()
    }

    #[test]
    fn empty_window_list_is_rejected() {
        assert!(matches!(BinningSpec::new(vec![], None), Err(Error::NoWindows)));
    }

    #[test]
    fn overlapping_windows_are_rejected() {
        let windows = vec![
            TimeWindow { start: 0, end: 60, graph: 0 },
            TimeWindow { start: 59, end: 120, graph: 1 },
        ];
        assert!(matches!(
            BinningSpec::new(windows, None),
            Err(Error::OverlappingWindows { .. })
        ));
    }

    #[test]
    fn inverted_window_is_rejected() {
        let windows = vec![TimeWindow { start: 10, end: 10, graph: 0 }];
        assert!(matches!(BinningSpec::new(windows, None), Err(Error::Schema { .. })));
    }

    #[test]
    fn whitelist_needs_two_distinct_ids() {
        let windows = vec![TimeWindow { start: 0, end: 1, graph: 0 }];
        let result = BinningSpec::new(windows, Some(vec!["7".into(), "7".into()]));
        assert!(matches!(result, Err(Error::EmptyWhitelist)));
    }

    #[test]
    fn duplicate_contacts_collapse() {
        let binning = one_window();
        let once = ingest_contacts(&[rec(5, "a", "b")], &binning, 1).unwrap();
        let twice =
            ingest_contacts(&[rec(5, "a", "b"), rec(6, "b", "a")], &binning, 1).unwrap();
        assert_eq!(once.graphs, twice.graphs);
        assert_eq!(once.graphs[0].y()[(0, 1)], 1);
        assert_eq!(once.graphs[0].trials()[(0, 1)], 1);
    }

    #[test]
    fn record_order_never_matters() {
        let binning = one_window();
        let fwd = [rec(5, "a", "b"), rec(7, "b", "c"), rec(9, "a", "c")];
        let rev: Vec<_> = fwd.iter().rev().cloned().collect();
        let a = ingest_contacts(&fwd, &binning, 1).unwrap();
        let b = ingest_contacts(&rev, &binning, 1).unwrap();
        assert_eq!(a.graphs, b.graphs);
        assert_eq!(a.node_ids, b.node_ids);
    }

    #[test]
    fn no_records_yield_zero_counts_with_full_trials() {
        let windows: Vec<TimeWindow> =
            (0..9).map(|w| TimeWindow { start: w * 100, end: w * 100 + 50, graph: 0 }).collect();
        let whitelist: Vec<String> = (0..10).map(|v| v.to_string()).collect();
        let binning = BinningSpec::new(windows, Some(whitelist)).unwrap();
        let out = ingest_contacts(&[], &binning, 1).unwrap();
        assert_eq!(out.graphs.len(), 1);
        let g = &out.graphs[0];
        assert_eq!(g.n(), 10);
        assert_eq!(g.total_successes(), 0);
        assert_eq!(g.trials()[(0, 9)], 9);
        assert_eq!(g.trials()[(3, 3)], 0);
    }

    #[test]
    fn window_boundaries_are_half_open() {
        let binning =
            BinningSpec::new(vec![TimeWindow { start: 10, end: 20, graph: 0 }], None).unwrap();
        let out = ingest_contacts(
            &[rec(10, "a", "b"), rec(20, "a", "c"), rec(19, "b", "c")],
            &binning,
            1,
        )
        .unwrap();
        // t = 20 falls outside [10, 20): node "c" only enters through t = 19.
        assert_eq!(out.used_records, 2);
        assert_eq!(out.dropped_records, 1);
        assert_eq!(out.graphs[0].y()[(0, 1)], 1);
    }

    #[test]
    fn out_of_window_records_are_dropped_silently() {
        let binning = one_window();
        let out = ingest_contacts(&[rec(5, "a", "b"), rec(500, "a", "b")], &binning, 1).unwrap();
        assert_eq!(out.used_records, 1);
        assert_eq!(out.dropped_records, 1);
        assert_eq!(out.graphs[0].y()[(0, 1)], 1);
    }

    #[test]
    fn whitelist_order_defines_node_indices() {
        let binning = BinningSpec::new(
            vec![TimeWindow { start: 0, end: 100, graph: 0 }],
            Some(vec!["9".into(), "3".into(), "5".into()]),
        )
        .unwrap();
        let out = ingest_contacts(&[rec(1, "5", "9"), rec(2, "5", "8")], &binning, 1).unwrap();
        assert_eq!(out.node_ids, vec!["9", "3", "5"]);
        // Pair (5, 9) maps to indices (2, 0); the contact touching "8" drops.
        assert_eq!(out.graphs[0].y()[(0, 2)], 1);
        assert_eq!(out.dropped_records, 1);
        assert_eq!(out.graphs[0].y()[(0, 1)], 0);
    }

    #[test]
    fn without_whitelist_nodes_sort_lexicographically() {
        let binning = one_window();
        let out = ingest_contacts(&[rec(1, "beta", "alpha")], &binning, 1).unwrap();
        assert_eq!(out.node_ids, vec!["alpha", "beta"]);
    }

    #[test]
    fn windows_accumulate_into_graph_indices() {
        let windows = vec![
            TimeWindow { start: 0, end: 10, graph: 1 },
            TimeWindow { start: 10, end: 20, graph: 0 },
            TimeWindow { start: 20, end: 30, graph: 1 },
        ];
        let binning = BinningSpec::new(windows, None).unwrap();
        let out = ingest_contacts(
            &[rec(1, "a", "b"), rec(25, "a", "b"), rec(11, "a", "b")],
            &binning,
            1,
        )
        .unwrap();
        assert_eq!(out.graphs.len(), 2);
        assert_eq!(out.graphs[0].y()[(0, 1)], 1);
        assert_eq!(out.graphs[0].trials()[(0, 1)], 1);
        assert_eq!(out.graphs[1].y()[(0, 1)], 2);
        assert_eq!(out.graphs[1].trials()[(0, 1)], 2);
    }

    #[test]
    fn trials_per_window_scales_both_counts() {
        let binning = one_window();
        let out = ingest_contacts(&[rec(1, "a", "b"), rec(2, "b", "c")], &binning, 3).unwrap();
        assert_eq!(out.graphs[0].y()[(0, 1)], 3);
        assert_eq!(out.graphs[0].trials()[(0, 1)], 3);
        assert_eq!(out.graphs[0].y()[(0, 2)], 0);
        assert_eq!(out.graphs[0].trials()[(0, 2)], 3);
    }
}
