use super::patterns::{Pattern, PolyConfig, Schur, SchurOp};
use super::Coloring;
use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::polyarith::PolyFamily;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Depth at which the coloring tree is split into parallel subtrees. Fixed
/// so that node counts, and hence cap decisions, ignore the worker count.
const SPLIT_DEPTH: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Threshold {
    /// Every `r`-coloring of `[1..n]` contains the pattern; `avoiding` is the
    /// lexicographically first canonical coloring of `[1..n−1]` that does not.
    Found { n: usize, avoiding: Coloring },
    /// Some coloring of `[1..n_max]` avoids the pattern.
    NotFound { n_max: usize, avoiding: Coloring },
    /// The node cap was hit while deciding window `searched + 1`.
    Capped { searched: usize, best: Coloring },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub result: Threshold,
    pub nodes: u64,
}

/// Least `n ≤ n_max` such that every `r`-coloring of `[1..n]` contains the
/// pattern, by exhaustive enumeration. Element 1 gets color 0 and each new
/// color is the least unused one.
pub fn threshold(pattern: &dyn Pattern, r: usize, n_max: usize, cfg: &SearchConfig) -> Result<ThresholdReport> {
    if r == 0 {
        return Err(Error::invalid("r must be at least 1"));
    }
    if n_max > cfg.max_window {
        return Err(Error::ResourceCap(format!(
            "window {n_max} exceeds the configured maximum {}",
            cfg.max_window
        )));
    }
    let mut nodes = 0u64;
    let mut best = Coloring::new(r, Vec::new())?;
    for n in 1..=n_max {
        match avoiding_coloring(pattern, r, n, cfg, &mut nodes) {
            Search::Avoids(assign) => best = Coloring::new(r, assign)?,
            Search::Forced => {
                return Ok(ThresholdReport {
                    result: Threshold::Found { n, avoiding: best },
                    nodes,
                })
            }
            Search::Capped => {
                return Ok(ThresholdReport {
                    result: Threshold::Capped {
                        searched: n - 1,
                        best,
                    },
                    nodes,
                })
            }
        }
    }
    Ok(ThresholdReport {
        result: Threshold::NotFound { n_max, avoiding: best },
        nodes,
    })
}

/// `pvdw_threshold` for a polynomial family (anchor included iff `anchor`).
pub fn pvdw_threshold(
    family: &PolyFamily,
    anchor: bool,
    r: usize,
    n_max: usize,
    cfg: &SearchConfig,
) -> Result<ThresholdReport> {
    threshold(&PolyConfig::new(family.clone(), anchor), r, n_max, cfg)
}

/// Schur threshold; `distinct` asks for `x < y` instead of `x ≤ y`.
pub fn schur_threshold(
    r: usize,
    op: SchurOp,
    distinct: bool,
    n_max: usize,
    cfg: &SearchConfig,
) -> Result<ThresholdReport> {
    threshold(&Schur { op, distinct }, r, n_max, cfg)
}

enum Search {
    Avoids(Vec<u8>),
    Forced,
    Capped,
}

struct Subtree {
    found: Option<Vec<u8>>,
    nodes: u64,
    capped: bool,
}

fn avoiding_coloring(pattern: &dyn Pattern, r: usize, n: usize, cfg: &SearchConfig, nodes: &mut u64) -> Search {
    let budget = cfg.max_nodes;
    let depth = n.min(SPLIT_DEPTH);
    let mut prefixes = Vec::new();
    let mut prefix_nodes = 0u64;
    let mut stack = Vec::with_capacity(depth);
    collect_prefixes(pattern, r, depth, &mut stack, 0, &mut prefixes, &mut prefix_nodes);
    *nodes += prefix_nodes;
    if *nodes > budget {
        return Search::Capped;
    }
    let results: Vec<Subtree> = cfg.install(|| {
        prefixes
            .par_iter()
            .map(|prefix| {
                let mut assign = prefix.clone();
                let used = assign.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
                let mut sub_nodes = 0u64;
                match extend(pattern, r, n, &mut assign, used, &mut sub_nodes, budget) {
                    Some(true) => Subtree {
                        found: Some(assign),
                        nodes: sub_nodes,
                        capped: false,
                    },
                    Some(false) => Subtree {
                        found: None,
                        nodes: sub_nodes,
                        capped: false,
                    },
                    None => Subtree {
                        found: None,
                        nodes: sub_nodes,
                        capped: true,
                    },
                }
            })
            .collect()
    });
    // Merge in canonical order as a sequential search would.
    for sub in results {
        *nodes += sub.nodes;
        if sub.capped || *nodes > budget {
            return Search::Capped;
        }
        if let Some(assign) = sub.found {
            return Search::Avoids(assign);
        }
    }
    Search::Forced
}

fn collect_prefixes(
    pattern: &dyn Pattern,
    r: usize,
    depth: usize,
    assign: &mut Vec<u8>,
    used: usize,
    out: &mut Vec<Vec<u8>>,
    nodes: &mut u64,
) {
    if assign.len() == depth {
        out.push(assign.clone());
        return;
    }
    let m = assign.len() + 1;
    for c in 0..r.min(used + 1) {
        *nodes += 1;
        assign.push(c as u8);
        if !pattern.closes_at(assign, m) {
            collect_prefixes(pattern, r, depth, assign, used.max(c + 1), out, nodes);
        }
        assign.pop();
    }
}

/// `Some(true)` leaves an avoiding completion in `assign`; `None` means the
/// budget ran out.
fn extend(
    pattern: &dyn Pattern,
    r: usize,
    n: usize,
    assign: &mut Vec<u8>,
    used: usize,
    nodes: &mut u64,
    budget: u64,
) -> Option<bool> {
    if assign.len() == n {
        return Some(true);
    }
    let m = assign.len() + 1;
    for c in 0..r.min(used + 1) {
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        assign.push(c as u8);
        if !pattern.closes_at(assign, m) && extend(pattern, r, n, assign, used.max(c + 1), nodes, budget)? {
            return Some(true);
        }
        assign.pop();
    }
    Some(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{find_poly_config, find_schur};

    fn fam(s: &str) -> PolyFamily {
        PolyFamily::parse_list(s).unwrap()
    }

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    /// Oracle: try every r-coloring of [1..n] with no symmetry breaking.
    fn brute_threshold(has: impl Fn(&Coloring) -> bool, r: usize, n_max: usize) -> Option<usize> {
        (1..=n_max).find(|&n| {
            (0..r.pow(n as u32)).all(|code| {
                let mut k = code;
                let assign = (0..n)
                    .map(|_| {
                        let c = (k % r) as u8;
                        k /= r;
                        c
                    })
                    .collect();
                has(&Coloring::new(r, assign).unwrap())
            })
        })
    }

    #[test]
    fn vdw_three_two() {
        let rep = pvdw_threshold(&fam("d,2*d"), true, 2, 20, &cfg()).unwrap();
        let Threshold::Found { n, avoiding } = rep.result else {
            panic!("{rep:?}")
        };
        assert_eq!(n, 9);
        assert_eq!(avoiding.n(), 8);
        assert!(find_poly_config(&avoiding, &fam("d,2*d"), true).is_none());
        let oracle = brute_threshold(|c| find_poly_config(c, &fam("d,2*d"), true).is_some(), 2, 10);
        assert_eq!(oracle, Some(9));
    }

    #[test]
    fn small_thresholds_match_oracle() {
        for (f, r) in [("d", 1), ("d", 2), ("d", 3), ("d^2", 2), ("2*d", 2), ("d,d^2", 2)] {
            let rep = pvdw_threshold(&fam(f), true, r, 12, &cfg()).unwrap();
            let got = match rep.result {
                Threshold::Found { n, .. } => Some(n),
                _ => None,
            };
            let limit = if r == 3 { 8 } else { 12 };
            let oracle = brute_threshold(|c| find_poly_config(c, &fam(f), true).is_some(), r, limit);
            assert_eq!(got, oracle, "F = {f}, r = {r}");
        }
        let rep = pvdw_threshold(&fam("d"), true, 1, 10, &cfg()).unwrap();
        assert!(matches!(rep.result, Threshold::Found { n: 2, .. }));
        let rep = pvdw_threshold(&fam("d^2"), true, 2, 10, &cfg()).unwrap();
        assert!(matches!(rep.result, Threshold::Found { n: 5, .. }));
    }

    #[test]
    fn schur_thresholds() {
        let classic = Schur { op: SchurOp::Additive, distinct: false };
        let rep = schur_threshold(2, SchurOp::Additive, false, 10, &cfg()).unwrap();
        let Threshold::Found { n, avoiding } = rep.result else {
            panic!()
        };
        assert_eq!(n, 5);
        assert_eq!(avoiding.n(), 4);
        assert!(classic.find(&avoiding).is_none());
        assert_eq!(brute_threshold(|c| classic.find(c).is_some(), 2, 8), Some(5));

        // with x < y required the threshold is the weak Schur number
        let rep = schur_threshold(2, SchurOp::Additive, true, 12, &cfg()).unwrap();
        assert!(matches!(rep.result, Threshold::Found { n: 9, .. }));
        assert_eq!(brute_threshold(|c| find_schur(c, SchurOp::Additive).is_some(), 2, 10), Some(9));

        let rep = schur_threshold(1, SchurOp::Additive, true, 10, &cfg()).unwrap();
        assert!(matches!(rep.result, Threshold::Found { n: 3, .. }));
        let rep = schur_threshold(1, SchurOp::Additive, false, 10, &cfg()).unwrap();
        assert!(matches!(rep.result, Threshold::Found { n: 2, .. }));

        let rep = schur_threshold(2, SchurOp::Multiplicative, true, 12, &cfg()).unwrap();
        assert!(matches!(rep.result, Threshold::NotFound { n_max: 12, .. }));
    }

    #[test]
    fn cap_is_reported() {
        let tight = SearchConfig {
            max_nodes: 20,
            ..cfg()
        };
        let rep = pvdw_threshold(&fam("d,2*d"), true, 2, 20, &tight).unwrap();
        let Threshold::Capped { searched, best } = rep.result else {
            panic!("{rep:?}")
        };
        assert_eq!(best.n(), searched);
        assert!(searched < 9);
        let small = SearchConfig {
            max_window: 5,
            ..cfg()
        };
        assert!(pvdw_threshold(&fam("d"), true, 2, 6, &small).is_err());
    }

    #[test]
    fn worker_count_does_not_matter() {
        for w in [2, 8] {
            let c = cfg().with_workers(w);
            assert_eq!(
                pvdw_threshold(&fam("d,2*d"), true, 2, 20, &c).unwrap(),
                pvdw_threshold(&fam("d,2*d"), true, 2, 20, &cfg()).unwrap()
            );
            let capped = SearchConfig { max_nodes: 300, ..c.clone() };
            let one = SearchConfig { max_nodes: 300, ..cfg() };
            assert_eq!(
                pvdw_threshold(&fam("d,2*d,3*d"), true, 2, 30, &capped).unwrap(),
                pvdw_threshold(&fam("d,2*d,3*d"), true, 2, 30, &one).unwrap()
            );
        }
    }
}
