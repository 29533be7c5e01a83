use super::witness::{fs_fp, sumsub_elements, Witness, WitnessKind, WitnessParams};
use crate::combinatorics::{is_ip_r_star, is_pws, BlockPartition, GenSeq, IpStar, LargenessParams, WindowSet};
use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::polyarith::PolyFamily;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// `R = {n : M(n) is piecewise syndetic}` with
/// `M(n) = {m : {m} ∪ {m + p(n) : p ∈ F} ⊆ A}`, over the window of `A`.
pub fn config_set_r(a: &WindowSet, family: &PolyFamily, params: LargenessParams) -> WindowSet {
    let end = a.window_end();
    WindowSet::from_fn(end, |n| {
        let steps: Option<Vec<i64>> = family.iter().map(|p| p.eval_i64(n as i64)).collect();
        let Some(steps) = steps else {
            return false;
        };
        let m_set = WindowSet::from_fn(end, |m| {
            a.contains(m as i64)
                && steps
                    .iter()
                    .all(|&s| (m as i64).checked_add(s).is_some_and(|v| a.contains(v)))
        });
        is_pws(&m_set, params).is_some()
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IprReport {
    /// Members of `R`.
    pub r_set: Vec<usize>,
    /// Least `r ≤ r_max` for which `R` is IP_r* in the window.
    pub least_r: Option<usize>,
    /// Outcome for each `r` tried, in order. The scan stops at the first
    /// holding or vacuous `r`.
    pub attempts: Vec<(usize, IpStar)>,
}

/// Compute `R` and the least `r ≤ r_max` with `R` IP_r* inside the window.
pub fn verify_ipr_pvdw(
    a: &WindowSet,
    family: &PolyFamily,
    params: LargenessParams,
    r_max: usize,
    distinct: bool,
    cfg: &SearchConfig,
) -> Result<IprReport> {
    let r_set = config_set_r(a, family, params);
    let mut attempts = Vec::new();
    let mut least_r = None;
    for r in 1..=r_max {
        let outcome = is_ip_r_star(&r_set, r, distinct, cfg.workers)?;
        let stop = !matches!(outcome, IpStar::Counterexample { .. });
        if outcome == IpStar::Holds {
            least_r = Some(r);
        }
        attempts.push((r, outcome));
        if stop {
            break;
        }
    }
    Ok(IprReport {
        r_set: r_set.members().collect(),
        least_r,
        attempts,
    })
}

/// A sum subsystem `y` of `x` with the anchors that work for each prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumsubResult {
    pub y: GenSeq,
    pub blocks: BlockPartition,
    /// `anchors[N−1]` is the least anchor for the first `N` terms.
    pub anchors: Vec<i64>,
    /// `anchor_sets[N−1]` holds every anchor for the first `N` terms.
    pub anchor_sets: Vec<Vec<usize>>,
}

/// Search ordered block partitions of `x` (lexicographic in the block
/// lists) for `y` of length `n_target` such that, for every `N`, some `a`
/// in the window has `a + p(v) ∈ A` for all `v ∈ FS(y_1..y_N) ∪ FP(y_1..y_N)`
/// and `p ∈ F`, and (if given) `FS ∪ FP ⊆ B`.
pub fn sumsub_pattern_search(
    a: &WindowSet,
    b: Option<&WindowSet>,
    x: &GenSeq,
    family: &PolyFamily,
    n_target: usize,
    cfg: &SearchConfig,
) -> Result<Option<SumsubResult>> {
    if n_target == 0 {
        return Err(Error::invalid("N_target must be at least 1"));
    }
    let mut st = SumsubState {
        a,
        b,
        x: x.xs(),
        family,
        n_target,
        blocks: Vec::new(),
        sums: Vec::new(),
        anchor_sets: Vec::new(),
        nodes: 0,
        budget: cfg.max_nodes,
    };
    if !st.place(0)? {
        return Ok(None);
    }
    let y = GenSeq::new(st.sums.clone(), false)?;
    Ok(Some(SumsubResult {
        y,
        blocks: BlockPartition::new(st.blocks.clone())?,
        anchors: st.anchor_sets.iter().map(|s| s[0] as i64).collect(),
        anchor_sets: st.anchor_sets,
    }))
}

struct SumsubState<'a> {
    a: &'a WindowSet,
    b: Option<&'a WindowSet>,
    x: &'a [u64],
    family: &'a PolyFamily,
    n_target: usize,
    blocks: Vec<Vec<usize>>,
    sums: Vec<u64>,
    anchor_sets: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
}

impl SumsubState<'_> {
    /// Choose the next block starting at 0-based position `from` or later.
    fn place(&mut self, from: usize) -> Result<bool> {
        if self.blocks.len() == self.n_target {
            return Ok(true);
        }
        let mut block = Vec::new();
        self.grow(from, &mut block)
    }

    /// Depth-first over blocks in lexicographic order: each block is tried
    /// before its extensions.
    fn grow(&mut self, start: usize, block: &mut Vec<usize>) -> Result<bool> {
        for i in start..self.x.len() {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::ResourceCap(format!(
                    "sum-subsystem search visited more than {} nodes",
                    self.budget
                )));
            }
            block.push(i + 1);
            let Some(sum) = block.iter().try_fold(0u64, |s, &t| s.checked_add(self.x[t - 1])) else {
                block.pop();
                continue;
            };
            self.blocks.push(block.clone());
            self.sums.push(sum);
            if let Some(anchors) = self.anchors() {
                self.anchor_sets.push(anchors);
                if self.place(i + 1)? {
                    return Ok(true);
                }
                self.anchor_sets.pop();
            }
            self.blocks.pop();
            self.sums.pop();
            if self.grow(i + 1, block)? {
                return Ok(true);
            }
            block.pop();
        }
        Ok(false)
    }

    /// Anchors for the current prefix, or `None` if there are none or `B` fails.
    fn anchors(&self) -> Option<Vec<usize>> {
        let y = GenSeq::new(self.sums.clone(), false).ok()?;
        let vals = fs_fp(&y);
        if let Some(b) = self.b {
            if !vals.iter().all(|v| v.to_i64().is_some_and(|v| b.contains(v))) {
                return None;
            }
        }
        let end = self.a.window_end() as i64;
        let shifts: Vec<i64> = vals
            .iter()
            .flat_map(|v| self.family.iter().map(move |p| p.eval(v)))
            .map(|pv| pv.to_i64().filter(|s| s.abs() <= end))
            .collect::<Option<Vec<_>>>()?;
        // anchors only shrink as y grows, so reuse the previous set
        let candidates: Box<dyn Iterator<Item = usize>> = match self.anchor_sets.last() {
            Some(prev) => Box::new(prev.clone().into_iter()),
            None => Box::new(1..=end as usize),
        };
        let found: Vec<usize> = candidates
            .filter(|&m| shifts.iter().all(|&s| self.a.contains(m as i64 + s)))
            .collect();
        (!found.is_empty()).then_some(found)
    }
}

/// One witness per prefix length `N`, each using the least anchor.
pub fn sumsub_witnesses(res: &SumsubResult, x: &GenSeq, family: &PolyFamily) -> Vec<Witness> {
    (1..=res.y.len())
        .map(|n| {
            let y = res.y.prefix(n);
            let anchor = res.anchors[n - 1];
            Witness {
                kind: WitnessKind::Sumsub,
                elements: sumsub_elements(anchor, &y, family),
                color: 0,
                params: WitnessParams::Sumsub {
                    x: x.clone(),
                    blocks: BlockPartition::new(res.blocks.blocks()[..n].to_vec())
                        .expect("prefix of a valid partition"),
                    anchor,
                    polys: family.clone(),
                },
            }
        })
        .collect()
}
