//! Finite sums, products and exponential towers of generator sequences,
//! sum subsystems, and window versions of the largeness notions
//! (thick, syndetic, piecewise syndetic, IP_r*).

use crate::bignum::capped_pow;
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A finite generator sequence `⟨x_1, …, x_k⟩` of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "GenSeqRepr", into = "GenSeqRepr")]
pub struct GenSeq {
    xs: Vec<u64>,
    distinct: bool,
}

#[derive(Serialize, Deserialize)]
struct GenSeqRepr {
    xs: Vec<u64>,
    #[serde(default)]
    distinct: bool,
}

impl TryFrom<GenSeqRepr> for GenSeq {
    type Error = Error;
    fn try_from(r: GenSeqRepr) -> Result<Self> {
        GenSeq::new(r.xs, r.distinct)
    }
}

impl From<GenSeq> for GenSeqRepr {
    fn from(s: GenSeq) -> Self {
        GenSeqRepr {
            xs: s.xs,
            distinct: s.distinct,
        }
    }
}

impl GenSeq {
    pub fn new(xs: Vec<u64>, distinct: bool) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::invalid("generator sequence must be nonempty"));
        }
        if xs.contains(&0) {
            return Err(Error::invalid("generator entries must be positive"));
        }
        if distinct {
            let set: BTreeSet<_> = xs.iter().collect();
            if set.len() != xs.len() {
                return Err(Error::invalid(format!(
                    "generator sequence {xs:?} has repeated entries"
                )));
            }
        }
        Ok(GenSeq { xs, distinct })
    }

    /// A sequence with the distinct flag set iff the entries are pairwise distinct.
    pub fn from_slice(xs: &[u64]) -> Result<Self> {
        let distinct = xs.iter().collect::<BTreeSet<_>>().len() == xs.len();
        Self::new(xs.to_vec(), distinct)
    }

    pub fn xs(&self) -> &[u64] {
        &self.xs
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn distinct(&self) -> bool {
        self.distinct
    }

    pub fn prefix(&self, k: usize) -> GenSeq {
        GenSeq {
            xs: self.xs[..k].to_vec(),
            distinct: self.distinct,
        }
    }
}

impl fmt::Display for GenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, x) in self.xs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("⟩")
    }
}

/// All nonempty subset sums.
pub fn fs(s: &GenSeq) -> BTreeSet<u128> {
    let mut sums = BTreeSet::new();
    for &x in s.xs() {
        let x = x as u128;
        let shifted: Vec<u128> = sums.iter().map(|v| v + x).collect();
        sums.insert(x);
        sums.extend(shifted);
    }
    sums
}

/// `x_α = Σ_{n∈α} x_n` for a nonempty 1-based index set `alpha`.
pub fn x_alpha(s: &GenSeq, alpha: &[usize]) -> Result<u128> {
    let set: BTreeSet<usize> = alpha.iter().copied().collect();
    if set.is_empty() || set.iter().any(|&i| i == 0 || i > s.len()) {
        return Err(Error::BadIndexSet(alpha.to_vec()));
    }
    Ok(set.iter().map(|&i| s.xs[i - 1] as u128).sum())
}

/// All nonempty subset products.
pub fn fp(s: &GenSeq) -> BTreeSet<BigUint> {
    let mut prods: BTreeSet<BigUint> = BTreeSet::new();
    for &x in s.xs() {
        let x = BigUint::from(x);
        let scaled: Vec<BigUint> = prods.iter().map(|v| v * &x).collect();
        prods.insert(x);
        prods.extend(scaled);
    }
    prods
}

/// A tower overflowed the bit cap; `chain` is the 1-based index chain
/// `i_1 < … < i_n` whose value could not be represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerOverflow {
    pub chain: Vec<usize>,
    pub cap: u64,
}

impl From<TowerOverflow> for Error {
    fn from(o: TowerOverflow) -> Self {
        Error::BitCap {
            cap: o.cap,
            what: format!("tower over index chain {:?}", o.chain),
        }
    }
}

/// Finite exponential towers `x_{i_n}^(x_{i_{n-1}}^(…^x_{i_1}))` over
/// increasing chains `i_1 < … < i_n`. The largest index sits at the base.
///
/// Requires a distinct sequence with entries ≥ 2.
pub fn fep(s: &GenSeq, bit_cap: u64) -> Result<BTreeSet<BigUint>> {
    Ok(fep_with_chains(s, bit_cap)?.into_keys().collect())
}

/// Like [`fep`], mapping each value to the first chain (in enumeration
/// order) that produces it.
pub fn fep_with_chains(s: &GenSeq, bit_cap: u64) -> Result<BTreeMap<BigUint, Vec<usize>>> {
    if !s.distinct() {
        return Err(Error::invalid("FEP needs a sequence with the distinct flag set"));
    }
    if s.xs().iter().any(|&x| x < 2) {
        return Err(Error::invalid("FEP entries must be at least 2"));
    }
    // towers[j]: every tower whose base is x_{j+1}, with its chain.
    let mut towers: Vec<BTreeMap<BigUint, Vec<usize>>> = Vec::with_capacity(s.len());
    for (j, &x) in s.xs().iter().enumerate() {
        let base = BigUint::from(x);
        let mut here: BTreeMap<BigUint, Vec<usize>> = BTreeMap::new();
        here.insert(base.clone(), vec![j + 1]);
        for below in &towers {
            for (exp, chain) in below {
                let mut chain = chain.clone();
                chain.push(j + 1);
                let v = capped_pow(&base, exp, bit_cap).ok_or(TowerOverflow {
                    chain: chain.clone(),
                    cap: bit_cap,
                })?;
                here.entry(v).or_insert(chain);
            }
        }
        towers.push(here);
    }
    let mut all = BTreeMap::new();
    for t in towers {
        for (v, c) in t {
            all.entry(v).or_insert(c);
        }
    }
    Ok(all)
}

/// Ordered, disjoint 1-based index blocks `H_1 < H_2 < …` over a parent sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut prev_max = 0usize;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::invalid("blocks must be nonempty"));
            }
            if b.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!("block {b:?} is not strictly increasing")));
            }
            if b[0] == 0 || b[0] <= prev_max {
                return Err(Error::invalid(format!(
                    "block {b:?} does not start after the previous block"
                )));
            }
            prev_max = *b.last().expect("nonempty");
        }
        Ok(BlockPartition { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// `y_n = Σ_{t∈H_n} x_t`, or `None` if a block indexes past `x`.
    pub fn sums(&self, x: &GenSeq) -> Option<Vec<u64>> {
        self.blocks
            .iter()
            .map(|b| {
                b.iter().try_fold(0u64, |acc, &t| {
                    acc.checked_add(*x.xs().get(t.checked_sub(1)?)?)
                })
            })
            .collect()
    }
}

impl TryFrom<Vec<Vec<usize>>> for BlockPartition {
    type Error = Error;
    fn try_from(v: Vec<Vec<usize>>) -> Result<Self> {
        BlockPartition::new(v)
    }
}

impl From<BlockPartition> for Vec<Vec<usize>> {
    fn from(b: BlockPartition) -> Self {
        b.blocks
    }
}

/// Visit, in lexicographic order of the sorted index list, every block of
/// positions `≥ from` (0-based) of `x` whose entries sum to `target`.
/// Stops when `visit` returns `Some`.
pub(crate) fn for_each_block<T>(
    x: &[u64],
    from: usize,
    target: u64,
    visit: &mut dyn FnMut(&[usize]) -> Option<T>,
) -> Option<T> {
    fn rec<T>(
        x: &[u64],
        start: usize,
        remaining: u64,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> Option<T>,
    ) -> Option<T> {
        for i in start..x.len() {
            if x[i] > remaining {
                continue;
            }
            chosen.push(i + 1);
            let rest = remaining - x[i];
            let found = if rest == 0 {
                visit(chosen)
            } else {
                rec(x, i + 1, rest, chosen, visit)
            };
            chosen.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
    if target == 0 {
        return None;
    }
    rec(x, from, target, &mut Vec::new(), visit)
}

/// A block partition witnessing `y` as a sum subsystem of `x`, i.e.
/// `y_n = Σ_{t∈H_n} x_t` with `max H_n < min H_{n+1}`. The first one in
/// lexicographic order of block contents is returned.
pub fn is_sum_subsystem(y: &GenSeq, x: &GenSeq) -> Option<BlockPartition> {
    fn rec(y: &[u64], x: &[u64], from: usize, acc: &mut Vec<Vec<usize>>) -> bool {
        let Some((&first, rest)) = y.split_first() else {
            return true;
        };
        for_each_block(x, from, first, &mut |block| {
            acc.push(block.to_vec());
            let next = *block.last().expect("nonempty");
            if rec(rest, x, next, acc) {
                Some(())
            } else {
                acc.pop();
                None
            }
        })
        .is_some()
    }
    let mut acc = Vec::new();
    rec(y.xs(), x.xs(), 0, &mut acc).then_some(BlockPartition { blocks: acc })
}

/// A subset of the window `[1..n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WindowSet {
    n: usize,
    members: Vec<bool>,
}

impl WindowSet {
    pub fn empty(n: usize) -> Self {
        WindowSet {
            n,
            members: vec![false; n],
        }
    }

    pub fn full(n: usize) -> Self {
        WindowSet {
            n,
            members: vec![true; n],
        }
    }

    /// Members outside `[1..n]` are rejected.
    pub fn from_members(n: usize, members: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut set = Self::empty(n);
        for m in members {
            if m < 1 || m as usize > n {
                return Err(Error::invalid(format!("{m} lies outside the window [1..{n}]")));
            }
            set.members[m as usize - 1] = true;
        }
        Ok(set)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Self {
        WindowSet {
            n,
            members: (1..=n).map(f).collect(),
        }
    }

    pub fn window_end(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= 1 && (x as u64) <= self.n as u64 && self.members[x as usize - 1]
    }

    pub fn insert(&mut self, x: usize) {
        assert!((1..=self.n).contains(&x), "{x} outside [1..{}]", self.n);
        self.members[x - 1] = true;
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    pub fn complement(&self) -> WindowSet {
        WindowSet {
            n: self.n,
            members: self.members.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset(&self, other: &WindowSet) -> bool {
        self.members().all(|m| other.contains(m as i64))
    }
}

/// Gap and run length for the window largeness predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargenessParams {
    /// Every length-`g` subinterval must meet the set.
    pub g: usize,
    /// Minimum interval length.
    pub l: usize,
}

impl LargenessParams {
    pub fn new(g: usize, l: usize) -> Result<Self> {
        if g == 0 || l == 0 {
            return Err(Error::invalid("gap and length must be at least 1"));
        }
        if g > l {
            return Err(Error::invalid(format!("gap {g} exceeds interval length {l}")));
        }
        Ok(LargenessParams { g, l })
    }
}

/// `A` contains `l` consecutive integers.
pub fn is_thick(a: &WindowSet, l: usize) -> bool {
    let mut run = 0;
    for &b in &a.members {
        run = if b { run + 1 } else { 0 };
        if run >= l {
            return true;
        }
    }
    l == 0
}

/// Start positions `s` (1-based) whose interval `[s, s+g-1] ⊆ [1..n]` meets `A`.
fn gap_hits(a: &WindowSet, g: usize) -> Vec<bool> {
    let n = a.n;
    if g == 0 || g > n {
        return Vec::new();
    }
    let mut hits = Vec::with_capacity(n - g + 1);
    let mut count = a.members[..g].iter().filter(|&&b| b).count();
    hits.push(count > 0);
    for s in 1..=n - g {
        count -= a.members[s - 1] as usize;
        count += a.members[s + g - 1] as usize;
        hits.push(count > 0);
    }
    hits
}

/// Every length-`g` subinterval of `[1..n]` meets `A`. When `g > n` there
/// is no such subinterval and the window itself must meet `A`.
pub fn is_syndetic(a: &WindowSet, g: usize) -> bool {
    if g == 0 {
        return false;
    }
    if g > a.n {
        return !a.is_empty();
    }
    gap_hits(a, g).into_iter().all(|h| h)
}

/// The leftmost interval `I ⊆ [1..n]` with `|I| ≥ l` on which `A` has gaps
/// at most `g`, extended to the right as far as possible.
pub fn is_pws(a: &WindowSet, params: LargenessParams) -> Option<(usize, usize)> {
    let LargenessParams { g, l } = params;
    let hits = gap_hits(a, g);
    let mut s = 0;
    while s < hits.len() {
        if !hits[s] {
            s += 1;
            continue;
        }
        let mut e = s;
        while e + 1 < hits.len() && hits[e + 1] {
            e += 1;
        }
        // Starts s..=e are good, so [s+1, e+g] (1-based) has every
        // length-g subinterval meeting A.
        let (lo, hi) = (s + 1, e + g);
        if hi - lo + 1 >= l {
            return Some((lo, hi));
        }
        s = e + 1;
    }
    None
}

/// Outcome of an IP_r* check inside a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum IpStar {
    /// Every admissible `FS(⟨x_1..x_r⟩) ⊆ [1..n]` meets the set.
    Holds,
    /// The lexicographically least sequence whose finite sums miss the set.
    Counterexample { seq: GenSeq },
    /// No length-`r` sequence has its finite sums inside the window.
    Vacuous,
}

/// Does `A` meet `FS(⟨x_1..x_r⟩)` for every sequence whose finite sums
/// lie in `[1..n]`? Sequences are compared lexicographically; the least one
/// is nondecreasing, so only those are enumerated (strictly increasing when
/// `distinct`).
pub fn is_ip_r_star(a: &WindowSet, r: usize, distinct: bool, workers: usize) -> Result<IpStar> {
    if r == 0 {
        return Err(Error::invalid("r must be at least 1"));
    }
    let n = a.n as u64;
    let r64 = r as u64;
    let min_total = if distinct { r64 * (r64 + 1) / 2 } else { r64 };
    if min_total > n {
        return Ok(IpStar::Vacuous);
    }
    let miss = a.complement();
    // First entry x_1 ranges while the smallest completion still fits.
    let firsts: Vec<u64> = (1..=n)
        .filter(|&x1| {
            let tail = if distinct {
                (1..r64).map(|i| x1 + i).sum::<u64>()
            } else {
                x1 * (r64 - 1)
            };
            x1 + tail <= n
        })
        .collect();
    let cfg = crate::SearchConfig::default().with_workers(workers);
    let found = cfg.install(|| {
        firsts
            .par_iter()
            .map(|&x1| ip_counterexample_from(&miss, n, r, distinct, x1))
            .find_map_first(|c| c)
    });
    Ok(match found {
        Some(xs) => IpStar::Counterexample {
            seq: GenSeq::new(xs, distinct)?,
        },
        None => IpStar::Holds,
    })
}

/// Lex-least sequence starting with `x1` whose finite sums all lie in `miss`.
fn ip_counterexample_from(
    miss: &WindowSet,
    n: u64,
    r: usize,
    distinct: bool,
    x1: u64,
) -> Option<Vec<u64>> {
    fn rec(
        miss: &WindowSet,
        n: u64,
        r: usize,
        distinct: bool,
        seq: &mut Vec<u64>,
        sums: &mut Vec<u64>,
        total: u64,
    ) -> bool {
        if seq.len() == r {
            return true;
        }
        let last = *seq.last().expect("seeded");
        let lo = if distinct { last + 1 } else { last };
        let left = (r - seq.len()) as u64;
        for x in lo..=n {
            let min_rest = if distinct {
                (0..left).map(|i| x + i).sum::<u64>()
            } else {
                x * left
            };
            if total + min_rest > n {
                break;
            }
            // New sums: x itself and x + each old sum. All must avoid A.
            let ok = miss.contains(x as i64) && sums.iter().all(|&s| miss.contains((s + x) as i64));
            if !ok {
                continue;
            }
            let old = sums.len();
            let extra: Vec<u64> = sums.iter().map(|&s| s + x).collect();
            sums.push(x);
            sums.extend(extra);
            seq.push(x);
            if rec(miss, n, r, distinct, seq, sums, total + x) {
                return true;
            }
            seq.pop();
            sums.truncate(old);
        }
        false
    }
    if !miss.contains(x1 as i64) {
        return None;
    }
    let mut seq = vec![x1];
    let mut sums = vec![x1];
    rec(miss, n, r, distinct, &mut seq, &mut sums, x1).then_some(seq)
}

/// `x_{i_n}^(…^x_{i_1})` for an explicit chain, used to re-check FEP witnesses.
pub fn tower_value(s: &GenSeq, chain: &[usize], bit_cap: u64) -> Option<BigUint> {
    let mut it = chain.iter();
    let mut v = BigUint::from(*s.xs().get(it.next()?.checked_sub(1)?)?);
    for &i in it {
        let base = BigUint::from(*s.xs().get(i.checked_sub(1)?)?);
        v = capped_pow(&base, &v, bit_cap)?;
    }
    Some(v)
}

/// Number of increasing chains, `2^k − 1`.
pub fn chain_count(k: usize) -> BigUint {
    (BigUint::one() << k) - BigUint::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(xs: &[u64]) -> GenSeq {
        GenSeq::from_slice(xs).unwrap()
    }

    fn big_set(xs: &[u64]) -> BTreeSet<BigUint> {
        xs.iter().map(|&x| BigUint::from(x)).collect()
    }

    /// Oracle: explicit enumeration of all nonempty subsets by bitmask.
    fn subset_sums_oracle(xs: &[u64]) -> BTreeSet<u128> {
        (1u32..(1 << xs.len()))
            .map(|mask| {
                xs.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &x)| x as u128)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn fs_examples() {
        assert_eq!(fs(&seq(&[2, 3])), [2, 3, 5].into());
        assert_eq!(fs(&seq(&[1, 2, 4])), (1..=7).collect());
        assert_eq!(fs(&seq(&[9])), [9].into());
        assert_eq!(fs(&seq(&[1, 2, 4])), subset_sums_oracle(&[1, 2, 4]));
    }

    #[test]
    fn x_alpha_examples() {
        assert_eq!(x_alpha(&seq(&[2, 3, 5]), &[1, 3]).unwrap(), 7);
        assert_eq!(x_alpha(&seq(&[4]), &[1]).unwrap(), 4);
        assert_eq!(x_alpha(&seq(&[1, 2, 4]), &[1, 2, 3]).unwrap(), 7);
        assert!(x_alpha(&seq(&[1, 2]), &[]).is_err());
        assert!(x_alpha(&seq(&[1, 2]), &[3]).is_err());
        assert!(x_alpha(&seq(&[1, 2]), &[0]).is_err());
    }

    #[test]
    fn fp_examples() {
        assert_eq!(fp(&seq(&[2, 3])), big_set(&[2, 3, 6]));
        assert_eq!(fp(&seq(&[2, 2])), big_set(&[2, 4]));
        assert_eq!(fp(&seq(&[2, 3, 5])), big_set(&[2, 3, 5, 6, 10, 15, 30]));
    }

    #[test]
    fn fep_examples() {
        let cap = crate::config::DEFAULT_BIT_CAP;
        assert_eq!(fep(&seq(&[2, 3]), cap).unwrap(), big_set(&[2, 3, 9]));
        assert_eq!(fep(&seq(&[2]), cap).unwrap(), big_set(&[2]));
        assert_eq!(
            fep(&seq(&[2, 3, 4]), cap).unwrap(),
            big_set(&[2, 3, 4, 9, 16, 64, 262144])
        );
    }

    #[test]
    fn fep_chain_bookkeeping() {
        let cap = crate::config::DEFAULT_BIT_CAP;
        let s = seq(&[2, 3, 4]);
        let chains = fep_with_chains(&s, cap).unwrap();
        assert_eq!(chains[&BigUint::from(262144u32)], vec![1, 2, 3]);
        for (v, c) in &chains {
            assert_eq!(&tower_value(&s, c, cap).unwrap(), v);
        }
    }

    #[test]
    fn fep_overflow_names_chain() {
        // 100^3 fits in 32 bits, 100^(3^2) does not
        let err = fep(&seq(&[2, 3, 100]), 32).unwrap_err();
        match err {
            Error::BitCap { what, .. } => assert!(what.contains("[1, 2, 3]"), "{what}"),
            e => panic!("unexpected {e:?}"),
        }
        assert!(fep(&GenSeq::new(vec![2, 2], false).unwrap(), 64).is_err());
        assert!(fep(&seq(&[1, 3]), 64).is_err());
    }

    #[test]
    fn sum_subsystem_examples() {
        let b = is_sum_subsystem(&seq(&[3, 12]), &seq(&[1, 2, 4, 8])).unwrap();
        assert_eq!(b.blocks(), &[vec![1, 2], vec![3, 4]]);
        let x = seq(&[5, 1, 7]);
        let id = is_sum_subsystem(&x, &x).unwrap();
        assert_eq!(id.blocks(), &[vec![1], vec![2], vec![3]]);
        assert!(is_sum_subsystem(&seq(&[5]), &seq(&[1, 2])).is_none());
        // Order matters: 4 must come from a block after the one giving 3.
        assert!(is_sum_subsystem(&seq(&[4, 3]), &seq(&[1, 2, 4])).is_none());
    }

    #[test]
    fn block_partition_validation() {
        assert!(BlockPartition::new(vec![vec![1, 2], vec![2, 3]]).is_err());
        assert!(BlockPartition::new(vec![vec![3], vec![1]]).is_err());
        assert!(BlockPartition::new(vec![vec![]]).is_err());
        assert!(BlockPartition::new(vec![vec![0]]).is_err());
    }

    fn odds(n: usize) -> WindowSet {
        WindowSet::from_fn(n, |i| i % 2 == 1)
    }

    fn evens(n: usize) -> WindowSet {
        WindowSet::from_fn(n, |i| i % 2 == 0)
    }

    #[test]
    fn thick_examples() {
        assert!(is_thick(&WindowSet::full(10), 10));
        assert!(!is_thick(&odds(10), 2));
        assert!(is_thick(&WindowSet::from_members(10, [3, 4, 5, 9]).unwrap(), 3));
    }

    #[test]
    fn syndetic_examples() {
        assert!(is_syndetic(&evens(10), 2));
        assert!(!is_syndetic(&evens(10), 1));
        let ends = WindowSet::from_members(10, [1, 10]).unwrap();
        // [2..9] misses both members.
        assert!(!is_syndetic(&ends, 8));
        assert!(is_syndetic(&ends, 9));
        assert!(is_syndetic(&ends, 20));
        assert!(!is_syndetic(&WindowSet::empty(5), 20));
    }

    #[test]
    fn pws_examples() {
        let p = |g, l| LargenessParams::new(g, l).unwrap();
        assert_eq!(is_pws(&WindowSet::full(12), p(1, 4)), Some((1, 12)));
        assert_eq!(is_pws(&odds(12), p(2, 6)), Some((1, 12)));
        assert_eq!(is_pws(&WindowSet::empty(12), p(1, 1)), None);
        let a = WindowSet::from_members(20, [2, 3, 9, 11, 12, 13, 14]).unwrap();
        assert_eq!(is_pws(&a, p(2, 5)), Some((8, 15)));
        assert_eq!(is_pws(&a, p(1, 4)), Some((11, 14)));
        assert_eq!(is_pws(&a, p(1, 5)), None);
        assert!(LargenessParams::new(3, 2).is_err());
    }

    #[test]
    fn ip_star_examples() {
        assert_eq!(is_ip_r_star(&WindowSet::full(20), 2, true, 1).unwrap(), IpStar::Holds);
        assert_eq!(
            is_ip_r_star(&odds(20), 2, true, 1).unwrap(),
            IpStar::Counterexample { seq: seq(&[2, 4]) }
        );
        let a = WindowSet::from_fn(20, |i| i != 1);
        assert_eq!(
            is_ip_r_star(&a, 1, true, 1).unwrap(),
            IpStar::Counterexample { seq: seq(&[1]) }
        );
        assert_eq!(is_ip_r_star(&WindowSet::full(5), 3, true, 1).unwrap(), IpStar::Vacuous);
        assert_eq!(is_ip_r_star(&WindowSet::full(3), 3, false, 1).unwrap(), IpStar::Holds);
        assert_eq!(
            is_ip_r_star(&odds(20), 2, false, 1).unwrap(),
            IpStar::Counterexample { seq: GenSeq::new(vec![2, 2], false).unwrap() }
        );
        assert!(is_ip_r_star(&odds(20), 0, true, 1).is_err());
    }

    /// Oracle: every tuple (any order) with FS inside the window, checked
    /// against the complement directly.
    fn ip_star_oracle(a: &WindowSet, r: usize, distinct: bool) -> Option<Option<Vec<u64>>> {
        let n = a.window_end() as u64;
        let mut any = false;
        let mut best: Option<Vec<u64>> = None;
        let total = (n as usize).pow(r as u32);
        for code in 0..total {
            let mut xs = Vec::with_capacity(r);
            let mut c = code;
            for _ in 0..r {
                xs.push((c % n as usize) as u64 + 1);
                c /= n as usize;
            }
            xs.reverse();
            if distinct && xs.iter().collect::<BTreeSet<_>>().len() != r {
                continue;
            }
            let sums = subset_sums_oracle(&xs);
            if sums.iter().any(|&s| s > n as u128) {
                continue;
            }
            any = true;
            if sums.iter().all(|&s| !a.contains(s as i64)) && best.as_ref().is_none_or(|b| xs < *b) {
                best = Some(xs);
            }
        }
        any.then_some(best)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ip_star_matches_oracle(
            n in 1usize..=14,
            bits in prop::collection::vec(any::<bool>(), 14),
            r in 1usize..=3,
            distinct in any::<bool>(),
        ) {
            let a = WindowSet::from_fn(n, |i| bits[i - 1]);
            let got = is_ip_r_star(&a, r, distinct, 2).unwrap();
            let want = match ip_star_oracle(&a, r, distinct) {
                None => IpStar::Vacuous,
                Some(None) => IpStar::Holds,
                Some(Some(xs)) => IpStar::Counterexample { seq: GenSeq::new(xs, distinct).unwrap() },
            };
            prop_assert_eq!(got, want);
        }

        #[test]
        fn fs_matches_oracle(xs in prop::collection::vec(1u64..40, 1..8)) {
            let s = GenSeq::new(xs.clone(), false).unwrap();
            let got = fs(&s);
            prop_assert_eq!(&got, &subset_sums_oracle(&xs));
            prop_assert!(got.len() < (1 << xs.len()));
        }

        #[test]
        fn fs_size_is_full_for_powers_of_two(k in 1usize..12) {
            let s = GenSeq::from_slice(&(0..k).map(|i| 1u64 << i).collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(fs(&s).len(), (1 << k) - 1);
        }

        #[test]
        fn largeness_is_monotone(
            n in 1usize..=24,
            bits in prop::collection::vec(any::<bool>(), 24),
            add in 1usize..=24,
            g in 1usize..=4,
            extra in 0usize..=6,
        ) {
            let a = WindowSet::from_fn(n, |i| bits[i - 1]);
            let mut b = a.clone();
            if add <= n { b.insert(add); }
            let params = LargenessParams::new(g, g + extra).unwrap();
            prop_assert!(!is_thick(&a, g + extra) || is_thick(&b, g + extra));
            prop_assert!(!is_syndetic(&a, g) || is_syndetic(&b, g));
            prop_assert!(is_pws(&a, params).is_none() || is_pws(&b, params).is_some());
            for r in 1..=2 {
                if is_ip_r_star(&a, r, true, 1).unwrap() == IpStar::Holds {
                    prop_assert_eq!(is_ip_r_star(&b, r, true, 1).unwrap(), IpStar::Holds);
                }
            }
            if is_syndetic(&a, g) && g <= n {
                for l in g..=n {
                    prop_assert!(is_pws(&a, LargenessParams::new(g, l).unwrap()).is_some());
                }
            }
        }

        #[test]
        fn sum_subsystem_witness_is_sound(
            xs in prop::collection::vec(1u64..12, 1..7),
            ys in prop::collection::vec(1u64..30, 1..4),
        ) {
            let x = GenSeq::new(xs, false).unwrap();
            let y = GenSeq::new(ys, false).unwrap();
            if let Some(b) = is_sum_subsystem(&y, &x) {
                prop_assert_eq!(b.sums(&x).unwrap(), y.xs().to_vec());
                prop_assert!(BlockPartition::new(b.blocks().to_vec()).is_ok());
                prop_assert!(fs(&y).is_subset(&fs(&x)));
            }
        }
    }
}
