//! Hales–Jewett word spaces `[t]^N`, polynomial Hales–Jewett cubes
//! `Q(N) = [q]^N × [q]^{N×N} × … × [q]^{N^d}`, the `⊕` overwrite, and the
//! multilinear map sending cube points to integers.
//!
//! Canonical orders, fixed so that witnesses are reproducible:
//! * points: row-major, first coordinate most significant, letters ascending;
//! * variable words: lexicographic with `v < 1 < … < t`;
//! * `(a, γ)` pairs: `γ` by size then lexicographically, then `a` in point order.

use crate::bigtower::Rule;
use crate::combinatorics::GenSeq;
use crate::config::SearchConfig;
use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A word over `[t] ∪ {v}`. Letter `0` stands for the variable `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    t: u32,
    letters: Vec<u32>,
}

impl Word {
    pub fn new(t: u32, letters: Vec<u32>) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("alphabet size must be at least 1"));
        }
        if let Some(&bad) = letters.iter().find(|&&l| l > t) {
            return Err(Error::invalid(format!("letter {bad} outside alphabet [1..{t}]")));
        }
        Ok(Word { t, letters })
    }

    /// Parse a compact word such as `1v2v` (letters must be single digits)
    /// or a comma-separated one such as `1,v,12`.
    pub fn parse(t: u32, text: &str) -> Result<Self> {
        let tokens: Vec<String> = if text.contains(',') {
            text.split(',').map(|s| s.trim().to_string()).collect()
        } else {
            text.chars().filter(|c| !c.is_whitespace()).map(String::from).collect()
        };
        let letters = tokens
            .iter()
            .map(|tok| match tok.as_str() {
                "v" => Ok(0),
                s => s
                    .parse::<u32>()
                    .ok()
                    .filter(|&l| l >= 1)
                    .ok_or_else(|| Error::invalid(format!("bad letter {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(t, letters)
    }

    pub fn alphabet(&self) -> u32 {
        self.t
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_variable(&self) -> bool {
        self.letters.contains(&0)
    }

    /// Replace every `v` by `a`.
    pub fn substitute(&self, a: u32) -> Result<Word> {
        if a == 0 || a > self.t {
            return Err(Error::invalid(format!("letter {a} outside [1..{}]", self.t)));
        }
        if !self.is_variable() {
            return Err(Error::invalid("substitution needs a variable word"));
        }
        Ok(Word {
            t: self.t,
            letters: self.letters.iter().map(|&l| if l == 0 { a } else { l }).collect(),
        })
    }

    /// The combinatorial line `{w(a) : a ∈ [t]}`.
    pub fn line(&self) -> Result<Vec<Word>> {
        (1..=self.t).map(|a| self.substitute(a)).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.t > 9 { "," } else { "" };
        for (i, &l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            if l == 0 {
                f.write_str("v")?;
            } else {
                write!(f, "{l}")?;
            }
        }
        Ok(())
    }
}

/// Shape of a point space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum CubeShape {
    /// `[t]^N`.
    Hj { t: u32, n: usize },
    /// `Q(N)` with values in `[q]` and levels `1..=d`.
    Phj { q: u32, n: usize, d: usize },
}

impl CubeShape {
    /// Values per coordinate.
    pub fn alphabet(&self) -> u32 {
        match *self {
            CubeShape::Hj { t, .. } => t,
            CubeShape::Phj { q, .. } => q,
        }
    }

    /// Flattened coordinate count (`N` or `N + N² + … + N^d`).
    pub fn coords(&self) -> usize {
        match *self {
            CubeShape::Hj { n, .. } => n,
            CubeShape::Phj { n, d, .. } => (1..=d as u32).map(|j| n.pow(j)).sum(),
        }
    }

    pub fn num_points(&self) -> BigUint {
        num_traits::pow(BigUint::from(self.alphabet()), self.coords())
    }

    /// Point count when it is at most `cap`.
    pub fn dense_points(&self, cap: u64) -> Result<usize> {
        let count = self.num_points();
        match count.to_u64() {
            Some(c) if c <= cap => Ok(c as usize),
            _ => Err(Error::ResourceCap(format!(
                "point space has {count} points, dense cap is {cap}"
            ))),
        }
    }

    /// 0-based rank of a flattened point in canonical order.
    pub fn rank(&self, point: &[u32]) -> BigUint {
        let base = BigUint::from(self.alphabet());
        point
            .iter()
            .fold(BigUint::zero(), |acc, &v| acc * &base + BigUint::from(v - 1))
    }

    fn rank_usize(&self, point: &[u32]) -> usize {
        let base = self.alphabet() as usize;
        point.iter().fold(0usize, |acc, &v| acc * base + (v as usize - 1))
    }

    /// Point with the given 0-based rank.
    pub fn unrank(&self, mut rank: usize) -> Vec<u32> {
        let base = self.alphabet() as usize;
        let mut p = vec![1u32; self.coords()];
        for slot in p.iter_mut().rev() {
            *slot = (rank % base) as u32 + 1;
            rank /= base;
        }
        p
    }
}

/// Rule colorings of point spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CubeRule {
    /// Value of flattened coordinate `i` (1-based) minus one, reduced mod `r`.
    Coord(usize),
    /// Sum of all coordinates mod `m`.
    Sum(u32),
    /// An integer rule applied to the 1-based canonical rank.
    Rank(Rule),
}

impl CubeRule {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let err = || Error::RuleSyntax {
            text: text.to_string(),
            reason: "expected coord:i, sum:m or rank:<rule>".into(),
        };
        if let Some(i) = t.strip_prefix("coord:") {
            let i: usize = i.trim().parse().map_err(|_| err())?;
            if i == 0 {
                return Err(err());
            }
            Ok(CubeRule::Coord(i))
        } else if let Some(m) = t.strip_prefix("sum:") {
            let m: u32 = m.trim().parse().map_err(|_| err())?;
            if m == 0 {
                return Err(err());
            }
            Ok(CubeRule::Sum(m))
        } else if let Some(r) = t.strip_prefix("rank:") {
            Ok(CubeRule::Rank(r.parse()?))
        } else {
            Err(err())
        }
    }
}

impl fmt::Display for CubeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CubeRule::Coord(i) => write!(f, "coord:{i}"),
            CubeRule::Sum(m) => write!(f, "sum:{m}"),
            CubeRule::Rank(r) => write!(f, "rank:{r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CubeColors {
    /// One color per point, in canonical order.
    Dense(Vec<u8>),
    Rule(CubeRule),
}

/// A total coloring of a point space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeColoring {
    shape: CubeShape,
    r: usize,
    colors: CubeColors,
}

impl CubeColoring {
    pub fn dense(shape: CubeShape, r: usize, colors: Vec<u8>, cap: u64) -> Result<Self> {
        let points = shape.dense_points(cap)?;
        if r == 0 {
            return Err(Error::invalid("color count must be at least 1"));
        }
        if colors.len() != points {
            return Err(Error::invalid(format!(
                "expected {points} point colors, got {}",
                colors.len()
            )));
        }
        if let Some(&c) = colors.iter().find(|&&c| c as usize >= r) {
            return Err(Error::invalid(format!("color {c} is not below r = {r}")));
        }
        Ok(CubeColoring {
            shape,
            r,
            colors: CubeColors::Dense(colors),
        })
    }

    pub fn rule(shape: CubeShape, r: usize, rule: CubeRule) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("color count must be at least 1"));
        }
        match &rule {
            CubeRule::Coord(i) if *i > shape.coords() => {
                return Err(Error::invalid(format!(
                    "coordinate {i} outside 1..={}",
                    shape.coords()
                )))
            }
            CubeRule::Rank(rr) if rr.colors() > r => {
                return Err(Error::invalid(format!("rank rule uses more than {r} colors")))
            }
            _ => {}
        }
        Ok(CubeColoring {
            shape,
            r,
            colors: CubeColors::Rule(rule),
        })
    }

    /// Color every point by `f`.
    pub fn from_fn(shape: CubeShape, r: usize, cap: u64, f: impl Fn(&[u32]) -> usize) -> Result<Self> {
        let points = shape.dense_points(cap)?;
        let colors = (0..points).map(|k| f(&shape.unrank(k)) as u8).collect();
        Self::dense(shape, r, colors, cap)
    }

    pub fn shape(&self) -> CubeShape {
        self.shape
    }

    pub fn colors(&self) -> usize {
        self.r
    }

    pub fn data(&self) -> &CubeColors {
        &self.colors
    }

    /// Color of a flattened point.
    pub fn color(&self, point: &[u32]) -> usize {
        match &self.colors {
            CubeColors::Dense(cs) => cs[self.shape.rank_usize(point)] as usize,
            CubeColors::Rule(CubeRule::Coord(i)) => (point[i - 1] as usize - 1) % self.r,
            CubeColors::Rule(CubeRule::Sum(m)) => {
                (point.iter().map(|&v| v as u64).sum::<u64>() % *m as u64) as usize % self.r
            }
            CubeColors::Rule(CubeRule::Rank(rule)) => {
                rule.color(&(self.shape.rank(point) + 1u32))
            }
        }
    }
}

/// Every variable word of length `n` over `[t]`, in canonical order.
pub fn variable_words(t: u32, n: usize) -> impl Iterator<Item = Word> {
    let mut digits = vec![0u32; n];
    let mut done = n == 0;
    std::iter::from_fn(move || loop {
        if done {
            return None;
        }
        let current = digits.clone();
        // odometer, last position fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                done = true;
                break;
            }
            pos -= 1;
            if digits[pos] < t {
                digits[pos] += 1;
                break;
            }
            digits[pos] = 0;
        }
        if current.contains(&0) {
            return Some(Word { t, letters: current });
        }
    })
}

/// First variable word whose line is monochromatic.
pub fn hj_search(coloring: &CubeColoring) -> Result<Option<Word>> {
    let CubeShape::Hj { t, n } = coloring.shape() else {
        return Err(Error::invalid("hj_search needs a word-space coloring"));
    };
    for w in variable_words(t, n) {
        let c0 = coloring.color(&line_point(&w, 1));
        if (2..=t).all(|a| coloring.color(&line_point(&w, a)) == c0) {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn line_point(w: &Word, a: u32) -> Vec<u32> {
    w.letters.iter().map(|&l| if l == 0 { a } else { l }).collect()
}

/// Outcome of a Hales–Jewett number search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HjNumber {
    /// Least `N ≤ n_max` forcing a monochromatic line, if found.
    pub n: Option<usize>,
    /// For each `N` below the answer, a coloring of `[t]^N` with no monochromatic line.
    pub avoiding: Vec<Vec<u8>>,
    pub nodes: u64,
}

/// Least `N ≤ n_max` such that every `r`-coloring of `[t]^N` has a
/// monochromatic line, by exhaustive enumeration with colors renamed by
/// first use.
pub fn hj_number(r: usize, t: u32, n_max: usize, cfg: &SearchConfig) -> Result<HjNumber> {
    if r == 0 || t == 0 {
        return Err(Error::invalid("r and t must be at least 1"));
    }
    let mut nodes = 0u64;
    let mut avoiding = Vec::new();
    for n in 1..=n_max {
        let shape = CubeShape::Hj { t, n };
        let points = shape.dense_points(cfg.max_points)?;
        let closing = closing_lines(&shape, points);
        let mut colors = vec![0u8; points];
        match avoid_lines(&closing, r, &mut colors, 0, 0, &mut nodes, cfg.max_nodes) {
            Some(true) => avoiding.push(colors),
            Some(false) => {
                return Ok(HjNumber {
                    n: Some(n),
                    avoiding,
                    nodes,
                })
            }
            None => {
                return Err(Error::ResourceCap(format!(
                    "hj_number({r},{t}) visited more than {} nodes at N = {n}",
                    cfg.max_nodes
                )))
            }
        }
    }
    Ok(HjNumber {
        n: None,
        avoiding,
        nodes,
    })
}

/// For each point (by rank), the lines whose largest point it is, as the
/// ranks of their other points.
fn closing_lines(shape: &CubeShape, points: usize) -> Vec<Vec<Vec<usize>>> {
    let t = shape.alphabet();
    (0..points)
        .map(|k| {
            let p = shape.unrank(k);
            let top: Vec<usize> = (0..p.len()).filter(|&i| p[i] == t).collect();
            let mut lines = Vec::new();
            for mask in 1u64..(1 << top.len()) {
                let others = (1..t)
                    .map(|a| {
                        let mut q = p.clone();
                        for (b, &i) in top.iter().enumerate() {
                            if mask >> b & 1 == 1 {
                                q[i] = a;
                            }
                        }
                        shape.rank_usize(&q)
                    })
                    .collect();
                lines.push(others);
            }
            lines
        })
        .collect()
}

/// `Some(true)` if the coloring of `colors[..]` can be completed without a
/// monochromatic line (left in `colors`), `Some(false)` if not, `None`
/// when the node budget runs out.
fn avoid_lines(
    closing: &[Vec<Vec<usize>>],
    r: usize,
    colors: &mut [u8],
    k: usize,
    used: usize,
    nodes: &mut u64,
    budget: u64,
) -> Option<bool> {
    if k == colors.len() {
        return Some(true);
    }
    let limit = r.min(used + 1);
    for c in 0..limit {
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        let c = c as u8;
        let closes = closing[k]
            .iter()
            .any(|others| others.iter().all(|&o| colors[o] == c));
        if closes {
            continue;
        }
        colors[k] = c;
        if avoid_lines(closing, r, colors, k + 1, used.max(c as usize + 1), nodes, budget)? {
            return Some(true);
        }
    }
    Some(false)
}

/// A point of `Q(N)`: level `j` (1-based) holds `N^j` values indexed
/// row-major by `ī ∈ [N]^j`.
///
/// Points built with [`PhjPoint::new`] take values in `[1..q]`; formal points
/// from [`PhjPoint::formal`] may hold any integers (used for masking).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhjPoint {
    n: usize,
    levels: Vec<Vec<i64>>,
}

impl PhjPoint {
    pub fn new(q: u32, n: usize, levels: Vec<Vec<i64>>) -> Result<Self> {
        let p = Self::formal(n, levels)?;
        if let Some(v) = p.levels.iter().flatten().find(|&&v| v < 1 || v > q as i64) {
            return Err(Error::invalid(format!("value {v} outside [1..{q}]")));
        }
        Ok(p)
    }

    pub fn formal(n: usize, levels: Vec<Vec<i64>>) -> Result<Self> {
        if n == 0 || levels.is_empty() {
            return Err(Error::invalid("point needs N ≥ 1 and at least one level"));
        }
        for (j, lvl) in levels.iter().enumerate() {
            let want = n.pow(j as u32 + 1);
            if lvl.len() != want {
                return Err(Error::invalid(format!(
                    "level {} has {} entries, expected {want}",
                    j + 1,
                    lvl.len()
                )));
            }
        }
        Ok(PhjPoint { n, levels })
    }

    /// Split a flattened point into levels.
    pub fn from_flat(n: usize, d: usize, flat: &[i64]) -> Result<Self> {
        let mut levels = Vec::with_capacity(d);
        let mut at = 0;
        for j in 1..=d as u32 {
            let len = n.pow(j);
            let lvl = flat
                .get(at..at + len)
                .ok_or_else(|| Error::invalid("flattened point too short"))?;
            levels.push(lvl.to_vec());
            at += len;
        }
        if at != flat.len() {
            return Err(Error::invalid("flattened point too long"));
        }
        Self::formal(n, levels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<i64>] {
        &self.levels
    }

    pub fn flat(&self) -> Vec<i64> {
        self.levels.iter().flatten().copied().collect()
    }

    /// Flattened point as cube letters; `None` if any value is outside `[1..q]`.
    pub fn letters(&self, q: u32) -> Option<Vec<u32>> {
        self.levels
            .iter()
            .flatten()
            .map(|&v| (1..=q as i64).contains(&v).then_some(v as u32))
            .collect()
    }
}

impl fmt::Display for PhjPoint {
    /// Levels separated by `;`, values by `,`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self
            .levels
            .iter()
            .map(|l| l.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
            .collect();
        f.write_str(&s.join(";"))
    }
}

/// A nonempty `γ ⊆ [N]`, stored sorted and 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarSet {
    gamma: Vec<usize>,
}

impl VarSet {
    pub fn new(n: usize, mut gamma: Vec<usize>) -> Result<Self> {
        gamma.sort_unstable();
        gamma.dedup();
        if gamma.is_empty() || gamma[0] == 0 || *gamma.last().expect("nonempty") > n {
            return Err(Error::invalid(format!("γ = {gamma:?} must be a nonempty subset of [1..{n}]")));
        }
        Ok(VarSet { gamma })
    }

    pub fn members(&self) -> &[usize] {
        &self.gamma
    }

    /// Is the multi-index with row-major position `idx` at level `j` in `γ^j`?
    fn covers(&self, n: usize, j: usize, mut idx: usize) -> bool {
        for _ in 0..j {
            if self.gamma.binary_search(&(idx % n + 1)).is_err() {
                return false;
            }
            idx /= n;
        }
        true
    }

    /// For each flattened coordinate of `Q(N)` with `d` levels: `Some(j)`
    /// (1-based level) if it lies in `γ^j`, else `None`.
    pub fn mask(&self, n: usize, d: usize) -> Vec<Option<usize>> {
        (1..=d)
            .flat_map(|j| (0..n.pow(j as u32)).map(move |idx| (j, idx)))
            .map(|(j, idx)| self.covers(n, j, idx).then_some(j))
            .collect()
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.gamma.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// Nonempty subsets of `[n]` by size, then lexicographically.
pub fn var_sets(n: usize) -> Vec<VarSet> {
    let mut out = Vec::new();
    for size in 1..=n {
        let mut idx: Vec<usize> = (1..=size).collect();
        loop {
            out.push(VarSet { gamma: idx.clone() });
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for k in i..size {
                idx[k] = idx[k - 1] + 1;
            }
        }
    }
    out
}

/// `a ⊕ x_1 γ ⊕ x_2 (γ×γ) ⊕ … ⊕ x_d γ^d`: level-`j` coordinates indexed by
/// `γ^j` become `x_j`, all others keep `a`'s values.
pub fn phj_oplus(q: u32, a: &PhjPoint, gamma: &VarSet, xs: &[i64]) -> Result<PhjPoint> {
    if let Some(x) = xs.iter().find(|&&x| x < 1 || x > q as i64) {
        return Err(Error::invalid(format!("x = {x} outside [1..{q}]")));
    }
    overwrite(a, gamma, xs)
}

fn overwrite(a: &PhjPoint, gamma: &VarSet, xs: &[i64]) -> Result<PhjPoint> {
    if xs.len() != a.d() {
        return Err(Error::invalid(format!("need {} values, got {}", a.d(), xs.len())));
    }
    if gamma.members().last().is_some_and(|&m| m > a.n) {
        return Err(Error::invalid("γ exceeds [N]"));
    }
    let mut b = a.clone();
    for (j, lvl) in b.levels.iter_mut().enumerate() {
        for (idx, v) in lvl.iter_mut().enumerate() {
            if gamma.covers(a.n, j + 1, idx) {
                *v = xs[j];
            }
        }
    }
    Ok(b)
}

/// First `(a, γ)` whose pattern `{a ⊕ x_1γ ⊕ … ⊕ x_dγ^d : x ∈ [q]^d}` is
/// monochromatic.
pub fn phj_search(coloring: &CubeColoring, cfg: &SearchConfig) -> Result<Option<(PhjPoint, VarSet)>> {
    let CubeShape::Phj { q, n, d } = coloring.shape() else {
        return Err(Error::invalid("phj_search needs a Q(N) coloring"));
    };
    let shape = coloring.shape();
    let coords = shape.coords();
    let gammas = var_sets(n);
    let points = shape.num_points();
    let scan_limit = points.to_u64().unwrap_or(u64::MAX);
    let found = cfg.install(|| {
        gammas
            .par_iter()
            .map(|gamma| -> Result<Option<Vec<u32>>> {
                let mask = gamma.mask(n, d);
                let mut a = vec![1u32; coords];
                let mut scanned = 0u64;
                loop {
                    if pattern_is_mono(coloring, &a, &mask, q, d) {
                        return Ok(Some(a));
                    }
                    scanned += 1;
                    if scanned > cfg.max_nodes {
                        return Err(Error::ResourceCap(format!(
                            "scanned {} points for γ = {gamma} without finishing",
                            cfg.max_nodes
                        )));
                    }
                    if !next_point(&mut a, q) || scanned >= scan_limit {
                        return Ok(None);
                    }
                }
            })
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            })
    });
    match found {
        None => Ok(None),
        Some(Err(e)) => Err(e),
        Some(Ok(None)) => unreachable!("filtered above"),
        Some(Ok(Some(a))) => {
            let flat: Vec<i64> = a.iter().map(|&v| v as i64).collect();
            let point = PhjPoint::from_flat(n, d, &flat)?;
            // find_map_first keeps γ order; recover which γ matched
            let gamma = gammas
                .into_iter()
                .find(|g| pattern_is_mono(coloring, &a, &g.mask(n, d), q, d))
                .expect("matched γ");
            Ok(Some((point, gamma)))
        }
    }
}

fn next_point(a: &mut [u32], q: u32) -> bool {
    for slot in a.iter_mut().rev() {
        if *slot < q {
            *slot += 1;
            return true;
        }
        *slot = 1;
    }
    false
}

fn pattern_is_mono(coloring: &CubeColoring, a: &[u32], mask: &[Option<usize>], q: u32, d: usize) -> bool {
    let mut b = a.to_vec();
    let mut xs = vec![1u32; d];
    let mut first = None;
    loop {
        for (slot, m) in b.iter_mut().zip(mask) {
            if let Some(j) = m {
                *slot = xs[j - 1];
            }
        }
        let c = coloring.color(&b);
        match first {
            None => first = Some(c),
            Some(c0) if c0 != c => return false,
            _ => {}
        }
        if !next_point(&mut xs, q) {
            return true;
        }
    }
}

/// The multilinear map `γ(a) = Σ_i a_i x_i + Σ_{i,j} a_{ij} x_i x_j + …`
/// for a fixed generator sequence, with per-coordinate weights precomputed.
#[derive(Clone, Debug)]
pub struct Embedder {
    n: usize,
    d: usize,
    weights: Vec<BigInt>,
    small: Option<Vec<i64>>,
}

impl Embedder {
    pub fn new(n: usize, d: usize, xs: &GenSeq) -> Result<Self> {
        if xs.len() != n {
            return Err(Error::invalid(format!(
                "generator sequence has length {}, expected N = {n}",
                xs.len()
            )));
        }
        let x: Vec<BigInt> = xs.xs().iter().map(|&v| BigInt::from(v)).collect();
        let mut weights = Vec::new();
        for j in 1..=d {
            for mut idx in 0..n.pow(j as u32) {
                let mut w = BigInt::from(1);
                for _ in 0..j {
                    w *= &x[idx % n];
                    idx /= n;
                }
                weights.push(w);
            }
        }
        let small = weights.iter().map(ToPrimitive::to_i64).collect();
        Ok(Embedder { n, d, weights, small })
    }

    pub fn weights(&self) -> &[BigInt] {
        &self.weights
    }

    pub fn embed(&self, a: &PhjPoint) -> Result<BigInt> {
        if a.n != self.n || a.d() != self.d {
            return Err(Error::invalid("point shape does not match the embedding"));
        }
        Ok(a
            .levels
            .iter()
            .flatten()
            .zip(&self.weights)
            .map(|(&v, w)| w * v)
            .sum())
    }

    /// Fast path over a flattened point; `None` on i64 overflow.
    pub fn embed_flat_i64(&self, flat: &[i64]) -> Option<i64> {
        let ws = self.small.as_ref()?;
        flat.iter()
            .zip(ws)
            .try_fold(0i64, |acc, (&v, &w)| acc.checked_add(v.checked_mul(w)?))
    }
}

/// `γ(a)` for the generators `xs`, whose length must be `N`.
pub fn gamma_embed(a: &PhjPoint, xs: &GenSeq) -> Result<BigInt> {
    Embedder::new(a.n, a.d(), xs)?.embed(a)
}

/// Image of a `⊕` pattern point, with its off-`γ` part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedPattern {
    /// `γ(a)` with every `γ^j`-indexed coordinate set to 0.
    #[serde(with = "crate::bignum::big")]
    pub base: BigInt,
    /// `γ(a ⊕ c_1γ ⊕ … ⊕ c_dγ^d)`.
    #[serde(with = "crate::bignum::big")]
    pub value: BigInt,
    /// `x_γ = Σ_{i∈γ} x_i`.
    #[serde(with = "crate::bignum::big")]
    pub step: BigInt,
}

/// Both sides of the embedding-line identity. The coefficients `c_j` may be
/// any integers here (they play the role of polynomial coefficients).
pub fn embedded_pattern(a: &PhjPoint, gamma: &VarSet, xs: &GenSeq, coeffs: &[i64]) -> Result<EmbeddedPattern> {
    let emb = Embedder::new(a.n, a.d(), xs)?;
    let b = overwrite(a, gamma, coeffs)?;
    let masked = overwrite(a, gamma, &vec![0; a.d()])?;
    let step = gamma.members().iter().map(|&i| BigInt::from(xs.xs()[i - 1])).sum();
    Ok(EmbeddedPattern {
        base: emb.embed(&masked)?,
        value: emb.embed(&b)?,
        step,
    })
}

/// Bounds for the exhaustive embedding-line identity check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityLimits {
    pub n_max: usize,
    pub d_max: usize,
    pub q_max: u32,
    pub x_max: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

/// Check `γ(a ⊕ c_1γ ⊕ … ⊕ c_dγ^d) = base(a, γ) + Σ_j c_j (x_γ)^j` for every
/// `N ≤ n_max`, `d ≤ d_max`, `q ≤ q_max`, `xs ∈ [1..x_max]^N`, nonempty
/// `γ ⊆ [N]`, `a ∈ Q(N)` and `c ∈ [q]^d`.
///
/// The left side overwrites the point and embeds every coordinate; the right
/// side uses only `x_γ` and the masked base.
pub fn verify_embedding_identity(limits: IdentityLimits, cfg: &SearchConfig) -> Result<IdentityReport> {
    let mut tasks = Vec::new();
    for n in 1..=limits.n_max {
        for d in 1..=limits.d_max {
            for q in 1..=limits.q_max {
                let shape = CubeShape::Phj { q, n, d };
                shape.dense_points(cfg.max_points)?;
                let combos = (limits.x_max as usize).pow(n as u32);
                for code in 0..combos {
                    let mut xs = Vec::with_capacity(n);
                    let mut c = code;
                    for _ in 0..n {
                        xs.push((c % limits.x_max as usize) as u64 + 1);
                        c /= limits.x_max as usize;
                    }
                    tasks.push((n, d, q, xs));
                }
            }
        }
    }
    let parts: Vec<Result<IdentityReport>> = cfg.install(|| {
        tasks
            .par_iter()
            .map(|(n, d, q, xs)| identity_for(*n, *d, *q, xs))
            .collect()
    });
    let mut total = IdentityReport {
        cases: 0,
        failures: 0,
        first_failure: None,
    };
    for p in parts {
        let p = p?;
        total.cases += p.cases;
        total.failures += p.failures;
        if total.first_failure.is_none() {
            total.first_failure = p.first_failure;
        }
    }
    Ok(total)
}

const MAX_IDENTITY_DEGREE: usize = 8;

fn identity_for(n: usize, d: usize, q: u32, xs: &[u64]) -> Result<IdentityReport> {
    let seq = GenSeq::new(xs.to_vec(), false)?;
    let emb = Embedder::new(n, d, &seq)?;
    let coords = CubeShape::Phj { q, n, d }.coords();
    let overflow = || Error::invalid("embedding overflowed i64 in the identity check");
    let ws = emb.small.clone().ok_or_else(overflow)?;
    // every partial sum below is bounded by q · Σ|w|
    ws.iter()
        .try_fold(0i64, |acc, w| acc.checked_add(w.checked_abs()?.checked_mul(q as i64)?))
        .ok_or_else(overflow)?;
    if d > MAX_IDENTITY_DEGREE {
        return Err(Error::invalid(format!("identity check supports d ≤ {MAX_IDENTITY_DEGREE}")));
    }
    let mut report = IdentityReport {
        cases: 0,
        failures: 0,
        first_failure: None,
    };
    let mut cases = 0u64;
    for gamma in var_sets(n) {
        let mask = gamma.mask(n, d);
        // Left side: the overwritten point, coordinate by coordinate.
        let kept: Vec<usize> = (0..coords).filter(|&i| mask[i].is_none()).collect();
        let mut written: Vec<Vec<i64>> = vec![Vec::new(); d];
        for i in 0..coords {
            if let Some(j) = mask[i] {
                written[j - 1].push(ws[i]);
            }
        }
        // Right side: only x_γ and the masked base.
        let s: i64 = gamma.members().iter().map(|&i| xs[i - 1] as i64).sum();
        let powers: Vec<i64> = (1..=d as u32).map(|j| s.pow(j)).collect();
        // Every a is visited once: its off-γ part outside, its γ part inside.
        let hidden = coords - kept.len();
        let mut off = vec![1i64; kept.len()];
        let mut on = vec![1i64; hidden];
        let mut masked = vec![0i64; coords];
        let mut c = [1i64; MAX_IDENTITY_DEGREE];
        loop {
            for (&i, &v) in kept.iter().zip(&off) {
                masked[i] = v;
            }
            let base = emb.embed_flat_i64(&masked).ok_or_else(overflow)?;
            let untouched: i64 = kept.iter().zip(&off).map(|(&i, &v)| ws[i] * v).sum();
            on.iter_mut().for_each(|x| *x = 1);
            loop {
                let mut walk = LevelWalk {
                    q: q as i64,
                    written: &written,
                    powers: &powers,
                    c: &mut c[..d],
                    cases: 0,
                    failed: None,
                };
                walk.run(0, untouched, base);
                cases += walk.cases;
                if let Some((fails, (lhs, rhs, cs))) = walk.failed {
                    report.failures += fails;
                    if report.first_failure.is_none() {
                        let mut a = masked.clone();
                        let slots = (0..coords).filter(|&i| mask[i].is_some());
                        for (i, &v) in slots.zip(&on) {
                            a[i] = v;
                        }
                        report.first_failure = Some(format!(
                            "N={n} d={d} q={q} xs={xs:?} γ={gamma} a={a:?} c={cs:?}: {lhs} ≠ {rhs}"
                        ));
                    }
                }
                if !bump(&mut on, q as i64) {
                    break;
                }
            }
            if !bump(&mut off, q as i64) {
                break;
            }
        }
    }
    report.cases = cases;
    Ok(report)
}

/// `(lhs, rhs, c)` of a failing case.
type FirstFailure = (i64, i64, Vec<i64>);

/// Runs `c ∈ [q]^d` level by level, adding each level's overwritten
/// coordinates to the left side and `c_j · x_γ^j` to the right side.
struct LevelWalk<'a> {
    q: i64,
    written: &'a [Vec<i64>],
    powers: &'a [i64],
    c: &'a mut [i64],
    cases: u64,
    /// Failure count and the first failure.
    failed: Option<(u64, FirstFailure)>,
}

impl LevelWalk<'_> {
    fn run(&mut self, j: usize, lhs: i64, rhs: i64) {
        if j == self.c.len() {
            self.cases += 1;
            if lhs != rhs {
                match &mut self.failed {
                    Some((n, _)) => *n += 1,
                    None => self.failed = Some((1, (lhs, rhs, self.c.to_vec()))),
                }
            }
            return;
        }
        for cj in 1..=self.q {
            self.c[j] = cj;
            let level: i64 = self.written[j].iter().map(|&w| w * cj).sum();
            self.run(j + 1, lhs + level, rhs + cj * self.powers[j]);
        }
    }
}

/// Odometer step over `[1..q]^len`; false once it wraps around.
fn bump(a: &mut [i64], q: i64) -> bool {
    for slot in a.iter_mut().rev() {
        if *slot < q {
            *slot += 1;
            return true;
        }
        *slot = 1;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(t: u32, s: &str) -> Word {
        Word::parse(t, s).unwrap()
    }

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    #[test]
    fn substitute_examples() {
        assert_eq!(w(3, "1v2v").substitute(3).unwrap(), w(3, "1323"));
        assert_eq!(w(2, "v").substitute(1).unwrap(), w(2, "1"));
        assert_eq!(w(2, "vv1").substitute(2).unwrap(), w(2, "221"));
        assert!(w(2, "vv1").substitute(3).is_err());
        assert!(w(2, "vv1").substitute(0).is_err());
        assert!(w(2, "121").substitute(1).is_err());
    }

    #[test]
    fn variable_word_order() {
        let words: Vec<String> = variable_words(2, 2).map(|w| w.to_string()).collect();
        assert_eq!(words, ["vv", "v1", "v2", "1v", "2v"]);
        assert_eq!(variable_words(3, 3).count(), 4usize.pow(3) - 3usize.pow(3));
    }

    #[test]
    fn hj_search_examples() {
        let shape = CubeShape::Hj { t: 2, n: 2 };
        let diag = CubeColoring::from_fn(shape, 2, 1 << 20, |p| usize::from(p[0] != p[1])).unwrap();
        assert_eq!(hj_search(&diag).unwrap(), Some(w(2, "vv")));

        let constant = CubeColoring::from_fn(CubeShape::Hj { t: 3, n: 3 }, 1, 1 << 20, |_| 0).unwrap();
        assert_eq!(hj_search(&constant).unwrap(), Some(w(3, "vvv")));

        let split = CubeColoring::dense(CubeShape::Hj { t: 2, n: 1 }, 2, vec![0, 1], 1 << 20).unwrap();
        assert_eq!(hj_search(&split).unwrap(), None);
    }

    /// Oracle: list every line of [t]^N by brute force over all words.
    fn hj_oracle(c: &CubeColoring, t: u32, n: usize) -> Option<Word> {
        let total = (t as usize + 1).pow(n as u32);
        let mut best: Option<Vec<u32>> = None;
        for code in 0..total {
            let mut letters = vec![0u32; n];
            let mut k = code;
            for slot in letters.iter_mut().rev() {
                *slot = (k % (t as usize + 1)) as u32;
                k /= t as usize + 1;
            }
            if !letters.contains(&0) {
                continue;
            }
            let colors: Vec<usize> = (1..=t)
                .map(|a| c.color(&letters.iter().map(|&l| if l == 0 { a } else { l }).collect::<Vec<_>>()))
                .collect();
            if colors.iter().all(|&x| x == colors[0]) && best.as_ref().is_none_or(|b| letters < *b) {
                best = Some(letters);
            }
        }
        best.map(|letters| Word { t, letters })
    }

    #[test]
    fn hj_search_matches_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let t = rng.gen_range(1..=3);
            let n = rng.gen_range(1..=3);
            let r = rng.gen_range(1..=3);
            let shape = CubeShape::Hj { t, n };
            let pts = shape.dense_points(1 << 20).unwrap();
            let colors = (0..pts).map(|_| rng.gen_range(0..r) as u8).collect();
            let c = CubeColoring::dense(shape, r, colors, 1 << 20).unwrap();
            let got = hj_search(&c).unwrap();
            assert_eq!(got, hj_oracle(&c, t, n));
            if let Some(word) = got {
                let line = word.line().unwrap();
                let c0 = c.color(line[0].letters());
                assert!(line.iter().all(|p| c.color(p.letters()) == c0));
            }
        }
    }

    #[test]
    fn hj_number_examples() {
        let res = hj_number(2, 2, 4, &cfg()).unwrap();
        assert_eq!(res.n, Some(2));
        assert_eq!(res.avoiding, vec![vec![0, 1]]);
        assert_eq!(hj_number(1, 3, 4, &cfg()).unwrap().n, Some(1));
        assert_eq!(hj_number(3, 1, 4, &cfg()).unwrap().n, Some(1));
        let tight = SearchConfig {
            max_nodes: 3,
            ..cfg()
        };
        assert!(matches!(hj_number(2, 3, 3, &tight), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn hj_number_brute_force_two_two() {
        // Every 2-coloring of [2]^1 has an avoiding one; none of [2]^2 does.
        let lines_2 = [[0usize, 3], [0, 2], [1, 3], [0, 1], [2, 3]];
        let mut avoiders = 0;
        for mask in 0u32..16 {
            let col = |i: usize| mask >> i & 1;
            if lines_2.iter().all(|l| col(l[0]) != col(l[1])) {
                avoiders += 1;
            }
        }
        assert_eq!(avoiders, 0);
        assert!((0u32..4).any(|mask| (mask & 1) != (mask >> 1 & 1)));
    }

    #[test]
    fn oplus_examples() {
        let a = PhjPoint::new(2, 2, vec![vec![1, 1]]).unwrap();
        let g2 = VarSet::new(2, vec![2]).unwrap();
        assert_eq!(phj_oplus(2, &a, &g2, &[2]).unwrap().levels(), &[vec![1, 2]]);

        let a = PhjPoint::new(2, 2, vec![vec![1, 1], vec![1, 1, 1, 1]]).unwrap();
        let g1 = VarSet::new(2, vec![1]).unwrap();
        let b = phj_oplus(2, &a, &g1, &[2, 2]).unwrap();
        assert_eq!(b.levels(), &[vec![2, 1], vec![2, 1, 1, 1]]);

        let once = phj_oplus(2, &a, &g1, &[2, 2]).unwrap();
        let twice = phj_oplus(2, &once, &g1, &[1, 2]).unwrap();
        assert_eq!(twice, phj_oplus(2, &a, &g1, &[1, 2]).unwrap());

        assert!(phj_oplus(2, &a, &g1, &[3, 1]).is_err());
        assert!(phj_oplus(2, &a, &g1, &[1]).is_err());
    }

    #[test]
    fn oplus_overwrite_law() {
        let n = 3;
        let a = PhjPoint::new(3, n, vec![vec![1, 2, 3], (0..9).map(|i| i % 3 + 1).collect()]).unwrap();
        for gamma in var_sets(n) {
            let b = phj_oplus(3, &a, &gamma, &[3, 2]).unwrap();
            for (j, (lb, la)) in b.levels().iter().zip(a.levels()).enumerate() {
                for idx in 0..lb.len() {
                    // decode ī explicitly, first component most significant
                    let comps: Vec<usize> = if j == 0 {
                        vec![idx + 1]
                    } else {
                        vec![idx / n + 1, idx % n + 1]
                    };
                    let inside = comps.iter().all(|i| gamma.members().contains(i));
                    let want = if inside { [3, 2][j] } else { la[idx] };
                    assert_eq!(lb[idx], want);
                }
            }
        }
    }

    #[test]
    fn var_set_order() {
        let all: Vec<String> = var_sets(3).iter().map(|g| g.to_string()).collect();
        assert_eq!(all, ["{1}", "{2}", "{3}", "{1,2}", "{1,3}", "{2,3}", "{1,2,3}"]);
        assert!(VarSet::new(3, vec![]).is_err());
        assert!(VarSet::new(3, vec![4]).is_err());
    }

    #[test]
    fn phj_search_examples() {
        let c = cfg();
        let constant = CubeColoring::rule(CubeShape::Phj { q: 2, n: 2, d: 2 }, 1, CubeRule::Sum(1)).unwrap();
        let (a, g) = phj_search(&constant, &c).unwrap().unwrap();
        assert_eq!(a.flat(), vec![1; 6]);
        assert_eq!(g.members(), &[1]);

        let shape = CubeShape::Phj { q: 2, n: 1, d: 1 };
        let split = CubeColoring::dense(shape, 2, vec![0, 1], 1 << 20).unwrap();
        assert_eq!(phj_search(&split, &c).unwrap(), None);
        let flat = CubeColoring::dense(shape, 2, vec![1, 1], 1 << 20).unwrap();
        assert!(phj_search(&flat, &c).unwrap().is_some());

        let by_first = CubeColoring::rule(CubeShape::Phj { q: 2, n: 2, d: 1 }, 2, CubeRule::Coord(1)).unwrap();
        let (a, g) = phj_search(&by_first, &c.clone().with_workers(3)).unwrap().unwrap();
        assert_eq!(a.flat(), vec![1, 1]);
        assert_eq!(g.members(), &[2]);
    }

    #[test]
    fn phj_search_is_schedule_independent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let shape = CubeShape::Phj { q: 2, n: 2, d: 2 };
            let colors = (0..64).map(|_| rng.gen_range(0..3u8)).collect();
            let c = CubeColoring::dense(shape, 3, colors, 1 << 20).unwrap();
            let one = phj_search(&c, &cfg()).unwrap();
            let many = phj_search(&c, &cfg().with_workers(4)).unwrap();
            assert_eq!(one, many);
            if let Some((a, g)) = one {
                let letters = a.letters(2).unwrap();
                assert!(pattern_is_mono(&c, &letters, &g.mask(2, 2), 2, 2));
            }
        }
    }

    #[test]
    fn gamma_embed_examples() {
        let xs = GenSeq::from_slice(&[1, 2]).unwrap();
        let a = PhjPoint::new(2, 2, vec![vec![2, 1]]).unwrap();
        assert_eq!(gamma_embed(&a, &xs).unwrap(), BigInt::from(4));
        let ones = PhjPoint::new(2, 2, vec![vec![1, 1], vec![1; 4]]).unwrap();
        assert_eq!(gamma_embed(&ones, &xs).unwrap(), BigInt::from(12));
        let zeros = PhjPoint::formal(2, vec![vec![0, 0], vec![0; 4]]).unwrap();
        assert_eq!(gamma_embed(&zeros, &xs).unwrap(), BigInt::zero());
        assert!(gamma_embed(&ones, &GenSeq::from_slice(&[1]).unwrap()).is_err());
    }

    #[test]
    fn embedded_pattern_examples() {
        let xs = GenSeq::from_slice(&[1, 2]).unwrap();
        let ones = PhjPoint::new(2, 2, vec![vec![1, 1], vec![1; 4]]).unwrap();
        let both = VarSet::new(2, vec![1, 2]).unwrap();
        let e = embedded_pattern(&ones, &both, &xs, &[2, 2]).unwrap();
        assert_eq!((e.base, e.value), (BigInt::zero(), BigInt::from(24)));

        let first = VarSet::new(2, vec![1]).unwrap();
        let e = embedded_pattern(&ones, &first, &xs, &[2, 3]).unwrap();
        assert_eq!((e.base, e.value, e.step), (BigInt::from(10), BigInt::from(15), BigInt::from(1)));

        let e = embedded_pattern(&ones, &first, &xs, &[1, 1]).unwrap();
        assert_eq!(e.value, gamma_embed(&ones, &xs).unwrap());

        // negative coefficients are allowed here
        let e = embedded_pattern(&ones, &both, &xs, &[-1, 2]).unwrap();
        assert_eq!(e.value, BigInt::from(-3 + 18));
    }

    #[test]
    fn identity_small_scale() {
        let limits = IdentityLimits {
            n_max: 2,
            d_max: 2,
            q_max: 2,
            x_max: 3,
        };
        let r = verify_embedding_identity(limits, &cfg()).unwrap();
        assert_eq!(r.failures, 0, "{:?}", r.first_failure);
        assert!(r.cases > 1000);
    }

    #[test]
    fn dense_cap_is_enforced() {
        let shape = CubeShape::Phj { q: 3, n: 3, d: 3 };
        assert!(matches!(shape.dense_points(1 << 24), Err(Error::ResourceCap(_))));
        assert!(CubeColoring::from_fn(shape, 2, 1 << 24, |_| 0).is_err());
        // rule colorings still work
        let c = CubeColoring::rule(shape, 1, CubeRule::Sum(1)).unwrap();
        assert_eq!(c.color(&vec![1; shape.coords()]), 0);
    }
}
