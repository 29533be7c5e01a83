//! Exact exponential machinery: `a ⋆ₙ b = nᵃ·b`, the tower recursion
//! `f_{k+1}(x) = (2ˣ)^{f_k(x)}`, and the exponential pattern families built
//! from generator sequences.
//!
//! Values here outgrow any dense window, so colorings are given by
//! [`RuleColoring`]s and every power is taken under an explicit bit cap.
//! Overflow is reported per element and never aborts a search silently.

mod rule;

pub use rule::{Rule, RuleColoring};

use crate::bignum::capped_pow;
use crate::combinatorics::{fep_with_chains, fp, GenSeq};
use crate::error::{Error, Result};
use crate::polyarith::PolyFamily;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// A tower expression: a literal, or `base ^ exponent`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TowerExpr {
    Lit(BigUint),
    Pow(Box<TowerExpr>, Box<TowerExpr>),
}

impl TowerExpr {
    pub fn lit(v: impl Into<BigUint>) -> Self {
        TowerExpr::Lit(v.into())
    }

    pub fn pow(base: TowerExpr, exp: TowerExpr) -> Self {
        TowerExpr::Pow(Box::new(base), Box::new(exp))
    }

    /// Evaluate bottom-up. Fails if any intermediate value exceeds `bit_cap` bits.
    pub fn eval(&self, bit_cap: u64) -> Result<BigUint> {
        match self {
            TowerExpr::Lit(v) => Ok(v.clone()),
            TowerExpr::Pow(b, e) => {
                let base = b.eval(bit_cap)?;
                let exp = e.eval(bit_cap)?;
                capped_pow(&base, &exp, bit_cap).ok_or_else(|| Error::BitCap {
                    cap: bit_cap,
                    what: self.to_string(),
                })
            }
        }
    }
}

impl fmt::Display for TowerExpr {
    /// Prefix form: `(^ base exp)` with decimal literals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerExpr::Lit(v) => write!(f, "{v}"),
            TowerExpr::Pow(b, e) => write!(f, "(^ {b} {e})"),
        }
    }
}

impl FromStr for TowerExpr {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let spaced = text.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let err = |reason: String| Error::InvalidArgument(format!("tower {text:?}: {reason}"));
        fn parse(
            tokens: &[&str],
            pos: &mut usize,
            err: &dyn Fn(String) -> Error,
        ) -> Result<TowerExpr> {
            let tok = *tokens.get(*pos).ok_or_else(|| err("unexpected end".into()))?;
            *pos += 1;
            if tok == "(" {
                let op = tokens.get(*pos).copied();
                if op != Some("^") {
                    return Err(err(format!("expected '^', found {op:?}")));
                }
                *pos += 1;
                let base = parse(tokens, pos, err)?;
                let exp = parse(tokens, pos, err)?;
                if tokens.get(*pos) != Some(&")") {
                    return Err(err("expected ')'".into()));
                }
                *pos += 1;
                Ok(TowerExpr::pow(base, exp))
            } else {
                let v: BigUint = tok.parse().map_err(|_| err(format!("bad literal {tok:?}")))?;
                if v.is_zero() {
                    return Err(err("literals must be at least 1".into()));
                }
                Ok(TowerExpr::Lit(v))
            }
        }
        let mut pos = 0;
        let e = parse(&tokens, &mut pos, &err)?;
        if pos != tokens.len() {
            return Err(err(format!("trailing input at token {pos}")));
        }
        Ok(e)
    }
}

/// `a ⋆ₙ b = nᵃ · b`.
pub fn star(n: &BigUint, a: &BigUint, b: &BigUint, bit_cap: u64) -> Result<BigUint> {
    if *n < BigUint::from(2u32) || a.is_zero() || b.is_zero() {
        return Err(Error::invalid("star needs n ≥ 2, a ≥ 1, b ≥ 1"));
    }
    let p = capped_pow(n, a, bit_cap).ok_or_else(|| Error::BitCap {
        cap: bit_cap,
        what: format!("{n}^{a}"),
    })?;
    let v = p * b;
    if v.bits() > bit_cap {
        return Err(Error::BitCap {
            cap: bit_cap,
            what: format!("{n}^{a}·{b}"),
        });
    }
    Ok(v)
}

/// `f_k(x)` as a symbolic tower plus its exact value when it fits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FSeq {
    /// `(^ 2 x)` for k = 2, `(^ (^ 2 x) f_{k-1})` above.
    pub expr: TowerExpr,
    /// `None` when the value exceeds the bit cap.
    pub value: Option<BigUint>,
}

/// `f_2(x) = 2ˣ`, `f_{k+1}(x) = (2ˣ)^{f_k(x)}`. Values are computed in the
/// normalized form `2^{x·f_{k−1}(x)}`.
pub fn f_seq(k: usize, x: u64, bit_cap: u64) -> Result<FSeq> {
    if k < 2 || x < 1 {
        return Err(Error::invalid("f_seq needs k ≥ 2 and x ≥ 1"));
    }
    let two_x = TowerExpr::pow(TowerExpr::lit(2u32), TowerExpr::lit(x));
    let mut expr = two_x.clone();
    let mut value = (x < bit_cap).then(|| BigUint::one() << x);
    for _ in 3..=k {
        expr = TowerExpr::pow(two_x.clone(), expr);
        value = value.and_then(|prev| {
            let e = (prev * BigUint::from(x)).to_u64()?;
            (e < bit_cap).then(|| BigUint::one() << e)
        });
    }
    Ok(FSeq { expr, value })
}

/// An element that could not be produced exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Omission {
    pub k: usize,
    pub reason: String,
}

/// Values of an exponential pattern family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PfPattern {
    pub values: BTreeSet<BigUint>,
    pub omitted: Vec<Omission>,
}

impl PfPattern {
    pub fn complete(&self) -> bool {
        self.omitted.is_empty()
    }
}

/// `{x_k · n^{Σ_{i<k} p_i(x_i)} : k ≤ k_max, p_i ∈ choices[i−1]}`.
///
/// For `k = 1` the exponent sum is empty and the element is `x_1`. Elements
/// with a negative exponent or beyond the bit cap are omitted and listed.
pub fn pf_pattern(
    n: u64,
    xs: &GenSeq,
    choices: &[PolyFamily],
    k_max: usize,
    bit_cap: u64,
) -> Result<PfPattern> {
    if n < 2 {
        return Err(Error::invalid("pattern base n must be at least 2"));
    }
    if k_max == 0 || k_max > xs.len() {
        return Err(Error::invalid(format!(
            "k_max = {k_max} must lie in 1..={}",
            xs.len()
        )));
    }
    if choices.len() + 1 < k_max {
        return Err(Error::invalid(format!(
            "need polynomial choices for indices 1..{}, got {}",
            k_max - 1,
            choices.len()
        )));
    }
    let base = BigUint::from(n);
    let mut values = BTreeSet::new();
    let mut omitted = Vec::new();
    // Distinct exponent sums reachable for the current k.
    let mut sums: BTreeSet<BigInt> = BTreeSet::from([BigInt::zero()]);
    for k in 1..=k_max {
        let xk = BigUint::from(xs.xs()[k - 1]);
        let mut negative = false;
        for s in &sums {
            if s.is_negative() {
                negative = true;
                continue;
            }
            let e = s.to_biguint().expect("nonnegative");
            match capped_pow(&base, &e, bit_cap).map(|p| p * &xk) {
                Some(v) if v.bits() <= bit_cap => {
                    values.insert(v);
                }
                _ => omitted.push(Omission {
                    k,
                    reason: format!("{n}^{s} exceeds {bit_cap} bits"),
                }),
            }
        }
        if negative {
            omitted.push(Omission {
                k,
                reason: "negative exponent sum".into(),
            });
        }
        if k < k_max {
            let xi = BigInt::from(xs.xs()[k - 1]);
            let steps: BTreeSet<BigInt> = choices[k - 1].iter().map(|p| p.eval(&xi)).collect();
            sums = sums
                .iter()
                .flat_map(|s| steps.iter().map(move |t| s + t))
                .collect();
        }
    }
    Ok(PfPattern { values, omitted })
}

/// Upper bounds for `λ_i`, `i ≥ 2`, in the λ-pattern
/// `a_k · 2^{Σ_{i<k} λ_i a_i}` (`λ_1` is always bounded by `N`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaBounds {
    /// `λ_i ≤ f_i(a_{i−1})` with the tower functions of [`f_seq`].
    Tower,
    /// `λ_i ≤ bounds[i − 2]`; indices past the list fall back to `N`.
    Explicit(Vec<u64>),
}

/// First element of the λ-pattern whose color differs from `a_1`'s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaCheck {
    /// `(element, k, λ_1..λ_{k−1})` of the first mismatch, if any.
    pub failing: Option<(BigUint, usize, Vec<u64>)>,
    pub omitted: Vec<Omission>,
    pub examined: u64,
}

pub fn check_lambda_pattern(
    a_seq: &GenSeq,
    big_n: u64,
    bounds: &LambdaBounds,
    coloring: &RuleColoring,
    bit_cap: u64,
    max_elements: u64,
) -> Result<LambdaCheck> {
    let a = a_seq.xs();
    // Bound for λ_i, 1-based.
    let bound = |i: usize| -> Result<u64> {
        if i == 1 {
            return Ok(big_n);
        }
        match bounds {
            LambdaBounds::Tower => f_seq(i, a[i - 2], bit_cap)?
                .value
                .and_then(|v| v.to_u64())
                .ok_or_else(|| {
                    Error::ResourceCap(format!("λ bound f_{i}({}) is too large to enumerate", a[i - 2]))
                }),
            LambdaBounds::Explicit(bs) => Ok(bs.get(i - 2).copied().unwrap_or(big_n)),
        }
    };
    let first_color = coloring.color_u64(a[0]);
    let mut examined = 1u64;
    let mut omitted = Vec::new();
    for k in 2..=a.len() {
        let limits: Vec<u64> = (1..k).map(bound).collect::<Result<_>>()?;
        let mut lambdas = vec![0u64; k - 1];
        let ak = BigUint::from(a[k - 1]);
        loop {
            examined += 1;
            if examined > max_elements {
                return Err(Error::ResourceCap(format!(
                    "λ-pattern has more than {max_elements} elements"
                )));
            }
            let exp: BigUint = lambdas
                .iter()
                .zip(a)
                .map(|(&l, &ai)| BigUint::from(l) * BigUint::from(ai))
                .sum();
            let two = BigUint::from(2u32);
            match capped_pow(&two, &exp, bit_cap).map(|p| p * &ak) {
                Some(v) if v.bits() <= bit_cap => {
                    if coloring.color(&v) != first_color {
                        return Ok(LambdaCheck {
                            failing: Some((v, k, lambdas)),
                            omitted,
                            examined,
                        });
                    }
                }
                _ => omitted.push(Omission {
                    k,
                    reason: format!("λ = {lambdas:?} exceeds {bit_cap} bits"),
                }),
            }
            // Lexicographic successor, λ_{k-1} fastest.
            let mut pos = k - 1;
            loop {
                if pos == 0 {
                    break;
                }
                let i = pos - 1;
                if lambdas[i] < limits[i] {
                    lambdas[i] += 1;
                    break;
                }
                lambdas[i] = 0;
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
        }
    }
    Ok(LambdaCheck {
        failing: None,
        omitted,
        examined,
    })
}

/// Where FEP search draws its generators from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FepCandidates {
    /// Increasing sequences from `lo..=hi`.
    Range { lo: u64, hi: u64 },
    /// `x_j ∈ FP(G_j)` for consecutive finite blocks `G_1, G_2, …`.
    Blocks(Vec<GenSeq>),
}

/// A candidate sequence skipped because a tower overflowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSeq {
    pub seq: Vec<u64>,
    pub chain: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FepSearch {
    pub found: Option<(GenSeq, usize)>,
    pub skipped: Vec<SkippedSeq>,
    pub examined: u64,
}

/// First candidate sequence (canonical order) whose FEP set is monochromatic.
pub fn fep_monochrome_search(
    candidates: &FepCandidates,
    set_size: usize,
    coloring: &RuleColoring,
    bit_cap: u64,
    workers: usize,
) -> Result<FepSearch> {
    if set_size == 0 {
        return Err(Error::invalid("set_size must be at least 1"));
    }
    // Per first-choice group, the candidate lists for the remaining positions.
    let (firsts, rest): (Vec<u64>, Vec<Vec<u64>>) = match candidates {
        FepCandidates::Range { lo, hi } => {
            let lo = (*lo).max(2);
            ((lo..=*hi).collect(), Vec::new())
        }
        FepCandidates::Blocks(blocks) => {
            if blocks.len() < set_size {
                return Err(Error::invalid(format!(
                    "{} blocks supplied, set_size is {set_size}",
                    blocks.len()
                )));
            }
            let lists = blocks[..set_size]
                .iter()
                .map(|g| {
                    fp(g)
                        .into_iter()
                        .filter(|v| *v >= BigUint::from(2u32))
                        .map(|v| v.to_u64().ok_or_else(|| Error::invalid("FP value exceeds u64")))
                        .collect::<Result<Vec<u64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let mut it = lists.into_iter();
            (it.next().unwrap_or_default(), it.collect())
        }
    };
    let increasing = matches!(candidates, FepCandidates::Range { .. });
    let hi = match candidates {
        FepCandidates::Range { hi, .. } => *hi,
        FepCandidates::Blocks(_) => 0,
    };

    struct Group {
        found: Option<(GenSeq, usize)>,
        skipped: Vec<SkippedSeq>,
        examined: u64,
    }

    let search_group = |x1: u64| -> Group {
        let mut g = Group {
            found: None,
            skipped: Vec::new(),
            examined: 0,
        };
        let mut seq = vec![x1];
        let mut visit = |seq: &[u64], g: &mut Group| -> bool {
            g.examined += 1;
            let s = match GenSeq::new(seq.to_vec(), true) {
                Ok(s) => s,
                Err(_) => return false,
            };
            match fep_with_chains(&s, bit_cap) {
                Ok(vals) => {
                    let mut colors = vals.keys().map(|v| coloring.color(v));
                    let c0 = colors.next().expect("nonempty FEP");
                    if colors.all(|c| c == c0) {
                        g.found = Some((s, c0));
                        return true;
                    }
                }
                Err(Error::BitCap { what, .. }) => {
                    g.skipped.push(SkippedSeq {
                        seq: seq.to_vec(),
                        chain: parse_chain(&what),
                    });
                }
                Err(_) => {}
            }
            false
        };
        fn extend(
            seq: &mut Vec<u64>,
            set_size: usize,
            increasing: bool,
            hi: u64,
            rest: &[Vec<u64>],
            g: &mut Group,
            visit: &mut dyn FnMut(&[u64], &mut Group) -> bool,
        ) -> bool {
            if seq.len() == set_size {
                return visit(seq, g);
            }
            let pos = seq.len();
            let options: Vec<u64> = if increasing {
                (seq[pos - 1] + 1..=hi).collect()
            } else {
                rest[pos - 1].iter().copied().filter(|v| !seq.contains(v)).collect()
            };
            for v in options {
                seq.push(v);
                if extend(seq, set_size, increasing, hi, rest, g, visit) {
                    return true;
                }
                seq.pop();
            }
            false
        }
        extend(&mut seq, set_size, increasing, hi, &rest, &mut g, &mut visit);
        g
    };

    let cfg = crate::SearchConfig::default().with_workers(workers);
    let groups: Vec<Group> = cfg.install(|| firsts.par_iter().map(|&x| search_group(x)).collect());
    let mut out = FepSearch {
        found: None,
        skipped: Vec::new(),
        examined: 0,
    };
    for g in groups {
        out.examined += g.examined;
        out.skipped.extend(g.skipped);
        if g.found.is_some() {
            out.found = g.found;
            break;
        }
    }
    Ok(out)
}

fn parse_chain(what: &str) -> Vec<usize> {
    what.split(|c: char| !c.is_ascii_digit())
        .filter_map(|t| t.parse().ok())
        .collect()
}
