use super::Coloring;
use crate::bignum::capped_pow;
use crate::bigtower::RuleColoring;
use crate::combinatorics::{fep, fp, fs, BlockPartition, GenSeq, WindowSet};
use crate::polyarith::PolyFamily;
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Vdw,
    PolyConfig,
    Schur,
    ProductSchur,
    Exp,
    Sumsub,
    Tower,
}

impl WitnessKind {
    pub fn name(self) -> &'static str {
        match self {
            WitnessKind::Vdw => "vdw",
            WitnessKind::PolyConfig => "poly-config",
            WitnessKind::Schur => "schur",
            WitnessKind::ProductSchur => "product-schur",
            WitnessKind::Exp => "exp",
            WitnessKind::Sumsub => "sumsub",
            WitnessKind::Tower => "tower",
        }
    }
}

/// Everything needed to recompute a witness's elements from scratch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum WitnessParams {
    /// `{a} ∪ {a + p(d) : p ∈ F}`, anchor optional.
    Config {
        a: i64,
        d: i64,
        polys: PolyFamily,
        anchor: bool,
    },
    /// `{x, y, x∘y}` with `x ≤ y`.
    Pair { x: u64, y: u64 },
    /// `{x, y, x^y}` with `x ≠ y`.
    Exp { x: u64, y: u64, bit_cap: u64 },
    /// `{a + p(v) : v ∈ FS(y) ∪ FP(y), p ∈ F}` where `y` is the block sums of `x`.
    Sumsub {
        x: GenSeq,
        blocks: BlockPartition,
        anchor: i64,
        polys: PolyFamily,
    },
    /// `FEP(seq)`.
    Tower { seq: GenSeq, bit_cap: u64 },
}

/// A re-checkable monochromatic pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    #[serde(with = "crate::bignum::big_vec")]
    pub elements: Vec<BigInt>,
    pub color: usize,
    pub params: WitnessParams,
}

/// What a witness is checked against.
#[derive(Clone, Copy, Debug)]
pub enum WitnessContext<'a> {
    Dense(&'a Coloring),
    Rule(&'a RuleColoring),
    /// Every element must lie in `a` (color 0 means membership); for
    /// sum-subsystem witnesses `FS(y) ∪ FP(y) ⊆ b` is checked too.
    Sets {
        a: &'a WindowSet,
        b: Option<&'a WindowSet>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub valid: bool,
    pub diagnostic: Option<String>,
}

impl Validation {
    fn ok() -> Self {
        Validation {
            valid: true,
            diagnostic: None,
        }
    }

    fn fail(msg: impl Into<String>) -> Self {
        Validation {
            valid: false,
            diagnostic: Some(msg.into()),
        }
    }
}

/// Recompute the witness from its parameters and re-check every
/// membership and color.
pub fn validate_witness(w: &Witness, ctx: WitnessContext<'_>) -> Validation {
    let expected = match expected_elements(w) {
        Ok(e) => e,
        Err(msg) => return Validation::fail(msg),
    };
    if expected != w.elements {
        return Validation::fail(format!(
            "elements {} do not match the parameters, which give {}",
            show(&w.elements),
            show(&expected)
        ));
    }
    for e in &w.elements {
        let got = match ctx {
            WitnessContext::Dense(c) => match e.to_i64().and_then(|v| c.color(v)) {
                Some(col) => col,
                None => return Validation::fail(format!("element {e} is outside [1..{}]", c.n())),
            },
            WitnessContext::Rule(rc) => match e.to_biguint().filter(|v| v.bits() > 0) {
                Some(v) => rc.color(&v),
                None => return Validation::fail(format!("element {e} is not a positive integer")),
            },
            WitnessContext::Sets { a, .. } => match e.to_i64() {
                Some(v) if v >= 1 && v as usize <= a.window_end() => {
                    if a.contains(v) {
                        0
                    } else {
                        return Validation::fail(format!("element {e} is not in A"));
                    }
                }
                _ => {
                    return Validation::fail(format!(
                        "element {e} is outside [1..{}]",
                        a.window_end()
                    ))
                }
            },
        };
        if got != w.color {
            return Validation::fail(format!("element {e} has color {got}, expected {}", w.color));
        }
    }
    if let (WitnessContext::Sets { b: Some(b), .. }, WitnessParams::Sumsub { x, blocks, .. }) =
        (ctx, &w.params)
    {
        let y = block_sums(x, blocks).expect("checked by expected_elements");
        for v in fs_fp(&y) {
            let inside = v.to_i64().is_some_and(|v| b.contains(v));
            if !inside {
                return Validation::fail(format!("{v} ∈ FS(y) ∪ FP(y) is not in B"));
            }
        }
    }
    Validation::ok()
}

fn show(xs: &[BigInt]) -> String {
    let s: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("[{}]", s.join(", "))
}

fn block_sums(x: &GenSeq, blocks: &BlockPartition) -> Option<GenSeq> {
    let sums = blocks.sums(x)?;
    GenSeq::new(sums, false).ok()
}

/// `FS(y) ∪ FP(y)` as integers, ascending.
pub(crate) fn fs_fp(y: &GenSeq) -> BTreeSet<BigInt> {
    let mut all: BTreeSet<BigInt> = fs(y).into_iter().map(BigInt::from).collect();
    all.extend(fp(y).into_iter().map(|v| BigInt::from_biguint(Sign::Plus, v)));
    all
}

/// Sorted `{a + p(v) : v ∈ FS(y) ∪ FP(y), p ∈ F}`.
pub(crate) fn sumsub_elements(a: i64, y: &GenSeq, polys: &PolyFamily) -> Vec<BigInt> {
    let a = BigInt::from(a);
    let vals = fs_fp(y);
    let set: BTreeSet<BigInt> = vals
        .iter()
        .flat_map(|v| polys.iter().map(move |p| p.eval(v)))
        .map(|pv| &a + pv)
        .collect();
    set.into_iter().collect()
}

fn expected_elements(w: &Witness) -> Result<Vec<BigInt>, String> {
    use WitnessKind as K;
    match (&w.kind, &w.params) {
        (K::Vdw | K::PolyConfig, WitnessParams::Config { a, d, polys, anchor }) => {
            if *d < 1 {
                return Err(format!("step d = {d} must be positive"));
            }
            if w.kind == K::Vdw {
                let k = polys.len() + 1;
                let ap = PolyFamily::progression(k).map_err(|e| e.to_string())?;
                if ap != *polys || !anchor {
                    return Err("a vdw witness needs the family d, 2d, … and the anchor".into());
                }
            }
            let a_big = BigInt::from(*a);
            let d_big = BigInt::from(*d);
            let mut out = Vec::new();
            if *anchor {
                out.push(a_big.clone());
            }
            out.extend(polys.iter().map(|p| &a_big + p.eval(&d_big)));
            Ok(out)
        }
        (K::Schur, WitnessParams::Pair { x, y }) if 1 <= *x && x <= y => {
            Ok(vec![(*x).into(), (*y).into(), (*x as u128 + *y as u128).into()])
        }
        (K::ProductSchur, WitnessParams::Pair { x, y }) if 2 <= *x && x <= y => {
            Ok(vec![(*x).into(), (*y).into(), (*x as u128 * *y as u128).into()])
        }
        (K::Exp, WitnessParams::Exp { x, y, bit_cap }) if x != y && *x >= 2 && *y >= 2 => {
            let v = capped_pow(&BigUint::from(*x), &BigUint::from(*y), *bit_cap)
                .ok_or_else(|| format!("{x}^{y} exceeds the bit cap {bit_cap}"))?;
            Ok(vec![(*x).into(), (*y).into(), BigInt::from_biguint(Sign::Plus, v)])
        }
        (K::Sumsub, WitnessParams::Sumsub { x, blocks, anchor, polys }) => {
            let y = block_sums(x, blocks).ok_or("blocks index past the generator sequence")?;
            Ok(sumsub_elements(*anchor, &y, polys))
        }
        (K::Tower, WitnessParams::Tower { seq, bit_cap }) => {
            let vals = fep(seq, *bit_cap).map_err(|e| e.to_string())?;
            Ok(vals.into_iter().map(|v| BigInt::from_biguint(Sign::Plus, v)).collect())
        }
        (kind, _) => Err(format!("parameters are not valid for a {} witness", kind.name())),
    }
}

impl Witness {
    /// Largest absolute element, used to report the window a witness needs.
    pub fn extent(&self) -> BigInt {
        self.elements.iter().map(|e| e.abs()).max().unwrap_or_default()
    }
}
