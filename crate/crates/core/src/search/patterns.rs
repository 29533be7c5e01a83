use super::witness::{Witness, WitnessKind, WitnessParams};
use super::Coloring;
use crate::bignum::capped_pow;
use crate::bigtower::RuleColoring;
use crate::error::{Error, Result};
use crate::polyarith::PolyFamily;
use num_bigint::{BigInt, BigUint, Sign};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A monochromatic pattern that threshold searches can look for.
pub trait Pattern: Send + Sync {
    /// Registry name.
    fn name(&self) -> &'static str;

    /// Canonical first witness in `c`.
    fn find(&self, c: &Coloring) -> Option<Witness>;

    /// Given colors of `[1..m]` (`colors.len() == m`), is there a
    /// monochromatic instance inside `[1..m]` whose largest element is `m`?
    fn closes_at(&self, colors: &[u8], m: usize) -> bool;
}

/// `{a} ∪ {a + p(d) : p ∈ F}` (anchor optional), `d ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyConfig {
    family: PolyFamily,
    anchor: bool,
    kind: WitnessKind,
}

impl PolyConfig {
    pub fn new(family: PolyFamily, anchor: bool) -> Self {
        PolyConfig {
            family,
            anchor,
            kind: WitnessKind::PolyConfig,
        }
    }

    /// `k`-term arithmetic progressions: `F = {d, 2d, …, (k−1)d}` with the anchor.
    pub fn vdw(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("progression length k must be at least 2"));
        }
        Ok(PolyConfig {
            family: PolyFamily::progression(k)?,
            anchor: true,
            kind: WitnessKind::Vdw,
        })
    }

    pub fn family(&self) -> &PolyFamily {
        &self.family
    }

    /// Elements for `(a, d)` if all lie in `[1..n]`.
    fn elements(&self, a: i64, d: i64, n: usize, out: &mut Vec<i64>) -> bool {
        out.clear();
        if self.anchor {
            out.push(a);
        }
        for p in self.family.iter() {
            match p.eval_i64(d).and_then(|v| v.checked_add(a)) {
                Some(e) if e >= 1 && e as usize <= n => out.push(e),
                _ => return false,
            }
        }
        true
    }

    fn witness(&self, a: i64, d: i64, elements: &[i64], color: usize) -> Witness {
        Witness {
            kind: self.kind,
            elements: elements.iter().map(|&e| BigInt::from(e)).collect(),
            color,
            params: WitnessParams::Config {
                a,
                d,
                polys: self.family.clone(),
                anchor: self.anchor,
            },
        }
    }
}

fn mono(colors: &[u8], elements: &[i64]) -> Option<usize> {
    let (first, rest) = elements.split_first()?;
    let c = colors[*first as usize - 1];
    rest.iter()
        .all(|&e| colors[e as usize - 1] == c)
        .then_some(c as usize)
}

impl Pattern for PolyConfig {
    fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn find(&self, c: &Coloring) -> Option<Witness> {
        let n = c.n();
        let max_d = self.family.max_step(n) as i64;
        let mut buf = Vec::new();
        for a in 1..=n as i64 {
            for d in 1..=max_d {
                if self.elements(a, d, n, &mut buf) {
                    if let Some(color) = mono(c.assign(), &buf) {
                        return Some(self.witness(a, d, &buf, color));
                    }
                }
            }
        }
        None
    }

    fn closes_at(&self, colors: &[u8], m: usize) -> bool {
        let max_d = self.family.max_step(m) as i64;
        let mut buf = Vec::new();
        for a in 1..=m as i64 {
            for d in 1..=max_d {
                if self.elements(a, d, m, &mut buf)
                    && buf.iter().any(|&e| e as usize == m)
                    && mono(colors, &buf).is_some()
                {
                    return true;
                }
            }
        }
        false
    }
}

/// Least `(a, d)` in lexicographic order with `{a} ∪ {a + p(d)}` (anchor
/// included iff `include_anchor`) monochromatic inside `[1..n]`.
pub fn find_poly_config(c: &Coloring, family: &PolyFamily, include_anchor: bool) -> Option<Witness> {
    PolyConfig::new(family.clone(), include_anchor).find(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchurOp {
    Additive,
    Multiplicative,
}

/// `{x, y, x∘y}` with `x ≤ y` (`x < y` when `distinct`); multiplicative
/// triples need `x ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Schur {
    pub op: SchurOp,
    pub distinct: bool,
}

impl Schur {
    fn combine(&self, x: u64, y: u64) -> Option<u64> {
        match self.op {
            SchurOp::Additive => x.checked_add(y),
            SchurOp::Multiplicative => x.checked_mul(y),
        }
    }

    fn kind(&self) -> WitnessKind {
        match self.op {
            SchurOp::Additive => WitnessKind::Schur,
            SchurOp::Multiplicative => WitnessKind::ProductSchur,
        }
    }

    fn min_x(&self) -> u64 {
        match self.op {
            SchurOp::Additive => 1,
            SchurOp::Multiplicative => 2,
        }
    }
}

impl Pattern for Schur {
    fn name(&self) -> &'static str {
        self.kind().name()
    }

    fn find(&self, c: &Coloring) -> Option<Witness> {
        let n = c.n() as u64;
        for x in self.min_x()..=n {
            for y in x + u64::from(self.distinct)..=n {
                let Some(z) = self.combine(x, y).filter(|&z| z <= n) else {
                    break;
                };
                let elems = [x as i64, y as i64, z as i64];
                if let Some(color) = mono(c.assign(), &elems) {
                    return Some(Witness {
                        kind: self.kind(),
                        elements: elems.iter().map(|&e| BigInt::from(e)).collect(),
                        color,
                        params: WitnessParams::Pair { x, y },
                    });
                }
            }
        }
        None
    }

    fn closes_at(&self, colors: &[u8], m: usize) -> bool {
        let m = m as u64;
        let mut x = self.min_x();
        loop {
            let y = match self.op {
                SchurOp::Additive => m.checked_sub(x),
                SchurOp::Multiplicative => m.is_multiple_of(x).then(|| m / x),
            };
            match y {
                Some(y) if y > x || (y == x && !self.distinct) => {
                    if mono(colors, &[x as i64, y as i64, m as i64]).is_some() {
                        return true;
                    }
                }
                Some(_) => return false,
                None if self.op == SchurOp::Additive => return false,
                None if x * x >= m => return false,
                None => {}
            }
            x += 1;
        }
    }
}

/// Least `(x, y)`, `x < y`, with `{x, y, x∘y}` monochromatic inside `[1..n]`.
pub fn find_schur(c: &Coloring, op: SchurOp) -> Option<Witness> {
    Schur { op, distinct: true }.find(c)
}

/// Outcome of [`find_exp`]: the first witness plus every pair skipped
/// because `x^y` exceeded the bit cap before it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpSearch {
    pub witness: Option<Witness>,
    pub skipped: Vec<(u64, u64)>,
    pub examined: u64,
}

/// Least `(x, y)` in `[2..x_max] × [2..y_max]`, `x ≠ y`, with
/// `{x, y, x^y}` monochromatic.
pub fn find_exp(c: &RuleColoring, x_max: u64, y_max: u64, bit_cap: u64) -> ExpSearch {
    let mut skipped = Vec::new();
    let mut examined = 0;
    for x in 2..=x_max {
        let cx = c.color_u64(x);
        for y in 2..=y_max {
            if x == y {
                continue;
            }
            examined += 1;
            if c.color_u64(y) != cx {
                continue;
            }
            let Some(v) = capped_pow(&BigUint::from(x), &BigUint::from(y), bit_cap) else {
                skipped.push((x, y));
                continue;
            };
            if c.color(&v) == cx {
                return ExpSearch {
                    witness: Some(Witness {
                        kind: WitnessKind::Exp,
                        elements: vec![x.into(), y.into(), BigInt::from_biguint(Sign::Plus, v)],
                        color: cx,
                        params: WitnessParams::Exp { x, y, bit_cap },
                    }),
                    skipped,
                    examined,
                };
            }
        }
    }
    ExpSearch {
        witness: None,
        skipped,
        examined,
    }
}

/// Arguments a registered pattern may draw on.
#[derive(Clone, Debug, Default)]
pub struct PatternArgs {
    pub k: Option<usize>,
    pub polys: Option<PolyFamily>,
    pub anchor: bool,
    /// Schur triples need `x < y` rather than `x ≤ y`.
    pub distinct: bool,
}

pub type PatternCtor = fn(&PatternArgs) -> Result<Box<dyn Pattern>>;

/// Named pattern constructors, selected by `threshold --kind`.
pub struct PatternRegistry {
    entries: BTreeMap<&'static str, PatternCtor>,
}

impl PatternRegistry {
    pub fn empty() -> Self {
        PatternRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, ctor: PatternCtor) {
        self.entries.insert(name, ctor);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn build(&self, name: &str, args: &PatternArgs) -> Result<Box<dyn Pattern>> {
        let ctor = self.entries.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.names().collect();
            Error::invalid(format!("unknown pattern {name:?}; known: {}", known.join(", ")))
        })?;
        ctor(args)
    }
}

impl Default for PatternRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register("vdw", |args| {
            let k = args.k.ok_or_else(|| Error::invalid("vdw needs k"))?;
            Ok(Box::new(PolyConfig::vdw(k)?))
        });
        reg.register("poly", |args| {
            let family = args
                .polys
                .clone()
                .ok_or_else(|| Error::invalid("poly needs a polynomial family"))?;
            Ok(Box::new(PolyConfig::new(family, args.anchor)))
        });
        reg.register("schur", |args| {
            Ok(Box::new(Schur {
                op: SchurOp::Additive,
                distinct: args.distinct,
            }))
        });
        reg.register("product-schur", |args| {
            Ok(Box::new(Schur {
                op: SchurOp::Multiplicative,
                distinct: args.distinct,
            }))
        });
        reg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{validate_witness, WitnessContext};

    fn fam(s: &str) -> PolyFamily {
        PolyFamily::parse_list(s).unwrap()
    }

    #[test]
    fn poly_config_examples() {
        let parity = Coloring::from_fn(9, 2, |x| x % 2).unwrap();
        let w = find_poly_config(&parity, &fam("d"), true).unwrap();
        assert_eq!(w.params, WitnessParams::Config { a: 1, d: 2, polys: fam("d"), anchor: true });
        assert_eq!(w.elements, vec![BigInt::from(1), BigInt::from(3)]);
        assert!(validate_witness(&w, WitnessContext::Dense(&parity)).valid);

        let constant = Coloring::constant(10);
        for f in ["d", "d^2", "d,2*d", "3*d+d^2"] {
            let w = find_poly_config(&constant, &fam(f), true).unwrap();
            assert!(matches!(w.params, WitnessParams::Config { a: 1, d: 1, .. }), "{f}");
        }
        assert!(find_poly_config(&Coloring::constant(1), &fam("d"), true).is_none());
    }

    #[test]
    fn anchor_flag_changes_elements() {
        let c = Coloring::from_fn(6, 2, |x| usize::from(x == 1)).unwrap();
        // with the anchor, 1 is alone in its class
        let w = find_poly_config(&c, &fam("d"), true).unwrap();
        assert_eq!(w.elements, vec![BigInt::from(2), BigInt::from(3)]);
        let w = find_poly_config(&c, &fam("d"), false).unwrap();
        assert_eq!(w.elements, vec![BigInt::from(2)]);
        assert!(validate_witness(&w, WitnessContext::Dense(&c)).valid);
    }

    #[test]
    fn schur_examples() {
        let w = find_schur(&Coloring::constant(5), SchurOp::Additive).unwrap();
        assert_eq!(w.params, WitnessParams::Pair { x: 1, y: 2 });
        let split = Coloring::new(2, vec![0, 1, 1, 0]).unwrap();
        assert!(find_schur(&split, SchurOp::Additive).is_none());
        let w = find_schur(&Coloring::constant(6), SchurOp::Multiplicative).unwrap();
        assert_eq!(w.elements, [2, 3, 6].map(BigInt::from).to_vec());
        assert!(find_schur(&Coloring::constant(5), SchurOp::Multiplicative).is_none());
        let loose = Schur { op: SchurOp::Additive, distinct: false };
        let w = loose.find(&Coloring::constant(5)).unwrap();
        assert_eq!(w.elements, [1, 1, 2].map(BigInt::from).to_vec());
        assert!(validate_witness(&w, WitnessContext::Dense(&Coloring::constant(5))).valid);
        let squares = Schur { op: SchurOp::Multiplicative, distinct: false };
        assert_eq!(squares.find(&Coloring::constant(5)).unwrap().params, WitnessParams::Pair { x: 2, y: 2 });
    }

    #[test]
    fn closes_at_agrees_with_find() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let patterns: Vec<Box<dyn Pattern>> = vec![
            Box::new(PolyConfig::vdw(3).unwrap()),
            Box::new(PolyConfig::new(fam("d^2"), true)),
            Box::new(PolyConfig::new(fam("d,d^2"), false)),
            Box::new(Schur { op: SchurOp::Additive, distinct: true }),
            Box::new(Schur { op: SchurOp::Additive, distinct: false }),
            Box::new(Schur { op: SchurOp::Multiplicative, distinct: true }),
            Box::new(Schur { op: SchurOp::Multiplicative, distinct: false }),
        ];
        for _ in 0..300 {
            let n = rng.gen_range(1..=14);
            let assign = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
            let c = Coloring::new(2, assign).unwrap();
            for p in &patterns {
                let any_close = (1..=n).any(|m| p.closes_at(&c.assign()[..m], m));
                assert_eq!(any_close, p.find(&c).is_some(), "{} on {:?}", p.name(), c.assign());
            }
        }
    }

    #[test]
    fn exp_examples() {
        let constant = RuleColoring::constant();
        let w = find_exp(&constant, 4, 4, 1 << 20).witness.unwrap();
        assert_eq!(w.elements, [2, 3, 8].map(BigInt::from).to_vec());

        let parity: RuleColoring = "mod:2:0,1".parse().unwrap();
        let w = find_exp(&parity, 4, 4, 1 << 20).witness.unwrap();
        assert_eq!(w.params, WitnessParams::Exp { x: 2, y: 4, bit_cap: 1 << 20 });
        assert_eq!(w.elements[2], BigInt::from(16));
        assert!(validate_witness(&w, WitnessContext::Rule(&parity)).valid);

        let small: RuleColoring = "below:10".parse().unwrap();
        let w = find_exp(&small, 4, 4, 1 << 20).witness.unwrap();
        assert_eq!(w.elements, [2, 3, 8].map(BigInt::from).to_vec());
    }

    #[test]
    fn exp_records_skipped_pairs() {
        // 2..9 share a color; every 2^y with y ≥ 3 needs more than 3 bits.
        let short: RuleColoring = "bits:5".parse().unwrap();
        let res = find_exp(&short, 2, 9, 3);
        assert!(res.witness.is_none());
        assert_eq!(res.skipped, (3..=9).map(|y| (2, y)).collect::<Vec<_>>());
        let res = find_exp(&short, 2, 9, 64);
        assert_eq!(res.witness.unwrap().params, WitnessParams::Exp { x: 2, y: 3, bit_cap: 64 });
    }

    #[test]
    fn registry() {
        let reg = PatternRegistry::default();
        assert_eq!(reg.names().collect::<Vec<_>>(), ["poly", "product-schur", "schur", "vdw"]);
        let args = PatternArgs { k: Some(3), ..Default::default() };
        assert_eq!(reg.build("vdw", &args).unwrap().name(), "vdw");
        assert!(reg.build("vdw", &PatternArgs::default()).is_err());
        assert!(reg.build("poly", &PatternArgs::default()).is_err());
        assert!(reg.build("ramsey", &args).is_err());
    }
}
