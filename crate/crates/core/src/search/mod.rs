//! Monochromatic configuration search, Ramsey thresholds, and window
//! verifiers.
//!
//! Canonical orders: `(a, d)` and `(x, y)` lexicographic; colorings
//! lexicographic on `(c(1), c(2), …)` with colors renamed by first use;
//! block partitions in lexicographic order of their block lists.

mod patterns;
mod threshold;
mod verifiers;
mod witness;

pub use patterns::{
    find_exp, find_poly_config, find_schur, ExpSearch, Pattern, PatternArgs, PatternCtor,
    PatternRegistry, PolyConfig, Schur, SchurOp,
};
pub use threshold::{pvdw_threshold, schur_threshold, threshold, Threshold, ThresholdReport};
pub use verifiers::{
    config_set_r, sumsub_pattern_search, sumsub_witnesses, verify_ipr_pvdw, IprReport,
    SumsubResult,
};
pub use witness::{validate_witness, Validation, Witness, WitnessContext, WitnessKind, WitnessParams};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A total `r`-coloring of the window `[1..n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ColoringRepr", into = "ColoringRepr")]
pub struct Coloring {
    r: usize,
    assign: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct ColoringRepr {
    n: usize,
    r: usize,
    colors: Vec<u8>,
}

impl TryFrom<ColoringRepr> for Coloring {
    type Error = Error;
    fn try_from(c: ColoringRepr) -> Result<Self> {
        if c.colors.len() != c.n {
            return Err(Error::invalid(format!(
                "coloring of [1..{}] lists {} colors",
                c.n,
                c.colors.len()
            )));
        }
        Coloring::new(c.r, c.colors)
    }
}

impl From<Coloring> for ColoringRepr {
    fn from(c: Coloring) -> Self {
        ColoringRepr {
            n: c.assign.len(),
            r: c.r,
            colors: c.assign,
        }
    }
}

impl Coloring {
    /// `assign[i]` is the color of `i + 1`.
    pub fn new(r: usize, assign: Vec<u8>) -> Result<Self> {
        if r == 0 || r > 256 {
            return Err(Error::invalid(format!("color count {r} outside 1..=256")));
        }
        if let Some((i, &c)) = assign.iter().enumerate().find(|(_, &c)| c as usize >= r) {
            return Err(Error::invalid(format!(
                "element {} has color {c}, not below r = {r}",
                i + 1
            )));
        }
        Ok(Coloring { r, assign })
    }

    pub fn constant(n: usize) -> Self {
        Coloring {
            r: 1,
            assign: vec![0; n],
        }
    }

    pub fn from_fn(n: usize, r: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::new(r, (1..=n).map(|x| f(x) as u8).collect())
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn colors(&self) -> usize {
        self.r
    }

    pub fn assign(&self) -> &[u8] {
        &self.assign
    }

    /// Color of `x`, or `None` outside `[1..n]`.
    pub fn color(&self, x: i64) -> Option<usize> {
        if x < 1 {
            return None;
        }
        self.assign.get(x as usize - 1).map(|&c| c as usize)
    }
}

impl fmt::Display for Coloring {
    /// The text format: `n r` on the first line, then the colors.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n(), self.r)?;
        let cs: Vec<String> = self.assign.iter().map(ToString::to_string).collect();
        write!(f, "{}", cs.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coloring_checks() {
        let c = Coloring::new(2, vec![0, 1, 0]).unwrap();
        assert_eq!(c.color(2), Some(1));
        assert_eq!(c.color(0), None);
        assert_eq!(c.color(4), None);
        assert!(Coloring::new(2, vec![0, 1, 2]).is_err());
        assert!(Coloring::new(0, vec![]).is_err());
        assert_eq!(c.to_string(), "3 2\n0 1 0");
    }

    #[test]
    fn repr_round_trip() {
        let c = Coloring::new(2, vec![0, 1]).unwrap();
        let repr: ColoringRepr = c.clone().into();
        assert_eq!(repr.n, 2);
        assert_eq!(Coloring::try_from(repr).unwrap(), c);
        let bad = ColoringRepr { n: 3, r: 2, colors: vec![0, 1] };
        assert!(Coloring::try_from(bad).is_err());
    }
}
