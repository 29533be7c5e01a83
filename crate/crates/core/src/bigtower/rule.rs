use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

/// A total coloring of the positive integers given by a small rule.
///
/// Grammar:
///
/// ```text
/// rule := "mod:" m ":" c_0 "," … "," c_{m-1}     color of v is c_{v mod m}
///       | "bits:" t_1 "," … "," t_k              number of t_i ≤ bitlen(v)
///       | "below:" t_1 "," … "," t_k             number of t_i ≤ v
///       | "lead:" b ":" c_1 "," … "," c_{b-1}    by leading base-b digit
///       | "compose(" rule ";" rule ";" table ")" table[c1 * r2 + c2]
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Mod { modulus: u64, colors: Vec<usize> },
    Bits { thresholds: Vec<u64> },
    Below { thresholds: Vec<BigUint> },
    Lead { base: u32, colors: Vec<usize> },
    Compose { first: Box<Rule>, second: Box<Rule>, table: Vec<usize> },
}

impl Rule {
    /// Number of colors the rule can produce.
    pub fn colors(&self) -> usize {
        match self {
            Rule::Mod { colors, .. } | Rule::Lead { colors, .. } => {
                colors.iter().max().map_or(1, |m| m + 1)
            }
            Rule::Bits { thresholds } => thresholds.len() + 1,
            Rule::Below { thresholds } => thresholds.len() + 1,
            Rule::Compose { table, .. } => table.iter().max().map_or(1, |m| m + 1),
        }
    }

    pub fn color(&self, v: &BigUint) -> usize {
        match self {
            Rule::Mod { modulus, colors } => {
                let idx = (v % BigUint::from(*modulus)).to_usize().unwrap_or(0);
                colors[idx]
            }
            Rule::Bits { thresholds } => {
                let b = v.bits();
                thresholds.iter().filter(|&&t| t <= b).count()
            }
            Rule::Below { thresholds } => thresholds.iter().filter(|t| *t <= v).count(),
            Rule::Lead { base, colors } => {
                let digit = leading_digit(v, *base);
                colors[digit.saturating_sub(1) as usize]
            }
            Rule::Compose {
                first,
                second,
                table,
            } => {
                let r2 = second.colors();
                table[first.color(v) * r2 + second.color(v)]
            }
        }
    }

    pub fn color_u64(&self, v: u64) -> usize {
        match self {
            Rule::Mod { modulus, colors } => colors[(v % modulus) as usize],
            Rule::Bits { thresholds } => {
                let b = 64 - v.leading_zeros() as u64;
                thresholds.iter().filter(|&&t| t <= b).count()
            }
            _ => self.color(&BigUint::from(v)),
        }
    }
}

fn leading_digit(v: &BigUint, base: u32) -> u32 {
    if v.is_zero() {
        return 0;
    }
    let digits = v.to_radix_be(base);
    digits[0] as u32
}

/// Split `s` at `sep` occurrences that are not nested inside parentheses.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let err = |reason: &str| Error::RuleSyntax {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let list = |body: &str| -> Result<Vec<usize>> {
            body.split(',')
                .map(|t| t.parse::<usize>().map_err(|_| err(&format!("bad color {t:?}"))))
                .collect()
        };
        if let Some(inner) = s.strip_prefix("compose(").and_then(|r| r.strip_suffix(')')) {
            let parts = split_top(inner, ';');
            if parts.len() != 3 {
                return Err(err("compose needs rule;rule;table"));
            }
            let first: Rule = parts[0].parse()?;
            let second: Rule = parts[1].parse()?;
            let table = list(parts[2])?;
            if table.len() != first.colors() * second.colors() {
                return Err(err(&format!(
                    "table has {} entries, expected {}",
                    table.len(),
                    first.colors() * second.colors()
                )));
            }
            return Ok(Rule::Compose {
                first: Box::new(first),
                second: Box::new(second),
                table,
            });
        }
        let (name, body) = s.split_once(':').ok_or_else(|| err("missing ':'"))?;
        match name {
            "mod" => {
                let (m, cs) = body.split_once(':').ok_or_else(|| err("mod needs m:colors"))?;
                let modulus: u64 = m.parse().map_err(|_| err("bad modulus"))?;
                let colors = list(cs)?;
                if modulus == 0 || colors.len() as u64 != modulus {
                    return Err(err("mod needs exactly m colors with m ≥ 1"));
                }
                Ok(Rule::Mod { modulus, colors })
            }
            "bits" => {
                let thresholds = body
                    .split(',')
                    .map(|t| t.parse::<u64>().map_err(|_| err("bad threshold")))
                    .collect::<Result<Vec<_>>>()?;
                if thresholds.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(err("thresholds must increase"));
                }
                Ok(Rule::Bits { thresholds })
            }
            "below" => {
                let thresholds = body
                    .split(',')
                    .map(|t| t.parse::<BigUint>().map_err(|_| err("bad threshold")))
                    .collect::<Result<Vec<_>>>()?;
                if thresholds.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(err("thresholds must increase"));
                }
                Ok(Rule::Below { thresholds })
            }
            "lead" => {
                let (b, cs) = body.split_once(':').ok_or_else(|| err("lead needs b:colors"))?;
                let base: u32 = b.parse().map_err(|_| err("bad base"))?;
                let colors = list(cs)?;
                if !(2..=36).contains(&base) || colors.len() as u32 != base - 1 {
                    return Err(err("lead needs a base in 2..=36 and base-1 colors"));
                }
                Ok(Rule::Lead { base, colors })
            }
            other => Err(err(&format!("unknown rule {other:?}"))),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<T: fmt::Display>(xs: &[T]) -> String {
            xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        }
        match self {
            Rule::Mod { modulus, colors } => write!(f, "mod:{modulus}:{}", join(colors)),
            Rule::Bits { thresholds } => write!(f, "bits:{}", join(thresholds)),
            Rule::Below { thresholds } => write!(f, "below:{}", join(thresholds)),
            Rule::Lead { base, colors } => write!(f, "lead:{base}:{}", join(colors)),
            Rule::Compose {
                first,
                second,
                table,
            } => write!(f, "compose({first};{second};{})", join(table)),
        }
    }
}

/// A rule-defined coloring with an explicit color count.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleColoring {
    rule: Rule,
    r: usize,
}

impl RuleColoring {
    pub fn new(rule: Rule) -> Self {
        let r = rule.colors();
        RuleColoring { rule, r }
    }

    /// Fails if the rule can produce a color `≥ r`.
    pub fn with_colors(rule: Rule, r: usize) -> Result<Self> {
        if rule.colors() > r {
            return Err(Error::invalid(format!(
                "rule {rule} uses {} colors, more than r = {r}",
                rule.colors()
            )));
        }
        Ok(RuleColoring { rule, r })
    }

    /// The constant coloring.
    pub fn constant() -> Self {
        Self::new(Rule::Mod {
            modulus: 1,
            colors: vec![0],
        })
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn colors(&self) -> usize {
        self.r
    }

    pub fn color(&self, v: &BigUint) -> usize {
        self.rule.color(v)
    }

    pub fn color_u64(&self, v: u64) -> usize {
        self.rule.color_u64(v)
    }
}

impl FromStr for RuleColoring {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(RuleColoring::new(s.parse()?))
    }
}

impl fmt::Display for RuleColoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rule.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_color() {
        let parity: Rule = "mod:2:0,1".parse().unwrap();
        assert_eq!(parity.color_u64(4), 0);
        assert_eq!(parity.color_u64(7), 1);
        assert_eq!(parity.colors(), 2);

        let bits: Rule = "bits:4,9".parse().unwrap();
        assert_eq!(bits.color_u64(7), 0);
        assert_eq!(bits.color_u64(8), 1);
        assert_eq!(bits.color_u64(256), 2);

        let below: Rule = "below:10".parse().unwrap();
        assert_eq!(below.color_u64(9), 0);
        assert_eq!(below.color_u64(10), 1);

        let lead: Rule = "lead:10:0,0,0,1,1,1,1,1,1".parse().unwrap();
        assert_eq!(lead.color_u64(391), 0);
        assert_eq!(lead.color_u64(47), 1);

        let both: Rule = "compose(mod:2:0,1; bits:4; 0,1,2,3)".parse().unwrap();
        assert_eq!(both.color_u64(2), 0);
        assert_eq!(both.color_u64(3), 2);
        assert_eq!(both.color_u64(8), 1);
        assert_eq!(both.color_u64(9), 3);
        assert_eq!(both.colors(), 4);
    }

    #[test]
    fn bad_rules() {
        for bad in [
            "mod:3:0,1",
            "mod:0:",
            "bits:5,3",
            "lead:1:",
            "wobble:1",
            "compose(mod:2:0,1;mod:2:0,1;0,1)",
            "mod:2:0,x",
        ] {
            assert!(bad.parse::<Rule>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "mod:3:0,1,1",
            "bits:3,5",
            "below:10,100",
            "lead:3:1,0",
            "compose(mod:2:0,1;compose(bits:2;mod:2:0,1;0,1,1,0);0,1,1,0)",
        ] {
            let r: Rule = text.parse().unwrap();
            assert_eq!(r.to_string(), text);
        }
    }

    #[test]
    fn big_values_agree_with_u64_path() {
        let r: Rule = "mod:7:0,1,2,0,1,2,0".parse().unwrap();
        for v in [1u64, 2, 99, 12345, u64::MAX] {
            assert_eq!(r.color_u64(v), r.color(&BigUint::from(v)));
        }
        let bits: Rule = "bits:1,2,64,65".parse().unwrap();
        for v in [1u64, 2, 3, u64::MAX] {
            assert_eq!(bits.color_u64(v), bits.color(&BigUint::from(v)));
        }
    }

    #[test]
    fn explicit_color_count() {
        let rule: Rule = "mod:2:0,1".parse().unwrap();
        assert!(RuleColoring::with_colors(rule.clone(), 1).is_err());
        assert_eq!(RuleColoring::with_colors(rule, 3).unwrap().colors(), 3);
    }
}
