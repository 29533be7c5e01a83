//! Text formats for colorings, window sets and cube colorings.
//!
//! ```text
//! coloring   := "n r" NL colors…            | "rule:" rule-expr
//! window set := "n" NL "list:" members…     | "n" NL "rule:" rule-expr
//! cube       := "hj t N r" NL colors…       | "phj q N d r" NL colors…
//!             | header NL "rule:" cube-rule
//! ```
//!
//! Colors are whitespace separated and may span lines. A window set given by
//! a rule holds exactly the elements of color 0.

use crate::UsageError;
use ramsey_core::bigtower::RuleColoring;
use ramsey_core::combinatorics::WindowSet;
use ramsey_core::hjspace::{CubeColoring, CubeColors, CubeRule, CubeShape};
use ramsey_core::search::Coloring;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColoringInput {
    Dense(Coloring),
    Rule(RuleColoring),
}

impl ColoringInput {
    pub fn colors(&self) -> usize {
        match self {
            ColoringInput::Dense(c) => c.colors(),
            ColoringInput::Rule(rc) => rc.colors(),
        }
    }
}

fn num<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T, UsageError> {
    tok.parse()
        .map_err(|_| UsageError::new(format!("{what}: cannot parse token {tok:?}")))
}

fn rule_of(expr: &str) -> Result<RuleColoring, UsageError> {
    expr.trim()
        .parse()
        .map_err(|e| UsageError::new(format!("rule {:?}: {e}", expr.trim())))
}

pub fn parse_coloring(text: &str) -> Result<ColoringInput, UsageError> {
    let text = text.trim();
    if let Some(expr) = text.strip_prefix("rule:") {
        return Ok(ColoringInput::Rule(rule_of(expr)?));
    }
    let mut toks = text.split_whitespace();
    let n: usize = num(toks.next().unwrap_or(""), "coloring header n")?;
    let r: usize = num(toks.next().unwrap_or(""), "coloring header r")?;
    if !(1..=256).contains(&r) {
        return Err(UsageError::new(format!("coloring header: r = {r} must lie in 1..=256")));
    }
    let mut assign = Vec::with_capacity(n);
    for (i, tok) in toks.enumerate() {
        if i >= n {
            return Err(UsageError::new(format!(
                "coloring: extra token {tok:?} after {n} colors"
            )));
        }
        let c: usize = num(tok, "coloring color")?;
        if c >= r {
            return Err(UsageError::new(format!(
                "coloring: token {tok:?} for element {} is not below r = {r}",
                i + 1
            )));
        }
        assign.push(c as u8);
    }
    if assign.len() != n {
        return Err(UsageError::new(format!(
            "coloring: header says {n} elements, found {}",
            assign.len()
        )));
    }
    Ok(ColoringInput::Dense(
        Coloring::new(r, assign).map_err(|e| UsageError::new(e.to_string()))?,
    ))
}

pub fn print_coloring(c: &ColoringInput) -> String {
    match c {
        ColoringInput::Dense(c) => c.to_string(),
        ColoringInput::Rule(rc) => format!("rule: {rc}"),
    }
}

pub fn parse_window_set(text: &str) -> Result<WindowSet, UsageError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let n: usize = num(lines.next().unwrap_or(""), "window set size")?;
    let body = lines.collect::<Vec<_>>().join(" ");
    if let Some(list) = body.strip_prefix("list:") {
        let members = list
            .split_whitespace()
            .map(|t| num::<i64>(t, "window set member"))
            .collect::<Result<Vec<_>, _>>()?;
        WindowSet::from_members(n, members).map_err(|e| UsageError::new(format!("window set: {e}")))
    } else if let Some(expr) = body.strip_prefix("rule:") {
        let rc = rule_of(expr)?;
        Ok(WindowSet::from_fn(n, |i| rc.color_u64(i as u64) == 0))
    } else {
        let tok = body.split_whitespace().next().unwrap_or("");
        Err(UsageError::new(format!(
            "window set: expected \"list:\" or \"rule:\", found {tok:?}"
        )))
    }
}

pub fn print_window_set(a: &WindowSet) -> String {
    let ms: Vec<String> = a.members().map(|m| m.to_string()).collect();
    if ms.is_empty() {
        format!("{}\nlist:", a.window_end())
    } else {
        format!("{}\nlist: {}", a.window_end(), ms.join(" "))
    }
}

pub fn parse_cube(text: &str, max_points: u64) -> Result<CubeColoring, UsageError> {
    let mut lines = text.trim().splitn(2, '\n');
    let header: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
    let body = lines.next().unwrap_or("").trim();
    let (shape, r) = match header.as_slice() {
        ["hj", t, n, r] => (
            CubeShape::Hj {
                t: num(t, "cube header t")?,
                n: num(n, "cube header N")?,
            },
            num::<usize>(r, "cube header r")?,
        ),
        ["phj", q, n, d, r] => (
            CubeShape::Phj {
                q: num(q, "cube header q")?,
                n: num(n, "cube header N")?,
                d: num(d, "cube header d")?,
            },
            num::<usize>(r, "cube header r")?,
        ),
        _ => {
            let tok = header.first().copied().unwrap_or("");
            return Err(UsageError::new(format!(
                "cube header: expected \"hj t N r\" or \"phj q N d r\", found {tok:?}"
            )));
        }
    };
    let bad = |e: ramsey_core::Error| UsageError::new(format!("cube: {e}"));
    if let Some(expr) = body.strip_prefix("rule:") {
        let rule = CubeRule::parse(expr).map_err(bad)?;
        return CubeColoring::rule(shape, r, rule).map_err(bad);
    }
    let colors = body
        .split_whitespace()
        .map(|t| {
            let c: usize = num(t, "cube color")?;
            if c >= r {
                return Err(UsageError::new(format!("cube: token {t:?} is not below r = {r}")));
            }
            Ok(c as u8)
        })
        .collect::<Result<Vec<_>, _>>()?;
    CubeColoring::dense(shape, r, colors, max_points).map_err(bad)
}

pub fn print_cube(c: &CubeColoring) -> String {
    let header = match c.shape() {
        CubeShape::Hj { t, n } => format!("hj {t} {n} {}", c.colors()),
        CubeShape::Phj { q, n, d } => format!("phj {q} {n} {d} {}", c.colors()),
    };
    match c.data() {
        CubeColors::Dense(cs) => {
            let cs: Vec<String> = cs.iter().map(ToString::to_string).collect();
            format!("{header}\n{}", cs.join(" "))
        }
        CubeColors::Rule(rule) => format!("{header}\nrule: {rule}"),
    }
}

/// Comma separated unsigned integers, e.g. `1,2,4`.
pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, UsageError> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| num(t, what))
        .collect()
}

/// A point of `Q(N)`: levels separated by `;`, entries by `,`.
pub fn parse_levels(text: &str) -> Result<Vec<Vec<i64>>, UsageError> {
    text.split(';').map(|lvl| parse_list(lvl, "point entry")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coloring_examples() {
        let c = parse_coloring("9 2\n0 1 0 1 0 1 0 1 0").unwrap();
        let ColoringInput::Dense(d) = &c else { panic!() };
        assert_eq!(d.color(4), Some(1));
        assert_eq!(print_coloring(&c), "9 2\n0 1 0 1 0 1 0 1 0");

        let c = parse_coloring("rule: mod:2:0,1").unwrap();
        assert_eq!(c.colors(), 2);
        assert_eq!(print_coloring(&c), "rule: mod:2:0,1");

        let e = parse_coloring("3 2\n0 1 2").unwrap_err();
        assert!(e.to_string().contains("\"2\""), "{e}");
        let e = parse_coloring("3 2\n0 1").unwrap_err();
        assert!(e.to_string().contains("found 2"), "{e}");
        let e = parse_coloring("2 2\n0 1 1").unwrap_err();
        assert!(e.to_string().contains("extra token"), "{e}");
        let e = parse_coloring("rule: stripes:3").unwrap_err();
        assert!(e.to_string().contains("stripes"), "{e}");
        assert!(parse_coloring("x 2\n0").unwrap_err().to_string().contains("\"x\""));
    }

    #[test]
    fn window_sets() {
        let a = parse_window_set("10\nlist: 1 3 5").unwrap();
        assert_eq!(a.members().collect::<Vec<_>>(), vec![1, 3, 5]);
        assert_eq!(parse_window_set(&print_window_set(&a)).unwrap(), a);

        let odds = parse_window_set("20\nrule: mod:2:1,0").unwrap();
        assert_eq!(odds.len(), 10);
        assert!(odds.contains(19) && !odds.contains(20));

        assert!(parse_window_set("5\nlist: 6").is_err());
        assert!(parse_window_set("5\nset: 1").unwrap_err().to_string().contains("set:"));
        let empty = WindowSet::empty(4);
        assert_eq!(parse_window_set(&print_window_set(&empty)).unwrap(), empty);
    }

    #[test]
    fn cubes() {
        let c = parse_cube("hj 2 2 2\n0 0 1 1", 1 << 10).unwrap();
        assert_eq!(print_cube(&c), "hj 2 2 2\n0 0 1 1");
        let p = parse_cube("phj 2 1 2 2\nrule: coord:1", 1 << 10).unwrap();
        assert_eq!(parse_cube(&print_cube(&p), 1 << 10).unwrap(), p);
        assert!(parse_cube("hj 2 2 2\n0 0 1", 1 << 10).is_err());
        assert!(parse_cube("hj 2 2 2\n0 0 1 2", 1 << 10).is_err());
        assert!(parse_cube("cube 2 2", 1 << 10).unwrap_err().to_string().contains("cube"));
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u64>("1, 2,4", "x").unwrap(), vec![1, 2, 4]);
        assert!(parse_list::<u64>("1,a", "x").unwrap_err().to_string().contains("\"a\""));
        assert_eq!(parse_levels("1,2;1,1,2,2").unwrap(), vec![vec![1, 2], vec![1, 1, 2, 2]]);
    }
}
