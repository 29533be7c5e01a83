use crate::formats::{
    parse_coloring, parse_cube, parse_levels, parse_list, parse_window_set, print_coloring, print_cube,
    ColoringInput,
};
use crate::report::{Caps, ContextSpec, Perf, Provenance, Report, Status, WitnessRecord, SCHEMA};
use crate::{AnchorArgs, ColoringSource, Command, Op, SeqArgs, UsageError};
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::ToPrimitive;
use ramsey_core::bigtower::{
    check_lambda_pattern, f_seq, fep_monochrome_search, pf_pattern, star, FepCandidates, LambdaBounds,
    RuleColoring, TowerExpr,
};
use ramsey_core::combinatorics::{fep_with_chains, fp, fs, is_ip_r_star, is_sum_subsystem, GenSeq, IpStar, LargenessParams, WindowSet};
use ramsey_core::hjspace::{
    embedded_pattern, gamma_embed, hj_number, hj_search, phj_oplus, phj_search, verify_embedding_identity,
    CubeColoring, CubeShape, IdentityLimits, PhjPoint, VarSet,
};
use ramsey_core::polyarith::PolyFamily;
use ramsey_core::search::{
    config_set_r, find_exp, find_poly_config, sumsub_pattern_search, sumsub_witnesses, threshold,
    validate_witness, verify_ipr_pvdw, Coloring, Pattern, PatternArgs, PatternRegistry, Schur, SchurOp,
    Threshold, Witness, WitnessContext,
};
use ramsey_core::{Error, SearchConfig};
use serde_json::{json, Value};
use std::path::Path;

type Outcome = std::result::Result<Report, UsageError>;

struct Ctx<'a> {
    cfg: &'a SearchConfig,
    command: &'static str,
}

impl Ctx<'_> {
    fn report(&self, status: Status, result: Value) -> Report {
        Report {
            schema: SCHEMA,
            command: self.command.to_string(),
            status,
            result,
            witnesses: Vec::new(),
            counterexamples: Vec::new(),
            caps: Caps::from(self.cfg),
            perf: Perf::default(),
        }
    }

    fn record(&self, witness: Witness, window: Option<usize>, colors: usize, context: ContextSpec, order: &str) -> WitnessRecord {
        WitnessRecord {
            witness,
            window,
            colors,
            context,
            provenance: Provenance {
                search_order: order.to_string(),
                caps: Caps::from(self.cfg),
            },
        }
    }

    /// Caps become a `capped` report; anything else is a usage error.
    fn core(&self, e: Error) -> Outcome {
        match e {
            Error::BitCap { .. } | Error::ResourceCap(_) | Error::FamilyTooLarge { .. } => {
                Ok(self.report(Status::Capped, json!({ "error": e.to_string() })))
            }
            e => Err(UsageError::new(e.to_string())),
        }
    }
}

macro_rules! core {
    ($ctx:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return $ctx.core(e),
        }
    };
}

fn usage(e: Error) -> UsageError {
    UsageError::new(e.to_string())
}

fn read(path: &Path) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| UsageError::new(format!("{}: {e}", path.display())))
}

/// Integers as JSON numbers when they fit `i64`, decimal strings otherwise.
pub(crate) fn big(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

fn ubig(v: &BigUint) -> Value {
    big(&BigInt::from_biguint(Sign::Plus, v.clone()))
}

fn family(text: &str) -> Result<PolyFamily, UsageError> {
    PolyFamily::parse_list(text).map_err(|e| UsageError::new(format!("--poly {text:?}: {e}")))
}

fn seq(text: &str, distinct: bool, flag: &str) -> Result<GenSeq, UsageError> {
    let xs = parse_list(text, flag)?;
    GenSeq::new(xs, distinct).map_err(|e| UsageError::new(format!("{flag} {text:?}: {e}")))
}

fn load_coloring(src: &ColoringSource) -> Result<(ColoringInput, String), UsageError> {
    let text = match (&src.coloring, &src.rule) {
        (Some(p), _) => read(p)?,
        (None, Some(r)) => format!("rule: {r}"),
        (None, None) => return Err(UsageError::new("one of --coloring or --rule is required")),
    };
    let c = parse_coloring(&text)?;
    let canon = print_coloring(&c);
    Ok((c, canon))
}

fn load_rule(src: &ColoringSource) -> Result<(RuleColoring, String), UsageError> {
    match load_coloring(src)? {
        (ColoringInput::Rule(rc), text) => Ok((rc, text)),
        (ColoringInput::Dense(_), _) => Err(UsageError::new(
            "this subcommand needs a rule coloring (\"rule:\" file or --rule)",
        )),
    }
}

/// A dense coloring, materializing rule colorings over `--window`.
fn load_dense(src: &ColoringSource, window: Option<usize>, cfg: &SearchConfig) -> Result<(Coloring, String), UsageError> {
    let (input, text) = load_coloring(src)?;
    let c = match input {
        ColoringInput::Dense(c) => c,
        ColoringInput::Rule(rc) => {
            let n = window.ok_or_else(|| UsageError::new("a rule coloring needs --window"))?;
            if n > cfg.max_window {
                return Err(UsageError::new(format!("--window {n} exceeds --max-window {}", cfg.max_window)));
            }
            Coloring::from_fn(n, rc.colors(), |x| rc.color_u64(x as u64)).map_err(usage)?
        }
    };
    Ok((c, text))
}

fn load_set(path: &Path) -> Result<(WindowSet, String), UsageError> {
    let a = parse_window_set(&read(path)?)?;
    let text = crate::formats::print_window_set(&a);
    Ok((a, text))
}

fn avoiding_json(c: &Coloring) -> Value {
    json!({ "n": c.n(), "r": c.colors(), "colors": c.assign() })
}

pub(crate) fn dispatch(cmd: Command, cfg: &SearchConfig) -> Outcome {
    match cmd {
        Command::Fs(a) => cmd_fs(&a, cfg),
        Command::Fp(a) => cmd_fp(&a, cfg),
        Command::Fep(a) => cmd_fep(&a, cfg),
        Command::SumsubCheck { y, x } => cmd_sumsub_check(&y, &x, cfg),
        Command::FindConfig { source, poly, anchor, window } => cmd_find_config(&source, &poly, anchor, window, cfg),
        Command::Threshold { kind, k, r, n_max, poly, anchor, distinct } => {
            cmd_threshold(&kind, k, r, n_max, poly.as_deref(), anchor, distinct, cfg)
        }
        Command::Schur { source, op, allow_equal, window } => cmd_schur(&source, op, allow_equal, window, cfg),
        Command::ExpSearch { source, x_max, y_max } => cmd_exp(&source, x_max, y_max, cfg),
        Command::HjSearch { cube } => cmd_hj_search(&cube, cfg),
        Command::HjNumber { r, t, n_max } => cmd_hj_number(r, t, n_max, cfg),
        Command::PhjSearch { cube } => cmd_phj_search(&cube, cfg),
        Command::PhjEmbed { point, n, xs, gamma, c, exhaustive, n_max, d_max, q_max, x_max } => {
            if exhaustive {
                cmd_identity(IdentityLimits { n_max, d_max, q_max, x_max }, cfg)
            } else {
                let (point, n, xs) = (point.unwrap_or_default(), n.unwrap_or(0), xs.unwrap_or_default());
                cmd_phj_embed(&point, n, &xs, gamma.as_deref().zip(c.as_deref()), cfg)
            }
        }
        Command::ConfigR { set, poly, g, l } => cmd_config_r(&set, &poly, g, l, cfg),
        Command::IpstarCheck { set, r, allow_repeats } => cmd_ipstar(&set, r, !allow_repeats, cfg),
        Command::IprVerify { set, poly, g, l, r_max, allow_repeats } => {
            cmd_ipr(&set, &poly, g, l, r_max, !allow_repeats, cfg)
        }
        Command::SumsubSearch { set, set_b, x, poly, n_target } => {
            cmd_sumsub_search(&set, set_b.as_deref(), &x, &poly, n_target, cfg)
        }
        Command::Tower { expr, f_seq, x, star } => cmd_tower(expr.as_deref(), f_seq.zip(x), star.as_deref(), cfg),
        Command::PfPattern { n, xs, polys, k_max } => cmd_pf_pattern(n, &xs, &polys, k_max, cfg),
        Command::VerifyWitness { witness, source, set, set_b } => {
            cmd_verify(&witness, &source, set.as_deref(), set_b.as_deref(), cfg)
        }
        Command::FepSearch { range, blocks, size, source } => {
            cmd_fep_search(range.as_deref(), blocks.as_deref(), size, &source, cfg)
        }
        Command::LambdaCheck { a, big_n, bounds, source, max_elements } => {
            cmd_lambda(&a, big_n, bounds.as_deref(), &source, max_elements, cfg)
        }
    }
}

fn cmd_fs(a: &SeqArgs, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "fs" };
    let s = seq(&a.seq, !a.allow_repeats, "--seq")?;
    let values: Vec<Value> = fs(&s).iter().map(|&v| big(&BigInt::from(v))).collect();
    Ok(ctx.report(Status::Found, json!({ "seq": s.xs(), "values": values })))
}

fn cmd_fp(a: &SeqArgs, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "fp" };
    let s = seq(&a.seq, !a.allow_repeats, "--seq")?;
    let values: Vec<Value> = fp(&s).iter().map(ubig).collect();
    Ok(ctx.report(Status::Found, json!({ "seq": s.xs(), "values": values })))
}

fn cmd_fep(a: &SeqArgs, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "fep" };
    let s = seq(&a.seq, !a.allow_repeats, "--seq")?;
    let chains = core!(ctx, fep_with_chains(&s, cfg.bit_cap));
    let values: Vec<Value> = chains
        .iter()
        .map(|(v, chain)| json!({ "value": ubig(v), "chain": chain }))
        .collect();
    Ok(ctx.report(Status::Found, json!({ "seq": s.xs(), "values": values })))
}

fn cmd_sumsub_check(y: &str, x: &str, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "sumsub-check" };
    let y = GenSeq::from_slice(&parse_list(y, "--y")?).map_err(usage)?;
    let x = GenSeq::from_slice(&parse_list(x, "--x")?).map_err(usage)?;
    Ok(match is_sum_subsystem(&y, &x) {
        Some(blocks) => ctx.report(Status::Found, json!({ "blocks": blocks.blocks() })),
        None => ctx.report(Status::NotFound, json!({ "blocks": null })),
    })
}

const CONFIG_ORDER: &str = "(a, d) lexicographic";
const PAIR_ORDER: &str = "(x, y) lexicographic";

fn cmd_find_config(src: &ColoringSource, poly: &str, anchor: AnchorArgs, window: Option<usize>, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "find-config" };
    let fam = family(poly)?;
    let (c, text) = load_dense(src, window, cfg)?;
    let include = anchor.include();
    let result = json!({ "window": c.n(), "polys": fam.to_string(), "anchor": include });
    Ok(match find_poly_config(&c, &fam, include) {
        Some(w) => {
            let mut rep = ctx.report(Status::Found, result);
            rep.witnesses
                .push(ctx.record(w, Some(c.n()), c.colors(), ContextSpec::Coloring { text }, CONFIG_ORDER));
            rep
        }
        None => ctx.report(Status::NotFound, result),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_threshold(
    kind: &str,
    k: Option<usize>,
    r: usize,
    n_max: usize,
    poly: Option<&str>,
    anchor: AnchorArgs,
    distinct: bool,
    cfg: &SearchConfig,
) -> Outcome {
    let ctx = Ctx { cfg, command: "threshold" };
    let args = PatternArgs {
        k,
        polys: poly.map(family).transpose()?,
        anchor: anchor.include(),
        distinct,
    };
    let registry = PatternRegistry::default();
    let pattern = registry.build(kind, &args).map_err(|e| UsageError::new(format!("--kind: {e}")))?;
    let rep = core!(ctx, threshold(pattern.as_ref(), r, n_max, cfg));
    let status = match rep.result {
        Threshold::Found { .. } => Status::Found,
        Threshold::NotFound { .. } => Status::NotFound,
        Threshold::Capped { .. } => Status::Capped,
    };
    let mut result = json!({ "kind": kind, "r": r, "max": n_max });
    let (outcome, extra) = match &rep.result {
        Threshold::Found { n, avoiding } => ("found", json!({ "n": n, "avoiding": avoiding_json(avoiding) })),
        Threshold::NotFound { n_max, avoiding } => {
            ("not_found", json!({ "n_max": n_max, "avoiding": avoiding_json(avoiding) }))
        }
        Threshold::Capped { searched, best } => {
            ("capped", json!({ "searched": searched, "best": avoiding_json(best) }))
        }
    };
    result["outcome"] = json!(outcome);
    for (key, v) in extra.as_object().expect("object") {
        result[key] = v.clone();
    }
    let mut report = ctx.report(status, result);
    report.perf.nodes = Some(rep.nodes);
    if let Threshold::Found { n, avoiding } = &rep.result {
        // Every extension of the avoiding coloring to n contains the pattern.
        for c in 0..r {
            let mut assign = avoiding.assign().to_vec();
            assign.push(c as u8);
            let ext = Coloring::new(r, assign).map_err(usage)?;
            let w = pattern
                .find(&ext)
                .expect("a forced window contains the pattern in every extension");
            let text = print_coloring(&ColoringInput::Dense(ext));
            report
                .witnesses
                .push(ctx.record(w, Some(*n), r, ContextSpec::Coloring { text }, pattern_order(pattern.as_ref())));
        }
    }
    Ok(report)
}

fn pattern_order(p: &dyn Pattern) -> &'static str {
    match p.name() {
        "schur" | "product-schur" => PAIR_ORDER,
        _ => CONFIG_ORDER,
    }
}

fn cmd_schur(src: &ColoringSource, op: Op, allow_equal: bool, window: Option<usize>, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "schur" };
    let (c, text) = load_dense(src, window, cfg)?;
    let op = match op {
        Op::Additive => SchurOp::Additive,
        Op::Multiplicative => SchurOp::Multiplicative,
    };
    let pattern = Schur { op, distinct: !allow_equal };
    let result = json!({ "window": c.n(), "op": format!("{op:?}").to_lowercase(), "distinct": !allow_equal });
    Ok(match pattern.find(&c) {
        Some(w) => {
            let mut rep = ctx.report(Status::Found, result);
            rep.witnesses
                .push(ctx.record(w, Some(c.n()), c.colors(), ContextSpec::Coloring { text }, PAIR_ORDER));
            rep
        }
        None => ctx.report(Status::NotFound, result),
    })
}

fn cmd_exp(src: &ColoringSource, x_max: u64, y_max: u64, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "exp-search" };
    let (rc, text) = load_rule(src)?;
    let found = find_exp(&rc, x_max, y_max, cfg.bit_cap);
    let skipped: Vec<Value> = found.skipped.iter().map(|&(x, y)| json!([x, y])).collect();
    let result = json!({ "x_max": x_max, "y_max": y_max, "examined": found.examined, "skipped": skipped });
    let mut rep = match found.witness {
        Some(w) => {
            let mut rep = ctx.report(Status::Found, result);
            rep.witnesses
                .push(ctx.record(w, None, rc.colors(), ContextSpec::Coloring { text }, PAIR_ORDER));
            rep
        }
        None if !found.skipped.is_empty() => ctx.report(Status::Capped, result),
        None => ctx.report(Status::NotFound, result),
    };
    rep.perf.nodes = Some(found.examined);
    Ok(rep)
}

fn load_cube(path: &Path, cfg: &SearchConfig) -> Result<CubeColoring, UsageError> {
    parse_cube(&read(path)?, cfg.max_points)
}

fn cmd_hj_search(path: &Path, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "hj-search" };
    let cube = load_cube(path, cfg)?;
    let found = core!(ctx, hj_search(&cube));
    let mut result = json!({ "cube": print_cube(&cube).lines().next() });
    Ok(match found {
        Some(word) => {
            let line = word.line().map_err(usage)?;
            let color = cube.color(line[0].letters());
            result["word"] = json!(word.to_string());
            result["line"] = json!(line.iter().map(ToString::to_string).collect::<Vec<_>>());
            result["color"] = json!(color);
            ctx.report(Status::Found, result)
        }
        None => ctx.report(Status::NotFound, result),
    })
}

fn cmd_hj_number(r: usize, t: u32, n_max: usize, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "hj-number" };
    let res = core!(ctx, hj_number(r, t, n_max, cfg));
    let result = json!({ "r": r, "t": t, "max": n_max, "n": res.n, "avoiding": res.avoiding });
    let mut rep = ctx.report(if res.n.is_some() { Status::Found } else { Status::NotFound }, result);
    rep.perf.nodes = Some(res.nodes);
    Ok(rep)
}

fn cmd_phj_search(path: &Path, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "phj-search" };
    let cube = load_cube(path, cfg)?;
    let CubeShape::Phj { q, d, .. } = cube.shape() else {
        return Err(UsageError::new("phj-search needs a \"phj q N d r\" cube"));
    };
    let found = core!(ctx, phj_search(&cube, cfg));
    let mut result = json!({ "cube": print_cube(&cube).lines().next() });
    Ok(match found {
        Some((a, gamma)) => {
            let x = vec![1; d];
            let first = phj_oplus(q, &a, &gamma, &x).map_err(usage)?;
            let color = first.letters(q).map(|l| cube.color(&l));
            result["point"] = json!(a.to_string());
            result["gamma"] = json!(gamma.to_string());
            result["color"] = json!(color);
            ctx.report(Status::Found, result)
        }
        None => ctx.report(Status::NotFound, result),
    })
}

fn cmd_phj_embed(point: &str, n: usize, xs: &str, overwrite: Option<(&str, &str)>, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "phj-embed" };
    let a = PhjPoint::formal(n, parse_levels(point)?).map_err(usage)?;
    let xs = GenSeq::from_slice(&parse_list(xs, "--xs")?).map_err(usage)?;
    let Some((gamma, c)) = overwrite else {
        let v = core!(ctx, gamma_embed(&a, &xs));
        return Ok(ctx.report(Status::Found, json!({ "point": a.to_string(), "value": big(&v) })));
    };
    let gamma = VarSet::new(n, parse_list(gamma, "--gamma")?).map_err(usage)?;
    let c: Vec<i64> = parse_list(c, "--c")?;
    if c.len() != a.d() {
        return Err(UsageError::new(format!("--c has {} values, the point has {} levels", c.len(), a.d())));
    }
    let p = core!(ctx, embedded_pattern(&a, &gamma, &xs, &c));
    let mut rhs = p.base.clone();
    let mut power = BigInt::from(1);
    for &cj in &c {
        power *= &p.step;
        rhs += &power * cj;
    }
    let holds = rhs == p.value;
    let result = json!({
        "point": a.to_string(),
        "gamma": gamma.to_string(),
        "base": big(&p.base),
        "step": big(&p.step),
        "value": big(&p.value),
        "identity": holds,
    });
    Ok(ctx.report(if holds { Status::Found } else { Status::NotFound }, result))
}

fn cmd_identity(limits: IdentityLimits, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "phj-embed" };
    let rep = core!(ctx, verify_embedding_identity(limits, cfg));
    let status = if rep.failures == 0 { Status::Found } else { Status::NotFound };
    let mut report = ctx.report(status, json!({ "limits": limits, "cases": rep.cases, "failures": rep.failures }));
    if let Some(f) = rep.first_failure {
        report.counterexamples.push(json!(f));
    }
    Ok(report)
}

fn cmd_config_r(set: &Path, poly: &str, g: usize, l: usize, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "config-R" };
    let (a, _) = load_set(set)?;
    let fam = family(poly)?;
    let params = LargenessParams::new(g, l).map_err(usage)?;
    let r = config_set_r(&a, &fam, params);
    let members: Vec<usize> = r.members().collect();
    let status = if members.is_empty() { Status::NotFound } else { Status::Found };
    Ok(ctx.report(status, json!({ "window": a.window_end(), "r_set": members })))
}

fn ipstar_json(o: &IpStar) -> Value {
    match o {
        IpStar::Counterexample { seq } => {
            let sums: Vec<Value> = fs(seq).iter().map(|&v| big(&BigInt::from(v))).collect();
            json!({ "seq": seq.xs(), "sums": sums })
        }
        _ => Value::Null,
    }
}

fn cmd_ipstar(set: &Path, r: usize, distinct: bool, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "ipstar-check" };
    let (a, _) = load_set(set)?;
    let out = core!(ctx, is_ip_r_star(&a, r, distinct, cfg.workers));
    let result = json!({ "window": a.window_end(), "r": r, "distinct": distinct, "outcome": out });
    let mut rep = ctx.report(
        match out {
            IpStar::Holds => Status::Found,
            IpStar::Counterexample { .. } => Status::NotFound,
            IpStar::Vacuous => Status::Exhausted,
        },
        result,
    );
    if matches!(out, IpStar::Counterexample { .. }) {
        rep.counterexamples.push(ipstar_json(&out));
    }
    Ok(rep)
}

fn cmd_ipr(set: &Path, poly: &str, g: usize, l: usize, r_max: usize, distinct: bool, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "ipr-verify" };
    let (a, _) = load_set(set)?;
    let fam = family(poly)?;
    let params = LargenessParams::new(g, l).map_err(usage)?;
    let rep = core!(ctx, verify_ipr_pvdw(&a, &fam, params, r_max, distinct, cfg));
    let status = match (rep.least_r, rep.attempts.last()) {
        (Some(_), _) => Status::Found,
        (None, Some((_, IpStar::Vacuous))) => Status::Exhausted,
        _ => Status::NotFound,
    };
    let mut report = ctx.report(status, serde_json::to_value(&rep).expect("serializable"));
    for (r, o) in &rep.attempts {
        if matches!(o, IpStar::Counterexample { .. }) {
            let mut v = ipstar_json(o);
            v["r"] = json!(r);
            report.counterexamples.push(v);
        }
    }
    Ok(report)
}

fn cmd_sumsub_search(set: &Path, set_b: Option<&Path>, x: &str, poly: &str, n_target: usize, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "sumsub-search" };
    let (a, a_text) = load_set(set)?;
    let b = set_b.map(load_set).transpose()?;
    let x = seq(x, false, "--x")?;
    let fam = family(poly)?;
    let found = core!(ctx, sumsub_pattern_search(&a, b.as_ref().map(|b| &b.0), &x, &fam, n_target, cfg));
    let Some(res) = found else {
        return Ok(ctx.report(Status::NotFound, json!({ "n_target": n_target })));
    };
    let result = json!({
        "n_target": n_target,
        "y": res.y.xs(),
        "blocks": res.blocks.blocks(),
        "anchors": res.anchors,
    });
    let mut rep = ctx.report(Status::Found, result);
    let context = ContextSpec::Sets {
        a: a_text,
        b: b.map(|b| b.1),
    };
    for w in sumsub_witnesses(&res, &x, &fam) {
        rep.witnesses.push(ctx.record(
            w,
            Some(a.window_end()),
            2,
            context.clone(),
            "block partitions in canonical order, least anchor",
        ));
    }
    Ok(rep)
}

fn cmd_tower(expr: Option<&str>, fk: Option<(usize, u64)>, star_args: Option<&str>, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "tower" };
    if let Some(text) = expr {
        let e: TowerExpr = text.parse().map_err(|e| UsageError::new(format!("--expr: {e}")))?;
        let v = core!(ctx, e.eval(cfg.bit_cap));
        return Ok(ctx.report(Status::Found, json!({ "expr": e.to_string(), "value": ubig(&v), "bits": v.bits() })));
    }
    if let Some((k, x)) = fk {
        let f = core!(ctx, f_seq(k, x, cfg.bit_cap));
        let result = json!({ "k": k, "x": x, "expr": f.expr.to_string(), "value": f.value.as_ref().map(ubig) });
        return Ok(ctx.report(if f.value.is_some() { Status::Found } else { Status::Capped }, result));
    }
    if let Some(text) = star_args {
        let args: Vec<u64> = parse_list(text, "--star")?;
        let [n, a, b] = args[..] else {
            return Err(UsageError::new(format!("--star {text:?}: expected n,a,b")));
        };
        let v = core!(ctx, star(&n.into(), &a.into(), &b.into(), cfg.bit_cap));
        return Ok(ctx.report(Status::Found, json!({ "n": n, "a": a, "b": b, "value": ubig(&v) })));
    }
    Err(UsageError::new("tower needs one of --expr, --f-seq with --x, or --star"))
}

fn cmd_pf_pattern(n: u64, xs: &str, polys: &str, k_max: usize, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "pf-pattern" };
    let xs = seq(xs, false, "--xs")?;
    let choices = polys
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(family)
        .collect::<Result<Vec<_>, _>>()?;
    let pat = core!(ctx, pf_pattern(n, &xs, &choices, k_max, cfg.bit_cap));
    let values: Vec<Value> = pat.values.iter().map(ubig).collect();
    let status = if pat.complete() { Status::Found } else { Status::Capped };
    Ok(ctx.report(status, json!({ "n": n, "k_max": k_max, "values": values, "omitted": pat.omitted })))
}

/// Witness records from a report, a list of records or a single record.
pub fn witness_records(text: &str) -> Result<Vec<WitnessRecord>, UsageError> {
    let bad = |e: serde_json::Error| UsageError::new(format!("witness file: {e}"));
    let v: Value = serde_json::from_str(text).map_err(bad)?;
    if let Some(ws) = v.get("witnesses") {
        serde_json::from_value(ws.clone()).map_err(bad)
    } else if v.is_array() {
        serde_json::from_value(v).map_err(bad)
    } else {
        Ok(vec![serde_json::from_value(v).map_err(bad)?])
    }
}

/// Re-check one record against its own context.
pub fn check_record(rec: &WitnessRecord) -> Result<ramsey_core::search::Validation, UsageError> {
    match &rec.context {
        ContextSpec::Coloring { text } => match parse_coloring(text)? {
            ColoringInput::Dense(c) => Ok(validate_witness(&rec.witness, WitnessContext::Dense(&c))),
            ColoringInput::Rule(rc) => Ok(validate_witness(&rec.witness, WitnessContext::Rule(&rc))),
        },
        ContextSpec::Sets { a, b } => {
            let a = parse_window_set(a)?;
            let b = b.as_deref().map(parse_window_set).transpose()?;
            Ok(validate_witness(&rec.witness, WitnessContext::Sets { a: &a, b: b.as_ref() }))
        }
    }
}

fn cmd_verify(path: &Path, src: &ColoringSource, set: Option<&Path>, set_b: Option<&Path>, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "verify-witness" };
    let mut records = witness_records(&read(path)?)?;
    let context = if src.coloring.is_some() || src.rule.is_some() {
        Some(ContextSpec::Coloring { text: load_coloring(src)?.1 })
    } else if let Some(p) = set {
        Some(ContextSpec::Sets {
            a: load_set(p)?.1,
            b: set_b.map(load_set).transpose()?.map(|b| b.1),
        })
    } else {
        None
    };
    if let Some(c) = context {
        for r in &mut records {
            r.context = c.clone();
        }
    }
    let mut checks = Vec::new();
    let mut valid = Vec::new();
    for (i, rec) in records.into_iter().enumerate() {
        let v = check_record(&rec)?;
        checks.push(json!({ "index": i, "kind": rec.witness.kind, "valid": v.valid, "diagnostic": v.diagnostic }));
        if v.valid {
            valid.push(rec);
        }
    }
    let all = !checks.is_empty() && valid.len() == checks.len();
    let mut rep = ctx.report(
        if all { Status::Found } else { Status::NotFound },
        json!({ "checked": checks.len(), "valid": valid.len(), "checks": checks }),
    );
    if all {
        rep.witnesses = valid;
    }
    Ok(rep)
}

fn cmd_fep_search(range: Option<&str>, blocks: Option<&str>, size: usize, src: &ColoringSource, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "fep-search" };
    let (rc, text) = load_rule(src)?;
    let cands = match (range, blocks) {
        (Some(r), _) => {
            let (lo, hi) = r
                .split_once("..")
                .ok_or_else(|| UsageError::new(format!("--range {r:?}: expected lo..hi")))?;
            let lo = lo.trim().parse().map_err(|_| UsageError::new(format!("--range: bad bound {lo:?}")))?;
            let hi = hi.trim().parse().map_err(|_| UsageError::new(format!("--range: bad bound {hi:?}")))?;
            FepCandidates::Range { lo, hi }
        }
        (None, Some(b)) => FepCandidates::Blocks(
            b.split(';')
                .map(|blk| seq(blk, true, "--blocks"))
                .collect::<Result<_, _>>()?,
        ),
        (None, None) => return Err(UsageError::new("fep-search needs --range or --blocks")),
    };
    let res = core!(ctx, fep_monochrome_search(&cands, size, &rc, cfg.bit_cap, cfg.workers));
    let result = json!({ "size": size, "examined": res.examined, "skipped": res.skipped });
    let mut rep = match &res.found {
        Some((s, color)) => {
            let elements = core!(ctx, ramsey_core::combinatorics::fep(s, cfg.bit_cap))
                .into_iter()
                .map(|v| BigInt::from_biguint(Sign::Plus, v))
                .collect();
            let w = Witness {
                kind: ramsey_core::search::WitnessKind::Tower,
                elements,
                color: *color,
                params: ramsey_core::search::WitnessParams::Tower { seq: s.clone(), bit_cap: cfg.bit_cap },
            };
            let mut rep = ctx.report(Status::Found, result);
            rep.witnesses.push(ctx.record(
                w,
                None,
                rc.colors(),
                ContextSpec::Coloring { text },
                "increasing sequences in lexicographic order",
            ));
            rep
        }
        None if !res.skipped.is_empty() => ctx.report(Status::Capped, result),
        None => ctx.report(Status::Exhausted, result),
    };
    rep.perf.nodes = Some(res.examined);
    Ok(rep)
}

fn cmd_lambda(a: &str, big_n: u64, bounds: Option<&str>, src: &ColoringSource, max_elements: u64, cfg: &SearchConfig) -> Outcome {
    let ctx = Ctx { cfg, command: "lambda-check" };
    let a = seq(a, false, "--a")?;
    let (rc, _) = load_rule(src)?;
    let bounds = match bounds {
        None | Some("tower") => LambdaBounds::Tower,
        Some(list) => LambdaBounds::Explicit(parse_list(list, "--bounds")?),
    };
    let res = core!(ctx, check_lambda_pattern(&a, big_n, &bounds, &rc, cfg.bit_cap, max_elements));
    let result = json!({ "a": a.xs(), "big_n": big_n, "examined": res.examined, "omitted": res.omitted });
    let mut rep = match &res.failing {
        Some((v, k, lambdas)) => {
            let mut rep = ctx.report(Status::NotFound, result);
            rep.counterexamples.push(json!({ "value": ubig(v), "k": k, "lambdas": lambdas }));
            rep
        }
        None if !res.omitted.is_empty() => ctx.report(Status::Capped, result),
        None => ctx.report(Status::Found, result),
    };
    rep.perf.nodes = Some(res.examined);
    Ok(rep)
}
