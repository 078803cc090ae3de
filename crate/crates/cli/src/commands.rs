use std::fs;

use serde::Deserialize;
use serde_json::{json, Value};
use tautrec::graphs::{automorphism_count, enumerate_stable_graphs};
use tautrec::gwcalc::{
    expr_to_json, format_term, parse_expr, solve_term, top_psi_identity, translate, verify_identity, Rule, RuleSet,
};
use tautrec::linalg::{
    from_sparse, kappa_free_relations, read_checkpoint, rref_filtered, solve_for, solve_within_rational, to_sparse,
    write_checkpoint, CheckpointHeader, Rref, SparseVec, CHECKPOINT_VERSION,
};
use tautrec::pixton::{for_each_task, pixton_relation, relation_set, PixtonInput};
use tautrec::strata::{basis, Basis, DecoratedStratum, StrataVector};
use tautrec::Rational;

use crate::config::{Command, JobConfig};
use crate::error::{CliError, Result};
use crate::store::Cache;
use crate::VERSION;

/// Result of one job: the payload section of the output document and whether
/// the job passed (a failed verification or an unsolved target does not).
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub payload: Value,
    pub passed: bool,
}

fn passed(command: Command, payload: &Value) -> bool {
    match command {
        Command::Derive => !payload["solution"].is_null(),
        Command::Verify => payload["holds"] == true && payload["normal_form_matches"] != false,
        _ => true,
    }
}

/// Validates `c` and runs it, consulting the cache for deterministic commands.
pub fn execute(c: &JobConfig) -> Result<Outcome> {
    c.validate()?;
    let cache = c.cache_dir.as_ref().map(Cache::new);
    let cacheable = !matches!(c.command, Command::Translate | Command::Verify);
    if let Some(cache) = cache.as_ref().filter(|_| cacheable) {
        if let Some(payload) = cache.load(c)? {
            return Ok(Outcome { passed: passed(c.command, &payload), payload });
        }
    }
    let payload = match c.command {
        Command::Graphs => graphs(c)?,
        Command::Basis => basis_listing(c)?,
        Command::Pixton => pixton(c)?,
        Command::Rank => rank(c)?,
        Command::Derive => derive(c)?,
        Command::Translate => translate_file(c)?,
        Command::Verify => verify(c)?,
    };
    if let Some(cache) = cache.as_ref().filter(|_| cacheable) {
        cache.store(c, &payload)?;
    }
    Ok(Outcome { passed: passed(c.command, &payload), payload })
}

fn graphs(c: &JobConfig) -> Result<Value> {
    let (g, n) = c.gn();
    let list = enumerate_stable_graphs(g, n)?;
    let records: Vec<Value> = list
        .iter()
        .enumerate()
        .map(|(i, gr)| json!({"index": i, "graph": gr.to_json(), "automorphisms": automorphism_count(gr)}))
        .collect();
    Ok(json!({"g": g, "n": n, "count": records.len(), "graphs": records}))
}

fn basis_listing(c: &JobConfig) -> Result<Value> {
    let (g, n) = c.gn();
    let r = c.need_r()?;
    let b = basis(g, n, r)?;
    let strata: Vec<Value> = b
        .keys
        .iter()
        .enumerate()
        .map(|(i, k)| Ok(json!({"index": i, "key": k.to_hex(), "kappa": k.has_kappa(), "stratum": k.decode()?.to_json()})))
        .collect::<Result<_>>()?;
    Ok(json!({"g": g, "n": n, "r": r, "size": b.len(), "kappa_count": b.kappa_count, "strata": strata}))
}

fn pixton(c: &JobConfig) -> Result<Value> {
    let (g, n) = c.gn();
    let input = PixtonInput::new(g, n, c.need_r()?, c.sigma.clone(), c.pixton_a())?;
    let rel = pixton_relation::<Rational>(&input, c.kappa_variant.into())?;
    Ok(json!({
        "g": g, "n": n, "r": input.r, "sigma": input.sigma, "a": input.a,
        "terms": rel.len(),
        "kappa_free": !rel.keys().any(|k| k.has_kappa()),
        "relation": rel.to_json(),
    }))
}

fn rank(c: &JobConfig) -> Result<Value> {
    let (g, n) = c.gn();
    let r = c.need_r()?;
    let b = basis(g, n, r)?;
    let rows = relation_set::<Rational>(g, n, r, c.kappa_variant.into())?;
    let sparse: Vec<SparseVec<Rational>> = rows.iter().map(|v| to_sparse(v, &b)).collect::<tautrec::Result<_>>()?;
    let (red, _) = rref_filtered(&sparse, b.len());
    Ok(json!({
        "g": g, "n": n, "r": r,
        "basis": b.len(), "kappa_count": b.kappa_count,
        "rows": rows.len(), "rank": red.rank(), "corank": b.len() - red.rank(),
        "kappa_free": kappa_free_relations(&red, &b).len(),
    }))
}

/// Row-reduces the full relation set, absorbing rows in batches of
/// `checkpoint_every` and saving the echelon state after each batch when a
/// cache directory is configured. A saved state for the same job is resumed.
fn derive_rref(c: &JobConfig, b: &Basis) -> Result<(Rref<Rational>, usize)> {
    let (g, n) = c.gn();
    let r = c.derive_r();
    let ncols = b.len();
    let job = json!({"command": "derive", "g": g, "n": n, "r": r, "kappa_variant": c.kappa_variant, "version": VERSION});
    let path = match &c.cache_dir {
        Some(d) => Some(Cache::new(d).checkpoint_path(c)?),
        None => None,
    };
    if let Some(dir) = path.as_ref().and_then(|p| p.parent()) {
        fs::create_dir_all(dir)?;
    }
    let mut rows: Vec<SparseVec<Rational>> = Vec::new();
    let mut start = 0;
    if let Some(p) = path.as_ref().filter(|p| p.exists()) {
        let (h, e) = read_checkpoint(p)
            .map_err(|e| CliError::Inconsistent(format!("refusing corrupt checkpoint {}: {e}", p.display())))?;
        if h.job != job || h.ncols != ncols {
            return Err(CliError::Inconsistent(format!("checkpoint {} belongs to a different job", p.display())));
        }
        rows = e.rows().cloned().collect();
        start = h.next_row;
    }
    let mut pending = 0;
    let mut written = 0;
    let mut halted = false;
    let tasks = for_each_task::<Rational>(g, n, r, c.kappa_variant.into(), start, &mut |i, batch| {
        pending += batch.len();
        for v in &batch {
            rows.push(to_sparse(v, b)?);
        }
        if pending < c.checkpoint_every {
            return Ok(());
        }
        let red = rref_filtered(&rows, ncols).0;
        pending = 0;
        if let Some(p) = &path {
            let h = CheckpointHeader { version: CHECKPOINT_VERSION, ncols, next_row: i + 1, rank: red.rank(), job: job.clone() };
            write_checkpoint(p, &h, &red.to_echelon())?;
            written += 1;
            if c.halt_after_checkpoints == Some(written) {
                halted = true;
                return Err(tautrec::Error::invalid("halted"));
            }
        }
        rows = red.rows;
        Ok(())
    });
    if halted {
        return Err(CliError::Halted(written));
    }
    let tasks = tasks?;
    let red = rref_filtered(&rows, ncols).0;
    if let Some(p) = path.filter(|p| p.exists()) {
        fs::remove_file(p)?;
    }
    Ok((red, tasks))
}

fn derive(c: &JobConfig) -> Result<Value> {
    let (g, n) = c.gn();
    let r = c.derive_r();
    let target_stratum = DecoratedStratum::psi_power(g, n, r);
    let target = target_stratum
        .key()
        .ok_or_else(|| CliError::invalid(format!("psi_1^{r} vanishes on M({g},{n})")))?;
    let b = basis(g, n, r)?;
    let (red, tasks) = derive_rref(c, &b)?;
    let free = kappa_free_relations(&red, &b);
    let solved: Option<(StrataVector<Rational>, Option<bool>)> = match &c.within {
        Some(p) => {
            let support = parse_expr(&fs::read_to_string(p)?, c.delta_reading.into())?;
            if (support.genus(), support.legs()) != (g, n) {
                return Err(CliError::invalid(format!("--within expression is not on M({g},{n})")));
            }
            let allowed: Vec<_> = support.iter().map(|(k, _)| k.clone()).filter(|k| *k != target).collect();
            let all: Vec<StrataVector<Rational>> = red.rows.iter().map(|row| from_sparse(row, &b)).collect();
            solve_within_rational(&target, &all, &allowed).map(|s| (s.relation, Some(s.unique)))
        }
        None => solve_for(&target, &free).map(|rel| (rel, None)),
    };
    let solution = match solved {
        Some((relation, unique)) => {
            let expr = translate(&relation)?;
            let rhs = solve_term(&expr, &target)
                .ok_or_else(|| CliError::Inconsistent("solved relation lost its target".into()))?;
            json!({
                "g": g, "n": n,
                "unique": unique,
                "relation": relation.to_json(),
                "lhs": format_term(&Rational::from_integer(1.into()), &target_stratum).trim_start_matches("+1 "),
                "rhs": expr_to_json(&rhs)?,
                "text": rhs.to_string(),
            })
        }
        None => Value::Null,
    };
    Ok(json!({
        "g": g, "n": n, "r": r,
        "basis": b.len(), "kappa_count": b.kappa_count,
        "tasks": tasks, "rank": red.rank(), "kappa_free": free.len(),
        "target": target.to_hex(),
        "solution": solution,
    }))
}

/// Finds the strata relation in an output document of `pixton` or `derive`,
/// or in a bare `{"g", "n", "relation"}` object.
fn find_relation(doc: &Value) -> Result<StrataVector<Rational>> {
    let payload = doc.get("payload").unwrap_or(doc);
    let holder = [&payload["solution"], payload]
        .into_iter()
        .find(|v| v.get("relation").is_some())
        .ok_or_else(|| CliError::invalid("input holds no relation"))?;
    let int = |k: &str| {
        holder[k].as_u64().ok_or_else(|| CliError::invalid(format!("relation object lacks {k:?}")))
    };
    Ok(StrataVector::from_json(int("g")? as u32, int("n")? as usize, &holder["relation"])?)
}

fn translate_file(c: &JobConfig) -> Result<Value> {
    let doc: Value = serde_json::from_str(&fs::read_to_string(c.input.as_ref().expect("validated"))?)?;
    let rel = find_relation(&doc)?;
    let expr = translate(&rel)?;
    Ok(json!({"g": rel.g, "n": rel.n, "expr": expr_to_json(&expr)?, "text": expr.to_string()}))
}

#[derive(Deserialize)]
struct TopPsi {
    g: u32,
    r: u32,
}

/// Identity to verify: explicit sides, or the built-in top-ψ identity.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentitySpec {
    lhs: Option<String>,
    rhs: Option<String>,
    top_psi: Option<TopPsi>,
    /// Highest genus with a topological recursion rule, 3 or 4.
    #[serde(default = "default_max_genus")]
    max_genus: u32,
    /// Coefficient of the genus-1 rule.
    genus1: Option<String>,
    /// Expected common normal form.
    normal_form: Option<String>,
}

fn default_max_genus() -> u32 {
    3
}

fn verify(c: &JobConfig) -> Result<Value> {
    let spec: IdentitySpec = serde_json::from_str(&fs::read_to_string(c.input.as_ref().expect("validated"))?)?;
    let reading = c.delta_reading.into();
    let (lhs, rhs) = match (&spec.lhs, &spec.rhs, &spec.top_psi) {
        (Some(l), Some(r), None) => (parse_expr(l, reading)?, parse_expr(r, reading)?),
        (None, None, Some(t)) => top_psi_identity(t.g, t.r)?,
        _ => return Err(CliError::invalid("identity needs either lhs and rhs or top_psi")),
    };
    let genus1 = match &spec.genus1 {
        Some(s) => s.parse::<Rational>().map_err(|_| CliError::invalid(format!("bad genus1 coefficient {s:?}")))?,
        None => Rational::new(1.into(), 24.into()),
    };
    let rules = match spec.max_genus {
        3 => RuleSet::standard_with_genus1(genus1),
        4 => RuleSet::standard_with_genus1(genus1).with_rule(Rule::stored(4)?),
        m => return Err(CliError::invalid(format!("max_genus must be 3 or 4, got {m}"))),
    };
    let v = verify_identity(&lhs, &rhs, &rules)?;
    let matches = match &spec.normal_form {
        Some(s) => Some(rules.reduce(&parse_expr(s, reading)?)? == v.lhs),
        None => None,
    };
    Ok(json!({
        "holds": v.holds,
        "normal_form_matches": matches,
        "lhs": expr_to_json(&v.lhs)?,
        "rhs": expr_to_json(&v.rhs)?,
        "residual": expr_to_json(&v.residual)?,
        "lhs_text": v.lhs.to_string(),
        "residual_text": v.residual.to_string(),
    }))
}
