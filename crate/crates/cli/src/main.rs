use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use regmaps::algebra::{smith_normal_form, IntMatrix};
use regmaps::constructors::{
    build_semidirect_cell, find_cell_base, find_triples, index_two_subgroup, GroupDescriptor, SemidirectSpec,
};
use regmaps::families::{
    check_instance, group_spot_checks, row_chi, scan_pgl_cases, search_c1_c2, search_c3, search_c4, search_c6_c7,
    table_instances, verify_congruence_row, verify_corollary_table_with, FamilyRow, RowId, SearchWindow,
    CONGRUENCE_ROWS,
};
use regmaps::homology::branched_rank_check;
use regmaps::mapcore::{classify_maps_capped, map_counts, verify_structural_lemmas, MapTriple, CENSUS_CAP};
use regmaps::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "regmaps", version, about = "Regular maps with Euler characteristic -r^d: checks and searches")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Tsv,
    Text,
}

#[derive(Clone, Copy, Debug)]
struct TypePair(u64, u64);

impl FromStr for TypePair {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected m,n but got '{s}'"))?;
        let p = |x: &str| x.trim().parse::<u64>().map_err(|_| format!("bad number '{x}'"));
        Ok(TypePair(p(a)?, p(b)?))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certificate and structural checks for a (2,m,n)* triple of a group.
    Verify {
        group: String,
        #[arg(long = "type")]
        type_pair: TypePair,
        /// Catalogue label echoed into the certificate.
        #[arg(long)]
        label: Option<String>,
    },
    /// Every (2,m,n)* triple of a group up to automorphisms.
    Census {
        group: String,
        #[arg(long, default_value_t = CENSUS_CAP)]
        cap: usize,
    },
    /// Row searches and congruence scans.
    Family {
        #[arg(long)]
        row: String,
        /// Upper end of the main search variable.
        #[arg(long)]
        max: Option<u64>,
        /// Lower end of the main search variable.
        #[arg(long)]
        min: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, default_value_t = 2)]
        alpha_max: u64,
        #[arg(long, default_value_t = 2)]
        beta_max: u64,
        /// Row parameter for a direct -chi evaluation, e.g. ell=13073.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// Row formula against the Euler formula for every tabulated instance.
    Tables {
        #[arg(long)]
        all: bool,
    },
    /// The split table of groups, types and characteristics.
    Corollary {
        /// Largest group order for the map-count census.
        #[arg(long, default_value_t = CENSUS_CAP)]
        budget: usize,
    },
    /// Rank of the branched-cover kernel abelianization mod r.
    CoverRank {
        #[arg(long)]
        group: String,
        #[arg(long = "type")]
        type_pair: TypePair,
        #[arg(long)]
        r: u64,
    },
    /// Smith normal form of an integer matrix file (rows of integers, or a
    /// JSON array of rows).
    Snf { file: PathBuf },
    /// PGL_2(q) types whose characteristic is minus an odd prime power.
    ScanPgl {
        #[arg(long, default_value_t = 121)]
        q_bound: u64,
    },
}

struct Outcome {
    results: Vec<Value>,
    pass: bool,
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable report item")
}

fn with_pass(mut v: Value, pass: bool) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("pass".into(), Value::Bool(pass));
    }
    v
}

fn all_pass(results: &[Value]) -> bool {
    results.iter().all(|r| r.get("pass").and_then(Value::as_bool).unwrap_or(true))
}

fn find_exact(g: &regmaps::permgrp::PermGroup, m: u64, n: u64) -> Result<std::result::Result<MapTriple, String>> {
    let s = find_triples(g, m, n, 1)?;
    Ok(match s.triples.into_iter().next() {
        Some(t) => Ok(t),
        None if s.exhaustive => Err(format!("the group has no (2,{m},{n})* triple")),
        None => Err(format!("no (2,{m},{n})* triple found within the search cap")),
    })
}

fn verify(group: &str, tp: TypePair, label: Option<String>) -> Result<Outcome> {
    let desc: GroupDescriptor = group.parse()?;
    let TypePair(m, n) = tp;
    if let GroupDescriptor::Cell(base, ell) = &desc {
        let h = base.build(None)?.group;
        let h0 = index_two_subgroup(&h)?;
        let Some(t) = find_cell_base(&h, &h0, m, n)? else {
            let v = json!({"group": group, "error": format!("no ({m},{n}) base triple with a usable membership pattern")});
            return Ok(Outcome { results: vec![with_pass(v, false)], pass: false });
        };
        let cell = build_semidirect_cell(&SemidirectSpec { base: t, h0, ell: *ell })?;
        let mut cert = cell.certificate();
        if let Some(l) = label {
            cert = cert.with_label(l);
        }
        let lemmas = match &cell.triple {
            Some(t) => Some(verify_structural_lemmas(t)?),
            None => None,
        };
        let pass = lemmas.as_ref().is_none_or(|l| l.all_pass()) && cert.non_orientable;
        let v = json!({
            "group": group,
            "certificate": to_value(&cert),
            "generation": cell.generation,
            "materialized": cell.triple.is_some(),
            "lemmas": lemmas.as_ref().map(to_value),
        });
        return Ok(Outcome { results: vec![with_pass(v, pass)], pass });
    }
    let built = desc.build(None)?;
    let triple = match built.triple.filter(|t| (t.m(), t.n()) == (m, n)) {
        Some(t) => t,
        None => match find_exact(&built.group, m, n)? {
            Ok(t) => t,
            Err(msg) => {
                let v = json!({"group": group, "type": [m, n], "error": msg});
                return Ok(Outcome { results: vec![with_pass(v, false)], pass: false });
            }
        },
    };
    let mut cert = triple.certificate();
    if let Some(l) = label {
        cert = cert.with_label(l);
    }
    let lemmas = verify_structural_lemmas(&triple)?;
    let pass = lemmas.all_pass() && cert.non_orientable;
    let v = json!({
        "group": group,
        "certificate": to_value(&cert),
        "triple": [triple.a().to_string(), triple.b().to_string(), triple.c().to_string()],
        "lemmas": to_value(&lemmas),
    });
    Ok(Outcome { results: vec![with_pass(v, pass)], pass })
}

fn census(group: &str, cap: usize) -> Result<Outcome> {
    let desc: GroupDescriptor = group.parse()?;
    let g = desc.build(None)?.group;
    let c = classify_maps_capped(&g, cap)?;
    let results = c
        .classes
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let cert = map_counts(&k.triple);
            json!({
                "class": i,
                "m": k.m,
                "n": k.n,
                "chi": k.chi,
                "dual": k.dual,
                "self_dual": k.self_dual(i),
                "hyperbolic": k.m >= 3 && k.n >= 3 && k.chi < 0,
                "V": cert.vertices,
                "E": cert.edges,
                "F": cert.faces,
                "r": cert.r,
                "d": cert.d,
                "pass": true,
            })
        })
        .collect();
    Ok(Outcome { results, pass: true })
}

fn parse_params(params: &[String]) -> Result<Vec<(String, num_bigint::BigUint)>> {
    params
        .iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| Error::Parse(format!("expected KEY=VALUE, got '{p}'")))?;
            let v = v.trim().parse().map_err(|_| Error::Parse(format!("bad value in '{p}'")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn family(
    row: &str,
    min: Option<u64>,
    max: Option<u64>,
    r: Option<u64>,
    d: Option<u32>,
    alpha_max: u64,
    beta_max: u64,
    params: &[String],
) -> Result<Outcome> {
    let id: RowId = row.parse()?;
    if !params.is_empty() {
        let ps = parse_params(params)?;
        let refs: Vec<(&str, num_bigint::BigUint)> = ps.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        let fr = FamilyRow::new(id, &refs)?;
        let (value, pass, err) = match row_chi(&fr) {
            Ok(v) => (Some(v.to_string()), true, None),
            Err(e) => (None, false, Some(e.to_string())),
        };
        let v = json!({"row": id, "params": to_value(&fr)["params"], "type": to_value(&fr)["type_pair"],
            "order": fr.order()?.to_string(), "neg_chi": value, "error": err, "pass": pass});
        return Ok(Outcome { results: vec![v], pass });
    }
    let results: Vec<Value> = match id {
        _ if CONGRUENCE_ROWS.contains(&id) && r.is_none() => {
            let mut w = SearchWindow::new();
            if min.is_some() || max.is_some() {
                let (dlo, dhi) = regmaps::families::default_congruence_window(id)?;
                let var = if id == RowId::B3 { "d" } else { "j" };
                w = w.with(var, min.unwrap_or(dlo), max.unwrap_or(dhi));
            }
            let c = verify_congruence_row(id, &w)?;
            vec![to_value(&c)]
        }
        RowId::C1 | RowId::C2 => search_c1_c2(max.unwrap_or(5) as u32)?
            .iter()
            .filter(|h| h.row == id)
            .map(|h| with_pass(to_value(h), true))
            .collect(),
        RowId::C3 => {
            let r = r.ok_or_else(|| Error::param("C3 needs --r"))?;
            let ds: Vec<u32> = match d {
                Some(d) => vec![d],
                None => (1..=max.unwrap_or(5) as u32).filter(|x| x % 2 == 1).collect(),
            };
            let mut out = Vec::new();
            for d in ds {
                for (j, k) in search_c3(r, d)? {
                    out.push(json!({"r": r, "d": d, "j": j, "k": k, "type": [2 * j, 2 * k], "pass": true}));
                }
            }
            out
        }
        RowId::C4 => {
            let r = r.ok_or_else(|| Error::param("C4 needs --r"))?;
            let w = SearchWindow::new()
                .with("i", min.unwrap_or(0), max.unwrap_or(20))
                .with("alpha", 1, alpha_max)
                .with("beta", 0, beta_max);
            search_c4(r, &w)?.iter().map(|s| with_pass(to_value(s), true)).collect()
        }
        RowId::C5 | RowId::C6 | RowId::C7 => {
            let r = match id {
                RowId::C6 => 3,
                _ => r.ok_or_else(|| Error::param(format!("{id} needs --r")))?,
            };
            let (alo, ahi) = if id == RowId::C5 { (0, 0) } else { (1, alpha_max) };
            let w = SearchWindow::new()
                .with("alpha", alo, ahi)
                .with("beta", 0, beta_max.min(ahi))
                .with("delta", min.unwrap_or(0), max.unwrap_or(40));
            search_c6_c7(r, &w)?
                .iter()
                .filter(|h| h.row == Some(id))
                .map(|h| with_pass(to_value(h), true))
                .collect()
        }
        _ => {
            return Err(Error::param(format!("row {id} has no search; give its parameters with --param")));
        }
    };
    let pass = all_pass(&results);
    Ok(Outcome { results, pass })
}

fn tables(all: bool) -> Result<Outcome> {
    let mut results: Vec<Value> = table_instances().iter().map(|t| to_value(&check_instance(t))).collect();
    if all {
        for (name, got, want) in group_spot_checks() {
            results.push(json!({"label": name, "neg_chi": got.to_string(), "expected": want.to_string(), "pass": got == want}));
        }
    }
    let pass = all_pass(&results);
    Ok(Outcome { results, pass })
}

fn corollary(budget: usize) -> Result<Outcome> {
    let r = verify_corollary_table_with(budget);
    let results = r.rows.iter().map(to_value).collect();
    Ok(Outcome { results, pass: r.pass() })
}

fn cover_rank(group: &str, tp: TypePair, r: u64) -> Result<Outcome> {
    let g = group.parse::<GroupDescriptor>()?.build(None)?.group;
    let t = match find_exact(&g, tp.0, tp.1)? {
        Ok(t) => t,
        Err(msg) => {
            let v = json!({"group": group, "type": [tp.0, tp.1], "r": r, "error": msg, "pass": false});
            return Ok(Outcome { results: vec![v], pass: false });
        }
    };
    let b = branched_rank_check(&t, r)?;
    let mut v = to_value(&b);
    v["group"] = json!(group);
    v["type"] = json!([tp.0, tp.1]);
    Ok(Outcome { pass: b.pass, results: vec![v] })
}

fn read_matrix(path: &PathBuf) -> Result<IntMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let rows: Vec<Vec<BigInt>> = if text.trim_start().starts_with('[') {
        let v: Vec<Vec<Value>> = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        v.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|x| match x {
                        Value::Number(n) => n.to_string().parse().map_err(|_| Error::Parse(format!("bad entry {n}"))),
                        Value::String(s) => s.parse().map_err(|_| Error::Parse(format!("bad entry {s}"))),
                        other => Err(Error::Parse(format!("bad entry {other}"))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?
    } else {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad entry '{x}'"))))
                    .collect()
            })
            .collect::<Result<_>>()?
    };
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("rows have different lengths".into()));
    }
    IntMatrix::new(rows.len(), cols, rows.into_iter().flatten().collect())
}

fn snf(file: &PathBuf) -> Result<Outcome> {
    let m = read_matrix(file)?;
    let s = smith_normal_form(&m);
    let mut v = to_value(&s);
    v["rows"] = json!(m.rows());
    v["cols"] = json!(m.cols());
    v["rank"] = json!(s.rank());
    v["torsion"] = json!(s.torsion().iter().map(|x| x.to_string()).collect::<Vec<_>>());
    v["pass"] = json!(true);
    Ok(Outcome { results: vec![v], pass: true })
}

fn scan_pgl(q_bound: u64) -> Result<Outcome> {
    let cases = scan_pgl_cases(q_bound)?;
    let results = cases.iter().map(|c| with_pass(to_value(c), true)).collect();
    Ok(Outcome { results, pass: true })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Verify { .. } => "verify",
        Command::Census { .. } => "census",
        Command::Family { .. } => "family",
        Command::Tables { .. } => "tables",
        Command::Corollary { .. } => "corollary",
        Command::CoverRank { .. } => "cover-rank",
        Command::Snf { .. } => "snf",
        Command::ScanPgl { .. } => "scan-pgl",
    }
}

fn dispatch(c: &Command) -> Result<Outcome> {
    match c {
        Command::Verify { group, type_pair, label } => verify(group, *type_pair, label.clone()),
        Command::Census { group, cap } => census(group, *cap),
        Command::Family { row, max, min, r, d, alpha_max, beta_max, params } => {
            family(row, *min, *max, *r, *d, *alpha_max, *beta_max, params)
        }
        Command::Tables { all } => tables(*all),
        Command::Corollary { budget } => corollary(*budget),
        Command::CoverRank { group, type_pair, r } => cover_rank(group, *type_pair, *r),
        Command::Snf { file } => snf(file),
        Command::ScanPgl { q_bound } => scan_pgl(*q_bound),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_tsv(results: &[Value]) -> String {
    let mut keys: Vec<String> = Vec::new();
    for r in results {
        if let Value::Object(m) = r {
            for k in m.keys() {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
    }
    let mut out = keys.join("\t");
    out.push('\n');
    for r in results {
        let row: Vec<String> = keys.iter().map(|k| r.get(k).map(cell).unwrap_or_default()).collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

fn render_text(command: &str, results: &[Value], pass: bool) -> String {
    let mut out = String::new();
    for r in results {
        match r {
            Value::Object(m) => {
                let parts: Vec<String> = m
                    .iter()
                    .filter(|(_, v)| !v.is_null())
                    .map(|(k, v)| format!("{k}={}", cell(v)))
                    .collect();
                out.push_str(&parts.join(" "));
            }
            other => out.push_str(&other.to_string()),
        }
        out.push('\n');
    }
    out.push_str(&format!("{command}: {} item(s), {}\n", results.len(), if pass { "PASS" } else { "FAIL" }));
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let t0 = Instant::now();
    let name = command_name(&cli.command);
    let outcome = match dispatch(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse(_) | Error::Parameter(_) => 2,
                _ => 1,
            };
            return ExitCode::from(code);
        }
    };
    let pass = outcome.pass && all_pass(&outcome.results);
    let text = match cli.format {
        Format::Json => {
            let mut report = Map::new();
            report.insert("schema".into(), json!(1));
            report.insert("tool".into(), json!("regmaps"));
            report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
            report.insert("command".into(), json!(name));
            report.insert("argv".into(), json!(std::env::args().skip(1).collect::<Vec<_>>()));
            report.insert("results".into(), Value::Array(outcome.results));
            report.insert("pass".into(), json!(pass));
            report.insert("elapsed_ms".into(), json!(t0.elapsed().as_millis() as u64));
            let mut s = serde_json::to_string_pretty(&Value::Object(report)).expect("json");
            s.push('\n');
            s
        }
        Format::Tsv => render_tsv(&outcome.results),
        Format::Text => render_text(name, &outcome.results, pass),
    };
    print!("{text}");
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
