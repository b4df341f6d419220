//! Command dispatch and report emission.

use std::fmt;
use std::fs;
use std::path::Path;

use lorentz_core::cones::{ratio_supremum_bounds, sample_cone, ConeParams};
use lorentz_core::conditions::{
    bhc_condition, c_omega, c_xy, hardy_dual_condition, llogl_condition, lz_admissible, nolevel_condition, LzIndices,
};
use lorentz_core::fourier::{
    check_bound, jt_check, testfun_full, verify_inequality, InequalityKind, ModulatedStep, Piece, Suite, DEFAULT_N,
};
use lorentz_core::level::level_weight;
use lorentz_core::norms::{gamma_norm, lambda_norm, theta_norm};
use lorentz_core::{sample, AveragingOp, Grid, StepFunction, Verdict, Weight};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Cli, Command, Common, ConditionArgs, ConditionCmd};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(lorentz_core::Error),
    Io(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "{m}"),
            Self::Core(e) => write!(f, "{e}"),
            Self::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<lorentz_core::Error> for Failure {
    fn from(e: lorentz_core::Error) -> Self {
        Self::Core(e)
    }
}

type Res<T> = Result<T, Failure>;

fn need<T: Clone>(v: &Option<T>, name: &str) -> Res<T> {
    v.clone().ok_or_else(|| Failure::Usage(format!("missing --{name}")))
}

fn weight(expr: &str) -> Res<Weight> {
    Ok(Weight::parse(expr)?)
}

/// A rectangular table for CSV output.
struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

struct Outcome {
    result: Value,
    table: Option<Table>,
    flagged: bool,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Config values for `section` (top-level keys, then the section's table)
/// overlaid with every flag that was given.
fn merge<T: Serialize + DeserializeOwned>(flags: &T, cfg: &toml::Table, section: &str) -> Res<T> {
    let mut base = serde_json::Map::new();
    for (k, v) in cfg {
        if !v.is_table() {
            base.insert(k.clone(), to_value(v));
        }
    }
    if let Some(toml::Value::Table(t)) = cfg.get(section) {
        for (k, v) in t {
            base.insert(k.clone(), to_value(v));
        }
    }
    if let Value::Object(f) = to_value(flags) {
        for (k, v) in f {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| Failure::Usage(format!("config [{section}]: {e}")))
}

fn load_config(path: Option<&Path>) -> Res<toml::Table> {
    let Some(p) = path else { return Ok(toml::Table::new()) };
    let text = fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
    text.parse::<toml::Table>().map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn grid_of(c: &Common) -> Res<Grid> {
    let d = Grid::default();
    Ok(Grid::new(c.t_min.unwrap_or(d.t_min), c.t_max.unwrap_or(d.t_max), c.density.unwrap_or(d.per_decade))?)
}

/// Runs the command; `Ok(true)` means the verdict is infinite or a check failed.
pub fn run(cli: &Cli) -> Res<bool> {
    let cfg = load_config(cli.config.as_deref())?;
    let common: Common = merge(&cli.common, &cfg, "common")?;
    let grid = grid_of(&common)?;
    let n_max = common.n_max.unwrap_or(DEFAULT_N);
    let seed = common.seed.unwrap_or(0);
    let (name, settings, out) = match &cli.command {
        Command::Norm(a) => {
            let a = merge(a, &cfg, "norm")?;
            ("norm".to_string(), to_value(&a), norm(&a.cells, &a.w, &a.p)?)
        }
        Command::Level(a) => {
            let a = merge(a, &cfg, "level")?;
            ("level".to_string(), to_value(&a), level(&need(&a.u, "u")?)?)
        }
        Command::Cone(a) => {
            let a = merge(a, &cfg, "cone")?;
            let params = ConeParams::new(need(&a.alpha, "alpha")?, need(&a.beta, "beta")?, a.xi.unwrap_or(0.0))?;
            let op: AveragingOp = a.averaging.as_deref().unwrap_or("").parse()?;
            let samples = sample_cone(params, seed, a.samples.unwrap_or(0));
            let u = weight(&need(&a.u, "u")?)?;
            let v = weight(&need(&a.v, "v")?)?;
            let r = ratio_supremum_bounds(params, &u, &v, need(&a.p, "p")?, need(&a.q, "q")?, &op, &samples, &grid)?;
            let flagged = r.lower.is_infinite();
            ("cone".to_string(), to_value(&a), Outcome { result: to_value(&r), table: None, flagged })
        }
        Command::Condition { which } => {
            let a = merge(which.args(), &cfg, "condition")?;
            let out = condition(which, &a, &grid)?;
            (format!("condition {}", which.name()), to_value(&a), out)
        }
        Command::Testfun(a) => {
            let a = merge(a, &cfg, "testfun")?;
            let z = need(&a.z, "z")?;
            let op: AveragingOp = a.averaging.as_deref().unwrap_or("").parse()?;
            let f = testfun_full(z, &op, a.eps.unwrap_or(1e-3))?;
            let check = check_bound(&f.test, a.y_max.unwrap_or(1000), n_max)?;
            let rows = f
                .test
                .g
                .pieces()
                .iter()
                .map(|p| vec![p.x0.to_string(), p.x1.to_string(), p.amp.to_string(), p.freq.to_string(), p.phase.to_string()])
                .collect();
            let flagged = !(check.holds && check.rearrangement_ok);
            let out = Outcome {
                result: json!({"test_function": f, "check": check}),
                table: Some(Table { headers: vec!["x0", "x1", "amp", "freq", "phase"], rows }),
                flagged,
            };
            ("testfun".to_string(), to_value(&a), out)
        }
        Command::Verify(a) => {
            let a = merge(a, &cfg, "verify")?;
            let kind: InequalityKind = a.kind.as_deref().unwrap_or("gamma-gamma").parse()?;
            let mut suite = Suite::parse(a.suite.as_deref().unwrap_or("random:100+adversarial"), seed)?;
            if let Some(e) = a.eps {
                suite.eps = e;
            }
            let u = weight(&need(&a.u, "u")?)?;
            let w = weight(&need(&a.w, "w")?)?;
            let r = verify_inequality(&u, &w, need(&a.p, "p")?, need(&a.q, "q")?, kind, &suite, n_max, &grid)?;
            let rows = r
                .records
                .iter()
                .map(|x| vec![x.label.clone(), x.z.map_or(String::new(), |z| z.to_string()), x.lower.to_string(), x.upper.to_string()])
                .collect();
            let flagged = !(r.bounded && r.within_ceiling);
            let out = Outcome {
                result: to_value(&r),
                table: Some(Table { headers: vec!["label", "z", "lower", "upper"], rows }),
                flagged,
            };
            ("verify".to_string(), to_value(&a), out)
        }
        Command::JtCheck(a) => {
            let a = merge(a, &cfg, "jt-check")?;
            let zs: Vec<f64> = match &a.z {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| Failure::Usage(format!("bad z value `{x}`"))))
                    .collect::<Res<_>>()?,
                None => (0..=12).map(|k| 2f64.powi(k)).collect(),
            };
            let funcs = match (&a.pieces, a.random) {
                (Some(p), _) => vec![parse_pieces(p)?],
                (None, Some(k)) => sample::modulated_steps(seed, k),
                (None, None) => return Err(Failure::Usage("give --pieces or --random".into())),
            };
            let mut reports = Vec::new();
            let mut rows = Vec::new();
            for (i, g) in funcs.iter().enumerate() {
                let r = jt_check(g, &zs, n_max)?;
                for l in &r.lines {
                    rows.push(vec![i.to_string(), l.z.to_string(), l.lhs.to_string(), l.rhs.to_string(), l.ratio.to_string()]);
                }
                reports.push(r);
            }
            let max = reports.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
            let flagged = reports.iter().any(|r| !r.holds);
            let out = Outcome {
                result: json!({"max_ratio": max, "holds": !flagged, "reports": reports}),
                table: Some(Table { headers: vec!["function", "z", "lhs", "rhs", "ratio"], rows }),
                flagged,
            };
            ("jt-check".to_string(), to_value(&a), out)
        }
    };
    let report = json!({
        "command": name,
        "settings": without_nulls(settings),
        "grid": {"t_min": grid.t_min, "t_max": grid.t_max, "per_decade": grid.per_decade},
        "n_max": n_max,
        "seed": seed,
        "flagged": out.flagged,
        "result": out.result,
    });
    let text = serde_json::to_string_pretty(&report).expect("json") + "\n";
    match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    if let Some(p) = &cli.csv {
        write_csv(p, out.table.as_ref(), &report["result"])?;
    }
    Ok(out.flagged)
}

fn without_nulls(v: Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(m.into_iter().filter(|(_, v)| !v.is_null()).collect()),
        other => other,
    }
}

fn write_csv(path: &Path, table: Option<&Table>, result: &Value) -> Res<()> {
    let io = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    match table {
        Some(t) => {
            w.write_record(&t.headers).map_err(io)?;
            for r in &t.rows {
                w.write_record(r).map_err(io)?;
            }
        }
        None => {
            // scalar fields of the result
            w.write_record(["field", "value"]).map_err(io)?;
            if let Value::Object(m) = result {
                for (k, v) in m {
                    if !v.is_object() && !v.is_array() {
                        let s = v.as_str().map_or_else(|| v.to_string(), str::to_string);
                        w.write_record([k.as_str(), s.as_str()]).map_err(io)?;
                    }
                }
            }
        }
    }
    w.flush().map_err(|e| Failure::Io(e.to_string()))
}

fn norm(cells: &Option<String>, w: &Option<String>, p: &Option<f64>) -> Res<Outcome> {
    let cells = need(cells, "cells")?;
    let mut lengths = Vec::new();
    let mut values = Vec::new();
    for part in cells.split(',') {
        let (l, v) = part
            .split_once(':')
            .ok_or_else(|| Failure::Usage(format!("cell `{part}` needs the form length:value")))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad number `{s}`")));
        lengths.push(num(l)?);
        values.push(num(v)?);
    }
    let f = StepFunction::from_cells(&lengths, &values)?;
    let w = weight(&need(w, "w")?)?;
    let p = need(p, "p")?;
    let lambda = lambda_norm(&f, p, &w)?;
    let gamma = gamma_norm(&f, p, &w)?;
    let theta = if p >= 1.0 { Some(theta_norm(&f.rearrange()?, p, &w)?) } else { None };
    let flagged = lambda.is_infinite() || gamma.is_infinite();
    Ok(Outcome { result: json!({"lambda": lambda, "gamma": gamma, "theta": theta}), table: None, flagged })
}

fn level(expr: &str) -> Res<Outcome> {
    let u = weight(expr)?;
    let l = level_weight(&u)?;
    let rows = l
        .majorant
        .nodes()
        .iter()
        .map(|(x, y)| vec![x.to_string(), y.to_string()])
        .collect();
    Ok(Outcome {
        result: json!({"u": u.to_string(), "level": l.density.to_string(), "majorant": l.majorant}),
        table: Some(Table { headers: vec!["x", "majorant"], rows }),
        flagged: false,
    })
}

fn condition(which: &ConditionCmd, a: &ConditionArgs, grid: &Grid) -> Res<Outcome> {
    if let ConditionCmd::Lz(_) = which {
        // second indices default to the first: L^{r,r} and ℓ^{s,s}
        let (r, s) = (need(&a.r, "r")?, need(&a.s, "s")?);
        let ix = LzIndices {
            r,
            p: a.p.unwrap_or(r),
            alpha: a.alpha.unwrap_or(0.0),
            s,
            q: a.q.unwrap_or(s),
            beta: a.beta.unwrap_or(0.0),
        };
        let v = lz_admissible(ix)?;
        let reasons = v.violations().join("; ");
        let flagged = !v.admissible;
        return Ok(Outcome { result: json!({"verdict": v, "reason": reasons}), table: None, flagged });
    }
    let u = weight(&need(&a.u, "u")?)?;
    let report = match which {
        ConditionCmd::Llogl(_) => llogl_condition(&u, need(&a.q, "q")?, grid)?,
        _ => {
            let w = weight(&need(&a.w, "w")?)?;
            let p = need(&a.p, "p")?;
            match which {
                ConditionCmd::Cxy(_) => c_xy(&u, &w, p, grid)?,
                ConditionCmd::Comega(_) => c_omega(&u, &w, p, need(&a.q, "q")?, grid)?,
                ConditionCmd::Nolevel(_) => nolevel_condition(&u, &w, p, need(&a.q, "q")?, grid)?,
                ConditionCmd::Bhc(_) => bhc_condition(&u, &w, p, need(&a.q, "q")?, grid)?,
                ConditionCmd::HardyDual(_) => hardy_dual_condition(&u, &w, p, need(&a.q, "q")?, grid)?,
                _ => unreachable!("handled above"),
            }
        }
    };
    let flagged = report.verdict == Verdict::Infinite;
    Ok(Outcome { result: to_value(&report), table: None, flagged })
}

fn parse_pieces(s: &str) -> Res<ModulatedStep> {
    let mut pieces = Vec::new();
    for part in s.split(';') {
        let f: Vec<&str> = part.split(',').map(str::trim).collect();
        if f.len() < 4 || f.len() > 5 {
            return Err(Failure::Usage(format!("piece `{part}` needs x0,x1,amp,freq[,phase]")));
        }
        let num = |x: &str| x.parse::<f64>().map_err(|_| Failure::Usage(format!("bad number `{x}`")));
        let freq = f[3].parse::<i64>().map_err(|_| Failure::Usage(format!("bad frequency `{}`", f[3])))?;
        let phase = if f.len() == 5 { num(f[4])? } else { 0.0 };
        pieces.push(Piece::new(num(f[0])?, num(f[1])?, num(f[2])?, freq, phase));
    }
    Ok(ModulatedStep::new(pieces)?)
}
