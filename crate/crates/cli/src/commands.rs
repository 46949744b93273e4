use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};

use summa::constructions::{
    construct_t3_witness, density_of_r, verify_wlln_decay, Counterexample, CounterexampleParams,
    WitnessStatus,
};
use summa::ideal::membership;
use summa::matrix::{
    check_s1, check_s2, check_s3, check_sliding, check_t1, check_t2, check_t3, check_t4, RowMatrix,
};
use summa::multiplier::{corollary_inclusion_suite, multiplier_check, MultiplierCase};
use summa::parse::{
    parse_eps_grid, parse_ideal, parse_matrix, parse_permutation, parse_sequence, parse_set,
    parse_weight, MatrixOptions,
};
use summa::permutation::{check_growth_condition, permutation_regularity};
use summa::report::to_sorted_json;
use summa::sequence::verify_ideal_limit_values;
use summa::{propose_ideal_limit, verify_ideal_limit, DensityEstimate, Error, LazySequence, SetGen, Verdict};

use crate::{error_code, exit, Cli, Command, Common, MatrixArgs};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: error_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: exit::USAGE,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn code_of(v: &Verdict) -> u8 {
    v.exit_code() as u8
}

fn matrix_options(args: &MatrixArgs, max_n: u64) -> Result<MatrixOptions, Failure> {
    Ok(MatrixOptions {
        i_set: parse_set(&args.iset)?,
        max_block: args.max_block,
        rows: args.rows.unwrap_or(max_n),
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure {
            code: exit::CANT_CREATE,
            message: format!("{}: {e}", dir.display()),
        })?;
    }
    std::fs::write(path, text).map_err(|e| Failure {
        code: exit::CANT_CREATE,
        message: format!("{}: {e}", path.display()),
    })
}

fn emit(common: &Common, name: &str, report: &Value) -> Result<(), Failure> {
    let text = to_sorted_json(report)?;
    let path: Option<PathBuf> = match (&common.out, &common.out_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{name}.json"))),
        (None, None) => None,
    };
    match path {
        Some(p) => write_file(&p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_of(rows: impl IntoIterator<Item = (String, u64, f64)>, label: &str) -> String {
    let mut out = format!("{label},n,ratio\n");
    for (key, n, r) in rows {
        let _ = writeln!(out, "{key},{n},{r}");
    }
    out
}

fn estimate_rows<'a>(key: &'a str, est: &'a DensityEstimate) -> impl Iterator<Item = (String, u64, f64)> + 'a {
    est.checkpoints.iter().map(move |&(n, r)| (key.to_string(), n, r))
}

pub fn run(cli: &Cli) -> Outcome {
    let common = &cli.common;
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(format!("cannot configure {t} threads: {e}")))?;
    }
    if common.max_n == 0 {
        return Err(usage("--max-n must be at least 1"));
    }
    let eps = parse_eps_grid(&common.eps)?;
    let max_n = common.max_n;
    let tol = common.zero_tol;
    let (name, report, code) = match &cli.command {
        Command::Density { set, ideal } => {
            let s = parse_set(set)?;
            let ideal = parse_ideal(ideal)?;
            let (verdict, estimate) = membership(&s, &ideal, max_n, tol)?;
            if let Some(p) = &common.csv {
                write_file(p, &csv_of(estimate_rows("set", &estimate), "series"))?;
            }
            let code = code_of(&verdict);
            let report = json!({
                "command": "density",
                "set": s.to_string(),
                "ideal": ideal,
                "maxN": max_n,
                "zeroTol": tol,
                "estimate": estimate,
                "verdict": verdict,
            });
            ("density", report, code)
        }
        Command::Limit { seq, eta, ideal } => {
            let x = parse_sequence(seq)?;
            let ideal = parse_ideal(ideal)?;
            let eta = match eta {
                Some(v) => Some(*v),
                None => propose_ideal_limit(&x, &ideal, max_n, tol)?,
            };
            let (report, code) = match eta {
                Some(eta) => {
                    let r = verify_ideal_limit(&x, eta, &ideal, max_n, &eps, tol)?;
                    if let Some(p) = &common.csv {
                        let rows = r
                            .per_eps
                            .iter()
                            .flat_map(|e| e.estimate.checkpoints.iter().map(move |&(n, v)| (e.eps.to_string(), n, v)));
                        write_file(p, &csv_of(rows, "eps"))?;
                    }
                    let code = code_of(&r.verdict);
                    (json!({"command": "limit", "sequence": x.to_string(), "maxN": max_n, "report": r}), code)
                }
                None => {
                    let verdict = Verdict::inconclusive("no candidate limit found");
                    let code = code_of(&verdict);
                    (
                        json!({"command": "limit", "sequence": x.to_string(), "maxN": max_n, "ideal": ideal, "verdict": verdict}),
                        code,
                    )
                }
            };
            ("limit", report, code)
        }
        Command::Check {
            matrix,
            cond,
            matrix_opts,
            e,
            istar,
            i,
            j,
            columns,
            sliding_m,
        } => {
            let a = parse_matrix(matrix, &matrix_options(matrix_opts, max_n)?)?;
            let i = parse_ideal(i)?;
            let j = parse_ideal(j)?;
            let es = e.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>, _>>()?;
            let istars = istar.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>, _>>()?;
            let mut reports = Vec::new();
            for c in cond.split(',').map(str::trim) {
                match c.to_ascii_uppercase().as_str() {
                    "S1" => reports.push(check_s1(&a, max_n)?),
                    "T1" => reports.push(check_t1(&a, max_n)?),
                    "S2" => reports.push(check_s2(&a, max_n, &eps, tol)?),
                    "T2" => reports.push(check_t2(&a, &j, max_n, &eps, tol)?),
                    "S3" => reports.push(check_s3(&a, *columns, max_n, &eps, tol)?),
                    "T3" => {
                        if es.is_empty() {
                            return Err(usage("T3 needs at least one --e set"));
                        }
                        for s in &es {
                            reports.push(check_t3(&a, s, &i, &j, max_n, &eps, tol)?);
                        }
                    }
                    "T4" => {
                        if istars.is_empty() {
                            return Err(usage("T4 needs at least one --istar set"));
                        }
                        for s in &istars {
                            reports.push(check_t4(&a, s, &i, &j, max_n, &eps, tol)?);
                        }
                    }
                    "SLIDING" => reports.push(check_sliding(&a, *sliding_m, max_n, &eps, tol)?),
                    other => return Err(usage(format!("unknown condition {other:?}"))),
                }
            }
            let verdict = Verdict::all(reports.iter().map(|r| r.verdict.clone()));
            let code = code_of(&verdict);
            let report = json!({
                "command": "check",
                "matrix": a.to_string(),
                "maxN": max_n,
                "reports": reports,
                "verdict": verdict,
            });
            ("check", report, code)
        }
        Command::Construct {
            counterexample,
            iset,
            max_block,
            verify,
        } => construct(counterexample, iset, *max_block, *verify, &eps, tol)?,
        Command::Witness {
            matrix,
            matrix_opts,
            steps,
        } => {
            let opts = matrix_options(matrix_opts, max_n)?;
            let a = parse_matrix(matrix, &opts)?;
            let trace = construct_t3_witness(&a, &opts.i_set, max_n, *steps)?;
            let code = match &trace.status {
                WitnessStatus::Complete if trace.all_steps_hold() => 0,
                WitnessStatus::Complete => 1,
                WitnessStatus::NoAccumulationPoint => 0,
                WitnessStatus::Stalled { .. } => 2,
            };
            let note = match &trace.status {
                WitnessStatus::NoAccumulationPoint => Some("T3 holds at scale"),
                _ => None,
            };
            let report = json!({
                "command": "witness",
                "matrix": a.to_string(),
                "iset": opts.i_set.to_string(),
                "trace": trace,
                "note": note,
            });
            ("witness", report, code)
        }
        Command::Permute {
            perm,
            family,
            i,
            j,
            growth,
            alphas,
        } => {
            let sigma = parse_permutation(perm)?;
            let family = family.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>, _>>()?;
            let i = parse_ideal(i)?;
            let j = parse_ideal(j)?;
            let r = permutation_regularity(&sigma, &i, &family, &j, max_n, &eps, tol)?;
            let growth_report = match growth {
                Some(spec) => {
                    let (g, h) = spec
                        .split_once(',')
                        .ok_or_else(|| usage("--growth expects `g,h`"))?;
                    let alphas = alphas
                        .split(',')
                        .map(|a| a.trim().parse::<f64>().map_err(|_| usage(format!("bad alpha {a:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    Some(check_growth_condition(&parse_weight(g)?, &parse_weight(h)?, &alphas, max_n)?)
                }
                None => None,
            };
            let verdict = Verdict::all(
                std::iter::once(r.verdict.clone()).chain(growth_report.iter().map(|g| g.verdict.clone())),
            );
            let code = if r.consistent() { code_of(&verdict) } else { exit::SOFTWARE };
            let report = json!({
                "command": "permute",
                "report": r,
                "growth": growth_report,
                "verdict": verdict,
            });
            ("permute", report, code)
        }
        Command::Multiplier {
            seq,
            family,
            j,
            case,
            samples,
        } => {
            if let Some(samples) = samples {
                let family = family.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>, _>>()?;
                let j = parse_ideal(j)?;
                let samples = samples
                    .split(';')
                    .map(parse_sequence)
                    .collect::<Result<Vec<LazySequence>, _>>()?;
                let r = corollary_inclusion_suite(&family, &j, &samples, max_n, &eps, tol)?;
                let code = code_of(&r.verdict);
                ("multiplier", json!({"command": "multiplier", "inclusion": r}), code)
            } else {
                let case = match (case, seq) {
                    (Some(path), _) => read_case(path)?,
                    (None, Some(seq)) => MultiplierCase {
                        sequence: parse_sequence(seq)?,
                        family: family.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>, _>>()?,
                        ideal_j: parse_ideal(j)?,
                    },
                    (None, None) => return Err(usage("give --seq, --case or --samples")),
                };
                let r = multiplier_check(&case, max_n, &eps, tol)?;
                let code = code_of(&r.verdict);
                ("multiplier", json!({"command": "multiplier", "report": r}), code)
            }
        }
        Command::Suite { seed } => {
            let r = summa::suite::run_suite(*seed)?;
            for c in &r.criteria {
                eprintln!("{}", c.summary_line());
            }
            let code = if r.pass { 0 } else { 1 };
            ("suite", json!(r), code)
        }
    };
    emit(common, name, &report)?;
    Ok(code)
}

fn read_case(path: &Path) -> Result<MultiplierCase, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::format(path, e.line(), e.to_string()))?;
    let field = |k: &str| -> Result<&Value, Failure> {
        v.get(k)
            .ok_or_else(|| Error::format(path, 0, format!("missing field {k:?}")).into())
    };
    let as_str = |x: &Value, k: &str| -> Result<String, Failure> {
        x.as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::format(path, 0, format!("{k:?} must be a string")).into())
    };
    let sequence = parse_sequence(&as_str(field("sequence")?, "sequence")?)?;
    let family = field("family")?
        .as_array()
        .ok_or_else(|| Failure::from(Error::format(path, 0, "\"family\" must be an array")))?
        .iter()
        .map(|x| parse_set(&as_str(x, "family")?).map_err(Failure::from))
        .collect::<Result<Vec<SetGen>, _>>()?;
    let ideal_j = parse_ideal(&as_str(field("idealJ")?, "idealJ")?)?;
    Ok(MultiplierCase {
        sequence,
        family,
        ideal_j,
    })
}

fn construct(
    which: &str,
    iset: &str,
    max_block: u32,
    verify: bool,
    eps: &[f64],
    tol: f64,
) -> Result<(&'static str, Value, u8), Failure> {
    let is_b = match which {
        "A" | "a" => false,
        "B" | "b" => true,
        other => return Err(usage(format!("--counterexample must be A or B, got {other:?}"))),
    };
    let i_set = parse_set(iset)?;
    let ce = Arc::new(Counterexample::new(CounterexampleParams {
        i_set: i_set.clone(),
        max_block,
    })?);
    let a = RowMatrix::Counterexample(ce.clone());
    let m = if is_b { a.clone().sum(RowMatrix::Identity) } else { a.clone() };
    let blocks: Vec<Value> = ce
        .blocks
        .iter()
        .map(|b| json!({"m": b.m, "lambda": b.lambda, "start": b.start, "len": b.len, "lastRow": b.last_row(), "columns": b.columns}))
        .collect();
    let mut report = json!({
        "command": "construct",
        "matrix": m.to_string(),
        "params": ce.params,
        "rowExtent": ce.row_extent(),
        "blocks": blocks,
    });
    if !verify {
        return Ok(("construct", report, 0));
    }
    let max_n = ce.row_extent();
    let z = summa::IdealSpec::AsymptoticZero;
    let invariants = ce.verify_block_invariants();
    let t3 = check_t3(&m, &i_set, &z, &z, max_n, eps, tol)?;
    let one = LazySequence::constant(1.0).with_bound(1.0);
    let wlln = verify_wlln_decay(&ce, &one, 0.25)?;
    let density = if max_block >= 3 { Some(density_of_r(max_block)?) } else { None };
    let (expected, extra) = if is_b {
        let t2 = check_t2(&m, &z, max_n, eps, tol)?;
        let ok = t2.verdict.is_satisfied();
        (ok, json!({"t2": t2}))
    } else {
        let ax = m.apply_all(&one, max_n)?;
        let lim = verify_ideal_limit_values(&ax, 0.0, &z, eps, tol)?;
        let ok = lim.verdict.is_satisfied();
        (ok, json!({"limitOfConstantOne": lim}))
    };
    let pass = invariants.holds() && t3.verdict.is_violated() && expected;
    let obj = report.as_object_mut().expect("object");
    obj.insert("invariants".into(), json!(invariants));
    obj.insert("t3".into(), json!(t3));
    obj.insert("blockExceedance".into(), json!(wlln));
    obj.insert("densityOfR".into(), json!(density));
    obj.insert("verification".into(), extra);
    obj.insert("behavesAsConstructed".into(), json!(pass));
    Ok(("construct", report, if pass { 0 } else { 1 }))
}
