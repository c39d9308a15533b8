use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use homquiver::ags::{verify_ledger, LedgerInput, Verdict as AgsVerdict};
use homquiver::hom::{
    build_extended, collapse_middle, cokernel_quotient, hom_complex, kernel_subobject, middle_columns_deviation,
    square_deviation, Sign,
};
use homquiver::instance::{param_to_json, ChainJson, FlowJson, LedgerJson, MatrixJson, PairInstance, ParsedPair};
use homquiver::oracle::{classify, rank_table, StabilityVerdict};
use homquiver::quiver::{rep_type, validate_rep};
use homquiver::sampling::{polystable_pair_ordered, stable_pair};
use homquiver::stability::{
    alpha_to_tau, extended_params, format_rational, grid_param, int, parse_rational, Rational, StabilityParam,
};
use homquiver::subobjects::search;
use homquiver::vortex::{numerical_polystability, solve_flow, verify_lemma, NumericalKind};
use homquiver::{Chain, FlowConfig, RankTolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{AlphaArgs, Cli, Command, GenKind, GlobalArgs};
use crate::report::{sha256_hex, CheckList, InstanceReport, Output, Verdict, VerificationReport};

#[derive(Debug)]
pub enum CliError {
    Input(String),
}

impl std::error::Error for CliError {}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "input error: {s}"),
        }
    }
}

fn input<E: std::fmt::Display>(ctx: impl std::fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Input(format!("{ctx}: {e}"))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub flow: FlowConfig,
    pub rank_tol: RankTolerance,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_global(g: &GlobalArgs) -> Result<Self, CliError> {
        let flow = FlowConfig { step: g.step, tol: g.tol, max_iter: g.max_iter, cond_bound: g.cond_bound };
        flow.validate().map_err(CliError::Input)?;
        if !(g.rank_tol > 0.0) {
            return Err(CliError::Input("--rank-tol must be positive".into()));
        }
        if g.jobs == Some(0) {
            return Err(CliError::Input("--jobs must be positive".into()));
        }
        Ok(RunConfig { seed: g.seed, flow, rank_tol: RankTolerance(g.rank_tol), jobs: g.jobs })
    }

    fn json(&self, extra: Value) -> Value {
        let mut v = json!({
            "tol": self.flow.tol,
            "max_iter": self.flow.max_iter,
            "step": self.flow.step,
            "cond_bound": self.flow.cond_bound,
            "rank_tol": self.rank_tol.0,
        });
        if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
            a.extend(b);
        }
        v
    }
}

/// Per-instance seed: independent of processing order.
pub fn instance_seed(master: u64, id: &str) -> u64 {
    let h = sha256_hex(&[&master.to_le_bytes(), id.as_bytes()]);
    u64::from_str_radix(&h[..16], 16).expect("hex digest")
}

fn rat(q: &Rational) -> String {
    format_rational(q)
}

fn expand_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(input(p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(CliError::Input("no instance files".into()));
    }
    Ok(out)
}

struct Loaded {
    bytes: Vec<u8>,
    pair: ParsedPair,
}

fn load_pairs(paths: &[PathBuf]) -> Result<Vec<Loaded>, CliError> {
    expand_paths(paths)?
        .into_iter()
        .map(|p| {
            let bytes = fs::read(&p).map_err(input(p.display()))?;
            let text = String::from_utf8(bytes.clone()).map_err(input(p.display()))?;
            let pair = PairInstance::parse(&text).map_err(input(p.display()))?;
            Ok(Loaded { bytes, pair })
        })
        .collect()
}

/// Comma separated rationals, vertex `m` first.
pub fn parse_alpha_list(s: &str) -> Result<StabilityParam, String> {
    let mut v = Vec::new();
    for part in s.split(',') {
        v.push(parse_rational(part.trim()).map_err(|e| e.0)?);
    }
    v.reverse();
    Ok(StabilityParam(v))
}

fn resolve_alphas(args: &AlphaArgs, pair: &ParsedPair) -> Result<(StabilityParam, StabilityParam), CliError> {
    let m = pair.c_prime.m();
    let pick = |own: &Option<String>, file: &Option<StabilityParam>, name: &str| -> Result<StabilityParam, CliError> {
        let a = match own.as_ref().or(args.alpha.as_ref()) {
            Some(s) => parse_alpha_list(s).map_err(input(format!("{}: --{name}", pair.id)))?,
            None => file
                .clone()
                .ok_or_else(|| CliError::Input(format!("{}: no {name} in file or flags", pair.id)))?,
        };
        if a.len() != m + 1 {
            return Err(CliError::Input(format!("{}: {name} needs {} entries, got {}", pair.id, m + 1, a.len())));
        }
        Ok(a)
    };
    Ok((
        pick(&args.alpha_prime, &pair.alpha_prime, "alpha-prime")?,
        pick(&args.alpha_dprime, &pair.alpha_dprime, "alpha-dprime")?,
    ))
}

fn run_parallel<T: Sync, F>(jobs: Option<usize>, items: &[T], f: F) -> Vec<InstanceReport>
where
    F: Fn(&T) -> InstanceReport + Sync + Send,
{
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    let pool = b.build().expect("thread pool");
    let mut out: Vec<InstanceReport> = pool.install(|| items.par_iter().map(&f).collect());
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

fn finish(command: &str, cfg: &RunConfig, extra: Value, instances: Vec<InstanceReport>, start: Instant) -> Output {
    let verdict = instances.iter().map(|i| i.verdict).max().unwrap_or(Verdict::Pass);
    let report = VerificationReport {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg.json(extra),
        verdict,
        instances,
    };
    let timings = report.timings(start.elapsed());
    Output { report, timings }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn pair_digest(l: &Loaded, a: &(StabilityParam, StabilityParam), cfg: &Value) -> String {
    let params = serde_json::to_vec(&(param_to_json(&a.0), param_to_json(&a.1))).expect("json");
    let cfg = serde_json::to_vec(cfg).expect("json");
    sha256_hex(&[&l.bytes, &params, &cfg])
}

fn instance_report(pair: &ParsedPair, bytes: &[u8], checks: CheckList, notes: Vec<String>) -> InstanceReport {
    InstanceReport {
        id: pair.id.clone(),
        seed: pair.seed,
        input_digest: sha256_hex(&[bytes]),
        verdict: checks.verdict(),
        checks: checks.checks,
        notes,
    }
}

fn verdict_json(v: &StabilityVerdict) -> Value {
    json!({
        "kind": v.kind,
        "slope": rat(&v.slope.0),
        "mu_max": rat(&v.mu_max.0),
        "margin": v.margin.as_ref().map(rat),
        "witness": v.witness,
        "barcode": v.barcode.records(),
    })
}

fn oracle(c: &Chain, a: &StabilityParam, tol: RankTolerance) -> Result<(StabilityVerdict, bool), String> {
    let v = classify(c, a, tol).map_err(|e| e.to_string())?;
    let near = rank_table(c, tol).near_threshold;
    Ok((v, near))
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let cfg = RunConfig::from_global(&cli.global)?;
    let start = Instant::now();
    match &cli.command {
        Command::Generate { m, dims, dims_dprime, count, kind } => {
            let dir = cli.global.out.clone().unwrap_or_else(|| PathBuf::from("."));
            generate(&cfg, &dir, *m, dims.as_deref(), dims_dprime.as_deref(), *count, *kind, start)
        }
        Command::Classify { inputs, alpha } => {
            let items = load_pairs(&inputs.instances)?;
            let alphas = resolve_all(alpha, &items)?;
            let reports = run_parallel(cfg.jobs, &zip(&items, &alphas), |(l, a)| cmd_classify(&cfg, l, a));
            Ok(finish("classify", &cfg, json!({}), reports, start))
        }
        Command::Homquiver { inputs, alpha, with_d } => {
            let items = load_pairs(&inputs.instances)?;
            // the collapsed parameter is optional here: default to zero
            let alphas: Vec<Option<StabilityParam>> = items
                .iter()
                .map(|l| match resolve_alphas(alpha, &l.pair) {
                    Ok((a, _)) => Ok(Some(a)),
                    Err(_) if alpha.alpha.is_none() && alpha.alpha_prime.is_none() => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_, _>>()?;
            let reports =
                run_parallel(cfg.jobs, &zip(&items, &alphas), |(l, a)| cmd_homquiver(&cfg, l, a.as_ref(), *with_d));
            Ok(finish("homquiver", &cfg, json!({ "with_d": with_d }), reports, start))
        }
        Command::Vortex { inputs, alpha } => {
            let items = load_pairs(&inputs.instances)?;
            let alphas = resolve_all(alpha, &items)?;
            let reports = run_parallel(cfg.jobs, &zip(&items, &alphas), |(l, a)| cmd_vortex(&cfg, l, a));
            Ok(finish("vortex", &cfg, json!({}), reports, start))
        }
        Command::VerifyLemma { inputs, alpha, hom_tol } => {
            if !(*hom_tol > 0.0) {
                return Err(CliError::Input("--hom-tol must be positive".into()));
            }
            let items = load_pairs(&inputs.instances)?;
            let alphas = resolve_all(alpha, &items)?;
            let reports =
                run_parallel(cfg.jobs, &zip(&items, &alphas), |(l, a)| cmd_verify_lemma(&cfg, l, a, *hom_tol));
            Ok(finish("verify-lemma", &cfg, json!({ "hom_tol": hom_tol }), reports, start))
        }
        Command::VerifyTransfer { inputs, alpha, candidates } => {
            let items = load_pairs(&inputs.instances)?;
            let alphas = resolve_all(alpha, &items)?;
            let reports =
                run_parallel(cfg.jobs, &zip(&items, &alphas), |(l, a)| cmd_verify_transfer(&cfg, l, a, *candidates));
            Ok(finish("verify-transfer", &cfg, json!({ "candidates": candidates }), reports, start))
        }
        Command::Ags { ledgers } => {
            let paths = expand_paths(ledgers)?;
            let mut items = Vec::new();
            for p in paths {
                let bytes = fs::read(&p).map_err(input(p.display()))?;
                let text = String::from_utf8(bytes.clone()).map_err(input(p.display()))?;
                let l = LedgerJson::parse(&text).map_err(input(p.display()))?;
                items.push((p, bytes, l));
            }
            let reports = run_parallel(cfg.jobs, &items, |(p, b, l)| cmd_ags(p, b, l));
            Ok(finish("ags", &cfg, json!({}), reports, start))
        }
    }
}

fn zip<'a, A, B>(a: &'a [A], b: &'a [B]) -> Vec<(&'a A, &'a B)> {
    a.iter().zip(b).collect()
}

fn resolve_all(alpha: &AlphaArgs, items: &[Loaded]) -> Result<Vec<(StabilityParam, StabilityParam)>, CliError> {
    items.iter().map(|l| resolve_alphas(alpha, &l.pair)).collect()
}

#[allow(clippy::too_many_arguments)]
fn generate(
    cfg: &RunConfig,
    dir: &Path,
    m: usize,
    dims: Option<&[usize]>,
    dims_dprime: Option<&[usize]>,
    count: usize,
    kind: GenKind,
    start: Instant,
) -> Result<Output, CliError> {
    let check_dims = |d: &[usize], name: &str| -> Result<Vec<usize>, CliError> {
        if d.len() != m + 1 {
            return Err(CliError::Input(format!("{name} needs {} entries, got {}", m + 1, d.len())));
        }
        if d.contains(&0) {
            return Err(CliError::Input(format!("{name} must be positive")));
        }
        Ok(d.iter().rev().copied().collect())
    };
    let (dp, dd) = match kind {
        GenKind::Random => {
            let dp = check_dims(dims.ok_or_else(|| CliError::Input("--dims is required for random".into()))?, "--dims")?;
            let dd = match dims_dprime {
                Some(d) => check_dims(d, "--dims-dprime")?,
                None => dp.clone(),
            };
            (dp, dd)
        }
        _ => (Vec::new(), Vec::new()),
    };
    fs::create_dir_all(dir).map_err(input(dir.display()))?;
    let tol = cfg.rank_tol;
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut reports = Vec::new();
    for k in 0..count {
        let seed: u64 = master.random();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let id = format!("pair-s{}-{k:04}", cfg.seed);
        let inst = match kind {
            GenKind::Random => {
                let cp = Chain::random_with(dp.clone(), &mut rng);
                let cd = Chain::random_with(dd.clone(), &mut rng);
                PairInstance::from_parts(id.clone(), Some(seed), &cp, &cd, None, None)
            }
            GenKind::Stable => {
                let (p, d) = stable_pair(m, &mut rng, tol);
                PairInstance::from_parts(id.clone(), Some(seed), &p.chain, &d.chain, Some(&p.alpha), Some(&d.alpha))
            }
            GenKind::Polystable => {
                let (lo, hi) = polystable_pair_ordered(m, &mut rng, tol);
                PairInstance::from_parts(id.clone(), Some(seed), &lo.chain, &hi.chain, Some(&lo.alpha), Some(&hi.alpha))
            }
        };
        let text = serde_json::to_string_pretty(&inst).expect("json") + "\n";
        let path = dir.join(format!("{id}.json"));
        let (reread, dt) = timed(|| {
            fs::write(&path, &text)?;
            fs::read_to_string(&path)
        });
        let reread = reread.map_err(input(path.display()))?;
        let mut checks = CheckList::new(sha256_hex(&[text.as_bytes()]));
        let valid = PairInstance::parse(&reread)
            .map(|p| validate_rep(p.c_prime.rep()).is_ok() && validate_rep(p.c_dprime.rep()).is_ok())
            .unwrap_or(false);
        checks.push("validate", Verdict::from_bool(valid), json!({ "path": path.display().to_string() }), dt);
        let pair = PairInstance::parse(&text).map_err(input(&id))?;
        reports.push(instance_report(&pair, text.as_bytes(), checks, Vec::new()));
    }
    reports.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(finish("generate", cfg, json!({ "m": m, "count": count, "kind": format!("{kind:?}") }), reports, start))
}

fn cmd_classify(cfg: &RunConfig, l: &Loaded, a: &(StabilityParam, StabilityParam)) -> InstanceReport {
    let conf = cfg.json(json!({}));
    let mut checks = CheckList::new(pair_digest(l, a, &conf));
    let mut notes = Vec::new();
    for (name, c, al) in [("c_prime", &l.pair.c_prime, &a.0), ("c_dprime", &l.pair.c_dprime, &a.1)] {
        let (res, dt) = timed(|| oracle(c, al, cfg.rank_tol));
        match res {
            Ok((v, near)) => {
                if near {
                    notes.push(format!("{name}: singular value near the rank cutoff"));
                }
                let mut ev = verdict_json(&v);
                ev["near_threshold"] = json!(near);
                ev["alpha"] = json!(param_to_json(al));
                checks.push(&format!("classify_{name}"), Verdict::Pass, ev, dt);
            }
            Err(e) => checks.push(&format!("classify_{name}"), Verdict::Fail, json!({ "error": e }), dt),
        }
    }
    instance_report(&l.pair, &l.bytes, checks, notes)
}

fn cmd_homquiver(cfg: &RunConfig, l: &Loaded, a: Option<&StabilityParam>, with_d: bool) -> InstanceReport {
    let tol = cfg.rank_tol;
    let (cp, cd) = (&l.pair.c_prime, &l.pair.c_dprime);
    let m = cp.m();
    let alpha = a.cloned().unwrap_or_else(|| StabilityParam::zero(m + 1));
    let conf = cfg.json(json!({ "with_d": with_d }));
    let mut checks = CheckList::new(pair_digest(l, &(alpha.clone(), alpha.clone()), &conf));

    let (built, dt) = timed(|| build_extended(cd, cp).and_then(|e| hom_complex(cd, cp).map(|h| (e, h))));
    let (ext, hc) = match built {
        Ok(x) => x,
        Err(e) => {
            checks.push("build", Verdict::Fail, json!({ "error": e.to_string() }), dt);
            return instance_report(&l.pair, &l.bytes, checks, Vec::new());
        }
    };
    let q = ext.rep.quiver();
    let vertices: Vec<Value> = (0..=m)
        .flat_map(|i| (0..=m).map(move |j| (i, j)))
        .map(|(i, j)| json!({ "i": i, "j": j, "weight": i as isize - j as isize, "dim": ext.dim(i, j) }))
        .collect();
    let arrows: Vec<Value> = ext
        .arrows
        .iter()
        .map(|g| {
            json!({
                "kind": if g.sign == Sign::Plus { "delta+" } else { "delta-" },
                "source": [g.source.0, g.source.1],
                "target": [g.target.0, g.target.1],
            })
        })
        .collect();
    let counts_ok = q.num_vertices() == (m + 1) * (m + 1) && q.num_arrows() == 2 * m * (m + 1);
    checks.push(
        "grid_counts",
        Verdict::from_bool(counts_ok),
        json!({ "vertices": q.num_vertices(), "arrows": q.num_arrows(), "adjacency": { "vertices": vertices, "arrows": arrows } }),
        dt,
    );

    let (dev, dt) = timed(|| middle_columns_deviation(&ext, &hc));
    checks.push("middle_columns", Verdict::from_bool(dev <= 1e-12), json!({ "deviation": dev, "tolerance": 1e-12 }), dt);
    let (sq, dt) = timed(|| square_deviation(&ext));
    checks.push("squares", Verdict::from_bool(sq <= 1e-12), json!({ "deviation": sq, "tolerance": 1e-12 }), dt);

    let (col, dt) = timed(|| collapse_middle(&ext, &alpha));
    match col {
        Ok(col) => {
            let cq = col.rep.quiver();
            let ok = cq.num_vertices() == m * (m + 1) + 1 && cq.num_arrows() == 2 * m * m;
            let kernel = kernel_subobject(&col, tol);
            let coker = cokernel_quotient(&col, tol);
            let p = col.collapsed_param();
            let mut ev = json!({
                "vertices": cq.num_vertices(),
                "arrows": cq.num_arrows(),
                "center_param": rat(&p.center),
                "params": p.off_diagonal.iter().map(|((i, j), v)| json!({ "i": i, "j": j, "param": rat(v) })).collect::<Vec<_>>(),
                "dim_h0": hc.dim_h0,
                "dim_h1": hc.dim_h1,
                "rank_d": coker.rank_d,
                "dim_ker_d": hc.dim_h0 - coker.rank_d,
                "dim_coker_d": coker.coker_d_dim,
                "coker_d_i": coker.coker_dims,
                "rank_d_i": coker.ranks,
                "independent_targets": coker.rank_d == coker.ranks.iter().sum::<usize>(),
            });
            let reconciled = coker.rank_d <= coker.ranks.iter().sum::<usize>()
                && coker.coker_d_dim >= coker.total_block_coker()
                && coker.rank_d <= hc.dim_h0;
            let mut verdict = Verdict::from_bool(ok && reconciled);
            match kernel {
                Ok(k) => ev["kernel_closure_residual"] = json!(k.closure_residual),
                Err(e) => {
                    ev["kernel_error"] = json!(e.to_string());
                    verdict = Verdict::Fail;
                }
            }
            if with_d {
                ev["d"] = serde_json::to_value(MatrixJson::from_mat(&hc.d)).expect("json");
            }
            checks.push("collapsed", verdict, ev, dt);
        }
        Err(e) => checks.push("collapsed", Verdict::Fail, json!({ "error": e.to_string() }), dt),
    }
    let notes = if a.is_none() { vec!["no parameter given: collapsed parameters use alpha = 0".to_string()] } else { Vec::new() };
    instance_report(&l.pair, &l.bytes, checks, notes)
}

fn flow_json(o: &homquiver::FlowOutcome) -> Value {
    let mut v = serde_json::to_value(FlowJson::from_outcome(o)).expect("json");
    v["final_condition"] = json!(o.condition_trace.last().copied().unwrap_or(1.0));
    v
}

fn cmd_vortex(cfg: &RunConfig, l: &Loaded, a: &(StabilityParam, StabilityParam)) -> InstanceReport {
    let conf = cfg.json(json!({}));
    let mut checks = CheckList::new(pair_digest(l, a, &conf));
    for (name, c, al) in [("c_prime", &l.pair.c_prime, &a.0), ("c_dprime", &l.pair.c_dprime, &a.1)] {
        let (res, dt) = timed(|| {
            let o = classify(c, al, cfg.rank_tol).map_err(|e| e.to_string())?;
            let n = numerical_polystability(c.rep(), al, &cfg.flow, cfg.rank_tol).map_err(|e| e.to_string())?;
            Ok::<_, String>((o, n))
        });
        match res {
            Ok((o, n)) => {
                let agree = n.kind.is_polystable() == o.kind.is_polystable()
                    && (!o.kind.is_polystable() || (n.kind == NumericalKind::Stable) == (o.kind == homquiver::StabilityKind::Stable));
                let ev = json!({
                    "oracle": o.kind,
                    "numerical": n.kind,
                    "tau": n.tau.0.iter().rev().map(rat).collect::<Vec<_>>(),
                    "endomorphism_dim": n.endomorphism_dim,
                    "flow": n.outcome.as_ref().map(flow_json),
                });
                checks.push(&format!("vortex_{name}"), Verdict::from_bool(agree), ev, dt);
            }
            Err(e) => checks.push(&format!("vortex_{name}"), Verdict::Fail, json!({ "error": e }), dt),
        }
    }
    instance_report(&l.pair, &l.bytes, checks, Vec::new())
}

/// Oracle polystability of both chains; records the check and returns the
/// verdicts when the hypothesis holds.
fn hypothesis(
    cfg: &RunConfig,
    l: &Loaded,
    a: &(StabilityParam, StabilityParam),
    checks: &mut CheckList,
) -> Option<(StabilityVerdict, StabilityVerdict)> {
    let (res, dt) = timed(|| {
        let p = classify(&l.pair.c_prime, &a.0, cfg.rank_tol).map_err(|e| e.to_string())?;
        let d = classify(&l.pair.c_dprime, &a.1, cfg.rank_tol).map_err(|e| e.to_string())?;
        Ok::<_, String>((p, d))
    });
    match res {
        Ok((p, d)) => {
            let ok = p.kind.is_polystable() && d.kind.is_polystable();
            let v = if ok { Verdict::Pass } else { Verdict::HypothesisUnmet };
            checks.push("hypothesis_polystable", v, json!({ "c_prime": verdict_json(&p), "c_dprime": verdict_json(&d) }), dt);
            ok.then_some((p, d))
        }
        Err(e) => {
            checks.push("hypothesis_polystable", Verdict::Fail, json!({ "error": e }), dt);
            None
        }
    }
}

fn cmd_verify_lemma(cfg: &RunConfig, l: &Loaded, a: &(StabilityParam, StabilityParam), hom_tol: f64) -> InstanceReport {
    let conf = cfg.json(json!({ "hom_tol": hom_tol }));
    let mut checks = CheckList::new(pair_digest(l, a, &conf));
    if hypothesis(cfg, l, a, &mut checks).is_none() {
        return instance_report(&l.pair, &l.bytes, checks, Vec::new());
    }
    let (cp, cd) = (&l.pair.c_prime, &l.pair.c_dprime);
    let tp = alpha_to_tau(&rep_type(cp.rep()), &a.0).expect("lengths checked");
    let td = alpha_to_tau(&rep_type(cd.rep()), &a.1).expect("lengths checked");
    let mut outs = Vec::new();
    for (name, c, t) in [("c_prime", cp, &tp), ("c_dprime", cd, &td)] {
        let (res, dt) = timed(|| solve_flow(c.rep(), &t.to_f64(), &cfg.flow));
        match res {
            Ok(o) => {
                let ok = o.converged && o.residual_norm <= cfg.flow.tol;
                checks.push(&format!("flow_{name}"), Verdict::from_bool(ok), flow_json(&o), dt);
                outs.push(o);
            }
            Err(e) => {
                checks.push(&format!("flow_{name}"), Verdict::Fail, json!({ "error": e.to_string() }), dt);
                return instance_report(&l.pair, &l.bytes, checks, Vec::new());
            }
        }
    }
    let (res, dt) = timed(|| verify_lemma(cd, cp, &outs[1], &outs[0], &td, &tp));
    match res {
        Ok(r) => {
            let m = cp.m();
            let grid: Vec<Vec<String>> = (0..=m).map(|i| (0..=m).map(|j| rat(r.tau_tilde.get(i, j))).collect()).collect();
            let ok = r.hom_residual <= hom_tol && r.bound_holds;
            let ev = json!({
                "hom_residual": r.hom_residual,
                "residual_prime": r.residual_prime,
                "residual_dprime": r.residual_dprime,
                "kappa": r.kappa,
                "bound_holds": r.bound_holds,
                "diagonal_residual": r.diagonal_residual,
                "tau_tilde": grid,
                "tolerance": hom_tol,
            });
            checks.push("lemma", Verdict::from_bool(ok), ev, dt);
        }
        Err(e) => checks.push("lemma", Verdict::Fail, json!({ "error": e.to_string() }), dt),
    }
    instance_report(&l.pair, &l.bytes, checks, Vec::new())
}

fn cmd_verify_transfer(
    cfg: &RunConfig,
    l: &Loaded,
    a: &(StabilityParam, StabilityParam),
    candidates: usize,
) -> InstanceReport {
    let conf = cfg.json(json!({ "candidates": candidates }));
    let mut checks = CheckList::new(pair_digest(l, a, &conf));
    let Some((vp, vd)) = hypothesis(cfg, l, a, &mut checks) else {
        return instance_report(&l.pair, &l.bytes, checks, Vec::new());
    };
    let mut notes = Vec::new();
    let (cp, cd) = (&l.pair.c_prime, &l.pair.c_dprime);
    let m = cp.m();
    let ext = build_extended(cd, cp).expect("same length");
    let at = grid_param(&extended_params(&a.0, &a.1, m).expect("lengths checked"));
    if at.0.iter().all(|x| *x == int(0)) {
        notes.push("vacuous: the extended parameter is identically zero, every slope is 0".to_string());
    }

    let (res, dt) = timed(|| numerical_polystability(&ext.rep, &at, &cfg.flow, cfg.rank_tol));
    match res {
        Ok(n) => {
            let ev = json!({
                "numerical": n.kind,
                "endomorphism_dim": n.endomorphism_dim,
                "flow": n.outcome.as_ref().map(|o| json!({
                    "converged": o.converged,
                    "status": o.status,
                    "iterations": o.iterations,
                    "residual_norm": o.residual_norm,
                })),
            });
            checks.push("extended_polystable", Verdict::from_bool(n.kind.is_polystable()), ev, dt);
        }
        Err(e) => checks.push("extended_polystable", Verdict::Fail, json!({ "error": e.to_string() }), dt),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(cfg.seed, &l.pair.id));
    let (s, dt) = timed(|| search(&ext.rep, &at, candidates, cfg.rank_tol, &mut rng));
    match s {
        Some(s) => {
            let ev = json!({
                "draws": s.draws,
                "proper": s.proper,
                "whole_slope": rat(&s.whole_slope),
                "max_slope": s.max_slope.as_ref().map(rat),
                "worst_margin": s.worst_margin.as_ref().map(rat),
                "violations": s.violations,
                "ties": s.ties,
            });
            checks.push("candidate_slopes", Verdict::from_bool(s.violations == 0), ev, dt);
        }
        None => checks.push("candidate_slopes", Verdict::Fail, json!({ "error": "zero representation" }), dt),
    }

    if a.0 == a.1 && vd.slope > vp.slope {
        let (res, dt) = timed(|| collapse_middle(&ext, &a.0).and_then(|c| kernel_subobject(&c, cfg.rank_tol)));
        match res {
            Ok(k) => checks.push(
                "kernel_vanishes",
                Verdict::from_bool(k.trivial),
                json!({ "dim_ker_d": k.sub.dims().iter().sum::<usize>(), "mu_prime": rat(&vp.slope.0), "mu_dprime": rat(&vd.slope.0) }),
                dt,
            ),
            Err(e) => checks.push("kernel_vanishes", Verdict::Fail, json!({ "error": e.to_string() }), dt),
        }
    }
    instance_report(&l.pair, &l.bytes, checks, notes)
}

fn ags_verdict(v: AgsVerdict) -> Value {
    json!(v)
}

fn cmd_ags(path: &Path, bytes: &[u8], l: &LedgerInput) -> InstanceReport {
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut checks = CheckList::new(sha256_hex(&[bytes]));
    let mut notes = Vec::new();
    let (res, dt) = timed(|| verify_ledger(l));
    match res {
        Ok(r) => {
            if let Some(w) = &r.hypothesis.warning {
                notes.push(w.clone());
            }
            let hv = if r.hypothesis.holds { Verdict::Pass } else { Verdict::HypothesisUnmet };
            checks.push("hypothesis", hv, serde_json::to_value(&r.hypothesis).expect("json"), dt);
            checks.push(
                "collapsed_slope_identity",
                Verdict::Pass,
                json!({ "value": rat(&r.collapsed_slope) }),
                Duration::ZERO,
            );
            if r.kernel.direct_form == AgsVerdict::Fails {
                notes.push("ledger violates the kernel inequality".into());
            }
            checks.push(
                "kernel_bound",
                Verdict::from_bool(r.kernel.agree && r.kernel.trace[0].verdict.ok()),
                json!({
                    "trace": r.kernel.trace,
                    "collapsed_form": ags_verdict(r.kernel.collapsed_form),
                    "direct_form": ags_verdict(r.kernel.direct_form),
                }),
                Duration::ZERO,
            );
            if r.hypothesis.holds && r.cokernel.conclusion == AgsVerdict::Fails {
                notes.push("ledger violates the cokernel inequality".into());
            }
            let ok = r.cokernel.step1_agree && r.cokernel.chain_holds && r.cokernel.trace.iter().take(2).all(|e| e.verdict.ok());
            checks.push("cokernel_bound", Verdict::from_bool(ok), serde_json::to_value(&r.cokernel).expect("json"), Duration::ZERO);
        }
        Err(e) => checks.push("ledger", Verdict::Fail, json!({ "error": e.to_string() }), dt),
    }
    InstanceReport {
        id,
        seed: None,
        input_digest: sha256_hex(&[bytes]),
        verdict: checks.verdict(),
        checks: checks.checks,
        notes,
    }
}

/// Serializes a chain for callers that want to embed one in a report.
pub fn chain_json(c: &Chain) -> Value {
    serde_json::to_value(ChainJson::from_chain(c, None)).expect("json")
}
