use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use cursed_sig::continuum::{
    pooling_education_bound, separating_schedule, wage_compression_report, ContinuumModel, Density, Schedule,
};
use cursed_sig::experiment::{
    bundled_block_stats, hybrid_support, kmn_game, load_block_stats, pipeline_regime, prediction_report, PredictionRow,
    TestOutcome,
};
use cursed_sig::format::{fmt_num, fmt_opt, round_sig};
use cursed_sig::game::Assessment;
use cursed_sig::refine::{intuitive_criterion, refine_equilibrium_set, CURSED_INTUITIVE, STANDARD_INTUITIVE};
use cursed_sig::report::{
    assessment_json, assessments_from_json, criterion_json, record_json, verdict_json, CsvTable,
};
use cursed_sig::solver::{enumerate_pure_cse, solve_support_cse, sort_records, verify_cse, EquilibriumRecord, SupportSpec};
use cursed_sig::spence::{
    closed_form_candidates, criterion_survives, equilibrium_wages, pooling_region, region_sweep, riley_outcome,
    separating_region, Candidate, Interval, SpenceModel,
};
use cursed_sig::{load_game, Chi, Error, Result, SignalingGame};

use crate::cost::parse_cost;
use crate::{Cli, Command, ContinuumArgs, DensityArg, Format, SpenceArgs, SweepArgs, What};

const HYBRID_QS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn with_path(path: &Path) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Io(io) => invalid(format!("{}: {io}", path.display())),
        other => other,
    }
}

fn load(path: &Path) -> Result<cursed_sig::GameFile> {
    load_game(path).map_err(with_path(path))
}

fn chi_of(x: f64) -> Result<Chi> {
    Chi::new(x)
}

pub fn run(cli: &Cli) -> Result<()> {
    let output = match &cli.command {
        Command::Solve { game, chi, supports, no_pure } => solve(game, *chi, supports, *no_pure)?,
        Command::Verify { game, assessment } => verify(game, assessment)?,
        Command::Refine { game, chi, equilibria } => refine(game, *chi, equilibria.as_deref())?,
        Command::Sweep(args) => sweep(args, cli.jobs)?,
        Command::Spence { model, chi, candidates } => spence(model, *chi, *candidates)?,
        Command::Continuum { model, chi, points } => continuum(model, chi, *points)?,
        Command::KmnStats { data, chi, format } => kmn_stats(data, *chi, *format)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, output)?,
        None => print!("{output}"),
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => json!(round_sig(x)),
            _ => Value::Number(n),
        },
        Value::Array(xs) => Value::Array(xs.into_iter().map(rounded).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

/// Pure equilibria plus the declared supports, deduplicated, sorted, and
/// annotated with both criterion verdicts.
fn solve_game(game: &SignalingGame, supports: &[(String, SupportSpec)], chi: Chi, pure: bool) -> Result<Vec<EquilibriumRecord>> {
    let mut records = if pure { enumerate_pure_cse(game, chi)? } else { Vec::new() };
    for (name, spec) in supports {
        match solve_support_cse(game, chi, spec) {
            Ok(found) => records.extend(found),
            Err(Error::Indeterminate(msg)) => log::warn!("support {name:?} skipped: {msg}"),
            Err(e) => return Err(e),
        }
    }
    let mut seen: Vec<Value> = Vec::new();
    records.retain(|r| {
        let key = assessment_json(game, &r.assessment);
        if seen.contains(&key) {
            false
        } else {
            seen.push(key);
            true
        }
    });
    sort_records(&mut records);
    refine_equilibrium_set(game, &mut records)?;
    Ok(records)
}

fn selected_supports(available: &[(String, SupportSpec)], wanted: &[String]) -> Result<Vec<(String, SupportSpec)>> {
    if wanted.is_empty() {
        return Ok(available.to_vec());
    }
    wanted
        .iter()
        .map(|w| {
            available
                .iter()
                .find(|(n, _)| n == w)
                .cloned()
                .ok_or_else(|| invalid(format!("no support named {w:?} in the game file")))
        })
        .collect()
}

fn solve(path: &Path, chi: f64, supports: &[String], no_pure: bool) -> Result<String> {
    let chi = chi_of(chi)?;
    let file = load(path)?;
    let supports = selected_supports(&file.supports, supports)?;
    let records = solve_game(&file.game, &supports, chi, !no_pure)?;
    Ok(pretty(&json!({
        "chi": round_sig(chi.value()),
        "equilibria": records.iter().map(|r| record_json(&file.game, r)).collect::<Vec<_>>(),
    })))
}

fn read_assessments(game: &SignalingGame, path: &Path) -> Result<Vec<Assessment>> {
    let src = std::fs::read_to_string(path).map_err(|e| with_path(path)(e.into()))?;
    let v: Value = serde_json::from_str(&src).map_err(|e| Error::GameFile {
        source_name: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    assessments_from_json(game, &v)
}

fn verify(game_path: &Path, path: &Path) -> Result<String> {
    let file = load(game_path)?;
    let results: Vec<Value> = read_assessments(&file.game, path)?
        .iter()
        .map(|a| verdict_json(&verify_cse(&file.game, a)))
        .collect();
    let passed = results.iter().filter(|r| r["passed"] == json!(true)).count();
    Ok(pretty(&json!({ "checked": results.len(), "passed": passed, "results": results })))
}

fn refine(game_path: &Path, chi: Option<f64>, equilibria: Option<&Path>) -> Result<String> {
    let file = load(game_path)?;
    let game = &file.game;
    let chi = chi.map(chi_of).transpose()?;
    let entries: Vec<(Value, Assessment)> = match (equilibria, chi) {
        (Some(path), _) => read_assessments(game, path)?
            .into_iter()
            .map(|a| (assessment_json(game, &a), a))
            .collect(),
        (None, Some(chi)) => solve_game(game, &file.supports, chi, true)?
            .into_iter()
            .map(|r| (record_json(game, &r), r.assessment))
            .collect(),
        (None, None) => return Err(invalid("refine needs --chi or --equilibria")),
    };
    let mut out = Vec::with_capacity(entries.len());
    for (view, a) in entries {
        let at = chi.unwrap_or(a.chi);
        out.push(json!({
            "equilibrium": view,
            CURSED_INTUITIVE: criterion_json(game, &intuitive_criterion(game, &a, at)?),
            STANDARD_INTUITIVE: criterion_json(game, &intuitive_criterion(game, &a, Chi::ZERO)?),
        }));
    }
    Ok(pretty(&json!({ "results": out })))
}

fn parallel<T: Send>(jobs: u16, grid: &[Chi], f: impl Fn(Chi) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    if jobs <= 1 {
        return grid.iter().map(|&c| f(c)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs as usize)
        .build()
        .map_err(|e| invalid(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| grid.par_iter().map(|&c| f(c)).collect())
}

fn spence_model(args: &SpenceArgs) -> Result<SpenceModel> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| invalid(format!("{flag} is required for the two-type model")));
    SpenceModel::new(
        need(args.theta_l, "--theta-l")?,
        need(args.theta_h, "--theta-h")?,
        need(args.p, "--p")?,
        parse_cost(&args.cost)?,
    )
}

fn continuum_model(args: &ContinuumArgs) -> Result<ContinuumModel> {
    let min = args.theta_min.ok_or_else(|| invalid("--theta-min is required for the continuum model"))?;
    let density = match (args.density, args.mode) {
        (DensityArg::Uniform, None) => Density::Uniform,
        (DensityArg::Uniform, Some(_)) => return Err(invalid("--mode only applies to --density triangular")),
        (DensityArg::Triangular, Some(mode)) => Density::Triangular { mode },
        (DensityArg::Triangular, None) => return Err(invalid("--density triangular needs --mode")),
    };
    match (args.theta_max, args.mean) {
        (Some(max), mean) => ContinuumModel::new(min, max, density, mean),
        (None, Some(mean)) if density == Density::Uniform => ContinuumModel::from_mean(min, mean),
        (None, Some(_)) => Err(invalid("a triangular density needs --theta-max")),
        (None, None) => Err(invalid("give --theta-max or --mean")),
    }
}

fn interval_cells(i: &Interval) -> [String; 2] {
    match i.bounds() {
        Some((lo, hi)) => [fmt_num(lo), fmt_num(hi)],
        None => [String::new(), String::new()],
    }
}

fn describe_candidate(c: &Candidate) -> (&'static str, f64, f64) {
    match *c {
        Candidate::Separating { e_h } => ("separating", e_h, 0.0),
        Candidate::Pooling { e } => ("pooling", e, e),
        Candidate::Hybrid { e_h, .. } => ("hybrid", e_h, 0.0),
    }
}

fn sender_label(game: &SignalingGame, r: &EquilibriumRecord) -> String {
    let rows: Vec<String> = game
        .types()
        .iter()
        .enumerate()
        .map(|(t, id)| {
            let msgs: Vec<String> = (0..game.n_messages())
                .filter(|&m| r.assessment.sender.prob(t, m) > 0.0)
                .map(|m| {
                    let p = r.assessment.sender.prob(t, m);
                    if p == 1.0 {
                        game.messages()[m].clone()
                    } else {
                        format!("{}={}", game.messages()[m], fmt_num(p))
                    }
                })
                .collect();
            format!("{id}:{}", msgs.join("|"))
        })
        .collect();
    format!("{}[{}]", r.kind.as_str(), rows.join(" "))
}

fn refine_sweep(game: &SignalingGame, supports: &[(String, SupportSpec)], grid: &[Chi], jobs: u16, comment: String) -> Result<CsvTable> {
    let rows = parallel(jobs, grid, |chi| solve_game(game, supports, chi, true))?;
    let mut table = CsvTable::new(
        comment + "; columns: chi, equilibria found, survivors of the cursed and standard criteria, surviving equilibria",
        &["chi", "equilibria", "cursed_survivors", "standard_survivors", "surviving"],
    );
    for (chi, records) in grid.iter().zip(rows) {
        let count = |key: &str| records.iter().filter(|r| r.refinement_verdicts[key]).count();
        let surviving: Vec<String> = records
            .iter()
            .filter(|r| r.refinement_verdicts[CURSED_INTUITIVE])
            .map(|r| sender_label(game, r))
            .collect();
        table.push(vec![
            fmt_num(chi.value()),
            records.len().to_string(),
            count(CURSED_INTUITIVE).to_string(),
            count(STANDARD_INTUITIVE).to_string(),
            surviving.join("; "),
        ]);
    }
    Ok(table)
}

fn sweep(args: &SweepArgs, jobs: u16) -> Result<String> {
    let grid = Chi::parse_grid(&args.chi)?;
    let table = if args.spence {
        let model = spence_model(&args.spence_model)?;
        let label = format!(
            "two-type education model (theta_L = {}, theta_H = {}, p = {}, cost {})",
            fmt_num(model.theta_l()),
            fmt_num(model.theta_h()),
            fmt_num(model.p()),
            args.spence_model.cost
        );
        match args.what.unwrap_or(What::Regions) {
            What::Regions => {
                let rows = parallel(jobs, &grid, |chi| region_sweep(&model, &[chi]).map(|mut v| v.remove(0)))?;
                let mut t = CsvTable::new(
                    format!("separating and pooling education regions of the {label}; empty cells mark an empty region"),
                    &["chi", "separating_lo", "separating_hi", "pooling_lo", "pooling_hi", "riley_e_h", "w_l", "w_h"],
                );
                for r in rows {
                    let [slo, shi] = interval_cells(&r.separating);
                    let [plo, phi] = interval_cells(&r.pooling);
                    t.push(vec![fmt_num(r.chi.value()), slo, shi, plo, phi, fmt_num(r.riley_e), fmt_num(r.wages.w_l), fmt_num(r.wages.w_h)]);
                }
                t
            }
            What::Refine => {
                let rows = parallel(jobs, &grid, |chi| {
                    let cands = closed_form_candidates(&model, chi, 40, &HYBRID_QS)?;
                    let mut alive = Vec::new();
                    for c in &cands {
                        if criterion_survives(&model, chi, c)? {
                            alive.push(*c);
                        }
                    }
                    Ok((cands.len(), alive))
                })?;
                let mut t = CsvTable::new(
                    format!("closed-form candidates surviving the cursed intuitive criterion in the {label}"),
                    &["chi", "candidates", "survivors", "survivor_kind", "survivor_e_h", "survivor_e_l"],
                );
                for (chi, (n, alive)) in grid.iter().zip(rows) {
                    let (kind, eh, el) = match alive.as_slice() {
                        [one] => {
                            let (k, h, l) = describe_candidate(one);
                            (k.to_string(), fmt_num(h), fmt_num(l))
                        }
                        _ => (String::new(), String::new(), String::new()),
                    };
                    t.push(vec![fmt_num(chi.value()), n.to_string(), alive.len().to_string(), kind, eh, el]);
                }
                t
            }
            What::Regimes => return Err(invalid("--what regimes applies to --kmn only")),
        }
    } else if args.kmn {
        match args.what.unwrap_or(What::Regimes) {
            What::Regimes => {
                let rows = parallel(jobs, &grid, pipeline_regime)?;
                let mut t = CsvTable::new(
                    "laboratory game: which equilibria survive the cursed intuitive criterion, and the high type's investment probability in the surviving hybrid",
                    &["chi", "separating_survives", "pooling_survives", "hybrid_invest_prob"],
                );
                for r in rows {
                    t.push(vec![
                        fmt_num(r.chi.value()),
                        r.separating_survives.to_string(),
                        r.pooling_survives.to_string(),
                        fmt_opt(r.hybrid_invest_prob),
                    ]);
                }
                t
            }
            What::Refine => {
                let supports = vec![("hybrid".to_string(), hybrid_support())];
                refine_sweep(&kmn_game(), &supports, &grid, jobs, "laboratory game".into())?
            }
            What::Regions => return Err(invalid("--what regions applies to --spence and --continuum")),
        }
    } else if args.continuum {
        if args.what.is_some_and(|w| w != What::Regions) {
            return Err(invalid("the continuum sweep only supports --what regions"));
        }
        let model = continuum_model(&args.continuum_model)?;
        let rows = wage_compression_report(&model, &grid);
        let mut t = CsvTable::new(
            format!(
                "wage compression in the continuum model on [{}, {}] with mean {}: wage slope, pivot type and its wage, largest pooling education, education of the top type",
                fmt_num(model.theta_min()),
                fmt_num(model.theta_max()),
                fmt_num(model.mean())
            ),
            &["chi", "wage_slope", "pivot", "wage_at_pivot", "pooling_education_bound", "e_at_theta_max"],
        );
        for r in rows {
            let (e_top, _) = separating_schedule(&model, r.chi).at(model.theta_max());
            t.push(vec![
                fmt_num(r.chi.value()),
                fmt_num(r.slope),
                fmt_num(r.pivot),
                fmt_num(r.wage_at_pivot),
                fmt_num(pooling_education_bound(&model, r.chi)),
                fmt_num(e_top),
            ]);
        }
        t
    } else if let Some(path) = &args.game {
        if args.what.is_some_and(|w| w != What::Refine) {
            return Err(invalid("game files only support --what refine"));
        }
        let file = load(path)?;
        refine_sweep(&file.game, &file.supports, &grid, jobs, format!("game {}", path.display()))?
    } else {
        return Err(invalid("choose one of --spence, --kmn, --continuum, --game"));
    };
    Ok(table.render())
}

fn spence(args: &SpenceArgs, chi: f64, n: usize) -> Result<String> {
    let chi = chi_of(chi)?;
    let model = spence_model(args)?;
    let (e_h, e_l) = riley_outcome(&model, chi)?;
    let mut survivors = Vec::new();
    for c in closed_form_candidates(&model, chi, n, &HYBRID_QS)? {
        if criterion_survives(&model, chi, &c)? {
            survivors.push(c);
        }
    }
    let v = json!({
        "chi": chi.value(),
        "theta_l": model.theta_l(),
        "theta_h": model.theta_h(),
        "p": model.p(),
        "cost": args.cost,
        "separating_region": serde_json::to_value(separating_region(&model, chi)?).expect("serializable"),
        "pooling_region": serde_json::to_value(pooling_region(&model, chi)?).expect("serializable"),
        "riley": { "e_h": e_h, "e_l": e_l },
        "wages": serde_json::to_value(equilibrium_wages(&model, chi)).expect("serializable"),
        "surviving_candidates": serde_json::to_value(&survivors).expect("serializable"),
    });
    Ok(pretty(&rounded(v)))
}

fn continuum(args: &ContinuumArgs, chi: &str, points: usize) -> Result<String> {
    if points < 2 {
        return Err(invalid("--points must be at least 2"));
    }
    let grid = Chi::parse_grid(chi)?;
    let model = continuum_model(args)?;
    let mut t = CsvTable::new(
        format!(
            "separating schedule of the continuum model on [{}, {}] with mean {}",
            fmt_num(model.theta_min()),
            fmt_num(model.theta_max()),
            fmt_num(model.mean())
        ),
        &["chi", "theta", "education", "wage"],
    );
    for &c in &grid {
        let schedule = separating_schedule(&model, c);
        for theta in model.closed_grid(points) {
            let (e, w) = schedule.at(theta);
            t.push(vec![fmt_num(c.value()), fmt_num(theta), fmt_num(e), fmt_num(w)]);
        }
    }
    Ok(t.render())
}

fn p_text(o: &TestOutcome) -> String {
    match o {
        TestOutcome::Test(t) if t.p < 0.001 => "<0.001".into(),
        TestOutcome::Test(t) => format!("{:.3}", t.p),
        TestOutcome::ExactMatch(true) => "exact".into(),
        TestOutcome::ExactMatch(false) => "off".into(),
    }
}

fn test_cells(o: Option<&TestOutcome>) -> [String; 4] {
    match o {
        None => Default::default(),
        Some(TestOutcome::Test(t)) => [fmt_num(t.t), fmt_num(t.df), fmt_num(t.p), String::new()],
        Some(TestOutcome::ExactMatch(m)) => [String::new(), String::new(), String::new(), m.to_string()],
    }
}

fn kmn_stats(data: &[std::path::PathBuf], chi: Option<f64>, format: Format) -> Result<String> {
    let chi = chi.map(chi_of).transpose()?;
    let stats = if data.is_empty() {
        bundled_block_stats()
    } else {
        let mut all = Vec::new();
        for path in data {
            all.extend(load_block_stats(path).map_err(with_path(path))?);
        }
        all
    };
    let rows = prediction_report(&stats, chi)?;
    Ok(match format {
        Format::Csv => stats_csv(&rows, chi),
        Format::Text => stats_text(&rows, chi),
    })
}

fn stats_csv(rows: &[PredictionRow], chi: Option<Chi>) -> String {
    let mut t = CsvTable::new(
        format!(
            "one-sample t-tests of block investment rates against the standard prediction{}; *_exact marks cells with zero spread",
            chi.map(|c| format!(" and the cursed prediction at chi = {}", fmt_num(c.value()))).unwrap_or_default()
        ),
        &[
            "treatment", "block", "worker_type", "n", "mean", "sd", "tested_mean", "tested_sd", "ci_low", "ci_high",
            "standard_prediction", "standard_t", "standard_df", "standard_p", "standard_exact",
            "cursed_prediction", "cursed_t", "cursed_df", "cursed_p", "cursed_exact",
        ],
    );
    for r in rows {
        let s = &r.stats;
        let mut row = vec![
            s.treatment.to_string(),
            s.block.to_string(),
            s.worker_type.to_string(),
            s.n.to_string(),
            fmt_num(s.mean),
            fmt_num(s.sd),
            fmt_num(r.mean),
            fmt_num(r.sd),
            fmt_num(r.ci_low),
            fmt_num(r.ci_high),
            fmt_num(r.standard_prediction),
        ];
        row.extend(test_cells(Some(&r.standard)));
        row.push(fmt_opt(r.cursed_prediction));
        row.extend(test_cells(r.cursed.as_ref()));
        t.push(row);
    }
    t.render()
}

fn stats_text(rows: &[PredictionRow], chi: Option<Chi>) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<5} {:>5} {:<5} {:>4} {:>6} {:>6}  {:<15} {:>8}", "treat", "block", "type", "n", "mean", "sd", "95% CI", "p(std)");
    if let Some(c) = chi {
        let _ = write!(out, "  {:>7} {:>8}", "pred", format!("p(χ={})", fmt_num(c.value())));
    }
    out.push('\n');
    for r in rows {
        let s = &r.stats;
        let ci = format!("[{:.3}, {:.3}]", r.ci_low.clamp(0.0, 1.0), r.ci_high.clamp(0.0, 1.0));
        let _ = write!(
            out,
            "{:<5} {:>5} {:<5} {:>4} {:>6.3} {:>6.3}  {:<15} {:>8}",
            s.treatment.to_string(),
            s.block.to_string(),
            s.worker_type.to_string(),
            s.n,
            s.mean,
            s.sd,
            ci,
            p_text(&r.standard)
        );
        if let (Some(pred), Some(test)) = (r.cursed_prediction, r.cursed.as_ref()) {
            let _ = write!(out, "  {:>7.3} {:>8}", pred, p_text(test));
        }
        out.push('\n');
    }
    out
}
