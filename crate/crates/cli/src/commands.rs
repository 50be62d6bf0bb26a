use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use tsvf_lab::circuit::{validate, CircuitDefinition};
use tsvf_lab::ensemble::{run_report, EnsembleConfig, PointCoupling, RNG_SCHEME};
use tsvf_lab::output::{csv_float, csv_opt};
use tsvf_lab::pointer::{
    couple, first_order_shift, leak_ratio, postselect, Coupling, PointerConfig,
};
use tsvf_lab::scenarios::{self, Preset};
use tsvf_lab::tsvf::two_state_at_boundary;
use tsvf_lab::{Error, PostSelection};

use crate::args::*;
use crate::record::RunRecord;
use crate::{schemas, CliError};

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let config = config.as_ref();
    match cli.command {
        Command::WeakValues(a) => weak_values(apply_config(&a, config)?),
        Command::Pointer(a) => pointer(apply_config(&a, config)?),
        Command::Ensemble(a) => ensemble(apply_config(&a, config)?),
        Command::Sweep(a) => sweep(apply_config(&a, config)?),
        Command::LeakRatio(a) => leak(apply_config(&a, config)?),
        Command::Scenarios {
            action: ScenariosAction::List(a),
        } => list(apply_config(&a, config)?),
        Command::Scenarios {
            action: ScenariosAction::Show(a),
        } => show(apply_config(&a, config)?),
        Command::Validate(a) => validate_file(apply_config(&a, config)?),
    }
}

/// Fixed-point number; values that round to zero print unsigned.
fn num(x: f64) -> String {
    let s = format!("{x:.10}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn complex(re: f64, im: f64) -> String {
    let im_text = num(im);
    match im_text.strip_prefix('-') {
        Some(abs) => format!("{} - {abs}i", num(re)),
        None => format!("{} + {im_text}i", num(re)),
    }
}

fn print_json(value: &impl Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("outputs serialize")
    );
}

fn emit_record(record: &RunRecord) {
    eprintln!(
        "{}",
        serde_json::to_string_pretty(record).expect("records serialize")
    );
}

fn load_post(scenario: &str, post: &str) -> Result<(Preset, PostSelection)> {
    let preset = scenarios::load(scenario)?;
    let post = preset.post(post)?;
    Ok((preset, post))
}

/// Opens the output early so an unwritable path fails before any work.
fn open_output(out: Option<&Path>) -> Result<Option<File>> {
    out.map(|p| {
        File::create(p).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))
    })
    .transpose()
}

fn write_output(file: Option<File>, path: Option<&Path>, content: &str) -> Result<()> {
    match file {
        Some(mut f) => f
            .write_all(content.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.unwrap().display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn output_names(out: Option<&Path>) -> Vec<String> {
    vec![out.map_or_else(|| "stdout".to_string(), |p| p.display().to_string())]
}

#[derive(Serialize)]
struct WeakValueRow {
    observable: String,
    point: String,
    operator: String,
    weak_value: [f64; 2],
    shift_over_delta: f64,
}

fn weak_values(a: WeakValuesArgs) -> Result<()> {
    let scenario = required(a.scenario, "scenario")?;
    let (preset, post) = load_post(&scenario, &required(a.post, "post")?)?;
    let format = a.format.unwrap_or(Format::Table);
    let overlap = two_state_at_boundary(&preset.circuit, &preset.pre, &post, 0)?.overlap();
    let rows = preset
        .observables()
        .into_iter()
        .map(|name| {
            let (point, op) = preset.observable(&name)?;
            let wv = preset.weak_value(&post, &name)?.value;
            Ok(WeakValueRow {
                observable: name,
                point,
                operator: op.description(),
                weak_value: [wv.re, wv.im],
                shift_over_delta: wv.re,
            })
        })
        .collect::<std::result::Result<Vec<_>, Error>>()?;
    let record = RunRecord::new(
        "weak-values",
        json!({ "scenario": scenario, "post": post.to_string(), "format": format }),
    );
    match format {
        Format::Json => print_json(&json!({
            "run": record,
            "scenario": scenario,
            "post": post.to_string(),
            "postselection_probability": overlap.norm_sqr(),
            "rows": rows,
        })),
        Format::Csv => {
            println!("observable,point,operator,weak_value_re,weak_value_im,shift_over_delta");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{}",
                    r.observable,
                    r.point,
                    r.operator,
                    csv_float(r.weak_value[0]),
                    csv_float(r.weak_value[1]),
                    csv_float(r.shift_over_delta)
                );
            }
            emit_record(&record);
        }
        Format::Table => {
            println!(
                "{scenario}, post-selection {post} (probability {})",
                num(overlap.norm_sqr())
            );
            println!(
                "{:<12} {:<20} {:<30} {:>14}",
                "observable", "operator", "weak value", "shift / delta"
            );
            for r in &rows {
                println!(
                    "{:<12} {:<20} {:<30} {:>14}",
                    r.observable,
                    r.operator,
                    complex(r.weak_value[0], r.weak_value[1]),
                    num(r.shift_over_delta)
                );
            }
            emit_record(&record);
        }
    }
    Ok(())
}

fn pointer(a: PointerArgs) -> Result<()> {
    let scenario = required(a.scenario, "scenario")?;
    let (preset, post) = load_post(&scenario, &required(a.post, "post")?)?;
    let point = required(a.point, "point")?;
    let epsilon = required(a.epsilon, "epsilon")?;
    let width = a.width.unwrap_or(1.0);
    let mode = a.mode.unwrap_or(PointerMode::Both);
    let format = a.format.unwrap_or(Format::Table);
    let cfg = PointerConfig::new(width, epsilon)?;
    preset.circuit.point(&point)?;

    let exact = if mode == PointerMode::FirstOrder {
        None
    } else {
        let joint = couple(
            &preset.circuit,
            &preset.pre,
            &[Coupling::new(point.clone(), cfg)],
        )?;
        let sel = postselect(&preset.circuit, &joint, &post)?;
        if sel.probability <= 0.0 {
            return Err(CliError::Impossible(format!(
                "impossible post-selection: {post} has probability 0 with this coupling"
            )));
        }
        Some((
            sel.mean_shift(&point)?,
            sel.mean_momentum(&point)?,
            sel.probability,
        ))
    };
    let first = if mode == PointerMode::Exact {
        None
    } else {
        let wv = preset.weak_value(&post, &point)?;
        Some((wv.value, first_order_shift(&wv, &cfg)))
    };
    let difference = match (exact, first) {
        (Some((m, _, _)), Some((_, s))) => Some(m - s),
        _ => None,
    };
    let record = RunRecord::new(
        "pointer",
        json!({
            "scenario": scenario, "post": post.to_string(), "point": point,
            "epsilon": epsilon, "width": width, "mode": mode, "format": format,
        }),
    );
    match format {
        Format::Json => print_json(&json!({
            "run": record,
            "scenario": scenario,
            "post": post.to_string(),
            "point": point,
            "epsilon": epsilon,
            "width": width,
            "delta": cfg.shift(),
            "mode": mode,
            "exact": exact.map(|(m, p, prob)| json!({
                "mean_shift": m, "mean_momentum": p, "postselection_probability": prob,
            })),
            "first_order": first.map(|(wv, s)| json!({ "weak_value": [wv.re, wv.im], "shift": s })),
            "difference": difference,
        })),
        Format::Csv => {
            println!("point,epsilon,width,delta,exact_shift,first_order_shift,difference,postselection_probability");
            println!(
                "{point},{},{},{},{},{},{},{}",
                csv_float(epsilon),
                csv_float(width),
                csv_float(cfg.shift()),
                csv_opt(exact.map(|e| e.0)),
                csv_opt(first.map(|f| f.1)),
                csv_opt(difference),
                csv_opt(exact.map(|e| e.2)),
            );
            emit_record(&record);
        }
        Format::Table => {
            println!("{scenario}, post-selection {post}, pointer at {point} (epsilon {epsilon}, width {width})");
            if let Some((m, _, prob)) = exact {
                println!("exact mean shift        {}", num(m));
                println!("post-selection prob.    {}", num(prob));
            }
            if let Some((wv, s)) = first {
                println!("weak value              {}", complex(wv.re, wv.im));
                println!("first-order shift       {}", num(s));
            }
            if let Some(d) = difference {
                println!("difference              {d:.6e}");
            }
            emit_record(&record);
        }
    }
    Ok(())
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("TSVF_LAB_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "TSVF_LAB_THREADS must be a positive integer, got `{s}`"
            ))),
        },
    }
}

fn ensemble(a: EnsembleArgs) -> Result<()> {
    let scenario = required(a.scenario, "scenario")?;
    let (preset, post) = load_post(&scenario, &required(a.post, "post")?)?;
    let epsilon = required(a.epsilon, "epsilon")?;
    let trials = required(a.trials, "trials")?;
    let points = a
        .points
        .unwrap_or_else(|| preset.circuit.marked_points().keys().cloned().collect());
    let format = a.format.unwrap_or(DataFormat::Csv);
    let cfg = EnsembleConfig {
        scenario: scenario.clone(),
        post: post.to_string(),
        couplings: points
            .iter()
            .map(|p| PointCoupling {
                point: p.clone(),
                epsilon,
            })
            .collect(),
        width: a.width.unwrap_or(1.0),
        trials,
        seed: a.seed.unwrap_or(0),
        threads: threads_from_env()?,
    };
    let file = open_output(a.out.as_deref())?;
    let report = run_report(&cfg)?;
    if report.result.exact_postselection_probability <= 0.0 {
        return Err(CliError::Impossible(format!(
            "impossible post-selection: {post} has probability 0 with these couplings"
        )));
    }
    let mut resolved = serde_json::to_value(&cfg).expect("configs serialize");
    resolved["format"] = json!(format);
    resolved["out"] = json!(a.out);
    let record = RunRecord::new("ensemble", resolved)
        .with_seed(cfg.seed, RNG_SCHEME)
        .with_outputs(output_names(a.out.as_deref()));
    let content = match format {
        DataFormat::Csv => report.to_csv(),
        DataFormat::Json => {
            let mut s = serde_json::to_string_pretty(&json!({
                "run": record,
                "result": report.result,
                "rows": report.rows,
            }))
            .expect("reports serialize");
            s.push('\n');
            s
        }
    };
    write_output(file, a.out.as_deref(), &content)?;
    emit_record(&record);
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let scenario = required(a.scenario, "scenario")?;
    let (preset, post) = load_post(&scenario, &required(a.post, "post")?)?;
    let point = required(a.point, "point")?;
    let param = a.param.unwrap_or(SweepParam::Epsilon);
    let from = required(a.from, "from")?;
    let to = required(a.to, "to")?;
    let steps = required(a.steps, "steps")?;
    let fixed_epsilon = a.epsilon.unwrap_or(0.1);
    let fixed_width = a.width.unwrap_or(1.0);
    let format = a.format.unwrap_or(DataFormat::Csv);
    if !from.is_finite() || !to.is_finite() || from > to {
        return Err(CliError::Usage(format!(
            "malformed range: from {from} to {to}"
        )));
    }
    if steps == 0 || (steps == 1 && from != to) {
        return Err(CliError::Usage(format!(
            "malformed range: {steps} steps cannot span {from}..{to}"
        )));
    }
    if param == SweepParam::Width && from <= 0.0 {
        return Err(CliError::Usage(
            "malformed range: widths must be positive".into(),
        ));
    }
    preset.circuit.point(&point)?;
    let wv = match preset.weak_value(&post, &point) {
        Ok(wv) => Some(wv),
        Err(Error::ImpossiblePostSelection { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = if steps == 1 {
            0.0
        } else {
            i as f64 / (steps - 1) as f64
        };
        let value = if i + 1 == steps {
            to
        } else {
            from + (to - from) * t
        };
        let (epsilon, width) = match param {
            SweepParam::Epsilon => (value, fixed_width),
            SweepParam::Width => (fixed_epsilon, value),
        };
        let cfg = PointerConfig::new(width, epsilon)?;
        let joint = couple(
            &preset.circuit,
            &preset.pre,
            &[Coupling::new(point.clone(), cfg)],
        )?;
        let sel = postselect(&preset.circuit, &joint, &post)?;
        let exact = if sel.probability > 0.0 {
            Some(sel.mean_shift(&point)?)
        } else {
            None
        };
        let first = wv.as_ref().map(|w| first_order_shift(w, &cfg));
        let difference = exact.zip(first).map(|(e, f)| e - f);
        rows.push(json!({
            "epsilon": epsilon,
            "width": width,
            "delta": cfg.shift(),
            "exact_shift": exact,
            "first_order_shift": first,
            "difference": difference,
            "postselection_probability": sel.probability,
        }));
    }
    let file = open_output(a.out.as_deref())?;
    let record = RunRecord::new(
        "sweep",
        json!({
            "scenario": scenario, "post": post.to_string(), "point": point, "param": param,
            "from": from, "to": to, "steps": steps,
            "epsilon": if param == SweepParam::Width { Some(fixed_epsilon) } else { None },
            "width": if param == SweepParam::Epsilon { Some(fixed_width) } else { None },
            "out": a.out, "format": format,
        }),
    )
    .with_outputs(output_names(a.out.as_deref()));
    let content = match format {
        DataFormat::Csv => {
            let cols = [
                "epsilon",
                "width",
                "delta",
                "exact_shift",
                "first_order_shift",
                "difference",
                "postselection_probability",
            ];
            let mut s = cols.join(",");
            s.push('\n');
            for r in &rows {
                let cells: Vec<String> = cols.iter().map(|c| csv_opt(r[c].as_f64())).collect();
                let _ = writeln!(s, "{}", cells.join(","));
            }
            s
        }
        DataFormat::Json => {
            let mut s = serde_json::to_string_pretty(&json!({
                "run": record,
                "scenario": scenario,
                "post": post.to_string(),
                "point": point,
                "param": param,
                "rows": rows,
            }))
            .expect("sweeps serialize");
            s.push('\n');
            s
        }
    };
    write_output(file, a.out.as_deref(), &content)?;
    emit_record(&record);
    Ok(())
}

fn leak(a: LeakRatioArgs) -> Result<()> {
    let epsilon = required(a.epsilon, "epsilon")?;
    let format = a.format.unwrap_or(Format::Table);
    let r = leak_ratio(epsilon)?;
    let record = RunRecord::new(
        "leak-ratio",
        json!({ "epsilon": epsilon, "format": format }),
    );
    match format {
        Format::Json => print_json(&json!({
            "run": record, "epsilon": epsilon, "exact": r.exact, "asymptotic": r.asymptotic,
        })),
        Format::Csv => {
            println!("epsilon,exact,asymptotic");
            println!(
                "{},{},{}",
                csv_float(epsilon),
                csv_float(r.exact),
                csv_float(r.asymptotic)
            );
            emit_record(&record);
        }
        Format::Table => {
            println!("epsilon      {epsilon}");
            println!("exact        {}", csv_float(r.exact));
            println!("asymptotic   {}", csv_float(r.asymptotic));
            emit_record(&record);
        }
    }
    Ok(())
}

fn scenario_summary(p: &Preset) -> Value {
    json!({
        "id": p.id,
        "description": p.circuit.definition().description,
        "pre": p.circuit.definition().presets.as_ref().map(|s| s.pre.clone()),
        "post": p.post_selections.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "observables": p.observables(),
    })
}

fn list(a: ListArgs) -> Result<()> {
    let format = a.format.unwrap_or(Format::Table);
    let presets = scenarios::list()
        .into_iter()
        .map(scenarios::load)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let record = RunRecord::new("scenarios list", json!({ "format": format }));
    match format {
        Format::Json => print_json(&json!({
            "run": record,
            "scenarios": presets.iter().map(scenario_summary).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            println!("id,post,observables");
            for p in &presets {
                let posts: Vec<_> = p.post_selections.iter().map(|(n, _)| n.as_str()).collect();
                println!("{},{},{}", p.id, posts.join(" "), p.observables().join(" "));
            }
            emit_record(&record);
        }
        Format::Table => {
            for p in &presets {
                let posts: Vec<_> = p.post_selections.iter().map(|(n, _)| n.as_str()).collect();
                println!("{:<22} post-selections: {}", p.id, posts.join(", "));
            }
            emit_record(&record);
        }
    }
    Ok(())
}

fn show(a: ShowArgs) -> Result<()> {
    let id = required(a.id, "id")?;
    let format = a.format.unwrap_or(Format::Json);
    let p = scenarios::load(&id)?;
    let record = RunRecord::new("scenarios show", json!({ "id": id, "format": format }));
    let circuit: Value = serde_json::from_str(p.circuit_json).expect("presets are JSON");
    let expected: Value = serde_json::from_str(p.expected_json).expect("presets are JSON");
    match format {
        Format::Json => print_json(&json!({
            "run": record, "id": id, "circuit": circuit, "expected": expected,
        })),
        Format::Csv => {
            println!("post,observable,weak_value_re,weak_value_im");
            for (post, table) in &p.expected {
                for (name, wv) in table {
                    println!("{post},{name},{},{}", csv_float(wv.re), csv_float(wv.im));
                }
            }
            emit_record(&record);
        }
        Format::Table => {
            println!("{id}");
            if let Some(d) = &p.circuit.definition().description {
                println!("  {d}");
            }
            println!("  {}", p.provenance);
            println!("  modes: {}", p.circuit.definition().modes.join(", "));
            for (name, mp) in p.circuit.marked_points() {
                println!(
                    "  point {name}: mode {} after stage {}",
                    mp.mode, mp.boundary
                );
            }
            for (post, table) in &p.expected {
                println!("  expected weak values for {post}:");
                for (name, wv) in table {
                    println!("    {:<10} {}", name, complex(wv.re, wv.im));
                }
            }
            emit_record(&record);
        }
    }
    Ok(())
}

fn validate_file(a: ValidateArgs) -> Result<()> {
    let path: PathBuf = required(a.file, "file")?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: not JSON: {e}", path.display())))?;
    let validator = schemas::validator(schemas::CIRCUIT).map_err(CliError::Usage)?;
    let violations = schemas::violations(&validator, &value);
    if !violations.is_empty() {
        let mut msg = format!("{} does not match the circuit schema:", path.display());
        for v in violations {
            let _ = write!(msg, "\n  - {v}");
        }
        return Err(CliError::Usage(msg));
    }
    let def: CircuitDefinition = serde_json::from_value(value)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Err(diags) = validate(&def) {
        let mut msg = format!("{} is not a valid circuit:", path.display());
        for d in diags {
            let _ = write!(msg, "\n  - {d}");
        }
        return Err(CliError::Usage(msg));
    }
    let detectors: Vec<&str> = def
        .stages
        .iter()
        .flatten()
        .filter_map(|e| match e {
            tsvf_lab::Element::Detector { name, .. } => Some(name.as_str()),
            _ => None,
        })
        .collect();
    println!(
        "valid: {} ({} modes, {} stages, {} marked points, detectors: {})",
        def.name,
        def.modes.len(),
        def.stages.len(),
        def.marked_points.len(),
        if detectors.is_empty() {
            "none".to_string()
        } else {
            detectors.join(", ")
        }
    );
    Ok(())
}
