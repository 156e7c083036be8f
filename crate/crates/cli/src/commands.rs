use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chandef::bottleneck::{db_curves, default_beta_grid, ib_curve, log_grid, BottleneckConfig, CurvePoint, Schedule};
use chandef::decision::{restricted_bayes_risk, RiskOptions};
use chandef::estimators::{paired_objective_report, EstimatorConfig, Reference};
use chandef::instance::Instance;
use chandef::pid::{
    classical_decomposition, compare_decompositions, deficiency_decomposition, deficiency_x, InfoSummary, PidOptions,
    PidTerms, UiOptions,
};
use chandef::projection::{blackwell_sufficient, deficiency, ProjectionOptions};
use chandef::{Axis, Channel, Exec, Joint2};
use serde_json::{json, Value};

use crate::report::{fmt_g, num, nums, Cell, Table};
use crate::{Cli, Command, CurveArgs, Format, PidKindArg};

pub enum Outcome {
    Finite,
    /// Some reported quantity is infinite.
    Degenerate,
}

fn load(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Instance::parse(&text).with_context(|| format!("invalid instance file {}", path.display()))
}

fn load_with<T>(path: &Path, f: impl FnOnce(Instance) -> chandef::Result<T>) -> Result<T> {
    f(load(path)?).with_context(|| format!("wrong instance kind in {}", path.display()))
}

fn required(p: &Option<PathBuf>) -> &Path {
    p.as_deref().expect("clap enforces presence")
}

fn emit(format: Format, table: &Table, json: Value) -> Outcome {
    let text = if format.json {
        serde_json::to_string_pretty(&json).expect("reports serialize") + "\n"
    } else if format.csv {
        table.csv()
    } else {
        table.render()
    };
    print!("{text}");
    if table.has_infinite() {
        Outcome::Degenerate
    } else {
        Outcome::Finite
    }
}

fn rows(c: &Channel) -> Value {
    Value::Array(c.rows().map(nums).collect())
}

fn row_text(r: &[f64]) -> String {
    r.iter().map(|&v| fmt_g(v)).collect::<Vec<_>>().join(" ")
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match cli.command {
        Command::Deficiency {
            decoder,
            channel,
            prior,
            joint,
            tol,
            max_iter,
            format,
        } => {
            let opts = ProjectionOptions {
                tol,
                max_iter,
                exec,
                ..ProjectionOptions::default()
            };
            let result = match &joint {
                Some(j) => deficiency_x(&load_with(j, Instance::into_joint3)?, &opts)?,
                None => {
                    let d = load_with(required(&decoder), Instance::into_channel)?;
                    let k = load_with(required(&channel), Instance::into_channel)?;
                    let pi = load_with(required(&prior), Instance::into_prob_vector)?;
                    deficiency(&d, &k, &pi, &opts)?
                }
            };
            let mut pairs = vec![
                ("deficiency_bits", result.value.into()),
                ("converged", result.converged.into()),
            ];
            let labels: Vec<String> = result.per_input.iter().map(|p| format!("divergence_bits[{}]", p.x)).collect();
            for (l, p) in labels.iter().zip(&result.per_input) {
                pairs.push((l.as_str(), p.divergence.into()));
            }
            let json = json!({
                "deficiency_bits": num(result.value),
                "converged": result.converged,
                "per_input": result.per_input.iter().map(|p| json!({
                    "x": p.x,
                    "divergence_bits": num(p.divergence),
                    "projection": nums(&p.point),
                })).collect::<Vec<_>>(),
                "encoder": rows(&result.encoder),
            });
            Ok(emit(format, &Table::key_value(pairs), json))
        }
        Command::Blackwell {
            decoder,
            channel,
            tol,
            witness,
            format,
        } => {
            let d = load_with(&decoder, Instance::into_channel)?;
            let k = load_with(&channel, Instance::into_channel)?;
            let r = blackwell_sufficient(&d, &k, tol)?;
            let mut table = Table::key_value(vec![
                ("sufficient", r.sufficient.into()),
                ("max_residual", r.max_residual.into()),
            ]);
            for (x, &res) in r.per_input_residual.iter().enumerate() {
                table.push(vec![format!("residual[{x}]").into(), res.into()]);
            }
            let mut json = json!({
                "sufficient": r.sufficient,
                "max_residual": num(r.max_residual),
                "per_input_residual": nums(&r.per_input_residual),
            });
            if witness {
                if let Some(e) = &r.witness_encoder {
                    for (x, row) in e.rows().enumerate() {
                        table.push(vec![format!("witness[{x}]").into(), row_text(row).into()]);
                    }
                    json["witness_encoder"] = rows(e);
                } else {
                    json["witness_encoder"] = Value::Null;
                }
            }
            Ok(emit(format, &table, json))
        }
        Command::Pid { joint, kind, tol, format } => {
            let p = load_with(&joint, Instance::into_joint3)?;
            let opts = PidOptions {
                ui: UiOptions {
                    tol,
                    ..UiOptions::default()
                },
                projection: ProjectionOptions {
                    exec,
                    ..ProjectionOptions::default()
                },
                ..PidOptions::default()
            };
            let info = InfoSummary::of(&p);
            let mut table = Table::new(&["kind", "ui_x", "ui_z", "si", "ci"]);
            let mut json = json!({ "info": {
                "i_yx": num(info.i_yx),
                "i_yz": num(info.i_yz),
                "i_yx_given_z": num(info.i_yx_given_z),
                "i_yz_given_x": num(info.i_yz_given_x),
                "i_y_xz": num(info.i_y_xz),
            }});
            let mut add = |name: &str, t: &PidTerms, json: &mut Value| {
                table.push(vec![name.into(), t.ui_x.into(), t.ui_z.into(), t.si.into(), t.ci.into()]);
                json[name] = json!({
                    "ui_x": num(t.ui_x), "ui_z": num(t.ui_z), "si": num(t.si), "ci": num(t.ci),
                    "degenerate": t.degenerate,
                });
            };
            match kind {
                PidKindArg::Classical => add("classical", &classical_decomposition(&p, &opts.ui), &mut json),
                PidKindArg::Deficiency => {
                    add("deficiency_induced", &deficiency_decomposition(&p, &opts.projection)?, &mut json)
                }
                PidKindArg::Both => {
                    let c = compare_decompositions(&p, &opts)?;
                    add("classical", &c.classical, &mut json);
                    add("deficiency_induced", &c.deficiency_induced, &mut json);
                    let s: Vec<f64> = c.inequalities.iter().map(|i| i.slack).collect();
                    table.push(vec!["slack".into(), s[0].into(), s[1].into(), s[2].into(), s[3].into()]);
                    json["inequalities"] = Value::Array(
                        c.inequalities
                            .iter()
                            .map(|i| json!({"name": i.name, "slack": num(i.slack), "near_equality": i.near_equality}))
                            .collect(),
                    );
                }
            }
            Ok(emit(format, &table, json))
        }
        Command::Riskgap {
            prior,
            channel,
            decoder,
            joint,
            tol,
            format,
        } => {
            let (pi, k, d) = match &joint {
                Some(j) => {
                    let p = load_with(j, Instance::into_joint3)?;
                    (p.marginal(Axis::X), p.y_given(Axis::X), p.y_given(Axis::Z))
                }
                None => (
                    load_with(required(&prior), Instance::into_prob_vector)?,
                    load_with(required(&channel), Instance::into_channel)?,
                    load_with(required(&decoder), Instance::into_channel)?,
                ),
            };
            let r = restricted_bayes_risk(&pi, &k, &d, &RiskOptions { tol, exec, ..RiskOptions::default() })?;
            let opts = ProjectionOptions {
                tol,
                exec,
                ..ProjectionOptions::default()
            };
            let def = deficiency(&d, &k, &pi, &opts)?;
            let diff = if r.gap.is_infinite() && def.value.is_infinite() {
                0.0
            } else {
                (r.gap - def.value).abs()
            };
            let table = Table::key_value(vec![
                ("bayes_risk_bits", r.bayes_risk.into()),
                ("restricted_risk_bits", r.restricted_risk.into()),
                ("gap_bits", r.gap.into()),
                ("deficiency_bits", def.value.into()),
                ("abs_difference_bits", diff.into()),
                ("converged", (r.converged && def.converged).into()),
            ]);
            let json = json!({
                "bayes_risk_bits": num(r.bayes_risk),
                "restricted_risk_bits": num(r.restricted_risk),
                "gap_bits": num(r.gap),
                "deficiency_bits": num(def.value),
                "abs_difference_bits": num(diff),
                "converged": r.converged && def.converged,
                "per_input_acts": r.per_input_acts.iter().map(|a| nums(a.as_slice())).collect::<Vec<_>>(),
            });
            Ok(emit(format, &table, json))
        }
        Command::IbCurve { joint, curve } => {
            let pxy = load_with(&joint, Instance::into_joint2)?;
            let cfg = bottleneck_config(&curve, pxy.n_rows(), exec)?;
            let points = ib_curve(&pxy, &parse_grid(&curve.beta_grid)?, &cfg)?;
            emit_curves(&curve, &[(None, points)])
        }
        Command::DbCurve {
            prior,
            channel,
            joint,
            schedule,
            curve,
        } => {
            let (pi, k) = match &joint {
                Some(j) => {
                    let pxy: Joint2 = load_with(j, Instance::into_joint2)?;
                    (pxy.row_marginal(), pxy.conditional())
                }
                None => (
                    load_with(required(&prior), Instance::into_prob_vector)?,
                    load_with(required(&channel), Instance::into_channel)?,
                ),
            };
            let schedules = parse_schedules(&schedule)?;
            let cfg = bottleneck_config(&curve, pi.len(), exec)?;
            let curves = db_curves(&pi, &k, &parse_grid(&curve.beta_grid)?, &cfg, &schedules)?;
            let curves: Vec<_> = curves.into_iter().map(|(s, p)| (Some(s), p)).collect();
            emit_curves(&curve, &curves)
        }
        Command::Estimate {
            data,
            encoder,
            decoder,
            m_grid,
            batch,
            batches,
            beta,
            reference,
            seed,
            format,
        } => {
            let data = load_with(&data, Instance::into_samples)?;
            let e = load_with(&encoder, Instance::into_channel)?;
            let d = load_with(&decoder, Instance::into_channel)?;
            let reference = match reference.as_str() {
                "uniform" => Reference::Uniform,
                "marginal" => Reference::EncoderMarginal,
                path => Reference::Explicit(load_with(Path::new(path), Instance::into_prob_vector)?),
            };
            let cfg = EstimatorConfig {
                m_samples: 1,
                batch: batch.unwrap_or(data.len()),
                beta,
                reference,
                seed,
                batches,
                exec,
            };
            let report = paired_objective_report(&data, &e, &d, &cfg, &m_grid)?;
            let mut table = Table::new(&[
                "m", "mean_vdb", "mean_vib", "jensen_gap", "se_vdb", "se_vib", "se_gap", "beta_term",
            ]);
            for r in &report {
                table.push(vec![
                    r.m.into(),
                    r.mean_vdb.into(),
                    r.mean_vib.into(),
                    r.jensen_gap.into(),
                    r.se_vdb.into(),
                    r.se_vib.into(),
                    r.se_gap.into(),
                    r.beta_term.into(),
                ]);
            }
            let json = json!({ "rows": table.json_rows() });
            Ok(emit(format, &table, json))
        }
    }
}

fn bottleneck_config(args: &CurveArgs, nx: usize, exec: Exec) -> Result<BottleneckConfig> {
    let cfg = BottleneckConfig {
        z_cardinality: args.z_card.unwrap_or(nx),
        max_outer_iter: args.max_iter,
        tol: args.tol,
        restarts: args.restarts,
        seed: args.seed,
        exec,
        ..BottleneckConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_grid(arg: &str) -> Result<Vec<f64>> {
    if arg == "default" {
        return Ok(default_beta_grid());
    }
    let grid = if let Some(rest) = arg.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("beta grid `{arg}`: expected log:lo:hi:n");
        }
        let lo: f64 = parts[0].parse().with_context(|| format!("beta grid lower bound `{}`", parts[0]))?;
        let hi: f64 = parts[1].parse().with_context(|| format!("beta grid upper bound `{}`", parts[1]))?;
        let n: usize = parts[2].parse().with_context(|| format!("beta grid size `{}`", parts[2]))?;
        if !(lo > 0.0 && hi >= lo && n >= 1) {
            bail!("beta grid `{arg}`: need 0 < lo <= hi and n >= 1");
        }
        log_grid(lo, hi, n)
    } else {
        arg.split(',')
            .enumerate()
            .map(|(i, s)| s.trim().parse::<f64>().with_context(|| format!("beta grid entry {i}: `{s}`")))
            .collect::<Result<_>>()?
    };
    if let Some(i) = grid.iter().position(|b| !(b.is_finite() && *b >= 0.0)) {
        bail!("beta grid entry {i}: β must be finite and >= 0");
    }
    if grid.is_empty() {
        bail!("beta grid is empty");
    }
    Ok(grid)
}

fn parse_schedules(arg: &str) -> Result<Vec<Schedule>> {
    arg.split(',')
        .map(|s| match s.trim() {
            "oneshot" => Ok(Schedule::Oneshot),
            other => {
                let k = other
                    .strip_prefix("seq:")
                    .or_else(|| other.strip_prefix("sequential:"))
                    .with_context(|| format!("schedule `{other}`: expected oneshot or seq:k"))?;
                let k: usize = k.parse().with_context(|| format!("schedule `{other}`: bad k"))?;
                if k == 0 {
                    bail!("schedule `{other}`: k must be >= 1");
                }
                Ok(Schedule::Sequential(k))
            }
        })
        .collect()
}

fn curve_csv(points: &[CurvePoint]) -> String {
    let mut t = Table::new(&["beta", "rate_bits", "sufficiency_bits", "objective_bits"]);
    for p in points {
        t.push(vec![p.beta.into(), p.rate.into(), p.sufficiency.into(), p.objective.into()]);
    }
    t.csv()
}

fn schedule_tag(s: Schedule) -> String {
    match s {
        Schedule::Oneshot => "oneshot".into(),
        Schedule::Sequential(k) => format!("seq{k}"),
    }
}

/// With several schedules, `--out curve.csv` becomes `curve.<schedule>.csv`.
fn out_path(base: &Path, schedule: Option<Schedule>, several: bool) -> PathBuf {
    match schedule {
        Some(s) if several => {
            let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let ext = base.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
            base.with_file_name(format!("{stem}.{}{ext}", schedule_tag(s)))
        }
        _ => base.to_path_buf(),
    }
}

fn emit_curves(args: &CurveArgs, curves: &[(Option<Schedule>, Vec<CurvePoint>)]) -> Result<Outcome> {
    let several = curves.len() > 1;
    if let Some(out) = &args.out {
        for (s, points) in curves {
            let path = out_path(out, *s, several);
            fs::write(&path, curve_csv(points)).with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    let with_schedule = curves[0].0.is_some();
    let mut cols = vec!["beta", "rate_bits", "sufficiency_bits", "objective_bits", "converged"];
    if with_schedule {
        cols.insert(0, "schedule");
    }
    let mut table = Table::new(&cols);
    for (s, points) in curves {
        for p in points {
            let mut row: Vec<Cell> =
                vec![p.beta.into(), p.rate.into(), p.sufficiency.into(), p.objective.into(), p.converged.into()];
            if let Some(s) = s {
                row.insert(0, s.to_string().into());
            }
            table.push(row);
        }
    }
    let point_json = |p: &CurvePoint| {
        json!({
            "beta": num(p.beta),
            "rate_bits": num(p.rate),
            "sufficiency_bits": num(p.sufficiency),
            "objective_bits": num(p.objective),
            "converged": p.converged,
            "iterations": p.iterations,
            "encoder": rows(&p.encoder),
            "decoder": rows(&p.decoder),
        })
    };
    let json = if with_schedule {
        json!({ "curves": curves.iter().map(|(s, pts)| json!({
            "schedule": s.map(|s| s.to_string()),
            "points": pts.iter().map(point_json).collect::<Vec<_>>(),
        })).collect::<Vec<_>>() })
    } else {
        json!({ "points": curves[0].1.iter().map(point_json).collect::<Vec<_>>() })
    };
    if args.format.csv {
        let text: Vec<String> = curves.iter().map(|(_, p)| curve_csv(p)).collect();
        print!("{}", text.join("\n"));
        return Ok(if table.has_infinite() { Outcome::Degenerate } else { Outcome::Finite });
    }
    Ok(emit(args.format, &table, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_schedules_parse() {
        assert_eq!(parse_grid("0.5, 0.1").unwrap(), vec![0.5, 0.1]);
        assert_eq!(parse_grid("log:1e-4:1:30").unwrap(), default_beta_grid());
        assert!(parse_grid("log:0:1:3").is_err());
        assert!(parse_grid("0.1,x").is_err());
        assert!(parse_grid("-1").is_err());
        assert_eq!(
            parse_schedules("oneshot,seq:3").unwrap(),
            vec![Schedule::Oneshot, Schedule::Sequential(3)]
        );
        assert!(parse_schedules("seq:0").is_err());
        assert!(parse_schedules("twice").is_err());
    }

    #[test]
    fn per_schedule_output_files() {
        let base = Path::new("/tmp/curve.csv");
        assert_eq!(out_path(base, Some(Schedule::Oneshot), false), base);
        assert_eq!(out_path(base, Some(Schedule::Sequential(2)), true), Path::new("/tmp/curve.seq2.csv"));
    }
}
