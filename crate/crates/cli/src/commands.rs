use std::path::Path;
use std::time::Instant;

use elm_pi::data::{
    load_csv, load_model, model_to_string, read_table, split, synth, synth_skinlike, Dataset, GeneratorSpec,
    TargetColumn,
};
use elm_pi::elm::{parse_specs, specs_to_string};
use elm_pi::eval::{uniform_pi_curve, IntervalReport};
use elm_pi::pipeline::{default_gamma_grid, fit_pi_with_report, predict_pi, IntervalPrediction, PiConfig, PiSeeds};
use elm_pi::{Error, Result};

use crate::output::{Csv, Outputs, Record};
use crate::{EvalArgs, FitArgs, ModelArgs, PredictArgs, SourceArgs};

pub const INTERVAL_COLUMNS: [&str; 7] = ["y_hat", "lower", "upper", "s", "r2_raw", "sigma2_r", "sigma2_y"];

pub fn parse_target(raw: &str) -> TargetColumn {
    match raw {
        "last" => TargetColumn::Last,
        _ => raw.parse().map(TargetColumn::Index).unwrap_or_else(|_| TargetColumn::Name(raw.to_string())),
    }
}

pub fn parse_grid(raw: Option<&str>) -> Result<Vec<f64>> {
    let Some(raw) = raw else {
        return Ok(default_gamma_grid());
    };
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("γ grid entry `{}` is not a number", t.trim())))
        })
        .collect()
}

pub fn parse_usize_list(raw: &str, what: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Config(format!("{what} entry `{}` is not a count", t.trim()))))
        .collect()
}

impl ModelArgs {
    pub fn config(&self) -> Result<PiConfig> {
        Ok(PiConfig {
            specs_data: parse_specs(&self.neurons_data)?,
            specs_var: parse_specs(&self.neurons_var)?,
            gamma_grid: parse_grid(self.gamma_grid.as_deref())?,
            seeds: PiSeeds::from_master(self.seed),
            batch_rows: self.batch_rows,
            val_fraction: self.val_fraction,
            leave_out_residuals: self.leave_out,
        })
    }

    pub fn echo(&self, rec: &mut Record, cfg: &PiConfig) {
        let grid: Vec<String> = cfg.gamma_grid.iter().map(|g| format!("{g:e}")).collect();
        rec.put("neurons_data", specs_to_string(&cfg.specs_data))
            .put("neurons_var", specs_to_string(&cfg.specs_var))
            .put("gamma_grid", grid.join(","))
            .put("seed", self.seed)
            .put("batch_rows", cfg.batch_rows)
            .put("val_fraction", cfg.val_fraction)
            .put("leave_out", cfg.leave_out_residuals);
    }
}

impl SourceArgs {
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match (&self.data, &self.synth) {
            (Some(path), None) => load_csv(path, &parse_target(&self.target), !self.no_header),
            (None, Some(kind)) => match kind.as_str() {
                "heteroscedastic" => Ok(synth(&GeneratorSpec::heteroscedastic(self.n, seed))?.into_parts().0),
                "homoscedastic" => Ok(synth(&GeneratorSpec::homoscedastic(self.n, self.noise, seed))?.into_parts().0),
                "skinlike" => synth_skinlike(self.n, self.features, seed),
                other => Err(Error::Config(format!(
                    "unknown generator `{other}`; valid: heteroscedastic, homoscedastic, skinlike"
                ))),
            },
            (None, None) => Err(Error::Config("one of --data or --synth is required".into())),
            (Some(_), Some(_)) => Err(Error::Config("--data and --synth are mutually exclusive".into())),
        }
    }

    pub fn echo(&self, rec: &mut Record) {
        match (&self.data, &self.synth) {
            (Some(path), _) => {
                rec.put("data", path.display()).put("target", &self.target).put("header", !self.no_header);
            }
            (_, Some(kind)) => {
                rec.put("synth", kind).put("n", self.n);
                match kind.as_str() {
                    "homoscedastic" => {
                        rec.put("noise", self.noise);
                    }
                    "skinlike" => {
                        rec.put("features", self.features);
                    }
                    _ => {}
                }
            }
            _ => {}
        }
    }
}

pub fn dataset_csv(ds: &Dataset) -> String {
    let names: Vec<String> = match ds.feature_names() {
        Some(n) => n.to_vec(),
        None if ds.dim() == 1 => vec!["x".to_string()],
        None => (0..ds.dim()).map(|j| format!("x{j}")).collect(),
    };
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    header.push("y");
    let mut csv = Csv::new(&header);
    for (row, y) in ds.x().rows().into_iter().zip(ds.y()) {
        csv.row(row.iter().chain(std::iter::once(y)));
    }
    csv.into_string()
}

pub fn intervals_csv(preds: &[IntervalPrediction]) -> String {
    let mut csv = Csv::new(&INTERVAL_COLUMNS);
    for p in preds {
        csv.row([p.y_hat, p.lower, p.upper, p.s, p.r2_raw, p.sigma2_r, p.sigma2_y]);
    }
    csv.into_string()
}

pub fn fit(args: FitArgs) -> Result<()> {
    let cfg = args.model.config()?;
    let data = args.source.load(args.model.seed)?;
    let (train, test) = if args.train_fraction < 1.0 {
        let (a, b) = split(&data, args.train_fraction, args.model.seed)?;
        (a, Some(b))
    } else if args.train_fraction == 1.0 {
        (data, None)
    } else {
        return Err(Error::Config(format!("train fraction must lie in (0, 1], got {}", args.train_fraction)));
    };

    let started = Instant::now();
    let (model, report) = fit_pi_with_report(train.x().view(), train.y().view(), &cfg)?;
    let wall = started.elapsed();

    let mut config = Record::default();
    config.put("command", "fit");
    args.source.echo(&mut config);
    args.model.echo(&mut config, &cfg);
    config.put("train_fraction", args.train_fraction).put("out", args.out.display());

    let t = report.timings;
    let mut rep = Record::default();
    rep.put("n_train", train.len())
        .put("input_dim", train.dim())
        .put("gamma_data", format!("{:e}", report.selection_data.gamma))
        .put("gamma_var", format!("{:e}", report.selection_var.gamma))
        .put("neurons_data", model.data.layer().width())
        .put("neurons_var", model.var.layer().width())
        .put("leverage_clamps_data", model.sigma_data.leverage_clamp_count)
        .put("leverage_clamps_var", model.sigma_var.leverage_clamp_count)
        .put("time_elm_data_s", t.elm_data.as_secs_f64())
        .put("time_jackknife_data_s", t.jackknife_data.as_secs_f64())
        .put("time_elm_var_s", t.elm_var.as_secs_f64())
        .put("time_jackknife_var_s", t.jackknife_var.as_secs_f64())
        .put("time_total_s", wall.as_secs_f64());

    let mut out = Outputs::new(&args.out);
    out.add("model.elmpi", model_to_string(&model));
    out.add("fit_report.txt", rep.into_string());
    out.add("config.txt", config.into_string());
    if args.source.synth.is_some() {
        out.add("train.csv", dataset_csv(&train));
    }
    if let Some(test) = &test {
        out.add("test.csv", dataset_csv(test));
    }
    out.commit()?;
    Ok(())
}

fn features_for_model(path: &Path, target: Option<&str>, has_header: bool, d: usize) -> Result<ndarray::Array2<f64>> {
    let table = read_table(path, has_header)?;
    let x = match target {
        Some(t) => {
            let idx = table.column_index(&parse_target(t))?;
            table.take_column(idx).0
        }
        None => table.data,
    };
    if x.ncols() != d {
        return Err(Error::Schema(format!(
            "{} has {} feature columns but the model expects {d}",
            path.display(),
            x.ncols()
        )));
    }
    Ok(x)
}

pub fn predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let x = features_for_model(&args.data, args.target.as_deref(), !args.no_header, model.input_dim())?;
    let started = Instant::now();
    let preds = predict_pi(&model, x.view(), args.alpha, args.batch_rows)?;
    let took = started.elapsed();

    let mut config = Record::default();
    config
        .put("command", "predict")
        .put("model", args.model.display())
        .put("data", args.data.display())
        .put("target", args.target.as_deref().unwrap_or("none"))
        .put("header", !args.no_header)
        .put("alpha", args.alpha)
        .put("batch_rows", args.batch_rows)
        .put("out", args.out.display());
    let mut rep = Record::default();
    rep.put("n", preds.len()).put("alpha", args.alpha).put("time_predict_s", took.as_secs_f64());

    let mut out = Outputs::new(&args.out);
    out.add("intervals.csv", intervals_csv(&preds));
    out.add("predict_report.txt", rep.into_string());
    out.add("config.txt", config.into_string());
    out.commit()?;
    Ok(())
}

pub fn read_intervals(path: &Path) -> Result<Vec<IntervalPrediction>> {
    let table = read_table(path, true)?;
    let header = table.header.as_deref().unwrap_or_default();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("{} lacks column `{name}`", path.display())))
    };
    let idx: Vec<usize> = INTERVAL_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    if table.data.nrows() == 0 {
        return Err(Error::EmptyData("intervals file has no rows"));
    }
    Ok(table
        .data
        .rows()
        .into_iter()
        .map(|r| IntervalPrediction {
            y_hat: r[idx[0]],
            lower: r[idx[1]],
            upper: r[idx[2]],
            s: r[idx[3]],
            r2_raw: r[idx[4]],
            sigma2_r: r[idx[5]],
            sigma2_y: r[idx[6]],
        })
        .collect())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let preds = read_intervals(&args.intervals)?;
    let truth = read_table(&args.truth, !args.no_header)?;
    let idx = truth.column_index(&parse_target(&args.target))?;
    let y = truth.data.column(idx).to_vec();
    if y.len() != preds.len() {
        return Err(Error::Schema(format!(
            "{} has {} rows but {} has {}",
            args.intervals.display(),
            preds.len(),
            args.truth.display(),
            y.len()
        )));
    }
    let report = IntervalReport::evaluate(&preds, &y, args.alpha)?;
    print!("{report}");

    let Some(dir) = &args.out else {
        if args.curve_points.is_some() {
            return Err(Error::Config("--curve-points requires --out".into()));
        }
        return Ok(());
    };
    let mut out = Outputs::new(dir);
    out.add("eval_report.txt", report.to_string());
    if let Some(points) = args.curve_points {
        let y_hat: Vec<f64> = preds.iter().map(|p| p.y_hat).collect();
        let mut csv = Csv::new(&["half_width", "nmpiw", "picp"]);
        for p in uniform_pi_curve(&y_hat, &y, points)? {
            csv.row([p.half_width, p.nmpiw, p.picp]);
        }
        out.add("uniform_curve.csv", csv.into_string());
    }
    let mut config = Record::default();
    config
        .put("command", "eval")
        .put("intervals", args.intervals.display())
        .put("truth", args.truth.display())
        .put("target", &args.target)
        .put("header", !args.no_header)
        .put("alpha", args.alpha)
        .put("curve_points", args.curve_points.map_or("none".to_string(), |p| p.to_string()));
    out.add("config.txt", config.into_string());
    out.commit()?;
    Ok(())
}
