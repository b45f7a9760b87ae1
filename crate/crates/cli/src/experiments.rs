use elm_pi::data::{split, synth, synth_skinlike, GeneratorSpec};
use elm_pi::derive_seed;
use elm_pi::eval::{confusion_at_coverage, nmpiw, picp, uniform_pi_curve, ScoreMode};
use elm_pi::linalg::std_normal_quantile;
use elm_pi::pipeline::{fit_pi_with_report, predict_pi, uncertainty_decay_curve};
use elm_pi::{Error, Result};
use ndarray::Axis;

use crate::commands::{dataset_csv, parse_usize_list};
use crate::output::{Csv, Outputs, Record};
use crate::ExperimentArgs;

const NAMES: [&str; 4] = ["artificial", "decay", "boundary", "fp-coverage"];
const FP_COVERAGES: [f64; 7] = [1.0, 0.7, 0.5, 0.3, 0.1, 0.03, 0.01];
const BOUNDARY_ALPHAS: [f64; 8] = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99];

pub fn run(args: ExperimentArgs) -> Result<()> {
    let mut out = Outputs::new(&args.out);
    let mut config = Record::default();
    config.put("command", "experiment").put("name", &args.name);
    let cfg = args.model.config()?;
    args.model.echo(&mut config, &cfg);
    config.put("alpha", args.alpha);
    let seed = args.model.seed;

    match args.name.as_str() {
        "artificial" => {
            let n = args.n.unwrap_or(1000);
            config.put("n", n);
            let spec = GeneratorSpec::heteroscedastic(n, derive_seed(seed, 1));
            let train = synth(&spec)?;
            let test = synth(&spec.with_n(10_000).with_seed(derive_seed(seed, 2)))?;
            let (model, rep) = fit_pi_with_report(train.dataset().x().view(), train.dataset().y().view(), &cfg)?;

            let z = std_normal_quantile(args.alpha)?;
            let grid = spec.grid(500);
            let preds = predict_pi(&model, grid.view().insert_axis(Axis(1)).view(), args.alpha, cfg.batch_rows)?;
            let mut csv = Csv::new(&[
                "x", "f", "true_lower", "true_upper", "y_hat", "lower", "upper", "r2", "sigma2_r", "sigma2_y",
            ]);
            for (&x, p) in grid.iter().zip(&preds) {
                let (f, s) = (spec.mean_at(x), spec.sigma_at(x));
                csv.row([x, f, f - z * s, f + z * s, p.y_hat, p.lower, p.upper, p.r2(), p.sigma2_r, p.sigma2_y]);
            }
            let test_preds = predict_pi(&model, test.dataset().x().view(), args.alpha, cfg.batch_rows)?;
            let y = test.dataset().y().to_vec();
            let mut report = Record::default();
            report
                .put("n_train", n)
                .put("n_test", y.len())
                .put("gamma_data", format!("{:e}", rep.selection_data.gamma))
                .put("gamma_var", format!("{:e}", rep.selection_var.gamma))
                .put("picp", picp(&test_preds, &y)?)
                .put("nmpiw", nmpiw(&test_preds, &y)?);
            out.add("train.csv", dataset_csv(train.dataset()));
            out.add("curve.csv", csv.into_string());
            out.add("report.txt", report.into_string());
        }
        "decay" => {
            let ns = parse_usize_list(&args.n_values, "--n-values")?;
            config.put("n_values", &args.n_values).put("trials", args.trials);
            let rows = uncertainty_decay_curve(
                &GeneratorSpec::heteroscedastic(1, seed),
                &ns,
                args.alpha,
                args.trials,
                &cfg,
                200,
            )?;
            let mut csv = Csv::new(&[
                "n",
                "mean_sigma2_y",
                "mean_sigma2_r",
                "mean_r2",
                "mean_half_width",
                "model_uncertainty",
            ]);
            for r in &rows {
                csv.row([
                    r.n as f64,
                    r.mean_sigma2_y,
                    r.mean_sigma2_r,
                    r.mean_r2,
                    r.mean_half_width,
                    r.model_uncertainty(),
                ]);
            }
            out.add("decay.csv", csv.into_string());
        }
        "boundary" => {
            let n = args.n.unwrap_or(1000);
            config.put("n", n);
            let spec = GeneratorSpec::heteroscedastic(n, derive_seed(seed, 1));
            let train = synth(&spec)?;
            let test = synth(&spec.with_n(5000).with_seed(derive_seed(seed, 2)))?;
            let (model, _) = fit_pi_with_report(train.dataset().x().view(), train.dataset().y().view(), &cfg)?;
            let y = test.dataset().y().to_vec();
            let base = predict_pi(&model, test.dataset().x().view(), args.alpha, cfg.batch_rows)?;
            let y_hat: Vec<f64> = base.iter().map(|p| p.y_hat).collect();
            let mut uniform = Csv::new(&["half_width", "nmpiw", "picp"]);
            for p in uniform_pi_curve(&y_hat, &y, 200)? {
                uniform.row([p.half_width, p.nmpiw, p.picp]);
            }
            let mut points = Csv::new(&["alpha", "nmpiw", "picp"]);
            for a in BOUNDARY_ALPHAS {
                let preds = predict_pi(&model, test.dataset().x().view(), a, cfg.batch_rows)?;
                points.row([a, nmpiw(&preds, &y)?, picp(&preds, &y)?]);
            }
            out.add("uniform_curve.csv", uniform.into_string());
            out.add("pi_points.csv", points.into_string());
        }
        "fp-coverage" => {
            let n = args.n.unwrap_or(20_000);
            config.put("n", n).put("features", args.features);
            let data = synth_skinlike(n, args.features, derive_seed(seed, 1))?;
            let (train, test) = split(&data, 0.5, derive_seed(seed, 2))?;
            let (model, _) = fit_pi_with_report(train.x().view(), train.y().view(), &cfg)?;
            let preds = predict_pi(&model, test.x().view(), args.alpha, cfg.batch_rows)?;
            let y_hat: Vec<f64> = preds.iter().map(|p| p.y_hat).collect();
            let s: Vec<f64> = preds.iter().map(|p| p.s).collect();
            let labels = test.y().to_vec();
            let mut csv = Csv::new(&["mode", "coverage", "theta", "retained", "tp_rate", "fp_rate"]);
            let opt = |v: Option<f64>| v.map_or(String::new(), |r| r.to_string());
            for mode in [ScoreMode::Mse, ScoreMode::PerSample] {
                for p in confusion_at_coverage(&y_hat, Some(&s), &labels, &FP_COVERAGES, mode)? {
                    csv.row([
                        mode.name().to_string(),
                        p.coverage.to_string(),
                        p.theta.to_string(),
                        p.retained.to_string(),
                        opt(p.tp_rate),
                        opt(p.fp_rate),
                    ]);
                }
            }
            out.add("fp_coverage.csv", csv.into_string());
        }
        other => {
            return Err(Error::Config(format!("unknown experiment `{other}`; valid names: {}", NAMES.join(", "))));
        }
    }
    out.add("config.txt", config.into_string());
    out.commit()?;
    Ok(())
}
