//! Versioned text container for [`PiModel`].
//!
//! ```text
//! elm-pi/1
//! <key> <type> [dims] <values...>
//! ...
//! checksum sha256 <hex of every byte above this line>
//! ```
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly, so save → load → save is byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use super::StandardizationParams;
use crate::elm::{parse_specs, specs_to_string, ElmModel, HiddenLayer};
use crate::jackknife::WeightCovariance;
use crate::pipeline::{PiMetadata, PiModel, PiSeeds};
use crate::{Error, Result};

pub const FORMAT_VERSION: &str = "elm-pi/1";

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

struct Writer {
    out: String,
}

impl Writer {
    fn u64(&mut self, key: &str, v: u64) {
        let _ = writeln!(self.out, "{key} u64 {v}");
    }

    fn f64(&mut self, key: &str, v: f64) {
        let _ = writeln!(self.out, "{key} f64 {v:.16e}");
    }

    fn str(&mut self, key: &str, v: &str) {
        let _ = writeln!(self.out, "{key} str {v}");
    }

    fn values<'a>(&mut self, vals: impl IntoIterator<Item = &'a f64>) {
        for v in vals {
            let _ = write!(self.out, " {v:.16e}");
        }
        self.out.push('\n');
    }

    fn vector(&mut self, key: &str, v: &Array1<f64>) {
        let _ = write!(self.out, "{key} vector {}", v.len());
        self.values(v.iter());
    }

    fn matrix(&mut self, key: &str, m: &Array2<f64>) {
        let _ = write!(self.out, "{key} matrix {} {}", m.nrows(), m.ncols());
        // Logical row-major order regardless of memory layout.
        self.values(m.iter());
    }

    fn flags(&mut self, key: &str, flags: &[bool]) {
        let _ = write!(self.out, "{key} flags {}", flags.len());
        for &f in flags {
            self.out.push_str(if f { " 1" } else { " 0" });
        }
        self.out.push('\n');
    }

    fn elm(&mut self, prefix: &str, model: &ElmModel, cov: &WeightCovariance) {
        let layer = model.layer();
        self.str(&format!("{prefix}.specs"), &specs_to_string(layer.specs()));
        self.u64(&format!("{prefix}.seed"), layer.seed());
        self.f64(&format!("{prefix}.gamma"), model.gamma());
        self.matrix(&format!("{prefix}.weights"), layer.weights());
        self.vector(&format!("{prefix}.beta"), model.beta());
        self.matrix(&format!("{prefix}.p"), model.p());
        self.matrix(&format!("{prefix}.sigma"), &cov.sigma);
        self.u64(&format!("{prefix}.leverage_clamps"), cov.leverage_clamp_count as u64);
    }
}

/// Canonical text form of a model.
pub fn model_to_string(model: &PiModel) -> String {
    let mut w = Writer {
        out: format!("{FORMAT_VERSION}\n"),
    };
    let meta = &model.meta;
    w.u64("n_train", meta.n_train as u64);
    w.u64("seeds.data_layer", meta.seeds.data_layer);
    w.u64("seeds.var_layer", meta.seeds.var_layer);
    w.u64("seeds.validation", meta.seeds.validation);
    w.u64("input_dim", model.input_dim() as u64);
    w.vector("standardization.mean", &meta.standardization.mean);
    w.vector("standardization.std", &meta.standardization.std);
    w.flags("standardization.constant", &meta.standardization.constant);
    w.elm("data", &model.data, &model.sigma_data);
    w.elm("var", &model.var, &model.sigma_var);
    let digest = hex_digest(w.out.as_bytes());
    let _ = writeln!(w.out, "checksum sha256 {digest}");
    w.out
}

struct Reader<'a> {
    lines: std::str::Lines<'a>,
}

fn format_err(field: &str, message: impl Into<String>) -> Error {
    Error::ModelFormat {
        field: field.to_string(),
        message: message.into(),
    }
}

impl<'a> Reader<'a> {
    /// Next record, which must carry `key` and `kind`; returns the remaining tokens.
    fn record(&mut self, key: &str, kind: &str) -> Result<std::str::SplitWhitespace<'a>> {
        let line = self.lines.next().ok_or_else(|| format_err(key, "missing (file truncated)"))?;
        let mut tokens = line.split_whitespace();
        match (tokens.next(), tokens.next()) {
            (Some(k), Some(t)) if k == key && t == kind => Ok(tokens),
            (Some(k), _) if k != key => Err(format_err(key, format!("expected field `{key}`, found `{k}`"))),
            _ => Err(format_err(key, format!("expected type `{kind}`"))),
        }
    }

    fn parse<T: std::str::FromStr>(key: &str, tok: Option<&str>) -> Result<T> {
        let tok = tok.ok_or_else(|| format_err(key, "missing value"))?;
        tok.parse().map_err(|_| format_err(key, format!("cannot parse `{tok}`")))
    }

    fn u64(&mut self, key: &str) -> Result<u64> {
        let mut t = self.record(key, "u64")?;
        Self::parse(key, t.next())
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        let mut t = self.record(key, "f64")?;
        Self::parse(key, t.next())
    }

    fn str(&mut self, key: &str) -> Result<String> {
        let t = self.record(key, "str")?;
        Ok(t.collect::<Vec<_>>().join(" "))
    }

    fn floats(key: &str, tokens: std::str::SplitWhitespace<'_>, expect: usize) -> Result<Vec<f64>> {
        let vals = tokens
            .map(|t| t.parse::<f64>().map_err(|_| format_err(key, format!("cannot parse `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != expect {
            return Err(format_err(key, format!("expected {expect} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn vector(&mut self, key: &str) -> Result<Array1<f64>> {
        let mut t = self.record(key, "vector")?;
        let n: usize = Self::parse(key, t.next())?;
        Ok(Array1::from(Self::floats(key, t, n)?))
    }

    fn matrix(&mut self, key: &str) -> Result<Array2<f64>> {
        let mut t = self.record(key, "matrix")?;
        let r: usize = Self::parse(key, t.next())?;
        let c: usize = Self::parse(key, t.next())?;
        let vals = Self::floats(key, t, r * c)?;
        Ok(Array2::from_shape_vec((r, c), vals).expect("length checked"))
    }

    fn flags(&mut self, key: &str) -> Result<Vec<bool>> {
        let mut t = self.record(key, "flags")?;
        let n: usize = Self::parse(key, t.next())?;
        let flags = t
            .map(|f| match f {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(format_err(key, format!("bad flag `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if flags.len() != n {
            return Err(format_err(key, format!("expected {n} flags, found {}", flags.len())));
        }
        Ok(flags)
    }

    fn elm(&mut self, prefix: &str, d: usize) -> Result<(ElmModel, WeightCovariance)> {
        let key = |k: &str| format!("{prefix}.{k}");
        let specs_key = key("specs");
        let specs = parse_specs(&self.str(&specs_key)?).map_err(|e| format_err(&specs_key, e.to_string()))?;
        let seed = self.u64(&key("seed"))?;
        let gamma = self.f64(&key("gamma"))?;
        let weights_key = key("weights");
        let weights = self.matrix(&weights_key)?;
        let layer =
            HiddenLayer::from_parts(d, &specs, seed, weights).map_err(|e| format_err(&weights_key, e.to_string()))?;
        let beta = self.vector(&key("beta"))?;
        let p = self.matrix(&key("p"))?;
        let sigma_key = key("sigma");
        let sigma = self.matrix(&sigma_key)?;
        if sigma.dim() != p.dim() {
            return Err(format_err(&sigma_key, "dimension differs from the inverse system matrix"));
        }
        let clamps = self.u64(&key("leverage_clamps"))? as usize;
        let model = ElmModel::from_parts(layer, beta, gamma, p).map_err(|e| format_err(&key("beta"), e.to_string()))?;
        Ok((
            model,
            WeightCovariance {
                sigma,
                leverage_clamp_count: clamps,
            },
        ))
    }
}

/// Parse and verify a model file's contents.
pub fn model_from_str(text: &str) -> Result<PiModel> {
    let body_end = text
        .rfind("checksum ")
        .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n')
        .ok_or_else(|| format_err("checksum", "missing (file truncated)"))?;
    let (body, trailer) = text.split_at(body_end);
    let mut trailer_tokens = trailer.split_whitespace();
    let stored = match (trailer_tokens.next(), trailer_tokens.next(), trailer_tokens.next()) {
        (Some("checksum"), Some("sha256"), Some(h)) => h,
        _ => return Err(format_err("checksum", "malformed checksum record")),
    };
    if hex_digest(body.as_bytes()) != stored {
        return Err(format_err("checksum", "content does not match stored sha256"));
    }

    let mut r = Reader { lines: body.lines() };
    let version = r.lines.next().unwrap_or_default();
    if version != FORMAT_VERSION {
        return Err(format_err("version", format!("expected `{FORMAT_VERSION}`, found `{version}`")));
    }
    let n_train = r.u64("n_train")? as usize;
    let seeds = PiSeeds {
        data_layer: r.u64("seeds.data_layer")?,
        var_layer: r.u64("seeds.var_layer")?,
        validation: r.u64("seeds.validation")?,
    };
    let d = r.u64("input_dim")? as usize;
    let mean = r.vector("standardization.mean")?;
    let std = r.vector("standardization.std")?;
    let constant = r.flags("standardization.constant")?;
    if mean.len() != d || std.len() != d || constant.len() != d {
        return Err(format_err("standardization", format!("expected {d} features")));
    }
    let (data, sigma_data) = r.elm("data", d)?;
    let (var, sigma_var) = r.elm("var", d)?;
    if let Some(extra) = r.lines.next() {
        return Err(format_err("checksum", format!("unexpected record before checksum: `{extra:.40}`")));
    }
    Ok(PiModel {
        meta: PiMetadata {
            n_train,
            seeds,
            gamma_data: data.gamma(),
            gamma_var: var.gamma(),
            standardization: StandardizationParams { mean, std, constant },
        },
        data,
        sigma_data,
        var,
        sigma_var,
    })
}

pub fn save_model(model: &PiModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_string(model)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PiModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth, GeneratorSpec};
    use crate::pipeline::{fit_pi, PiConfig};

    fn model() -> PiModel {
        let draw = synth(&GeneratorSpec::heteroscedastic(120, 1)).unwrap();
        fit_pi(draw.dataset().x().view(), draw.dataset().y().view(), &PiConfig::default()).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let text = model_to_string(&m);
        assert!(text.starts_with("elm-pi/1\n"));
        let back = model_from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_string(&back), text);
    }

    #[test]
    fn tampering_is_detected() {
        let text = model_to_string(&model());
        let tampered = text.replacen("n_train u64 120", "n_train u64 121", 1);
        assert!(matches!(model_from_str(&tampered), Err(Error::ModelFormat { field, .. }) if field == "checksum"));

        let mut bad_sum = text.clone();
        let at = bad_sum.rfind(char::is_alphanumeric).unwrap();
        bad_sum.replace_range(at..at + 1, if &text[at..at + 1] == "0" { "1" } else { "0" });
        assert!(matches!(model_from_str(&bad_sum), Err(Error::ModelFormat { field, .. }) if field == "checksum"));

        let truncated = &text[..text.len() / 2];
        assert!(matches!(model_from_str(truncated), Err(Error::ModelFormat { .. })));
    }

    #[test]
    fn version_mismatch_names_field() {
        let text = model_to_string(&model()).replacen("elm-pi/1\n", "elm-pi/2\n", 1);
        // Re-seal so only the version differs.
        let body_end = text.rfind("checksum ").unwrap();
        let body = &text[..body_end];
        let resealed = format!("{body}checksum sha256 {}\n", hex_digest(body.as_bytes()));
        assert!(matches!(model_from_str(&resealed), Err(Error::ModelFormat { field, .. }) if field == "version"));
    }

    #[test]
    fn missing_field_is_named() {
        let text = model_to_string(&model());
        let body_end = text.rfind("checksum ").unwrap();
        let body: String = text[..body_end]
            .lines()
            .filter(|l| !l.starts_with("var.beta "))
            .map(|l| format!("{l}\n"))
            .collect();
        let resealed = format!("{body}checksum sha256 {}\n", hex_digest(body.as_bytes()));
        match model_from_str(&resealed) {
            Err(Error::ModelFormat { field, .. }) => assert_eq!(field, "var.beta"),
            other => panic!("{other:?}"),
        }
    }
}
