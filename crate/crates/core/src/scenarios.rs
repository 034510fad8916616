//! Seeded scenario generation and CSV ingestion.
//!
//! The generator is ChaCha20 (`rand_chacha` 0.9) seeded with
//! `seed_from_u64(seed)`. Gains are drawn from stream 0 and exchange rates
//! from stream 1, so adding or removing the rate model never changes the
//! gains.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markets::ScenarioEnsemble;
use crate::round_sig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GainModel {
    BivariateNormal {
        #[serde(default)]
        mean: [f64; 2],
        #[serde(default = "unit_variances")]
        variances: [f64; 2],
        #[serde(default)]
        correlation: f64,
    },
    /// `X ≡ 0`, for studying the trading opportunities alone.
    Zero,
}

fn unit_variances() -> [f64; 2] {
    [1.0, 1.0]
}

impl Default for GainModel {
    fn default() -> Self {
        GainModel::BivariateNormal { mean: [0.0, 0.0], variances: unit_variances(), correlation: 0.0 }
    }
}

/// `π = mean·exp(σZ - σ²/2)`, so `Eπ = mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalRate {
    pub mean: f64,
    pub volatility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(default)]
    pub gains: GainModel,
    #[serde(default)]
    pub rate: Option<LognormalRate>,
    pub n: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("scenario count must be at least one".into()));
        }
        if let GainModel::BivariateNormal { mean, variances, correlation } = &self.gains {
            if !mean.iter().all(|m| m.is_finite()) {
                return Err(Error::InvalidInput("means must be finite".into()));
            }
            if !variances.iter().all(|v| v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidInput(format!("variances {variances:?} must be positive")));
            }
            if correlation.is_nan() || correlation.abs() >= 1.0 {
                return Err(Error::InvalidInput(format!("correlation {correlation} must lie in (-1, 1)")));
            }
        }
        if let Some(r) = &self.rate {
            if !(r.mean.is_finite() && r.mean > 0.0 && r.volatility.is_finite() && r.volatility >= 0.0) {
                return Err(Error::InvalidInput(format!("rate model {r:?} needs a positive mean and volatility")));
            }
        }
        Ok(())
    }
}

/// Draws `n` equally weighted scenarios.
pub fn generate(spec: &GenSpec) -> Result<ScenarioEnsemble> {
    spec.validate()?;
    let n = spec.n;
    let mut gains = Vec::with_capacity(2 * n);
    match &spec.gains {
        GainModel::BivariateNormal { mean, variances, correlation } => {
            let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
            rng.set_stream(0);
            let (s1, s2) = (variances[0].sqrt(), variances[1].sqrt());
            let c = (1.0 - correlation * correlation).sqrt();
            for _ in 0..n {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                gains.push(mean[0] + s1 * z1);
                gains.push(mean[1] + s2 * (correlation * z1 + c * z2));
            }
        }
        GainModel::Zero => gains.resize(2 * n, 0.0),
    }
    let rates = spec.rate.map(|r| {
        let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
        rng.set_stream(1);
        let shift = -0.5 * r.volatility * r.volatility;
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                r.mean * (r.volatility * z + shift).exp()
            })
            .collect()
    });
    ScenarioEnsemble::new(2, gains, rates, None)
}

fn csv_err(line: u64, message: impl Into<String>) -> Error {
    Error::Csv { line: line as usize, message: message.into() }
}

/// Parses the `x1,…,xd[,pi][,w]` format.
pub fn read_csv_from(reader: impl Read) -> Result<ScenarioEnsemble> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(|e| csv_err(1, e.to_string()))?.iter().map(str::to_string).collect();
    let dim = header.iter().take_while(|h| h.strip_prefix('x').and_then(|k| k.parse::<usize>().ok()).is_some()).count();
    for (j, h) in header.iter().take(dim).enumerate() {
        if *h != format!("x{}", j + 1) {
            return Err(csv_err(1, format!("expected column x{} but found `{h}`", j + 1)));
        }
    }
    if dim == 0 {
        return Err(csv_err(1, "header must start with x1"));
    }
    let rest: Vec<&str> = header[dim..].iter().map(String::as_str).collect();
    let (has_pi, has_w) = match rest[..] {
        [] => (false, false),
        ["pi"] => (true, false),
        ["w"] => (false, true),
        ["pi", "w"] => (true, true),
        _ => return Err(csv_err(1, format!("unexpected columns {rest:?}; expected x1..xd[,pi][,w]"))),
    };
    let (mut gains, mut rates, mut weights) = (vec![], vec![], vec![]);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            csv_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(csv_err(line, format!("{} fields, expected {}", rec.len(), header.len())));
        }
        let num = |k: usize| -> Result<f64> {
            let v: f64 = rec[k].parse().map_err(|_| csv_err(line, format!("`{}` is not a number", &rec[k])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(csv_err(line, format!("non-finite value `{}`", &rec[k])))
            }
        };
        for k in 0..dim {
            gains.push(num(k)?);
        }
        if has_pi {
            let p = num(dim)?;
            if p <= 0.0 {
                return Err(csv_err(line, format!("exchange rate {p} must be positive")));
            }
            rates.push(p);
        }
        if has_w {
            let w = num(header.len() - 1)?;
            if w < 0.0 {
                return Err(csv_err(line, format!("weight {w} is negative")));
            }
            weights.push(w);
        }
    }
    if gains.is_empty() {
        return Err(csv_err(1, "no scenarios"));
    }
    ScenarioEnsemble::new(dim, gains, has_pi.then_some(rates), has_w.then_some(weights))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<ScenarioEnsemble> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv_from(f)
}

/// Writes every number rounded to 12 significant digits. The weight column
/// is omitted when weights are uniform.
pub fn write_csv_to(e: &ScenarioEnsemble, mut out: impl Write) -> Result<()> {
    let d = e.dim();
    let w = e.weights();
    let uniform = w.iter().all(|x| *x == w[0]);
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    if e.rates().is_some() {
        header.push("pi".into());
    }
    if !uniform {
        header.push("w".into());
    }
    let mut s = header.join(",");
    s.push('\n');
    for i in 0..e.n() {
        let mut row: Vec<String> = e.row(i).iter().map(|v| fmt(*v)).collect();
        if let Some(r) = e.rates() {
            row.push(fmt(r[i]));
        }
        if !uniform {
            row.push(fmt(w[i]));
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_csv(e: &ScenarioEnsemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|err| Error::Io(format!("{}: {err}", path.display())))?;
    let mut buf = std::io::BufWriter::new(f);
    write_csv_to(e, &mut buf)?;
    buf.flush()?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{}", round_sig(v, 12))
}
