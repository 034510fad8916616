//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use selrisk_core::bounds::{scalarize_pair, OuterBound};
use selrisk_core::scenarios::write_csv;
use selrisk_core::{
    compute_bundle, BundleOptions, Error, HalfSpaceSet, Result, RiskBundle, RiskRegion2D, SetPortfolio, Window,
};

use crate::config::RunConfig;
use crate::output::{boundary_csv, to_json, write_text};

/// Output directory: the flag, else the config's `output`, else `.`.
fn out_dir(cfg: &RunConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(|o| cfg.base_dir.join(o))).unwrap_or_else(|| ".".into())
}

/// Writes `scenarios.csv` and returns a one-paragraph summary.
pub fn cmd_gen(cfg: &RunConfig, out: Option<&Path>) -> Result<String> {
    let e = cfg.load_data()?;
    let dir = out_dir(cfg, out);
    fs::create_dir_all(&dir).map_err(|err| Error::Io(format!("{}: {err}", dir.display())))?;
    let path = dir.join("scenarios.csv");
    write_csv(&e, &path)?;
    let mut s = format!("wrote {} scenarios to {}\n", e.n(), path.display());
    for j in 0..e.dim() {
        s.push_str(&format!("mean x{} = {:.6}\n", j + 1, e.column_mean(j)));
    }
    if let Some(r) = e.rates() {
        s.push_str(&format!("mean pi = {:.6}\n", selrisk_core::ScenarioEnsemble::sorted_mean(r, e.weights())));
    }
    Ok(s)
}

/// Computes the bundle and writes `bundle.json` plus one boundary CSV per
/// planar region.
pub fn cmd_risk(cfg: &RunConfig, out: Option<&Path>, window: Option<Window>) -> Result<RiskBundle> {
    let kind = cfg.portfolio.clone().ok_or_else(|| Error::InvalidInput("config: portfolio is required".into()))?;
    let e = cfg.load_data()?;
    let profile = cfg.profile(e.dim())?;
    let port = SetPortfolio::new(&e, kind)?;
    let window = cfg.window(window);
    let opts = BundleOptions { strategies: cfg.strategies.clone(), directions: cfg.directions, window };
    let b = compute_bundle(&port, &profile, &opts)?;
    let dir = out_dir(cfg, out);
    write_text(&dir.join("bundle.json"), &to_json(&b)?)?;
    write_text(&dir.join("inner_boundary.csv"), &boundary_csv(&b.inner, window.as_ref()))?;
    write_text(&dir.join("marginal_boundary.csv"), &boundary_csv(&b.marginal, window.as_ref()))?;
    if let Some(o) = b.outer.region() {
        write_text(&dir.join("outer_boundary.csv"), &boundary_csv(o, window.as_ref()))?;
    }
    Ok(b)
}

/// Inner and outer regions of a bundle file.
pub fn read_bundle_regions(path: &Path) -> Result<(RiskRegion2D, OuterBound)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| Error::InvalidInput(format!("{}: {e}", path.display()));
    let v: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    let inner: RiskRegion2D = serde_json::from_value(v["inner"].clone()).map_err(bad)?;
    let outer = if v["outer"].get("vertices").is_some() {
        OuterBound::Region(serde_json::from_value(v["outer"].clone()).map_err(bad)?)
    } else {
        OuterBound::HalfSpaces(serde_json::from_value::<HalfSpaceSet>(v["outer"].clone()).map_err(bad)?)
    };
    Ok((inner, outer))
}

/// `(inner, outer)` scalarizations of a bundle file at `u`.
pub fn cmd_scalarize(bundle: &Path, u: &[f64]) -> Result<(f64, f64)> {
    let (inner, outer) = read_bundle_regions(bundle)?;
    scalarize_pair(&inner, &outer, u)
}
