//! Scenario bundles on disk.
//!
//! A bundle is a directory holding:
//!
//! - `scenario.toml`: `n_mg`, `horizon_t`, `dt`, the prices file name and one
//!   `[[microgrid]]` block per MG with its series file and parameters;
//! - one CSV per MG with header `t,load_kw,wt_kw,pv_kw`;
//! - a prices CSV with header `t,price_mg,price_grid_buy,price_grid_sell`.
//!
//! Floats are written with the shortest representation that parses back to
//! the same `f64`, so `write_scenario` ∘ `load_scenario` is bit-exact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DomainError, MicrogridParams, Scenario};

pub const MANIFEST_FILE: &str = "scenario.toml";
pub const PRICES_FILE: &str = "prices.csv";
const MG_HEADER: [&str; 4] = ["t", "load_kw", "wt_kw", "pv_kw"];
const PRICE_HEADER: [&str; 4] = ["t", "price_mg", "price_grid_buy", "price_grid_sell"];

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    n_mg: usize,
    horizon_t: usize,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_prices")]
    prices: String,
    microgrid: Vec<MicrogridBlock>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MicrogridBlock {
    series: String,
    #[serde(flatten)]
    params: MicrogridParams,
}

fn default_dt() -> f64 {
    1.0
}

fn default_prices() -> String {
    PRICES_FILE.to_string()
}

fn mg_file(mg: usize) -> String {
    format!("mg_{}.csv", mg + 1)
}

/// Directory of the two-microgrid reference scenario shipped with the crate:
/// `generate_synthetic(7, 2, 24)`, one deficit and one surplus microgrid.
pub fn reference_scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("reference_2mg")
}

pub fn reference_scenario() -> Result<Scenario, DomainError> {
    load_scenario(reference_scenario_dir())
}

/// Loads and validates a scenario bundle. `path` may name the bundle
/// directory or its manifest file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, DomainError> {
    let path = path.as_ref();
    let (dir, manifest_path) = if path.is_dir() {
        (path.to_path_buf(), path.join(MANIFEST_FILE))
    } else {
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (dir, path.to_path_buf())
    };
    let text = read(&manifest_path)?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| DomainError::Manifest {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;
    if manifest.microgrid.len() != manifest.n_mg {
        return Err(DomainError::Manifest {
            path: manifest_path,
            message: format!(
                "n_mg = {} but {} [[microgrid]] blocks",
                manifest.n_mg,
                manifest.microgrid.len()
            ),
        });
    }

    let t_len = manifest.horizon_t;
    let mut load = Vec::with_capacity(manifest.n_mg);
    let mut p_wt = Vec::with_capacity(manifest.n_mg);
    let mut p_pv = Vec::with_capacity(manifest.n_mg);
    let mut params = Vec::with_capacity(manifest.n_mg);
    for (mg, block) in manifest.microgrid.iter().enumerate() {
        block.params.validate(mg)?;
        let cols = read_table(&dir.join(&block.series), &MG_HEADER, t_len)?;
        let [l, w, p] = cols;
        load.push(l);
        p_wt.push(w);
        p_pv.push(p);
        params.push(block.params);
    }
    let [price_mg, price_grid_buy, price_grid_sell] =
        read_table(&dir.join(&manifest.prices), &PRICE_HEADER, t_len)?;

    let scenario = Scenario {
        n_mg: manifest.n_mg,
        horizon_t: t_len,
        dt: manifest.dt,
        load,
        p_wt,
        p_pv,
        price_mg,
        price_grid_buy,
        price_grid_sell,
        params,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Writes `scenario` as a bundle into directory `dir` (created if missing).
pub fn write_scenario(scenario: &Scenario, dir: impl AsRef<Path>) -> Result<(), DomainError> {
    scenario.validate()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| DomainError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let manifest = Manifest {
        n_mg: scenario.n_mg,
        horizon_t: scenario.horizon_t,
        dt: scenario.dt,
        prices: PRICES_FILE.to_string(),
        microgrid: scenario
            .params
            .iter()
            .enumerate()
            .map(|(mg, p)| MicrogridBlock {
                series: mg_file(mg),
                params: *p,
            })
            .collect(),
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = toml::to_string(&manifest).map_err(|e| DomainError::Manifest {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;
    write(&manifest_path, text.as_bytes())?;

    for mg in 0..scenario.n_mg {
        let cols = [&scenario.load[mg], &scenario.p_wt[mg], &scenario.p_pv[mg]];
        write_table(&dir.join(mg_file(mg)), &MG_HEADER, &cols)?;
    }
    let cols = [
        &scenario.price_mg,
        &scenario.price_grid_buy,
        &scenario.price_grid_sell,
    ];
    write_table(&dir.join(PRICES_FILE), &PRICE_HEADER, &cols)
}

fn read(path: &Path) -> Result<String, DomainError> {
    fs::read_to_string(path).map_err(|source| DomainError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), DomainError> {
    fs::write(path, bytes).map_err(|source| DomainError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a `t,<a>,<b>,<c>` table into three columns of exactly `rows` values.
fn read_table(path: &Path, header: &[&str; 4], rows: usize) -> Result<[Vec<f64>; 3], DomainError> {
    let text = read(path)?;
    let file = PathBuf::from(path);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| DomainError::Field {
            file: file.clone(),
            row: 0,
            field: "header".into(),
            message: e.to_string(),
        })?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(DomainError::Header {
            file,
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut cols: [Vec<f64>; 3] = Default::default();
    let mut count = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DomainError::Field {
            file: file.clone(),
            row,
            field: "record".into(),
            message: e.to_string(),
        })?;
        count += 1;
        if row >= rows {
            continue;
        }
        let field_err = |field: &str, message: String| DomainError::Field {
            file: file.clone(),
            row,
            field: field.to_string(),
            message,
        };
        let t: usize = record[0]
            .parse()
            .map_err(|e| field_err("t", format!("`{}`: {e}", &record[0])))?;
        if t != row {
            return Err(field_err("t", format!("expected step {row}, found {t}")));
        }
        for (k, col) in cols.iter_mut().enumerate() {
            let name = header[k + 1];
            let raw = &record[k + 1];
            let v: f64 = raw
                .parse()
                .map_err(|e| field_err(name, format!("`{raw}`: {e}")))?;
            if !v.is_finite() {
                return Err(field_err(name, format!("{v} is not finite")));
            }
            if v < 0.0 {
                return Err(field_err(name, format!("negative value {v}")));
            }
            col.push(v);
        }
    }
    if count != rows {
        return Err(DomainError::LengthMismatch {
            file,
            expected: rows,
            found: count,
        });
    }
    Ok(cols)
}

fn write_table(path: &Path, header: &[&str; 4], cols: &[&Vec<f64>; 3]) -> Result<(), DomainError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for t in 0..cols[0].len() {
        out.push_str(&format!("{t},{},{},{}\n", cols[0][t], cols[1][t], cols[2][t]));
    }
    write(path, out.as_bytes())
}
