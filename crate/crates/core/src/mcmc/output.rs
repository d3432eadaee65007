use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ModelState, SamplerConfig};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub config: SamplerConfig,
    pub seed: u64,
    pub stream: u64,
    pub n: usize,
    pub m: usize,
    pub h: usize,
    /// Post burn-in acceptance rates; absent when the parameter is not sampled.
    pub acceptance_alpha: Option<f64>,
    pub acceptance_nu0: Option<f64>,
    /// Random-walk scales after adaptation.
    pub alpha_step: f64,
    pub nu0_step: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadingsDraw {
    pub iteration: usize,
    pub beta: DMatrix<f64>,
    pub sigma2: DVector<f64>,
}

/// Post burn-in record of one chain; one entry per kept sweep.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChainOutput {
    pub meta: ChainMeta,
    /// 1-based sweep index including burn-in.
    pub iteration: Vec<usize>,
    pub hstar: Vec<usize>,
    pub s: Vec<Vec<bool>>,
    pub tau: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub nu0: Vec<f64>,
    pub kappa: Vec<f64>,
    pub logdet_omega: Vec<f64>,
    pub frob_omega_inv: Vec<f64>,
    /// Thinned loadings and variances.
    pub loadings: Vec<LoadingsDraw>,
}

impl ChainOutput {
    pub(super) fn with_capacity(h: usize, m: usize, kept: usize) -> Self {
        ChainOutput {
            meta: ChainMeta {
                h,
                m,
                ..Default::default()
            },
            iteration: Vec::with_capacity(kept),
            hstar: Vec::with_capacity(kept),
            s: Vec::with_capacity(kept),
            tau: Vec::with_capacity(kept),
            theta: Vec::with_capacity(kept),
            alpha: Vec::with_capacity(kept),
            nu0: Vec::with_capacity(kept),
            kappa: Vec::with_capacity(kept),
            logdet_omega: Vec::with_capacity(kept),
            frob_omega_inv: Vec::with_capacity(kept),
            loadings: Vec::new(),
        }
    }

    pub(super) fn push(&mut self, iteration: usize, st: &ModelState, logdet: f64, frob: f64, keep_loadings: bool) {
        self.iteration.push(iteration);
        self.hstar.push(st.hstar());
        self.s.push(st.s.clone());
        self.tau.push(st.tau.clone());
        self.theta.push(st.theta.iter().copied().collect());
        self.alpha.push(st.alpha);
        self.nu0.push(st.nu0);
        self.kappa.push(st.kappa);
        self.logdet_omega.push(logdet);
        self.frob_omega_inv.push(frob);
        if keep_loadings {
            self.loadings.push(LoadingsDraw {
                iteration,
                beta: st.beta.clone(),
                sigma2: st.sigma2.clone(),
            });
        }
    }

    pub fn len(&self) -> usize {
        self.hstar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hstar.is_empty()
    }

    pub fn h(&self) -> usize {
        self.meta.h
    }
}

pub const DRAWS_FILE: &str = "draws.csv";
const DRAWS_HEADER: [&str; 7] = [
    "iteration",
    "hstar",
    "alpha",
    "nu0",
    "kappa",
    "logdet_omega",
    "frob_omega_inv",
];

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn column_header(prefix: &str, h: usize) -> Vec<String> {
    std::iter::once("iteration".to_string())
        .chain((1..=h).map(|j| format!("{prefix}{j}")))
        .collect()
}

fn write_rows<I, R>(path: &Path, header: Vec<String>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Write a chain directory: `draws.csv`, `S.csv`, `tau.csv`, `theta.csv`,
/// `meta.json`, and when loadings were kept `beta.csv` (row-major `m x H`
/// per line) and `sigma2.csv`.
pub fn write_chain(dir: &Path, out: &ChainOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let h = out.h();
    let n = out.len();
    write_rows(
        &dir.join(DRAWS_FILE),
        DRAWS_HEADER.iter().map(|s| s.to_string()).collect(),
        (0..n).map(|k| {
            vec![
                out.iteration[k].to_string(),
                out.hstar[k].to_string(),
                fmt(out.alpha[k]),
                fmt(out.nu0[k]),
                fmt(out.kappa[k]),
                fmt(out.logdet_omega[k]),
                fmt(out.frob_omega_inv[k]),
            ]
        }),
    )?;
    let with_iter = |k: usize, vals: Vec<String>| std::iter::once(out.iteration[k].to_string()).chain(vals);
    write_rows(
        &dir.join("S.csv"),
        column_header("s", h),
        (0..n).map(|k| with_iter(k, out.s[k].iter().map(|&b| u8::from(b).to_string()).collect())),
    )?;
    write_rows(
        &dir.join("tau.csv"),
        column_header("tau", h),
        (0..n).map(|k| with_iter(k, out.tau[k].iter().copied().map(fmt).collect())),
    )?;
    write_rows(
        &dir.join("theta.csv"),
        column_header("theta", h),
        (0..n).map(|k| with_iter(k, out.theta[k].iter().copied().map(fmt).collect())),
    )?;
    if !out.loadings.is_empty() {
        let m = out.meta.m;
        let beta_header = std::iter::once("iteration".to_string())
            .chain((1..=m).flat_map(|i| (1..=h).map(move |j| format!("b{i}_{j}"))))
            .collect();
        write_rows(
            &dir.join("beta.csv"),
            beta_header,
            out.loadings.iter().map(|d| {
                std::iter::once(d.iteration.to_string())
                    .chain(d.beta.transpose().iter().copied().map(fmt))
                    .collect::<Vec<_>>()
            }),
        )?;
        write_rows(
            &dir.join("sigma2.csv"),
            column_header("sigma2_", m),
            out.loadings.iter().map(|d| {
                std::iter::once(d.iteration.to_string())
                    .chain(d.sigma2.iter().copied().map(fmt))
                    .collect::<Vec<_>>()
            }),
        )?;
    }
    let path = dir.join("meta.json");
    fs::write(&path, serde_json::to_string_pretty(&out.meta)?).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

fn read_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "chain file missing"),
        ));
    }
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn parse<T: std::str::FromStr>(path: &Path, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parameter(format!("{}: cannot parse {s:?}", path.display())))
}

fn read_matrix_rows(path: &Path, width: usize) -> Result<Vec<(usize, Vec<f64>)>> {
    read_rows(path)?
        .into_iter()
        .map(|r| {
            if r.len() != width + 1 {
                return Err(Error::Dimension(format!(
                    "{}: expected {} columns, found {}",
                    path.display(),
                    width + 1,
                    r.len()
                )));
            }
            let it = parse(path, &r[0])?;
            let vals = r[1..].iter().map(|s| parse(path, s)).collect::<Result<Vec<f64>>>()?;
            Ok((it, vals))
        })
        .collect()
}

/// Read a chain directory written by [`write_chain`].
pub fn read_chain(dir: &Path) -> Result<ChainOutput> {
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: ChainMeta = serde_json::from_str(&text)?;
    let h = meta.h;
    let mut out = ChainOutput::with_capacity(h, meta.m, 0);
    out.meta = meta;
    let draws_path = dir.join(DRAWS_FILE);
    for r in read_rows(&draws_path)? {
        if r.len() != DRAWS_HEADER.len() {
            return Err(Error::Dimension(format!("{}: malformed row", draws_path.display())));
        }
        out.iteration.push(parse(&draws_path, &r[0])?);
        out.hstar.push(parse(&draws_path, &r[1])?);
        out.alpha.push(parse(&draws_path, &r[2])?);
        out.nu0.push(parse(&draws_path, &r[3])?);
        out.kappa.push(parse(&draws_path, &r[4])?);
        out.logdet_omega.push(parse(&draws_path, &r[5])?);
        out.frob_omega_inv.push(parse(&draws_path, &r[6])?);
    }
    let n = out.len();
    let load = |name: &str| -> Result<Vec<Vec<f64>>> {
        let path = dir.join(name);
        let rows = read_matrix_rows(&path, h)?;
        if rows.len() != n {
            return Err(Error::Dimension(format!("{}: {} rows for {n} draws", path.display(), rows.len())));
        }
        Ok(rows.into_iter().map(|(_, v)| v).collect())
    };
    out.s = load("S.csv")?
        .into_iter()
        .map(|r| r.into_iter().map(|v| v != 0.0).collect())
        .collect();
    out.tau = load("tau.csv")?;
    out.theta = load("theta.csv")?;
    let beta_path = dir.join("beta.csv");
    if beta_path.exists() {
        let m = out.meta.m;
        let betas = read_matrix_rows(&beta_path, m * h)?;
        let sigmas = read_matrix_rows(&dir.join("sigma2.csv"), m)?;
        if betas.len() != sigmas.len() {
            return Err(Error::Dimension("beta.csv and sigma2.csv disagree".into()));
        }
        out.loadings = betas
            .into_iter()
            .zip(sigmas)
            .map(|((it, b), (_, s))| LoadingsDraw {
                iteration: it,
                beta: DMatrix::from_row_slice(m, h, &b),
                sigma2: DVector::from_vec(s),
            })
            .collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Rng;
    use crate::factor::{simulate_dataset, ScenarioSpec};
    use crate::mcmc::run_chain;

    #[test]
    fn directory_roundtrip() {
        let mut rng = Rng::new(81, 0);
        let data = simulate_dataset(&mut rng, &ScenarioSpec::dense(10, 2, 30)).unwrap();
        let config = SamplerConfig {
            iterations: 120,
            burn_in: 20,
            ..Default::default()
        };
        let out = run_chain(&mut rng, &data, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_chain(dir.path(), &out).unwrap();
        let back = read_chain(dir.path()).unwrap();
        assert_eq!(back, out);
    }

    #[test]
    fn missing_directory_is_io() {
        let err = read_chain(Path::new("/definitely/not/here")).unwrap_err();
        assert!(err.is_io());
    }
}
