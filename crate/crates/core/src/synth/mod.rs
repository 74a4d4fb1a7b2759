//! Synthetic designs with known latent structure, population oracles and
//! identity checks.

mod appendix_d;
mod counterexample;
mod lemmas;
pub mod quad;
mod trimming;
mod typed;

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::boundary::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::resample::derive_seed;

pub use appendix_d::{gen_appendix_d, oracle_appendix_d, AppendixDSpec, OracleRow};
pub use counterexample::gen_counterexample_e;
pub use lemmas::{verify_lemma_moments, IdentityCheck, LemmaReport, OrderingCheck};
pub use trimming::{brute_force_trimming, MAX_ENUMERATION_ATOMS};
pub use typed::{gen_typed, TypeShares, TypedParams};

/// Per-unit latent variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Latent {
    pub x_star: f64,
    pub manipulated: bool,
    pub t_type: u8,
    /// Potential outcomes.
    pub y0: f64,
    pub y1: f64,
}

impl Latent {
    pub fn potential(&self, d: bool) -> f64 {
        if d {
            self.y1
        } else {
            self.y0
        }
    }
}

/// Observed data plus per-row latents.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedSample {
    data: Dataset,
    latents: Vec<Latent>,
}

impl TypedSample {
    pub fn new(data: Dataset, latents: Vec<Latent>) -> Result<Self> {
        if !latents.is_empty() && latents.len() != data.len() {
            return Err(Error::InvalidDataset(format!(
                "{} latent rows for {} observations",
                latents.len(),
                data.len()
            )));
        }
        Ok(TypedSample { data, latents })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn into_data(self) -> Dataset {
        self.data
    }

    pub fn latents(&self) -> &[Latent] {
        &self.latents
    }

    pub fn has_latents(&self) -> bool {
        !self.latents.is_empty()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn manipulation_fraction(&self) -> f64 {
        if self.latents.is_empty() {
            return 0.0;
        }
        self.latents.iter().filter(|l| l.manipulated).count() as f64 / self.latents.len() as f64
    }

    /// Share of units of each type 0–4.
    pub fn type_shares(&self) -> [f64; 5] {
        let mut counts = [0usize; 5];
        for l in &self.latents {
            counts[l.t_type as usize] += 1;
        }
        let n = self.latents.len().max(1) as f64;
        counts.map(|c| c as f64 / n)
    }

    /// Adds two covariates: `w_noise`, independent standard normal noise, and
    /// `w_xstar`, the latent unmanipulated running variable.
    pub fn with_covariates(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "covariates"));
        let mut names = self.data.covariate_names().to_vec();
        names.push("w_noise".into());
        names.push("w_xstar".into());
        let mut obs = self.data.observations().to_vec();
        for (o, l) in obs.iter_mut().zip(&self.latents) {
            o.covariates.push(StandardNormal.sample(&mut rng));
            o.covariates.push(l.x_star);
        }
        let range = self.data.outcome_range();
        let cutoff = self.data.cutoff();
        self.data = Dataset::new(obs, names, cutoff, range).expect("covariates keep data valid");
        self
    }

    /// Writes the CLI ingestion schema plus `x_star`, `manipulated`, `t_type`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let has_d = self.data.has_treatment();
        let mut header: Vec<String> = vec!["x".into(), "y".into()];
        if has_d {
            header.push("d".into());
        }
        header.extend(self.data.covariate_names().iter().cloned());
        if self.has_latents() {
            header.extend(["x_star", "manipulated", "t_type"].map(String::from));
        }
        w.write_record(&header).map_err(csv_err)?;
        for (i, o) in self.data.observations().iter().enumerate() {
            let mut rec: Vec<String> = vec![o.x.to_string(), o.y.to_string()];
            if has_d {
                rec.push(if o.d == Some(true) { "1" } else { "0" }.into());
            }
            rec.extend(o.covariates.iter().map(f64::to_string));
            if let Some(l) = self.latents.get(i) {
                rec.push(l.x_star.to_string());
                rec.push(if l.manipulated { "1" } else { "0" }.into());
                rec.push(l.t_type.to_string());
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Assembles a sharp design (`d = 1{x >= c}`) sample from latent draws.
pub(crate) fn assemble(
    rows: Vec<(f64, f64, Latent)>,
    cutoff: f64,
    range: Option<crate::boundary::OutcomeRange>,
) -> Result<TypedSample> {
    let mut obs = Vec::with_capacity(rows.len());
    let mut latents = Vec::with_capacity(rows.len());
    for (x, y, l) in rows {
        obs.push(Observation {
            x,
            y,
            d: Some(x >= cutoff),
            covariates: Vec::new(),
        });
        latents.push(l);
    }
    TypedSample::new(Dataset::new(obs, Vec::new(), cutoff, range)?, latents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_latent_columns() {
        let ts = gen_appendix_d(&AppendixDSpec {
            p: 0.3,
            lambda: 0.3,
            n: 20,
            seed: 1,
        })
        .unwrap()
        .with_covariates(1);
        let s = ts.to_csv_string().unwrap();
        let header = s.lines().next().unwrap();
        assert_eq!(header, "x,y,d,w_noise,w_xstar,x_star,manipulated,t_type");
        assert_eq!(s.lines().count(), 21);
    }

    #[test]
    fn shares_sum_to_one() {
        let ts = gen_appendix_d(&AppendixDSpec {
            p: 0.3,
            lambda: 0.3,
            n: 1000,
            seed: 2,
        })
        .unwrap();
        let s: f64 = ts.type_shares().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
