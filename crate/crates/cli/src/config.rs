//! Run configuration: a TOML document with `[triple]`, `[metric]`, `[run]`
//! and `[output]` tables. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use bundlecurv::metric::MetricSpec;
use bundlecurv::{catalog, BundleTriple, LieAlgebra};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub triple: TripleConfig,
    #[serde(default)]
    pub metric: MetricConfig,
    #[serde(default)]
    pub run: RunParams,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either a catalog name, a block embedding `SO(k_block) ⊂ SO(h_block) ⊂
/// SO(n)`, or explicit spanning sets given as 1-based index pairs `[i, j]`
/// of basis vectors `E_ij`.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TripleConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_block: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_block: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_basis: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_basis: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    #[default]
    Identity,
    PhiT,
    Diagonal,
    RandomSpd,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    #[serde(default)]
    pub kind: MetricKind,
    /// Deformation parameter for `phi_t`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Eigenvalues of `Φ` in the `E_ij` basis, for `diagonal`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    /// Seed for `random_spd`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Eigenvalue range `[lo, hi]` for `random_spd`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    /// Diagonal of the fiber operator `φ` on the orthonormal basis of 𝔪.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunParams {
    pub seed: u64,
    /// Random planes for `scan`.
    pub samples: usize,
    /// Base points and planes per base point for `sweep`.
    pub base_points: usize,
    pub planes_per_point: usize,
    pub eps: Vec<f64>,
    /// Prepend the `eps = 0` run on the witness itself to `certify`.
    pub exact: bool,
    pub t_grid: Vec<f64>,
    pub histogram_bins: usize,
    /// Add each `Φ_t` certificate plane to the sweep floor.
    pub inject_certificate: bool,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 1000,
            base_points: 200,
            planes_per_point: 50,
            eps: vec![0.1, 0.05, 0.025, 0.0125],
            exact: false,
            t_grid: vec![0.0, 0.25, 0.5, 0.75],
            histogram_bins: 20,
            inject_certificate: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Builds the bundle triple described by `[triple]`.
    pub fn build_triple(&self) -> Result<BundleTriple, CliError> {
        let t = &self.triple;
        let field = |name: &str, msg: String| CliError::Config(format!("triple.{name}: {msg}"));
        match (&t.catalog, t.n) {
            (Some(name), None) => {
                if t.k_block.is_some() || t.h_block.is_some() || t.k_basis.is_some() || t.h_basis.is_some() {
                    return Err(field("catalog", "cannot be combined with n/k_block/h_block/k_basis/h_basis".into()));
                }
                Ok(catalog::by_name(name)?)
            }
            (None, Some(n)) => match (t.k_block, t.h_block, &t.k_basis, &t.h_basis) {
                (Some(kb), Some(hb), None, None) => Ok(catalog::block_triple(n, kb, hb)?),
                (None, None, k, Some(h)) => {
                    let alg = LieAlgebra::so(n)?;
                    let k = pairs(&alg, k.as_deref().unwrap_or(&[]), "k_basis")?;
                    let h = pairs(&alg, h, "h_basis")?;
                    Ok(BundleTriple::new(alg, &k, &h)?)
                }
                _ => Err(field("n", "needs either k_block and h_block, or h_basis (with optional k_basis)".into())),
            },
            (Some(_), Some(_)) => Err(field("catalog", "give either catalog or n, not both".into())),
            (None, None) => Err(field("catalog", "missing: give a catalog name or n".into())),
        }
    }

    /// Builds `(Φ, φ)` for `triple` from `[metric]`.
    pub fn build_metric(&self, triple: &BundleTriple) -> Result<MetricSpec, CliError> {
        let m = &self.metric;
        let dim = triple.algebra().dim();
        let field = |name: &str, msg: String| CliError::Config(format!("metric.{name}: {msg}"));
        let unused = |names: &[(&str, bool)]| -> Result<(), CliError> {
            match names.iter().find(|(_, set)| *set) {
                Some((name, _)) => Err(field(name, format!("not used by kind {:?}", m.kind))),
                None => Ok(()),
            }
        };
        let (t, ev, seed, range) = (m.t.is_some(), m.eigenvalues.is_some(), m.seed.is_some(), m.range.is_some());
        let base = match m.kind {
            MetricKind::Identity => {
                unused(&[("t", t), ("eigenvalues", ev), ("seed", seed), ("range", range)])?;
                MetricSpec::identity(dim)
            }
            MetricKind::PhiT => {
                unused(&[("eigenvalues", ev), ("seed", seed), ("range", range)])?;
                let t = m.t.ok_or_else(|| field("t", "required for phi_t".into()))?;
                MetricSpec::phi_t(triple, t)?
            }
            MetricKind::Diagonal => {
                unused(&[("t", t), ("seed", seed), ("range", range)])?;
                let ev = m.eigenvalues.as_ref().ok_or_else(|| field("eigenvalues", "required for diagonal".into()))?;
                if ev.len() != dim {
                    return Err(field("eigenvalues", format!("expected {dim} values, found {}", ev.len())));
                }
                MetricSpec::diagonal(ev)?
            }
            MetricKind::RandomSpd => {
                unused(&[("t", t), ("eigenvalues", ev)])?;
                let [lo, hi] = m.range.unwrap_or([0.5, 2.0]);
                let mut rng = ChaCha8Rng::seed_from_u64(m.seed.unwrap_or(0));
                MetricSpec::random_spd(dim, lo, hi, &mut rng)?
            }
        };
        match &m.fiber {
            None => Ok(base),
            Some(diag) => {
                let md = triple.m().dim();
                if diag.len() != md {
                    return Err(field("fiber", format!("expected {md} values (dim 𝔪), found {}", diag.len())));
                }
                let phi = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag));
                Ok(base.with_fiber(triple, phi)?)
            }
        }
    }

    /// The resolved config without the output path, which does not affect
    /// results; embedded in every report.
    pub fn provenance_value(&self) -> serde_json::Value {
        let mut c = self.clone();
        c.output.path = None;
        serde_json::to_value(&c).expect("config is serializable")
    }

    /// [`Self::provenance_value`] as a single-line JSON string.
    pub fn provenance(&self) -> String {
        self.provenance_value().to_string()
    }
}

fn pairs(alg: &LieAlgebra, list: &[[usize; 2]], name: &str) -> Result<Vec<bundlecurv::AlgebraElement>, CliError> {
    let n = alg.n();
    list.iter()
        .map(|&[i, j]| {
            if i == 0 || j == 0 || i > n || j > n || i == j {
                Err(CliError::Config(format!("triple.{name}: invalid index pair [{i}, {j}] for so({n})")))
            } else {
                Ok(alg.e(i, j))
            }
        })
        .collect()
}
