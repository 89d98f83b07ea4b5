//! Run configuration: a single JSON document, no environment variables.

use serde::Deserialize;
use std::path::{Path, PathBuf};

use hodgemax::SimplicialComplex;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_mesh")]
    pub mesh: MeshSpec,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub harmonic_tol: Option<f64>,
    #[serde(default = "default_sobolev_grid")]
    pub sobolev_grid: Vec<f64>,
    #[serde(default = "default_time")]
    pub time: TimeGrid,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MeshSpec {
    File { file: PathBuf },
    Generator(Generator),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase", deny_unknown_fields)]
pub enum Generator {
    Torus { nx: usize, ny: usize, lx: f64, ly: f64 },
    Icosphere { subdivisions: u32, radius: f64 },
    Circle { n: usize, length: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
}

fn default_mesh() -> MeshSpec {
    MeshSpec::Generator(Generator::Torus {
        nx: 4,
        ny: 4,
        lx: 1.0,
        ly: 1.0,
    })
}

fn default_mu() -> f64 {
    1.0
}

fn default_sobolev_grid() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}

fn default_time() -> TimeGrid {
    TimeGrid {
        t0: 0.0,
        t1: 10.0,
        samples: 41,
    }
}

fn default_trials() -> usize {
    200
}

fn default_seed() -> u64 {
    42
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: default_mesh(),
            mu: default_mu(),
            harmonic_tol: None,
            sobolev_grid: default_sobolev_grid(),
            time: default_time(),
            trials: default_trials(),
            seed: default_seed(),
            out: default_out(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.mu <= 0.0 {
            return Err(format!("mu must be positive, got {}", self.mu));
        }
        if let Some(tol) = self.harmonic_tol {
            if tol <= 0.0 {
                return Err(format!("harmonic_tol must be positive, got {tol}"));
            }
        }
        if self.time.samples < 3 {
            return Err("time.samples must be at least 3".into());
        }
        if self.time.t1 <= self.time.t0 {
            return Err("time.t1 must exceed time.t0".into());
        }
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        Ok(())
    }
}

impl MeshSpec {
    pub fn build(&self) -> hodgemax::Result<SimplicialComplex> {
        match self {
            MeshSpec::File { file } => SimplicialComplex::load(file),
            MeshSpec::Generator(g) => g.build(),
        }
    }
}

impl Generator {
    pub fn build(&self) -> hodgemax::Result<SimplicialComplex> {
        match *self {
            Generator::Torus { nx, ny, lx, ly } => SimplicialComplex::torus_lattice(nx, ny, lx, ly),
            Generator::Icosphere { subdivisions, radius } => {
                SimplicialComplex::icosphere(subdivisions, radius)
            }
            Generator::Circle { n, length } => SimplicialComplex::circle(n, length),
        }
    }
}

/// Parse a `--mesh` argument: either a mesh JSON path or a generator spec
/// `torus:nx,ny,lx,ly` | `icosphere:subdivisions,radius` | `circle:n,length`.
pub fn parse_mesh_arg(arg: &str) -> Result<MeshSpec, String> {
    if Path::new(arg).exists() {
        return Ok(MeshSpec::File { file: PathBuf::from(arg) });
    }
    let (kind, rest) = arg
        .split_once(':')
        .ok_or_else(|| format!("`{arg}` is neither a mesh file nor a generator spec"))?;
    let parts: Vec<&str> = rest.split(',').collect();
    let gen = match (kind, parts.as_slice()) {
        ("torus", [nx, ny, lx, ly]) => Generator::Torus {
            nx: nx.trim().parse().map_err(|e| format!("nx: {e}"))?,
            ny: ny.trim().parse().map_err(|e| format!("ny: {e}"))?,
            lx: lx.trim().parse().map_err(|e| format!("lx: {e}"))?,
            ly: ly.trim().parse().map_err(|e| format!("ly: {e}"))?,
        },
        ("icosphere", [s, r]) => Generator::Icosphere {
            subdivisions: s.trim().parse().map_err(|e| format!("subdivisions: {e}"))?,
            radius: r.trim().parse().map_err(|e| format!("radius: {e}"))?,
        },
        ("circle", [n, l]) => Generator::Circle {
            n: n.trim().parse().map_err(|e| format!("n: {e}"))?,
            length: l.trim().parse().map_err(|e| format!("length: {e}"))?,
        },
        _ => return Err(format!("unrecognized mesh spec `{arg}`")),
    };
    Ok(MeshSpec::Generator(gen))
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig, String> {
    let mut config = match path {
        None => RunConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("config parse error: {e}"))?
        }
    };
    config.validate()?;
    // canonicalize the sobolev grid so artifacts do not depend on input order
    config
        .sobolev_grid
        .sort_by(f64::total_cmp);
    config.sobolev_grid.dedup();
    Ok(config)
}
