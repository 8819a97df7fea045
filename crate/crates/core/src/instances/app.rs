use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qp::{Constraint, ProblemClass, QpBuilder, QuadraticProgram};

/// Antenna placement: choose `v` of the candidate sites so that covered
/// devices are many and doubly covered devices are few.
///
/// `coverage[i]` counts devices within `radius` of site `i`; `overlap` lists
/// `(i, j, count)` with `i < j` for devices covered by both, nonzero only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AppFile", into = "AppFile")]
pub struct AppInstance {
    sites: Vec<(f64, f64)>,
    devices: Vec<(f64, f64)>,
    radius: f64,
    v: usize,
    coverage: Vec<u32>,
    overlap: Vec<(usize, usize, u32)>,
}

#[derive(Serialize, Deserialize)]
struct AppFile {
    sites: Vec<(f64, f64)>,
    devices: Vec<(f64, f64)>,
    radius: f64,
    v: usize,
    coverage: Vec<u32>,
    overlap: Vec<(usize, usize, u32)>,
}

impl TryFrom<AppFile> for AppInstance {
    type Error = Error;

    fn try_from(f: AppFile) -> Result<Self> {
        let inst = AppInstance::from_geometry(f.sites, f.devices, f.radius, f.v)?;
        if inst.coverage != f.coverage || inst.overlap != f.overlap {
            return Err(Error::InvalidProblem(
                "coverage counts do not match the site and device coordinates".into(),
            ));
        }
        Ok(inst)
    }
}

impl From<AppInstance> for AppFile {
    fn from(a: AppInstance) -> Self {
        AppFile {
            sites: a.sites,
            devices: a.devices,
            radius: a.radius,
            v: a.v,
            coverage: a.coverage,
            overlap: a.overlap,
        }
    }
}

impl AppInstance {
    /// Derives coverage and overlap counts from coordinates (km).
    pub fn from_geometry(sites: Vec<(f64, f64)>, devices: Vec<(f64, f64)>, radius: f64, v: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        if v > sites.len() {
            return Err(Error::InvalidParameter(format!(
                "v = {v} exceeds the {} candidate sites",
                sites.len()
            )));
        }
        if sites.iter().chain(&devices).any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::InvalidParameter("coordinates must be finite".into()));
        }
        let r2 = radius * radius;
        let mut coverage = vec![0u32; sites.len()];
        let mut overlap: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        let mut covering = Vec::new();
        for d in &devices {
            covering.clear();
            for (i, s) in sites.iter().enumerate() {
                let (dx, dy) = (s.0 - d.0, s.1 - d.1);
                if dx * dx + dy * dy <= r2 {
                    covering.push(i);
                }
            }
            for (a, &i) in covering.iter().enumerate() {
                coverage[i] += 1;
                for &j in &covering[a + 1..] {
                    *overlap.entry((i, j)).or_default() += 1;
                }
            }
        }
        Ok(AppInstance {
            sites,
            devices,
            radius,
            v,
            coverage,
            overlap: overlap.into_iter().map(|((i, j), c)| (i, j, c)).collect(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[(f64, f64)] {
        &self.sites
    }

    pub fn devices(&self) -> &[(f64, f64)] {
        &self.devices
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn coverage(&self) -> &[u32] {
        &self.coverage
    }

    pub fn overlap(&self) -> &[(usize, usize, u32)] {
        &self.overlap
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Sites and devices uniform in a `box_km` square. `n_devices = None` uses
/// twenty devices per site.
pub fn generate_app(
    n_sites: usize,
    n_devices: Option<usize>,
    v: usize,
    radius: f64,
    box_km: f64,
    seed: u64,
) -> Result<AppInstance> {
    if !(box_km > 0.0 && box_km.is_finite()) {
        return Err(Error::InvalidParameter("box size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || (rng.random::<f64>() * box_km, rng.random::<f64>() * box_km);
    let sites: Vec<_> = (0..n_sites).map(|_| point()).collect();
    let devices: Vec<_> = (0..n_devices.unwrap_or(20 * n_sites)).map(|_| point()).collect();
    AppInstance::from_geometry(sites, devices, radius, v)
}

/// Shrinks the coverage radius as `1/sqrt(n)` relative to a base size.
pub fn scale_radius(radius_base: f64, n: usize, n_base: usize) -> f64 {
    radius_base * (n_base as f64 / n as f64).sqrt()
}

/// `H(x) = sum_{i<j} O_ij x_i x_j - 1/4 sum_i A_i x_i` subject to `sum x = v`.
pub fn app_to_qubo(inst: &AppInstance) -> QuadraticProgram {
    let n = inst.n_sites();
    let mut b = QpBuilder::new(n);
    for (i, &a) in inst.coverage.iter().enumerate() {
        b.add_linear(i, -f64::from(a) / 4.0);
    }
    for &(i, j, o) in &inst.overlap {
        b.add_quadratic(i, j, f64::from(o));
    }
    b.add_constraint(Constraint::cardinality_eq((0..n).collect(), inst.v));
    b.class(ProblemClass::AntennaPlacement);
    b.build().expect("derived counts form a valid program")
}
