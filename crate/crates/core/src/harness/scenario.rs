use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockDensityMatrix;
use crate::grid::GridSpec;
use crate::kernel::{ComplexPoint, GaussianPhaseFunction, OrderingVector};
use crate::propagator::{BathParams, DriveSpec};

/// How rates and times in a scenario file are expressed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// Rates (`kappa`, drive amplitude and frequency) in multiples of `Omega`, times in `1/Omega`.
    #[default]
    Omega,
    /// Everything as written.
    Absolute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Coherent { alpha0: ComplexPoint },
    Thermal { nbar0: f64 },
    /// Wigner function `g_s(α − μ0)`.
    Gaussian { ordering: OrderingVector, mean: ComplexPoint },
    Fock { k: usize },
}

impl InitialState {
    /// Wigner function when it belongs to the Gaussian class.
    pub fn gaussian(&self) -> Result<Option<GaussianPhaseFunction>> {
        Ok(match self {
            InitialState::Coherent { alpha0 } => Some(GaussianPhaseFunction::coherent(*alpha0)),
            InitialState::Thermal { nbar0 } => Some(GaussianPhaseFunction::thermal(*nbar0)),
            InitialState::Gaussian { ordering, mean } => Some(GaussianPhaseFunction::new(*mean, *ordering, 1.0, 1.0)?),
            InitialState::Fock { .. } => None,
        })
    }

    pub fn density_matrix(&self, n: usize) -> Result<FockDensityMatrix> {
        match self {
            InitialState::Coherent { alpha0 } => FockDensityMatrix::coherent(*alpha0, n),
            InitialState::Thermal { nbar0 } => FockDensityMatrix::thermal(*nbar0, n),
            InitialState::Gaussian { .. } => FockDensityMatrix::gaussian(&self.gaussian()?.expect("gaussian initial state"), n),
            InitialState::Fock { k } => FockDensityMatrix::fock(*k, n),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            InitialState::Thermal { nbar0 } if !(*nbar0 >= 0.0) => {
                Err(Error::InvalidParameter(format!("thermal nbar0 must be nonnegative, got {nbar0}")))
            }
            InitialState::Gaussian { ordering, .. } if !ordering.is_decaying() => Err(Error::InvalidParameter(
                "gaussian initial ordering must define a decaying kernel".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Square output grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub half_extent: f64,
    #[serde(default)]
    pub center: ComplexPoint,
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec::square_at(self.n, self.half_extent, self.center)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    #[serde(rename = "N")]
    pub levels: usize,
    pub dt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub linf: f64,
    /// Not checked when absent.
    #[serde(default)]
    pub l2: Option<f64>,
    pub moment: f64,
    pub trace: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub units: Units,
    pub bath: BathParams,
    #[serde(default)]
    pub drive: DriveSpec,
    pub initial: InitialState,
    pub times: Vec<f64>,
    pub grid: GridConfig,
    pub oracle: OracleConfig,
    pub tolerances: Tolerances,
}

fn default_name() -> String {
    "scenario".into()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut s = Self::from_json(&std::fs::read_to_string(path)?)?;
        if s.name == default_name() {
            if let Some(stem) = path.file_stem() {
                s.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.bath.validate()?;
        self.drive.validate()?;
        self.initial.validate()?;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::InvalidParameter(format!("scenario name {:?} is not a plain file name", self.name)));
        }
        if self.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter("times must be finite and nonnegative".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("times must be strictly ascending".into()));
        }
        let g = &self.grid;
        if g.n < 4 || !(g.half_extent > 0.0 && g.half_extent.is_finite()) {
            return Err(Error::InvalidParameter("grid needs n >= 4 and a positive half_extent".into()));
        }
        if self.oracle.levels < 2 || !(self.oracle.dt > 0.0 && self.oracle.dt.is_finite()) {
            return Err(Error::InvalidParameter("oracle needs N >= 2 and dt > 0".into()));
        }
        if let InitialState::Fock { k } = self.initial {
            if k >= self.oracle.levels {
                return Err(Error::InvalidParameter(format!("fock level {k} outside oracle cutoff {}", self.oracle.levels)));
            }
        }
        let t = &self.tolerances;
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !(ok(t.linf) && ok(t.moment) && ok(t.trace) && t.l2.is_none_or(ok)) {
            return Err(Error::InvalidParameter("tolerances must be finite and nonnegative".into()));
        }
        if self.units == Units::Omega && self.bath.omega == 0.0 {
            return Err(Error::InvalidParameter("units \"omega\" need a nonzero Omega".into()));
        }
        Ok(())
    }

    /// Copy with every rate and time in absolute units.
    pub fn absolute(&self) -> Scenario {
        if self.units == Units::Absolute {
            return self.clone();
        }
        let w = self.bath.omega;
        let mut s = self.clone();
        s.units = Units::Absolute;
        s.bath.kappa *= w;
        s.drive = match &self.drive {
            DriveSpec::None => DriveSpec::None,
            DriveSpec::Constant { f0 } => DriveSpec::Constant { f0: f0 * w },
            DriveSpec::Cosine { f0, omega, phase } => DriveSpec::Cosine { f0: f0 * w, omega: omega * w, phase: *phase },
            DriveSpec::Tabulated { samples } => {
                DriveSpec::Tabulated { samples: samples.iter().map(|(t, f)| (t / w, f * w)).collect() }
            }
        };
        s.times = self.times.iter().map(|t| t / w).collect();
        s.oracle.dt /= w;
        s
    }
}

/// The benchmark scenario of the end-to-end comparison.
pub fn benchmark() -> Scenario {
    Scenario {
        name: "benchmark".into(),
        units: Units::Omega,
        bath: BathParams { kappa: 0.1, nbar: 0.5, m: Complex64::new(0.4, 0.0), omega: 1.0 },
        drive: DriveSpec::Cosine { f0: 0.2, omega: 1.0, phase: 0.0 },
        initial: InitialState::Coherent { alpha0: Complex64::new(1.0, 0.5) },
        times: vec![0.5, 1.0, 2.0],
        grid: GridConfig { n: 128, half_extent: 4.5, center: Complex64::new(0.0, 0.0) },
        oracle: OracleConfig { levels: 50, dt: 1e-3 },
        tolerances: Tolerances { linf: 2e-3, l2: Some(1e-3), moment: 1e-3, trace: 1e-6 },
    }
}
