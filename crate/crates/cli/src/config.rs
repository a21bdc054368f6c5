//! The run configuration: one JSON document, every field defaulted.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mkdv_nzbc::jost::JostOptions;
use mkdv_nzbc::{BoundaryData, Error, PdeOptions, PotentialProfile, ProfileSpec, Regime, Result, RhpOptions, ScatteringOptions};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Default for XGrid {
    fn default() -> Self {
        Self { start: -20.0, end: 20.0, points: 41 }
    }
}

impl XGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub root_tol: f64,
    pub rho_floor: f64,
    /// det S, one-sided relations and cut symmetry in `validate`.
    pub invariant: f64,
    /// Max-norm error allowed by `roundtrip` at t = 0.
    pub roundtrip: f64,
    /// Max-norm disagreement allowed against the PDE reference.
    pub pde_agreement: f64,
    /// Eigenvalue drift allowed by the isospectrality check.
    pub isospectral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_rtol: 1e-10,
            ode_atol: 1e-10,
            root_tol: 1e-10,
            rho_floor: 1e-12,
            invariant: 1e-8,
            roundtrip: 1e-3,
            pde_agreement: 1e-3,
            isospectral: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeConfig {
    pub x_lo: f64,
    pub x_hi: f64,
    pub points: usize,
    pub dt_factor: f64,
    pub drift_tol: f64,
}

impl Default for PdeConfig {
    fn default() -> Self {
        let o = PdeOptions::default();
        Self { x_lo: -30.0, x_hi: 30.0, points: 1201, dt_factor: o.dt_factor, drift_tol: o.drift_tol }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub regime: Regime,
    pub q_minus: f64,
    pub q_plus: f64,
    pub profile: ProfileSpec,
    /// Largest allowed |q − q±| where the profile is cut off.
    pub tau_tail: f64,
    pub x_grid: XGrid,
    pub t: Vec<f64>,
    /// Gauss nodes per contour segment.
    pub nodes: usize,
    pub tolerances: Tolerances,
    pub rhp: RhpOptions,
    /// Richardson radii for the large-k check, in units of q−.
    pub richardson_radii: Vec<f64>,
    /// Scattering data file read by evolve, reconstruct and validate.
    pub scattering_data: Option<String>,
    /// Compare reconstructions at t > 0 against the finite-difference solver.
    pub pde_check: bool,
    pub pde: PdeConfig,
    pub out: String,
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            regime: Regime::Focusing,
            q_minus: 2.0,
            q_plus: 1.0,
            profile: ProfileSpec::TanhStep { width: 1.0, center: 0.0, bump: None },
            tau_tail: 1e-10,
            x_grid: XGrid::default(),
            t: vec![0.0],
            nodes: 24,
            tolerances: Tolerances::default(),
            rhp: RhpOptions::default(),
            richardson_radii: vec![1e2, 1e3, 1e4],
            scattering_data: None,
            pde_check: false,
            pde: PdeConfig::default(),
            out: "out".into(),
            verbose: false,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let symmetric_profile = matches!(self.profile, ProfileSpec::Constant);
        if symmetric_profile {
            BoundaryData::symmetric(self.q_plus, self.regime)?;
            if self.q_minus != self.q_plus {
                return Err(Error::Config("a constant profile needs q_minus = q_plus".into()));
            }
        } else {
            BoundaryData::new(self.q_minus, self.q_plus, self.regime)?;
        }
        let t = &self.tolerances;
        for (n, v) in [
            ("tolerances.ode_rtol", t.ode_rtol),
            ("tolerances.ode_atol", t.ode_atol),
            ("tolerances.root_tol", t.root_tol),
            ("tolerances.rho_floor", t.rho_floor),
            ("tolerances.invariant", t.invariant),
            ("tolerances.roundtrip", t.roundtrip),
            ("tolerances.pde_agreement", t.pde_agreement),
            ("tolerances.isospectral", t.isospectral),
            ("tau_tail", self.tau_tail),
            ("rhp.residual_tol", self.rhp.residual_tol),
            ("rhp.limit_tol", self.rhp.limit_tol),
            ("rhp.phase_per_panel", self.rhp.phase_per_panel),
            ("pde.dt_factor", self.pde.dt_factor),
            ("pde.drift_tol", self.pde.drift_tol),
        ] {
            positive(n, v)?;
        }
        if self.t.windows(2).any(|w| !(w[0] <= w[1])) || self.t.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("t list must be finite and sorted, got {:?}", self.t)));
        }
        if self.x_grid.points > 1 && !(self.x_grid.end > self.x_grid.start) {
            return Err(Error::Config("x_grid.end must exceed x_grid.start".into()));
        }
        if self.nodes < 8 {
            return Err(Error::Config(format!("nodes must be at least 8, got {}", self.nodes)));
        }
        if !(self.pde.x_hi > self.pde.x_lo) {
            return Err(Error::Config("pde.x_hi must exceed pde.x_lo".into()));
        }
        Ok(())
    }

    pub fn boundary(&self) -> Result<BoundaryData> {
        if self.q_minus == self.q_plus {
            BoundaryData::symmetric(self.q_plus, self.regime)
        } else {
            BoundaryData::new(self.q_minus, self.q_plus, self.regime)
        }
    }

    pub fn profile(&self) -> Result<PotentialProfile> {
        PotentialProfile::from_spec(&self.profile, self.boundary()?, self.tau_tail)
    }

    pub fn scattering_options(&self, bd: &BoundaryData) -> ScatteringOptions {
        let mut o = ScatteringOptions::for_boundary(bd);
        let mut j = JostOptions::for_boundary(bd);
        j.ode.rtol = self.tolerances.ode_rtol;
        j.ode.atol = self.tolerances.ode_atol;
        o.jost = j;
        o.root_tol = self.tolerances.root_tol;
        o.rho_floor = self.tolerances.rho_floor;
        o
    }

    pub fn pde_options(&self) -> PdeOptions {
        PdeOptions { dt_factor: self.pde.dt_factor, drift_tol: self.pde.drift_tol }
    }

    /// SHA-256 of the canonical JSON form, hex encoded. The output directory
    /// and verbosity do not change results and are left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out.clear();
        c.verbose = false;
        let json = serde_json::to_string(&c).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}
