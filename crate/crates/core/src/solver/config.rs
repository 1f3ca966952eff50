use std::fmt;
use std::str::FromStr;

use crate::linalg::PowerIteration;
use crate::{Error, Result};

/// The seven x-subproblem treatments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Classical ADMM, exact x-update.
    Opt,
    /// Semidefinite proximal term `ξI − βI − AᵀA`.
    Spro,
    /// Indefinite proximal term `ξI − AᵀA`.
    Ipro,
    /// Dense BFGS inverse metric.
    Bfgs,
    /// Limited-memory BFGS metric.
    Lbfgs,
    /// Damped, shifted BFGS on `B`.
    BfgsR,
    /// L-BFGS frozen after `k̄`.
    LbfgsR,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Opt,
        Variant::Spro,
        Variant::Ipro,
        Variant::Bfgs,
        Variant::Lbfgs,
        Variant::BfgsR,
        Variant::LbfgsR,
    ];

    /// Display name, e.g. `ADM-LBFGS-R`.
    pub fn label(self) -> &'static str {
        match self {
            Variant::Opt => "ADM-OPT",
            Variant::Spro => "ADM-SPRO",
            Variant::Ipro => "ADM-IPRO",
            Variant::Bfgs => "ADM-BFGS",
            Variant::Lbfgs => "ADM-LBFGS",
            Variant::BfgsR => "ADM-BFGS-R",
            Variant::LbfgsR => "ADM-LBFGS-R",
        }
    }

    /// Short name used on the command line and in config files.
    pub fn key(self) -> &'static str {
        match self {
            Variant::Opt => "opt",
            Variant::Spro => "spro",
            Variant::Ipro => "ipro",
            Variant::Bfgs => "bfgs",
            Variant::Lbfgs => "lbfgs",
            Variant::BfgsR => "bfgs-r",
            Variant::LbfgsR => "lbfgs-r",
        }
    }

    pub fn uses_metric(self) -> bool {
        matches!(self, Variant::Bfgs | Variant::Lbfgs | Variant::BfgsR | Variant::LbfgsR)
    }

    pub fn needs_eigenvalue(self) -> bool {
        self != Variant::Opt
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let norm = norm.strip_prefix("adm-").unwrap_or(&norm);
        Variant::ALL
            .into_iter()
            .find(|v| v.key() == norm)
            .ok_or_else(|| Error::config(format!("unknown variant '{s}'")))
    }
}

/// Upper end of the admissible multiplier steplength range, `(1 + √5)/2`.
pub const GOLDEN: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    pub beta: f64,
    /// Multiplier steplength.
    pub alpha: f64,
    /// SPRO scale factor on `λmax(βI + AᵀA)`.
    pub kappa1: f64,
    /// IPRO scale factor on `λmax(AᵀA)`.
    pub kappa2: f64,
    /// Quasi-Newton initial scale factor on `λmax(βI + AᵀA)`.
    pub kappa3: f64,
    /// L-BFGS memory.
    pub memory: usize,
    /// Last iteration at which the metric is updated; `None` means never frozen.
    pub k_bar: Option<usize>,
    /// Shift `δ` of the damped metric.
    pub delta: Option<f64>,
    /// Damping base of the damped metric, `c_k = ζ^k`.
    pub zeta: Option<f64>,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    pub power: PowerIteration,
}

impl SolverConfig {
    pub fn new(variant: Variant, beta: f64) -> Self {
        Self {
            variant,
            beta,
            alpha: 1.0,
            kappa1: 1.01,
            kappa2: 0.8,
            kappa3: 1.01,
            memory: 10,
            k_bar: None,
            delta: None,
            zeta: None,
            eps_abs: 1e-4,
            eps_rel: 1e-3,
            max_iter: 20_000,
            power: PowerIteration::default(),
        }
    }

    pub fn with_damping(mut self, delta: f64, zeta: f64) -> Self {
        self.delta = Some(delta);
        self.zeta = Some(zeta);
        self
    }

    pub fn with_k_bar(mut self, k_bar: usize) -> Self {
        self.k_bar = Some(k_bar);
        self
    }

    pub fn with_tolerances(mut self, eps_abs: f64, eps_rel: f64) -> Self {
        self.eps_abs = eps_abs;
        self.eps_rel = eps_rel;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    /// The κ that scales this variant's proximal term, if any.
    pub fn kappa(&self) -> Option<f64> {
        match self.variant {
            Variant::Opt => None,
            Variant::Spro => Some(self.kappa1),
            Variant::Ipro => Some(self.kappa2),
            _ => Some(self.kappa3),
        }
    }

    /// Sets the κ relevant to this variant; no-op for `Opt`.
    pub fn set_kappa(&mut self, kappa: f64) {
        match self.variant {
            Variant::Opt => {}
            Variant::Spro => self.kappa1 = kappa,
            Variant::Ipro => self.kappa2 = kappa,
            _ => self.kappa3 = kappa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::config(msg));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.alpha > 0.0 && self.alpha < GOLDEN) {
            return bad(format!("alpha must lie in (0, (1+√5)/2), got {}", self.alpha));
        }
        if !(self.eps_abs > 0.0 && self.eps_rel >= 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        match self.variant {
            Variant::Opt => {}
            Variant::Spro if !(self.kappa1 > 1.0) => return bad(format!("kappa1 must exceed 1, got {}", self.kappa1)),
            Variant::Ipro if !(self.kappa2 >= 0.75) => {
                return bad(format!("kappa2 must be at least 0.75, got {}", self.kappa2))
            }
            Variant::Bfgs | Variant::Lbfgs | Variant::BfgsR | Variant::LbfgsR if !(self.kappa3 >= 0.75) => {
                return bad(format!("kappa3 must be at least 0.75, got {}", self.kappa3))
            }
            _ => {}
        }
        if matches!(self.variant, Variant::Lbfgs | Variant::LbfgsR) && self.memory == 0 {
            return bad("L-BFGS memory must be at least 1".into());
        }
        if let Some(k) = self.k_bar {
            if k == 0 {
                return bad("k_bar must be at least 1".into());
            }
        }
        match self.variant {
            Variant::LbfgsR if self.k_bar.is_none() => return bad("ADM-LBFGS-R needs a finite k_bar".into()),
            Variant::BfgsR => {
                match self.delta {
                    Some(d) if d > 0.0 => {}
                    other => return bad(format!("ADM-BFGS-R needs delta > 0, got {other:?}")),
                }
                match self.zeta {
                    Some(z) if (0.0..1.0).contains(&z) => {}
                    other => return bad(format!("ADM-BFGS-R needs zeta in [0, 1), got {other:?}")),
                }
                if self.k_bar.is_some() {
                    return bad("ADM-BFGS-R never freezes; k_bar is not allowed".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}
