//! Run configuration: command-line flags layered over an optional TOML file.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use ckosc::dynamics::{Oscillator, PhaseState};
use ckosc::geometry::{CKParams, SpaceKind};
use ckosc::integrator::IntegratorConfig;

use crate::CliError;

/// Space and oscillator selection shared by all subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct SpaceArgs {
    /// Named space: S2, E2, H2, ANH, G, NH, AdS, M, dS.
    #[arg(long, global = true)]
    pub space: Option<String>,
    /// Curvature κ₁ (with --kappa2, instead of --space).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa1: Option<f64>,
    /// Signature parameter κ₂.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa2: Option<f64>,
    /// Oscillator frequency ω₀ [default: 1].
    #[arg(long, global = true, conflicts_with = "omega0_sq")]
    pub omega0: Option<f64>,
    /// ω₀² directly; may be zero or negative.
    #[arg(long = "omega0-sq", global = true, allow_negative_numbers = true)]
    pub omega0_sq: Option<f64>,
    /// TOML file with defaults for any of the options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long = "output-dir", global = true, env = "CKOSC_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    /// Integrator relative tolerance.
    #[arg(long = "rel-tol", global = true)]
    pub rel_tol: Option<f64>,
    /// Integrator absolute tolerance.
    #[arg(long = "abs-tol", global = true)]
    pub abs_tol: Option<f64>,
    /// Largest integrator step.
    #[arg(long = "max-step", global = true)]
    pub max_step: Option<f64>,
}

/// Initial state flags, polar `(r, φ)` or parallel `(u, y)`.
#[derive(Debug, Clone, Default, Args)]
pub struct StateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub vr: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub vphi: Option<f64>,
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["r", "phi", "vr", "vphi"])]
    pub u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub vu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub vy: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum ChartName {
    Polar,
    Parallel,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub chart: ChartName,
    pub q: [f64; 2],
    pub v: [f64; 2],
}

impl InitialState {
    pub fn phase_state(&self) -> PhaseState {
        match self.chart {
            ChartName::Polar => PhaseState::polar(self.q[0], self.q[1], self.v[0], self.v[1]),
            ChartName::Parallel => PhaseState::parallel(self.q[0], self.q[1], self.v[0], self.v[1]),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub space: Option<String>,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub omega0: Option<f64>,
    pub omega0_sq: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub energy: Option<f64>,
    pub j: Option<f64>,
    pub t_end: Option<f64>,
    pub initial: Option<InitialState>,
    pub integrator: Option<IntegratorConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))
    }
}

/// Flags and file merged; flags win.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub flags: SpaceArgs,
    pub file: FileConfig,
}

fn unknown_space(name: &str) -> CliError {
    let names: Vec<&str> = SpaceKind::ALL.iter().map(|k| k.symbol()).collect();
    CliError::new(
        "unknown_space",
        format!("unknown space '{name}'; expected one of {}", names.join(", ")),
    )
}

fn space_from(
    space: &Option<String>,
    k1: Option<f64>,
    k2: Option<f64>,
) -> Result<Option<CKParams>, CliError> {
    match (space, k1, k2) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(CliError::new(
            "usage",
            "give either a space name or kappa1/kappa2, not both",
        )),
        (Some(name), None, None) => {
            let kind: SpaceKind = name.parse().map_err(|_| unknown_space(name))?;
            Ok(Some(CKParams::standard(kind)))
        }
        (None, Some(a), Some(b)) => CKParams::new(a, b)
            .map(Some)
            .map_err(|e| CliError::new("geometry", e.to_string())),
        (None, Some(_), None) | (None, None, Some(_)) => {
            Err(CliError::new("usage", "kappa1 and kappa2 must be given together"))
        }
        (None, None, None) => Ok(None),
    }
}

impl Resolved {
    pub fn new(flags: SpaceArgs) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Ok(Resolved { flags, file })
    }

    pub fn params(&self) -> Result<CKParams, CliError> {
        let f = &self.flags;
        if let Some(p) = space_from(&f.space, f.kappa1, f.kappa2)? {
            return Ok(p);
        }
        let c = &self.file;
        space_from(&c.space, c.kappa1, c.kappa2)?
            .ok_or_else(|| CliError::new("usage", "no space given; use --space or --kappa1/--kappa2"))
    }

    pub fn oscillator(&self) -> Result<Oscillator, CliError> {
        let f = &self.flags;
        let c = &self.file;
        let w2 = match (f.omega0, f.omega0_sq, c.omega0, c.omega0_sq) {
            (Some(w), _, _, _) => w * w,
            (None, Some(w2), _, _) => w2,
            (None, None, Some(_), Some(_)) => {
                return Err(CliError::new("config", "config gives both omega0 and omega0_sq"))
            }
            (None, None, Some(w), None) => w * w,
            (None, None, None, Some(w2)) => w2,
            (None, None, None, None) => 1.0,
        };
        if !w2.is_finite() {
            return Err(CliError::new("usage", "omega0 must be finite"));
        }
        Ok(Oscillator::new(w2))
    }

    pub fn integrator(&self) -> IntegratorConfig {
        let mut cfg = self.file.integrator.unwrap_or_default();
        if let Some(v) = self.flags.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.flags.abs_tol {
            cfg.abs_tol = v;
        }
        if let Some(v) = self.flags.max_step {
            cfg.max_step = v;
        }
        cfg
    }

    pub fn output_dir(&self) -> PathBuf {
        self.flags
            .output_dir
            .clone()
            .or_else(|| self.file.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn energy(&self, flag: Option<f64>) -> Option<f64> {
        flag.or(self.file.energy)
    }

    pub fn momentum(&self, flag: Option<f64>) -> Option<f64> {
        flag.or(self.file.j)
    }

    pub fn t_end(&self, flag: Option<f64>, default: f64) -> f64 {
        flag.or(self.file.t_end).unwrap_or(default)
    }

    /// Initial state from flags, else from the file.
    pub fn initial_state(&self, s: &StateArgs) -> Result<Option<PhaseState>, CliError> {
        let polar = [s.r, s.phi, s.vr, s.vphi];
        let parallel = [s.u, s.y, s.vu, s.vy];
        let complete = |xs: [Option<f64>; 4], names: &str| -> Result<Option<[f64; 4]>, CliError> {
            if xs.iter().all(Option::is_none) {
                return Ok(None);
            }
            if xs.iter().any(Option::is_none) {
                return Err(CliError::new("usage", format!("an initial state needs all of {names}")));
            }
            Ok(Some(xs.map(|x| x.unwrap_or_default())))
        };
        if let Some([a, b, c, d]) = complete(polar, "--r --phi --vr --vphi")? {
            return Ok(Some(PhaseState::polar(a, b, c, d)));
        }
        if let Some([a, b, c, d]) = complete(parallel, "--u --y --vu --vy")? {
            return Ok(Some(PhaseState::parallel(a, b, c, d)));
        }
        Ok(self.file.initial.as_ref().map(InitialState::phase_state))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(flags: SpaceArgs, file: &str) -> Resolved {
        Resolved {
            flags,
            file: toml::from_str(file).unwrap(),
        }
    }

    #[test]
    fn flags_override_file() {
        let flags = SpaceArgs {
            space: Some("S2".into()),
            omega0: Some(2.0),
            ..Default::default()
        };
        let r = resolved(flags, "space = \"H2\"\nomega0_sq = 9.0\n[integrator]\nrel_tol = 1e-8\n");
        assert_eq!(r.params().unwrap(), CKParams::new(1.0, 1.0).unwrap());
        assert_eq!(r.oscillator().unwrap().omega0_sq, 4.0);
        assert_eq!(r.integrator().rel_tol, 1e-8);
        assert_eq!(r.integrator().abs_tol, IntegratorConfig::default().abs_tol);
    }

    #[test]
    fn file_then_defaults() {
        let r = resolved(SpaceArgs::default(), "kappa1 = -1.0\nkappa2 = 1.0\n");
        assert_eq!(r.params().unwrap(), CKParams::new(-1.0, 1.0).unwrap());
        assert_eq!(r.oscillator().unwrap().omega0_sq, 1.0);
        assert_eq!(r.output_dir(), PathBuf::from("."));
        let r = resolved(SpaceArgs::default(), "");
        assert_eq!(r.params().unwrap_err().kind, "usage");
    }

    #[test]
    fn named_spaces_are_the_standard_pairs() {
        for kind in SpaceKind::ALL {
            let flags = SpaceArgs {
                space: Some(kind.symbol().to_lowercase()),
                ..Default::default()
            };
            let p = resolved(flags, "").params().unwrap();
            let (s1, s2) = kind.signs();
            assert_eq!((p.kappa1, p.kappa2), (s1 as f64, s2 as f64));
        }
    }

    #[test]
    fn unknown_space_lists_names() {
        let flags = SpaceArgs {
            space: Some("XX".into()),
            ..Default::default()
        };
        let err = resolved(flags, "").params().unwrap_err();
        assert_eq!(err.kind, "unknown_space");
        assert!(err.message.contains("S2, E2, H2, ANH, G, NH, AdS, M, dS"));
    }

    #[test]
    fn initial_state_from_file() {
        let r = resolved(
            SpaceArgs::default(),
            "[initial]\nchart = \"parallel\"\nq = [0.1, 0.2]\nv = [0.3, 0.4]\n",
        );
        let s = r.initial_state(&StateArgs::default()).unwrap().unwrap();
        assert_eq!(s, PhaseState::parallel(0.1, 0.2, 0.3, 0.4));
        let partial = StateArgs {
            r: Some(1.0),
            ..Default::default()
        };
        assert!(r.initial_state(&partial).is_err());
    }
}
