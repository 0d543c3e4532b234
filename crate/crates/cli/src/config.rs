//! Run configuration: a flat `key = value` text format with a closed schema.
//!
//! Every key is optional and falls back to a documented default, so an empty
//! (or absent) file runs the built-in synthetic model end to end.  Unknown
//! keys, duplicate keys, and malformed values are hard errors carrying the
//! line number: silent typos in a batch config would otherwise masquerade as
//! physics.  Energy windows are given in wavenumbers relative to the open
//! threshold; model parameters are in atomic units, matching the potential
//! builder.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use feshlab_core::potential::SyntheticModelParams;
use feshlab_core::qdt::QdtParams;
use feshlab_core::units;

/// Which engine(s) a command should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mfgh,
    Qdt,
    Both,
}

impl Method {
    pub fn wants_mfgh(self) -> bool {
        matches!(self, Method::Mfgh | Method::Both)
    }
    pub fn wants_qdt(self) -> bool {
        matches!(self, Method::Qdt | Method::Both)
    }
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "mfgh" => Ok(Method::Mfgh),
            "qdt" => Ok(Method::Qdt),
            "both" => Ok(Method::Both),
            other => Err(format!(
                "method must be one of mfgh|qdt|both, got '{other}'"
            )),
        }
    }
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mfgh => "mfgh",
            Method::Qdt => "qdt",
            Method::Both => "both",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fully resolved run configuration (defaults + file + command-line flags).
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Tabulated curves to load instead of the synthetic model.
    pub potential_file: Option<PathBuf>,
    /// Synthetic-model parameters (atomic units), with overrides applied.
    pub model: SyntheticModelParams,
    /// Engine selection.
    pub method: Method,
    /// Use the optimized (rotated) reference set where a choice exists.
    pub rotated: bool,
    /// Bound-state window, wavenumbers relative to the open threshold.
    pub bound_window_cm: (f64, f64),
    /// Resonance window, wavenumbers relative to the open threshold.
    pub resonance_window_cm: (f64, f64),
    /// Phase-scan window, wavenumbers relative to the open threshold.
    pub phase_window_cm: (f64, f64),
    /// Phase/resonance provider mesh step, wavenumbers.
    pub phase_step_cm: f64,
    /// Outer edge of the diagonalization box, bohr.
    pub grid_r_max: f64,
    /// Grid points per half de Broglie wavelength.
    pub grid_density: f64,
    /// Grid ceiling above the open threshold, wavenumbers.
    pub grid_ceiling_cm: f64,
    /// Hard cap on grid points per channel.
    pub grid_max_points: usize,
    /// Absorber strength, hartree.
    pub optical_amplitude: f64,
    /// Absorber length scale, bohr.
    pub optical_length: f64,
    /// Relative width spread across box variants accepted as converged.
    pub stab_spread_tol: f64,
    /// Quantum-defect engine knobs.
    pub qdt: QdtParams,
    /// Output directory (not part of CSV provenance).
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential_file: None,
            model: SyntheticModelParams::default(),
            method: Method::Both,
            rotated: true,
            bound_window_cm: (-81.0, -1.0),
            resonance_window_cm: (2.0, 100.0),
            phase_window_cm: (2.0, 100.0),
            phase_step_cm: 0.02,
            grid_r_max: 160.0,
            grid_density: 1.5,
            grid_ceiling_cm: 120.0,
            grid_max_points: 4096,
            optical_amplitude: 4.0e-5,
            optical_length: 40.0,
            stab_spread_tol: 0.05,
            qdt: QdtParams::default(),
            out_dir: PathBuf::from("feshlab-out"),
        }
    }
}

/// Command-line overrides applied after the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub method: Option<Method>,
    pub rotated: Option<bool>,
    pub out: Option<PathBuf>,
}

fn parse_f64(key: &str, raw: &str, lineno: usize) -> Result<f64, String> {
    raw.parse::<f64>().map_err(|_| {
        format!("line {lineno}: key '{key}' expects a number, got '{raw}'")
    })
}

fn parse_usize(key: &str, raw: &str, lineno: usize) -> Result<usize, String> {
    raw.parse::<usize>().map_err(|_| {
        format!("line {lineno}: key '{key}' expects a non-negative integer, got '{raw}'")
    })
}

fn parse_bool(key: &str, raw: &str, lineno: usize) -> Result<bool, String> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!(
            "line {lineno}: key '{key}' expects true or false, got '{raw}'"
        )),
    }
}

impl RunConfig {
    /// Parses a config file body; `base_dir` anchors relative paths.
    pub fn from_text(text: &str, base_dir: &Path) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "line {lineno}: expected 'key = value', got '{line}'"
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(format!("line {lineno}: key '{key}' has an empty value"));
            }
            if let Some(first) = seen.insert(key.to_string(), lineno) {
                return Err(format!(
                    "line {lineno}: key '{key}' already set on line {first}"
                ));
            }

            match key {
                "potential_file" => {
                    let p = PathBuf::from(value);
                    cfg.potential_file = Some(if p.is_absolute() {
                        p
                    } else {
                        base_dir.join(p)
                    });
                }
                "reduced_mass" => cfg.model.reduced_mass = parse_f64(key, value, lineno)?,
                "asymptote" => cfg.model.asymptote = parse_f64(key, value, lineno)?,
                "delta_e_so" => cfg.model.delta_e_so = parse_f64(key, value, lineno)?,
                "depth_a" => cfg.model.depth_a = parse_f64(key, value, lineno)?,
                "re_a" => cfg.model.re_a = parse_f64(key, value, lineno)?,
                "stiffness_a" => cfg.model.stiffness_a = parse_f64(key, value, lineno)?,
                "depth_b" => cfg.model.depth_b = parse_f64(key, value, lineno)?,
                "re_b" => cfg.model.re_b = parse_f64(key, value, lineno)?,
                "stiffness_b" => cfg.model.stiffness_b = parse_f64(key, value, lineno)?,
                "c3" => cfg.model.c3 = parse_f64(key, value, lineno)?,
                "coupling_amplitude" => {
                    cfg.model.coupling_amplitude = parse_f64(key, value, lineno)?
                }
                "coupling_center" => cfg.model.coupling_center = parse_f64(key, value, lineno)?,
                "coupling_width" => cfg.model.coupling_width = parse_f64(key, value, lineno)?,
                "so_amplitude" => cfg.model.so_amplitude = parse_f64(key, value, lineno)?,
                "method" => cfg.method = Method::parse(value).map_err(|e| format!("line {lineno}: {e}"))?,
                "rotated" => cfg.rotated = parse_bool(key, value, lineno)?,
                "bound_window_lo_cm" => cfg.bound_window_cm.0 = parse_f64(key, value, lineno)?,
                "bound_window_hi_cm" => cfg.bound_window_cm.1 = parse_f64(key, value, lineno)?,
                "resonance_window_lo_cm" => {
                    cfg.resonance_window_cm.0 = parse_f64(key, value, lineno)?
                }
                "resonance_window_hi_cm" => {
                    cfg.resonance_window_cm.1 = parse_f64(key, value, lineno)?
                }
                "phase_window_lo_cm" => cfg.phase_window_cm.0 = parse_f64(key, value, lineno)?,
                "phase_window_hi_cm" => cfg.phase_window_cm.1 = parse_f64(key, value, lineno)?,
                "phase_step_cm" => cfg.phase_step_cm = parse_f64(key, value, lineno)?,
                "grid_r_max" => cfg.grid_r_max = parse_f64(key, value, lineno)?,
                "grid_density" => cfg.grid_density = parse_f64(key, value, lineno)?,
                "grid_ceiling_cm" => cfg.grid_ceiling_cm = parse_f64(key, value, lineno)?,
                "grid_max_points" => cfg.grid_max_points = parse_usize(key, value, lineno)?,
                "optical_amplitude" => cfg.optical_amplitude = parse_f64(key, value, lineno)?,
                "optical_length" => cfg.optical_length = parse_f64(key, value, lineno)?,
                "stab_spread_tol" => cfg.stab_spread_tol = parse_f64(key, value, lineno)?,
                "qdt_r0" => cfg.qdt.r0 = parse_f64(key, value, lineno)?,
                "qdt_r_wall" => cfg.qdt.r_wall = parse_f64(key, value, lineno)?,
                "qdt_r_far" => cfg.qdt.r_far = parse_f64(key, value, lineno)?,
                "qdt_coarse_step_cm" => cfg.qdt.coarse_step_cm = parse_f64(key, value, lineno)?,
                "numerov_h" => cfg.qdt.numerov_h = parse_f64(key, value, lineno)?,
                "numerov_tol" => cfg.qdt.numerov_tol = parse_f64(key, value, lineno)?,
                "out_dir" => {
                    let p = PathBuf::from(value);
                    cfg.out_dir = if p.is_absolute() { p } else { base_dir.join(p) };
                }
                other => {
                    return Err(format!(
                        "line {lineno}: unknown key '{other}' (see README for the schema)"
                    ));
                }
            }
        }
        Ok(cfg)
    }

    /// Loads and parses a config file.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config '{}': {e}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_text(&text, base)
    }

    /// Applies command-line flag overrides.
    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(m) = ov.method {
            self.method = m;
        }
        if let Some(r) = ov.rotated {
            self.rotated = r;
        }
        if let Some(ref o) = ov.out {
            self.out_dir = o.clone();
        }
    }

    /// Cross-field validation; all failures are configuration errors.
    pub fn validate(&self) -> Result<(), String> {
        let windows = [
            ("bound_window", self.bound_window_cm),
            ("resonance_window", self.resonance_window_cm),
            ("phase_window", self.phase_window_cm),
        ];
        for (name, (lo, hi)) in windows {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(format!(
                    "{name} must satisfy lo < hi with finite bounds, got [{lo}, {hi}] cm^-1"
                ));
            }
        }
        if self.bound_window_cm.1 > 0.0 {
            return Err(format!(
                "bound window must lie below the open threshold, got hi = {} cm^-1",
                self.bound_window_cm.1
            ));
        }
        if self.resonance_window_cm.0 < 0.0 {
            return Err(format!(
                "resonance window must lie above the open threshold, got lo = {} cm^-1",
                self.resonance_window_cm.0
            ));
        }
        if let Some(ref p) = self.potential_file {
            if !p.is_file() {
                return Err(format!("potential_file '{}' does not exist", p.display()));
            }
        }
        let positive = [
            ("reduced_mass", self.model.reduced_mass),
            ("delta_e_so", self.model.delta_e_so),
            ("depth_a", self.model.depth_a),
            ("re_a", self.model.re_a),
            ("stiffness_a", self.model.stiffness_a),
            ("depth_b", self.model.depth_b),
            ("re_b", self.model.re_b),
            ("stiffness_b", self.model.stiffness_b),
            ("coupling_width", self.model.coupling_width),
            ("phase_step_cm", self.phase_step_cm),
            ("grid_density", self.grid_density),
            ("optical_length", self.optical_length),
            ("stab_spread_tol", self.stab_spread_tol),
            ("qdt_r0", self.qdt.r0),
            ("qdt_r_wall", self.qdt.r_wall),
            ("qdt_r_far", self.qdt.r_far),
            ("qdt_coarse_step_cm", self.qdt.coarse_step_cm),
            ("numerov_h", self.qdt.numerov_h),
            ("numerov_tol", self.qdt.numerov_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be a positive number, got {v}"));
            }
        }
        if !(self.model.c3 >= 0.0) {
            return Err(format!("c3 must be >= 0, got {}", self.model.c3));
        }
        if !(self.grid_r_max > 20.0) || !self.grid_r_max.is_finite() {
            return Err(format!(
                "grid_r_max must exceed 20 bohr, got {}",
                self.grid_r_max
            ));
        }
        if !(self.grid_ceiling_cm >= 0.0) {
            return Err(format!(
                "grid_ceiling_cm must be >= 0, got {}",
                self.grid_ceiling_cm
            ));
        }
        if self.grid_max_points < 16 {
            return Err(format!(
                "grid_max_points must be at least 16, got {}",
                self.grid_max_points
            ));
        }
        if !(self.optical_amplitude > 0.0) || !self.optical_amplitude.is_finite() {
            return Err(format!(
                "optical_amplitude must be positive, got {}",
                self.optical_amplitude
            ));
        }
        Ok(())
    }

    /// The full schema with final values, sorted by key — embedded verbatim
    /// in every CSV so any output file can be regenerated from its header.
    /// The output directory is where a file sits, not what it holds, so it
    /// is deliberately excluded.
    pub fn resolved_pairs(&self) -> Vec<(String, String)> {
        let f = crate::output::sig12;
        let mut pairs: Vec<(String, String)> = vec![
            (
                "potential_file".into(),
                self.potential_file
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "(synthetic)".into()),
            ),
            ("reduced_mass".into(), f(self.model.reduced_mass)),
            ("asymptote".into(), f(self.model.asymptote)),
            ("delta_e_so".into(), f(self.model.delta_e_so)),
            ("depth_a".into(), f(self.model.depth_a)),
            ("re_a".into(), f(self.model.re_a)),
            ("stiffness_a".into(), f(self.model.stiffness_a)),
            ("depth_b".into(), f(self.model.depth_b)),
            ("re_b".into(), f(self.model.re_b)),
            ("stiffness_b".into(), f(self.model.stiffness_b)),
            ("c3".into(), f(self.model.c3)),
            (
                "coupling_amplitude".into(),
                f(self.model.coupling_amplitude),
            ),
            ("coupling_center".into(), f(self.model.coupling_center)),
            ("coupling_width".into(), f(self.model.coupling_width)),
            ("so_amplitude".into(), f(self.model.so_amplitude)),
            ("method".into(), self.method.to_string()),
            ("rotated".into(), self.rotated.to_string()),
            ("bound_window_lo_cm".into(), f(self.bound_window_cm.0)),
            ("bound_window_hi_cm".into(), f(self.bound_window_cm.1)),
            (
                "resonance_window_lo_cm".into(),
                f(self.resonance_window_cm.0),
            ),
            (
                "resonance_window_hi_cm".into(),
                f(self.resonance_window_cm.1),
            ),
            ("phase_window_lo_cm".into(), f(self.phase_window_cm.0)),
            ("phase_window_hi_cm".into(), f(self.phase_window_cm.1)),
            ("phase_step_cm".into(), f(self.phase_step_cm)),
            ("grid_r_max".into(), f(self.grid_r_max)),
            ("grid_density".into(), f(self.grid_density)),
            ("grid_ceiling_cm".into(), f(self.grid_ceiling_cm)),
            ("grid_max_points".into(), self.grid_max_points.to_string()),
            ("optical_amplitude".into(), f(self.optical_amplitude)),
            ("optical_length".into(), f(self.optical_length)),
            ("stab_spread_tol".into(), f(self.stab_spread_tol)),
            ("qdt_r0".into(), f(self.qdt.r0)),
            ("qdt_r_wall".into(), f(self.qdt.r_wall)),
            ("qdt_r_far".into(), f(self.qdt.r_far)),
            ("qdt_coarse_step_cm".into(), f(self.qdt.coarse_step_cm)),
            ("numerov_h".into(), f(self.qdt.numerov_h)),
            ("numerov_tol".into(), f(self.qdt.numerov_tol)),
        ];
        pairs.sort();
        pairs
    }

    /// Bound window in absolute hartree given the open threshold.
    pub fn bound_window_hartree(&self, e_open: f64) -> (f64, f64) {
        (
            e_open + units::cm_to_hartree(self.bound_window_cm.0),
            e_open + units::cm_to_hartree(self.bound_window_cm.1),
        )
    }

    /// Resonance window in absolute hartree given the open threshold.
    pub fn resonance_window_hartree(&self, e_open: f64) -> (f64, f64) {
        (
            e_open + units::cm_to_hartree(self.resonance_window_cm.0),
            e_open + units::cm_to_hartree(self.resonance_window_cm.1),
        )
    }

}
