//! JSON experiment files. Units are spelled out in the field names; omitted
//! fields take the simulation defaults (K = M = 4, one 100-element RIS,
//! d = 200 m, P = 0 dBm, −169 dBm/Hz over 240 kHz).

use crate::channel::{
    dbm_to_watts, Geometry, LinkParams, MimoDims, NoiseSpec, Point3, PowerModel, ReflectionTopology, RicianParams,
    SystemConfig, UserPaths,
};
use crate::power::PowerConstraint;
use crate::{CMat, Error, Result, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    #[default]
    Miso,
    Mimo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFile {
    pub exponent: f64,
    pub k_factor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicianFile {
    pub bs_ris: LinkFile,
    pub direct: LinkFile,
    pub ris_user: LinkFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    /// Real part of Ω, row-major.
    pub omega_re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_im: Option<Vec<Vec<f64>>>,
    pub budget_watts: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsFile {
    pub paths: Vec<Vec<usize>>,
    #[serde(default = "yes")]
    pub direct: bool,
}

fn yes() -> bool {
    true
}

/// Either one path set for all users or one per user.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopologyFile {
    Uniform(PathsFile),
    PerUser(Vec<PathsFile>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Scenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs_antennas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ris_elements: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_watts: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transmitter_power_watts: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_constraints: Option<Vec<ConstraintFile>>,
    /// Explicit σ²; overrides the density/bandwidth pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_watts: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_psd_dbm_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs_position_m: Option<Point3>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ris_positions_m: Option<Vec<Point3>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user_center_m: Option<Point3>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user_radius_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_radius_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs_spacing_wavelengths: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ris_spacing_wavelengths: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rician: Option<RicianFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_antennas: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_antennas: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub streams: Option<Vec<usize>>,
}

fn omega_from(c: &ConstraintFile, j: usize, bad: &mut Vec<String>) -> Option<CMat> {
    let n = c.omega_re.len();
    if n == 0 || c.omega_re.iter().any(|r| r.len() != n) {
        bad.push(format!("power_constraints[{j}].omega_re: must be a non-empty square matrix"));
        return None;
    }
    if let Some(im) = &c.omega_im {
        if im.len() != n || im.iter().any(|r| r.len() != n) {
            bad.push(format!("power_constraints[{j}].omega_im: shape differs from omega_re"));
            return None;
        }
    }
    Some(CMat::from_fn(n, n, |r, col| {
        let im = c.omega_im.as_ref().map_or(0.0, |m| m[r][col]);
        C64::new(c.omega_re[r][col], im)
    }))
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Resolve defaults and validate.
    pub fn to_system(&self) -> Result<SystemConfig> {
        let mut bad: Vec<String> = Vec::new();
        let mimo = self.scenario == Scenario::Mimo;
        let m = self.bs_antennas.unwrap_or(4);
        let k = self.users.unwrap_or(4);
        let ris_elements = self.ris_elements.clone().unwrap_or_else(|| vec![100]);
        let l = ris_elements.len();
        let distance = self.distance_m.unwrap_or(200.0);
        if !(distance > 0.0) {
            bad.push(format!("distance_m: must be > 0, got {distance}"));
        }

        let power_fields =
            [self.power_dbm.is_some(), self.power_watts.is_some(), self.transmitter_power_watts.is_some(), self.power_constraints.is_some()];
        if power_fields.iter().filter(|&&x| x).count() > 1 {
            bad.push("power_*: give only one of power_dbm, power_watts, transmitter_power_watts, power_constraints".into());
        }
        let power = if let Some(w) = self.power_watts {
            if !(w > 0.0) {
                bad.push(format!("power_watts: must be > 0, got {w}"));
            }
            PowerModel::Total(w)
        } else if let Some(ws) = &self.transmitter_power_watts {
            if ws.iter().any(|w| !(*w > 0.0)) {
                bad.push("transmitter_power_watts: every budget must be > 0".into());
            }
            PowerModel::PerTransmitter(ws.clone())
        } else if let Some(cs) = &self.power_constraints {
            let mut out = Vec::new();
            for (j, c) in cs.iter().enumerate() {
                if !(c.budget_watts > 0.0) {
                    bad.push(format!("power_constraints[{j}].budget_watts: must be > 0"));
                }
                if let Some(omega) = omega_from(c, j, &mut bad) {
                    out.push(PowerConstraint { omega, budget: c.budget_watts });
                }
            }
            PowerModel::General(out)
        } else {
            let dbm = self.power_dbm.unwrap_or(0.0);
            if !dbm.is_finite() {
                bad.push("power_dbm: must be finite".into());
            }
            PowerModel::Total(dbm_to_watts(dbm))
        };

        let noise = match self.noise_watts {
            Some(s) => {
                if !(s > 0.0) {
                    bad.push(format!("noise_watts: must be > 0, got {s}"));
                }
                NoiseSpec::Power(s)
            }
            None => {
                let bw = self.bandwidth_hz.unwrap_or(240e3);
                if !(bw > 0.0) {
                    bad.push(format!("bandwidth_hz: must be > 0, got {bw}"));
                }
                NoiseSpec::Density { psd_dbm_hz: self.noise_psd_dbm_hz.unwrap_or(-169.0), bandwidth_hz: bw }
            }
        };

        let mut geometry = if mimo { Geometry::mimo(distance) } else { Geometry::miso(distance, l) };
        if let Some(p) = self.bs_position_m {
            geometry.bs = p;
        }
        if let Some(r) = &self.ris_positions_m {
            geometry.ris = r.clone();
        }
        if let Some(c) = self.user_center_m {
            geometry.user_center = c;
        }
        if let Some(r) = self.user_radius_m {
            geometry.user_radius = r;
        }
        if let Some(r) = self.tx_radius_m {
            geometry.tx_radius = r;
        }
        if let Some(s) = self.bs_spacing_wavelengths {
            geometry.bs_spacing = s;
        }
        if let Some(s) = self.ris_spacing_wavelengths {
            geometry.ris_spacing = s;
        }
        for (name, v) in [("user_radius_m", geometry.user_radius), ("tx_radius_m", geometry.tx_radius)] {
            if !(v >= 0.0) {
                bad.push(format!("{name}: must be >= 0"));
            }
        }

        let rician = self.rician.map_or_else(RicianParams::default, |r| {
            let lp = |x: LinkFile| LinkParams { exponent: x.exponent, k_factor: x.k_factor };
            RicianParams { bs_ris: lp(r.bs_ris), direct: lp(r.direct), ris_user: lp(r.ris_user) }
        });
        for (name, lp) in [("rician.bs_ris", rician.bs_ris), ("rician.direct", rician.direct), ("rician.ris_user", rician.ris_user)] {
            if !(lp.k_factor >= 0.0) {
                bad.push(format!("{name}.k_factor: must be >= 0"));
            }
        }

        let topology = match &self.topology {
            None => ReflectionTopology::cascade(k, l),
            Some(TopologyFile::Uniform(p)) => ReflectionTopology::uniform(k, p.paths.clone(), p.direct),
            Some(TopologyFile::PerUser(ps)) => ReflectionTopology {
                users: ps.iter().map(|p| UserPaths { paths: p.paths.clone(), direct: p.direct }).collect(),
            },
        };

        let mimo_dims = mimo.then(|| {
            let mt = self.tx_antennas.clone().unwrap_or_else(|| vec![m; k]);
            let mr = self.rx_antennas.clone().unwrap_or_else(|| vec![m; k]);
            let streams = self
                .streams
                .clone()
                .unwrap_or_else(|| mt.iter().zip(&mr).map(|(a, b)| *a.min(b)).collect());
            MimoDims { tx_antennas: mt, rx_antennas: mr, streams }
        });

        let cfg = SystemConfig {
            bs_antennas: m,
            users: k,
            ris_elements,
            weights: self.weights.clone().unwrap_or_else(|| vec![1.0; k]),
            power,
            noise,
            geometry,
            rician,
            phase_bits: self.phase_bits,
            topology,
            mimo: mimo_dims,
        };
        if let Err(Error::Config(msg)) = cfg.validate() {
            bad.push(msg);
        }
        if bad.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    /// Fully explicit file describing `cfg` (linear units throughout).
    pub fn from_system(cfg: &SystemConfig) -> Self {
        let g = &cfg.geometry;
        let mut f = ConfigFile {
            scenario: if cfg.is_mimo() { Scenario::Mimo } else { Scenario::Miso },
            bs_antennas: Some(cfg.bs_antennas),
            users: Some(cfg.users),
            ris_elements: Some(cfg.ris_elements.clone()),
            weights: Some(cfg.weights.clone()),
            bs_position_m: Some(g.bs),
            ris_positions_m: Some(g.ris.clone()),
            user_center_m: Some(g.user_center),
            user_radius_m: Some(g.user_radius),
            tx_radius_m: Some(g.tx_radius),
            bs_spacing_wavelengths: Some(g.bs_spacing),
            ris_spacing_wavelengths: Some(g.ris_spacing),
            phase_bits: cfg.phase_bits,
            ..Default::default()
        };
        match &cfg.power {
            PowerModel::Total(p) => f.power_watts = Some(*p),
            PowerModel::PerTransmitter(ps) => f.transmitter_power_watts = Some(ps.clone()),
            PowerModel::General(cs) => {
                f.power_constraints = Some(
                    cs.iter()
                        .map(|c| {
                            let n = c.omega.nrows();
                            let re = (0..n).map(|r| (0..n).map(|col| c.omega[(r, col)].re).collect()).collect();
                            let im: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|col| c.omega[(r, col)].im).collect()).collect();
                            let any_im = im.iter().flatten().any(|x| *x != 0.0);
                            ConstraintFile { omega_re: re, omega_im: any_im.then_some(im), budget_watts: c.budget }
                        })
                        .collect(),
                )
            }
        }
        match cfg.noise {
            NoiseSpec::Power(s) => f.noise_watts = Some(s),
            NoiseSpec::Density { psd_dbm_hz, bandwidth_hz } => {
                f.noise_psd_dbm_hz = Some(psd_dbm_hz);
                f.bandwidth_hz = Some(bandwidth_hz);
            }
        }
        let r = cfg.rician;
        let lf = |x: LinkParams| LinkFile { exponent: x.exponent, k_factor: x.k_factor };
        f.rician = Some(RicianFile { bs_ris: lf(r.bs_ris), direct: lf(r.direct), ris_user: lf(r.ris_user) });
        f.topology = Some(TopologyFile::PerUser(
            cfg.topology.users.iter().map(|u| PathsFile { paths: u.paths.clone(), direct: u.direct }).collect(),
        ));
        if let Some(d) = &cfg.mimo {
            f.tx_antennas = Some(d.tx_antennas.clone());
            f.rx_antennas = Some(d.rx_antennas.clone());
            f.streams = Some(d.streams.clone());
        }
        f
    }
}

pub fn load_config_file(path: impl AsRef<Path>) -> Result<ConfigFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ConfigFile::from_json(&text)
}

/// Read, apply defaults, validate.
pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    load_config_file(path)?.to_system()
}

pub fn save_config(cfg: &SystemConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, ConfigFile::from_system(cfg).to_json()).map_err(|e| Error::io(path, e))
}

/// Short SHA-256 fingerprint of the explicit form of a configuration.
pub fn config_hash(cfg: &SystemConfig) -> String {
    let json = serde_json::to_string(&ConfigFile::from_system(cfg)).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
