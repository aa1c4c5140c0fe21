use super::topology::ReflectionTopology;
use crate::power::{per_antenna, PowerBudget, PowerConstraint};
use crate::numerics::{hermitian_eig, psd_eig};
use crate::{CMat, Error, Result};

pub type Point3 = [f64; 3];

/// Path-loss exponent and Rician factor of one class of links.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkParams {
    pub exponent: f64,
    pub k_factor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicianParams {
    /// BS–RIS and RIS–RIS links.
    pub bs_ris: LinkParams,
    /// BS–user (transmitter–receiver) links.
    pub direct: LinkParams,
    /// RIS–user links.
    pub ris_user: LinkParams,
}

impl Default for RicianParams {
    fn default() -> Self {
        RicianParams {
            bs_ris: LinkParams { exponent: 2.2, k_factor: 3.0 },
            direct: LinkParams { exponent: 3.5, k_factor: 0.0 },
            ris_user: LinkParams { exponent: 2.8, k_factor: 3.0 },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseSpec {
    Power(f64),
    Density { psd_dbm_hz: f64, bandwidth_hz: f64 },
}

impl NoiseSpec {
    pub fn sigma2(&self) -> f64 {
        match *self {
            NoiseSpec::Power(s) => s,
            NoiseSpec::Density { psd_dbm_hz, bandwidth_hz } => dbm_to_watts(psd_dbm_hz) * bandwidth_hz,
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::Density { psd_dbm_hz: -169.0, bandwidth_hz: 240e3 }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PowerModel {
    /// MISO: total BS budget. MIMO: the same budget for every transmitter.
    Total(f64),
    /// MIMO: one budget per transmitter.
    PerTransmitter(Vec<f64>),
    /// MISO: arbitrary `tr(Ω_j W W^H) ≤ P_j` constraints.
    General(Vec<PowerConstraint>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    /// BS position (MISO) or centre of the transmitter circle (MIMO).
    pub bs: Point3,
    pub ris: Vec<Point3>,
    /// Centre of the user (receiver) circle.
    pub user_center: Point3,
    pub user_radius: f64,
    pub tx_radius: f64,
    pub bs_spacing: f64,
    pub ris_spacing: f64,
}

impl Geometry {
    /// BS at (0,0,10), users around (d,30,0). RIS `i` of `l` sits at
    /// (d/2^(l−i), 0, 10): the last hop is always at (d,0,10), a two-hop system
    /// adds one at d/2, a three-hop system another at d/4.
    pub fn miso(distance: f64, l: usize) -> Self {
        let ris = (1..=l).map(|i| [distance / f64::from(1u32 << (l - i).min(31)), 0.0, 10.0]).collect();
        Geometry {
            bs: [0.0, 0.0, 10.0],
            ris,
            user_center: [distance, 30.0, 0.0],
            user_radius: 10.0,
            tx_radius: 10.0,
            bs_spacing: 0.5,
            ris_spacing: 0.125,
        }
    }

    /// Transmitters around (0,0,10), receivers around (d,30,0), RIS at (d,30,0).
    pub fn mimo(distance: f64) -> Self {
        Geometry {
            bs: [0.0, 0.0, 10.0],
            ris: vec![[distance, 30.0, 0.0]],
            user_center: [distance, 30.0, 0.0],
            user_radius: 10.0,
            tx_radius: 10.0,
            bs_spacing: 0.5,
            ris_spacing: 0.125,
        }
    }
}

/// Per-pair antenna and stream counts of the D2D variant.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoDims {
    pub tx_antennas: Vec<usize>,
    pub rx_antennas: Vec<usize>,
    pub streams: Vec<usize>,
}

impl MimoDims {
    /// `k` identical pairs with `d = min(mt, mr)` streams unless given.
    pub fn uniform(k: usize, mt: usize, mr: usize, streams: Option<usize>) -> Self {
        MimoDims {
            tx_antennas: vec![mt; k],
            rx_antennas: vec![mr; k],
            streams: vec![streams.unwrap_or(mt.min(mr)); k],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// M (MISO only).
    pub bs_antennas: usize,
    /// K users or transceiver pairs.
    pub users: usize,
    /// N_i per RIS; L is the length.
    pub ris_elements: Vec<usize>,
    pub weights: Vec<f64>,
    pub power: PowerModel,
    pub noise: NoiseSpec,
    pub geometry: Geometry,
    pub rician: RicianParams,
    pub phase_bits: Option<u32>,
    pub topology: ReflectionTopology,
    pub mimo: Option<MimoDims>,
}

impl SystemConfig {
    /// Single-RIS MISO system at the default operating point (P = 0 dBm).
    pub fn miso(m: usize, k: usize, n: usize, distance: f64) -> Self {
        SystemConfig {
            bs_antennas: m,
            users: k,
            ris_elements: vec![n],
            weights: vec![1.0; k],
            power: PowerModel::Total(dbm_to_watts(0.0)),
            noise: NoiseSpec::default(),
            geometry: Geometry::miso(distance, 1),
            rician: RicianParams::default(),
            phase_bits: None,
            topology: ReflectionTopology::cascade(k, 1),
            mimo: None,
        }
    }

    /// Single-RIS D2D system with `k` identical pairs.
    pub fn mimo(k: usize, mt: usize, mr: usize, streams: usize, n: usize, distance: f64) -> Self {
        SystemConfig {
            bs_antennas: mt,
            users: k,
            ris_elements: vec![n],
            weights: vec![1.0; k],
            power: PowerModel::Total(dbm_to_watts(0.0)),
            noise: NoiseSpec::default(),
            geometry: Geometry::mimo(distance),
            rician: RicianParams::default(),
            phase_bits: None,
            topology: ReflectionTopology::cascade(k, 1),
            mimo: Some(MimoDims::uniform(k, mt, mr, Some(streams))),
        }
    }

    /// Swap in a set of RIS with explicit positions; geometry and topology
    /// must be updated by the caller when paths change.
    pub fn with_ris(mut self, elements: Vec<usize>, positions: Vec<Point3>) -> Self {
        self.ris_elements = elements;
        self.geometry.ris = positions;
        self
    }

    pub fn ris_count(&self) -> usize {
        self.ris_elements.len()
    }

    pub fn sigma2(&self) -> f64 {
        self.noise.sigma2()
    }

    pub fn is_mimo(&self) -> bool {
        self.mimo.is_some()
    }

    /// Phase alphabet `{2πq/2^b}` when discrete phases are configured.
    pub fn alphabet(&self) -> Option<Vec<f64>> {
        self.phase_bits.map(phase_alphabet)
    }

    /// Beamformer constraint set for the MISO problems.
    pub fn miso_budget(&self, per_antenna_split: bool) -> Result<PowerBudget> {
        match &self.power {
            PowerModel::Total(p) if per_antenna_split => Ok(PowerBudget::General(per_antenna(self.bs_antennas, *p))),
            PowerModel::Total(p) => Ok(PowerBudget::Total(*p)),
            PowerModel::General(cs) => Ok(PowerBudget::General(cs.clone())),
            PowerModel::PerTransmitter(_) => Err(Error::Config("per-transmitter budgets need a MIMO system".into())),
        }
    }

    /// Budget of transmitter `k` in the D2D problem.
    pub fn pair_budget(&self, k: usize, per_antenna_split: bool) -> Result<PowerBudget> {
        let dims = self.mimo.as_ref().ok_or_else(|| Error::Config("not a MIMO system".into()))?;
        let p = match &self.power {
            PowerModel::Total(p) => *p,
            PowerModel::PerTransmitter(ps) => ps[k],
            PowerModel::General(_) => return Err(Error::Config("general constraints are MISO only".into())),
        };
        Ok(if per_antenna_split {
            PowerBudget::General(per_antenna(dims.tx_antennas[k], p))
        } else {
            PowerBudget::Total(p)
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.users == 0 {
            bad.push("users must be >= 1".to_string());
        }
        if self.bs_antennas == 0 {
            bad.push("bs_antennas must be >= 1".to_string());
        }
        if self.ris_elements.iter().any(|&n| n == 0) {
            bad.push("every RIS needs >= 1 element".to_string());
        }
        if self.weights.len() != self.users {
            bad.push(format!("{} weights for {} users", self.weights.len(), self.users));
        }
        if self.weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            bad.push("weights must be finite and >= 0".to_string());
        }
        match &self.power {
            PowerModel::Total(p) if !(*p > 0.0) || !p.is_finite() => bad.push(format!("power must be > 0, got {p}")),
            PowerModel::PerTransmitter(ps) => {
                if ps.len() != self.users {
                    bad.push(format!("{} transmitter budgets for {} pairs", ps.len(), self.users));
                }
                if ps.iter().any(|p| !(*p > 0.0)) {
                    bad.push("transmitter budgets must be > 0".to_string());
                }
            }
            PowerModel::General(cs) => {
                if cs.is_empty() {
                    bad.push("general power model needs at least one constraint".to_string());
                }
                let m = self.bs_antennas;
                let mut shapes_ok = true;
                for (j, c) in cs.iter().enumerate() {
                    if !(c.budget > 0.0) {
                        bad.push(format!("constraint {j}: budget must be > 0"));
                    }
                    if c.omega.nrows() != m || c.omega.ncols() != m {
                        bad.push(format!("constraint {j}: Omega must be {m}x{m}"));
                        shapes_ok = false;
                    } else if psd_eig(&c.omega).is_err() {
                        bad.push(format!("constraint {j}: Omega must be Hermitian PSD"));
                        shapes_ok = false;
                    }
                }
                // the feasible set is bounded only if no direction escapes every constraint
                if shapes_ok && !cs.is_empty() {
                    let sum = cs.iter().fold(CMat::zeros(m, m), |acc, c| acc + &c.omega);
                    let low = hermitian_eig(&sum).map_or(0.0, |e| e.lambda.last().copied().unwrap_or(0.0));
                    if !(low > 1e-12 * sum.norm()) {
                        bad.push("power constraints leave some beamformer direction unbounded".to_string());
                    }
                }
            }
            _ => {}
        }
        let s2 = self.sigma2();
        if !(s2 > 0.0) || !s2.is_finite() {
            bad.push(format!("noise power must be > 0, got {s2}"));
        }
        if self.geometry.ris.len() != self.ris_count() {
            bad.push(format!("{} RIS positions for {} RIS", self.geometry.ris.len(), self.ris_count()));
        }
        if let Some(b) = self.phase_bits {
            if b == 0 || b > 16 {
                bad.push(format!("phase_bits must be in 1..=16, got {b}"));
            }
        }
        if let Some(d) = &self.mimo {
            if self.ris_count() != 1 {
                bad.push("MIMO systems use exactly one RIS".to_string());
            }
            for (name, v) in [("tx_antennas", &d.tx_antennas), ("rx_antennas", &d.rx_antennas), ("streams", &d.streams)] {
                if v.len() != self.users {
                    bad.push(format!("{name}: {} entries for {} pairs", v.len(), self.users));
                }
                if v.iter().any(|&x| x == 0) {
                    bad.push(format!("{name}: entries must be >= 1"));
                }
            }
        } else if let Err(e) = self.topology.validate(self.users, self.ris_count()) {
            bad.push(e.to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }
}

pub fn phase_alphabet(bits: u32) -> Vec<f64> {
    let q = 1usize << bits;
    (0..q).map(|i| 2.0 * std::f64::consts::PI * i as f64 / q as f64).collect()
}
