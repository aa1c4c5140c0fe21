use super::config::Point3;
use super::topology::ReflectionTopology;
use crate::design::{Design, SrDesign};
use crate::{CMat, CVec, Error, Result, C64};
use std::collections::BTreeMap;

/// Channels of a (multi-RIS) MISO realization. RIS indices are 1-based in all
/// accessors; node 0 is the BS. Matrices are stored so that they multiply in
/// signal order: `G_{0,i}` is M×N_i and `G_{i,j}` is N_i×N_j.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSetMiso {
    pub bs_antennas: usize,
    pub ris_sizes: Vec<usize>,
    pub g_bs: Vec<CMat>,
    pub g_ris: BTreeMap<(usize, usize), CMat>,
    /// `h_ris[k][i-1]`: RIS i → user k.
    pub h_ris: Vec<Vec<CVec>>,
    pub h_direct: Vec<CVec>,
    pub user_positions: Vec<Point3>,
}

impl ChannelSetMiso {
    pub fn users(&self) -> usize {
        self.h_direct.len()
    }

    /// `G_{a,b}` where `a = 0` denotes the BS.
    pub fn link(&self, a: usize, b: usize) -> Result<&CMat> {
        if a == 0 {
            self.g_bs.get(b.wrapping_sub(1)).ok_or_else(|| Error::MissingChannel(format!("G(0,{b})")))
        } else {
            self.g_ris.get(&(a, b)).ok_or_else(|| Error::MissingChannel(format!("G({a},{b})")))
        }
    }

    pub fn h_ris(&self, k: usize, i: usize) -> Result<&CVec> {
        self.h_ris
            .get(k)
            .and_then(|v| v.get(i.wrapping_sub(1)))
            .ok_or_else(|| Error::MissingChannel(format!("h_r(user {k}, RIS {i})")))
    }
}

/// Channels of a single-RIS MIMO D2D realization.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSetMimo {
    /// `H^r_k`: RIS → receiver k (M^r_k×N).
    pub h_r: Vec<CMat>,
    /// `G_j`: transmitter j → RIS (N×M^t_j).
    pub g: Vec<CMat>,
    /// `h_d[k][j]`: transmitter j → receiver k (M^r_k×M^t_j).
    pub h_d: Vec<Vec<CMat>>,
    pub tx_positions: Vec<Point3>,
    pub rx_positions: Vec<Point3>,
}

impl ChannelSetMimo {
    pub fn pairs(&self) -> usize {
        self.g.len()
    }

    pub fn ris_size(&self) -> usize {
        self.g.first().map_or(0, |g| g.nrows())
    }

    /// `H_{k,j} = H^r_k Θ G_j + H^d_{k,j}`.
    pub fn cross(&self, k: usize, j: usize, theta: &CVec) -> CMat {
        let mut hr = self.h_r[k].clone();
        for (c, mut col) in hr.column_iter_mut().enumerate() {
            col *= theta[c];
        }
        &hr * &self.g[j] + &self.h_d[k][j]
    }

    /// All `H_{k,j}` for a design, indexed `[k][j]`.
    pub fn all_cross(&self, design: &SrDesign) -> Vec<Vec<CMat>> {
        let kk = self.pairs();
        (0..kk).map(|k| (0..kk).map(|j| self.cross(k, j, &design.theta)).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSet {
    Miso(ChannelSetMiso),
    Mimo(ChannelSetMimo),
}

fn scale_cols(a: &CMat, v: &CVec) -> CMat {
    let mut out = a.clone();
    for (c, mut col) in out.column_iter_mut().enumerate() {
        col *= v[c];
    }
    out
}

/// Signal along a path from RIS `path[from]` onward: returns an N_{path[from−1]}
/// vector (or M when `from = 0`) equal to `G_{prev,p_from}Θ…h^r_{k,p_n}`.
fn path_tail(k: usize, path: &[usize], from: usize, design: &Design, ch: &ChannelSetMiso) -> Result<CVec> {
    let last = *path.last().expect("non-empty path");
    let mut v = ch.h_ris(k, last)?.clone();
    for t in (from..path.len()).rev() {
        let i = path[t];
        v.component_mul_assign(theta_of(design, i)?);
        let prev = if t == 0 { 0 } else { path[t - 1] };
        v = ch.link(prev, i)? * v;
    }
    Ok(v)
}

fn theta_of(design: &Design, i: usize) -> Result<&CVec> {
    design
        .theta
        .get(i - 1)
        .ok_or_else(|| Error::Shape(format!("design has no phase vector for RIS {i}")))
}

/// `h_k = Σ_paths G_{0,p1}Θ_{p1}⋯G_{p_{n−1},p_n}Θ_{p_n}h^r_{k,p_n} + h^d_k`.
pub fn effective_channel_miso(
    k: usize,
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
) -> Result<CVec> {
    let up = &topology.users[k];
    let mut h = if up.direct { channels.h_direct[k].clone() } else { CVec::zeros(channels.bs_antennas) };
    for p in &up.paths {
        h += path_tail(k, p, 0, design, channels)?;
    }
    Ok(h)
}

/// Effective channels of all users.
pub fn effective_channels(design: &Design, channels: &ChannelSetMiso, topology: &ReflectionTopology) -> Result<Vec<CVec>> {
    (0..channels.users()).map(|k| effective_channel_miso(k, design, channels, topology)).collect()
}

/// Affine split `h_k = F_{k,l}·θ_l + d_{k,l}` for RIS `l` (1-based).
pub fn reflect_channel_matrix(
    k: usize,
    l: usize,
    design: &Design,
    channels: &ChannelSetMiso,
    topology: &ReflectionTopology,
) -> Result<(CMat, CVec)> {
    if !topology.uses(k, l) {
        return Err(Error::UnusedRis { user: k, ris: l });
    }
    let nl = channels.ris_sizes[l - 1];
    let m = channels.bs_antennas;
    let up = &topology.users[k];
    let mut f = CMat::zeros(m, nl);
    let mut rem = if up.direct { channels.h_direct[k].clone() } else { CVec::zeros(m) };
    for p in &up.paths {
        match p.iter().position(|&x| x == l) {
            None => rem += path_tail(k, p, 0, design, channels)?,
            Some(pos) => {
                let mut a = channels.link(0, p[0])?.clone();
                for t in 0..pos {
                    a = scale_cols(&a, theta_of(design, p[t])?) * channels.link(p[t], p[t + 1])?;
                }
                let v = if pos + 1 == p.len() {
                    channels.h_ris(k, l)?.clone()
                } else {
                    path_tail(k, p, pos + 1, design, channels)?
                };
                f += scale_cols(&a, &v);
            }
        }
    }
    Ok((f, rem))
}

/// Zero-phase helper: `Design` with all-ones phases, used by composition tests.
pub fn unit_phases(sizes: &[usize]) -> Vec<CVec> {
    sizes.iter().map(|&n| CVec::from_element(n, C64::from(1.0))).collect()
}
