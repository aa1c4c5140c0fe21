use super::compose::{ChannelSet, ChannelSetMimo, ChannelSetMiso};
use super::config::{LinkParams, Point3, SystemConfig};
use super::geometry::{distance, path_loss, ula_towards, upa_towards, D0};
use crate::{CMat, CVec, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;

/// Independent random streams. Every link draws from its own ChaCha8 stream
/// keyed by the trial seed and the link identity, so adding or removing links
/// (another RIS, a different topology) leaves all other draws untouched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    UserPositions,
    TxPositions,
    BsRis(usize),
    RisRis(usize, usize),
    RisUser(usize, usize),
    Direct(usize),
    TxRis(usize),
    RisRx(usize),
    TxRx(usize, usize),
    InitPhases,
    BaselinePhases,
}

impl Stream {
    pub fn id(self) -> u64 {
        let (tag, a, b) = match self {
            Stream::UserPositions => (1, 0, 0),
            Stream::TxPositions => (2, 0, 0),
            Stream::BsRis(i) => (3, i, 0),
            Stream::RisRis(i, j) => (4, i, j),
            Stream::RisUser(i, k) => (5, i, k),
            Stream::Direct(k) => (6, k, 0),
            Stream::TxRis(j) => (7, j, 0),
            Stream::RisRx(k) => (8, k, 0),
            Stream::TxRx(k, j) => (9, k, j),
            Stream::InitPhases => (10, 0, 0),
            Stream::BaselinePhases => (11, 0, 0),
        };
        (tag << 56) | ((a as u64 & 0x0fff_ffff) << 28) | (b as u64 & 0x0fff_ffff)
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// CN(0,1) sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Uniformly random unit-modulus vector.
pub fn random_phases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
}

/// `sqrt(κ/(K+1))·(sqrt(K)·LoS + NLoS)`, NLoS filled column by column.
pub fn rician_channel<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    kappa: f64,
    k_factor: f64,
    los: &CMat,
    rng: &mut R,
) -> Result<CMat> {
    if los.nrows() != rows || los.ncols() != cols {
        return Err(Error::Shape(format!("LoS is {}x{}, expected {rows}x{cols}", los.nrows(), los.ncols())));
    }
    if !(kappa >= 0.0) || !(k_factor >= 0.0) {
        return Err(Error::InvalidArgument("path gain and Rician factor must be >= 0".into()));
    }
    let mut nlos = CMat::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            nlos[(r, c)] = complex_gaussian(rng);
        }
    }
    let scale = (kappa / (k_factor + 1.0)).sqrt();
    Ok((los * C64::from(k_factor.sqrt()) + nlos) * C64::from(scale))
}

fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.transpose()
}

fn link<R: Rng + ?Sized>(a: &Point3, b: &Point3, lp: LinkParams, los: CMat, rng: &mut R) -> Result<CMat> {
    let kappa = path_loss(distance(a, b), lp.exponent)?;
    rician_channel(los.nrows(), los.ncols(), kappa, lp.k_factor, &los, rng)
}

fn disk_point<R: Rng + ?Sized>(center: &Point3, radius: f64, rng: &mut R) -> Point3 {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    [center[0] + r * phi.cos(), center[1] + r * phi.sin(), center[2]]
}

/// Draw a point in the disk that keeps at least `D0` from every anchor.
fn disk_point_clear<R: Rng + ?Sized>(center: &Point3, radius: f64, avoid: &[Point3], rng: &mut R) -> Result<Point3> {
    for _ in 0..10_000 {
        let p = disk_point(center, radius, rng);
        if avoid.iter().all(|a| distance(a, &p) >= D0) {
            return Ok(p);
        }
    }
    Err(Error::BelowReferenceDistance(0.0))
}

pub fn generate_channels(config: &SystemConfig, seed: u64) -> Result<ChannelSet> {
    config.validate()?;
    if config.is_mimo() {
        generate_mimo(config, seed).map(ChannelSet::Mimo)
    } else {
        generate_miso(config, seed).map(ChannelSet::Miso)
    }
}

pub fn generate_miso(config: &SystemConfig, seed: u64) -> Result<ChannelSetMiso> {
    config.validate()?;
    let geo = &config.geometry;
    let rc = &config.rician;
    let m = config.bs_antennas;
    let kk = config.users;
    let sizes = config.ris_elements.clone();

    let mut rng = stream_rng(seed, Stream::UserPositions);
    let users: Vec<Point3> = (0..kk).map(|_| disk_point(&geo.user_center, geo.user_radius, &mut rng)).collect();

    let mut g_bs = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let r = &geo.ris[i];
        let los = outer(&ula_towards(m, geo.bs_spacing, &geo.bs, r), &upa_towards(n, geo.ris_spacing, r, &geo.bs));
        g_bs.push(link(&geo.bs, r, rc.bs_ris, los, &mut stream_rng(seed, Stream::BsRis(i + 1)))?);
    }

    let mut g_ris = BTreeMap::new();
    for (i, j) in config.topology.ris_links() {
        let (pi, pj) = (&geo.ris[i - 1], &geo.ris[j - 1]);
        let los = outer(
            &upa_towards(sizes[i - 1], geo.ris_spacing, pi, pj),
            &upa_towards(sizes[j - 1], geo.ris_spacing, pj, pi),
        );
        g_ris.insert((i, j), link(pi, pj, rc.bs_ris, los, &mut stream_rng(seed, Stream::RisRis(i, j)))?);
    }

    let mut h_ris = Vec::with_capacity(kk);
    let mut h_direct = Vec::with_capacity(kk);
    for (k, u) in users.iter().enumerate() {
        let mut per = Vec::with_capacity(sizes.len());
        for (i, &n) in sizes.iter().enumerate() {
            let r = &geo.ris[i];
            let los = upa_towards(n, geo.ris_spacing, r, u);
            let h = link(r, u, rc.ris_user, CMat::from_column_slice(n, 1, los.as_slice()), &mut stream_rng(seed, Stream::RisUser(i + 1, k)))?;
            per.push(h.column(0).into_owned());
        }
        h_ris.push(per);
        let los = ula_towards(m, geo.bs_spacing, &geo.bs, u);
        let h = link(&geo.bs, u, rc.direct, CMat::from_column_slice(m, 1, los.as_slice()), &mut stream_rng(seed, Stream::Direct(k)))?;
        h_direct.push(h.column(0).into_owned());
    }

    Ok(ChannelSetMiso { bs_antennas: m, ris_sizes: sizes, g_bs, g_ris, h_ris, h_direct, user_positions: users })
}

pub fn generate_mimo(config: &SystemConfig, seed: u64) -> Result<ChannelSetMimo> {
    config.validate()?;
    let dims = config.mimo.as_ref().ok_or_else(|| Error::Config("not a MIMO system".into()))?;
    let geo = &config.geometry;
    let rc = &config.rician;
    let kk = config.users;
    let n = config.ris_elements[0];
    let ris = geo.ris[0];

    let mut rng = stream_rng(seed, Stream::TxPositions);
    let mut tx = Vec::with_capacity(kk);
    for _ in 0..kk {
        tx.push(disk_point_clear(&geo.bs, geo.tx_radius, &[ris], &mut rng)?);
    }
    let mut rng = stream_rng(seed, Stream::UserPositions);
    let mut avoid = tx.clone();
    avoid.push(ris);
    let mut rx = Vec::with_capacity(kk);
    for _ in 0..kk {
        rx.push(disk_point_clear(&geo.user_center, geo.user_radius, &avoid, &mut rng)?);
    }

    let sp = geo.bs_spacing;
    let mut g = Vec::with_capacity(kk);
    for (j, t) in tx.iter().enumerate() {
        let los = outer(&upa_towards(n, geo.ris_spacing, &ris, t), &ula_towards(dims.tx_antennas[j], sp, t, &ris));
        g.push(link(t, &ris, rc.bs_ris, los, &mut stream_rng(seed, Stream::TxRis(j)))?);
    }
    let mut h_r = Vec::with_capacity(kk);
    let mut h_d = Vec::with_capacity(kk);
    for (k, r) in rx.iter().enumerate() {
        let los = outer(&ula_towards(dims.rx_antennas[k], sp, r, &ris), &upa_towards(n, geo.ris_spacing, &ris, r));
        h_r.push(link(&ris, r, rc.ris_user, los, &mut stream_rng(seed, Stream::RisRx(k)))?);
        let mut row = Vec::with_capacity(kk);
        for (j, t) in tx.iter().enumerate() {
            let los = outer(&ula_towards(dims.rx_antennas[k], sp, r, t), &ula_towards(dims.tx_antennas[j], sp, t, r));
            row.push(link(t, r, rc.direct, los, &mut stream_rng(seed, Stream::TxRx(k, j)))?);
        }
        h_d.push(row);
    }
    Ok(ChannelSetMimo { h_r, g, h_d, tx_positions: tx, rx_positions: rx })
}
