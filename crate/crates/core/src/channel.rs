//! Spatially correlated Rayleigh fading (Kronecker model) and the
//! large-scale geometry of a circular cell.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{domain, Result};
use crate::linalg::{cplx, frob2, hermitian_eigen, psd_sqrt, CMatrix};

/// Which end of the link a correlation matrix describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Receive,
    Transmit,
}

/// Hermitian positive semi-definite spatial correlation matrix together with
/// its square root.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    entries: CMatrix,
    root: CMatrix,
    side: Side,
    identity: bool,
}

impl CorrelationMatrix {
    /// Validates Hermitian symmetry and positive semi-definiteness.
    pub fn new(entries: CMatrix, side: Side) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(domain("correlation matrix must be square and non-empty"));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let asym = (&entries - entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > 1e-10 * scale {
            return Err(domain("correlation matrix is not Hermitian"));
        }
        let root = psd_sqrt(&entries)?;
        let identity = entries == CMatrix::identity(entries.nrows(), entries.nrows());
        Ok(Self { entries, root, side, identity })
    }

    pub fn identity(dim: usize, side: Side) -> Self {
        let eye = CMatrix::identity(dim, dim);
        Self { entries: eye.clone(), root: eye, side, identity: true }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Hermitian square root `R^{1/2}`.
    pub fn sqrt(&self) -> &CMatrix {
        &self.root
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// Eigenvalues in ascending order (the ordering used by the closed-form
    /// gain expressions).
    pub fn eigenvalues_ascending(&self) -> Vec<f64> {
        let (mut vals, _) = hermitian_eigen(&self.entries);
        vals.reverse();
        vals
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `gain * R`, with the square root rescaled accordingly.
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        if !(gain >= 0.0 && gain.is_finite()) {
            return Err(domain(format!("invalid large-scale gain {gain}")));
        }
        if gain == 1.0 {
            return Ok(self.clone());
        }
        Ok(Self {
            entries: &self.entries * cplx(gain, 0.0),
            root: &self.root * cplx(gain.sqrt(), 0.0),
            side: self.side,
            identity: false,
        })
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }
}

/// Exponential correlation model: entry `(i, j)` is `(rho e^{i theta})^{j-i}`
/// on and above the diagonal, conjugated below it.
pub fn exp_correlation(rho: f64, theta: f64, dim: usize) -> Result<CorrelationMatrix> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(domain(format!("correlation magnitude {rho} outside [0, 1]")));
    }
    if dim == 0 {
        return Err(domain("antenna count must be positive"));
    }
    if rho == 0.0 {
        return Ok(CorrelationMatrix::identity(dim, Side::Receive));
    }
    let base = cplx(rho * theta.cos(), rho * theta.sin());
    let entries = CMatrix::from_fn(dim, dim, |i, j| {
        if i <= j {
            base.powu((j - i) as u32)
        } else {
            base.conj().powu((i - j) as u32)
        }
    });
    CorrelationMatrix::new(entries, Side::Receive)
}

/// Draws a phase uniformly from `[0, 2 pi)`.
pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * 2.0 * PI
}

/// Matrix of i.i.d. `CN(0, 1)` entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        cplx(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    })
}

/// One user's channel realization.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    /// `M x N` channel from the `N` transmit antennas to the `M` receive antennas.
    pub entries: CMatrix,
    pub user_id: usize,
    /// Receive correlation including the large-scale gain.
    pub rx_corr: CorrelationMatrix,
    pub large_scale_gain: f64,
}

impl ChannelMatrix {
    pub fn rx_antennas(&self) -> usize {
        self.entries.nrows()
    }

    pub fn tx_antennas(&self) -> usize {
        self.entries.ncols()
    }

    pub fn frobenius_sqr(&self) -> f64 {
        frob2(&self.entries)
    }
}

/// Draws `H = (g R_R)^{1/2} G R_T^{1/2}` with `G` i.i.d. `CN(0, 1)`.
pub fn draw_channel<R: Rng + ?Sized>(
    rx_corr: &CorrelationMatrix,
    tx_corr: &CorrelationMatrix,
    gain: f64,
    user_id: usize,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    let rx = rx_corr.scaled(gain)?;
    let mut h = complex_gaussian(rx.dim(), tx_corr.dim(), rng);
    if !rx.is_identity() {
        h = rx.sqrt() * h;
    }
    if !tx_corr.is_identity() {
        h *= tx_corr.sqrt();
    }
    Ok(ChannelMatrix { entries: h, user_id, rx_corr: rx, large_scale_gain: gain })
}

/// Circular cell with users uniformly distributed over an annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    /// Cell radius in meters.
    pub radius: f64,
    /// Minimal user distance in meters.
    pub min_distance: f64,
    pub pathloss_exponent: f64,
    /// Standard deviation of the log-normal shadowing in dB.
    pub shadow_std_db: f64,
    /// Average SNR of a cell-edge user without shadowing, in dB.
    pub edge_snr_db: f64,
}

impl CellGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_distance > 0.0 && self.radius > self.min_distance) {
            return Err(domain("cell requires radius > min_distance > 0"));
        }
        if !(self.pathloss_exponent > 2.0) {
            return Err(domain("path-loss exponent must exceed 2"));
        }
        if !(self.shadow_std_db >= 0.0) {
            return Err(domain("shadowing standard deviation must be non-negative"));
        }
        Ok(())
    }

    /// Transmit SNR `P` that places an unshadowed edge user at `edge_snr_db`.
    pub fn transmit_power(&self) -> f64 {
        10f64.powf(self.edge_snr_db / 10.0)
    }

    /// Large-scale gain relative to an unshadowed cell-edge user.
    pub fn gain(&self, distance: f64, shadow_db: f64) -> f64 {
        (distance / self.radius).powf(-self.pathloss_exponent) * 10f64.powf(shadow_db / 10.0)
    }

    /// CDF of the user distance under area-uniform placement.
    pub fn distance_cdf(&self, d: f64) -> f64 {
        let d0 = self.min_distance;
        let r = self.radius;
        ((d.clamp(d0, r).powi(2) - d0 * d0) / (r * r - d0 * d0)).clamp(0.0, 1.0)
    }
}

/// A dropped user: position and large-scale gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserDrop {
    pub distance: f64,
    pub shadow_db: f64,
    pub gain: f64,
}

/// Drops `k` users uniformly over the cell area.
pub fn draw_cell_users<R: Rng + ?Sized>(
    geometry: &CellGeometry,
    k: usize,
    rng: &mut R,
) -> Result<Vec<UserDrop>> {
    geometry.validate()?;
    if k == 0 {
        return Err(domain("at least one user is required"));
    }
    let shadow = Normal::new(0.0, geometry.shadow_std_db)
        .map_err(|e| domain(format!("shadowing distribution: {e}")))?;
    let (d0, r) = (geometry.min_distance, geometry.radius);
    Ok((0..k)
        .map(|_| {
            let u: f64 = rng.random();
            let distance = (d0 * d0 + u * (r * r - d0 * d0)).sqrt();
            let shadow_db = shadow.sample(rng);
            UserDrop { distance, shadow_db, gain: geometry.gain(distance, shadow_db) }
        })
        .collect())
}
