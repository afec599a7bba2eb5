//! Channel state information at the transmitter: Grassmannian limited
//! feedback with random codebooks, and MMSE estimation from reciprocal
//! uplink training.

use nalgebra::DMatrixView;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
use crate::linalg::{cplx, hermitian_eigen, inv_hpd, real, row_space_basis, CMatrix};
use crate::precoding::waterfill;

/// Largest accepted codebook size in bits.
pub const MAX_BITS: u32 = 24;
/// Upper limit on the storage of one codebook.
pub const CODEBOOK_MEMORY_BUDGET: usize = 1 << 30;

/// `2^bits` semi-unitary `N x d` codewords stored contiguously.
#[derive(Debug, Clone)]
pub struct Codebook {
    n: usize,
    d: usize,
    bits: u32,
    data: Vec<Complex64>,
}

impl Codebook {
    /// Wraps explicit codewords, checking semi-unitarity.
    pub fn from_entries(entries: &[CMatrix]) -> Result<Self> {
        let first = entries.first().ok_or_else(|| domain("codebook is empty"))?;
        let (n, d) = first.shape();
        if !entries.len().is_power_of_two() {
            return Err(domain("codebook size must be a power of two"));
        }
        let mut data = Vec::with_capacity(entries.len() * n * d);
        for u in entries {
            if u.shape() != (n, d) {
                return Err(domain("codewords must share their shape"));
            }
            if crate::linalg::semi_unitary_defect(u) > 1e-10 {
                return Err(domain("codeword is not semi-unitary"));
            }
            data.extend(u.iter());
        }
        Ok(Self { n, d, bits: entries.len().trailing_zeros(), data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.n * self.d)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Ambient dimension `N`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Subspace dimension `d`.
    pub fn subspace_dim(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize) -> DMatrixView<'_, Complex64> {
        let len = self.n * self.d;
        DMatrixView::from_slice(&self.data[i * len..(i + 1) * len], self.n, self.d)
    }

    fn raw(&self, i: usize) -> &[Complex64] {
        let len = self.n * self.d;
        &self.data[i * len..(i + 1) * len]
    }
}

/// Random vector quantization codebook: `2^bits` independent isotropic
/// `d`-dimensional subspaces of `C^n`.
pub fn rvq_codebook<R: Rng + ?Sized>(n: usize, d: usize, bits: u32, rng: &mut R) -> Result<Codebook> {
    if d == 0 || d >= n {
        return Err(domain(format!("codeword dimension {d} must lie in [1, {n})")));
    }
    if bits > MAX_BITS {
        return Err(Error::Resource(format!("{bits} bits exceed the {MAX_BITS}-bit codebook limit")));
    }
    let count = 1usize << bits;
    let bytes = count * n * d * std::mem::size_of::<Complex64>();
    if bytes > CODEBOOK_MEMORY_BUDGET {
        return Err(Error::Resource(format!("codebook would need {bytes} bytes")));
    }
    let mut data = Vec::with_capacity(count * n * d);
    let mut word = vec![Complex64::default(); n * d];
    for _ in 0..count {
        for z in word.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = cplx(re, im);
        }
        gram_schmidt(&mut word, n, d);
        data.extend_from_slice(&word);
    }
    Ok(Codebook { n, d, bits, data })
}

/// In-place modified Gram-Schmidt on the `d` columns of a column-major
/// `n x d` buffer.
fn gram_schmidt(buf: &mut [Complex64], n: usize, d: usize) {
    for j in 0..d {
        for i in 0..j {
            let (head, tail) = buf.split_at_mut(j * n);
            let qi = &head[i * n..(i + 1) * n];
            let vj = &mut tail[..n];
            let proj: Complex64 = qi.iter().zip(vj.iter()).map(|(q, v)| q.conj() * v).sum();
            for (v, q) in vj.iter_mut().zip(qi) {
                *v -= proj * q;
            }
        }
        let col = &mut buf[j * n..(j + 1) * n];
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in col.iter_mut() {
            *z /= norm;
        }
    }
}

/// `sum |Q^H U|^2` for an orthonormal basis `q` (`n x r`) and raw codeword.
fn projected_energy(q: &CMatrix, word: &[Complex64], n: usize, d: usize) -> f64 {
    let mut total = 0.0;
    for a in 0..q.ncols() {
        let qa = q.column(a);
        for j in 0..d {
            let col = &word[j * n..(j + 1) * n];
            let ip: Complex64 = qa.iter().zip(col).map(|(x, y)| x.conj() * y).sum();
            total += ip.norm_sqr();
        }
    }
    total
}

/// Chordal distance between the row space of `rows` and the column span of
/// the semi-unitary `u`.
pub fn chordal_distance(rows: &CMatrix, u: &CMatrix) -> Result<f64> {
    let q = row_space_basis(rows)?;
    let energy: f64 = (q.adjoint() * u).iter().map(|z| z.norm_sqr()).sum();
    Ok((u.ncols() as f64 - energy).max(0.0).sqrt())
}

/// Codeword closest in chordal distance to the row space of `rows`
/// (lowest index on ties). Returns `(index, distance)`.
pub fn quantize_subspace(rows: &CMatrix, codebook: &Codebook) -> Result<(usize, f64)> {
    if rows.ncols() != codebook.dim() {
        return Err(domain("channel and codebook dimensions differ"));
    }
    let q = row_space_basis(rows)?;
    if q.ncols() == 0 {
        return Err(domain("cannot quantize a zero channel"));
    }
    let (n, d) = (codebook.dim(), codebook.subspace_dim());
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..codebook.len() {
        let e = projected_energy(&q, codebook.raw(i), n, d);
        if e > best.1 {
            best = (i, e);
        }
    }
    Ok((best.0, (d as f64 - best.1).max(0.0).sqrt()))
}

/// Uplink training: matrix `T` (`d x d`), total power `tr(T^H T)` and
/// relative uplink noise variance.
#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub matrix: CMatrix,
    pub total_power: f64,
    pub noise: f64,
}

/// MSE-minimizing training: eigenvectors of `corr` with powers
/// water-filled as `q_i = max(0, nu - noise / lambda_i)`, `sum q_i = psi`.
pub fn training_matrix(corr: &CMatrix, psi: f64, noise: f64) -> Result<TrainingConfig> {
    if !(psi >= 0.0) || !(noise >= 0.0) {
        return Err(domain("training power and noise must be non-negative"));
    }
    let d = corr.nrows();
    let (vals, vecs) = hermitian_eigen(corr);
    let q = if noise == 0.0 {
        vec![psi / d as f64; d]
    } else {
        let gains: Vec<f64> = vals.iter().map(|&l| l.max(0.0) / noise).collect();
        waterfill(&gains, psi)
    };
    let mut matrix = vecs;
    for (j, qj) in q.iter().enumerate() {
        matrix.column_mut(j).scale_mut(qj.sqrt());
    }
    Ok(TrainingConfig { matrix, total_power: psi, noise })
}

/// Uplink observation `Y = X^T T + noise` (`N x d`) for the effective
/// downlink channel `x` (`d x N`).
pub fn uplink_observation<R: Rng + ?Sized>(x: &CMatrix, training: &TrainingConfig, rng: &mut R) -> CMatrix {
    let mut y = x.transpose() * &training.matrix;
    let s = (training.noise / 2.0).sqrt();
    for z in y.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += cplx(s * re, s * im);
    }
    y
}

/// MMSE estimate (`d x N`) of the effective channel from the uplink
/// observation, with prior row covariance `prior` (`d x d`, each column of
/// the channel i.i.d. with this covariance). Returns the estimate and the
/// error covariance of each channel column,
/// `(prior^{-1} + conj(T T^H) / noise)^{-1}`.
pub fn mmse_estimate(observation: &CMatrix, training: &TrainingConfig, prior: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let noise = training.noise;
    if !(noise > 0.0) {
        return Err(domain("uplink noise variance must be positive"));
    }
    let prior_inv = inv_hpd(prior).map_err(|_| domain("prior covariance is singular"))?;
    let t = &training.matrix;
    let info = (t * t.adjoint()).map(|z| z.conj()) / real(noise);
    let error = inv_hpd(&(prior_inv + info))?;
    let estimate = &error * t.map(|z| z.conj()) * observation.transpose() / real(noise);
    Ok((estimate, error))
}

/// Error covariance from a scalar prior variance per entry and scalar
/// training power, `(1/prior + psi/noise)^{-1}`.
pub fn scalar_error_variance(prior: f64, psi: f64, noise: f64) -> f64 {
    1.0 / (1.0 / prior + psi / noise)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiRegime {
    Perfect,
    Quantized,
    Estimated,
}

impl CsiRegime {
    pub fn label(self) -> &'static str {
        match self {
            CsiRegime::Perfect => "perfect",
            CsiRegime::Quantized => "quantized",
            CsiRegime::Estimated => "estimated",
        }
    }
}

#[derive(Debug, Clone)]
pub enum CsiPayload {
    Exact,
    Quantized { index: usize, distance: f64 },
    Estimated { error_cov: CMatrix },
}

/// What the transmitter learns about one user. `acquired` is the matrix
/// the precoder treats as the true (effective) channel.
#[derive(Debug, Clone)]
pub struct CsiReport {
    pub user: usize,
    pub acquired: CMatrix,
    pub payload: CsiPayload,
}

impl CsiReport {
    pub fn regime(&self) -> CsiRegime {
        match self.payload {
            CsiPayload::Exact => CsiRegime::Perfect,
            CsiPayload::Quantized { .. } => CsiRegime::Quantized,
            CsiPayload::Estimated { .. } => CsiRegime::Estimated,
        }
    }

    pub fn perfect(user: usize, effective: CMatrix) -> Self {
        Self { user, acquired: effective, payload: CsiPayload::Exact }
    }

    /// Subspace feedback of `effective` (`d x N`); the transmitter keeps
    /// the channel projected onto the reported codeword.
    pub fn quantized(user: usize, effective: &CMatrix, codebook: &Codebook) -> Result<Self> {
        let (index, distance) = quantize_subspace(effective, codebook)?;
        let u = codebook.entry(index);
        let acquired = effective * u * u.adjoint();
        Ok(Self { user, acquired, payload: CsiPayload::Quantized { index, distance } })
    }

    /// Feedback of a chosen codeword `index` for a single effective row; the
    /// transmitter learns the row norm along the codeword direction.
    pub fn quantized_row(user: usize, effective: &CMatrix, codebook: &Codebook, index: usize) -> Result<Self> {
        let u = codebook.entry(index);
        if effective.nrows() != 1 || u.ncols() != 1 {
            return Err(domain("row quantization needs a single row and vector codewords"));
        }
        let distance = chordal_distance(effective, &u.into_owned())?;
        let acquired = u.adjoint() * real(effective.norm());
        Ok(Self { user, acquired, payload: CsiPayload::Quantized { index, distance } })
    }

    /// MMSE estimate of `effective` from one uplink training round.
    pub fn estimated<R: Rng + ?Sized>(
        user: usize,
        effective: &CMatrix,
        training: &TrainingConfig,
        prior: &CMatrix,
        rng: &mut R,
    ) -> Result<Self> {
        let y = uplink_observation(effective, training, rng);
        let (acquired, error_cov) = mmse_estimate(&y, training, prior)?;
        Ok(Self { user, acquired, payload: CsiPayload::Estimated { error_cov } })
    }
}
