//! Receive combiners: the preliminary combiners used before scheduling
//! (maximum ratio, quantization-based, maximum expected SINR) and the MMSE
//! combiner applied once the precoders are known.

use crate::csi::Codebook;
use crate::error::{domain, Result};
use crate::linalg::{gram, inv_hpd, real, row_space_basis, solve_hpd, svd, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinerKind {
    Mrc,
    Qbc,
    Mesc,
    Mmse,
    /// All receive antennas kept (`C = I`).
    Identity,
    Custom,
}

/// Semi-unitary `M x d` receive combining matrix.
#[derive(Debug, Clone)]
pub struct Combiner {
    pub matrix: CMatrix,
    pub kind: CombinerKind,
}

impl Combiner {
    pub fn identity(m: usize) -> Self {
        Self { matrix: CMatrix::identity(m, m), kind: CombinerKind::Identity }
    }

    pub fn streams(&self) -> usize {
        self.matrix.ncols()
    }

    /// Effective channel `C^H H`.
    pub fn effective(&self, h: &CMatrix) -> CMatrix {
        self.matrix.adjoint() * h
    }
}

fn unit(v: CMatrix) -> Result<CMatrix> {
    let norm = v.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(domain("combiner direction vanished"));
    }
    Ok(v / real(norm))
}

/// The `d` dominant left singular vectors of `h`.
pub fn mrc(h: &CMatrix, d: usize) -> Result<Combiner> {
    let m = h.nrows();
    if d == 0 || d > m {
        return Err(domain(format!("stream count {d} outside [1, {m}]")));
    }
    if m == 1 {
        return Ok(Combiner { matrix: CMatrix::identity(1, 1), kind: CombinerKind::Mrc });
    }
    let dec = svd(h)?;
    Ok(Combiner { matrix: dec.u.columns(0, d).into_owned(), kind: CombinerKind::Mrc })
}

fn check_codebook(h: &CMatrix, codebook: &Codebook) -> Result<()> {
    if codebook.is_empty() {
        return Err(domain("codebook is empty"));
    }
    if codebook.subspace_dim() != 1 || codebook.dim() != h.ncols() {
        return Err(domain("combining needs a vector codebook matching the transmit dimension"));
    }
    Ok(())
}

/// Quantization-based combining: the codeword closest to the row space of
/// `h` together with the combiner that steers the effective channel onto
/// the projection of that codeword. Returns the combiner and codeword index.
pub fn qbc(h: &CMatrix, codebook: &Codebook) -> Result<(Combiner, usize)> {
    check_codebook(h, codebook)?;
    let qh = row_space_basis(h)?.adjoint();
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..codebook.len() {
        let e = (&qh * codebook.entry(i)).norm_squared();
        if e > best.1 {
            best = (i, e);
        }
    }
    let u = codebook.entry(best.0);
    let c = if h.nrows() == 1 {
        CMatrix::identity(1, 1)
    } else {
        unit(solve_hpd(&gram(h), &(h * u))?)?
    };
    Ok((Combiner { matrix: c, kind: CombinerKind::Qbc }, best.0))
}

/// Expected-SINR objective `rho (Hu)^H B^{-1} (Hu)` with
/// `B = I + rho H (I - u u^H) H^H`, and the maximizing combiner
/// `B^{-1} H u` (normalized).
pub fn mesc_objective(h: &CMatrix, u: &CMatrix, rho: f64) -> Result<(f64, CMatrix)> {
    let m = h.nrows();
    let n = h.ncols();
    let proj = CMatrix::identity(n, n) - u * u.adjoint();
    let b = CMatrix::identity(m, m) + h * proj * h.adjoint() * real(rho);
    let x = h * u;
    let y = solve_hpd(&b, &x)?;
    let value = rho * (x.adjoint() * &y)[(0, 0)].re;
    Ok((value, unit(y)?))
}

/// Maximum expected SINR combining with `rho = power / num_streams`.
pub fn mesc(h: &CMatrix, codebook: &Codebook, power: f64, num_streams: usize) -> Result<(Combiner, usize)> {
    check_codebook(h, codebook)?;
    if !(power > 0.0) || num_streams == 0 {
        return Err(domain("MESC needs positive power and stream count"));
    }
    let rho = power / num_streams as f64;
    let m = h.nrows();
    // By a rank-one update of B, the objective is increasing in
    // s = (Hu)^H (I + rho H H^H)^{-1} (Hu), and B^{-1} H u is parallel to
    // (I + rho H H^H)^{-1} H u.
    let a_inv = inv_hpd(&(CMatrix::identity(m, m) + gram(h) * real(rho)))?;
    let hh_a = h.adjoint() * &a_inv * h;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..codebook.len() {
        let u = codebook.entry(i);
        let s = (u.adjoint() * &hh_a * u)[(0, 0)].re;
        if s > best.1 {
            best = (i, s);
        }
    }
    let u = codebook.entry(best.0);
    let c = if m == 1 { CMatrix::identity(1, 1) } else { unit(&a_inv * h * u)? };
    Ok((Combiner { matrix: c, kind: CombinerKind::Mesc }, best.0))
}

/// Dominant `W_own.ncols()` (at most `M`) left singular vectors of
/// `(I + interference)^{-1} H W_own`.
pub fn mmse_combiner(h: &CMatrix, w_own: &CMatrix, interference: &CMatrix) -> Result<Combiner> {
    let m = h.nrows();
    let d = w_own.ncols().min(m);
    if d == 0 {
        return Err(domain("user has no streams"));
    }
    let target = solve_hpd(&(CMatrix::identity(m, m) + interference), &(h * w_own))?;
    if m == 1 {
        return Ok(Combiner { matrix: CMatrix::identity(1, 1), kind: CombinerKind::Mmse });
    }
    let dec = svd(&target)?;
    Ok(Combiner { matrix: dec.u.columns(0, d).into_owned(), kind: CombinerKind::Mmse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csi::{quantize_subspace, rvq_codebook};
    use crate::linalg::{cplx, from_real_rows, semi_unitary_defect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        crate::channel::complex_gaussian(rows, cols, &mut rng)
    }

    #[test]
    fn mrc_diagonal_and_rank_one() {
        let h = from_real_rows(2, 3, &[2., 0., 0., 0., 1., 0.]);
        let c = mrc(&h, 1).unwrap();
        assert!((&c.matrix - from_real_rows(2, 1, &[1., 0.])).norm() < 1e-15);
        let a = CMatrix::from_column_slice(3, 1, &[cplx(1., 1.), cplx(0., 2.), cplx(-1., 0.)]);
        let b = gaussian(4, 1, 2);
        let h = &a * b.adjoint();
        let c = mrc(&h, 1).unwrap();
        let overlap = (c.matrix.adjoint() * &a)[(0, 0)].norm() / a.norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mrc_beats_random_directions() {
        let h = gaussian(3, 5, 4);
        let best = mrc(&h, 1).unwrap().effective(&h).norm_squared();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let v = crate::channel::complex_gaussian(3, 1, &mut rng);
            let v = &v / real(v.norm());
            assert!((v.adjoint() * &h).norm_squared() <= best + 1e-12);
        }
    }

    #[test]
    fn qbc_in_span_codeword_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = gaussian(2, 4, 7);
        let mut words: Vec<CMatrix> = (0..3).map(|_| {
            let g = crate::channel::complex_gaussian(4, 1, &mut rng);
            &g / real(g.norm())
        }).collect();
        let inside = h.adjoint() * from_real_rows(2, 1, &[0.6, -1.3]);
        words.push(&inside / real(inside.norm()));
        let cb = Codebook::from_entries(&words).unwrap();
        let (c, idx) = qbc(&h, &cb).unwrap();
        assert_eq!(idx, 3);
        let eff = c.effective(&h);
        let dist = crate::csi::chordal_distance(&eff, &words[3]).unwrap();
        assert!(dist < 1e-7);
        assert!(semi_unitary_defect(&c.matrix) < 1e-10);
    }

    #[test]
    fn qbc_single_antenna_is_plain_quantization() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cb = rvq_codebook(4, 1, 5, &mut rng).unwrap();
        for s in 0..20 {
            let h = gaussian(1, 4, 100 + s);
            let (c, idx) = qbc(&h, &cb).unwrap();
            assert_eq!(idx, quantize_subspace(&h, &cb).unwrap().0);
            assert_eq!(c.matrix, CMatrix::identity(1, 1));
        }
    }

    #[test]
    fn mesc_fast_search_matches_direct_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cb = rvq_codebook(4, 1, 5, &mut rng).unwrap();
        for s in 0..20 {
            let h = gaussian(2, 4, 200 + s);
            let (c, idx) = mesc(&h, &cb, 10.0, 4).unwrap();
            let direct: Vec<f64> = (0..cb.len())
                .map(|i| mesc_objective(&h, &cb.entry(i).into_owned(), 2.5).unwrap().0)
                .collect();
            let arg = direct.iter().enumerate().fold(0, |b, (i, &v)| if v > direct[b] { i } else { b });
            assert_eq!(idx, arg);
            let (_, c_direct) = mesc_objective(&h, &cb.entry(idx).into_owned(), 2.5).unwrap();
            assert!((c_direct.adjoint() * &c.matrix)[(0, 0)].norm() > 1.0 - 1e-10);
            let (_, q_idx) = qbc(&h, &cb).unwrap();
            assert!(direct[idx] >= direct[q_idx]);
        }
    }

    #[test]
    fn mesc_tends_to_qbc_at_high_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let cb = rvq_codebook(4, 1, 6, &mut rng).unwrap();
        for s in 0..30 {
            let h = gaussian(2, 4, 300 + s);
            assert_eq!(mesc(&h, &cb, 1e12, 4).unwrap().1, qbc(&h, &cb).unwrap().1);
        }
    }

    #[test]
    fn mmse_combiner_avoids_interference_dimension() {
        let h = from_real_rows(2, 2, &[1., 0., 0., 1.]);
        let w = from_real_rows(2, 1, &[1., 0.]);
        let mut interference = CMatrix::zeros(2, 2);
        interference[(1, 1)] = real(5.0);
        let c = mmse_combiner(&h, &w, &interference).unwrap();
        assert!(c.matrix[(1, 0)].norm() < 1e-8);
        let full = mmse_combiner(&h, &CMatrix::identity(2, 2), &CMatrix::zeros(2, 2)).unwrap();
        assert!(semi_unitary_defect(&full.matrix) < 1e-10);
        assert_eq!(full.streams(), 2);
    }
}
