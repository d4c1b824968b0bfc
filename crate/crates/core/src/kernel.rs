//! Gaussian kernels and empirical HSIC.
//!
//! Two evaluation routes are provided. [`gaussian_gram`] + [`hsic_vstat`]
//! materialise the Gram matrices and use the doubly-centred form of the
//! V-statistic. [`hsic_gaussian`] fuses kernel evaluation and the three
//! V-statistic terms into one pass over the upper triangle with O(n) memory;
//! it is what the bootstrap loops call.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CdspError, Result};
use crate::regress::LinearFit;
use crate::sample::{BivariateSample, Direction};

/// Bandwidth used when every pairwise distance is zero.
pub const FALLBACK_BANDWIDTH: f64 = 1.0;

/// Dense symmetric kernel matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    values: Vec<f64>,
    n: usize,
    bandwidth: f64,
}

impl GramMatrix {
    /// Wraps an arbitrary square matrix. Used for non-Gaussian test kernels.
    pub fn from_rows(rows: Vec<Vec<f64>>, bandwidth: f64) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(CdspError::DimensionMismatch {
                left: n,
                right: r.len(),
            });
        }
        Ok(GramMatrix {
            values: rows.into_iter().flatten().collect(),
            n,
            bandwidth,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Same matrix with rows and columns reordered: `out[i][j] = self[p[i]][p[j]]`.
    pub fn permuted(&self, p: &[usize]) -> GramMatrix {
        let n = self.n;
        let mut values = Vec::with_capacity(n * n);
        for &pi in p {
            for &pj in p {
                values.push(self.get(pi, pj));
            }
        }
        GramMatrix {
            values,
            n,
            bandwidth: self.bandwidth,
        }
    }
}

/// Empirical HSIC value at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsicStatistic {
    pub value: f64,
    pub n: usize,
}

impl HsicStatistic {
    /// `n * value`, the scale on which critical values are expressed.
    pub fn scaled(&self) -> f64 {
        self.n as f64 * self.value
    }
}

/// Median of the pairwise absolute differences divided by `sqrt(2)`,
/// falling back to [`FALLBACK_BANDWIDTH`] when the median is zero.
pub fn median_heuristic_bandwidth(v: &[f64]) -> Result<f64> {
    median_heuristic_bandwidth_with(v, true)
}

/// As [`median_heuristic_bandwidth`]; with `allow_fallback == false` a zero
/// median is reported as [`CdspError::Degenerate`].
pub fn median_heuristic_bandwidth_with(v: &[f64], allow_fallback: bool) -> Result<f64> {
    if v.len() < 2 {
        return Err(CdspError::InvalidInput(
            "bandwidth selection needs at least two values".into(),
        ));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let med = median_pairwise_distance(&sorted);
    if med > 0.0 {
        Ok(med / std::f64::consts::SQRT_2)
    } else if allow_fallback {
        Ok(FALLBACK_BANDWIDTH)
    } else {
        Err(CdspError::Degenerate(
            "all values identical; median pairwise distance is zero".into(),
        ))
    }
}

/// Exact median of `{s[j] - s[i] : i < j}` for sorted `s`.
///
/// Runs in O(n log n + 64 n): non-negative doubles order like their bit
/// patterns, so each order statistic is found by bisecting on bits with a
/// linear two-pointer count.
fn median_pairwise_distance(sorted: &[f64]) -> f64 {
    let n = sorted.len() as u64;
    let m = n * (n - 1) / 2;
    if m % 2 == 1 {
        kth_pairwise_distance(sorted, m.div_ceil(2))
    } else {
        0.5 * (kth_pairwise_distance(sorted, m / 2) + kth_pairwise_distance(sorted, m / 2 + 1))
    }
}

fn count_pairs_within(sorted: &[f64], t: f64) -> u64 {
    let mut count = 0u64;
    let mut lo = 0usize;
    for (j, &sj) in sorted.iter().enumerate() {
        while sj - sorted[lo] > t {
            lo += 1;
        }
        count += (j - lo) as u64;
    }
    count
}

/// k-th smallest pairwise distance, 1-based.
fn kth_pairwise_distance(sorted: &[f64], k: u64) -> f64 {
    let span = sorted[sorted.len() - 1] - sorted[0];
    let (mut lo, mut hi) = (0u64, span.to_bits());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if count_pairs_within(sorted, f64::from_bits(mid)) >= k {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    f64::from_bits(lo)
}

/// `values[i][j] = exp(-(v_i - v_j)^2 / (2 bandwidth^2))`.
pub fn gaussian_gram(v: &[f64], bandwidth: f64) -> Result<GramMatrix> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(CdspError::InvalidInput(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let n = v.len();
    let gamma = 1.0 / (2.0 * bandwidth * bandwidth);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let d = v[i] - v[j];
            let k = (-gamma * d * d).exp();
            values[i * n + j] = k;
            values[j * n + i] = k;
        }
    }
    Ok(GramMatrix {
        values,
        n,
        bandwidth,
    })
}

/// Biased (V-statistic) HSIC
/// `(1/n²)ΣΣ k_ij h_ij + (1/n⁴)ΣΣΣΣ k_ij h_qr − (2/n³)ΣΣΣ k_ij h_iq`,
/// evaluated as `(1/n²) Σ_ij k_ij h̃_ij` with `h̃` the doubly-centred `H`.
/// `K` is assumed symmetric.
pub fn hsic_vstat(k: &GramMatrix, h: &GramMatrix) -> Result<HsicStatistic> {
    if k.n != h.n {
        return Err(CdspError::DimensionMismatch {
            left: k.n,
            right: h.n,
        });
    }
    let n = k.n;
    if n == 0 {
        return Err(CdspError::InvalidInput("empty Gram matrices".into()));
    }
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| h.row(i).iter().sum::<f64>() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let mut total = 0.0;
    for i in 0..n {
        let (krow, hrow) = (k.row(i), h.row(i));
        let ri = row_means[i];
        let mut acc = 0.0;
        for j in 0..n {
            acc += krow[j] * (hrow[j] - ri - row_means[j] + grand);
        }
        total += acc;
    }
    Ok(HsicStatistic {
        value: total / (nf * nf),
        n,
    })
}

/// Rows per work block in [`hsic_gaussian`]. Fixed so that the summation
/// order, and hence the result, is independent of the thread count.
const HSIC_BLOCK: usize = 2048;

/// Fused HSIC with Gaussian kernels of the given bandwidths on `u` and `v`.
///
/// Numerically equal to `hsic_vstat(gaussian_gram(u), gaussian_gram(v))`
/// up to rounding. Returns exactly zero when either argument is constant.
pub fn hsic_gaussian(u: &[f64], v: &[f64], bw_u: f64, bw_v: f64) -> Result<HsicStatistic> {
    if u.len() != v.len() {
        return Err(CdspError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let n = u.len();
    if n == 0 {
        return Err(CdspError::InvalidInput("empty input".into()));
    }
    for bw in [bw_u, bw_v] {
        if !(bw > 0.0 && bw.is_finite()) {
            return Err(CdspError::InvalidInput(format!(
                "bandwidth must be positive, got {bw}"
            )));
        }
    }
    if is_constant(u) || is_constant(v) {
        return Ok(HsicStatistic { value: 0.0, n });
    }
    let gu = 1.0 / (2.0 * bw_u * bw_u);
    let gv = 1.0 / (2.0 * bw_v * bw_v);

    let blocks: Vec<(usize, usize)> = (0..n)
        .step_by(HSIC_BLOCK)
        .map(|s| (s, (s + HSIC_BLOCK).min(n)))
        .collect();
    let partial = |&(start, end): &(usize, usize)| upper_triangle_block(u, v, gu, gv, start, end);
    let parts: Vec<BlockSums> = if blocks.len() == 1 {
        blocks.iter().map(partial).collect()
    } else {
        blocks.par_iter().map(partial).collect()
    };

    // Diagonal: k_ii = h_ii = 1.
    let mut sum_kh = n as f64;
    let mut row_k = vec![1.0; n];
    let mut row_h = vec![1.0; n];
    for p in &parts {
        sum_kh += 2.0 * p.cross;
        for (dst, src) in row_k.iter_mut().zip(&p.row_k) {
            *dst += src;
        }
        for (dst, src) in row_h.iter_mut().zip(&p.row_h) {
            *dst += src;
        }
    }
    let sum_k: f64 = row_k.iter().sum();
    let sum_h: f64 = row_h.iter().sum();
    let sum_rows: f64 = row_k.iter().zip(&row_h).map(|(a, b)| a * b).sum();
    let nf = n as f64;
    let n2 = nf * nf;
    let value = sum_kh / n2 + (sum_k / n2) * (sum_h / n2) - 2.0 * sum_rows / (n2 * nf);
    Ok(HsicStatistic { value, n })
}

struct BlockSums {
    cross: f64,
    row_k: Vec<f64>,
    row_h: Vec<f64>,
}

/// Contributions of pairs `(i, j)` with `start <= i < end`, `j > i`.
///
/// Wider vector units are used when present. No operation is contracted or
/// reassociated, so every path returns bit-identical sums.
fn upper_triangle_block(u: &[f64], v: &[f64], gu: f64, gv: f64, start: usize, end: usize) -> BlockSums {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the required CPU feature was detected at runtime.
            return unsafe { block_avx512(u, v, gu, gv, start, end) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: as above.
            return unsafe { block_avx2(u, v, gu, gv, start, end) };
        }
    }
    block_generic(u, v, gu, gv, start, end)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn block_avx512(u: &[f64], v: &[f64], gu: f64, gv: f64, start: usize, end: usize) -> BlockSums {
    block_generic(u, v, gu, gv, start, end)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn block_avx2(u: &[f64], v: &[f64], gu: f64, gv: f64, start: usize, end: usize) -> BlockSums {
    block_generic(u, v, gu, gv, start, end)
}

#[inline(always)]
fn block_generic(u: &[f64], v: &[f64], gu: f64, gv: f64, start: usize, end: usize) -> BlockSums {
    let n = u.len();
    let mut row_k = vec![0.0; n];
    let mut row_h = vec![0.0; n];
    let mut kbuf = vec![0.0; n];
    let mut hbuf = vec![0.0; n];
    let mut cross = 0.0;
    for i in start..end {
        let m = n - i - 1;
        if m == 0 {
            continue;
        }
        let (ui, vi) = (u[i], v[i]);
        let (ks, hs) = (&mut kbuf[..m], &mut hbuf[..m]);
        for ((kk, hh), (&uj, &vj)) in ks.iter_mut().zip(hs.iter_mut()).zip(u[i + 1..].iter().zip(&v[i + 1..])) {
            let du = ui - uj;
            let dv = vi - vj;
            *kk = exp_nonpositive(-gu * du * du);
            *hh = exp_nonpositive(-gv * dv * dv);
        }
        let (s_kh, s_k, s_h) = lane_sums(ks, hs);
        cross += s_kh;
        row_k[i] += s_k;
        row_h[i] += s_h;
        for (dst, &kk) in row_k[i + 1..].iter_mut().zip(ks.iter()) {
            *dst += kk;
        }
        for (dst, &hh) in row_h[i + 1..].iter_mut().zip(hs.iter()) {
            *dst += hh;
        }
    }
    BlockSums { cross, row_k, row_h }
}

/// `(Σ k_j h_j, Σ k_j, Σ h_j)` with four independent accumulator lanes.
#[inline(always)]
fn lane_sums(ks: &[f64], hs: &[f64]) -> (f64, f64, f64) {
    let mut kh = [0.0f64; 4];
    let mut sk = [0.0f64; 4];
    let mut sh = [0.0f64; 4];
    let mut kc = ks.chunks_exact(4);
    let mut hc = hs.chunks_exact(4);
    for (k4, h4) in (&mut kc).zip(&mut hc) {
        for l in 0..4 {
            kh[l] += k4[l] * h4[l];
            sk[l] += k4[l];
            sh[l] += h4[l];
        }
    }
    let mut tail = (0.0, 0.0, 0.0);
    for (&k, &h) in kc.remainder().iter().zip(hc.remainder()) {
        tail.0 += k * h;
        tail.1 += k;
        tail.2 += h;
    }
    (
        (kh[0] + kh[1]) + (kh[2] + kh[3]) + tail.0,
        (sk[0] + sk[1]) + (sk[2] + sk[3]) + tail.1,
        (sh[0] + sh[1]) + (sh[2] + sh[3]) + tail.2,
    )
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// `exp(x)` for `x <= 0`, branch-free so the caller's loop vectorises.
///
/// Cody–Waite reduction `x = k ln2 + r`, `|r| <= ln2/2`, then a degree-12
/// Taylor polynomial (truncation below 2e-16 relative). Inputs below −708
/// flush to zero.
#[inline(always)]
pub(crate) fn exp_nonpositive(x: f64) -> f64 {
    const LOG2E: f64 = std::f64::consts::LOG2_E;
    const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;
    const SHIFTER: f64 = 6_755_399_441_055_744.0; // 1.5 * 2^52
    const C: [f64; 13] = [
        1.0,
        1.0,
        1.0 / 2.0,
        1.0 / 6.0,
        1.0 / 24.0,
        1.0 / 120.0,
        1.0 / 720.0,
        1.0 / 5040.0,
        1.0 / 40320.0,
        1.0 / 362_880.0,
        1.0 / 3_628_800.0,
        1.0 / 39_916_800.0,
        1.0 / 479_001_600.0,
    ];
    let underflow = x < -708.0;
    let x = if underflow { -708.0 } else { x };
    let t = x * LOG2E + SHIFTER;
    let k = t - SHIFTER;
    let r = (x - k * LN2_HI) - k * LN2_LO;
    let mut p = C[12];
    for c in C[..12].iter().rev() {
        p = p * r + c;
    }
    let scale = f64::from_bits(t.to_bits().wrapping_add(1023) << 52);
    let y = p * scale;
    if underflow {
        0.0
    } else {
        y
    }
}

/// HSIC between a directional fit's predictor and its residuals, each with
/// its own median-heuristic bandwidth.
pub fn directional_statistic(sample: &BivariateSample, direction: Direction, fit: &LinearFit) -> Result<HsicStatistic> {
    if fit.direction != direction {
        return Err(CdspError::InvalidInput(format!(
            "fit direction {:?} does not match requested {:?}",
            fit.direction, direction
        )));
    }
    let (predictor, _) = sample.oriented(direction);
    predictor_residual_hsic(predictor, &fit.residuals)
}

pub(crate) fn predictor_residual_hsic(predictor: &[f64], residuals: &[f64]) -> Result<HsicStatistic> {
    let bw_p = median_heuristic_bandwidth(predictor)?;
    let bw_r = median_heuristic_bandwidth(residuals)?;
    hsic_gaussian(predictor, residuals, bw_p, bw_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Literal triple/quadruple-sum definition.
    fn hsic_literal(k: &GramMatrix, h: &GramMatrix) -> f64 {
        let n = k.n();
        let nf = n as f64;
        let mut t1 = 0.0;
        let mut t2 = 0.0;
        let mut t3 = 0.0;
        for i in 0..n {
            for j in 0..n {
                t1 += k.get(i, j) * h.get(i, j);
                for q in 0..n {
                    t3 += k.get(i, j) * h.get(i, q);
                    for r in 0..n {
                        t2 += k.get(i, j) * h.get(q, r);
                    }
                }
            }
        }
        t1 / nf.powi(2) + t2 / nf.powi(4) - 2.0 * t3 / nf.powi(3)
    }

    fn pairwise_median_bruteforce(v: &[f64]) -> f64 {
        let mut d = Vec::new();
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                d.push((v[i] - v[j]).abs());
            }
        }
        d.sort_by(f64::total_cmp);
        let m = d.len();
        if m % 2 == 1 {
            d[m / 2]
        } else {
            0.5 * (d[m / 2 - 1] + d[m / 2])
        }
    }

    #[test]
    fn bandwidth_examples() {
        let bw = median_heuristic_bandwidth(&[0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(bw, 2.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(median_heuristic_bandwidth(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        // distances {1,1,1,1,2,2,2,3,3,4}, median 2
        let bw = median_heuristic_bandwidth(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(bw, 2.0 / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn bandwidth_strict_mode_rejects_constant_input() {
        let err = median_heuristic_bandwidth_with(&[3.0; 4], false).unwrap_err();
        assert!(err.is_degenerate());
        assert!(median_heuristic_bandwidth(&[1.0]).is_err());
    }

    #[test]
    fn pairwise_median_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let n = 2 + trial % 40;
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            if trial % 3 == 0 {
                // ties
                for x in v.iter_mut() {
                    *x = x.round();
                }
            }
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            assert_eq!(median_pairwise_distance(&s), pairwise_median_bruteforce(&v), "n={n}");
        }
    }

    #[test]
    fn gram_examples() {
        let g = gaussian_gram(&[0.0, 0.0], 0.7).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| g.get(i, j) == 1.0)));

        let bw = 1.3;
        let g = gaussian_gram(&[0.0, bw * 2f64.sqrt()], bw).unwrap();
        assert_abs_diff_eq!(g.get(0, 1), (-1.0f64).exp(), epsilon = 1e-15);

        let g = gaussian_gram(&[0.0, 1.0, 3.0], 1.0).unwrap();
        assert_eq!(g.get(0, 2), (-4.5f64).exp());
        assert_eq!(g.get(1, 1), 1.0);
        assert!(gaussian_gram(&[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn gram_is_psd_for_small_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [5, 20, 50] {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let bw = median_heuristic_bandwidth(&v).unwrap();
            let g = gaussian_gram(&v, bw).unwrap();
            let m = nalgebra::DMatrix::from_row_slice(n, n, &g.values);
            assert_eq!(m, m.transpose());
            let min_eig = m.symmetric_eigenvalues().min();
            assert!(min_eig > -1e-9, "n={n} min eigenvalue {min_eig}");
        }
    }

    #[test]
    fn all_ones_kernels_give_zero() {
        let ones = GramMatrix::from_rows(vec![vec![1.0; 4]; 4], 1.0).unwrap();
        assert_eq!(hsic_vstat(&ones, &ones).unwrap().value, 0.0);
    }

    #[test]
    fn hsic_matches_literal_n6() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let k = gaussian_gram(&u, 0.9).unwrap();
        let h = gaussian_gram(&v, 1.4).unwrap();
        assert_abs_diff_eq!(hsic_vstat(&k, &h).unwrap().value, hsic_literal(&k, &h), epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = gaussian_gram(&[0.0, 1.0], 1.0).unwrap();
        let b = gaussian_gram(&[0.0, 1.0, 2.0], 1.0).unwrap();
        assert!(matches!(hsic_vstat(&a, &b), Err(CdspError::DimensionMismatch { .. })));
        assert!(hsic_gaussian(&[0.0, 1.0], &[1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn dependent_pair_beats_shuffled_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let x: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = x.clone();
        let mut perm: Vec<usize> = (0..20).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut rng);
        let y_shuffled: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let bw = median_heuristic_bandwidth(&x).unwrap();
        let dep = hsic_vstat(&gaussian_gram(&x, bw).unwrap(), &gaussian_gram(&y, bw).unwrap()).unwrap();
        let ind = hsic_vstat(&gaussian_gram(&x, bw).unwrap(), &gaussian_gram(&y_shuffled, bw).unwrap()).unwrap();
        assert!(dep.value > ind.value);
    }

    #[test]
    fn fused_matches_matrix_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in [3usize, 7, 64, 301] {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
            let v: Vec<f64> = u.iter().map(|x| x * x + rng.random_range(-1.0..1.0)).collect();
            let (bu, bv) = (median_heuristic_bandwidth(&u).unwrap(), median_heuristic_bandwidth(&v).unwrap());
            let fused = hsic_gaussian(&u, &v, bu, bv).unwrap().value;
            let dense = hsic_vstat(&gaussian_gram(&u, bu).unwrap(), &gaussian_gram(&v, bv).unwrap())
                .unwrap()
                .value;
            assert_abs_diff_eq!(fused, dense, epsilon = 1e-13);
        }
    }

    #[test]
    fn fused_blocked_path_matches_dense() {
        // n > HSIC_BLOCK exercises the multi-block reduction.
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let n = HSIC_BLOCK + 117;
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let v: Vec<f64> = u.iter().map(|x| x.sin() + rng.random_range(-0.5..0.5)).collect();
        let fused = hsic_gaussian(&u, &v, 0.8, 0.6).unwrap().value;
        let dense = hsic_vstat(&gaussian_gram(&u, 0.8).unwrap(), &gaussian_gram(&v, 0.6).unwrap())
            .unwrap()
            .value;
        assert_abs_diff_eq!(fused, dense, epsilon = 1e-13);
    }

    #[test]
    fn vector_paths_are_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let n = 203;
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let v: Vec<f64> = u.iter().map(|x| x.abs() + rng.random_range(-1.0..1.0)).collect();
        let base = block_generic(&u, &v, 0.7, 1.3, 0, n);
        let dispatched = upper_triangle_block(&u, &v, 0.7, 1.3, 0, n);
        assert_eq!(base.cross.to_bits(), dispatched.cross.to_bits());
        assert_eq!(base.row_k, dispatched.row_k);
        assert_eq!(base.row_h, dispatched.row_h);
    }

    #[test]
    fn fast_exp_accuracy() {
        let mut x: f64 = 0.0;
        while x > -750.0 {
            let want = x.exp();
            let got = exp_nonpositive(x);
            if x >= -708.0 {
                assert!((got - want).abs() <= 4e-16 * want, "x={x}: {got} vs {want}");
            } else {
                assert!(got == 0.0 && want < 1e-307);
            }
            x -= 0.0137;
        }
        assert_eq!(exp_nonpositive(0.0), 1.0);
        assert_eq!(exp_nonpositive(-0.0), 1.0);
    }

    #[test]
    fn constant_argument_is_exactly_zero() {
        let u = [0.3, -1.0, 2.0, 0.5];
        assert_eq!(hsic_gaussian(&u, &[0.0; 4], 1.0, 1.0).unwrap().value, 0.0);
    }
}
