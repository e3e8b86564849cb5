//! The eight statistical tests of the battery.
//!
//! Each test computes its statistic exactly as specified by the reference
//! formulas and returns one or more P-values wrapped in a [`TestOutcome`].
//! A sequence too short for a test yields [`NistError::Ineligible`]; an
//! ineligible test is skipped, never scored.

use super::special::{erfc, igamc, normal_cdf};
use super::{NistError, TestId, TestOutcome};
use crate::bitseq::BitSequence;

/// Frequency (monobit) test: s_obs = |sum of +/-1| / sqrt(n),
/// P = erfc(s_obs / sqrt(2)).
pub fn monobit_test(seq: &BitSequence) -> Result<TestOutcome, NistError> {
    let n = seq.len();
    if n < 1 {
        return Err(NistError::Ineligible {
            test: TestId::Monobit,
            length: n,
            required: 1,
        });
    }
    let sum: i64 = seq
        .bits()
        .iter()
        .map(|&b| if b == 1 { 1i64 } else { -1i64 })
        .sum();
    let s_obs = (sum.abs() as f64) / (n as f64).sqrt();
    let p = erfc(s_obs / std::f64::consts::SQRT_2);
    Ok(TestOutcome::new(TestId::Monobit, vec![p]))
}

/// Frequency within a block: chi^2 = 4 M sum (pi_j - 1/2)^2 over the
/// N = floor(n/M) full blocks, P = igamc(N/2, chi^2/2). A trailing partial
/// block is discarded.
pub fn block_frequency_test(seq: &BitSequence, m: usize) -> Result<TestOutcome, NistError> {
    let n = seq.len();
    if m < 1 {
        return Err(NistError::InvalidParameter {
            test: TestId::BlockFrequency,
            reason: "block size M must be >= 1".into(),
        });
    }
    if n < m {
        return Err(NistError::Ineligible {
            test: TestId::BlockFrequency,
            length: n,
            required: m,
        });
    }
    let blocks = n / m;
    let mut chi2 = 0.0;
    for j in 0..blocks {
        let ones = seq.bits()[j * m..(j + 1) * m]
            .iter()
            .filter(|&&b| b == 1)
            .count();
        let pi = ones as f64 / m as f64;
        chi2 += (pi - 0.5) * (pi - 0.5);
    }
    chi2 *= 4.0 * m as f64;
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    Ok(TestOutcome::new(TestId::BlockFrequency, vec![p]))
}

/// Runs test with the frequency prerequisite |pi - 1/2| < 2/sqrt(n); when the
/// prerequisite fails the P-value is 0 and the test is failed.
pub fn runs_test(seq: &BitSequence) -> Result<TestOutcome, NistError> {
    let n = seq.len();
    if n < 2 {
        return Err(NistError::Ineligible {
            test: TestId::Runs,
            length: n,
            required: 2,
        });
    }
    let nf = n as f64;
    let pi = seq.count_ones() as f64 / nf;
    if (pi - 0.5).abs() >= 2.0 / nf.sqrt() {
        return Ok(TestOutcome::new(TestId::Runs, vec![0.0]));
    }
    let pq = pi * (1.0 - pi);
    if pq == 0.0 {
        // Constant sequence that slipped past the prerequisite (tiny n):
        // a single run, limiting P-value 0.
        return Ok(TestOutcome::new(TestId::Runs, vec![0.0]));
    }
    let bits = seq.bits();
    let v_n = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let p = erfc((v_n as f64 - 2.0 * nf * pq).abs() / (2.0 * (2.0 * nf).sqrt() * pq));
    Ok(TestOutcome::new(TestId::Runs, vec![p]))
}

/// Longest-run-of-ones categories for the 8-bit-block regime: the first
/// 16 blocks of 8 bits are classified by their longest run (<=1, 2, 3, >=4)
/// and compared against the reference probabilities with a 3-degree chi^2.
pub fn longest_run_test(seq: &BitSequence) -> Result<TestOutcome, NistError> {
    const M: usize = 8;
    const N: usize = 16;
    const K: usize = 3;
    const PI: [f64; 4] = [0.21484375, 0.3671875, 0.23046875, 0.1875];
    let n = seq.len();
    if n < M * N {
        return Err(NistError::Ineligible {
            test: TestId::LongestRun,
            length: n,
            required: M * N,
        });
    }
    let mut nu = [0usize; K + 1];
    for block in 0..N {
        let bits = &seq.bits()[block * M..(block + 1) * M];
        let mut longest = 0usize;
        let mut current = 0usize;
        for &b in bits {
            if b == 1 {
                current += 1;
                longest = longest.max(current);
            } else {
                current = 0;
            }
        }
        let category = match longest {
            0 | 1 => 0,
            2 => 1,
            3 => 2,
            _ => 3,
        };
        nu[category] += 1;
    }
    let mut chi2 = 0.0;
    for i in 0..=K {
        let expected = N as f64 * PI[i];
        let diff = nu[i] as f64 - expected;
        chi2 += diff * diff / expected;
    }
    let p = igamc(K as f64 / 2.0, chi2 / 2.0);
    Ok(TestOutcome::new(TestId::LongestRun, vec![p]))
}

/// Discrete Fourier transform (spectral) test. Odd-length input drops its
/// last bit. Counts moduli of the first n/2 transform bins below the 95%
/// peak threshold and compares the count to its expectation.
pub fn dft_spectral_test(seq: &BitSequence) -> Result<TestOutcome, NistError> {
    let full = seq.len();
    if full < 64 {
        return Err(NistError::Ineligible {
            test: TestId::DftSpectral,
            length: full,
            required: 64,
        });
    }
    let n = full - full % 2;
    let x: Vec<f64> = seq.bits()[..n]
        .iter()
        .map(|&b| if b == 1 { 1.0 } else { -1.0 })
        .collect();
    let half = n / 2;
    let threshold = ((1.0f64 / 0.05).ln() * n as f64).sqrt();
    let mut below = 0usize;
    for j in 0..half {
        // Rotate (cos, sin) incrementally instead of calling trig per term.
        let angle = -2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let (step_sin, step_cos) = angle.sin_cos();
        let (mut re, mut im) = (0.0f64, 0.0f64);
        let (mut c, mut s) = (1.0f64, 0.0f64);
        for &v in &x {
            re += v * c;
            im += v * s;
            let c_next = c * step_cos - s * step_sin;
            s = c * step_sin + s * step_cos;
            c = c_next;
        }
        if (re * re + im * im).sqrt() < threshold {
            below += 1;
        }
    }
    let n0 = 0.95 * half as f64;
    let n1 = below as f64;
    let d = (n1 - n0) / (n as f64 * 0.95 * 0.05 / 4.0).sqrt();
    let p = erfc(d.abs() / std::f64::consts::SQRT_2);
    Ok(TestOutcome::new(TestId::DftSpectral, vec![p]))
}

/// Overlapping pattern counts of width `m` with cyclic wraparound, as used by
/// the serial and approximate-entropy statistics.
fn cyclic_pattern_counts(seq: &BitSequence, m: usize) -> Vec<u64> {
    let n = seq.len();
    let size = 1usize << m;
    let mask = size - 1;
    let mut counts = vec![0u64; size];
    if m == 0 || n == 0 {
        return counts;
    }
    let bits = seq.bits();
    let mut idx = 0usize;
    for &b in &bits[..m.min(n)] {
        idx = (idx << 1) | b as usize;
    }
    // With wraparound there are exactly n windows.
    counts[idx & mask] += 1;
    for k in 1..n {
        let next = bits[(k + m - 1) % n];
        idx = ((idx << 1) | next as usize) & mask;
        counts[idx] += 1;
    }
    counts
}

fn psi_squared(seq: &BitSequence, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = seq.len() as f64;
    let counts = cyclic_pattern_counts(seq, m);
    let sum_sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    (1u64 << m) as f64 / n * sum_sq - n
}

/// Serial test: first- and second-difference psi^2 statistics over
/// overlapping m-bit patterns, two P-values.
pub fn serial_test(seq: &BitSequence, m: usize) -> Result<TestOutcome, NistError> {
    let n = seq.len();
    if m < 1 {
        return Err(NistError::InvalidParameter {
            test: TestId::Serial,
            reason: "pattern length m must be >= 1".into(),
        });
    }
    let limit = (n.max(1) as f64).log2().floor() as isize - 2;
    if (m as isize) >= limit {
        return Err(NistError::Ineligible {
            test: TestId::Serial,
            length: n,
            required: 1 << (m + 3),
        });
    }
    let psi_m = psi_squared(seq, m);
    let psi_m1 = if m >= 1 { psi_squared(seq, m - 1) } else { 0.0 };
    let psi_m2 = if m >= 2 { psi_squared(seq, m - 2) } else { 0.0 };
    let del1 = (psi_m - psi_m1).max(0.0);
    let del2 = (psi_m - 2.0 * psi_m1 + psi_m2).max(0.0);
    let p1 = igamc(2f64.powi(m as i32 - 2), del1 / 2.0);
    let p2 = igamc(2f64.powi(m as i32 - 3), del2 / 2.0);
    Ok(TestOutcome::new(TestId::Serial, vec![p1, p2]))
}

/// Approximate entropy: ApEn(m) = phi(m) - phi(m+1),
/// chi^2 = 2n(ln 2 - ApEn), P = igamc(2^(m-1), chi^2/2).
pub fn approximate_entropy_test(seq: &BitSequence, m: usize) -> Result<TestOutcome, NistError> {
    let n = seq.len();
    if m < 1 {
        return Err(NistError::InvalidParameter {
            test: TestId::ApproximateEntropy,
            reason: "pattern length m must be >= 1".into(),
        });
    }
    let required = 1usize << (m + 3);
    if n < required {
        return Err(NistError::Ineligible {
            test: TestId::ApproximateEntropy,
            length: n,
            required,
        });
    }
    let phi = |width: usize| -> f64 {
        let counts = cyclic_pattern_counts(seq, width);
        let nf = n as f64;
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let frac = c as f64 / nf;
                frac * frac.ln()
            })
            .sum()
    };
    let apen = phi(m) - phi(m + 1);
    let chi2 = (2.0 * n as f64 * (std::f64::consts::LN_2 - apen)).max(0.0);
    let p = igamc(2f64.powi(m as i32 - 1), chi2 / 2.0);
    Ok(TestOutcome::new(TestId::ApproximateEntropy, vec![p]))
}

fn cusum_p_value(bits: &[u8]) -> f64 {
    let n = bits.len() as i64;
    let mut sum = 0i64;
    let mut z = 0i64;
    for &b in bits {
        sum += if b == 1 { 1 } else { -1 };
        z = z.max(sum.abs());
    }
    let nf = n as f64;
    let zf = z as f64;
    let sqrt_n = nf.sqrt();
    // Integer bounds follow C-style truncating division.
    let nz = n / z;
    let mut sum1 = 0.0;
    let mut k = (-nz + 1) / 4;
    while k <= (nz - 1) / 4 {
        let kf = k as f64;
        sum1 += normal_cdf((4.0 * kf + 1.0) * zf / sqrt_n)
            - normal_cdf((4.0 * kf - 1.0) * zf / sqrt_n);
        k += 1;
    }
    let mut sum2 = 0.0;
    let mut k = (-nz - 3) / 4;
    while k <= (nz - 1) / 4 {
        let kf = k as f64;
        sum2 += normal_cdf((4.0 * kf + 3.0) * zf / sqrt_n)
            - normal_cdf((4.0 * kf + 1.0) * zf / sqrt_n);
        k += 1;
    }
    (1.0 - sum1 + sum2).clamp(0.0, 1.0)
}

/// Cumulative sums test in both directions: z is the largest absolute
/// partial sum of the +/-1 walk; forward and backward P-values.
pub fn cumulative_sums_test(seq: &BitSequence) -> Result<TestOutcome, NistError> {
    let n = seq.len();
    if n < 2 {
        return Err(NistError::Ineligible {
            test: TestId::CumulativeSums,
            length: n,
            required: 2,
        });
    }
    let forward = cusum_p_value(seq.bits());
    let reversed: Vec<u8> = seq.bits().iter().rev().copied().collect();
    let backward = cusum_p_value(&reversed);
    Ok(TestOutcome::new(
        TestId::CumulativeSums,
        vec![forward, backward],
    ))
}
