//! Statistical randomness battery and the aggregate score used as the
//! episode reward.
//!
//! A test returns one or more P-values; it passes when every P-value clears
//! the significance level. A passing test scores the mean of its P-values, a
//! failing test scores zero, and the battery average is taken over the tests
//! eligible at the sequence's length.

pub mod special;
mod suite;

pub use suite::{
    approximate_entropy_test, block_frequency_test, cumulative_sums_test, dft_spectral_test,
    longest_run_test, monobit_test, runs_test, serial_test,
};

use crate::bitseq::BitSequence;
use thiserror::Error;

/// Significance level for every test in the battery.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum NistError {
    #[error("{test} requires at least {required} bits, got {length}")]
    Ineligible {
        test: TestId,
        length: usize,
        required: usize,
    },
    #[error("{test}: {reason}")]
    InvalidParameter { test: TestId, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestId {
    Monobit,
    BlockFrequency,
    Runs,
    LongestRun,
    DftSpectral,
    Serial,
    ApproximateEntropy,
    CumulativeSums,
}

impl TestId {
    pub const ALL: [TestId; 8] = [
        TestId::Monobit,
        TestId::BlockFrequency,
        TestId::Runs,
        TestId::LongestRun,
        TestId::DftSpectral,
        TestId::Serial,
        TestId::ApproximateEntropy,
        TestId::CumulativeSums,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestId::Monobit => "monobit",
            TestId::BlockFrequency => "block_frequency",
            TestId::Runs => "runs",
            TestId::LongestRun => "longest_run",
            TestId::DftSpectral => "dft_spectral",
            TestId::Serial => "serial",
            TestId::ApproximateEntropy => "approximate_entropy",
            TestId::CumulativeSums => "cumulative_sums",
        }
    }

    /// Minimum sequence length at which the battery schedules this test.
    pub fn min_length(&self) -> usize {
        match self {
            TestId::Monobit => 1,
            TestId::BlockFrequency => 16,
            TestId::Runs => 16,
            TestId::LongestRun => 128,
            TestId::DftSpectral => 64,
            TestId::Serial => 32,
            TestId::ApproximateEntropy => 32,
            TestId::CumulativeSums => 16,
        }
    }
}

impl std::fmt::Display for TestId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of one statistical test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub test_id: TestId,
    pub p_values: Vec<f64>,
    pub passed: bool,
    pub score: f64,
}

impl TestOutcome {
    /// Applies the pass rule and scoring: passed iff every P-value is at or
    /// above the significance level; score is the mean P-value if passed,
    /// zero otherwise.
    pub fn new(test_id: TestId, p_values: Vec<f64>) -> Self {
        assert!(!p_values.is_empty(), "a test that ran produces P-values");
        let passed = p_values.iter().all(|&p| p >= SIGNIFICANCE_LEVEL);
        let score = if passed {
            p_values.iter().sum::<f64>() / p_values.len() as f64
        } else {
            0.0
        };
        Self {
            test_id,
            p_values,
            passed,
            score,
        }
    }
}

/// Outcomes of all eligible tests plus their average score.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub outcomes: Vec<TestOutcome>,
    pub eligible_count: usize,
    pub avg_score: f64,
}

/// Block size bound to the block-frequency test at length `n`.
pub fn block_frequency_m(n: usize) -> usize {
    if n < 200 {
        8
    } else {
        20
    }
}

/// Pattern length bound to the serial test at length `n`.
pub fn serial_m(n: usize) -> usize {
    let cap = ((n.max(1)) as f64).log2().floor() as usize - 3;
    cap.min(3)
}

/// Pattern length bound to the approximate-entropy test.
pub const APPROXIMATE_ENTROPY_M: usize = 2;

/// The tests the battery runs at sequence length `n`, in battery order.
/// Eligibility is monotone: a test eligible at `n` stays eligible for all
/// longer sequences.
pub fn eligible_tests(n: usize) -> Vec<TestId> {
    TestId::ALL
        .iter()
        .copied()
        .filter(|t| n >= t.min_length())
        .collect()
}

/// Runs every eligible test with its bound parameters.
pub fn run_battery(seq: &BitSequence) -> BatteryReport {
    let n = seq.len();
    let outcomes: Vec<TestOutcome> = eligible_tests(n)
        .into_iter()
        .map(|id| {
            let run = match id {
                TestId::Monobit => monobit_test(seq),
                TestId::BlockFrequency => block_frequency_test(seq, block_frequency_m(n)),
                TestId::Runs => runs_test(seq),
                TestId::LongestRun => longest_run_test(seq),
                TestId::DftSpectral => dft_spectral_test(seq),
                TestId::Serial => serial_test(seq, serial_m(n)),
                TestId::ApproximateEntropy => {
                    approximate_entropy_test(seq, APPROXIMATE_ENTROPY_M)
                }
                TestId::CumulativeSums => cumulative_sums_test(seq),
            };
            run.unwrap_or_else(|e| panic!("eligible test {id} failed to run: {e}"))
        })
        .collect();
    let eligible_count = outcomes.len();
    let avg_score = if eligible_count == 0 {
        0.0
    } else {
        outcomes.iter().map(|o| o.score).sum::<f64>() / eligible_count as f64
    };
    BatteryReport {
        outcomes,
        eligible_count,
        avg_score,
    }
}

/// The battery average for `seq`: the terminal episode reward.
pub fn avg_nist(seq: &BitSequence) -> f64 {
    run_battery(seq).avg_score
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(bits: &[u8]) -> BitSequence {
        BitSequence::from_bits(bits).unwrap()
    }

    fn bits_from_str(s: &str) -> BitSequence {
        BitSequence::from_text(s).unwrap()
    }

    fn alternating(n: usize) -> BitSequence {
        seq(&(0..n).map(|i| (i % 2) as u8).collect::<Vec<_>>())
    }

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "actual {actual} vs expected {expected}"
        );
    }

    #[test]
    fn monobit_reference_example() {
        // Standard worked example for the frequency test.
        let outcome = monobit_test(&bits_from_str("1011010101")).unwrap();
        assert_close(outcome.p_values[0], 0.527089, 1e-6);
        assert!(outcome.passed);
    }

    #[test]
    fn monobit_alternating_is_perfect() {
        for n in [10, 64, 100] {
            let outcome = monobit_test(&alternating(n)).unwrap();
            assert_eq!(outcome.p_values[0], 1.0);
        }
    }

    #[test]
    fn monobit_all_zeros_fails() {
        let outcome = monobit_test(&seq(&[0u8; 100])).unwrap();
        assert!(outcome.p_values[0] < 1e-12);
        assert!(!outcome.passed);
        assert_eq!(outcome.score, 0.0);
    }

    #[test]
    fn block_frequency_alternating_even_block() {
        let outcome = block_frequency_test(&alternating(64), 8).unwrap();
        assert_eq!(outcome.p_values[0], 1.0);
    }

    #[test]
    fn block_frequency_all_ones_fails() {
        let outcome = block_frequency_test(&seq(&[1u8; 100]), 10).unwrap();
        assert!(outcome.p_values[0] < 1e-12);
        assert!(!outcome.passed);
    }

    #[test]
    fn block_frequency_reference_example() {
        // Standard worked example: "0110011010" with M = 3.
        let outcome = block_frequency_test(&bits_from_str("0110011010"), 3).unwrap();
        assert_close(outcome.p_values[0], 0.801252, 1e-6);
    }

    #[test]
    fn runs_reference_example() {
        let outcome = runs_test(&bits_from_str("1001101011")).unwrap();
        assert_close(outcome.p_values[0], 0.147232, 1e-6);
        assert!(outcome.passed);
    }

    #[test]
    fn runs_all_zeros_prerequisite() {
        let outcome = runs_test(&seq(&[0u8; 16])).unwrap();
        assert_eq!(outcome.p_values[0], 0.0);
        assert!(!outcome.passed);
    }

    #[test]
    fn runs_alternating_maximal_runs_fails() {
        let outcome = runs_test(&alternating(100)).unwrap();
        assert!(outcome.p_values[0] < 1e-12);
        assert!(!outcome.passed);
    }

    #[test]
    fn longest_run_degenerate_inputs_fail() {
        let ones = longest_run_test(&seq(&[1u8; 128])).unwrap();
        assert!(ones.p_values[0] < 1e-9);
        assert!(!ones.passed);
        let alt = longest_run_test(&alternating(128)).unwrap();
        assert!(alt.p_values[0] < 1e-9);
        assert!(!alt.passed);
    }

    #[test]
    fn longest_run_needs_128_bits() {
        assert_eq!(
            longest_run_test(&seq(&[1u8; 127])),
            Err(NistError::Ineligible {
                test: TestId::LongestRun,
                length: 127,
                required: 128
            })
        );
    }

    #[test]
    fn serial_alternating_closed_form() {
        // Alternating bits, n = 64, m = 2: psi2_2 = n, psi2_1 = 0, so the
        // first P-value is igamc(1, n/2) = exp(-32).
        let outcome = serial_test(&alternating(64), 2).unwrap();
        assert_close(outcome.p_values[0], (-32.0f64).exp(), 1e-18);
        assert!(!outcome.passed);
    }

    #[test]
    fn serial_complement_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = BitSequence::random(128, &mut rng);
        let a = serial_test(&s, 3).unwrap();
        let b = serial_test(&s.complement(), 3).unwrap();
        assert_eq!(a.p_values, b.p_values);
    }

    #[test]
    fn approximate_entropy_all_zeros() {
        let outcome = approximate_entropy_test(&seq(&[0u8; 64]), 2).unwrap();
        // Zero-entropy input: chi^2 = 2 n ln 2, P vanishes.
        assert!(outcome.p_values[0] < 1e-12);
        assert!(!outcome.passed);
    }

    #[test]
    fn approximate_entropy_complement_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = BitSequence::random(128, &mut rng);
        let a = approximate_entropy_test(&s, 2).unwrap();
        let b = approximate_entropy_test(&s.complement(), 2).unwrap();
        assert_eq!(a.p_values, b.p_values);
    }

    #[test]
    fn cumulative_sums_monotone_walk_fails() {
        let outcome = cumulative_sums_test(&seq(&[1u8; 100])).unwrap();
        assert!(outcome.p_values[0] < 1e-12);
        assert!(outcome.p_values[1] < 1e-12);
        assert!(!outcome.passed);
    }

    #[test]
    fn cumulative_sums_reversal_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = BitSequence::random(100, &mut rng);
        let fwd = cumulative_sums_test(&s).unwrap();
        let rev = cumulative_sums_test(&s.reversed()).unwrap();
        assert_eq!(fwd.p_values[0], rev.p_values[1]);
        assert_eq!(fwd.p_values[1], rev.p_values[0]);
    }

    #[test]
    fn eligibility_table() {
        assert_eq!(eligible_tests(1), vec![TestId::Monobit]);
        let at_80 = eligible_tests(80);
        assert!(!at_80.contains(&TestId::LongestRun));
        assert_eq!(at_80.len(), 7);
        assert_eq!(eligible_tests(1000), TestId::ALL.to_vec());
        assert_eq!(eligible_tests(0), vec![]);
    }

    #[test]
    fn eligibility_is_monotone() {
        let mut prev = 0;
        for n in 0..2000 {
            let count = eligible_tests(n).len();
            assert!(count >= prev, "eligibility shrank at n={n}");
            prev = count;
        }
    }

    #[test]
    fn parameter_binding_by_length() {
        assert_eq!(block_frequency_m(199), 8);
        assert_eq!(block_frequency_m(200), 20);
        assert_eq!(serial_m(32), 2);
        assert_eq!(serial_m(64), 3);
        assert_eq!(serial_m(1000), 3);
    }

    #[test]
    fn score_rule_on_synthetic_outcomes() {
        let pass_a = TestOutcome::new(TestId::Monobit, vec![0.5]);
        let pass_b = TestOutcome::new(TestId::Runs, vec![0.2]);
        assert_eq!((pass_a.score + pass_b.score) / 2.0, 0.35);

        let fail = TestOutcome::new(TestId::Runs, vec![0.005]);
        assert!(!fail.passed);
        assert_eq!(fail.score, 0.0);
        assert_eq!((pass_a.score + fail.score) / 2.0, 0.25);
    }

    #[test]
    fn multi_value_test_zeroes_together() {
        let outcome = TestOutcome::new(TestId::Serial, vec![0.5, 0.005]);
        assert!(!outcome.passed);
        assert_eq!(outcome.score, 0.0);
    }

    #[test]
    fn avg_nist_all_zeros_is_zero() {
        assert_eq!(avg_nist(&seq(&[0u8; 1000])), 0.0);
    }

    #[test]
    fn avg_nist_empty_is_zero() {
        assert_eq!(avg_nist(&BitSequence::empty()), 0.0);
    }

    #[test]
    fn battery_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let s = BitSequence::random(1000, &mut rng);
        let a = run_battery(&s);
        let b = run_battery(&s);
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn p_values_are_probabilities(
            bits in proptest::collection::vec(0u8..=1, 1..400),
        ) {
            let report = run_battery(&seq(&bits));
            for outcome in &report.outcomes {
                for &p in &outcome.p_values {
                    prop_assert!((0.0..=1.0).contains(&p), "{}: {}", outcome.test_id, p);
                }
                if outcome.passed {
                    let mean = outcome.p_values.iter().sum::<f64>()
                        / outcome.p_values.len() as f64;
                    prop_assert!((outcome.score - mean).abs() < 1e-15);
                } else {
                    prop_assert_eq!(outcome.score, 0.0);
                }
            }
            prop_assert!((0.0..=1.0).contains(&report.avg_score));
        }

        #[test]
        fn monobit_complement_invariant(
            bits in proptest::collection::vec(0u8..=1, 1..200),
        ) {
            let s = seq(&bits);
            let a = monobit_test(&s).unwrap();
            let b = monobit_test(&s.complement()).unwrap();
            prop_assert_eq!(a.p_values, b.p_values);
        }
    }
}
