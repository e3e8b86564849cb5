// Scratch probe: per-test mean scores on iid-uniform bits, by length.
use prng_lab::bitseq::BitSequence;
use prng_lab::nist::run_battery;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20000);
    for &n in &[200usize, 400, 505, 1010] {
        let mut rng = ChaCha8Rng::seed_from_u64(42 + n as u64);
        let mut sums: BTreeMap<&'static str, (f64, f64, usize)> = BTreeMap::new();
        let mut avg_sum = 0.0;
        for _ in 0..reps {
            let s = BitSequence::random(n, &mut rng);
            let report = run_battery(&s);
            avg_sum += report.avg_score;
            for o in &report.outcomes {
                let e = sums.entry(o.test_id.name()).or_insert((0.0, 0.0, 0));
                e.0 += o.score;
                e.1 += if o.passed { 1.0 } else { 0.0 };
                e.2 += 1;
            }
        }
        println!("n={n} ({reps} reps): avg_nist mean {:.4}", avg_sum / reps as f64);
        for (name, (score_sum, pass_sum, count)) in &sums {
            println!("  {:<22} E[score] {:.4}  pass-rate {:.4}", name, score_sum / *count as f64, pass_sum / *count as f64);
        }
    }
}
