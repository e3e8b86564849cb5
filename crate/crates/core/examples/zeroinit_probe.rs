// Scratch probe: random-agent means when BF starts from the all-zeros state.
use prng_lab::bitseq::BitSequence;
use prng_lab::nist::avg_nist;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn zero_init_bf_episode(b: usize, t: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut state = BitSequence::from_bits(vec![0u8; b]).unwrap();
    for _ in 0..t {
        let action = rng.gen_range(0..2 * b);
        state = state.set_bit(action / 2 + 1, (action % 2) as u8).unwrap();
    }
    avg_nist(&state)
}

fn main() {
    let reps = 2000usize;
    for &(b, t) in &[(200usize, 100usize), (400, 200), (80, 40)] {
        let mut rng = ChaCha8Rng::seed_from_u64(7 + b as u64);
        let mean = (0..reps).map(|_| zero_init_bf_episode(b, t, &mut rng)).sum::<f64>() / reps as f64;
        println!("zero-init BF B={b} T={t}: mean {:.4}", mean);
    }
}
