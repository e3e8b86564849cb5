// Scratch probe: true means of random-agent rewards for the acceptance pairs.
use prng_lab::env::{random_agent_episode, BFConfig, BfEnv, Env, RFConfig, RfEnv};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mean_std(env: &mut dyn Env, episodes: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rewards: Vec<f64> = (0..episodes).map(|_| random_agent_episode(env, &mut rng)).collect();
    let mean = rewards.iter().sum::<f64>() / episodes as f64;
    let var = rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / episodes as f64;
    (mean, var.sqrt())
}

fn main() {
    let episodes: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let mut rf5 = RfEnv::new(RFConfig { n: 5, t: 100 }).unwrap();
    let mut bf200 = BfEnv::new(BFConfig { b: 200, t: 100, wanderer: false, init: Default::default() }).unwrap();
    let mut rf10 = RfEnv::new(RFConfig { n: 10, t: 100 }).unwrap();
    let mut bf400 = BfEnv::new(BFConfig { b: 400, t: 200, wanderer: false, init: Default::default() }).unwrap();
    let (m1, s1) = mean_std(&mut rf5, episodes, 100);
    let (m2, s2) = mean_std(&mut bf200, episodes, 101);
    let (m3, s3) = mean_std(&mut rf10, episodes, 102);
    let (m4, s4) = mean_std(&mut bf400, episodes, 103);
    let se = |s: f64| s / (episodes as f64).sqrt();
    println!("rf  N=5  T=100 ({} eps): mean {:.4} std {:.4} se {:.4}", episodes, m1, s1, se(s1));
    println!("bf  B=200 T=100 ({} eps): mean {:.4} std {:.4} se {:.4}", episodes, m2, s2, se(s2));
    println!("rf  N=10 T=100 ({} eps): mean {:.4} std {:.4} se {:.4}", episodes, m3, s3, se(s3));
    println!("bf  B=400 T=200 ({} eps): mean {:.4} std {:.4} se {:.4}", episodes, m4, s4, se(s4));
    println!("pair1 gap (rf5-bf200):  {:+.4}", m1 - m2);
    println!("pair2 gap (rf10-bf400): {:+.4}", m3 - m4);
}
