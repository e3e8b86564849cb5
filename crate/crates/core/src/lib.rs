//! A reinforcement-learning laboratory for growing pseudo-random bit
//! generators from scratch.
//!
//! Two decision-process formulations are provided: a fully observable one
//! where each action rewrites a single bit of a fixed-length sequence, and a
//! partially observable recurrent one where each action appends a short
//! pattern and the agent only ever sees the tail of the sequence. Episodes
//! are scored at the horizon by a battery of statistical randomness tests,
//! and agents are trained with clipped-surrogate policy optimization on
//! hand-rolled dense/LSTM actor-critic networks.

pub mod bitseq;
pub mod env;
pub mod nist;
pub mod nn;
pub mod ppo;
pub mod seeding;

pub use bitseq::{BitImageSpec, BitSequence, GrayImage};
pub use nist::{avg_nist, run_battery, BatteryReport, TestOutcome};
