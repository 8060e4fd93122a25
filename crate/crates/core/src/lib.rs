//! MaxCut toolkit: a low-rank relaxation solver, batched hyperplane rounding,
//! and a single-graph reinforcement-learned rounding agent.

pub mod error;
pub mod graph;
pub mod harness;
pub mod policy;
pub mod ppo;
pub mod rng;
pub mod rounding;
pub mod sdp;

pub use error::{Error, Result};
pub use graph::{brute_force_maxcut, cut_value, generate_er, Assignment, Edge, Graph};
pub use policy::{
    backward, forward, init_params, log_prob, sample_action, transition, AgentParams, OutputGrad,
    ParamGrads, PolicyOutput,
};
pub use ppo::{
    agent_loss_grads, collect_step, ppo_losses, reward, train, train_with, ChainState,
    StepMetrics, TrainConfig, Transition,
};
pub use rng::{derive_seed, SplitMix64};
pub use rounding::{
    cut_of_hyperplane, expected_cut_analytic, pgw, pgw_cut_samples, round_embedding,
    sample_uniform_sphere, Hyperplane, PgwResult,
};
pub use sdp::{default_rank, sdp_objective, solve_sdp, Embedding, SdpReport};
