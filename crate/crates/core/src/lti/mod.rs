//! System model, rollout simulation, and the block matrices derived from a
//! system: Markov parameters `G`, `F`, `H` and the Hankel triple.

pub mod dataset_io;
pub mod markov;
pub mod model;
pub mod simulate;

pub use dataset_io::{load_dataset, save_dataset};
pub use markov::{
    build_hankel, init_state_markov_h, noise_markov_f, true_markov, HankelTriple, MarkovMatrix,
};
pub use model::{NoiseConfig, SystemModel};
pub use simulate::{
    replay_outputs, replay_states, simulate_dataset, simulate_rollout,
    simulate_rollout_with_inputs, Rollout, RolloutDataset,
};
