//! Nonlocality of quantum networks: density-matrix kernels, network
//! assembly, linear Bell games with exact local bounds, entanglement
//! swapping and the reductions that turn a network into chains and stars.

pub mod error;
pub mod games;
pub mod limits;
pub mod linalg;
pub mod network;
pub mod quantum;
pub mod scenarios;
pub mod swap;
pub mod tolerance;

pub use error::{Error, Result};
pub use games::{
    chsh_game, compose, compose_hybrid, compose_lambda, compose_star, evaluate, lhv_bound, lhv_optimum, payoff,
    BoundProvenance, GameJson, LhvOptimum, LinearGame, PayoffReport, Slot,
};
pub use limits::Limits;
pub use linalg::{DimList, Matrix, C64};
pub use network::{
    assemble_joint_state, is_connected, joint_distribution, lhv_distribution, DeterministicStrategy, Distribution,
    InputMode, MeasurementScenario, NetworkTopology, PartyMeasurement, Source,
};
pub use quantum::{
    bell_basis_povm, collapse, ghz_state, is_entangled_ppt, ppt_verdict, schmidt_pure_state, werner_state,
    BellLabel, Collapse, DensityOperator, GhzState, Observable, ObservableKind, Povm, PptVerdict, PureState, Sign,
};
pub use scenarios::{Oracle, ScenarioReport};
pub use swap::{
    activation_test, find_entangled_qubit_projection, project_to_qubit_subspace, reduce_network, star_swap,
    ActivationReport, ChshObservables, Reduction, Subnetwork, SwapOutcome,
};
