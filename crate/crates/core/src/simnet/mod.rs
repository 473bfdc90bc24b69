//! Deterministic synthetic social network with a virtual clock. Serves the
//! [`SocialApi`](crate::apiface::SocialApi) contract and exposes its ground
//! truth for evaluation.

mod api;
pub mod config;
pub mod text;
mod world;

use thiserror::Error;

pub use config::{ActivityConfig, BehaviorMix, ChurnModel, FollowModel, ListModel, WorldConfig, DEFAULT_START};
pub use world::{AccountStatus, GroundTruth, Like, SimList, SimUser, TrueCommunity, TweetDraft, UserSpec, World};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
