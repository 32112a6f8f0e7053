//! Shapley credit allocation for model outputs and losses.
//!
//! Games are built from three ingredients: a *nature* of interpretation
//! (observational conditioning, model-specific marginal pinning, or causal
//! `do`-interventions on a known causal Bayesian network), a *measure*
//! (expected value, variance, Shannon entropy or cumulative paired Shannon
//! entropy) and a *target* random variable (model output, loss, or the
//! label itself). The engine allocates the grand-coalition value with exact
//! Shapley enumeration or with constrained Shapley-kernel regression.
//!
//! ```
//! use shapcredit::prelude::*;
//!
//! let net = bundled::smoking_fig4();
//! let point = net
//!     .assignment(&[("Smoker", "1"), ("Cancer", "1"), ("XRay", "1"), ("Dyspnoea", "0")])
//!     .unwrap();
//! let game = NetworkGame::model_output(&net, &point, Nature::Observational, Measure::expected_value()).unwrap();
//! let report = shapley_exact(&game).unwrap();
//! assert!((report.phi[1] - 0.8516).abs() < 1e-3);
//! ```

pub mod bundled;
pub mod distribution;
pub mod error;
pub mod game;
pub mod harness;
pub mod measures;
pub mod model;
pub mod network;
pub mod shapley;

pub use error::{Error, ErrorCategory, Result};

pub mod prelude {
    pub use crate::bundled;
    pub use crate::distribution::{Distribution, Support};
    pub use crate::error::{Error, Result};
    pub use crate::game::{
        Coalition, CoalitionGame, EmpiricalGame, GameInfo, Nature, NetworkGame, SageLocalGame, TableGame,
        TargetKind,
    };
    pub use crate::measures::{Measure, MeasureKind};
    pub use crate::model::{Dataset, LossKind, LossSpec, ModelHandle};
    pub use crate::network::{Assignment, Network, QueryMode, Role, VarId, Variable};
    pub use crate::shapley::{
        marginal_contribution, shapley_exact, shapley_regression, AttributionReport, RegressionPlan,
    };
}
