//! The smoking / dyspnoea example networks shipped with the crate.
//!
//! Both networks share the same data nodes (Smoker, Cancer, XRay,
//! Dyspnoea) and a zero-one loss node; they differ in the model:
//! `Model = Smoker & Cancer` in [`smoking_fig4`] and `Model = Cancer` in
//! [`smoking_fig5`].

use crate::error::{Error, Result};
use crate::network::Network;

pub const SMOKING_FIG4_JSON: &str = include_str!("../examples/smoking_fig4.json");
pub const SMOKING_FIG5_JSON: &str = include_str!("../examples/smoking_fig5.json");

pub fn smoking_fig4() -> Network {
    Network::from_json_str(SMOKING_FIG4_JSON).expect("bundled network is valid")
}

pub fn smoking_fig5() -> Network {
    Network::from_json_str(SMOKING_FIG5_JSON).expect("bundled network is valid")
}

/// Look up a bundled network by name (`fig4`, `smoking_fig4`, ...).
pub fn by_name(name: &str) -> Result<Network> {
    let stem = name.trim_end_matches(".json");
    let stem = stem.rsplit('/').next().unwrap_or(stem);
    match stem {
        "fig4" | "smoking_fig4" => Ok(smoking_fig4()),
        "fig5" | "smoking_fig5" => Ok(smoking_fig5()),
        _ => Err(Error::InvalidArgument(format!("no bundled network named `{name}`"))),
    }
}
