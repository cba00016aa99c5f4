use thiserror::Error;

use crate::square::Setting;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state norm {0} is not 1 within tolerance")]
    InvalidNorm(f64),

    #[error("amplitude {0} is not finite")]
    NonFinite(usize),

    #[error("negative outcome probability {0} beyond rounding tolerance")]
    NegativeProbability(f64),

    #[error("projection onto the selected branch has norm {0}")]
    DegenerateCollapse(f64),

    #[error("product of the {setting} observables is not +I or -I (residual {residual:e})")]
    NotScalar { setting: Setting, residual: f64 },

    #[error("the two records share no lit panel")]
    NoCommonPanel,

    #[error("invalid setting name `{0}`")]
    InvalidSetting(String),

    #[error("invalid color `{0}`")]
    InvalidColor(String),

    #[error("invalid variant `{0}`")]
    InvalidVariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
