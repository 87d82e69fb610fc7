use thiserror::Error;

#[derive(Debug, Error)]
pub enum PudipError {
    #[error(transparent)]
    Core(#[from] phz_core::Error),
    #[error(transparent)]
    Nn(#[from] phz_nn::NnError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("loss became non-finite ({value}) at iteration {iteration}; try a smaller learning rate")]
    NonFiniteLoss { iteration: usize, value: f64 },
    #[error("background fit needs at least {needed} background pixels, found {found}")]
    SparseBackground { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, PudipError>;
