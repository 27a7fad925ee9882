use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("malformed grid file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("correlation buffer of {0} elements exceeds the addressable limit")]
    FftTooLarge(usize),

    #[error("lambda {0} outside [0, 1)")]
    LambdaOutOfRange(f64),

    #[error("invalid capability: {0}")]
    InvalidCapability(String),

    #[error("{0} primitives exceeds the limit of {1}")]
    TooManyPrimitives(usize, usize),

    #[error("unknown primitive symbol P{0}")]
    UnknownPrimitive(usize),

    #[error("cannot parse expression: {0}")]
    Parse(String),

    #[error("decomposition has not been classified against a target")]
    Unclassified,

    #[error("revolve axis does not pass through the grid")]
    AxisOutsideGrid,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target is not manufacturable by the primitive set")]
    NotManufacturable,

    #[error("no plan found within {max_depth} actions ({expansions} expansions)")]
    NotFoundWithinBounds { max_depth: usize, expansions: usize },

    #[error("no valid plan reaches the target")]
    PlanImpossible,
}

pub type Result<T> = std::result::Result<T, Error>;
