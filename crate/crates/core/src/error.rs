use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("`{field}` must be finite and strictly positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("`{field}` must be finite and non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("`beam_speed` {beam_speed} cm/s exceeds `light_speed` {light_speed} cm/s")]
    Superluminal { beam_speed: f64, light_speed: f64 },
    #[error("derived coefficient `{field}` is not finite ({value})")]
    NonFiniteDerived { field: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VelocityError {
    #[error("NaN passed to the velocity law ({what})")]
    NaN { what: &'static str },
    #[error("spin weights s^2 = {s2}, c^2 = {c2} are not a valid pair")]
    BadWeights { s2: f64, c2: f64 },
    #[error("negative time {0} s")]
    NegativeTime(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid integration config: {0}")]
    Config(String),
    #[error("integration diverged at step {step} (t = {t} s)")]
    Diverged { step: usize, t: f64 },
    #[error(transparent)]
    Velocity(#[from] VelocityError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimelineError {
    #[error("{side} timeline is empty")]
    Empty { side: &'static str },
    #[error("{side} timeline switch times are not strictly increasing at index {index}")]
    NotIncreasing { side: &'static str, index: usize },
    #[error("{side} timeline has no entry at or before t = 0")]
    NoInitialSetting { side: &'static str },
    #[error("{side} setting requested at t = {t} s, before the first timeline entry")]
    BeforeFirstEntry { side: &'static str, t: f64 },
    #[error("signal speed must be positive and finite, got {0}")]
    SignalSpeed(f64),
    #[error("separation must be non-negative and finite, got {0}")]
    Separation(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("no events recorded for setting pair {0}")]
    EmptyCell(&'static str),
    #[error("count rates need a quiescent baseline; this run has none")]
    MissingBaseline,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HookeError {
    #[error("invalid spring parameters: {0}")]
    Params(String),
    #[error("step {dt} s does not resolve the delay {tau} s (need dt <= tau/4)")]
    DelayUnderResolved { dt: f64, tau: f64 },
}

/// Top-level error for experiment runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error("pair {pair_id}: {source}")]
    Pair {
        pair_id: u64,
        #[source]
        source: IntegrateError,
    },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Hooke(#[from] HookeError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Pair { .. } | Error::Integrate(IntegrateError::Diverged { .. })
        ) || matches!(self, Error::Integrate(IntegrateError::Velocity(_)))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
