use thiserror::Error;

#[derive(Debug, Error)]
pub enum GreyError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("rank error: {0}")]
    Rank(String),

    #[error("singular time response at step {step}: {reason}")]
    Singular { step: usize, reason: String },

    #[error("sampler initialization failed: {0}")]
    Init(String),

    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("rejected rows: {}", format_rejections(.0))]
    RejectedRows(Vec<(usize, String)>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_rejections(rows: &[(usize, String)]) -> String {
    rows.iter().map(|(row, why)| format!("row {row} ({why})")).collect::<Vec<_>>().join(", ")
}

pub type Result<T> = std::result::Result<T, GreyError>;
