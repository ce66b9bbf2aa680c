//! First-order grey system forecasting.
//!
//! Five whitenization models share one pipeline: accumulate the raw series,
//! regress the targets on the adjacent-mean background values (plus any
//! trigonometric forcing columns), then difference the closed-form time
//! response to get a one-step-ahead prediction.
//!
//! | model        | forcing `f(t)`                         |
//! |--------------|----------------------------------------|
//! | `GM11`       | `b`                                    |
//! | `GVM`        | `b·x²` (Verhulst)                      |
//! | `GM_SIN`     | `b1·sin(ωt) + b2`                      |
//! | `GM_COS`     | `b1·cos(ωt) + b2`                      |
//! | `GM_SINCOS`  | `b1·sin(ωt) + b2·cos(ωt) + b3`         |
//!
//! Parameters come either from least squares ([`lse`]) or from a
//! Metropolis-within-Gibbs posterior ([`bayes`]); [`rolling`] refits them on
//! every new observation.
//!
//! ```
//! use greycast::{run_rolling, ModelKind, ObservationSeries, RollingConfig};
//!
//! let speeds = ObservationSeries::new(vec![61.0, 60.2, 58.9, 57.5, 57.9, 58.8, 60.1, 60.4])?;
//! let config = RollingConfig { kind: ModelKind::Gm11, ..RollingConfig::default() };
//! let run = run_rolling(&speeds, &config)?;
//! assert_eq!(run.predictions.len(), 4);
//! # Ok::<(), greycast::GreyError>(())
//! ```

pub mod bayes;
pub mod design;
pub mod error;
pub mod io;
pub mod lse;
pub mod par;
pub mod predict;
pub mod rolling;
pub mod sequences;

pub use bayes::{sample_posterior, summarize, BayesConfig, Chain, PosteriorSummary};
pub use design::{build_design, ColumnRole, DesignSystem, ModelKind, TimeIndex};
pub use error::{GreyError, Result};
pub use lse::{grid_search_omega, solve_lse, GreyParameters, LseFit, OmegaGrid};
pub use par::Execution;
pub use predict::{predict_next, WhitenizationOde};
pub use rolling::{compute_metrics, run_rolling, Estimator, MetricReport, RollingConfig, RollingRunResult};
pub use sequences::{ago, iago, mean_sequence, AccumulatedSeries, MeanSequence, ObservationSeries};
