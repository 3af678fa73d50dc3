//! HTTP front end for interactive editing sessions.
//!
//! Every session owns an archive that evolves on its own thread. Requests
//! are turned into messages for that thread; the latest grid snapshot is
//! also published on a watch channel for streaming clients.

pub mod docs;
pub mod error;
pub mod http;
pub mod manager;
pub mod session;

pub use docs::{CreateSession, DimensionsBody, EliteView, EvaluationDoc, SessionInfo, Status, TargetAck};
pub use error::ServiceError;
pub use http::{router, snapshot_stream};
pub use manager::{ServiceConfig, SessionManager};
pub use session::{default_projection, Session, SessionState, Worker};
