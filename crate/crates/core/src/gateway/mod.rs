//! Network boundary for interactive clients.
//!
//! [`engine`] is the transport-free core; [`server`] puts it behind a
//! WebSocket at `/ws?role=driver|observer` with `POST /scenario`,
//! `GET /log` and `GET /snapshot` alongside.

pub mod engine;
pub mod protocol;
pub mod server;

pub use engine::{EngineConfig, GatewayEngine, DEFAULT_RENDER_DECIMATION};
pub use protocol::{Body, ErrorCode, Outbound, Role, Target, WireMessage, PROTOCOL_VERSION};
pub use server::{serve, spawn, Gateway, ServeConfig};
