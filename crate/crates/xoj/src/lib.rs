//! File formats, reports, CLI and HTTP sidecar for the xoj student-risk
//! toolkit. The learning code lives in `xoj-core`.

pub mod cli;
pub mod formats;
pub mod ingest;
pub mod service;
pub mod svg;
