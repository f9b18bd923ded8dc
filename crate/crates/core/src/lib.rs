//! Clinical note annotations to chronological timelines.
//!
//! The pipeline runs [`annotation::parse_document`] →
//! [`timeline::build_timeline`] → [`layout::layout_timeline`] →
//! [`layout::render_svg`] / [`layout::timeline_to_view_json`]. [`Engine`]
//! bundles the configuration shared by the CLI and the HTTP service.

pub mod annotation;
pub mod diagnostic;
mod engine;
pub mod eval;
pub mod layout;
pub mod synth;
pub mod temporal;
pub mod timeline;

pub use diagnostic::{Diagnostic, Severity};
pub use engine::{Engine, RequestOptions};
