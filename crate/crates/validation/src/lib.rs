//! Acceptance suite for the workspace. The checks live in `tests/acceptance.rs`
//! and run with `cargo test -p wpcn-validation --test acceptance`.
