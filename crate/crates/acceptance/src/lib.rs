//! Test-only package. The suite lives in `tests/acceptance.rs` and runs
//! after the `recurmix` test targets so a failing criterion does not hide them.
