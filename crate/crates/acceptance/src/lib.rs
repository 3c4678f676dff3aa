//! Holds no code. The acceptance run lives in `tests/acceptance.rs` and is a
//! separate package so it executes after every `oplab` test target.
