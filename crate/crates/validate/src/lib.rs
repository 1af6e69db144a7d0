//! Acceptance checks for `cia-core`. The checks live in
//! `tests/acceptance.rs` and print one `PASS`/`FAIL` line per criterion;
//! run them with `cargo test -p cia-validate --test acceptance`.
