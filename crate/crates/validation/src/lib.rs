//! Holds the `acceptance` test target; run it with
//! `cargo test -p gnp-vlc-validation --test acceptance`.
