#![allow(dead_code)]
pub mod event_oracle;
