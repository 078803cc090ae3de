#![allow(dead_code)]
pub mod graph_oracle;
