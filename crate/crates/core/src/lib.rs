pub mod conllu;
pub mod displacement;
pub mod divergence;
pub mod error;
pub mod morphology;
pub mod pipeline;
pub mod splitter;
pub mod statistics;
pub mod synthetic;
pub mod treebank_stats;
