//! Command-line front end for the glyph recognizer: corpus loading, model
//! persistence, synthetic corpora and the subcommands themselves.

pub mod commands;
pub mod corpus;
pub mod model_file;
pub mod synth;
