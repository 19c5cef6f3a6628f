//! Deterministic symbol-to-language converters: rules and lookup tables,
//! plus the inverses used when scoring answers given in language form.

pub mod brackets;
pub mod names;
pub mod sequence;
pub mod table;

pub use brackets::{
    brackets_from_names, name_brackets, name_brackets_with, render_brackets, BracketNames, BracketTable,
};
pub use names::{emoji_key, emoji_name, lookup_translate, NameTable};
pub use sequence::{describe_sequence, format_sequence, parse_sequence, parse_sequence_description, runs, Run};
pub use table::{linearize, linearize_table, split_table};
