pub mod elab;
pub mod lexer;
pub mod raw;
pub mod theory_file;
