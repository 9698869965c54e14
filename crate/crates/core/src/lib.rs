//! A WebAssembly (MVP) interpreter that tracks, for every value and every
//! byte of linear memory, which inputs of the entry call it depends on.
//!
//! ```no_run
//! use wasm_taint::{decode_module, instantiate, SourceId, Value};
//!
//! let bytes = std::fs::read("fact.wasm").unwrap();
//! let mut instance = instantiate(decode_module(&bytes).unwrap()).unwrap();
//! let arg = Value::i32(5).tainted_by(SourceId::new(0).unwrap());
//! let out = instance.invoke("fact", &[arg]).unwrap();
//! println!("{}", out.report);
//! ```

pub mod cli;
pub mod decoder;
pub mod harness;
pub mod report;
pub mod runtime;
pub mod taint;

pub use decoder::{decode_module, DecodeError, ModuleDef, ValType};
pub use report::{make_report, TaintReport};
pub use runtime::{instantiate, Config, Instance, InvokeError, Invocation, Trap, Value};
pub use taint::{SourceId, TaintLabel, TaintLevel};
