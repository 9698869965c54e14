//! Per-instruction execution traces.
//!
//! Each executed instruction yields one tab-separated line:
//!
//! ```text
//! step  function  offset  opcode  stack-depth  delta
//! ```
//!
//! `offset` is the instruction index in the function body and `stack-depth`
//! is the value-stack height after the step. `delta` names the label written
//! by the step: `push={..}`, `local[i]={..}`, `global[i]={..}`,
//! `mem[addr+width]={..}`, `ret={..}` when a call returns a value, or `-`.
//! A trapped run ends with `TRAP\t<reason>`.

use std::fmt;

use crate::decoder::Instr;
use crate::taint::TaintLabel;

use super::{Instance, InvokeError, Invocation, Status, Trap, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Delta {
    None,
    Push(TaintLabel),
    Local(u32, TaintLabel),
    Global(u32, TaintLabel),
    Memory { addr: usize, width: usize, label: TaintLabel },
    Return(TaintLabel),
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::None => f.write_str("-"),
            Delta::Push(l) => write!(f, "push={l}"),
            Delta::Local(i, l) => write!(f, "local[{i}]={l}"),
            Delta::Global(i, l) => write!(f, "global[{i}]={l}"),
            Delta::Memory { addr, width, label } => write!(f, "mem[{addr}+{width}]={label}"),
            Delta::Return(l) => write!(f, "ret={l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Step {
        step: u64,
        function: u32,
        offset: usize,
        opcode: &'static str,
        depth: usize,
        delta: Delta,
    },
    Trap(Trap),
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Step {
                step,
                function,
                offset,
                opcode,
                depth,
                delta,
            } => write!(f, "{step}\t{function}\t{offset}\t{opcode}\t{depth}\t{delta}"),
            TraceEvent::Trap(t) => write!(f, "TRAP\t{}", t.reason()),
        }
    }
}

fn pushes(instr: &Instr) -> bool {
    matches!(
        instr,
        Instr::I32Const(_)
            | Instr::I64Const(_)
            | Instr::Num(_)
            | Instr::LocalGet(_)
            | Instr::GlobalGet(_)
            | Instr::Load(..)
            | Instr::Select
            | Instr::MemorySize
            | Instr::MemoryGrow
    )
}

/// Invokes `name` one step at a time, reporting every executed instruction
/// to `sink`.
pub fn invoke_traced(
    instance: &mut Instance,
    name: &str,
    args: &[Value],
    mut sink: impl FnMut(&TraceEvent),
) -> Result<Invocation, InvokeError> {
    if let Err(e) = instance.begin(name, args) {
        if let InvokeError::Trap(t) = &e {
            sink(&TraceEvent::Trap(t.clone()));
        }
        return Err(e);
    }
    while *instance.status() == Status::Running {
        let (function, offset, instr) = instance.next_instr().expect("running instance has a next instruction");
        let instr = instr.clone();
        let frames_before = instance.frames().len();
        let store_at = match &instr {
            Instr::Store(kind, m) => {
                let stack = instance.stack();
                stack.len().checked_sub(2).map(|i| {
                    let ea = u64::from(stack[i].as_u32()) + u64::from(m.offset);
                    (ea as usize, kind.width())
                })
            }
            _ => None,
        };
        if let Err(trap) = instance.step() {
            sink(&TraceEvent::Trap(trap.clone()));
            return Err(trap.into());
        }
        let stack = instance.stack();
        let top = stack.last().map(|v| v.taint());
        let delta = match &instr {
            Instr::LocalSet(i) | Instr::LocalTee(i) => {
                Delta::Local(*i, instance.frame_locals()[*i as usize].taint())
            }
            Instr::GlobalSet(i) => Delta::Global(*i, instance.globals()[*i as usize].taint()),
            Instr::Store(..) => match store_at {
                Some((addr, width)) => Delta::Memory {
                    addr,
                    width,
                    label: instance.memory().shadow().load(addr, width),
                },
                None => Delta::None,
            },
            i if pushes(i) => Delta::Push(top.unwrap_or_default()),
            _ if instance.frames().len() < frames_before => {
                let returned = instance.module().func_type(function).results.len() == 1;
                match top {
                    Some(l) if returned => Delta::Return(l),
                    _ => Delta::None,
                }
            }
            _ => Delta::None,
        };
        sink(&TraceEvent::Step {
            step: instance.steps(),
            function,
            offset,
            opcode: instr.name(),
            depth: stack.len(),
            delta,
        });
    }
    let results = instance.take_results();
    let report = crate::report::make_report(instance, &results);
    Ok(Invocation { results, report })
}
