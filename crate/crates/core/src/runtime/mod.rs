//! Execution engine: a structured stack machine over decoded function bodies,
//! with taint propagated alongside every value.

mod memory;
mod numeric;
pub mod trace;
mod value;

use std::sync::Arc;

use thiserror::Error;

use crate::decoder::{
    ConstExpr, Instr, LoadKind, ModuleDef, ValType, PAGE_SIZE,
};
use crate::report::{make_report, TaintReport};
use crate::taint::{assign_label, ControlContext, SourceId, TaintLabel};

pub use memory::LinearMemory;
pub use numeric::exec_numeric;
pub use value::{LiteralError, Value};

pub const DEFAULT_MAX_CALL_DEPTH: usize = 10_000;
/// Default host cap on linear memory, in 64 KiB pages. Each byte also
/// carries a 16-byte shadow label.
pub const DEFAULT_MAX_MEMORY_PAGES: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Trap {
    #[error("unreachable executed")]
    Unreachable,
    #[error("value stack underflow")]
    StackUnderflow,
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: ValType, found: ValType },
    #[error("expected {expected} operands, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("out-of-bounds memory access: {width} bytes at {addr} (memory is {len} bytes)")]
    OutOfBounds { addr: u64, width: usize, len: usize },
    #[error("integer division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    IntegerOverflow,
    #[error("call stack exhausted (limit {0} frames)")]
    CallStackExhausted(usize),
    #[error("indirect call type mismatch")]
    IndirectTypeMismatch,
    #[error("uninitialized table element {0}")]
    NullTableEntry(u32),
    #[error("table index {0} out of bounds")]
    UndefinedElement(u32),
    #[error("unsupported instruction {0}")]
    Unsupported(&'static str),
    #[error("write to immutable global {0}")]
    ImmutableGlobal(u32),
    #[error("data segment {0} does not fit in memory")]
    DataSegmentOutOfBounds(usize),
    #[error("element segment {0} does not fit in table")]
    ElementSegmentOutOfBounds(usize),
    #[error("memory of {pages} pages exceeds the configured limit")]
    MemoryLimit { pages: u32 },
}

impl Trap {
    /// Stable short name, used in traces, reports and fixture manifests.
    pub fn reason(&self) -> &'static str {
        match self {
            Trap::Unreachable => "unreachable",
            Trap::StackUnderflow => "stack-underflow",
            Trap::TypeMismatch { .. } => "type-mismatch",
            Trap::ArityMismatch { .. } => "arity-mismatch",
            Trap::OutOfBounds { .. } => "out-of-bounds",
            Trap::DivisionByZero => "division-by-zero",
            Trap::IntegerOverflow => "integer-overflow",
            Trap::CallStackExhausted(_) => "call-stack-exhausted",
            Trap::IndirectTypeMismatch => "indirect-type-mismatch",
            Trap::NullTableEntry(_) => "null-table-entry",
            Trap::UndefinedElement(_) => "undefined-element",
            Trap::Unsupported(_) => "unsupported",
            Trap::ImmutableGlobal(_) => "immutable-global",
            Trap::DataSegmentOutOfBounds(_) => "data-segment-out-of-bounds",
            Trap::ElementSegmentOutOfBounds(_) => "element-segment-out-of-bounds",
            Trap::MemoryLimit { .. } => "memory-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvokeError {
    #[error("no exported function named `{0}`")]
    ExportNotFound(String),
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("argument {index}: expected {expected}, got {got}")]
    TypeMismatch {
        index: usize,
        expected: ValType,
        got: ValType,
    },
    #[error("trap: {0}")]
    Trap(#[from] Trap),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    pub max_call_depth: usize,
    pub max_memory_pages: u32,
    /// When false, labels are never updated: every value keeps its layout but
    /// carries an empty label. Used to measure the cost of tracking.
    pub tracking: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_call_depth: DEFAULT_MAX_CALL_DEPTH,
            max_memory_pages: DEFAULT_MAX_MEMORY_PAGES,
            tracking: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    /// No invocation in progress.
    Idle,
    Running,
    Finished,
    Trapped(Trap),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    Function,
    Block,
    Loop,
    If,
}

/// One entry of a frame's control stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlScope {
    pub kind: ScopeKind,
    /// Index of the first instruction inside a loop; unused otherwise.
    pub start: usize,
    /// Index of the matching `end`.
    pub end: usize,
    /// Value-stack height on entry.
    pub height: usize,
    /// Values carried by a branch to this scope.
    pub arity: usize,
    /// Capped taint of the conditions this scope's execution depends on.
    pub condition: TaintLabel,
    /// Effective context inside this scope, including all enclosing ones.
    pub context: ControlContext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub function: u32,
    pub pc: usize,
    pub arity: usize,
    locals_base: usize,
    scope_base: usize,
    stack_base: usize,
    /// Extra taint applied to results on return (tainted table index).
    result_taint: TaintLabel,
}

/// Results of a completed invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub results: Vec<Value>,
    pub report: TaintReport,
}

/// Runtime state of one module instance.
#[derive(Debug, Clone)]
pub struct Instance {
    module: Arc<ModuleDef>,
    m: Machine,
}

#[derive(Debug, Clone)]
struct Machine {
    config: Config,
    memory: LinearMemory,
    globals: Vec<Value>,
    table: Vec<Option<u32>>,
    stack: Vec<Value>,
    locals: Vec<Value>,
    frames: Vec<Frame>,
    scopes: Vec<ControlScope>,
    ctx: ControlContext,
    sources: Vec<SourceId>,
    status: Status,
    steps: u64,
    peak_depth: usize,
}

fn const_value(expr: ConstExpr) -> Value {
    match expr {
        ConstExpr::I32(v) => Value::i32(v),
        ConstExpr::I64(v) => Value::i64(v),
        ConstExpr::F32(b) => Value::from_bits(ValType::F32, u64::from(b), TaintLabel::EMPTY),
        ConstExpr::F64(b) => Value::from_bits(ValType::F64, b, TaintLabel::EMPTY),
    }
}

/// Sets up memory, globals and table for `module`, then runs its start
/// function if it has one.
pub fn instantiate(module: impl Into<Arc<ModuleDef>>) -> Result<Instance, Trap> {
    Instance::with_config(module, Config::default())
}

impl Instance {
    pub fn with_config(module: impl Into<Arc<ModuleDef>>, config: Config) -> Result<Instance, Trap> {
        let module: Arc<ModuleDef> = module.into();
        let mut memory = match module.memories.first() {
            Some(l) => LinearMemory::new(l.min, l.max, config.max_memory_pages)?,
            None => LinearMemory::default(),
        };
        for (i, seg) in module.data_segments.iter().enumerate() {
            let ConstExpr::I32(offset) = seg.offset else {
                return Err(Trap::DataSegmentOutOfBounds(i));
            };
            memory
                .init(offset as u32 as usize, &seg.bytes)
                .map_err(|_| Trap::DataSegmentOutOfBounds(i))?;
        }

        let mut table: Vec<Option<u32>> = match module.tables.first() {
            Some(t) => vec![None; t.limits.min as usize],
            None => Vec::new(),
        };
        for (i, seg) in module.element_segments.iter().enumerate() {
            let ConstExpr::I32(offset) = seg.offset else {
                return Err(Trap::ElementSegmentOutOfBounds(i));
            };
            let start = offset as u32 as usize;
            let end = start
                .checked_add(seg.functions.len())
                .filter(|&e| e <= table.len())
                .ok_or(Trap::ElementSegmentOutOfBounds(i))?;
            for (slot, &f) in table[start..end].iter_mut().zip(&seg.functions) {
                *slot = Some(f);
            }
        }

        let globals = module.globals.iter().map(|g| const_value(g.init)).collect();

        let mut instance = Instance {
            m: Machine {
                config,
                memory,
                globals,
                table,
                stack: Vec::new(),
                locals: Vec::new(),
                frames: Vec::new(),
                scopes: Vec::new(),
                ctx: ControlContext::CLEAN,
                sources: Vec::new(),
                status: Status::Idle,
                steps: 0,
                peak_depth: 0,
            },
            module,
        };

        if let Some(start) = instance.module.start {
            instance.m.reset(Vec::new());
            instance.m.call(&instance.module, start, TaintLabel::EMPTY)?;
            instance.run()?;
            instance.m.status = Status::Idle;
        }
        Ok(instance)
    }

    pub fn module(&self) -> &ModuleDef {
        &self.module
    }

    pub fn config(&self) -> &Config {
        &self.m.config
    }

    pub fn set_tracking(&mut self, tracking: bool) {
        self.m.config.tracking = tracking;
    }

    pub fn status(&self) -> &Status {
        &self.m.status
    }

    pub fn memory(&self) -> &LinearMemory {
        &self.m.memory
    }

    pub fn globals(&self) -> &[Value] {
        &self.m.globals
    }

    pub fn table(&self) -> &[Option<u32>] {
        &self.m.table
    }

    pub fn stack(&self) -> &[Value] {
        &self.m.stack
    }

    pub fn frames(&self) -> &[Frame] {
        &self.m.frames
    }

    /// Locals of the innermost frame.
    pub fn frame_locals(&self) -> &[Value] {
        match self.m.frames.last() {
            Some(f) => &self.m.locals[f.locals_base..],
            None => &[],
        }
    }

    /// Control scopes of the innermost frame, outermost first.
    pub fn frame_scopes(&self) -> &[ControlScope] {
        match self.m.frames.last() {
            Some(f) => &self.m.scopes[f.scope_base..],
            None => &[],
        }
    }

    pub fn context(&self) -> ControlContext {
        self.m.ctx
    }

    /// Taint sources of the current or last invocation.
    pub fn sources(&self) -> &[SourceId] {
        &self.m.sources
    }

    /// Instructions executed by the current or last invocation.
    pub fn steps(&self) -> u64 {
        self.m.steps
    }

    /// Deepest call stack reached by the current or last invocation.
    pub fn peak_call_depth(&self) -> usize {
        self.m.peak_depth
    }

    /// The instruction about to execute: function index, cursor, instruction.
    pub fn next_instr(&self) -> Option<(u32, usize, &Instr)> {
        let f = self.m.frames.last()?;
        let body = &self.module.functions[f.function as usize].body;
        body.get(f.pc).map(|i| (f.function, f.pc, i))
    }

    /// Checks the export and arguments, and pushes the entry frame without
    /// executing anything. Drive with [`Instance::step`] or [`Instance::run`].
    pub fn begin(&mut self, name: &str, args: &[Value]) -> Result<(), InvokeError> {
        let f = self
            .module
            .exported_function(name)
            .ok_or_else(|| InvokeError::ExportNotFound(name.to_string()))?;
        let ty = self.module.func_type(f);
        if ty.params.len() != args.len() {
            return Err(InvokeError::ArityMismatch {
                expected: ty.params.len(),
                got: args.len(),
            });
        }
        for (index, (arg, &expected)) in args.iter().zip(&ty.params).enumerate() {
            if arg.ty() != expected {
                return Err(InvokeError::TypeMismatch {
                    index,
                    expected,
                    got: arg.ty(),
                });
            }
        }
        let all = args.iter().fold(TaintLabel::EMPTY, |acc, a| acc.merge(a.taint()));
        let sources: Vec<SourceId> = all.iter().map(|(id, _)| id).collect();
        self.m.reset(sources);
        self.m.stack.extend_from_slice(args);
        if let Err(trap) = self.m.call(&self.module, f, TaintLabel::EMPTY) {
            self.m.status = Status::Trapped(trap.clone());
            return Err(trap.into());
        }
        Ok(())
    }

    /// Executes exactly one instruction.
    pub fn step(&mut self) -> Result<&Status, Trap> {
        if self.m.status != Status::Running {
            return Ok(&self.m.status);
        }
        let r = if self.m.config.tracking {
            self.m.step::<true>(&self.module)
        } else {
            self.m.step::<false>(&self.module)
        };
        if let Err(trap) = r {
            self.m.status = Status::Trapped(trap.clone());
            return Err(trap);
        }
        Ok(&self.m.status)
    }

    /// Runs until the invocation finishes or traps.
    pub fn run(&mut self) -> Result<(), Trap> {
        let r = if self.m.config.tracking {
            self.m.run::<true>(&self.module)
        } else {
            self.m.run::<false>(&self.module)
        };
        if let Err(trap) = r {
            self.m.status = Status::Trapped(trap.clone());
            return Err(trap);
        }
        Ok(())
    }

    /// Pops the results of a finished invocation.
    pub fn take_results(&mut self) -> Vec<Value> {
        std::mem::take(&mut self.m.stack)
    }

    /// Runs an exported function to completion.
    pub fn invoke(&mut self, name: &str, args: &[Value]) -> Result<Invocation, InvokeError> {
        self.begin(name, args)?;
        self.run()?;
        let results = self.take_results();
        let report = make_report(self, &results);
        Ok(Invocation { results, report })
    }
}

impl Machine {
    fn reset(&mut self, sources: Vec<SourceId>) {
        self.stack.clear();
        self.locals.clear();
        self.frames.clear();
        self.scopes.clear();
        self.ctx = ControlContext::CLEAN;
        self.sources = sources;
        self.status = Status::Running;
        self.steps = 0;
        self.peak_depth = 0;
    }

    fn run<const TRACK: bool>(&mut self, module: &ModuleDef) -> Result<(), Trap> {
        while self.status == Status::Running {
            self.step::<TRACK>(module)?;
        }
        Ok(())
    }

    #[inline]
    fn label<const TRACK: bool>(&self, value: TaintLabel) -> TaintLabel {
        if TRACK {
            assign_label(value, &self.ctx, None)
        } else {
            TaintLabel::EMPTY
        }
    }

    #[inline]
    fn floor(&self) -> usize {
        self.frames.last().map_or(0, |f| f.stack_base)
    }

    #[inline]
    fn pop(&mut self) -> Result<Value, Trap> {
        if self.stack.len() <= self.floor() {
            return Err(Trap::StackUnderflow);
        }
        Ok(self.stack.pop().expect("checked above"))
    }

    #[inline]
    fn pop_typed(&mut self, ty: ValType) -> Result<Value, Trap> {
        let v = self.pop()?;
        if v.ty() != ty {
            return Err(Trap::TypeMismatch {
                expected: ty,
                found: v.ty(),
            });
        }
        Ok(v)
    }

    #[inline]
    fn push(&mut self, v: Value) {
        self.stack.push(v);
    }

    fn refresh_ctx(&mut self) {
        self.ctx = self
            .scopes
            .last()
            .map_or(ControlContext::CLEAN, |s| s.context);
    }

    fn push_scope(&mut self, kind: ScopeKind, start: usize, end: usize, arity: usize, condition: TaintLabel) {
        let context = self.ctx.under(condition);
        self.scopes.push(ControlScope {
            kind,
            start,
            end,
            height: self.stack.len(),
            arity,
            condition: condition.cap_indirect(),
            context,
        });
        self.ctx = context;
    }

    /// Makes the innermost scope control-dependent on `condition`.
    #[inline]
    fn taint_innermost(&mut self, condition: TaintLabel) {
        if condition.is_empty() {
            return;
        }
        if let Some(scope) = self.scopes.last_mut() {
            scope.condition = scope.condition.merge(condition.cap_indirect());
            scope.context = scope.context.under(condition);
            self.ctx = scope.context;
        }
    }

    /// Makes every scope from `idx` inward control-dependent on `condition`.
    fn taint_scopes_from(&mut self, idx: usize, condition: TaintLabel) {
        let capped = condition.cap_indirect();
        for scope in &mut self.scopes[idx..] {
            scope.condition = scope.condition.merge(capped);
            scope.context = scope.context.under(capped);
        }
        self.refresh_ctx();
    }

    fn call(&mut self, module: &ModuleDef, function: u32, index_taint: TaintLabel) -> Result<(), Trap> {
        if self.frames.len() >= self.config.max_call_depth {
            return Err(Trap::CallStackExhausted(self.config.max_call_depth));
        }
        let func = &module.functions[function as usize];
        let ty = &module.types[func.type_index as usize];
        let n = ty.params.len();
        let floor = self.floor();
        if self.stack.len() < floor + n {
            return Err(Trap::StackUnderflow);
        }
        let args_at = self.stack.len() - n;
        for (v, &t) in self.stack[args_at..].iter().zip(&ty.params) {
            if v.ty() != t {
                return Err(Trap::TypeMismatch {
                    expected: t,
                    found: v.ty(),
                });
            }
        }
        let locals_base = self.locals.len();
        self.locals.extend(self.stack.drain(args_at..));
        self.locals.extend(func.local_types().map(Value::zero));

        let index_taint = index_taint.cap_indirect();
        self.frames.push(Frame {
            function,
            pc: 0,
            arity: ty.results.len(),
            locals_base,
            scope_base: self.scopes.len(),
            stack_base: self.stack.len(),
            result_taint: index_taint,
        });
        self.peak_depth = self.peak_depth.max(self.frames.len());
        let last = func.body.len() - 1;
        self.push_scope(ScopeKind::Function, 0, last, ty.results.len(), index_taint);
        Ok(())
    }

    fn do_return<const TRACK: bool>(&mut self) -> Result<(), Trap> {
        let frame = self.frames.pop().expect("return with a live frame");
        let len = self.stack.len();
        if len < frame.stack_base + frame.arity {
            return Err(Trap::StackUnderflow);
        }
        self.stack.drain(frame.stack_base..len - frame.arity);
        self.scopes.truncate(frame.scope_base);
        self.locals.truncate(frame.locals_base);
        self.refresh_ctx();
        if self.frames.is_empty() {
            self.status = Status::Finished;
        } else if TRACK {
            let extra = frame.result_taint;
            let at = self.stack.len() - frame.arity;
            let ctx = self.ctx;
            for v in &mut self.stack[at..] {
                *v = v.with_taint(assign_label(v.taint().merge(extra), &ctx, None));
            }
        }
        Ok(())
    }

    /// Branch to the scope `depth` levels out.
    fn branch<const TRACK: bool>(&mut self, depth: u32) -> Result<(), Trap> {
        let idx = self.scopes.len() - 1 - depth as usize;
        let scope = self.scopes[idx];
        if scope.kind == ScopeKind::Function {
            return self.do_return::<TRACK>();
        }
        let arity = if scope.kind == ScopeKind::Loop { 0 } else { scope.arity };
        let len = self.stack.len();
        if len < scope.height + arity {
            return Err(Trap::StackUnderflow);
        }
        self.stack.drain(scope.height..len - arity);
        let frame = self.frames.last_mut().expect("branch inside a frame");
        if scope.kind == ScopeKind::Loop {
            // Re-entering the loop keeps its scope and any context it picked up.
            self.scopes.truncate(idx + 1);
            frame.pc = scope.start;
        } else {
            self.scopes.truncate(idx);
            frame.pc = scope.end + 1;
        }
        self.refresh_ctx();
        Ok(())
    }

    fn step<const TRACK: bool>(&mut self, module: &ModuleDef) -> Result<(), Trap> {
        let frame = self.frames.last_mut().expect("running with a frame");
        let func_index = frame.function;
        let pc = frame.pc;
        frame.pc += 1;
        let locals_base = frame.locals_base;
        let instr = &module.functions[func_index as usize].body[pc];
        self.steps += 1;

        match instr {
            Instr::Unreachable => return Err(Trap::Unreachable),
            Instr::Nop => {}
            Instr::Block { ty, end } => {
                self.push_scope(ScopeKind::Block, 0, *end as usize, ty.arity(), TaintLabel::EMPTY)
            }
            Instr::Loop { end, .. } => {
                self.push_scope(ScopeKind::Loop, pc + 1, *end as usize, 0, TaintLabel::EMPTY)
            }
            Instr::If { ty, else_at, end } => {
                let c = self.pop_typed(ValType::I32)?;
                let cond = if TRACK { c.taint() } else { TaintLabel::EMPTY };
                self.push_scope(ScopeKind::If, 0, *end as usize, ty.arity(), cond);
                if c.as_u32() == 0 {
                    let frame = self.frames.last_mut().expect("frame");
                    frame.pc = if else_at == end {
                        *end as usize
                    } else {
                        *else_at as usize + 1
                    };
                }
            }
            Instr::Else { end } => {
                self.frames.last_mut().expect("frame").pc = *end as usize;
            }
            Instr::End => {
                let scope = self.scopes.pop().expect("end with an open scope");
                if scope.kind == ScopeKind::Function {
                    self.scopes.push(scope);
                    return self.do_return::<TRACK>();
                }
                self.refresh_ctx();
            }
            Instr::Br(depth) => self.branch::<TRACK>(*depth)?,
            Instr::BrIf(depth) => {
                let c = self.pop_typed(ValType::I32)?;
                if TRACK {
                    self.taint_innermost(c.taint());
                }
                if c.as_u32() != 0 {
                    self.branch::<TRACK>(*depth)?;
                }
            }
            Instr::BrTable { targets, default } => {
                let i = self.pop_typed(ValType::I32)?;
                let depth = targets.get(i.as_u32() as usize).copied().unwrap_or(*default);
                // Every arm leaves the current scope, so the dependent region is
                // whatever still runs inside the scope enclosing the outermost target.
                let outer = targets.iter().copied().fold(*default, u32::max) as usize;
                let base = self.frames.last().map_or(0, |f| f.scope_base);
                let enclosing = (self.scopes.len() - 1)
                    .checked_sub(outer + 1)
                    .filter(|&idx| idx >= base);
                let diverges = targets.iter().any(|&t| t != *default);
                self.branch::<TRACK>(depth)?;
                if let Some(idx) = enclosing {
                    if TRACK && diverges && !i.taint().is_empty() && self.scopes.len() > idx {
                        self.taint_scopes_from(idx, i.taint());
                    }
                }
            }
            Instr::Return => self.do_return::<TRACK>()?,
            Instr::Call(f) => self.call(module, *f, TaintLabel::EMPTY)?,
            Instr::CallIndirect(type_index) => {
                let i = self.pop_typed(ValType::I32)?;
                let slot = i.as_u32();
                let target = match self.table.get(slot as usize) {
                    None => return Err(Trap::UndefinedElement(slot)),
                    Some(None) => return Err(Trap::NullTableEntry(slot)),
                    Some(Some(f)) => *f,
                };
                if module.types[*type_index as usize] != *module.func_type(target) {
                    return Err(Trap::IndirectTypeMismatch);
                }
                let index_taint = if TRACK { i.taint() } else { TaintLabel::EMPTY };
                self.call(module, target, index_taint)?;
            }
            Instr::Drop => {
                self.pop()?;
            }
            Instr::Select => {
                let c = self.pop_typed(ValType::I32)?;
                let b = self.pop()?;
                let a = self.pop()?;
                if a.ty() != b.ty() {
                    return Err(Trap::TypeMismatch {
                        expected: a.ty(),
                        found: b.ty(),
                    });
                }
                let chosen = if c.as_u32() != 0 { a } else { b };
                let label = if TRACK {
                    assign_label(chosen.taint(), &self.ctx, Some(c.taint()))
                } else {
                    TaintLabel::EMPTY
                };
                self.push(chosen.with_taint(label));
            }
            Instr::LocalGet(i) => {
                let v = self.locals[locals_base + *i as usize];
                let label = self.label::<TRACK>(v.taint());
                self.push(v.with_taint(label));
            }
            Instr::LocalSet(i) | Instr::LocalTee(i) => {
                let slot = locals_base + *i as usize;
                let expected = self.locals[slot].ty();
                let v = self.pop_typed(expected)?;
                let v = v.with_taint(self.label::<TRACK>(v.taint()));
                self.locals[slot] = v;
                if matches!(instr, Instr::LocalTee(_)) {
                    self.push(v);
                }
            }
            Instr::GlobalGet(i) => {
                let v = self.globals[*i as usize];
                let label = self.label::<TRACK>(v.taint());
                self.push(v.with_taint(label));
            }
            Instr::GlobalSet(i) => {
                if !module.globals[*i as usize].mutable {
                    return Err(Trap::ImmutableGlobal(*i));
                }
                let expected = self.globals[*i as usize].ty();
                let v = self.pop_typed(expected)?;
                self.globals[*i as usize] = v.with_taint(self.label::<TRACK>(v.taint()));
            }
            Instr::Load(kind, m) => {
                let addr = self.pop_typed(ValType::I32)?;
                let width = kind.width();
                let ea = self.memory.check(addr.as_u32(), m.offset, width)?;
                let raw = self.memory.read(ea, width);
                let bits = extend(*kind, raw);
                let label = if TRACK {
                    let bytes = self.memory.shadow().load(ea, width);
                    assign_label(bytes, &self.ctx, Some(addr.taint()))
                } else {
                    TaintLabel::EMPTY
                };
                self.push(Value::from_bits(kind.result_type(), bits, label));
            }
            Instr::Store(kind, m) => {
                let v = self.pop_typed(kind.value_type())?;
                let addr = self.pop_typed(ValType::I32)?;
                let width = kind.width();
                let ea = self.memory.check(addr.as_u32(), m.offset, width)?;
                self.memory.write(ea, width, v.bits());
                if TRACK {
                    let label = assign_label(v.taint(), &self.ctx, Some(addr.taint()));
                    self.memory.shadow_mut().store(ea, width, label);
                }
            }
            Instr::MemorySize => {
                let pages = self.memory.pages() as i32;
                let label = self.label::<TRACK>(TaintLabel::EMPTY);
                self.push(Value::i32(pages).with_taint(label));
            }
            Instr::MemoryGrow => {
                let delta = self.pop_typed(ValType::I32)?;
                let result = match self.memory.grow(delta.as_u32()) {
                    Some(old) => old as i32,
                    None => -1,
                };
                let label = self.label::<TRACK>(delta.taint().cap_indirect());
                self.push(Value::i32(result).with_taint(label));
            }
            Instr::I32Const(v) => {
                let label = self.label::<TRACK>(TaintLabel::EMPTY);
                self.push(Value::i32(*v).with_taint(label));
            }
            Instr::I64Const(v) => {
                let label = self.label::<TRACK>(TaintLabel::EMPTY);
                self.push(Value::i64(*v).with_taint(label));
            }
            Instr::Num(op) => {
                let (ty, arity) = op.operands();
                let (bits, taint) = if arity == 1 {
                    let a = self.pop_typed(ty)?;
                    (numeric::unary(*op, a.bits()), a.taint())
                } else {
                    let b = self.pop_typed(ty)?;
                    let a = self.pop_typed(ty)?;
                    let bits = numeric::binary(*op, a.bits(), b.bits())?;
                    let taint = if TRACK { a.taint().merge(b.taint()) } else { TaintLabel::EMPTY };
                    (bits, taint)
                };
                let label = self.label::<TRACK>(taint);
                self.push(Value::from_bits(op.result_type(), bits, label));
            }
            Instr::Float(op) => return Err(Trap::Unsupported(op.name())),
        }
        Ok(())
    }
}

/// Sign- or zero-extends a sub-width load.
#[inline]
fn extend(kind: LoadKind, raw: u64) -> u64 {
    let width = kind.width();
    if width == 8 {
        return raw;
    }
    let bits = width * 8;
    let value = if kind.signed() {
        let shift = 64 - bits;
        (((raw << shift) as i64) >> shift) as u64
    } else {
        raw
    };
    match kind.result_type() {
        ValType::I32 => value & 0xFFFF_FFFF,
        _ => value,
    }
}

/// Pages needed to hold `bytes`, rounded up.
pub fn pages_for(bytes: usize) -> u32 {
    bytes.div_ceil(PAGE_SIZE) as u32
}

#[cfg(test)]
mod tests;
