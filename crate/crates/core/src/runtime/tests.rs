use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::decoder::{
    decode_module, BlockType, DataSegment, FuncType, Function, Limits, MemArg, NumOp, StoreKind,
};
use crate::taint::TaintLevel;

fn fixture(name: &str) -> Arc<ModuleDef> {
    let path = format!("{}/fixtures/{name}.wasm", env!("CARGO_MANIFEST_DIR"));
    Arc::new(decode_module(&std::fs::read(path).unwrap()).unwrap())
}

fn src(i: usize) -> SourceId {
    SourceId::new(i).unwrap()
}

/// One exported function `f` with the given body.
fn single(params: Vec<ValType>, results: Vec<ValType>, body: Vec<Instr>) -> ModuleDef {
    let mut m = ModuleDef {
        types: vec![FuncType { params, results }],
        functions: vec![Function {
            type_index: 0,
            locals: vec![],
            body,
        }],
        ..Default::default()
    };
    m.exports.insert(
        "f".into(),
        crate::decoder::Export {
            kind: crate::decoder::ExternKind::Func,
            index: 0,
        },
    );
    m
}

#[test]
fn add_pops_two_pushes_one() {
    let m = single(
        vec![],
        vec![ValType::I32],
        vec![Instr::I32Const(2), Instr::I32Const(3), Instr::Num(NumOp::I32Add), Instr::End],
    );
    let mut inst = instantiate(m).unwrap();
    inst.begin("f", &[]).unwrap();
    inst.step().unwrap();
    inst.step().unwrap();
    assert_eq!(inst.stack().iter().map(|v| v.as_i32()).collect::<Vec<_>>(), [2, 3]);
    inst.step().unwrap();
    assert_eq!(inst.stack().iter().map(|v| v.as_i32()).collect::<Vec<_>>(), [5]);
    assert_eq!(inst.step().unwrap(), &Status::Finished);
}

#[test]
fn ill_typed_add_traps_without_side_effects() {
    let mut m = single(
        vec![],
        vec![ValType::I32],
        vec![
            Instr::I32Const(0),
            Instr::I32Const(9),
            Instr::Store(StoreKind::I32, MemArg { align: 2, offset: 0 }),
            Instr::I64Const(1),
            Instr::I32Const(1),
            Instr::Num(NumOp::I32Add),
            Instr::End,
        ],
    );
    m.memories.push(Limits { min: 1, max: None });
    let mut inst = instantiate(m).unwrap();
    let err = inst.invoke("f", &[]).unwrap_err();
    assert_eq!(
        err,
        InvokeError::Trap(Trap::TypeMismatch {
            expected: ValType::I32,
            found: ValType::I64
        })
    );
    assert_eq!(&inst.memory().bytes()[..4], &[9, 0, 0, 0]);
    assert!(matches!(inst.status(), Status::Trapped(_)));
}

#[test]
fn div_by_zero_traps() {
    let m = single(
        vec![],
        vec![ValType::I32],
        vec![Instr::I32Const(7), Instr::I32Const(0), Instr::Num(NumOp::I32DivU), Instr::End],
    );
    let err = instantiate(m).unwrap().invoke("f", &[]).unwrap_err();
    assert_eq!(err, InvokeError::Trap(Trap::DivisionByZero));
    assert_eq!(Trap::DivisionByZero.reason(), "division-by-zero");
}

#[test]
fn memory_store_is_little_endian() {
    let mut inst = instantiate(fixture("memory")).unwrap();
    inst.invoke("store_word", &[Value::i32(0), Value::i32(0x0A0B0C0D)]).unwrap();
    assert_eq!(&inst.memory().bytes()[..4], &[0x0D, 0x0C, 0x0B, 0x0A]);
    let out = inst.invoke("load_word", &[Value::i32(0)]).unwrap();
    assert_eq!(out.results[0].as_i32(), 0x0A0B0C0D);
}

#[test]
fn sub_width_loads_extend() {
    let mut inst = instantiate(fixture("memory")).unwrap();
    inst.invoke("store_word", &[Value::i32(100), Value::i32(0xFF)]).unwrap();
    let s = inst.invoke("load_s8", &[Value::i32(100)]).unwrap();
    let u = inst.invoke("load_u8", &[Value::i32(100)]).unwrap();
    assert_eq!(s.results[0].as_i32(), i32::from(0xFFu8 as i8));
    assert_eq!(u.results[0].as_i32(), 255);
    let r = inst.invoke("roundtrip64", &[Value::i64(-2)]).unwrap();
    assert_eq!(r.results[0].as_i64(), -2);
}

#[test]
fn load_past_end_traps() {
    let mut inst = instantiate(fixture("memory")).unwrap();
    let len = inst.memory().len() as i32;
    let err = inst.invoke("load_word", &[Value::i32(len - 3)]).unwrap_err();
    assert!(matches!(err, InvokeError::Trap(Trap::OutOfBounds { width: 4, .. })), "{err:?}");
    assert!(inst.invoke("load_word", &[Value::i32(len - 4)]).is_ok());
}

#[test]
fn memory_grow_examples() {
    let mut inst = instantiate(fixture("memory")).unwrap();
    let r = inst.invoke("grow", &[Value::i32(0)]).unwrap();
    assert_eq!(r.results[0].as_i32(), 1);
    assert_eq!(inst.memory().len(), PAGE_SIZE);
    let r = inst.invoke("grow", &[Value::i32(2)]).unwrap();
    assert_eq!(r.results[0].as_i32(), -1, "max is 2 pages");
    assert_eq!(inst.memory().len(), PAGE_SIZE);
    let r = inst.invoke("grow", &[Value::i32(1)]).unwrap();
    assert_eq!(r.results[0].as_i32(), 1);
    assert_eq!(inst.memory().len(), 131072);
    assert_eq!(inst.memory().shadow().len(), 131072);
    assert_eq!(inst.invoke("size", &[]).unwrap().results[0].as_i32(), 2);
}

#[test]
fn grow_without_max_and_tainted_delta() {
    let mut m = single(
        vec![ValType::I32],
        vec![ValType::I32],
        vec![Instr::LocalGet(0), Instr::MemoryGrow, Instr::End],
    );
    m.memories.push(Limits { min: 1, max: None });
    let mut inst = instantiate(m).unwrap();
    let r = inst.invoke("f", &[Value::i32(1).tainted_by(src(0))]).unwrap();
    assert_eq!(r.results[0].as_i32(), 1);
    assert_eq!(r.results[0].taint().level(src(0)), TaintLevel::Indirect);
    assert_eq!(inst.memory().len(), 131072);
    assert!(inst.memory().shadow().labels()[65536..].iter().all(|l| l.is_empty()));
}

#[test]
fn instantiate_copies_data_clean() {
    let inst = instantiate(fixture("memory")).unwrap();
    assert_eq!(&inst.memory().bytes()[8..11], b"abc");
    assert_eq!(inst.memory().shadow().tainted_bytes(), 0);
}

#[test]
fn data_segment_past_end_traps() {
    let mut m = single(vec![], vec![], vec![Instr::End]);
    m.memories.push(Limits { min: 1, max: None });
    m.data_segments.push(DataSegment {
        memory: 0,
        offset: ConstExpr::I32(65536),
        bytes: vec![1],
    });
    assert_eq!(instantiate(m).unwrap_err(), Trap::DataSegmentOutOfBounds(0));
}

#[test]
fn function_only_module_has_empty_memory() {
    let mut inst = instantiate(fixture("basic")).unwrap();
    assert!(inst.memory().is_empty());
    let r = inst.invoke("identity", &[Value::i32(17)]).unwrap();
    assert_eq!(r.results, [Value::i32(17)]);
    assert!(r.report.results[0].taint.is_empty());
}

#[test]
fn start_function_runs_first() {
    let mut inst = instantiate(fixture("start")).unwrap();
    assert_eq!(inst.invoke("read", &[]).unwrap().results[0].as_i32(), 42);
}

#[test]
fn br_if_untaken_falls_through() {
    let m = single(
        vec![],
        vec![ValType::I32],
        vec![
            Instr::Block { ty: BlockType::Empty, end: 4 },
            Instr::I32Const(5),
            Instr::I32Const(0),
            Instr::BrIf(1),
            Instr::End,
            Instr::End,
        ],
    );
    let mut inst = instantiate(m).unwrap();
    inst.begin("f", &[]).unwrap();
    for _ in 0..3 {
        inst.step().unwrap();
    }
    assert_eq!(inst.stack().len(), 2);
    inst.step().unwrap();
    assert_eq!(inst.stack().iter().map(|v| v.as_i32()).collect::<Vec<_>>(), [5]);
    assert_eq!(inst.next_instr().unwrap().2, &Instr::End);
}

#[test]
fn nested_br_exits_both_blocks() {
    let mut inst = instantiate(fixture("control")).unwrap();
    assert_eq!(inst.invoke("nested_exit", &[Value::i32(13)]).unwrap().results[0].as_i32(), 13);
}

#[test]
fn br_table_picks_target_or_default() {
    let mut inst = instantiate(fixture("control")).unwrap();
    let expect = [100, 200, 300, 400, 400];
    for (i, want) in [0, 1, 2, 9, -1].into_iter().zip(expect) {
        let r = inst.invoke("dispatch", &[Value::i32(i)]).unwrap();
        assert_eq!(r.results[0].as_i32(), want, "index {i}");
    }
}

#[test]
fn br_table_tainted_index_taints_arms() {
    let mut inst = instantiate(fixture("control")).unwrap();
    let r = inst.invoke("dispatch", &[Value::i32(2).tainted_by(src(0))]).unwrap();
    assert_eq!(r.results[0].taint(), TaintLabel::EMPTY.with(src(0), TaintLevel::Indirect));
}

#[test]
fn call_indirect_dispatches_and_taints() {
    let mut inst = instantiate(fixture("control")).unwrap();
    let r = inst.invoke("apply", &[Value::i32(1), Value::i32(9)]).unwrap();
    assert_eq!(r.results[0].as_i32(), 81);
    assert!(r.results[0].taint().is_empty());

    let r = inst
        .invoke("apply", &[Value::i32(1).tainted_by(src(0)), Value::i32(9)])
        .unwrap();
    assert_eq!(r.results[0].taint(), TaintLabel::EMPTY.with(src(0), TaintLevel::Indirect));

    let r = inst
        .invoke("apply", &[Value::i32(0), Value::i32(9).tainted_by(src(1))])
        .unwrap();
    assert_eq!(r.results[0].as_i32(), 18);
    assert_eq!(r.results[0].taint(), TaintLabel::source(src(1)));
}

#[test]
fn call_indirect_faults() {
    let mut inst = instantiate(fixture("control")).unwrap();
    assert_eq!(
        inst.invoke("apply_wrong_type", &[Value::i32(0)]).unwrap_err(),
        InvokeError::Trap(Trap::IndirectTypeMismatch)
    );
    assert_eq!(
        inst.invoke("apply", &[Value::i32(3), Value::i32(1)]).unwrap_err(),
        InvokeError::Trap(Trap::NullTableEntry(3))
    );
    assert_eq!(
        inst.invoke("apply", &[Value::i32(4), Value::i32(1)]).unwrap_err(),
        InvokeError::Trap(Trap::UndefinedElement(4))
    );
}

#[test]
fn select_taint() {
    let mut inst = instantiate(fixture("control")).unwrap();
    let a = Value::i32(1).tainted_by(src(0));
    let b = Value::i32(2);
    let c = Value::i32(1).tainted_by(src(2));
    let r = inst.invoke("choose", &[a, b, c]).unwrap();
    assert_eq!(r.results[0].as_i32(), 1);
    assert_eq!(
        r.results[0].taint(),
        TaintLabel::source(src(0)).with(src(2), TaintLevel::Indirect)
    );
}

#[test]
fn if_condition_taints_then_arm() {
    let mut inst = instantiate(fixture("control")).unwrap();
    let r = inst.invoke("guarded", &[Value::i32(1).tainted_by(src(0))]).unwrap();
    assert_eq!(r.results[0].as_i32(), 9);
    assert_eq!(r.results[0].taint(), TaintLabel::EMPTY.with(src(0), TaintLevel::Indirect));
    let r = inst.invoke("guarded", &[Value::i32(1)]).unwrap();
    assert!(r.results[0].taint().is_empty());
}

#[test]
fn loop_exit_condition_taints_counter() {
    let mut inst = instantiate(fixture("control")).unwrap();
    let r = inst.invoke("count_to", &[Value::i32(5).tainted_by(src(0))]).unwrap();
    assert_eq!(r.results[0].as_i32(), 5);
    assert_eq!(r.results[0].taint(), TaintLabel::EMPTY.with(src(0), TaintLevel::Indirect));
}

#[test]
fn recursive_fact_reaches_depth_six() {
    let mut inst = instantiate(fixture("fact_O0")).unwrap();
    let r = inst.invoke("fact", &[Value::i32(5).tainted_by(src(0))]).unwrap();
    assert_eq!(r.results[0].as_i32(), (1..=5).product::<i32>());
    assert_eq!(r.results[0].taint(), TaintLabel::source(src(0)));
    assert_eq!(inst.peak_call_depth(), 6);
}

#[test]
fn call_depth_limit_traps() {
    let config = Config {
        max_call_depth: 20,
        ..Config::default()
    };
    let mut inst = Instance::with_config(fixture("recurse_O0"), config).unwrap();
    assert_eq!(inst.invoke("depth", &[Value::i32(10)]).unwrap().results[0].as_i32(), 10);
    assert_eq!(
        inst.invoke("depth", &[Value::i32(50)]).unwrap_err(),
        InvokeError::Trap(Trap::CallStackExhausted(20))
    );
}

#[test]
fn unreachable_traps() {
    let mut inst = instantiate(fixture("basic")).unwrap();
    assert_eq!(inst.invoke("boom", &[]).unwrap_err(), InvokeError::Trap(Trap::Unreachable));
}

#[test]
fn invoke_argument_checks() {
    let mut inst = instantiate(fixture("basic")).unwrap();
    assert_eq!(
        inst.invoke("nope", &[]).unwrap_err(),
        InvokeError::ExportNotFound("nope".into())
    );
    assert_eq!(
        inst.invoke("add", &[Value::i32(1)]).unwrap_err(),
        InvokeError::ArityMismatch { expected: 2, got: 1 }
    );
    assert_eq!(
        inst.invoke("add64", &[Value::i32(1), Value::i64(1)]).unwrap_err(),
        InvokeError::TypeMismatch {
            index: 0,
            expected: ValType::I64,
            got: ValType::I32
        }
    );
}

#[test]
fn float_opcodes_trap() {
    let mut inst = instantiate(fixture("floats")).unwrap();
    let err = inst.invoke("fadd", &[]).unwrap_err();
    assert!(matches!(err, InvokeError::Trap(Trap::Unsupported(_))), "{err:?}");
    assert_eq!(inst.invoke("ints", &[]).unwrap().results[0].as_i32(), 5);
}

#[test]
fn untracked_mode_computes_same_values() {
    let module = fixture("totient_O0");
    let arg = Value::i32(10).tainted_by(src(0));
    let mut tracked = instantiate(module.clone()).unwrap();
    let mut plain = Instance::with_config(module, Config { tracking: false, ..Config::default() }).unwrap();
    let a = tracked.invoke("totient_iterative", &[arg]).unwrap();
    let b = plain.invoke("totient_iterative", &[arg]).unwrap();
    assert_eq!(a.results[0].as_i32(), b.results[0].as_i32());
    assert_eq!(a.results[0].taint(), TaintLabel::source(src(0)));
    assert!(b.results[0].taint().is_empty());
    assert_eq!(plain.memory().shadow().tainted_bytes(), 0);
    assert_eq!(tracked.steps(), plain.steps());
}

#[test]
fn runs_are_deterministic() {
    let module = fixture("arrays_O0");
    let args = [Value::i32(17).tainted_by(src(0)), Value::i32(5).tainted_by(src(1))];
    let a = instantiate(module.clone()).unwrap().invoke("array_kth", &args).unwrap();
    let b = instantiate(module).unwrap().invoke("array_kth", &args).unwrap();
    assert_eq!(a, b);
}

/// Checks after each branch that the stack sits at the target's entry height
/// plus the values it carries.
fn check_branch_heights(inst: &mut Instance) {
    while *inst.status() == Status::Running {
        let (_, _, instr) = inst.next_instr().unwrap();
        let scopes = inst.frame_scopes().to_vec();
        let stack = inst.stack();
        let taken = match instr {
            Instr::Br(d) => Some(*d),
            Instr::BrIf(d) if stack.last().unwrap().as_u32() != 0 => Some(*d),
            Instr::BrTable { targets, default } => {
                let i = stack.last().unwrap().as_u32() as usize;
                Some(targets.get(i).copied().unwrap_or(*default))
            }
            _ => None,
        };
        inst.step().unwrap();
        if let Some(d) = taken {
            let target = scopes[scopes.len() - 1 - d as usize];
            if target.kind == ScopeKind::Function {
                continue;
            }
            let carried = if target.kind == ScopeKind::Loop { 0 } else { target.arity };
            assert_eq!(inst.stack().len(), target.height + carried);
        }
    }
}

#[test]
fn branch_restores_stack_height() {
    let mut inst = instantiate(fixture("control")).unwrap();
    for i in 0..5 {
        inst.begin("dispatch", &[Value::i32(i)]).unwrap();
        check_branch_heights(&mut inst);
    }
    inst.begin("count_to", &[Value::i32(7)]).unwrap();
    check_branch_heights(&mut inst);
    inst.begin("nested_exit", &[Value::i32(7)]).unwrap();
    check_branch_heights(&mut inst);
    let mut inst = instantiate(fixture("branching_O0")).unwrap();
    for k in 0..7 {
        inst.begin("pick", &[Value::i32(k)]).unwrap();
        check_branch_heights(&mut inst);
    }
}

#[derive(Debug, Clone)]
enum MemOp {
    Grow(u32),
    Store(u32, i32, bool),
    Load(u32),
}

fn mem_op() -> impl Strategy<Value = MemOp> {
    prop_oneof![
        (0u32..3).prop_map(MemOp::Grow),
        (0u32..140_000, any::<i32>(), any::<bool>()).prop_map(|(a, v, t)| MemOp::Store(a, v, t)),
        (0u32..140_000).prop_map(MemOp::Load),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shadow_tracks_memory_length(ops in prop::collection::vec(mem_op(), 1..12)) {
        let mut inst = instantiate(fixture("memory")).unwrap();
        for op in ops {
            let (name, args) = match op {
                MemOp::Grow(n) => ("grow", vec![Value::i32(n as i32)]),
                MemOp::Store(a, v, t) => {
                    let v = Value::i32(v);
                    ("store_word", vec![Value::i32(a as i32), if t { v.tainted_by(src(1)) } else { v }])
                }
                MemOp::Load(a) => ("load_word", vec![Value::i32(a as i32)]),
            };
            inst.begin(name, &args).unwrap();
            while *inst.status() == Status::Running {
                if inst.step().is_err() {
                    break;
                }
                prop_assert_eq!(inst.memory().shadow().len(), inst.memory().len());
            }
        }
    }
}
