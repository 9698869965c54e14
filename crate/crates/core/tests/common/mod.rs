//! Shared helpers and host-side oracles for the integration tests.
//!
//! Each oracle is a direct Rust transcription of what the fixture's source
//! computes, so expected values never come from the interpreter.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use wasm_taint::{decode_module, instantiate, Instance, SourceId, TaintLabel, TaintLevel, Value};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_bytes(file: &str) -> Vec<u8> {
    std::fs::read(fixtures_dir().join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

pub fn instance(file: &str) -> Instance {
    instantiate(decode_module(&fixture_bytes(file)).unwrap()).unwrap()
}

pub fn src(i: usize) -> SourceId {
    SourceId::new(i).unwrap()
}

/// Builds a label from `(source, 'D' | 'I')` pairs.
pub fn label(pairs: &[(usize, char)]) -> TaintLabel {
    pairs
        .iter()
        .map(|&(i, l)| {
            let level = match l {
                'D' => TaintLevel::Direct,
                'I' => TaintLevel::Indirect,
                _ => panic!("level {l}"),
            };
            (src(i), level)
        })
        .collect()
}

/// Invokes with the given argument positions tainted; returns the single
/// result.
pub fn call(inst: &mut Instance, name: &str, args: &[Value], taint: &[usize]) -> Value {
    let args: Vec<Value> = args
        .iter()
        .enumerate()
        .map(|(i, v)| if taint.contains(&i) { v.tainted_by(src(i)) } else { *v })
        .collect();
    let out = inst.invoke(name, &args).unwrap_or_else(|e| panic!("{name}: {e}"));
    assert_eq!(out.results.len(), 1, "{name}");
    out.results[0]
}

pub const LEVELS: [&str; 2] = ["O0", "O2"];

pub fn fact(n: i32) -> i32 {
    (1..=n).fold(1i32, |a, k| a.wrapping_mul(k))
}

pub fn fib(n: i32) -> i32 {
    let (mut a, mut b) = (0i32, 1i32);
    for _ in 0..n {
        (a, b) = (b, a.wrapping_add(b));
    }
    a
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Count of 1 ≤ k ≤ n coprime to n.
pub fn totient(n: i32) -> i32 {
    (1..=i64::from(n)).filter(|&k| gcd(k, i64::from(n)) == 1).count() as i32
}

pub fn classify(x: i32) -> i32 {
    if x > 10 {
        7
    } else {
        3
    }
}

pub fn pick(k: i32) -> i32 {
    match k {
        0 => 11,
        1 => 23,
        2 => 37,
        3 => 41,
        4 => 59,
        _ => 5,
    }
}

pub fn mix(a: i32, b: i32) -> i32 {
    if b > 0 {
        a
    } else {
        0
    }
}

pub fn escape_while(mut y: i32) -> i32 {
    let mut x = 0;
    while y < 42 {
        x += 1;
        y += 1;
    }
    x
}

pub fn escape_for(y: i32) -> i32 {
    let mut x = 5;
    let mut i = y;
    while i < 42 {
        x += 2;
        i += 1;
    }
    x
}

pub fn narrow(v: i64) -> i32 {
    v as i32
}

pub fn widen(v: i32) -> i64 {
    i64::from(v) * 3
}

pub fn widen_u(v: u32) -> i64 {
    i64::from(v) + 1
}

pub fn high_plus(a: i64, b: i32) -> i32 {
    ((a >> 32) as i32).wrapping_add(b)
}

pub const LOOKUP_TABLE: [i32; 8] = [101, 211, 307, 401, 503, 601, 701, 809];

pub fn lookup(idx: i32) -> i32 {
    LOOKUP_TABLE[(idx & 7) as usize]
}

/// `buf[5] = secret`, then the four bytes starting two bytes before it.
pub fn store_overlap(secret: i32) -> i32 {
    let mut buf = [0u8; 24];
    buf[20..24].copy_from_slice(&secret.to_le_bytes());
    i32::from_le_bytes(buf[18..22].try_into().unwrap())
}

pub fn array_kth(seed: i32, k: i32) -> i32 {
    let mut data: Vec<i32> = (0..32).map(|i| (i * 37 + seed) % 101).collect();
    data.sort();
    data[(k & 31) as usize]
}

pub fn depth(n: i32) -> i32 {
    n
}

pub fn dispatch(k: i32) -> i32 {
    match k {
        0 => 100,
        1 => 200,
        2 => 300,
        _ => 400,
    }
}

pub fn apply(slot: i32, x: i32) -> i32 {
    match slot {
        0 => x.wrapping_mul(2),
        1 => x.wrapping_mul(x),
        2 => x.wrapping_neg(),
        _ => panic!("slot {slot}"),
    }
}

pub fn choose(a: i32, b: i32, c: i32) -> i32 {
    if c != 0 {
        a
    } else {
        b
    }
}

pub fn guarded(c: i32) -> i32 {
    if c != 0 {
        9
    } else {
        0
    }
}

pub fn count_to(n: i32) -> i32 {
    if n == 0 {
        return 0;
    }
    let mut x = 0;
    loop {
        x += 1;
        if x >= n {
            return x;
        }
    }
}

pub fn store_then_load_byte(word: i32, k: i32) -> i32 {
    let mut mem = [0u8; 72];
    mem[64..68].copy_from_slice(&word.to_le_bytes());
    i32::from(mem[64 + k as usize])
}

/// Oracle result for an exported function, or `None` if the name has none.
pub fn oracle(invoke: &str, args: &[Value]) -> Option<Value> {
    let a = |i: usize| args[i].as_i32();
    let i = |v: i32| Some(Value::i32(v));
    match invoke {
        "fact" => i(fact(a(0))),
        "fib" => i(fib(a(0))),
        "totient_recursive" | "totient_iterative" => i(totient(a(0))),
        "classify" => i(classify(a(0))),
        "pick" => i(pick(a(0))),
        "mix" => i(mix(a(0), a(1))),
        "narrow" => i(narrow(args[0].as_i64())),
        "widen" => Some(Value::i64(widen(a(0)))),
        "widen_u" => Some(Value::i64(widen_u(args[0].as_u32()))),
        "high_plus" => i(high_plus(args[0].as_i64(), a(1))),
        "lookup" => i(lookup(a(0))),
        "store_adjacent" => i(0),
        "store_overlap" => i(store_overlap(a(0))),
        "array_kth" => i(array_kth(a(0), a(1))),
        "escape_while" => i(escape_while(a(0))),
        "escape_for" => i(escape_for(a(0))),
        "depth" => i(depth(a(0))),
        "add" => i(a(0).wrapping_add(a(1))),
        "identity" => i(a(0)),
        "dispatch" => i(dispatch(a(0))),
        "apply" => i(apply(a(0), a(1))),
        "choose" => i(choose(a(0), a(1), a(2))),
        "guarded" => i(guarded(a(0))),
        "count_to" => i(count_to(a(0))),
        "store_then_load_byte" => i(store_then_load_byte(a(0), a(1))),
        "read" => i(42),
        "ints" => i(5),
        _ => None,
    }
}
