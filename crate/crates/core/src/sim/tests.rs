use super::*;
use crate::frontend::{lower, parse};
use crate::graph::{CascadeStage, CommPattern, TidDelta};
use crate::mapper::map;
use crate::scalar::ValueType;

fn build(src: &str, space: ThreadSpace, grid: &GridConfig) -> Mapped {
    let g = lower(&parse(src).unwrap(), &space).unwrap();
    map(&g, grid).unwrap()
}

fn ints(v: &[i64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::Int(x)).collect()
}

fn floats(v: &[f64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::Float(x)).collect()
}

const PREFIX: &str = "const N = 4; global int in[N]; global int out[N]; kernel p {
    sum = in[threadIdx.x] + fromThreadOrConst<sum, -1, 0>();
    tagValue<sum>();
    out[threadIdx.x] = sum;
}";

#[test]
fn prefix_sum_small() {
    let grid = GridConfig::default();
    let m = build(PREFIX, ThreadSpace::linear(4), &grid);
    let inputs = ArrayData::from([("in".to_string(), ints(&[1, 1, 1, 1]))]);
    let out = simulate_mapped(&m, &grid, &inputs, &SimOptions::default()).unwrap();
    assert_eq!(out.arrays["out"], ints(&[1, 2, 3, 4]));
    assert_eq!(out.stats.memory.loads, 4);
    assert_eq!(out.stats.memory.stores, 4);
    assert_eq!(out.stats.constant_injections, 1);
    assert_eq!(out.stats.boundary_drops, 1);
    assert_eq!(out.stats.retags, 3);
    assert!(out.stats.audit_balanced());
    assert!(out.stats.cycles > 0);
    assert_eq!(reference_run(&m.graph, &inputs).unwrap()["out"], out.arrays["out"]);
}

#[test]
fn convolution_small() {
    let src = "global float x[3]; global float y[3]; kernel conv {
        v = x[threadIdx.x];
        tagValue<v>();
        l = fromThreadOrConst<v, -1, 0.0>();
        r = fromThreadOrConst<v, 1, 0.0>();
        y[threadIdx.x] = l + v + r;
    }";
    let grid = GridConfig::default();
    let m = build(src, ThreadSpace::linear(3), &grid);
    let inputs = ArrayData::from([("x".to_string(), floats(&[1.0, 2.0, 3.0]))]);
    let out = simulate_mapped(&m, &grid, &inputs, &SimOptions::default()).unwrap();
    assert_eq!(out.arrays["y"], floats(&[3.0, 6.0, 5.0]));
    assert_eq!(out.stats.memory.per_array_loads["x"], 3);
}

#[test]
fn matmul_identity_loads_once_per_element() {
    let src = "const K = 4; global float A[4][K]; global float B[K][4]; global float C[4][4]; kernel mm {
        x = threadIdx.x; y = threadIdx.y;
        acc = 0.0;
        for (i = 0; i < K; i++) {
            a = fromThreadOrMem<{-1, 0}>(A[y][i], x == 0);
            b = fromThreadOrMem<{0, -1}>(B[i][x], y == 0);
            acc += a * b;
        }
        C[y][x] = acc;
    }";
    let grid = GridConfig::scaled(&GridConfig::default(), 2);
    let m = build(src, ThreadSpace::new(vec![4, 4]).unwrap(), &grid);
    let a: Vec<f64> = (0..16).map(|k| k as f64 + 1.0).collect();
    let id: Vec<f64> = (0..16).map(|k| if k / 4 == k % 4 { 1.0 } else { 0.0 }).collect();
    let inputs = ArrayData::from([("A".to_string(), floats(&a)), ("B".to_string(), floats(&id))]);
    let out = simulate_mapped(&m, &grid, &inputs, &SimOptions::default()).unwrap();
    assert_eq!(out.arrays["C"], floats(&a));
    assert_eq!(out.stats.memory.per_array_loads["A"], 16);
    assert_eq!(out.stats.memory.per_array_loads["B"], 16);
    assert!(out.stats.max_buffer_occupancy <= grid.token_buffer_capacity);
    assert_eq!(reference_run(&m.graph, &inputs).unwrap()["C"], out.arrays["C"]);
}

#[test]
fn seeds_and_issue_limits_agree() {
    let grid = GridConfig::default();
    let src = PREFIX.replace("const N = 4", "const N = 64");
    let m = build(&src, ThreadSpace::linear(64), &grid);
    let inputs = ArrayData::from([("in".to_string(), ints(&(0..64).collect::<Vec<_>>()))]);
    let base = simulate_mapped(&m, &grid, &inputs, &SimOptions::default()).unwrap();
    for seed in 0..4 {
        for limit in [Some(1), Some(2), None] {
            let opts = SimOptions { seed: Some(seed), issue_limit: limit, ..Default::default() };
            let out = simulate_mapped(&m, &grid, &inputs, &opts).unwrap();
            assert_eq!(out.arrays, base.arrays);
        }
    }
}

#[test]
fn long_shift_cascades_and_spills() {
    let src = "global int in[64]; global int out[64]; kernel s {
        v = in[threadIdx.x];
        tagValue<v>();
        out[threadIdx.x] = fromThreadOrConst<v, -40, 7>();
    }";
    let inputs = ArrayData::from([("in".to_string(), ints(&(100..164).collect::<Vec<_>>()))]);
    let expect: Vec<i64> = (0..64).map(|t| if t < 40 { 7 } else { 100 + t - 40 }).collect();

    let grid = GridConfig::default();
    let m = build(src, ThreadSpace::linear(64), &grid);
    assert_eq!(m.spills, 0);
    let out = simulate_mapped(&m, &grid, &inputs, &SimOptions::default()).unwrap();
    assert_eq!(out.arrays["out"], ints(&expect));
    assert!(out.stats.max_buffer_occupancy <= 16);
    assert!(out.stats.audit_balanced());

    let mut tiny = GridConfig::default();
    tiny.control_elevator_units = 1;
    let m = build(src, ThreadSpace::linear(64), &tiny);
    assert_eq!(m.spills, 1);
    let out = simulate_mapped(&m, &tiny, &inputs, &SimOptions::default()).unwrap();
    assert_eq!(out.arrays["out"], ints(&expect));
    assert!(out.stats.lvc_accesses > 0);
    assert_eq!(out.stats.spills, 1);
}

#[test]
fn unreachable_enable_deadlocks() {
    let mut g = DataflowGraph::new(ThreadSpace::linear(4));
    g.declare_array("a", ValueType::Int, vec![4]);
    g.declare_array("o", ValueType::Int, vec![4]);
    let t = g.add_node(NodeKind::TidSource(0), ValueType::Int);
    let f = g.add_node(NodeKind::ConstSource(Scalar::Int(0)), ValueType::Int);
    let e = g.add_node(
        NodeKind::ELoadStore { array: "a".into(), comm: CommPattern::new(TidDelta::linear(-1), 4), spilled: false },
        ValueType::Int,
    );
    g.connect(t, e, 0);
    g.connect(f, e, 1);
    let s = g.add_node(NodeKind::Store { array: "o".into(), predicated: false }, ValueType::Int);
    g.connect(t, s, 0);
    g.connect(e, s, 1);
    let grid = GridConfig::default();
    let m = map(&g, &grid).unwrap();
    let err = simulate_mapped(&m, &grid, &ArrayData::new(), &SimOptions::default()).unwrap_err();
    let SimError::Deadlock { starved, .. } = &err else { panic!("{err}") };
    assert!(starved.iter().any(|s| s.mnemonic == "eld" && s.waiting == vec![0, 1, 2, 3]));
    assert!(err.to_string().contains("eld"));
}

#[test]
fn out_of_range_store_is_reported() {
    let src = "global int o[2]; kernel k { o[threadIdx.x + 1] = 1; }";
    let grid = GridConfig::default();
    let m = build(src, ThreadSpace::linear(2), &grid);
    let err = simulate_mapped(&m, &grid, &ArrayData::new(), &SimOptions::default()).unwrap_err();
    assert!(matches!(err, SimError::Memory { tid: 1, .. }), "{err}");
}

#[test]
fn trace_is_deterministic() {
    let grid = GridConfig::default();
    let m = build(PREFIX, ThreadSpace::linear(4), &grid);
    let inputs = ArrayData::from([("in".to_string(), ints(&[1, 2, 3, 4]))]);
    let opts = SimOptions { trace: true, ..Default::default() };
    let a = simulate_mapped(&m, &grid, &inputs, &opts).unwrap();
    let b = simulate_mapped(&m, &grid, &inputs, &opts).unwrap();
    assert_eq!(a.trace, b.trace);
    assert!(a.trace.iter().any(|l| l.contains(" elev tid=")));
    assert!(a.trace[0].starts_with("c="));
}

#[test]
fn cascade_stage_elevator_in_isolation() {
    // A hand-built two-stage cascade moving tokens by 20 with B = 16.
    let mut g = DataflowGraph::new(ThreadSpace::linear(32));
    g.declare_array("o", ValueType::Int, vec![32]);
    let t = g.add_node(NodeKind::TidSource(0), ValueType::Int);
    let comm = CommPattern::new(TidDelta::linear(-20), 32);
    let head = g.add_node(
        NodeKind::Elevator { comm: comm.clone(), constant: Scalar::Int(-1), stage: CascadeStage { index: 0, count: 2, retag: 16 } },
        ValueType::Int,
    );
    let tail = g.add_node(
        NodeKind::Elevator { comm, constant: Scalar::Int(-1), stage: CascadeStage { index: 1, count: 2, retag: 4 } },
        ValueType::Int,
    );
    g.connect(t, head, 0);
    g.connect(head, tail, 0);
    let s = g.add_node(NodeKind::Store { array: "o".into(), predicated: false }, ValueType::Int);
    g.connect(t, s, 0);
    g.connect(tail, s, 1);
    let grid = GridConfig::default();
    let mapping = crate::mapper::place_and_route(&g, &grid).unwrap();
    let out = simulate(&g, &mapping, &grid, &ArrayData::new(), &SimOptions::default()).unwrap();
    let expect: Vec<i64> = (0..32).map(|t| if t < 20 { -1 } else { t - 20 }).collect();
    assert_eq!(out.arrays["o"], ints(&expect));
    assert_eq!(reference_run(&g, &ArrayData::new()).unwrap()["o"], ints(&expect));
    assert!(out.stats.audit_balanced());
}

#[test]
fn zero_issue_limit_rejected() {
    let grid = GridConfig::default();
    let m = build(PREFIX, ThreadSpace::linear(4), &grid);
    let opts = SimOptions { issue_limit: Some(0), ..Default::default() };
    assert!(matches!(simulate_mapped(&m, &grid, &ArrayData::new(), &opts), Err(SimError::Config(_))));
}
