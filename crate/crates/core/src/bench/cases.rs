use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::ArrayData;

/// A bundled benchmark at one problem size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BenchCase {
    PrefixSum { n: usize },
    Convolution { n: usize, naive: bool },
    /// `C[n][m] = A[n][k] * B[k][m]`.
    Matmul { n: usize, k: usize, m: usize, naive: bool },
    Reduce { n: usize },
    WindowScan { n: usize, window: usize },
    Broadcast { n: usize, window: usize, delta: usize },
    Shift { n: usize, delta: usize },
}

impl BenchCase {
    pub fn name(&self) -> String {
        match *self {
            BenchCase::PrefixSum { n } => format!("prefix_sum_{n}"),
            BenchCase::Convolution { n, naive: false } => format!("convolution_{n}"),
            BenchCase::Convolution { n, naive: true } => format!("convolution_naive_{n}"),
            BenchCase::Matmul { n, k, m, naive: false } => format!("matmul_{n}x{k}x{m}"),
            BenchCase::Matmul { n, k, m, naive: true } => format!("matmul_naive_{n}x{k}x{m}"),
            BenchCase::Reduce { n } => format!("reduce_{n}"),
            BenchCase::WindowScan { n, window } => format!("window_scan_{n}_w{window}"),
            BenchCase::Broadcast { n, window, delta } => format!("broadcast_{n}_w{window}_d{delta}"),
            BenchCase::Shift { n, delta } => format!("shift_{n}_d{delta}"),
        }
    }

    /// Parses names produced by [`BenchCase::name`].
    pub fn from_name(name: &str) -> Option<Self> {
        all_sizes().into_iter().chain(extras()).find(|c| c.name() == name)
    }

    pub fn source(&self) -> &'static str {
        match self {
            BenchCase::PrefixSum { .. } => include_str!("../../../../kernels/prefix_sum.dsl"),
            BenchCase::Convolution { naive: false, .. } => include_str!("../../../../kernels/convolution.dsl"),
            BenchCase::Convolution { naive: true, .. } => include_str!("../../../../kernels/convolution_naive.dsl"),
            BenchCase::Matmul { naive: false, .. } => include_str!("../../../../kernels/matmul.dsl"),
            BenchCase::Matmul { naive: true, .. } => include_str!("../../../../kernels/matmul_naive.dsl"),
            BenchCase::Reduce { .. } => include_str!("../../../../kernels/reduce.dsl"),
            BenchCase::WindowScan { .. } => include_str!("../../../../kernels/window_scan.dsl"),
            BenchCase::Broadcast { .. } => include_str!("../../../../kernels/broadcast.dsl"),
            BenchCase::Shift { .. } => include_str!("../../../../kernels/shift.dsl"),
        }
    }

    /// `const` overrides applied to [`BenchCase::source`].
    pub fn defines(&self) -> BTreeMap<String, i64> {
        let pairs: Vec<(&str, usize)> = match *self {
            BenchCase::PrefixSum { n } | BenchCase::Convolution { n, .. } => vec![("N", n)],
            BenchCase::Matmul { n, k, m, .. } => vec![("N", n), ("K", k), ("M", m)],
            BenchCase::Reduce { n } => vec![("N", n), ("LEVELS", n.trailing_zeros() as usize)],
            BenchCase::WindowScan { n, window } => vec![("N", n), ("WIN", window)],
            BenchCase::Broadcast { n, window, delta } => vec![("N", n), ("WIN", window), ("D", delta)],
            BenchCase::Shift { n, delta } => vec![("N", n), ("D", delta)],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v as i64)).collect()
    }

    pub fn extents(&self) -> Vec<usize> {
        match *self {
            BenchCase::Matmul { n, m, .. } => vec![m, n],
            BenchCase::PrefixSum { n }
            | BenchCase::Convolution { n, .. }
            | BenchCase::Reduce { n }
            | BenchCase::WindowScan { n, .. }
            | BenchCase::Broadcast { n, .. }
            | BenchCase::Shift { n, .. } => vec![n],
        }
    }

    /// Seeded inputs: integers in `[-100, 100]`, doubles in `[-1, 1)`.
    pub fn inputs(&self, seed: u64) -> ArrayData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ints = |len: usize| -> Vec<Scalar> { (0..len).map(|_| Scalar::Int(rng.random_range(-100..=100))).collect() };
        let mut out = ArrayData::new();
        match *self {
            BenchCase::PrefixSum { n } | BenchCase::WindowScan { n, .. } | BenchCase::Shift { n, .. } => {
                out.insert("in".into(), ints(n));
            }
            BenchCase::Convolution { n, .. } => {
                out.insert("x".into(), floats(&mut rng, n));
            }
            BenchCase::Matmul { n, k, m, .. } => {
                out.insert("A".into(), floats(&mut rng, n * k));
                out.insert("B".into(), floats(&mut rng, k * m));
            }
            BenchCase::Reduce { n } => {
                out.insert("in".into(), floats(&mut rng, n));
            }
            BenchCase::Broadcast { n, .. } => {
                out.insert("src".into(), floats(&mut rng, n));
            }
        }
        out
    }

    /// Sequential reference for the arrays the kernel writes.
    pub fn oracle(&self, inputs: &ArrayData) -> ArrayData {
        let int = |name: &str| -> Vec<i64> { inputs[name].iter().map(|s| s.as_int()).collect() };
        let float = |name: &str| -> Vec<f64> { inputs[name].iter().map(|s| s.as_float()).collect() };
        let mut out = ArrayData::new();
        match *self {
            BenchCase::PrefixSum { .. } => {
                let x = int("in");
                let mut acc = 0;
                let v = x.iter().map(|x| {
                    acc += x;
                    Scalar::Int(acc)
                });
                out.insert("out".into(), v.collect());
            }
            BenchCase::WindowScan { window, .. } => {
                let v: Vec<Scalar> = int("in")
                    .chunks(window)
                    .flat_map(|c| {
                        let mut acc = 0;
                        c.iter().map(move |x| {
                            acc += x;
                            Scalar::Int(acc)
                        })
                    })
                    .collect();
                out.insert("out".into(), v);
            }
            BenchCase::Shift { n, delta } => {
                let x = int("in");
                let v = (0..n).map(|t| Scalar::Int(if t >= delta { 3 * x[t - delta] } else { -1 }));
                out.insert("out".into(), v.collect());
            }
            BenchCase::Convolution { n, .. } => {
                let x = float("x");
                let at = |i: isize| if i < 0 || i as usize >= n { 0.0 } else { x[i as usize] };
                let v = (0..n as isize).map(|i| Scalar::Float(0.25 * at(i - 1) + 0.5 * at(i) + 0.25 * at(i + 1)));
                out.insert("y".into(), v.collect());
            }
            BenchCase::Matmul { n, k, m, .. } => {
                let (a, b) = (float("A"), float("B"));
                let mut c = vec![Scalar::Float(0.0); n * m];
                for row in 0..n {
                    for col in 0..m {
                        let mut acc = 0.0;
                        for i in 0..k {
                            acc += a[row * k + i] * b[i * m + col];
                        }
                        c[row * m + col] = Scalar::Float(acc);
                    }
                }
                out.insert("C".into(), c);
            }
            BenchCase::Reduce { n } => {
                let mut s = float("in");
                let mut half = 1;
                while half < n {
                    let prev = s.clone();
                    for (t, v) in s.iter_mut().enumerate() {
                        if t % (2 * half) < half && t + half < n {
                            *v += prev[t + half];
                        }
                    }
                    half *= 2;
                }
                out.insert("out".into(), s.into_iter().map(Scalar::Float).collect());
            }
            BenchCase::Broadcast { n, window, delta } => {
                let src = float("src");
                let v = (0..n).map(|t| Scalar::Float(src[t / window * delta + t % delta]));
                out.insert("dst".into(), v.collect());
            }
        }
        out
    }

    /// Expected element loads per array.
    pub fn traffic(&self) -> Vec<(String, u64)> {
        let t = |name: &str, v: usize| (name.to_string(), v as u64);
        match *self {
            BenchCase::PrefixSum { n } | BenchCase::WindowScan { n, .. } | BenchCase::Shift { n, .. } => vec![t("in", n)],
            BenchCase::Reduce { n } => vec![t("in", n)],
            BenchCase::Convolution { n, naive: false } => vec![t("x", n)],
            BenchCase::Convolution { n, naive: true } => vec![t("x", 3 * n - 2)],
            BenchCase::Matmul { n, k, m, naive: false } => vec![t("A", n * k), t("B", k * m)],
            BenchCase::Matmul { n, k, m, naive: true } => vec![t("A", n * k * m), t("B", n * k * m)],
            BenchCase::Broadcast { n, window, delta } => vec![t("src", n / window * delta)],
        }
    }
}

fn floats(rng: &mut ChaCha8Rng, len: usize) -> Vec<Scalar> {
    (0..len).map(|_| Scalar::Float(rng.random_range(-1.0..1.0))).collect()
}

/// The benchmark suite at its bundled sizes.
pub fn suite() -> Vec<BenchCase> {
    vec![
        BenchCase::PrefixSum { n: 64 },
        BenchCase::PrefixSum { n: 256 },
        BenchCase::Convolution { n: 256, naive: false },
        BenchCase::Matmul { n: 8, k: 8, m: 8, naive: false },
        BenchCase::Matmul { n: 16, k: 16, m: 16, naive: false },
        BenchCase::Reduce { n: 128 },
    ]
}

/// Global-memory versions used as traffic baselines.
pub fn baselines() -> Vec<BenchCase> {
    vec![
        BenchCase::Convolution { n: 256, naive: true },
        BenchCase::Matmul { n: 8, k: 8, m: 8, naive: true },
        BenchCase::Matmul { n: 16, k: 16, m: 16, naive: true },
    ]
}

/// Small kernels that exercise windows, eLDST reuse and full buffers.
pub fn extras() -> Vec<BenchCase> {
    vec![
        BenchCase::WindowScan { n: 12, window: 4 },
        BenchCase::Broadcast { n: 12, window: 6, delta: 2 },
        BenchCase::Shift { n: 256, delta: 16 },
    ]
}

fn all_sizes() -> Vec<BenchCase> {
    suite().into_iter().chain(baselines()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in all_sizes().into_iter().chain(extras()) {
            assert_eq!(BenchCase::from_name(&c.name()), Some(c));
        }
        assert_eq!(BenchCase::from_name("nope"), None);
    }

    #[test]
    fn inputs_are_seeded() {
        let c = BenchCase::Matmul { n: 2, k: 3, m: 4, naive: false };
        assert_eq!(c.inputs(5), c.inputs(5));
        assert_ne!(c.inputs(5), c.inputs(6));
        assert_eq!(c.inputs(1)["A"].len(), 6);
        assert_eq!(c.inputs(1)["B"].len(), 12);
    }

    #[test]
    fn reduce_oracle_total() {
        let c = BenchCase::Reduce { n: 8 };
        let inputs = ArrayData::from([("in".to_string(), (1..=8).map(|v| Scalar::Float(v as f64)).collect())]);
        let out = c.oracle(&inputs);
        assert_eq!(out["out"][0], Scalar::Float(36.0));
        // odd threads never receive anything
        assert_eq!(out["out"][7], Scalar::Float(8.0));
        assert_eq!(out["out"][4], Scalar::Float(5.0 + 6.0 + 7.0 + 8.0));
    }

    #[test]
    fn small_oracles() {
        let scan = BenchCase::WindowScan { n: 6, window: 3 };
        let inputs = ArrayData::from([("in".to_string(), vec![Scalar::Int(1); 6])]);
        let expect: Vec<Scalar> = [1, 2, 3, 1, 2, 3].iter().map(|&v| Scalar::Int(v)).collect();
        assert_eq!(scan.oracle(&inputs)["out"], expect);
        let b = BenchCase::Broadcast { n: 12, window: 6, delta: 2 };
        let src: Vec<Scalar> = (0..12).map(|v| Scalar::Float(v as f64)).collect();
        let got = b.oracle(&ArrayData::from([("src".to_string(), src)]));
        let idx: Vec<f64> = got["dst"].iter().map(|s| s.as_float()).collect();
        assert_eq!(idx, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 2.0, 3.0, 2.0, 3.0, 2.0, 3.0]);
    }
}
