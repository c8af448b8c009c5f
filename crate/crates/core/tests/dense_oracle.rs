//! The pairwise gate kernels checked against full 2^n x 2^n matrices built by
//! Kronecker products, `U_N ... U_2 U_1 |0...0⟩`.

use num_complex::Complex64;
use proptest::prelude::*;
use qbi::statevector::{Control, Gate, Polarity, Statevector};

type Matrix = Vec<Vec<f64>>;

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn ry(theta: f64) -> Matrix {
    let (s, c) = (theta / 2.0).sin_cos();
    vec![vec![c, -s], vec![s, c]]
}

fn identity(d: usize) -> Matrix {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Kronecker product with qubit n-1 leftmost so qubit 0 is the low bit.
fn extend(n: usize, factor: impl Fn(usize) -> Matrix) -> Matrix {
    (0..n)
        .rev()
        .fold(vec![vec![1.0]], |acc, q| kron(&acc, &factor(q)))
}

/// `I − P⊗I_t + P⊗R_t`, where `P` projects the controls onto their pattern.
fn gate_matrix(n: usize, gate: &Gate) -> Matrix {
    let projector = |q: usize| -> Option<Matrix> {
        gate.controls()
            .iter()
            .find(|c| c.qubit == q)
            .map(|c| match c.polarity {
                Polarity::Positive => vec![vec![0.0, 0.0], vec![0.0, 1.0]],
                Polarity::Negative => vec![vec![1.0, 0.0], vec![0.0, 0.0]],
            })
    };
    let rotated = extend(n, |q| {
        if q == gate.target() {
            ry(gate.theta())
        } else {
            projector(q).unwrap_or_else(|| identity(2))
        }
    });
    let idle = extend(n, |q| projector(q).unwrap_or_else(|| identity(2)));
    let id = identity(1 << n);
    (0..1 << n)
        .map(|i| {
            (0..1 << n)
                .map(|j| id[i][j] - idle[i][j] + rotated[i][j])
                .collect()
        })
        .collect()
}

fn dense_run(n: usize, gates: &[Gate]) -> Vec<f64> {
    let mut state = vec![0.0; 1 << n];
    state[0] = 1.0;
    for g in gates {
        let m = gate_matrix(n, g);
        state = m
            .iter()
            .map(|row| row.iter().zip(&state).map(|(a, b)| a * b).sum())
            .collect();
    }
    state
}

fn kernel_run(n: usize, gates: &[Gate]) -> Statevector {
    let mut sv = Statevector::new_zero_state(n).unwrap();
    for g in gates {
        sv.apply_gate(g).unwrap();
    }
    sv
}

#[test]
fn three_qubit_example() {
    use std::f64::consts::PI;
    let gates = vec![
        Gate::Ry {
            target: 0,
            theta: PI / 3.0,
        },
        Gate::Ry {
            target: 1,
            theta: PI / 2.0,
        },
        Gate::ControlledRy {
            controls: vec![Control::positive(0), Control::positive(1)],
            target: 2,
            theta: PI / 2.0,
        },
    ];
    let dense = dense_run(3, &gates);
    let sv = kernel_run(3, &gates);
    // frozen from the dense build: q0 = (√3/2, 1/2), q1 = (√2/2, √2/2), and
    // the |11⟩ branch of q2 split evenly
    let s6 = 6f64.sqrt() / 4.0;
    let s2 = 2f64.sqrt() / 4.0;
    let frozen = [s6, s2, s6, 0.25, 0.0, 0.0, 0.0, 0.25];
    for i in 0..8 {
        assert!((dense[i] - frozen[i]).abs() < 1e-15, "dense[{i}]");
        assert!(
            (sv.amplitudes()[i].re - dense[i]).abs() < 1e-12,
            "kernel[{i}]"
        );
        assert_eq!(sv.amplitudes()[i].im, 0.0);
    }
    let probs = sv.probabilities();
    for i in 0..8 {
        assert!((probs[i] - dense[i] * dense[i]).abs() < 1e-12);
    }
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    (
        0..n,
        -7.0f64..7.0,
        proptest::collection::vec((0..n, any::<bool>()), 0..n),
    )
        .prop_map(move |(target, theta, raw)| {
            let mut controls: Vec<Control> = Vec::new();
            for (q, positive) in raw {
                if q != target && controls.iter().all(|c| c.qubit != q) {
                    controls.push(if positive {
                        Control::positive(q)
                    } else {
                        Control::negative(q)
                    });
                }
            }
            if controls.is_empty() {
                Gate::Ry { target, theta }
            } else {
                Gate::ControlledRy {
                    controls,
                    target,
                    theta,
                }
            }
        })
}

fn circuit_strategy() -> impl Strategy<Value = (usize, Vec<Gate>)> {
    (1usize..=4).prop_flat_map(|n| (Just(n), proptest::collection::vec(gate_strategy(n), 0..12)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn kernel_matches_dense_matrices((n, gates) in circuit_strategy()) {
        let dense = dense_run(n, &gates);
        let sv = kernel_run(n, &gates);
        for (a, d) in sv.amplitudes().iter().zip(&dense) {
            prop_assert!((a.re - d).abs() < 1e-12);
            prop_assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn norm_is_preserved((n, gates) in circuit_strategy()) {
        let sv = kernel_run(n, &gates);
        prop_assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
        let total: f64 = sv.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_rotation_restores((n, gates) in circuit_strategy(), target in 0usize..4, theta in -7.0f64..7.0) {
        let target = target % n;
        let before = kernel_run(n, &gates);
        let mut sv = before.clone();
        sv.apply_ry(target, theta).unwrap();
        sv.apply_ry(target, -theta).unwrap();
        for (a, b) in sv.amplitudes().iter().zip(before.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn unmatched_amplitudes_untouched(
        amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        gate in gate_strategy(4),
    ) {
        let amps: Vec<Complex64> = amps.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
        let mut sv = Statevector::from_amplitudes(amps.clone()).unwrap();
        sv.apply_gate(&gate).unwrap();
        let (mut mask, mut pattern) = (0usize, 0usize);
        for c in gate.controls() {
            mask |= 1 << c.qubit;
            if c.polarity == Polarity::Positive {
                pattern |= 1 << c.qubit;
            }
        }
        for (i, (got, before)) in sv.amplitudes().iter().zip(&amps).enumerate() {
            if i & mask != pattern {
                // bit-identical, not merely close
                prop_assert_eq!(got, before);
            }
        }
    }

    #[test]
    fn ry_touches_only_target_pairs(
        amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        target in 0usize..3,
        theta in -7.0f64..7.0,
    ) {
        let amps: Vec<Complex64> = amps.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
        let mut sv = Statevector::from_amplitudes(amps.clone()).unwrap();
        sv.apply_ry(target, theta).unwrap();
        let (s, c) = (theta / 2.0).sin_cos();
        let bit = 1 << target;
        for i0 in (0..8).filter(|i| i & bit == 0) {
            let i1 = i0 | bit;
            let want0 = amps[i0] * c - amps[i1] * s;
            let want1 = amps[i0] * s + amps[i1] * c;
            prop_assert!((sv.amplitudes()[i0] - want0).norm() < 1e-15);
            prop_assert!((sv.amplitudes()[i1] - want1).norm() < 1e-15);
        }
    }
}
