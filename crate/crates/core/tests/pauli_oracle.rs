//! Pauli strings and the tableau checked against dense state vectors.

use herald_tpc::pauli::*;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;

/// `op |psi>` with qubit `q` at bit `q` of the basis index.
fn apply(op: &PauliOperator, psi: &[C]) -> Vec<C> {
    let n = op.num_qubits();
    let global = C::i().powu(op.phase() as u32);
    let mut out = vec![C::new(0.0, 0.0); psi.len()];
    for (b, amp) in psi.iter().enumerate() {
        let mut c = global;
        let mut target = b;
        for q in 0..n {
            let v = (b >> q) & 1;
            match op.get(q) {
                Pauli::I => {}
                Pauli::X => target ^= 1 << q,
                Pauli::Z => {
                    if v == 1 {
                        c = -c;
                    }
                }
                Pauli::Y => {
                    target ^= 1 << q;
                    c *= if v == 0 { C::i() } else { -C::i() };
                }
            }
        }
        out[target] += c * amp;
    }
    out
}

fn close(a: &[C], b: &[C]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < EPS)
}

fn random_op(n: usize, rng: &mut impl Rng) -> PauliOperator {
    let mut p = PauliOperator::identity(n);
    for q in 0..n {
        p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)]);
    }
    p.set_phase(rng.gen_range(0..4));
    p
}

fn random_state(dim: usize, rng: &mut impl Rng) -> Vec<C> {
    (0..dim)
        .map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect()
}

#[test]
fn products_and_commutation_match_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=3);
        let a = random_op(n, &mut rng);
        let b = random_op(n, &mut rng);
        let v = random_state(1 << n, &mut rng);
        let ab = apply(&a, &apply(&b, &v));
        let ba = apply(&b, &apply(&a, &v));
        let anti: Vec<C> = ba.iter().map(|x| -x).collect();
        let commutes = a.commutes(&b).unwrap();
        assert_eq!(commutes, close(&ab, &ba), "{a} {b}");
        assert_eq!(!commutes, close(&ab, &anti), "{a} {b}");
        let prod = pauli_multiply(&a, &b).unwrap();
        assert!(close(&apply(&prod, &v), &ab), "{a} * {b} = {prod}");
    }
}

fn gate_matrix(psi: &mut [C], g: Gate, qs: &[usize]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dim = psi.len();
    match g {
        Gate::Cz => {
            for (b, amp) in psi.iter_mut().enumerate() {
                if (b >> qs[0]) & 1 == 1 && (b >> qs[1]) & 1 == 1 {
                    *amp = -*amp;
                }
            }
        }
        Gate::Cx => {
            for b in 0..dim {
                if (b >> qs[0]) & 1 == 1 && (b >> qs[1]) & 1 == 0 {
                    psi.swap(b, b | 1 << qs[1]);
                }
            }
        }
        _ => {
            let (m00, m01, m10, m11) = match g {
                Gate::H => (C::new(s, 0.0), C::new(s, 0.0), C::new(s, 0.0), C::new(-s, 0.0)),
                Gate::S => (C::new(1.0, 0.0), C::default(), C::default(), C::i()),
                Gate::Sdg => (C::new(1.0, 0.0), C::default(), C::default(), -C::i()),
                Gate::X => (C::default(), C::new(1.0, 0.0), C::new(1.0, 0.0), C::default()),
                Gate::Y => (C::default(), -C::i(), C::i(), C::default()),
                Gate::Z => (C::new(1.0, 0.0), C::default(), C::default(), C::new(-1.0, 0.0)),
                Gate::Cz | Gate::Cx => unreachable!(),
            };
            let q = qs[0];
            for b in 0..dim {
                if (b >> q) & 1 == 0 {
                    let (a0, a1) = (psi[b], psi[b | 1 << q]);
                    psi[b] = m00 * a0 + m01 * a1;
                    psi[b | 1 << q] = m10 * a0 + m11 * a1;
                }
            }
        }
    }
}

fn assert_stabilized(t: &StabilizerTableau, psi: &[C]) {
    for g in t.generators() {
        assert!(close(&apply(g, psi), psi), "generator {g} does not stabilize the state");
    }
}

fn expectation(p: &PauliOperator, psi: &[C]) -> f64 {
    let ppsi = apply(p, psi);
    psi.iter().zip(&ppsi).map(|(a, b)| (a.conj() * b).re).sum()
}

#[test]
fn random_clifford_circuits_with_measurements() {
    let gates = [Gate::H, Gate::S, Gate::Sdg, Gate::X, Gate::Y, Gate::Z, Gate::Cz, Gate::Cx];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..300 {
        let n = rng.gen_range(1..=4);
        let mut t = StabilizerTableau::new_zero(n);
        let mut psi = vec![C::default(); 1 << n];
        psi[0] = C::new(1.0, 0.0);
        for _ in 0..25 {
            if rng.gen_bool(0.2) {
                let mut p = random_op(n, &mut rng);
                p.set_phase(if rng.gen() { 0 } else { 2 });
                if p.is_identity() {
                    continue;
                }
                let before = expectation(&p, &psi);
                let r = t.measure_pauli(&p, &mut rng).unwrap();
                if r.deterministic {
                    assert!((before - r.outcome as f64).abs() < EPS, "{p}: <P> = {before}");
                } else {
                    assert!(before.abs() < EPS, "{p}: <P> = {before}");
                }
                let pp = apply(&p, &psi);
                let s = r.outcome as f64;
                let mut proj: Vec<C> = psi.iter().zip(&pp).map(|(a, b)| (a + b * s) * 0.5).collect();
                let norm = proj.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                proj.iter_mut().for_each(|a| *a /= norm);
                psi = proj;
            } else {
                let g = gates[rng.gen_range(0..gates.len())];
                if g.arity() == 2 && n < 2 {
                    continue;
                }
                let a = rng.gen_range(0..n);
                let qs = if g.arity() == 2 {
                    let b = (a + rng.gen_range(1..n)) % n;
                    vec![a, b]
                } else {
                    vec![a]
                };
                t.apply_gate(g, &qs).unwrap();
                gate_matrix(&mut psi, g, &qs);
            }
            assert_stabilized(&t, &psi);
        }
    }
}

#[test]
fn xx_measurement_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xx: PauliOperator = "XX".parse().unwrap();
    let runs = 10_000;
    let mut plus = 0;
    for _ in 0..runs {
        let mut t = StabilizerTableau::new_zero(2);
        let r = t.measure_pauli(&xx, &mut rng).unwrap();
        assert!(!r.deterministic);
        plus += (r.outcome == 1) as usize;
        // a repeated measurement agrees
        let again = t.measure_pauli(&xx, &mut rng).unwrap();
        assert!(again.deterministic && again.outcome == r.outcome);
    }
    let sigma = (runs as f64 * 0.25).sqrt();
    assert!((plus as f64 - 5000.0).abs() < 4.0 * sigma, "{plus}");
    // a Bell pair has XX = +1
    let mut t = StabilizerTableau::new_zero(2);
    t.apply_gate(Gate::H, &[0]).unwrap();
    t.apply_gate(Gate::Cx, &[0, 1]).unwrap();
    let r = t.measure_pauli(&xx, &mut rng).unwrap();
    assert!(r.deterministic && r.outcome == 1);
}

#[test]
fn graph_state_measurement_rules() {
    // Path 0-1-2-3. Measuring 1 in Y with the recorded corrections
    // leaves the path 0-2-3; measuring 3 in Z leaves 0-2.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let mut c = Circuit::new(4);
        for q in 0..4 {
            c.push(Op::PreparePlus(q));
        }
        for q in 0..3 {
            c.push(Op::Cz(q, q + 1));
        }
        c.push(Op::Measure {
            qubit: 1,
            basis: Basis::Y,
            byproduct: SparsePauli(vec![(0, Pauli::Z), (2, Pauli::Z)]),
        });
        c.push(Op::LocalClifford { qubit: 0, gate: Gate::Sdg });
        c.push(Op::LocalClifford { qubit: 2, gate: Gate::Sdg });
        let (t, _) = c.simulate(&mut rng).unwrap();
        for s in ["XIZI", "ZIXZ", "IIZX"] {
            assert_eq!(t.stabilizer_sign(&s.parse().unwrap()), Some(1), "{s}");
        }
        c.push(Op::Measure {
            qubit: 3,
            basis: Basis::Z,
            byproduct: SparsePauli(vec![(2, Pauli::Z)]),
        });
        let (t, _) = c.simulate(&mut rng).unwrap();
        for s in ["XIZI", "ZIXI"] {
            assert_eq!(t.stabilizer_sign(&s.parse().unwrap()), Some(1), "{s}");
        }
    }
}

#[test]
fn supercheck_identity_for_every_bond_on_small_lattices() {
    for l in [2, 3] {
        let r = verify_all_bonds(l).unwrap();
        assert!(r.passed(), "L={l}: failures {:?}", r.failures);
        assert_eq!(r.bonds_checked, 4 * 3 * l * l * l);
    }
}
