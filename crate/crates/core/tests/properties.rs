//! Property tests for the algebraic invariants: symplectic bilinearity,
//! Pauli product phases, serialization round trips, distance monotonicity,
//! and bucket-index linearity under random subgroups.

use hamprobe_core::hamiltonian::Hamiltonian;
use hamprobe_core::io;
use hamprobe_core::pauli::{pauli_product, symplectic_inner, PauliString};
use hamprobe_core::subgroup::SymplecticSubgroup;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const N: u32 = 4;

fn arb_pauli() -> impl Strategy<Value = PauliString> {
    (0u64..16, 0u64..16).prop_map(|(a, b)| PauliString::new(N, a, b).unwrap())
}

fn arb_hamiltonian() -> impl Strategy<Value = Hamiltonian> {
    proptest::collection::vec((1u64..256, -1.0f64..1.0), 1..8).prop_map(|terms| {
        let mut h = Hamiltonian::zero(N);
        for (packed, c) in terms {
            if c != 0.0 {
                h.add_term(PauliString::from_packed(N, packed).unwrap(), c)
                    .unwrap();
            }
        }
        h
    })
}

proptest! {
    #[test]
    fn symplectic_form_is_bilinear_and_alternating(
        x in arb_pauli(), y in arb_pauli(), z in arb_pauli()
    ) {
        let xy = x.xor(&y).unwrap();
        prop_assert_eq!(
            symplectic_inner(&xy, &z).unwrap(),
            symplectic_inner(&x, &z).unwrap() ^ symplectic_inner(&y, &z).unwrap()
        );
        prop_assert_eq!(symplectic_inner(&x, &x).unwrap(), 0);
        prop_assert_eq!(
            symplectic_inner(&x, &y).unwrap(),
            symplectic_inner(&y, &x).unwrap()
        );
    }

    #[test]
    fn pauli_product_is_associative_with_phases(
        x in arb_pauli(), y in arb_pauli(), z in arb_pauli()
    ) {
        let xy = pauli_product(&x, &y).unwrap();
        let left = pauli_product(&xy.string, &z).unwrap();
        let left_phase = (xy.phase_exp + left.phase_exp) & 3;
        let yz = pauli_product(&y, &z).unwrap();
        let right = pauli_product(&x, &yz.string).unwrap();
        let right_phase = (yz.phase_exp + right.phase_exp) & 3;
        prop_assert_eq!(left.string, right.string);
        prop_assert_eq!(left_phase, right_phase);
    }

    #[test]
    fn product_commutation_phase(x in arb_pauli(), y in arb_pauli()) {
        // sigma_x sigma_y = (-1)^{[x,y]} sigma_y sigma_x at the phase level
        let fwd = pauli_product(&x, &y).unwrap();
        let bwd = pauli_product(&y, &x).unwrap();
        prop_assert_eq!(fwd.string, bwd.string);
        let diff = (4 + fwd.phase_exp as i8 - bwd.phase_exp as i8) % 4;
        let expected = 2 * symplectic_inner(&x, &y).unwrap() as i8;
        prop_assert_eq!(diff, expected);
    }

    #[test]
    fn label_and_hex_round_trip(x in arb_pauli()) {
        let s = x.to_string();
        prop_assert_eq!(s.parse::<PauliString>().unwrap(), x);
        prop_assert_eq!(PauliString::from_hex(N, &x.to_hex()).unwrap(), x);
    }

    #[test]
    fn hamiltonian_text_and_json_round_trip(h in arb_hamiltonian()) {
        if h.support_size() > 0 {
            let back = io::hamiltonian_from_text(&io::hamiltonian_to_text(&h)).unwrap();
            prop_assert_eq!(&back, &h);
        }
        let back = io::hamiltonian_from_json(&io::hamiltonian_to_json(&h)).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn structure_distances_monotone(h in arb_hamiltonian()) {
        for k in 0..N {
            prop_assert!(h.distance_to_local(k) + 1e-15 >= h.distance_to_local(k + 1));
        }
        prop_assert!(h.distance_to_local(N) == 0.0);
        for s in 0..h.support_size() {
            prop_assert!(h.distance_to_sparse(s) + 1e-15 >= h.distance_to_sparse(s + 1));
        }
        prop_assert!(h.distance_to_sparse(1 << (2 * N)) == 0.0);
        // Parseval: distance to the empty Hamiltonian is the 2-norm
        prop_assert!((h.distance_to_sparse(0) - h.two_norm()).abs() < 1e-12);
    }

    #[test]
    fn bucket_index_linear_under_random_subgroups(
        seed in 0u64..1000, x in arb_pauli(), y in arb_pauli(), t in 0u32..8
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let sub = SymplecticSubgroup::random(N, t, &mut rng).unwrap();
        let bx = sub.bucket_index(&x).unwrap();
        let by = sub.bucket_index(&y).unwrap();
        let bxy = sub.bucket_index(&x.xor(&y).unwrap()).unwrap();
        prop_assert_eq!(bxy, bx ^ by);
        // representative is a member of its own bucket
        let rep = sub.bucket_representative(bx).unwrap();
        prop_assert_eq!(sub.bucket_index(&rep).unwrap(), bx);
    }
}
