//! Independent oracles for derived values: brute-force enumeration
//! cross-checks of rank, affine solving, the twist-region constraint
//! system, and Lagrange divisibility of computed orders.

use std::collections::HashSet;

use num_bigint::BigUint;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use monodromy::expr::parse_class_expr;
use monodromy::gf2::{rank, solve_affine, BitMatrix, BitVec};
use monodromy::spgroup::{twist_matrix, SpElement, SpSubgroup};
use monodromy::surface::{CurveRegistry, HomologyClass};

fn reg() -> &'static CurveRegistry {
    CurveRegistry::builtin()
}

fn curve_vec(name: &str) -> BitVec {
    reg().get(name).unwrap().vec().clone()
}

/// Span-size oracle: the row span of k vectors has 2^rank elements.
fn rank_by_span(rows: &[BitVec]) -> usize {
    assert!(rows.len() <= 16);
    let mut span = HashSet::new();
    for mask in 0u32..(1 << rows.len()) {
        let mut v = BitVec::zeros(rows[0].len());
        for (i, r) in rows.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                v.xor_assign(r);
            }
        }
        span.insert(v);
    }
    span.len().trailing_zeros() as usize
}

#[test]
fn gamma1_vertex_rows_have_full_rank() {
    let names = ["c_1", "a_1", "a_2", "b_2", "a_3", "b_3", "a_4", "a_5", "B_2", "B_4"];
    let rows: Vec<BitVec> = names.iter().map(|n| curve_vec(n)).collect();
    assert_eq!(rank_by_span(&rows), 10);
    assert_eq!(rank(&rows).unwrap(), 10);
}

#[test]
fn a_curves_have_rank_five() {
    let rows: Vec<BitVec> = (1..=5).map(|i| curve_vec(&format!("a_{i}"))).collect();
    assert_eq!(rank_by_span(&rows), 5);
    assert_eq!(rank(&rows).unwrap(), 5);
}

/// The nine pairing constraints pinning the twist-region class, as a
/// linear system: row = J * constraint class, right side = target bit.
fn stallings_linear_system() -> (BitMatrix, BitVec) {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut push = |class: HomologyClass, bit: bool| {
        rows.push(class.vec().swap_halves());
        rhs.push(bit);
    };
    push(parse_class_expr(reg(), "B_3").unwrap(), true);
    push(parse_class_expr(reg(), "B_4").unwrap(), true);
    push(parse_class_expr(reg(), "B_5").unwrap(), false);
    push(parse_class_expr(reg(), "c_2").unwrap(), false);
    let deltas = [false, true, false, false, true];
    for (j, &delta) in deltas.iter().enumerate() {
        // Phi(0,0)(B_5) duplicates the B_5 row, so only j = 0..4 appear
        push(
            parse_class_expr(reg(), &format!("Phi(0,0)(B_{j})")).unwrap(),
            delta,
        );
    }
    (
        BitMatrix::from_rows(rows).unwrap(),
        BitVec::from_bits(&rhs),
    )
}

#[test]
fn affine_solver_matches_brute_force_on_the_nine_constraints() {
    let (a, b) = stallings_linear_system();
    assert_eq!(a.nrows(), 9);
    let sol = solve_affine(&a, &b).unwrap();
    assert!(sol.is_consistent(), "system must be consistent");
    let described: HashSet<BitVec> = sol.enumerate().into_iter().collect();
    let brute: HashSet<BitVec> = (0u64..1024)
        .map(|code| BitVec::from_code(10, code))
        .filter(|x| a.mul_vec(x) == b)
        .collect();
    assert_eq!(described, brute);
    let d = curve_vec("d");
    assert!(described.contains(&d), "a_1+a_2 must satisfy the system");
}

#[test]
fn sifting_roundtrip_on_the_xi_group() {
    let fact = monodromy::factorization::xi(reg(), 0, 0).unwrap();
    let gens: Vec<SpElement> = fact
        .letters()
        .iter()
        .map(|l| twist_matrix(l.class()).unwrap())
        .collect();
    let group = SpSubgroup::from_generators(5, &gens).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..1000 {
        let mut w = SpElement::identity(5);
        for _ in 0..rng.gen_range(1..20) {
            w = w.mul(&gens[rng.gen_range(0..gens.len())]);
        }
        assert!(group.contains(&w));
    }
}

#[test]
fn orders_divide_the_full_symplectic_group() {
    let full = {
        let mut sp = BigUint::from(2u32).pow(25);
        for i in 1..=5u32 {
            sp *= BigUint::from(4u64.pow(i) - 1);
        }
        sp
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..8 {
        let count = rng.gen_range(1..6);
        let gens: Vec<SpElement> = (0..count)
            .map(|_| {
                let code = rng.gen_range(1..1024u64);
                twist_matrix(&HomologyClass::new(BitVec::from_code(10, code))).unwrap()
            })
            .collect();
        let group = SpSubgroup::from_generators(5, &gens).unwrap();
        assert_eq!(&full % group.order(), BigUint::from(0u32));
    }
}
