use proptest::prelude::*;

use subspace_core::bitlinalg::{invert, matmul, rank, row_space, rref, subspace_distance, BitMatrix, Subspace};
use subspace_core::gf2m::{eval_linearized, FieldParams};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
    let mask = if cols == 64 { u64::MAX } else { (1u64 << cols) - 1 };
    prop::collection::vec(any::<u64>(), rows).prop_map(move |ws| {
        let ws: Vec<u64> = ws.into_iter().map(|w| w & mask).collect();
        BitMatrix::from_row_words(cols, &ws)
    })
}

fn any_matrix() -> impl Strategy<Value = BitMatrix> {
    (0usize..12, 1usize..20).prop_flat_map(|(r, c)| matrix(r, c))
}

/// Random invertible matrix: product of a unit upper and a unit lower triangular factor.
fn invertible(n: usize) -> impl Strategy<Value = BitMatrix> {
    (matrix(n, n), matrix(n, n)).prop_map(move |(u, l)| {
        let mut upper = BitMatrix::identity(n);
        let mut lower = BitMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                if j > i && u.get(i, j) {
                    upper.set(i, j, true);
                }
                if j < i && l.get(i, j) {
                    lower.set(i, j, true);
                }
            }
        }
        matmul(&lower, &upper)
    })
}

fn subspace8() -> impl Strategy<Value = Subspace> {
    (0usize..9).prop_flat_map(|r| matrix(r, 8)).prop_map(|m| row_space(&m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rref_is_idempotent(m in any_matrix()) {
        let (r1, k1) = rref(&m);
        let (r2, k2) = rref(&r1);
        prop_assert_eq!(&r1, &r2);
        prop_assert_eq!(k1, k2);
        prop_assert!(r1.is_rref());
        prop_assert_eq!(k1, rank(&m));
        prop_assert!(k1 <= m.rows().min(m.cols()));
    }

    #[test]
    fn rref_preserves_row_space(m in any_matrix()) {
        let (r, _) = rref(&m);
        prop_assert_eq!(row_space(&m), row_space(&r));
        // every original row lies in the span
        let s = row_space(&m);
        for i in 0..m.rows() {
            prop_assert!(s.contains(&m.row(i)));
        }
    }

    #[test]
    fn metric_axioms(u in subspace8(), v in subspace8(), w in subspace8()) {
        let duv = subspace_distance(&u, &v);
        prop_assert_eq!(duv, subspace_distance(&v, &u));
        prop_assert_eq!(duv == 0, u == v);
        prop_assert_eq!(subspace_distance(&u, &u), 0);
        prop_assert!(duv <= subspace_distance(&u, &w) + subspace_distance(&w, &v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn invert_round_trip(a in (1usize..20).prop_flat_map(invertible)) {
        let inv = invert(&a).unwrap();
        let n = a.rows();
        prop_assert_eq!(matmul(&a, &inv), BitMatrix::identity(n));
        prop_assert_eq!(matmul(&inv, &a), BitMatrix::identity(n));
    }

    #[test]
    fn invert_fails_exactly_when_rank_deficient(a in (1usize..7).prop_flat_map(|n| matrix(n, n))) {
        let full = rank(&a) == a.rows();
        prop_assert_eq!(invert(&a).is_ok(), full);
    }

    #[test]
    fn rank_of_product_bounded((a, b) in (1usize..10, 1usize..10, 1usize..10)
        .prop_flat_map(|(r, k, c)| (matrix(r, k), matrix(k, c)))) {
        let ab = matmul(&a, &b);
        prop_assert!(rank(&ab) <= rank(&a).min(rank(&b)));
    }

    #[test]
    fn distance_formula_matches_intersection(u in subspace8(), v in subspace8()) {
        // dim(U∩V) by brute force over all 256 vectors of F_2^8
        let mut inter = 0usize;
        for x in 0u64..256 {
            let row = BitMatrix::from_row_words(8, &[x]);
            if u.contains(&row) && v.contains(&row) {
                inter += 1;
            }
        }
        let inter_dim = inter.trailing_zeros() as usize;
        let sum_dim = u.dim() + v.dim() - inter_dim;
        prop_assert_eq!(subspace_distance(&u, &v), sum_dim - inter_dim);
    }

    #[test]
    fn field_distributes(a in 0u32..256, b in 0u32..256, c in 0u32..256) {
        let f = FieldParams::default();
        let (a, b, c) = (f.element(a), f.element(b), f.element(c));
        prop_assert_eq!(a * (b + c), a * b + a * c);
        prop_assert_eq!(a * b, b * a);
        prop_assert_eq!((a * b) * c, a * (b * c));
    }

    #[test]
    fn linearized_evaluation_is_linear(a in 0u32..256, g1 in 0u32..256, g2 in 0u32..256) {
        let f = FieldParams::default();
        let (a, g1, g2) = (f.element(a), f.element(g1), f.element(g2));
        prop_assert_eq!(eval_linearized(a, g1 + g2), eval_linearized(a, g1) + eval_linearized(a, g2));
    }
}

#[test]
fn empty_subspace_is_a_valid_metric_argument() {
    let z = Subspace::zero(8);
    let line = row_space(&BitMatrix::from_row_words(8, &[0b1011]));
    assert_eq!(subspace_distance(&z, &line), 1);
    assert_eq!(subspace_distance(&z, &Subspace::full(8)), 8);
}

#[test]
fn x_block_of_fixture_has_full_rank() {
    let fix = subspace_core::kkcode::reference_matrix();
    assert_eq!(rank(&fix.columns(8, 16)), 8);
    let (r, k) = rref(&fix);
    assert_eq!(r, fix);
    assert_eq!(k, 8);
    assert_eq!(row_space(&fix).basis(), &fix);
}

#[test]
fn all_ones_row_times_fixture_is_row_xor() {
    let fix = subspace_core::kkcode::reference_matrix();
    let ones = BitMatrix::ones(1, 8);
    let expect: BitMatrix = "1111111100100000".parse().unwrap();
    assert_eq!(matmul(&ones, &fix), expect);
}
