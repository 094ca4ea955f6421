mod common;

use common::cg_exact_f64;
use longrange::angular::{cg_symmetry_flip, clebsch_gordan, CgTable};
use proptest::prelude::*;

fn tuple() -> impl Strategy<Value = (i32, i32, i32, i32, i32)> {
    (0i32..=8, 0i32..=8)
        .prop_flat_map(|(j1, j2)| (Just(j1), Just(j2), (j1 - j2).abs()..=(j1 + j2).min(8)))
        .prop_flat_map(|(j1, j2, j)| (Just(j1), Just(j2), Just(j), -j1..=j1, -j2..=j2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn matches_exact_racah_sum((j1, j2, j, m1, m2) in tuple()) {
        let m = m1 + m2;
        let exact = cg_exact_f64(j1 as i64, m1 as i64, j2 as i64, m2 as i64, j as i64, m as i64);
        let v = if m.abs() > j { 0.0 } else { clebsch_gordan(j1, m1, j2, m2, j, m).unwrap() };
        prop_assert!((v - exact).abs() <= 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn exchange_identity_holds((j1, j2, j, m1, m2) in tuple()) {
        let m = m1 + m2;
        prop_assume!(m.abs() <= j);
        let a = clebsch_gordan(j1, m1, j2, m2, j, m).unwrap();
        let b = cg_symmetry_flip(j1, m1, j2, m2, j, m).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn table_lookups_agree_with_oracle() {
    let table = CgTable::new(10, &[1, 2]);
    for j1 in 0..=10 {
        for k in [1i32, 2] {
            for j in (j1 - k).abs()..=(j1 + k).min(10) {
                for m1 in -j1..=j1 {
                    for mk in -k..=k {
                        let m = m1 + mk;
                        if m.abs() > j {
                            continue;
                        }
                        let exact = cg_exact_f64(j1 as i64, m1 as i64, k as i64, mk as i64, j as i64, m as i64);
                        assert!((table.get(j1, m1, k, mk, j, m) - exact).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn orthogonality_sums_are_exact_in_the_oracle() {
    // Σ_{m1,m2} C^{jm}_{j1m1j2m2} C^{j'm}_{j1m1j2m2} = δ_{jj'}
    for (j1, j2) in [(2i64, 1i64), (3, 2), (4, 4)] {
        for j in (j1 - j2).abs()..=j1 + j2 {
            for jp in (j1 - j2).abs()..=j1 + j2 {
                let m = 0;
                let s: f64 = (-j1..=j1)
                    .map(|m1| cg_exact_f64(j1, m1, j2, m - m1, j, m) * cg_exact_f64(j1, m1, j2, m - m1, jp, m))
                    .sum();
                let want = if j == jp { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-13);
            }
        }
    }
}
