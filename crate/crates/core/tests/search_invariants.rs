//! Every row instance produced by a search agrees with the Euler formula.

use num_bigint::BigUint;
use num_integer::Integer;
use proptest::prelude::*;

use regmaps::families::*;
use regmaps::mapcore::euler_characteristic_big;

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn euler_neg_chi(row: &FamilyRow) -> BigUint {
    let chi = euler_characteristic_big(&row.order().unwrap(), &row.type_pair.0, &row.type_pair.1).unwrap();
    (-chi).to_biguint().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    #[test]
    fn c3_rows(j in 1u64..200, k in 1u64..200, n in 0u32..4) {
        let (j, k) = (2 * j + 1, 2 * k + 1);
        prop_assume!(j.gcd(&k) == 1);
        let row = FamilyRow::new(RowId::C3, &[("j", big(j)), ("k", big(k)), ("N", big(7).pow(n))]).unwrap();
        prop_assert_eq!(row_chi(&row).unwrap(), euler_neg_chi(&row));
    }

    #[test]
    fn b6_rows(ell in 1u64..5000) {
        prop_assume!(ell.gcd(&30) == 1);
        let row = FamilyRow::new(RowId::B6, &[("p", big(5)), ("ell", big(ell))]).unwrap();
        // 3(5l - 4)
        prop_assert_eq!(row_chi(&row).unwrap(), big(3 * (5 * ell - 4)));
    }

    #[test]
    fn c6_c7_search_rows(r_idx in 0usize..3, alpha in 1u32..3, delta in 0u64..30) {
        let r = [3u64, 5, 11][r_idx];
        let w = SearchWindow::new().with("alpha", alpha as u64, alpha as u64).with("beta", 0, alpha as u64).with("delta", delta, delta);
        for h in search_c6_c7(r, &w).unwrap() {
            if r % 6 == 5 {
                prop_assert_eq!(h.delta % 2, 1);
            }
            let Some(id) = h.row else { continue };
            let mut params = vec![
                ("ell", h.ell.clone()),
                ("alpha", big(h.alpha as u64)),
                ("beta", big(h.beta as u64)),
                ("N", big(r).pow(h.alpha + 1)),
            ];
            if id == RowId::C7 {
                params.push(("r", big(r)));
            }
            let row = FamilyRow::new(id, &params).unwrap();
            let v = row_chi(&row).unwrap();
            prop_assert_eq!(&v, &euler_neg_chi(&row));
            // -chi = |N| r^(gamma - alpha) on the search curve
            prop_assert_eq!(v, big(r).pow(h.gamma + 1));
        }
    }

    #[test]
    fn c3_search_shape(r_idx in 0usize..4, d in 0u32..3) {
        let r = [3u64, 7, 11, 19][r_idx];
        let d = 2 * d + 1;
        for (j, k) in search_c3(r, d).unwrap() {
            prop_assert_eq!((j - 1) * (k - 1), r.pow(d) + 1);
            prop_assert_eq!(((j - 1) * (k - 1)) % 4, 0);
            prop_assert_eq!(r.pow(d) % 4, 3);
            let row = FamilyRow::new(RowId::C3, &[("j", big(j)), ("k", big(k))]).unwrap();
            prop_assert_eq!(row_chi(&row).unwrap(), big(r).pow(d));
        }
    }
}

#[test]
fn c4_search_rows_satisfy_equation() {
    for r in [3u64, 7, 11] {
        let w = SearchWindow::new().with("i", 0, 14).with("alpha", 1, 2).with("beta", 0, 2);
        for s in search_c4(r, &w).unwrap() {
            let lhs = (big(s.j) * big(r).pow(s.alpha) - 1u32) * (big(s.k) * big(r).pow(s.beta) - 1u32);
            assert_eq!(lhs, big(r).pow(s.i + s.beta) + 1u32);
            assert!(s.i_plus_beta_odd, "{s:?}");
            assert_eq!(s.neg_chi, big(r).pow(s.i + 1));
        }
    }
}

#[test]
fn c1_c2_rows() {
    for h in search_c1_c2(10).unwrap() {
        assert_eq!(h.neg_chi, big(3).pow(h.i) * big(h.min_n) / 3u32);
    }
}

#[test]
fn pgl_scan_stable() {
    assert_eq!(scan_pgl_cases(121).unwrap(), scan_pgl_cases(1000).unwrap());
}
