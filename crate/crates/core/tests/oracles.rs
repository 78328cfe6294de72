use std::time::Instant;

use tlcharges::fixtures::{fixture, Series};
use tlcharges::oracle::{a_series, a_series_clustered, boost_series, lot_table, span_decomposition, transfer_series, transfer_series_clustered};
use tlcharges::poly::{int, rat};
use tlcharges::{ChargeDensity, TL1Word, TauPoly};

#[test]
fn a_tables_reproduced() {
    for k in 2..=7 {
        let a = a_series_clustered(k).unwrap();
        let d = fixture(Series::A, k).unwrap().diff(&a.density);
        assert!(d.is_empty(), "A_{k}: {d}");
    }
}

#[test]
fn g_tables_reproduced() {
    let g = boost_series(7, 28).unwrap();
    for k in 2..=7 {
        let d = fixture(Series::G, k).unwrap().diff(&g[k - 1]);
        assert!(d.is_empty(), "G_{k}: {d}");
    }
}

#[test]
fn direct_window_agrees_with_clusters() {
    let t0 = Instant::now();
    let direct = transfer_series(5, 17).unwrap();
    assert_eq!(direct, transfer_series_clustered(5).unwrap());
    // a wider window changes nothing
    assert_eq!(direct, transfer_series(5, 19).unwrap());
    assert_eq!(a_series(4, 14).unwrap().density, a_series_clustered(4).unwrap().density);
    eprintln!("direct vs clustered: {:?}", t0.elapsed());
}

#[test]
fn first_density_is_a_single_generator() {
    let t = transfer_series_clustered(1).unwrap();
    assert_eq!(t[0], ChargeDensity::from_terms(1, [(TL1Word::single(0), TauPoly::one())]));
}

#[test]
fn leading_order_tables() {
    let a6 = lot_table(&a_series_clustered(6).unwrap().density).unwrap();
    let a7 = lot_table(&a_series_clustered(7).unwrap().density).unwrap();
    assert_eq!(a6[&(6, 0)], int(1));
    assert_eq!(a6[&(5, 0)], int(2));
    assert_eq!(a6[&(3, 1)], int(0));
    assert_eq!(a6[&(1, 0)], int(0));
    assert_eq!(a7[&(6, 0)], rat(5, 2));
    assert_eq!(a7[&(4, 0)], rat(-25, 4));
    assert_eq!(a7[&(3, 1)], rat(-17, 2));
    assert_eq!(a7[&(2, 0)], rat(17, 4));
    assert_eq!(a7[&(1, 0)], rat(-17, 4));
}

#[test]
fn a_series_lies_in_charge_span() {
    for k in 2..=6 {
        let a = a_series_clustered(k).unwrap();
        let fit = span_decomposition(&a.density, k).unwrap();
        assert!(fit.unique, "A_{k}");
        assert_ne!(fit.alpha, "0");
    }
}
