use tlcharges::charges::build_charge;
use tlcharges::fixtures::{fixture, Series};

#[test]
fn q_tables_reproduced_exactly() {
    for k in 2..=7 {
        let f = fixture(Series::Q, k).unwrap();
        let d = f.diff(&build_charge(k));
        assert!(d.is_empty(), "{d}");
    }
}
