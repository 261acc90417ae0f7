use schmidt_core::linear_forms::{badness_infimum, LinearFormsMatrix};

fn rows(r: &[&[&str]]) -> LinearFormsMatrix {
    let owned: Vec<Vec<&str>> = r.iter().map(|row| row.to_vec()).collect();
    LinearFormsMatrix::from_rows(&owned).unwrap()
}

fn infimum(a: &LinearFormsMatrix, cap: u64) -> f64 {
    badness_infimum(a, cap).unwrap().value
}

#[test]
fn golden_ratio_badness_stays_positive() {
    let a = LinearFormsMatrix::golden_ratio();
    assert_eq!(a.transpose(), a);
    let v = infimum(&a, 10_000);
    println!("phi: {v:.6}");
    assert!(v > 0.38);
}

#[test]
fn cubic_pair_and_its_transpose_both_stay_positive() {
    let column = rows(&[&["cbrt(2)"], &["cbrt(4)"]]);
    let row = column.transpose();
    assert_eq!((column.m(), column.n(), row.m(), row.n()), (2, 1, 1, 2));
    let (c, r) = (infimum(&column, 10_000), infimum(&row, 1_000));
    println!("column: {c:.6}  row: {r:.6}");
    assert!(c > 1e-3 && r > 1e-3);
}

#[test]
fn rational_pair_and_its_transpose_both_vanish() {
    let column = rows(&[&["1/2"], &["1/3"]]);
    let (c, r) = (infimum(&column, 10_000), infimum(&column.transpose(), 1_000));
    println!("column: {c}  row: {r}");
    assert_eq!((c, r), (0.0, 0.0));
}
