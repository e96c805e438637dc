use qlabel_wasm::{rotated_qubit_native, IrisDemo};

#[test]
fn iris_demo_trains_and_classifies() {
    let demo = IrisDemo::train_native(0, 300).unwrap();
    let points = demo.test_points_native().unwrap();
    assert_eq!(points.len(), 45 * 5);
    let correct = points.chunks(5).filter(|p| p[0] == p[1]).count();
    assert!(correct >= 36, "{correct}/45");
    assert_eq!(demo.labels().len(), 9);

    // A typical setosa.
    let out = demo.classify_native(&[5.0, 3.4, 1.5, 0.2]).unwrap();
    assert_eq!(out.len(), 7);
    assert_eq!(out[0], 0.0);
    let d = &out[4..];
    assert!(d[0] <= d[1] && d[0] <= d[2]);
}

#[test]
fn rotated_qubit_exact_and_sampled() {
    let [x, y, z] = rotated_qubit_native(0.0, std::f64::consts::FRAC_PI_2, 0.0, 0, 0).unwrap();
    assert!((x - 1.0).abs() < 1e-12 && y.abs() < 1e-12 && z.abs() < 1e-12);
    let exact = rotated_qubit_native(0.4, 1.0, 2.0, 0, 0).unwrap();
    let sampled = rotated_qubit_native(0.4, 1.0, 2.0, 4096, 5).unwrap();
    for (e, s) in exact.iter().zip(sampled) {
        assert!((e - s).abs() < 0.08);
    }
    assert_eq!(sampled, rotated_qubit_native(0.4, 1.0, 2.0, 4096, 5).unwrap());
}
