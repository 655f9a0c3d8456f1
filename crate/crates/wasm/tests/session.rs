use hdch_wasm::{colormap, minimizer, potential_curve, Session, SessionParams};

fn small() -> SessionParams {
    SessionParams { n: 16, length: 8.0, ..SessionParams::default() }
}

#[test]
fn advancing_keeps_mass_and_lowers_energy() {
    let mut s = Session::new(small()).unwrap();
    let before = s.readout().unwrap();
    s.advance(10).unwrap();
    let after = s.readout().unwrap();
    assert!((after.t - 10.0 * small().dt).abs() < 1e-12);
    assert!((after.mass - before.mass).abs() < 1e-13);
    assert!(after.energy < before.energy);
    assert!(after.separation > 0.0);
}

#[test]
fn painting_sets_the_disk_and_keeps_time() {
    let mut s = Session::new(small()).unwrap();
    s.advance(3).unwrap();
    s.paint(4.0, 4.0, 2.0, 5.0).unwrap();
    let phi = s.phi();
    let centre = phi.get(8, 8);
    assert!((centre - 0.95).abs() < 2e-2, "{centre}");
    assert!(phi.linf() < 1.0);
    let r = s.readout().unwrap();
    assert!((r.t - 3.0 * small().dt).abs() < 1e-12);
    s.advance(2).unwrap();
    assert!((s.readout().unwrap().t - 5.0 * small().dt).abs() < 1e-12);
}

#[test]
fn image_is_rgba_top_row_first() {
    let s = Session::new(small()).unwrap();
    let px = s.rgba();
    assert_eq!(px.len(), 4 * 16 * 16);
    assert!(px.chunks(4).all(|p| p[3] == 255));
    let top_left = colormap(s.phi().get(0, 15));
    assert_eq!(&px[..3], &top_left);
}

#[test]
fn potential_is_even_with_wells_at_beta() {
    let curve = potential_curve(1.0, 2.0, 201).unwrap();
    assert_eq!(curve.len(), 201);
    for (a, b) in curve.iter().zip(curve.iter().rev()) {
        assert!((a.0 + b.0).abs() < 1e-14);
        assert!((a.1 - b.1).abs() < 1e-12);
    }
    let beta = minimizer(1.0, 2.0).unwrap();
    let lowest = curve.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((lowest.0.abs() - beta).abs() < 1e-2);
    assert!(minimizer(2.5, 2.0).is_err());
    assert!(Session::new(SessionParams { theta: 3.0, ..small() }).is_err());
}
