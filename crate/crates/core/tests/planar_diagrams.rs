use knotoid::code::random_code;
use knotoid::invariants::f_polynomial;
use knotoid::planar::{parse_pkd, PlanarDiagram, Route};
use knotoid::surface::{cyclic_genus, is_classical};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_classical(rng: &mut ChaCha8Rng, count: usize) -> Vec<PlanarDiagram> {
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(0..=6);
        let c = random_code(rng, n);
        if is_classical(&c) {
            out.push(PlanarDiagram::from_classical_code(&c).unwrap());
        }
    }
    out
}

#[test]
fn pkd_text_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in random_classical(&mut rng, 40) {
        let again = parse_pkd(&d.to_string()).unwrap();
        assert_eq!(again, d);
        assert_eq!(again.euler_characteristic(), 2);
    }
}

#[test]
fn closures_along_every_route_are_planar_and_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in random_classical(&mut rng, 30) {
        let auto_under = f_polynomial(&d.underpass_closure(&Route::Auto).unwrap()).unwrap();
        let auto_over = f_polynomial(&d.overpass_closure(&Route::Auto).unwrap()).unwrap();
        let virt = d.virtual_closure_routed(&Route::Auto).unwrap();
        for r in d.simple_routes(6) {
            let r = Route::Edges(r);
            let u = d.underpass_closure(&r).unwrap();
            let o = d.overpass_closure(&r).unwrap();
            assert_eq!(cyclic_genus(&u), Ok(0));
            assert_eq!(cyclic_genus(&o), Ok(0));
            assert_eq!(f_polynomial(&u).unwrap(), auto_under, "{d}");
            assert_eq!(f_polynomial(&o).unwrap(), auto_over, "{d}");
            assert_eq!(d.virtual_closure_routed(&r).unwrap(), virt);
        }
    }
}

#[test]
fn same_face_endpoints_close_without_new_crossings() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen = 0;
    for d in random_classical(&mut rng, 60) {
        if d.endpoints_same_face() {
            seen += 1;
            let z = d.underpass_closure(&Route::Auto).unwrap();
            assert_eq!(z, d.to_open_code().virtual_closure());
        }
    }
    assert!(seen > 0);
}
