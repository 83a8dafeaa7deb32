use casimir_core::basis::BasisSpec;
use casimir_core::force::{casimir_force, QuadratureSpec, ThermalSpec};
use casimir_core::mie::{Material, Sphere};
use casimir_core::scattering::{Configuration, ScatteringMode};

fn force(config: &Configuration, target: usize, lmax: usize, mode: ScatteringMode) -> [f64; 3] {
    let basis = BasisSpec::new(lmax).unwrap();
    casimir_force(config, target, basis, mode, ThermalSpec::zero(), QuadratureSpec::default()).unwrap().force
}

fn pair(d: f64, r: f64, material: Material) -> Configuration {
    Configuration::new(vec![Sphere::new([0.0; 3], r, material), Sphere::new([d, 0.0, 0.0], r, material)]).unwrap()
}

#[test]
fn lone_sphere_feels_nothing() {
    let c = Configuration::new(vec![Sphere::new([1.0, 2.0, 3.0], 0.4, Material::PerfectConductor)]).unwrap();
    assert_eq!(force(&c, 0, 3, ScatteringMode::ClosedForm), [0.0; 3]);
}

#[test]
fn single_round_trip_dominates_far_apart() {
    // Multiple reflections are suppressed by roughly (R/d)^6 per round trip.
    let c = pair(10.0, 1.0, Material::PerfectConductor);
    let closed = force(&c, 0, 2, ScatteringMode::ClosedForm)[0];
    let single = force(&c, 0, 2, ScatteringMode::Reflection { order: 1 })[0];
    assert!(closed > 0.0 && single > 0.0);
    assert!((closed / single - 1.0).abs() < 1e-4, "{closed} {single}");
}

#[test]
fn conductors_attract_more_than_dielectrics() {
    let pec = force(&pair(3.0, 1.0, Material::PerfectConductor), 0, 3, ScatteringMode::ClosedForm)[0];
    let glass = force(&pair(3.0, 1.0, Material::dielectric(2.25)), 0, 3, ScatteringMode::ClosedForm)[0];
    let plasma = force(&pair(3.0, 1.0, Material::Plasma { omega_p: 1.37e16 }), 0, 3, ScatteringMode::ClosedForm)[0];
    assert!(pec > plasma && plasma > glass && glass > 0.0, "{pec} {plasma} {glass}");
}

#[test]
fn collinear_chain_forces_stay_on_the_line() {
    let s = |x: f64| Sphere::new([0.0, 0.0, x], 0.5, Material::PerfectConductor);
    let c = Configuration::new(vec![s(0.0), s(1.5), s(3.5)]).unwrap();
    for target in 0..3 {
        let f = force(&c, target, 2, ScatteringMode::ClosedForm);
        assert!(f[0].abs() < 1e-12 && f[1].abs() < 1e-12, "{f:?}");
    }
    // The end spheres are pulled inward.
    assert!(force(&c, 0, 2, ScatteringMode::ClosedForm)[2] > 0.0);
    assert!(force(&c, 2, 2, ScatteringMode::ClosedForm)[2] < 0.0);
}
