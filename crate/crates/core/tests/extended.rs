//! The whole pipeline in quad precision.
#![cfg(feature = "extended")]

use hypermono::circle_solutions::ft_residual;
use hypermono::gammaprod::gamma_identity_residual;
use hypermono::monodromy::{monodromy_matrices, pseudoreflection_check, Basis};
use hypermono::ode_oracle::{oracle_check, OdeParams};
use hypermono::quadrature::QuadratureParams;
use hypermono::{Complex128, ExponentData, Real, Real128};

#[test]
fn closed_form_matrices_in_quad_precision() {
    let d = ExponentData::parse("0,0", "1/4,1/2").unwrap();
    let res = monodromy_matrices::<Real128>(&d, Basis::A, 1).unwrap();
    let m0 = &res.matrices.m0;
    assert_eq!(m0[(0, 1)].re.to_f64_lossy(), 1.0);
    assert!(res.matrices.relation_residual() < 1e-30);
    assert!(pseudoreflection_check(&res).all_pass());
}

#[test]
fn identity_residual_in_quad_precision() {
    let d = ExponentData::parse("1/3,0", "1/2,3/4").unwrap();
    let s = Complex128::new(Real128::lit(0.7), Real128::lit(-2.5));
    assert!(gamma_identity_residual(&d, s).to_f64_lossy() < 1e-30);
}

#[test]
fn oracle_in_quad_precision() {
    let d = ExponentData::parse("0,1/2", "1/4,3/4").unwrap();
    let params = OdeParams { rtol: 1e-16, atol: 1e-18, ..OdeParams::default() };
    let r = oracle_check::<Real128>(&d, Basis::A, 1, 1e-12, &params).unwrap();
    assert!(r.all_pass(), "{r:?}");
}

#[test]
fn fourier_identity_in_quad_precision() {
    let d = ExponentData::parse("0", "1/2").unwrap();
    let s = Complex128::new(Real128::lit(1.5), Real128::lit(0.0));
    let r = ft_residual(&d, s, &QuadratureParams::with_tol(1e-20)).unwrap();
    assert!(r.to_f64_lossy() < 1e-18, "{}", r.to_f64_lossy());
}
