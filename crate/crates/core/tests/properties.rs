use std::f64::consts::PI;

use disentangle::fock::{observables, DensityMatrix, FockSpace};
use disentangle::kerr_finite_t::KerrFiniteTParams;
use disentangle::kerr_zero_t::{propagate_kerr_zero_t, KerrZeroTParams};
use disentangle::linalg::max_abs;
use disentangle::oracle::expm_evolve;
use disentangle::pdc::{PdcParams, PdcPropagator, TransformedEvolution};
use disentangle::superop::{build_liouvillian, commutator};
use disentangle::{CMatrix, SuperopExpr, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space(n: usize) -> FockSpace {
    FockSpace::new(n).unwrap()
}

fn random_density(n: usize, seed: u64) -> DensityMatrix {
    DensityMatrix::random(space(n), &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random density on the lowest `support` levels, embedded in `n`.
fn low_density(n: usize, support: usize, seed: u64) -> DensityMatrix {
    random_density(support, seed).resized(space(n))
}

fn hermitian_error(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn kerr_t() -> impl Strategy<Value = KerrFiniteTParams> {
    (-2.0..2.0f64, 0.0..0.5f64, 0.0..0.5f64).prop_map(|(chi, gm, gp)| KerrFiniteTParams::new(chi, gm, gp).unwrap())
}

fn kerr0() -> impl Strategy<Value = KerrZeroTParams> {
    (-2.0..2.0f64, 0.0..0.5f64).prop_map(|(chi, gm)| KerrZeroTParams::new(chi, gm).unwrap())
}

/// `|ε|/γ ≤ 0.45`; beyond that the similarity transform on these spaces is
/// too ill-conditioned for the tolerances used here.
fn pdc() -> impl Strategy<Value = PdcParams> {
    (0.0..0.45f64, 0.0..2.0 * PI, 0.3..1.5f64)
        .prop_map(|(r, phi, gamma)| PdcParams::new(C64::from_polar(r * gamma, phi), gamma, true).unwrap())
}

#[derive(Debug, Clone, Copy)]
enum Model {
    KerrZeroT(KerrZeroTParams),
    KerrFiniteT(KerrFiniteTParams),
    Pdc(PdcParams),
}

impl Model {
    fn generator(&self, s: FockSpace) -> SuperopExpr {
        match self {
            Model::KerrZeroT(p) => p.generator(s),
            Model::KerrFiniteT(p) => p.generator(s),
            Model::Pdc(p) => p.generator(s),
        }
    }
}

fn models() -> impl Strategy<Value = Model> {
    prop_oneof![
        kerr0().prop_map(Model::KerrZeroT),
        kerr_t().prop_map(Model::KerrFiniteT),
        pdc().prop_map(Model::Pdc),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generators_are_linear(
        m in models(),
        n in 3usize..9,
        seeds in any::<(u64, u64)>(),
        a in (-2.0..2.0f64, -2.0..2.0f64),
        b in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let expr = m.generator(space(n));
        let (r1, r2) = (random_density(n, seeds.0), random_density(n, seeds.1));
        let (a, b) = (C64::new(a.0, a.1), C64::new(b.0, b.1));
        let lhs = expr.apply(&(r1.entries() * a + r2.entries() * b)).unwrap();
        let rhs = expr.apply(r1.entries()).unwrap() * a + expr.apply(r2.entries()).unwrap() * b;
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn generators_preserve_hermiticity(m in models(), n in 3usize..10, seed in any::<u64>()) {
        let out = m.generator(space(n)).apply(random_density(n, seed).entries()).unwrap();
        prop_assert!(hermitian_error(&out) < 1e-12);
    }

    #[test]
    fn liouvillian_matches_direct_application(m in models(), n in 2usize..8, seed in any::<u64>()) {
        let expr = m.generator(space(n));
        let rho = random_density(n, seed);
        let direct = expr.apply(rho.entries()).unwrap();
        let via_matrix = build_liouvillian(&expr).apply(rho.entries()).unwrap();
        prop_assert!(max_abs(&(direct - via_matrix)) < 1e-12);
    }

    #[test]
    fn commutator_is_antisymmetric(p in pdc(), q in kerr_t(), n in 3usize..9, seed in any::<u64>()) {
        let s = space(n);
        let (a, b) = (p.generator(s), q.generator(s));
        let rho = random_density(n, seed);
        let ab = commutator(&a, &b, rho.entries()).unwrap();
        let ba = commutator(&b, &a, rho.entries()).unwrap();
        prop_assert!(max_abs(&(ab + ba)) < 1e-11);
    }

    #[test]
    fn trace_preserving_generators_have_traceless_output(
        p in kerr_t(),
        q in pdc(),
        seed in any::<u64>(),
    ) {
        // Support two levels below the edge, so the pair terms of PDC stay inside.
        let n = 10;
        let rho = low_density(n, n - 2, seed);
        let kerr = p.generator(space(n)).apply(rho.entries()).unwrap().trace();
        let pump = q.generator(space(n)).apply(rho.entries()).unwrap().trace();
        prop_assert!(kerr.norm() < 1e-12);
        prop_assert!(pump.norm() < 1e-12);
    }

    #[test]
    fn zero_temperature_propagator_is_a_semigroup(
        p in kerr0(),
        n in 3usize..12,
        seed in any::<u64>(),
        t1 in 0.0..1.5f64,
        t2 in 0.0..1.5f64,
    ) {
        let rho = random_density(n, seed);
        let once = propagate_kerr_zero_t(&rho, t1 + t2, &p).unwrap();
        let twice = propagate_kerr_zero_t(&propagate_kerr_zero_t(&rho, t1, &p).unwrap(), t2, &p).unwrap();
        prop_assert!(max_abs(&(once.entries() - twice.entries())) < 1e-12);
    }

    #[test]
    fn zero_temperature_matches_expm(p in kerr0(), n in 2usize..8, seed in any::<u64>(), t in 0.0..2.0f64) {
        let rho = random_density(n, seed);
        let analytic = propagate_kerr_zero_t(&rho, t, &p).unwrap();
        let oracle = expm_evolve(&build_liouvillian(&p.generator(space(n))), &rho, t).unwrap();
        prop_assert!(max_abs(&(analytic.entries() - oracle.entries())) < 1e-11);
    }

    #[test]
    fn mean_number_decays_exponentially(p in kerr0(), n in 2usize..14, seed in any::<u64>(), t in 0.0..4.0f64) {
        let rho = random_density(n, seed);
        let n0 = observables(&rho).mean_n;
        let nt = observables(&propagate_kerr_zero_t(&rho, t, &p).unwrap()).mean_n;
        prop_assert!((nt - n0 * (-2.0 * p.gamma_minus * t).exp()).abs() < 1e-12 * (1.0 + n0));
    }

    #[test]
    fn lossless_kerr_revives(chi in 0.2..3.0f64, n in 2usize..16, seed in any::<u64>()) {
        let p = KerrZeroTParams::new(chi, 0.0).unwrap();
        let rho = random_density(n, seed);
        let revived = propagate_kerr_zero_t(&rho, PI / chi, &p).unwrap();
        prop_assert!(max_abs(&(revived.entries() - rho.entries())) < 1e-10);
    }

    #[test]
    fn zero_temperature_evolution_is_physical(p in kerr0(), n in 2usize..12, seed in any::<u64>(), t in 0.0..3.0f64) {
        let out = propagate_kerr_zero_t(&random_density(n, seed), t, &p).unwrap().physicality();
        prop_assert!(out.trace_error < 1e-12);
        prop_assert!(out.hermiticity_error < 1e-12);
        prop_assert!(out.min_eigenvalue > -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pdc_propagator_matches_expm(p in pdc(), seed in any::<u64>(), t in 0.0..1.0f64) {
        let s = space(12);
        let rho = low_density(12, 4, seed);
        let prop = PdcPropagator::new(s, p, TransformedEvolution::Conjugated).unwrap();
        prop_assert!(prop.condition_number() < 1e4);
        let oracle = expm_evolve(&build_liouvillian(&p.generator(s)), &rho, t).unwrap();
        let got = prop.propagate(&rho, t).unwrap();
        prop_assert!(max_abs(&(got.entries() - oracle.entries())) < 1e-9);
    }
}
