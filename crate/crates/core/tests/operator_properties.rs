use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqw::fock::{lindblad_rhs, FockDensityMatrix};
use sqw::grid::convolve_with_ordering;
use sqw::propagator::{BathParams, DriveSpec};
use sqw::quasidist::{quasi_distribution, transition_tr};
use sqw::{GridSpec, OrderingVector};

fn random_state(n: usize, seed: u64) -> FockDensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    FockDensityMatrix::new(rho / tr).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generator_is_traceless_and_hermitian(
        seed in any::<u64>(),
        n in 3usize..14,
        kappa in 0.01f64..1.0,
        nbar in 0.0f64..2.0,
        m in (-0.5f64..0.5, -0.5f64..0.5),
        t in 0.0f64..10.0,
    ) {
        let bath = BathParams::new(kappa, nbar, Complex64::new(m.0, m.1), 1.3).unwrap();
        let drive = DriveSpec::Cosine { f0: 0.4, omega: 0.7, phase: 0.1 };
        let d = lindblad_rhs(&random_state(n, seed), t, &bath, &drive);
        prop_assert!(d.trace().norm() < 1e-12);
        prop_assert!((&d - d.adjoint()).camax() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn transition_operators_of_real_kernels_are_hermitian(
        x in -1.5f64..1.5,
        y in -1.5f64..1.5,
        a in -0.3f64..0.3,
        b in -0.3f64..0.3,
        c in 0.6f64..1.5,
    ) {
        let t = transition_tr(Complex64::new(x, y), &OrderingVector::physical(a, b, c), 10).unwrap();
        prop_assert!((&t - t.adjoint()).camax() < 1e-9);
    }

    #[test]
    fn quasi_distributions_are_normalized_and_compose(seed in any::<u64>(), tau in 0.2f64..1.0) {
        let rho = random_state(6, seed);
        let spec = GridSpec::square(64, 5.0);
        let r = OrderingVector::isotropic(tau);
        let s = OrderingVector::physical(0.1, -0.05, 0.3);
        let w = quasi_distribution(&rho, &r, &spec).unwrap();
        prop_assert!((w.integral() - 1.0).norm() < 1e-6);
        let direct = quasi_distribution(&rho, &(r + s), &spec).unwrap();
        let composed = convolve_with_ordering(&w, &s, 16, 16).restrict_to(&spec).unwrap();
        prop_assert!(direct.max_abs_diff(&composed).unwrap() < 1e-6);
    }
}
