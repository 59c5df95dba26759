//! Cross-module invariants over the kernel catalog.

use zerovar::spectral::{BernoulliRule, CatalogSpec, Kernel};
use zerovar::variance::{key_integral, lower_bound_thm12, parseval_dual, v1, variance_chaos, vq, ChaosOptions};

fn catalog() -> Vec<CatalogSpec> {
    vec![
        CatalogSpec::Sinc,
        CatalogSpec::Gaussian,
        CatalogSpec::BesselJ0,
        CatalogSpec::Powerlaw { b: 0.1 },
        CatalogSpec::OuSmooth { a: 1.0 },
        CatalogSpec::OuSpectral { m: 2.0 },
        CatalogSpec::Atomic {
            atoms: vec![(1.0, 0.5), (2.0, 0.5)],
        },
        CatalogSpec::Bernoulli(BernoulliRule::Geometric { a: 1.0 / 3.0 }),
        CatalogSpec::Cancellation { alpha: 0.75, m: 2.0 },
    ]
}

fn kernels() -> Vec<Kernel> {
    catalog().iter().map(|s| Kernel::from_catalog(s).unwrap()).collect()
}

#[test]
fn jets_obey_the_unit_bounds() {
    let mut kernels = kernels();
    kernels.push(Kernel::from_catalog(&CatalogSpec::Cosine { sigma: 1.3 }).unwrap());
    for k in &kernels {
        let s2 = k.sigma2();
        let j0 = k.jet(0.0);
        assert!((j0.r - 1.0).abs() < 1e-10 && j0.r1.abs() < 1e-10, "{}", k.id());
        assert!((j0.r2 + s2).abs() < 1e-8 * s2, "{}: r''(0) = {} vs -{s2}", k.id(), j0.r2);
        for i in 1..=400 {
            let t = 0.05 * i as f64;
            let j = k.jet(t);
            assert!(j.r.abs() <= 1.0 + 1e-10, "{} at {t}", k.id());
            assert!(j.r * j.r + j.r1 * j.r1 / s2 <= 1.0 + 1e-10, "{} at {t}", k.id());
            assert!(j.r2 * j.r2 / (s2 * s2) + j.r1 * j.r1 / s2 <= 1.0 + 1e-10, "{} at {t}", k.id());
        }
    }
}

#[test]
fn parseval_duality_over_the_catalog() {
    // Bernoulli products are singular and have no spectral density form.
    for k in kernels().into_iter().filter(|k| k.measure().unwrap().bernoulli.is_none()) {
        let measure = k.measure().unwrap();
        for t in [5.0, 20.0, 100.0] {
            let i = key_integral(&k, t, 1e-10).unwrap();
            let d = parseval_dual(measure, t, 1e-10).unwrap();
            let rel = (i - d).abs() / i;
            assert!(rel <= 1e-4, "{} at T={t}: {i} vs {d} ({rel:e})", k.id());
        }
    }
}

#[test]
fn first_chaos_order_is_v1() {
    for spec in [CatalogSpec::Gaussian, CatalogSpec::Sinc, CatalogSpec::BesselJ0] {
        let k = Kernel::from_catalog(&spec).unwrap();
        let (a, b) = (vq(&k, 10.0, 1, 1e-12).unwrap(), v1(&k, 10.0, 1e-12).unwrap());
        assert!((a - b).abs() <= 1e-10 * b, "{}: {a} vs {b}", k.id());
    }
}

#[test]
fn chaos_total_dominates_the_lower_bound() {
    for k in kernels() {
        for t in [10.0, 50.0] {
            let r = variance_chaos(&k, t, &ChaosOptions::default()).unwrap();
            let lb = lower_bound_thm12(&k, t, 1e-8).unwrap();
            assert!(r.total + r.truncation_bound >= lb, "{} at T={t}: {} + {} < {lb}", k.id(), r.total, r.truncation_bound);
        }
    }
}

#[test]
fn linear_variance_dichotomy() {
    let growth = |spec: CatalogSpec| -> Vec<f64> {
        let k = Kernel::from_catalog(&spec).unwrap();
        [1e2, 1e3, 1e4].iter().map(|&t| key_integral(&k, 2.0 * t, 1e-8).unwrap() / key_integral(&k, t, 1e-8).unwrap()).collect()
    };
    for spec in [CatalogSpec::Gaussian, CatalogSpec::Sinc] {
        let g = growth(spec.clone());
        assert!((g[2] - 1.0).abs() < 0.01, "{spec:?}: {g:?}");
    }
    for spec in [CatalogSpec::BesselJ0, CatalogSpec::Powerlaw { b: 0.1 }] {
        let g = growth(spec.clone());
        assert!(g.iter().all(|&r| r > 1.05), "{spec:?}: {g:?}");
    }
}
