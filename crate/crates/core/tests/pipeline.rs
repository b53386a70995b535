use std::sync::Arc;

use bgk_core::coefficients::{build_f0, compute_c0, compute_k0, InitialData, SpectralSlice};
use bgk_core::corpus::{CorpusKind, CHI_ZERO_XI};
use bgk_core::evolution::{evolve_spectral, ComplexField2D};
use bgk_core::operator::{norm_phi, VSliceFunction};
use bgk_core::quadrature::VelocityGrid;
use num_complex::Complex64;

fn rel(a: &VSliceFunction, b: &VSliceFunction) -> f64 {
    norm_phi(&a.sub(b)) / norm_phi(b)
}

#[test]
fn negative_wavenumbers_reconstruct() {
    let grid = Arc::new(VelocityGrid::resolved());
    for kind in [CorpusKind::Gaussian, CorpusKind::ShiftedGaussian] {
        let data = kind.initial_data();
        for xi in [-0.5, -1.5, -2.0] {
            let slice = SpectralSlice::from_initial(&data, xi).unwrap();
            let f = evolve_spectral(&slice, Arc::clone(&grid), 0.0).unwrap();
            assert!(
                rel(&f, &data.slice(Arc::clone(&grid), xi).unwrap()) < 1e-10,
                "{kind} {xi}"
            );
        }
    }
}

#[test]
fn index_zero_branch_has_no_real_coefficient() {
    for kind in [CorpusKind::Gaussian, CorpusKind::ShiftedGaussian] {
        let s = SpectralSlice::from_initial(&kind.initial_data(), CHI_ZERO_XI).unwrap();
        assert_eq!(s.c0(), Complex64::new(0.0, 0.0));
        assert_eq!(s.lambda(), None);
        assert_eq!(s.chi(), 0);
    }
}

#[test]
fn k0_tail_is_small_on_the_corpus() {
    for kind in CorpusKind::ALL {
        let data = kind.initial_data();
        for xi in [0.25, 1.5] {
            let s = SpectralSlice::from_initial(&data, xi).unwrap();
            let tail = s
                .nodes()
                .iter()
                .zip(s.k0_nodes())
                .filter(|(v, _)| v.abs() > 6.0)
                .map(|(_, k)| k.norm())
                .fold(0.0, f64::max);
            assert!(tail < 1e-6, "{kind} {xi}: {tail:e}");
        }
    }
}

#[test]
fn gridded_input_matches_closed_form() {
    let v_nodes: Vec<f64> = (0..=320).map(|k| -8.0 + 0.05 * k as f64).collect();
    let xis = vec![0.5, 1.0];
    let rows: Vec<Vec<Complex64>> = xis
        .iter()
        .map(|_| {
            v_nodes
                .iter()
                .map(|&v| Complex64::new((-v * v).exp(), 0.0))
                .collect()
        })
        .collect();
    let gridded = InitialData::from_rows("gridded", xis.clone(), v_nodes, rows).unwrap();
    let exact = CorpusKind::Gaussian.initial_data();
    for xi in xis {
        let a = SpectralSlice::from_initial(&gridded, xi).unwrap();
        let b = SpectralSlice::from_initial(&exact, xi).unwrap();
        assert!((a.c0() - b.c0()).norm() < 1e-5, "xi {xi}");
    }
}

#[test]
fn slice_helpers_round_trip() {
    let grid = Arc::new(VelocityGrid::resolved());
    let xi = 1.0;
    let f0 = CorpusKind::ShiftedGaussian
        .initial_data()
        .slice(Arc::clone(&grid), xi)
        .unwrap();
    let c0 = compute_c0(&f0).unwrap();
    let k0 = compute_k0(&f0, c0).unwrap();
    assert_eq!(k0.len(), f0.len());
    let gds_removed = build_f0(&f0, c0).unwrap();
    assert!(norm_phi(&gds_removed) < norm_phi(&f0));
}

#[test]
fn slice_record_serializes() {
    let s = SpectralSlice::from_initial(&CorpusKind::Gaussian.initial_data(), 0.5).unwrap();
    let json = serde_json::to_value(s.record()).unwrap();
    for key in ["xi", "lambda", "chi", "C0", "K0"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert_eq!(
        json["K0"]["nodes"].as_array().unwrap().len(),
        s.nodes().len()
    );
}

#[test]
fn field_density_row_matches_slice_moment() {
    let data = CorpusKind::ShiftedGaussian.initial_data();
    let grid = Arc::new(VelocityGrid::resolved());
    let field = ComplexField2D::sample(&data, vec![0.25, 0.5], Arc::clone(&grid)).unwrap();
    let rho = field.density();
    let direct = grid.integrate(|v| data.eval(0.5, v));
    assert!((rho[1] - direct).norm() < 1e-15);
}
