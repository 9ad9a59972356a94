mod common;

use inr_bench::network::{ModelKind, ModelSpec};

#[test]
fn toy_models_match_finite_differences() {
    for kind in ModelKind::ALL {
        for seed in [1u64, 7] {
            let r = common::gradient_check(&ModelSpec::toy(kind), seed);
            assert!(r.checked > 0);
            assert!(r.worst_rel < 1e-4, "{kind}: worst relative error {:.3e} over {} params", r.worst_rel, r.checked);
        }
    }
}

#[test]
fn learnable_fourier_frequencies_get_gradients() {
    let mut spec = ModelSpec::toy(ModelKind::Fourier);
    spec.encoding.learnable = true;
    let r = common::gradient_check(&spec, 11);
    assert!(r.worst_rel < 1e-4, "{:.3e}", r.worst_rel);
}
