#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Arbitrary bytes must either load as a checkpoint or fail with a clean
    // format error. A loaded checkpoint's parameters must match its header.
    if let Ok(ckpt) = botgan::checkpoint::load_checkpoint_bytes(data) {
        assert_eq!(ckpt.header.layer_specs.len(), ckpt.params.layers.len());
        for (spec, layer) in ckpt.header.layer_specs.iter().zip(&ckpt.params.layers) {
            assert_eq!(spec.0, layer.in_dim);
            assert_eq!(spec.1, layer.out_dim);
        }
        for (layer, weights) in ckpt.params.layers.iter().zip(&ckpt.params.weights) {
            assert_eq!(weights.dim(), (layer.out_dim, layer.in_dim));
        }
    }
});
