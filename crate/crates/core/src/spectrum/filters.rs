//! Orthonormal Daubechies low-pass filters, normalized so the taps sum to √2.
//! Taps are given to 20 digits and rounded by the compiler.
#![allow(clippy::excessive_precision)]

use std::f64::consts::FRAC_1_SQRT_2;

pub const DAUBECHIES_NAMES: [&str; 4] = ["D2", "D4", "D6", "D8"];

const D2: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];

const D4: [f64; 4] = [
    0.482_962_913_144_534_143_37,
    0.836_516_303_737_807_905_58,
    0.224_143_868_042_013_381_03,
    -0.129_409_522_551_260_381_17,
];

const D6: [f64; 6] = [
    0.332_670_552_950_082_616,
    0.806_891_509_311_092_576_49,
    0.459_877_502_118_491_570_1,
    -0.135_011_020_010_254_588_7,
    -0.085_441_273_882_026_661_693,
    0.035_226_291_885_709_536_603,
];

const D8: [f64; 8] = [
    0.230_377_813_308_896_500_86,
    0.714_846_570_552_915_647_09,
    0.630_880_767_929_858_907_88,
    -0.027_983_769_416_859_854_211,
    -0.187_034_811_719_093_084_08,
    0.030_841_381_835_560_763_627,
    0.032_883_011_666_885_199_735,
    -0.010_597_401_785_069_032_105,
];

/// Filter taps by name (`"D4"` has four taps).
pub fn daubechies_filter(name: &str) -> Option<&'static [f64]> {
    match name.to_ascii_uppercase().as_str() {
        "D2" | "HAAR" => Some(&D2),
        "D4" => Some(&D4),
        "D6" => Some(&D6),
        "D8" => Some(&D8),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taps_satisfy_orthonormality() {
        for name in DAUBECHIES_NAMES {
            let h = daubechies_filter(name).unwrap();
            let sum: f64 = h.iter().sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12, "{name}");
            // Σ h_n h_{n+2l} = δ_l
            for l in 0..h.len() / 2 {
                let dot: f64 = (0..h.len() - 2 * l).map(|n| h[n] * h[n + 2 * l]).sum();
                let want = if l == 0 { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "{name} shift {l}: {dot}");
            }
        }
    }
}
