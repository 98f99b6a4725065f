//! Reference data: published slope tables and exception lists.

use rug::Rational;

/// Lower halves of the `p = 79` slope sequences at every weight carrying a
/// fractional or exceptional slope up to `k = 444`.
pub const P79_LOWER_HALVES: &[(u32, &str)] = &[
    (38, "0, 1"),
    (44, "0, 0, 1"),
    (116, "0, 1/2, 1/2, 1, 1, 1, 1, 1, 1"),
    (118, "0, 0, 0, 1, 1, 1, 1, 1, 2"),
    (122, "0, 0, 1/2, 1/2, 1, 1, 1, 1, 1"),
    (124, "0, 0, 0, 1, 1, 1, 1, 1, 1, 2"),
    (194, "0, 1/2, 1/2, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2"),
    (196, "0, 0, 0, 1, 1, 1, 1, 1, 3/2, 3/2, 2, 2, 2, 2, 2, 2"),
    (198, "0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3"),
    (200, "0, 0, 1/2, 1/2, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2"),
    (202, "0, 0, 0, 1, 1, 1, 1, 1, 1, 3/2, 3/2, 2, 2, 2, 2, 2"),
    (204, "0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3"),
    (272, "0, 1/2, 1/2, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3"),
    (274, "0, 0, 0, 1, 1, 1, 1, 1, 3/2, 3/2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3"),
    (276, "0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 5/2, 5/2, 3, 3, 3, 3, 3, 3"),
    (278, "0, 0, 1/2, 1/2, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4"),
    (280, "0, 0, 0, 1, 1, 1, 1, 1, 1, 3/2, 3/2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3"),
    (282, "0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 5/2, 5/2, 3, 3, 3, 3, 3"),
    (284, "0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 4"),
    (350, "0, 1/2, 1/2, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4"),
    (352, "0, 0, 0, 1, 1, 1, 1, 1, 3/2, 3/2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4"),
    (354, "0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 5/2, 5/2, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4"),
    (356, "0, 0, 1/2, 1/2, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 7/2, 7/2, 4, 4, 4, 4, 4, 4"),
    (358, "0, 0, 0, 1, 1, 1, 1, 1, 1, 3/2, 3/2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 5"),
    (360, "0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 5/2, 5/2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4"),
    (362, "0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 7/2, 7/2, 4, 4, 4, 4, 4"),
    (364, "0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 5"),
    (428, "0, 1/2, 1/2, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 5, 5"),
    (430, "0, 0, 0, 1, 1, 1, 1, 1, 3/2, 3/2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 5"),
    (432, "0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 5/2, 5/2, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 5, 5"),
    (434, "0, 0, 1/2, 1/2, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 7/2, 7/2, 4, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 5"),
    (436, "0, 0, 0, 1, 1, 1, 1, 1, 1, 3/2, 3/2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 9/2, 9/2, 5, 5, 5, 5, 5, 5"),
    (438, "0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 5/2, 5/2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 6"),
    (440, "0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 7/2, 7/2, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 5, 5"),
    (442, "0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 9/2, 9/2, 5, 5, 5, 5, 5"),
    (444, "0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 5, 6"),
];

/// Weights at which some slope violates `slope <= (k - 1)/(p + 1)`.
pub const EXCEPTION_TABLE: &[(u64, &[u32])] = &[
    (59, &[16, 46, 76, 106, 136, 166, 196, 226, 256, 286, 316, 346, 376, 406, 436, 466, 496]),
    (79, &[38, 44, 118, 124, 198, 204, 278, 284, 358, 364, 438, 444]),
    (2411, &[12]),
    (15271, &[16]),
    (187441, &[16]),
    (3371, &[20]),
    (64709, &[20]),
    (27310421, &[26]),
];

/// Primes whose exception lists are complete for every weight up to the bound.
pub const EXHAUSTIVE_SWEEPS: &[(u64, u32)] = &[(59, 500), (79, 444)];

/// Supersingularity of the exceptional slope at each `p = 59` exceptional
/// weight, truncated to three decimals, in weight order.
pub const P59_EXCEPTIONAL_SSING: &[&str] = &[
    "0.066", "0.022", "0.026", "0.019", "0.022", "0.018", "0.020", "0.017", "0.019",
    "0.017", "0.019", "0.017", "0.018", "0.017", "0.018", "0.017", "0.018",
];

/// Exceptional slopes stated explicitly for `p = 59`.
pub const P59_EXCEPTIONAL_SLOPES: &[(u32, u32)] = &[(16, 1), (46, 1), (76, 2), (106, 2), (136, 3)];

/// Exceptional integral slopes `n >= 2` whose trains of fractional pairs
/// (slope `(2j - 1)/2` at weight `k - 2(n - j)`) are stated explicitly.
pub const STATED_TRAINS: &[(u64, u32, u32)] = &[
    (59, 76, 2),
    (59, 106, 2),
    (59, 136, 3),
    (59, 166, 3),
    (59, 196, 4),
    (59, 226, 4),
    (79, 118, 2),
    (79, 124, 2),
    (79, 198, 3),
    (79, 204, 3),
    (79, 278, 4),
    (79, 284, 4),
    (79, 358, 5),
    (79, 364, 5),
    (79, 438, 6),
    (79, 444, 6),
];

pub fn parse_slopes(text: &str) -> Vec<Rational> {
    text.split(',')
        .map(|s| s.trim().parse::<Rational>().expect("fixture slopes are rationals"))
        .collect()
}

pub fn p79_lower_half(k: u32) -> Option<Vec<Rational>> {
    P79_LOWER_HALVES.iter().find(|(w, _)| *w == k).map(|(_, s)| parse_slopes(s))
}

pub fn exception_weights(p: u64) -> Option<&'static [u32]> {
    EXCEPTION_TABLE.iter().find(|(q, _)| *q == p).map(|(_, ks)| *ks)
}
