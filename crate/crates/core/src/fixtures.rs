//! Worked example data shipped with the library.
//!
//! Tables use the same text format as [`MocTable::parse`]; matrices use the
//! `rows cols` header format of [`IntMatrix::parse_text`].

use std::sync::Arc;

use crate::chartable::MocTable;
use crate::exactnum::BigInt;
use crate::intlin::IntMatrix;

fn table(text: &str) -> Arc<MocTable> {
    Arc::new(MocTable::parse(text).expect("shipped table parses"))
}

fn matrix(text: &str) -> IntMatrix {
    IntMatrix::parse_text(text).expect("shipped matrix parses")
}

pub const A5_TEXT: &str = include_str!("../data/a5.tbl");
pub const A4_TEXT: &str = include_str!("../data/a4.tbl");
pub const D10_TEXT: &str = include_str!("../data/d10.tbl");
pub const J2_MOD3_TEXT: &str = include_str!("../data/j2mod3.tbl");

/// Ordinary table of the alternating group of degree 5.
pub fn a5() -> Arc<MocTable> {
    table(A5_TEXT)
}

/// Ordinary table of A4, a subgroup of A5.
pub fn a4() -> Arc<MocTable> {
    table(A4_TEXT)
}

/// Ordinary table of the dihedral group of order 10, a subgroup of A5.
pub fn d10() -> Arc<MocTable> {
    table(D10_TEXT)
}

/// Class fusion A4 → A5 by class name.
pub const A4_IN_A5: [&str; 4] = ["1a", "2a", "3a", "3a"];

/// Class fusion D10 → A5 by class name.
pub const D10_IN_A5: [&str; 4] = ["1a", "2a", "5a", "5b"];

/// A basic set of 3-modular Brauer characters of J2.
pub fn j2_mod3() -> Arc<MocTable> {
    table(J2_MOD3_TEXT)
}

/// The Brauer character 169 of J2 mod 3 in the columns of [`j2_mod3`].
pub fn j2_mod3_169() -> Vec<BigInt> {
    include_str!("../data/j2mod3_169.txt")
        .split_whitespace()
        .map(|t| t.parse().expect("integer"))
        .collect()
}

/// Co1 mod 7, principal block: scalar products of the Brauer basic set with
/// the projective basic set.
pub fn co1_u() -> IntMatrix {
    matrix(include_str!("../data/co1_u.txt"))
}

/// Co1 mod 7: relations expressing the remaining restricted ordinaries over
/// the Brauer basic set.
pub fn co1_v() -> IntMatrix {
    matrix(include_str!("../data/co1_v.txt"))
}

/// Co1 mod 7: projective relations over the projective basic set.
pub fn co1_w() -> IntMatrix {
    matrix(include_str!("../data/co1_w.txt"))
}

/// Co2 mod 5, principal block: scalar products of the Brauer basic set
/// (rows) with the projective basic set (columns), see [`CO2_PS`].
pub fn co2_u() -> IntMatrix {
    matrix(include_str!("../data/co2_u.txt"))
}

/// Co2 mod 5: further Brauer characters over the Brauer basic set, see
/// [`CO2_B`].
pub fn co2_b() -> IntMatrix {
    matrix(include_str!("../data/co2_b.txt"))
}

/// Co2 mod 5: projectives Φ₄, Φ₅, Φ₇ over the projective basic set.
pub fn co2_p() -> IntMatrix {
    matrix(include_str!("../data/co2_p.txt"))
}

pub const CO2_PS: [&str; 16] = [
    "Psi37", "Psi51", "Psi46", "Psi39", "Psi43", "Psi42", "Psi38", "Psi34", "Psi49", "Phi6", "Psi11", "Psi32",
    "Psi31", "Psi20", "Psi8", "Psi4",
];

pub const CO2_BS: [&str; 16] = [
    "1", "23", "253", "1771", "2024", "2277", "7084", "10395_1", "31878", "37422", "129536", "184437", "212520",
    "239085_1", "368874", "1291059",
];

pub const CO2_B: [&str; 5] = ["245916", "312984", "637560", "1835008", "2072576"];

/// M11 mod 2, principal block: three projectives over Irr(B).
pub fn m11_proj() -> IntMatrix {
    matrix(include_str!("../data/m11_proj.txt"))
}

pub const M11_DEGREES: [i64; 8] = [1, 10, 10, 10, 11, 44, 45, 55];

/// Real valued characters of the M11 principal 2-block, in the row order of
/// [`m11_proj`].
pub const M11_REAL: [bool; 8] = [true, true, false, false, true, true, true, true];
