//! Orthonormal Daubechies scaling filters, Db1 (Haar) through Db8.
//!
//! Values are the minimum-phase spectral factorization of the Daubechies
//! polynomial, normalized so that the taps sum to sqrt(2). Filter `k` has
//! `2k` taps and `k` vanishing moments.

#![allow(clippy::excessive_precision)]

use std::f64::consts::FRAC_1_SQRT_2;

const DB1: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];

const DB2: [f64; 4] = [
    0.48296291314453414337,
    0.83651630373780790558,
    0.22414386804201338103,
    -0.12940952255126038117,
];

const DB3: [f64; 6] = [
    0.33267055295008261600,
    0.80689150931109257649,
    0.45987750211849157010,
    -0.13501102001025458870,
    -0.085441273882026661693,
    0.035226291885709536603,
];

const DB4: [f64; 8] = [
    0.23037781330889650086,
    0.71484657055291564709,
    0.63088076792985890788,
    -0.027983769416859854211,
    -0.18703481171909308408,
    0.030841381835560763627,
    0.032883011666885199735,
    -0.010597401785069032105,
];

const DB5: [f64; 10] = [
    0.16010239797419291448,
    0.60382926979718967054,
    0.72430852843777292773,
    0.13842814590132073151,
    -0.24229488706638203186,
    -0.032244869584638374648,
    0.077571493840045713523,
    -0.0062414902127982742742,
    -0.012580751999081999469,
    0.0033357252854737712780,
];

const DB6: [f64; 12] = [
    0.11154074335010946362,
    0.49462389039845308568,
    0.75113390802109535068,
    0.31525035170919762909,
    -0.22626469396543982008,
    -0.12976686756726193556,
    0.097501605587323049102,
    0.027522865530305728626,
    -0.031582039317486029565,
    0.00055384220116149613925,
    0.0047772575109455106396,
    -0.0010773010853084795649,
];

const DB7: [f64; 14] = [
    0.077852054085009179020,
    0.39653931948191730654,
    0.72913209084623511992,
    0.46978228740519312247,
    -0.14390600392856497541,
    -0.22403618499387498264,
    0.071309219266830264751,
    0.080612609151083071913,
    -0.038029936935014413580,
    -0.016574541630666880654,
    0.012550998556099840613,
    0.00042957797292136652113,
    -0.0018016407040474909153,
    0.00035371379997452024845,
];

const DB8: [f64; 16] = [
    0.054415842243104009955,
    0.31287159091429997066,
    0.67563073629728980681,
    0.58535468365420671277,
    -0.015829105256349305667,
    -0.28401554296154692652,
    0.00047248457391328277036,
    0.12874742662047845886,
    -0.017369301001807546170,
    -0.044088253930794751507,
    0.013981027917398281649,
    0.0087460940474057767164,
    -0.0048703529934515743104,
    -0.00039174037337694704630,
    0.00067544940645056936637,
    -0.00011747678412476953373,
];

/// Scaling (low-pass) filter of the Daubechies wavelet with `order` vanishing
/// moments. Returns `None` outside 1..=8.
pub fn daubechies_lowpass(order: u8) -> Option<&'static [f64]> {
    Some(match order {
        1 => &DB1,
        2 => &DB2,
        3 => &DB3,
        4 => &DB4,
        5 => &DB5,
        6 => &DB6,
        7 => &DB7,
        8 => &DB8,
        _ => return None,
    })
}

/// Quadrature mirror of a scaling filter: `g[k] = (-1)^k h[F-1-k]`.
pub fn quadrature_mirror(lowpass: &[f64]) -> Vec<f64> {
    let n = lowpass.len();
    (0..n)
        .map(|k| {
            let v = lowpass[n - 1 - k];
            if k % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}
