//! One-dimensional quadrature rules used by moments, the quantile
//! representation of 1-D Wasserstein distances and the exponential envelope.

use crate::scalar::Scalar;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
// Gauss weights for the nodes GK_NODES[1], [3], [5], [7].
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

pub(crate) const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_805,
    0.525_532_409_916_328_986,
    0.796_666_477_413_626_740,
    0.960_289_856_497_536_232,
];
pub(crate) const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_361_983,
    0.313_706_645_877_887_287,
    0.222_381_034_453_374_471,
    0.101_228_536_290_376_259,
];

fn gk15<S: Scalar, F: FnMut(S) -> S>(f: &mut F, a: S, b: S) -> (S, S) {
    let half = (b - a) / S::lit(2.0);
    let mid = (a + b) / S::lit(2.0);
    let center = f(mid);
    let mut kronrod = center * S::lit(GK_WEIGHTS[7]);
    let mut gauss = center * S::lit(G7_WEIGHTS[3]);
    for i in 0..7 {
        let dx = half * S::lit(GK_NODES[i]);
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += pair * S::lit(GK_WEIGHTS[i]);
        if i % 2 == 1 {
            gauss += pair * S::lit(G7_WEIGHTS[i / 2]);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<S> {
    pub value: S,
    pub error: S,
    pub converged: bool,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over `[a, b]`,
/// with optional interior breakpoints where the integrand has kinks.
pub fn adaptive<S: Scalar, F: FnMut(S) -> S>(
    mut f: F,
    a: S,
    b: S,
    breakpoints: &[S],
    rel_tol: S,
    abs_tol: S,
    max_intervals: usize,
) -> Integral<S> {
    let mut cuts: Vec<S> = vec![a];
    let mut interior: Vec<S> = breakpoints.iter().copied().filter(|&c| c > a && c < b).collect();
    interior.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.extend(interior);
    cuts.push(b);

    let mut intervals: Vec<(S, S, S, S)> = cuts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();

    loop {
        let total: S = intervals.iter().map(|iv| iv.2).sum();
        let err: S = intervals.iter().map(|iv| iv.3).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target || intervals.len() >= max_intervals {
            return Integral { value: total, error: err, converged: err <= target };
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, S::zero()), |acc, (i, iv)| if iv.3 > acc.1 { (i, iv.3) } else { acc });
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = (lo + hi) / S::lit(2.0);
        if mid <= lo || mid >= hi {
            // interval at floating-point resolution
            let total: S = intervals.iter().map(|iv| iv.2).sum();
            let err: S = intervals.iter().map(|iv| iv.3).sum();
            return Integral { value: total, error: err, converged: false };
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Composite 8-point Gauss–Legendre rule on `panels` equal panels of `[a, b]`.
pub fn composite_gauss_legendre<S: Scalar, F: FnMut(S) -> S>(mut f: F, a: S, b: S, panels: usize) -> S {
    let width = (b - a) / S::from_usize_(panels);
    let half = width / S::lit(2.0);
    let mut acc = S::zero();
    for k in 0..panels {
        let mid = a + width * (S::from_usize_(k) + S::lit(0.5));
        let mut panel = S::zero();
        for i in 0..4 {
            let dx = half * S::lit(GL8_NODES[i]);
            panel += S::lit(GL8_WEIGHTS[i]) * (f(mid - dx) + f(mid + dx));
        }
        acc += panel * half;
    }
    acc
}
