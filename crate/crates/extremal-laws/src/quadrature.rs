//! Adaptive Gauss–Kronrod (10/21-point) quadrature and Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// QUADPACK qk21 abscissae and weights
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208463296341,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// One 21-point Kronrod panel: (integral, error estimate, integral of |f|).
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = WGK[10] * fc;
    let mut rg = 0.0;
    let mut rabs = (WGK[10] * fc).abs();
    for i in 0..10 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        rk += WGK[i] * (f1 + f2);
        rabs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            rg += WG[i / 2] * (f1 + f2);
        }
    }
    let mut err = ((rk - rg) * h).abs();
    // QUADPACK-style error sharpening
    let resasc = rabs * h.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    (rk * h, err, rabs * h.abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`; the panel with the
/// largest error estimate is bisected until `err <= max(abs_tol, rel_tol*|I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_panels: usize) -> QuadResult {
    integrate_with_breaks(&mut f, &[a, b], abs_tol, rel_tol, max_panels)
}

/// As [`integrate`], starting from the panels delimited by `breaks` (sorted).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    f: &mut F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e, _) = gk21(f, w[0], w[1]);
            evals += 21;
            heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
        }
    }
    let mut total: f64 = heap.iter().map(|p| p.value).sum();
    let mut err: f64 = heap.iter().map(|p| p.err).sum();
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if err <= tol || heap.len() >= max_panels {
            // final value re-summed in panel order, independent of refinement history
            let err: f64 = heap.iter().map(|p| p.err).sum();
            let value = sorted_sum(&heap);
            return QuadResult { value, abs_error: err, evaluations: evals, converged: err <= tol };
        }
        let p = match heap.pop() {
            Some(p) => p,
            None => return QuadResult { value: 0.0, abs_error: 0.0, evaluations: evals, converged: true },
        };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b || p.err == 0.0 {
            // cannot split further
            let err: f64 = heap.iter().map(|p| p.err).sum::<f64>() + p.err;
            heap.push(p);
            let value = sorted_sum(&heap);
            return QuadResult { value, abs_error: err, evaluations: evals, converged: err <= tol };
        }
        let (v1, e1, _) = gk21(f, p.a, m);
        let (v2, e2, _) = gk21(f, m, p.b);
        evals += 42;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        if err < 0.0 {
            err = heap.iter().map(|p| p.err).sum::<f64>() + e1 + e2;
        }
        heap.push(Panel { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, err: e2 });
    }
}

fn sorted_sum(heap: &BinaryHeap<Panel>) -> f64 {
    let mut ps: Vec<(f64, f64)> = heap.iter().map(|p| (p.a, p.value)).collect();
    ps.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    let mut s = NeumaierSum::default();
    for (_, v) in ps {
        s.add(v);
    }
    s.value()
}

/// Integral over `[a, inf)` through the map `x = a + s/(1-s)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, abs_tol: f64, rel_tol: f64, max_panels: usize) -> QuadResult {
    let mut g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - s;
        let v = f(a + s / d);
        if v == 0.0 {
            0.0
        } else {
            v / (d * d)
        }
    };
    integrate_with_breaks(&mut g, &[0.0, 0.5, 0.75, 0.9, 1.0], abs_tol, rel_tol, max_panels)
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, Newton on the three-term recurrence
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
