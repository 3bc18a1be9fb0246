//! Numerical arc-length reparametrization of curves given in an arbitrary
//! parameter `u`.
//!
//! Lengths are accumulated with adaptive 10-point Gauss-Legendre panels; the
//! inverse map `s -> u` is solved by safeguarded Newton inside the panel that
//! brackets `s`, so both directions are accurate to roughly machine precision.

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

pub(crate) fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

#[derive(Clone, Debug)]
pub(crate) struct ArcLength {
    knots: Vec<f64>,
    cum: Vec<f64>,
}

impl ArcLength {
    /// `breaks` must be increasing; panels never straddle a break.
    pub(crate) fn build<F: Fn(f64) -> f64>(speed: &F, breaks: &[f64], min_panels: usize) -> Self {
        let mut knots = vec![breaks[0]];
        let mut cum = vec![0.0];
        for w in breaks.windows(2) {
            let per = min_panels.max(1);
            let h = (w[1] - w[0]) / per as f64;
            for k in 0..per {
                let a = w[0] + h * k as f64;
                let b = if k + 1 == per { w[1] } else { a + h };
                let whole = gauss_legendre(speed, a, b);
                refine(speed, a, b, whole, 0, &mut knots, &mut cum);
            }
        }
        Self { knots, cum }
    }

    pub(crate) fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub(crate) fn s_of_u<F: Fn(f64) -> f64>(&self, speed: &F, u: f64) -> f64 {
        let k = match self.knots.binary_search_by(|k| k.partial_cmp(&u).unwrap()) {
            Ok(i) => return self.cum[i],
            Err(0) => 0,
            Err(i) => (i - 1).min(self.knots.len() - 2),
        };
        self.cum[k] + gauss_legendre(speed, self.knots[k], u)
    }

    pub(crate) fn u_of_s<F: Fn(f64) -> f64>(&self, speed: &F, s: f64) -> f64 {
        let n = self.knots.len();
        if s <= 0.0 {
            return self.knots[0];
        }
        if s >= self.total() {
            return self.knots[n - 1];
        }
        let k = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.knots[i],
            Err(i) => i - 1,
        };
        let (mut lo, mut hi) = (self.knots[k], self.knots[k + 1]);
        let (c0, c1) = (self.cum[k], self.cum[k + 1]);
        let mut u = lo + (hi - lo) * (s - c0) / (c1 - c0);
        for _ in 0..60 {
            let f = c0 + gauss_legendre(speed, self.knots[k], u) - s;
            if f.abs() <= 1e-16 * (1.0 + s.abs()) {
                break;
            }
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let step = u - f / speed(u);
            u = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-16 * (1.0 + u.abs()) {
                break;
            }
        }
        u
    }
}

fn refine<F: Fn(f64) -> f64>(
    speed: &F,
    a: f64,
    b: f64,
    whole: f64,
    depth: u32,
    knots: &mut Vec<f64>,
    cum: &mut Vec<f64>,
) {
    let m = 0.5 * (a + b);
    let left = gauss_legendre(speed, a, m);
    let right = gauss_legendre(speed, m, b);
    if depth >= 24 || (left + right - whole).abs() <= 1e-15 * whole.abs().max(1e-300) {
        let base = *cum.last().unwrap();
        knots.push(m);
        cum.push(base + left);
        knots.push(b);
        cum.push(base + left + right);
        return;
    }
    refine(speed, a, m, left, depth + 1, knots, cum);
    refine(speed, m, b, right, depth + 1, knots, cum);
}
