//! Small numeric utilities: compensated summation and log-factorials.

/// Kahan summation with Neumaier's correction.
///
/// The engine accumulates thousands of probability-weighted risk terms whose
/// magnitudes span many orders; naive summation loses the small terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

// ln(n!) for n <= 20; 20! is the largest factorial exactly representable in u64,
// so these table entries are correctly rounded.
const LN_FACTORIAL_SMALL: [f64; 21] = [
    0.0,
    0.0,
    std::f64::consts::LN_2,
    1.791759469228055,
    3.1780538303479458,
    4.787491742782046,
    6.579251212010101,
    8.525161361065415,
    10.60460290274525,
    12.801827480081469,
    15.104412573075516,
    17.502307845873887,
    19.987214495661885,
    22.552163853123425,
    25.19122118273868,
    27.89927138384089,
    30.671860106080672,
    33.50507345013689,
    36.39544520803305,
    39.339884187199495,
    42.335616460753485,
];

/// ln(n!) — table lookup for small n, Stirling's series beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n <= 20 {
        return LN_FACTORIAL_SMALL[n as usize];
    }
    // ln Gamma(x) at x = n + 1; truncation error below 1e-15 for x >= 22.
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// ln C(n, k), used by test oracles for binomial cross-checks.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}
