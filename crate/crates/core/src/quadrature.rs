//! Gauss–Legendre rules for the radial inner integrals.

use std::sync::OnceLock;

/// Default node count.
pub const BASE_ORDER: usize = 64;
const MAX_DOUBLINGS: usize = 4;
const REL_TOL: f64 = 1e-9;

pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_rule(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

static RULES: [OnceLock<Rule>; MAX_DOUBLINGS + 1] =
    [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

/// Cached rule with `BASE_ORDER << level` nodes.
pub fn rule(level: usize) -> &'static Rule {
    RULES[level].get_or_init(|| legendre_rule(BASE_ORDER << level))
}

/// Fixed-order integral of `f` over `[a, b]`.
pub fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, level: usize) -> f64 {
    let r = rule(level);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut s = 0.0;
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Integral of `f` over `[a, b]`, doubling the node count until the relative
/// change drops below `1e-9` (at most 1024 nodes).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut prev = fixed(&f, a, b, 0);
    for level in 1..=MAX_DOUBLINGS {
        let next = fixed(&f, a, b, level);
        if (next - prev).abs() <= REL_TOL * next.abs() || next == prev {
            return next;
        }
        prev = next;
    }
    prev
}
