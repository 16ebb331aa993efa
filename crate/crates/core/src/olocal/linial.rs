//! Color reduction with polynomials over prime fields.
//!
//! A color `c < m` is read as the base-`p` digits of a polynomial of degree
//! `d` over `F_p` (valid when `p^{d+1} ≥ m`). Two different polynomials agree on
//! at most `d` points, so when `p > Δ·d` every vertex finds an `x` at which its
//! polynomial differs from all neighbors'; the pair `(x, f(x))` is its new
//! color, drawn from `p²` values. Each step shrinks `m` roughly to
//! `(Δ·log m)²`, so `O(log* m)` steps reach `O(Δ²)`.

/// The final palette is at most `nextPow2(K·Δ²)` colors.
pub const LINIAL_K: u64 = 8;

/// Coloring takes at most `log*(n̂) + C₀` clock rounds.
pub const LINIAL_C0: u64 = 2;

fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= x {
        if x.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

fn next_prime(mut x: u64) -> u64 {
    while !is_prime(x) {
        x += 1;
    }
    x
}

/// Smallest `r` with `r^k ≥ m`.
fn ceil_root(m: u64, k: u32) -> u64 {
    let fits = |r: u64| (r as u128).checked_pow(k).is_none_or(|v| v >= m as u128);
    let mut r = (m as f64).powf(1.0 / k as f64).floor().max(1.0) as u64;
    while r > 1 && fits(r - 1) {
        r -= 1;
    }
    while !fits(r) {
        r += 1;
    }
    r
}

/// One recoloring step: polynomial degree and field size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub degree: u32,
    pub prime: u64,
}

/// The smallest field (ties: smaller degree) that can recolor `m` colors.
fn best_step(m: u64, delta: u64) -> Step {
    let mut best: Option<Step> = None;
    for d in 1..=64u32 {
        let floor = delta * d as u64 + 1;
        if best.is_some_and(|b| floor > b.prime) {
            break;
        }
        let p = next_prime(floor.max(ceil_root(m, d + 1)));
        if best.is_none_or(|b| p < b.prime) {
            best = Some(Step {
                degree: d,
                prime: p,
            });
        }
    }
    best.expect("degree one always yields a field")
}

/// Steps that strictly shrink the palette, starting from `m0` colors, and the
/// final palette size. Every vertex derives the same plan from `(n̂, Δ)`.
pub fn plan(m0: u64, delta: u64) -> (Vec<Step>, u64) {
    if delta == 0 {
        return (Vec::new(), 1);
    }
    let mut m = m0.max(1);
    let mut steps = Vec::new();
    loop {
        let s = best_step(m, delta);
        let next = s.prime as u128 * s.prime as u128;
        if next >= m as u128 {
            return (steps, m);
        }
        steps.push(s);
        m = next as u64;
    }
}

fn eval(color: u64, step: Step, x: u64) -> u64 {
    let p = step.prime as u128;
    let mut digits = Vec::with_capacity(step.degree as usize + 1);
    let mut c = color as u128;
    for _ in 0..=step.degree {
        digits.push(c % p);
        c /= p;
    }
    // Horner from the highest coefficient.
    digits
        .iter()
        .rev()
        .fold(0u128, |acc, &a| (acc * x as u128 + a) % p) as u64
}

/// New color for `own` given neighbors' current colors (all different from `own`).
/// `None` only if the step parameters are inadequate for this neighborhood.
pub fn recolor(own: u64, neighbors: &[u64], step: Step) -> Option<u64> {
    (0..step.prime).find_map(|x| {
        let fx = eval(own, step, x);
        neighbors
            .iter()
            .all(|&c| eval(c, step, x) != fx)
            .then_some(x * step.prime + fx)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_roots() {
        assert_eq!(next_prime(14), 17);
        assert_eq!(next_prime(2), 2);
        assert_eq!(ceil_root(100, 2), 10);
        assert_eq!(ceil_root(101, 2), 11);
        assert_eq!(ceil_root(1, 3), 1);
        assert_eq!(ceil_root(u64::MAX, 2), 1 << 32);
    }

    #[test]
    fn plans_end_near_delta_squared() {
        for delta in 2..400u64 {
            for e in 1..=32 {
                for m0 in [
                    (1u64 << e) - 1,
                    1 << e,
                    (1 << e) + 1,
                    3u64.pow(e).min(1 << 32),
                ] {
                    let (steps, m) = plan(m0, delta);
                    assert!(
                        m.next_power_of_two() <= (LINIAL_K * delta * delta).next_power_of_two(),
                        "Δ={delta} m0={m0} m={m}"
                    );
                    let rounds = steps.len() as u64 + 1;
                    assert!(
                        rounds <= crate::graph::log_star(m0) as u64 + LINIAL_C0,
                        "Δ={delta} m0={m0}: {steps:?}"
                    );
                }
            }
        }
        assert_eq!(plan(1 << 20, 0), (Vec::new(), 1));
    }

    #[test]
    fn recolor_keeps_neighbors_apart() {
        let step = Step {
            degree: 2,
            prime: 11,
        };
        let own = 500;
        let nbrs = [17, 499, 501, 1000, 3];
        let mine = recolor(own, &nbrs, step).unwrap();
        for &c in &nbrs {
            let x = mine / 11;
            assert_ne!(eval(c, step, x), mine % 11);
        }
    }
}
