mod common;

use proptest::prelude::*;
use pwaffine::quadrature::{
    integrate_ball, integrate_simplex, integrate_simplex_refined, integrate_vertex_cone, BallRule,
    ConeRule, SimplexRule,
};
use pwaffine::Simplex;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `int_{unit simplex} x^k = prod k_i! / (|k| + n)!`.
fn monomial_moment(k: &[usize]) -> f64 {
    let total: usize = k.iter().sum();
    k.iter().map(|&ki| factorial(ki)).product::<f64>() / factorial(total + k.len())
}

fn unit_simplex(n: usize) -> Simplex {
    let mut verts = vec![vec![0.0; n]];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        verts.push(e);
    }
    Simplex::new(verts.into_iter().map(Into::into).collect()).unwrap()
}

fn exponents(n: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|e: Vec<usize>| {
                (0..=max_total).map(move |k| {
                    let mut e = e.clone();
                    e.push(k);
                    e
                })
            })
            .filter(|e| e.iter().sum::<usize>() <= max_total)
            .collect();
    }
    out
}

fn monomial(x: &[f64], k: &[usize]) -> f64 {
    x.iter()
        .zip(k)
        .map(|(xi, &ki)| xi.powi(ki as i32))
        .product()
}

#[test]
fn collapsed_rule_integrates_monomials_exactly() {
    for n in 1..=3 {
        let s = unit_simplex(n);
        for degree in [1, 4, 6, 9] {
            let rule = SimplexRule::collapsed(n, degree);
            for k in exponents(n, degree) {
                let got = integrate_simplex(|x| monomial(x, &k), &s, &rule).unwrap();
                let want = monomial_moment(&k);
                assert!(
                    (got - want).abs() < 1e-14,
                    "n={n} degree={degree} k={k:?}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn cone_rule_integrates_monomials_exactly() {
    for n in 1..=3 {
        let s = unit_simplex(n);
        let rule = ConeRule::new(n, 8, 8);
        for vertex in 0..=n {
            let a = s.vertex(vertex).clone();
            for k in exponents(n, 6) {
                let got = integrate_vertex_cone(
                    |t, xi| {
                        let x: Vec<f64> = (0..n).map(|j| a[j] + t * (xi[j] - a[j])).collect();
                        monomial(&x, &k)
                    },
                    &s,
                    vertex,
                    &rule,
                )
                .unwrap();
                assert!(
                    (got - monomial_moment(&k)).abs() < 1e-14,
                    "n={n} vertex={vertex} k={k:?}"
                );
            }
        }
    }
}

/// Grundmann-Moeller rule of index `s` (degree `2s + 1`) on the unit simplex,
/// written out independently of the library's collapsed rules.
fn grundmann_moeller(n: usize, s: usize) -> Vec<(Vec<f64>, f64)> {
    let d = 2 * s + 1;
    let mut out = Vec::new();
    for i in 0..=s {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * 2f64.powi(-(2 * s as i32)) * ((d + n - 2 * i) as f64).powi(d as i32)
            / (factorial(i) * factorial(d + n - i));
        let total = s - i;
        // Compositions beta_0 + ... + beta_n = total.
        let mut stack = vec![(Vec::<usize>::new(), total)];
        while let Some((prefix, left)) = stack.pop() {
            if prefix.len() == n {
                let mut b = prefix.clone();
                b.push(left);
                let denom = (d + n - 2 * i) as f64;
                let bary: Vec<f64> = b.iter().map(|&bj| (2 * bj + 1) as f64 / denom).collect();
                out.push((bary, w * factorial(n)));
                continue;
            }
            for k in 0..=left {
                let mut p = prefix.clone();
                p.push(k);
                stack.push((p, left - k));
            }
        }
    }
    out
}

/// Adaptive integration by uniform bisection of the longest edge until the
/// two-rule estimate stabilises.
fn adaptive(f: &dyn Fn(&[f64]) -> f64, verts: &[Vec<f64>], tol: f64, depth: usize) -> f64 {
    let n = verts.len() - 1;
    let s = Simplex::new(verts.iter().cloned().map(Into::into).collect()).unwrap();
    let apply = |rule: &[(Vec<f64>, f64)]| -> f64 {
        rule.iter().map(|(b, w)| w * f(&s.point_at(b))).sum::<f64>() * s.volume()
    };
    let coarse = apply(&grundmann_moeller(n, 3));
    let fine = apply(&grundmann_moeller(n, 4));
    if (coarse - fine).abs() < tol || depth == 0 {
        return fine;
    }
    let mut best = (0, 1, 0.0);
    for i in 0..=n {
        for j in i + 1..=n {
            let d: f64 = verts[i]
                .iter()
                .zip(&verts[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i, j, _) = best;
    let mid: Vec<f64> = verts[i]
        .iter()
        .zip(&verts[j])
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mut left = verts.to_vec();
    left[j] = mid.clone();
    let mut right = verts.to_vec();
    right[i] = mid;
    adaptive(f, &left, tol / 2.0, depth - 1) + adaptive(f, &right, tol / 2.0, depth - 1)
}

#[test]
fn grundmann_moeller_oracle_is_exact_on_monomials() {
    for n in 1..=3 {
        let s = unit_simplex(n);
        let rule = grundmann_moeller(n, 3);
        for k in exponents(n, 7) {
            let got: f64 = rule
                .iter()
                .map(|(b, w)| w * monomial(&s.point_at(b), &k))
                .sum::<f64>()
                * s.volume();
            assert!((got - monomial_moment(&k)).abs() < 1e-13, "n={n} k={k:?}");
        }
    }
}

#[test]
fn vertex_singular_integrand_matches_adaptive_oracle() {
    // Du(x)[a - x] (gamma_a(x)^-2 - 1) for u = exp(x0 - 2 x1): the integrand
    // behaves like 1 / |x - a| at the vertex a.
    let verts = [vec![0.1, -0.2], vec![1.3, 0.1], vec![0.4, 0.9]];
    let s = Simplex::new(verts.iter().cloned().map(Into::into).collect()).unwrap();
    let a = verts[0].clone();
    let du = |x: &[f64]| {
        let e = (x[0] - 2.0 * x[1]).exp();
        [e, -2.0 * e]
    };
    let integrand = |x: &[f64]| -> f64 {
        let d = du(x);
        let g = s.gauge(0, x).unwrap();
        (d[0] * (a[0] - x[0]) + d[1] * (a[1] - x[1])) * (g.powi(-2) - 1.0)
    };
    let cone = integrate_vertex_cone(
        |t, xi| {
            let x: Vec<f64> = (0..2).map(|k| a[k] + t * (xi[k] - a[k])).collect();
            let d = du(&x);
            // a - x = t (a - xi) and the gauge equals t.
            t * (d[0] * (a[0] - xi[0]) + d[1] * (a[1] - xi[1])) * (t.powi(-2) - 1.0)
        },
        &s,
        0,
        &ConeRule::new(2, 24, 20),
    )
    .unwrap();

    let at = |t: f64, v: &[f64]| -> Vec<f64> { (0..2).map(|k| a[k] + t * (v[k] - a[k])).collect() };
    // Band gauge in [t0, t1], split into two triangles.
    let band = |t0: f64, t1: f64| -> f64 {
        let (p0, p1, q0, q1) = (
            at(t0, &verts[1]),
            at(t1, &verts[1]),
            at(t0, &verts[2]),
            at(t1, &verts[2]),
        );
        adaptive(&integrand, &[p0.clone(), p1, q1.clone()], 1e-14, 12)
            + adaptive(&integrand, &[p0, q1, q0], 1e-14, 12)
    };
    // Inside gauge eps the integrand is Du(a)[a - xi] / t to leading order, which
    // integrates to 2 vol eps Du(a)[a - m] with m the facet midpoint; the
    // remainder is O(eps^2).
    let corner = |eps: f64| -> f64 {
        let d = du(&a);
        let m = [
            (verts[1][0] + verts[2][0]) / 2.0,
            (verts[1][1] + verts[2][1]) / 2.0,
        ];
        2.0 * s.volume() * eps * (d[0] * (a[0] - m[0]) + d[1] * (a[1] - m[1]))
    };
    let levels = 14;
    let eps = 0.5f64.powi(levels);
    let outer: f64 = (0..levels)
        .map(|k| band(0.5f64.powi(k + 1), 0.5f64.powi(k)))
        .sum();
    let coarse = outer + corner(eps);
    let fine = outer + band(eps / 2.0, eps) + corner(eps / 2.0);
    // Richardson step removes the eps^2 corner term.
    let oracle = (4.0 * fine - coarse) / 3.0;
    assert!((cone - oracle).abs() < 1e-8, "{cone} vs {oracle}");
}

#[test]
fn refined_rule_handles_piecewise_integrands() {
    let s = unit_simplex(2);
    // Indicator of x0 + x1 < 1/2 has area 1/8.
    let f = |x: &[f64]| if x[0] + x[1] < 0.5 { 1.0 } else { 0.0 };
    let got = integrate_simplex_refined(f, &s, &SimplexRule::collapsed(2, 2), 6).unwrap();
    assert!((got - 0.125).abs() < 2e-3, "{got}");
}

#[test]
fn ball_rule_integrates_even_polynomials() {
    // int_{B_R} |x|^2 = n / (n + 2) * vol(B_R) * R^2.
    for n in 1..=3 {
        let rule = BallRule::new(n, 8, 16);
        let c = vec![0.3; n];
        let radius = 1.7;
        let got = integrate_ball(|rho, _| (rho * radius).powi(2), &c, radius, &rule).unwrap();
        let want = n as f64 / (n as f64 + 2.0)
            * pwaffine::quadrature::ball_volume(n, radius)
            * radius
            * radius;
        assert!((got - want).abs() < 1e-12 * want, "n={n}: {got} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cone_and_simplex_rules_agree_on_smooth_integrands((n, s) in common::dim_and_simplex(), vertex in 0usize..4) {
        let vertex = vertex % (n + 1);
        let f = |x: &[f64]| (x.iter().sum::<f64>() * 0.7).sin() + x[0] * x[0];
        let a = s.vertex(vertex).clone();
        let direct = integrate_simplex(f, &s, &SimplexRule::collapsed(n, 20)).unwrap();
        let cone = integrate_vertex_cone(
            |t, xi| {
                let x: Vec<f64> = (0..n).map(|k| a[k] + t * (xi[k] - a[k])).collect();
                f(&x)
            },
            &s,
            vertex,
            &ConeRule::new(n, 20, 20),
        )
        .unwrap();
        prop_assert!((direct - cone).abs() < 1e-10 * (1.0 + direct.abs()), "{direct} vs {cone}");
    }

    #[test]
    fn integrals_scale_with_volume((n, s) in common::dim_and_simplex(), lambda in 0.1..5.0f64) {
        let scaled = Simplex::new(
            s.vertices().iter().map(|v| v.iter().map(|c| lambda * c).collect::<Vec<_>>().into()).collect(),
        )
        .unwrap();
        let rule = SimplexRule::collapsed(n, 6);
        let f = |x: &[f64]| 1.0 + x.iter().map(|c| c * c).sum::<f64>();
        let g = |x: &[f64]| f(&x.iter().map(|c| c / lambda).collect::<Vec<_>>());
        let base = integrate_simplex(f, &s, &rule).unwrap();
        let big = integrate_simplex(g, &scaled, &rule).unwrap();
        let factor = lambda.powi(n as i32);
        prop_assert!((big - factor * base).abs() < 1e-11 * factor * base.abs().max(1.0));
    }
}
