//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod gen;

use rand::Rng;
use rulecheck::arith::{QVector, Rational};
use rulecheck::lp::LinearSystem;
use rulecheck::rule::{LinearAtom, Relation};

/// Solves `rows · z = rhs` by Gauss-Jordan elimination and returns the
/// particular solution with all non-pivot variables at zero.
pub fn solve_equalities(rows: &[Vec<Rational>], rhs: &[Rational], n: usize) -> Option<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut r = r.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip().unwrap();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                let pr = m[row].clone();
                for (v, p) in m[i].iter_mut().zip(pr.iter()) {
                    *v = &*v - &(&f * p);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    let mut z = vec![Rational::zero(); n];
    for (i, &col) in pivots.iter().enumerate() {
        z[col] = m[i][n].clone();
    }
    Some(z)
}

fn subsets(k: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for i in 0..k {
        let mut more = Vec::new();
        for s in &out {
            if s.len() < max {
                let mut t = s.clone();
                t.push(i);
                more.push(t);
            }
        }
        out.extend(more);
    }
    out
}

/// Brute-force feasibility by enumerating candidate points of minimal
/// faces of `{(x, δ) : strict rows get +δ, δ <= 1}`: every subset of at
/// most `d + 1` inequality boundaries, together with all equalities, is
/// solved as an equation system. The open system is feasible iff some
/// candidate satisfies every row with `δ > 0`.
pub fn vertex_oracle(sys: &LinearSystem) -> bool {
    let d = sys.dim();
    let n = d + 1;
    let mut ineq: Vec<(Vec<Rational>, Rational)> = Vec::new();
    let mut eq: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for a in sys.constraints() {
        let sign = match a.rel {
            Relation::Lt | Relation::Le | Relation::Eq => Rational::one(),
            Relation::Gt | Relation::Ge => -Rational::one(),
        };
        let mut row: Vec<Rational> = a.coeffs.iter().map(|c| c * &sign).collect();
        row.push(if a.rel.is_strict() {
            Rational::one()
        } else {
            Rational::zero()
        });
        let rhs = &a.constant * &sign;
        if a.rel == Relation::Eq {
            eq.push((row, rhs));
        } else {
            ineq.push((row, rhs));
        }
    }
    let mut cap = vec![Rational::zero(); n];
    cap[d] = Rational::one();
    ineq.push((cap, Rational::one()));

    let satisfies = |z: &[Rational]| {
        let dot = |r: &[Rational]| r.iter().zip(z).map(|(a, b)| a * b).sum::<Rational>();
        ineq.iter().all(|(r, b)| dot(r) <= *b) && eq.iter().all(|(r, b)| dot(r) == *b)
    };
    for s in subsets(ineq.len(), n) {
        let mut rows: Vec<Vec<Rational>> = eq.iter().map(|(r, _)| r.clone()).collect();
        let mut rhs: Vec<Rational> = eq.iter().map(|(_, b)| b.clone()).collect();
        for &i in &s {
            rows.push(ineq[i].0.clone());
            rhs.push(ineq[i].1.clone());
        }
        if let Some(z) = solve_equalities(&rows, &rhs, n) {
            if satisfies(&z) && z[d].is_positive() {
                return true;
            }
        }
    }
    false
}

/// Random system with `d <= 4`, at most 8 constraints, coefficients in
/// `-3..=3` and constants in `-4..=4`.
pub fn random_system<R: Rng>(rng: &mut R) -> LinearSystem {
    let d = rng.gen_range(1..=4);
    let k = rng.gen_range(0..=8);
    let rels = [Relation::Lt, Relation::Le, Relation::Eq, Relation::Ge, Relation::Gt];
    let mut sys = LinearSystem::new(d);
    for _ in 0..k {
        let coeffs: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
        // Equalities are rarer so that most systems keep full dimension.
        let rel = if rng.gen_bool(0.1) {
            Relation::Eq
        } else {
            rels[[0, 1, 3, 4][rng.gen_range(0..4)]]
        };
        let atom = LinearAtom::new(
            QVector::from_ints(&coeffs),
            rel,
            Rational::from_int(rng.gen_range(-4..=4)),
        );
        sys.push(atom).unwrap();
    }
    sys
}
