use std::collections::BTreeSet;

use gpd::flux::{self, FluxLabel};
use gpd::grid::{self, EdgeId, Hybridization, Mode, PartialPerm, PipeDream, RowType};
use gpd::schubert;
use num_bigint::BigInt;
use num_traits::Zero;

fn all_dreams(m: usize, n: usize) -> Vec<PipeDream> {
    Hybridization::all(m)
        .iter()
        .flat_map(|b| grid::enumerate(m, n, b, None, Mode::Generic).unwrap().collect::<Vec<_>>())
        .collect()
}

fn small() -> Vec<(usize, usize)> {
    vec![(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]
}

/// Fraction-free Gaussian elimination.
fn rank(mut rows: Vec<Vec<BigInt>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    let mut prev = BigInt::from(1);
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&k| !rows[k][c].is_zero()) else { continue };
        rows.swap(r, p);
        for k in r + 1..rows.len() {
            for j in c + 1..cols {
                let v = &rows[r][c] * &rows[k][j] - &rows[k][c] * &rows[r][j];
                rows[k][j] = v / &prev;
            }
            rows[k][c] = BigInt::zero();
        }
        prev = rows[r][c].clone();
        r += 1;
    }
    r
}

#[test]
fn enumerated_dreams_revalidate() {
    for (m, n) in small() {
        for d in all_dreams(m, n) {
            d.validate().unwrap();
            let again = PipeDream::new(d.beta().clone(), d.rows().to_vec()).unwrap();
            assert_eq!(again, d);
        }
    }
}

#[test]
fn every_partial_perm_is_realized() {
    for (m, n) in small() {
        for b in Hybridization::all(m) {
            let seen: BTreeSet<PartialPerm> =
                grid::enumerate(m, n, &b, None, Mode::Generic).unwrap().map(|d| d.connectivity().0).collect();
            assert_eq!(seen, PartialPerm::all(m, n).into_iter().collect::<BTreeSet<_>>(), "({m},{n}) {b}");
        }
    }
}

#[test]
fn north_labels_realize_connectivity() {
    for (m, n) in small() {
        for d in all_dreams(m, n) {
            let t = d.trace();
            for j in 1..=n {
                let expected = (1..=m).find(|&k| t.pi.get(k) == j);
                assert_eq!(t.h(0, j), expected, "{d}");
                assert_eq!(t.h(m, j), None);
            }
        }
    }
}

#[test]
fn labels_are_conserved_through_each_tile() {
    for (m, n) in small() {
        for d in all_dreams(m, n) {
            let t = d.trace();
            for i in 1..=m {
                for j in 1..=n {
                    let (side_in, side_out) = match d.beta().row(i) {
                        RowType::W => (t.v(i, j - 1), t.v(i, j)),
                        RowType::E => (t.v(i, j), t.v(i, j - 1)),
                    };
                    let mut a: Vec<_> = [side_in, t.h(i, j)].into_iter().flatten().collect();
                    let mut b: Vec<_> = [side_out, t.h(i - 1, j)].into_iter().flatten().collect();
                    a.sort();
                    b.sort();
                    assert_eq!(a, b, "tile ({i},{j}) of\n{d}");
                }
            }
        }
    }
}

#[test]
fn mirror_substitutes_weights_dream_by_dream() {
    for (m, n) in small() {
        for d in all_dreams(m, n) {
            let e = d.mirror();
            e.validate().unwrap();
            assert_eq!(e.weight(), schubert::mirror_substitution(&d.weight()), "{d}");
            assert_eq!(e.connectivity().0, d.connectivity().0.mirror());
            assert_eq!(e.mirror(), d);
        }
    }
}

#[test]
fn flux_equations_have_full_rank() {
    for (m, n) in [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3)] {
        let var = |r: usize, j: usize| (r - 1) * n + (j - 1);
        for b in Hybridization::all(m) {
            let table = flux::flux_grid(m, n, &b);
            for d in grid::enumerate(m, n, &b, None, Mode::Generic).unwrap() {
                let eqs = flux::variety_equations(&d);
                let labels = flux::dream_flux_labels(&d);
                let mut rows = Vec::new();
                let unit = |k: usize| {
                    let mut row = vec![BigInt::zero(); m * n];
                    row[k] = BigInt::from(1);
                    row
                };
                rows.extend(eqs.zero_x.iter().map(|&(r, j)| unit(var(r, j))));
                rows.extend(eqs.zero_y.iter().map(|&(j, r)| unit(var(r, j))));
                for e in EdgeId::all(m, n) {
                    let mut row = vec![BigInt::zero(); m * n];
                    for mono in table[&e].monomials() {
                        row[var(mono.pipe, mono.col)] += 1;
                    }
                    if let FluxLabel::T(r) = labels[&e] {
                        for j in 1..=n {
                            row[var(r, j)] -= 1;
                        }
                    }
                    rows.push(row);
                }
                assert_eq!(rank(rows), m * (n - 1), "({m},{n}) {b}\n{d}");
                assert_eq!(eqs.equation_count(), m * (n - 1));
            }
        }
    }
}
