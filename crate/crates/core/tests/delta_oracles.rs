//! Separation against brute-force assignment on discretized graphons.

use graphon_gcn::graphon::{delta_separation, FamilyPoint, StepGraphon};
use proptest::prelude::*;

/// Degree of each grid cell normalized by the grid total degree, with cells
/// at midpoints of `cells` equal intervals.
fn grid_profile(w: &StepGraphon, cells: usize) -> Vec<f64> {
    let masses = w.block_masses();
    let values = w.values();
    let bounds: Vec<f64> = masses
        .iter()
        .scan(0.0, |acc, m| {
            *acc += m;
            Some(*acc)
        })
        .collect();
    let cell_block: Vec<usize> = (0..cells)
        .map(|i| {
            let x = (i as f64 + 0.5) / cells as f64;
            bounds.iter().position(|&b| x < b).unwrap_or(masses.len() - 1)
        })
        .collect();
    let degree: Vec<f64> = cell_block
        .iter()
        .map(|&a| cell_block.iter().map(|&b| values[a][b]).sum::<f64>() / cells as f64)
        .collect();
    let total = degree.iter().sum::<f64>() / cells as f64;
    degree.iter().map(|d| d / total).collect()
}

/// Smallest mean absolute difference over all bijections of the cells.
fn brute_assignment(a: &[f64], b: &[f64]) -> f64 {
    fn go(a: &[f64], b: &[f64], used: &mut Vec<bool>, i: usize, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if i == a.len() {
            *best = acc;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(a, b, used, i + 1, acc + (a[i] - b[j]).abs(), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best / a.len() as f64
}

fn sorted_l1(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Step graphon whose block masses are multiples of `1 / cells`.
fn grid_graphon(counts: &[usize], cells: usize, entries: &[f64]) -> StepGraphon {
    let k = counts.len();
    let mut values = vec![vec![0.0; k]; k];
    let mut it = entries.iter();
    for a in 0..k {
        for b in a..k {
            let v = *it.next().unwrap();
            values[a][b] = v;
            values[b][a] = v;
        }
    }
    let masses = counts.iter().map(|&c| c as f64 / cells as f64).collect();
    StepGraphon::new(masses, values, None).unwrap()
}

fn split(total: usize, parts: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..total, parts - 1).prop_map(move |mut cuts| {
        cuts.sort_unstable();
        cuts.dedup();
        let mut out = Vec::new();
        let mut prev = 0;
        for c in cuts.into_iter().chain([total]) {
            out.push(c - prev);
            prev = c;
        }
        out
    })
}

fn grid_graphon_strategy(cells: usize) -> impl Strategy<Value = StepGraphon> {
    (1usize..=4)
        .prop_flat_map(move |k| split(cells, k))
        .prop_flat_map(move |counts| {
            let k = counts.len();
            (Just(counts), prop::collection::vec(0.05f64..1.0, k * (k + 1) / 2))
        })
        .prop_map(move |(counts, entries)| grid_graphon(&counts, cells, &entries))
}

#[test]
fn worked_examples_match_fine_grid() {
    let sbm = grid_graphon(&[5000, 5000], 10_000, &[0.8, 0.5, 0.2]);
    let flat = StepGraphon::constant(0.5).unwrap();
    let f0 = FamilyPoint::new([0.5, 0.5, 0.5], 0.5, 0.0)
        .unwrap()
        .to_sbm()
        .unwrap()
        .to_graphon()
        .unwrap();
    let f1 = FamilyPoint::new([0.5, 0.5, 0.5], 0.5, 0.15)
        .unwrap()
        .to_sbm()
        .unwrap()
        .to_graphon()
        .unwrap();
    for (w0, w1, expected) in [(&sbm, &sbm, 0.0), (&sbm, &flat, 0.3), (&f0, &f1, 0.0)] {
        let oracle = sorted_l1(grid_profile(w0, 10_000), grid_profile(w1, 10_000));
        let got = delta_separation(w0, w1);
        assert!((got - oracle).abs() <= 1e-6, "{got} vs oracle {oracle}");
        assert!((got - expected).abs() <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_exhaustive_assignment_on_six_cells(
        w0 in grid_graphon_strategy(6),
        w1 in grid_graphon_strategy(6),
    ) {
        let oracle = brute_assignment(&grid_profile(&w0, 6), &grid_profile(&w1, 6));
        prop_assert!((delta_separation(&w0, &w1) - oracle).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn matches_fine_grid_sort(
        w0 in grid_graphon_strategy(10_000),
        w1 in grid_graphon_strategy(10_000),
    ) {
        let oracle = sorted_l1(grid_profile(&w0, 10_000), grid_profile(&w1, 10_000));
        prop_assert!((delta_separation(&w0, &w1) - oracle).abs() <= 1e-6);
    }
}
