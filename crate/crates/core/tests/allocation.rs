use ergoplan::agents::{AgentSpec, SensorModel};
use ergoplan::allocation::{band_reconstructions, band_targets, partition_bands};
use ergoplan::maps::{generate_gmm_map, random_gmm_spec, GridMap};
use ergoplan::spectral::{map_coefficients, reconstruct_map, BasisSpec};

const UNIT: [f64; 2] = [1.0, 1.0];

fn two_type_team(wide: usize, narrow: usize) -> Vec<AgentSpec> {
    let mut team = vec![AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), 0.1); wide];
    team.extend(vec![AgentSpec::integrator(1, SensorModel::high_fidelity(1.0), 0.1); narrow]);
    team
}

fn seeded_map(seed: u64, n: usize) -> GridMap {
    generate_gmm_map(&random_gmm_spec(seed, UNIT), n, n, UNIT).unwrap()
}

#[test]
fn bands_cover_disjointly_and_reconstructions_add_up() {
    let basis = BasisSpec::unit(10);
    let team = two_type_team(2, 2);
    for seed in 0..20 {
        let map = seeded_map(seed, 80);
        let xi = map_coefficients(&map, &basis).unwrap();
        let p = partition_bands(&basis, &xi, &team).unwrap();
        assert_eq!(p.len(), 2);

        let mut all: Vec<usize> = p.bands.concat();
        all.sort_unstable();
        assert_eq!(all, (0..basis.len()).collect::<Vec<_>>(), "seed {seed}");
        assert!(p.bands[0].contains(&0) && !p.bands[1].contains(&0));

        let parts = band_reconstructions(&xi, &p, &basis, 80, 80).unwrap();
        let full = reconstruct_map(&xi, &basis, 80, 80).unwrap();
        let area = full.cell_area();
        let residual: f64 = (0..full.cells().len())
            .map(|i| {
                let sum: f64 = parts.iter().map(|m| m.cells()[i]).sum();
                (sum - full.cells()[i]).powi(2)
            })
            .sum::<f64>()
            * area;
        assert!(residual.sqrt() <= 1e-9, "seed {seed}: residual {:e}", residual.sqrt());
    }
}

#[test]
fn equal_counts_split_energy_closest_to_half() {
    let basis = BasisSpec::unit(10);
    for seed in 0..10 {
        let map = seeded_map(seed, 80);
        let xi = map_coefficients(&map, &basis).unwrap();
        let p = partition_bands(&basis, &xi, &two_type_team(2, 2)).unwrap();

        // scan every distinct squared norm as a candidate cut
        let energy = |k: [usize; 2]| {
            let pos = basis.position(k).unwrap();
            basis.weights()[pos] * xi[pos] * xi[pos]
        };
        let nonzero: Vec<[usize; 2]> = basis.indices().iter().copied().filter(|k| *k != [0, 0]).collect();
        let total: f64 = nonzero.iter().map(|&k| energy(k)).sum();
        let mut levels: Vec<usize> = nonzero.iter().map(|k| k[0] * k[0] + k[1] * k[1]).collect();
        levels.sort_unstable();
        levels.dedup();
        let mut best = (f64::INFINITY, 0);
        for &cut in &levels[..levels.len() - 1] {
            let low: f64 = nonzero
                .iter()
                .filter(|k| k[0] * k[0] + k[1] * k[1] <= cut)
                .map(|&k| energy(k))
                .sum();
            let gap = (low / total - 0.5).abs();
            if gap < best.0 {
                best = (gap, cut);
            }
        }
        let threshold = p.thresholds[0];
        assert_eq!((threshold * threshold).round() as usize, best.1, "seed {seed}");
    }
}

#[test]
fn wide_sensor_type_owns_the_first_harmonic() {
    let basis = BasisSpec::unit(8);
    for seed in 0..5 {
        let xi = map_coefficients(&seeded_map(seed, 50), &basis).unwrap();
        // list the narrow type first to make sure order comes from sigma
        let mut team = two_type_team(0, 3);
        team.push(AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), 0.1));
        let p = partition_bands(&basis, &xi, &team).unwrap();
        assert_eq!(p.type_ids, vec![0, 1]);
        assert!(p.bands[0].contains(&basis.position([0, 1]).unwrap()));
        assert!(p.bands[0].contains(&basis.position([1, 0]).unwrap()));
    }
}

#[test]
fn targets_are_normalized_nonnegative_distributions() {
    let basis = BasisSpec::unit(10);
    let team = two_type_team(2, 2);
    for seed in 0..10 {
        let map = seeded_map(seed, 60);
        let xi = map_coefficients(&map, &basis).unwrap();
        let p = partition_bands(&basis, &xi, &team).unwrap();
        let targets = band_targets(&xi, &p, &basis, 60, 60).unwrap();
        assert_eq!(targets.len(), 2);
        for t in &targets {
            assert!((t[0] - 1.0).abs() <= 1e-9);
            let rec = reconstruct_map(t, &basis, 60, 60).unwrap();
            assert!((rec.integral() - 1.0).abs() <= 1e-9);
        }
    }
}

fn total_variation(m: &GridMap) -> f64 {
    let (nx, ny) = (m.nx(), m.ny());
    let mut tv = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            if ix + 1 < nx {
                tv += (m.get(ix + 1, iy) - m.get(ix, iy)).abs();
            }
            if iy + 1 < ny {
                tv += (m.get(ix, iy + 1) - m.get(ix, iy)).abs();
            }
        }
    }
    tv
}

#[test]
fn low_band_is_smoother_than_the_full_map() {
    let basis = BasisSpec::unit(10);
    for seed in 0..10 {
        let map = seeded_map(seed, 80);
        let xi = map_coefficients(&map, &basis).unwrap();
        let p = partition_bands(&basis, &xi, &two_type_team(2, 2)).unwrap();
        let low = &band_reconstructions(&xi, &p, &basis, 80, 80).unwrap()[0];
        let full = reconstruct_map(&xi, &basis, 80, 80).unwrap();
        assert!(total_variation(low) < total_variation(&full), "seed {seed}");
    }
}

#[test]
fn uneven_counts_shift_the_cut() {
    let basis = BasisSpec::unit(10);
    let xi = map_coefficients(&seeded_map(7, 80), &basis).unwrap();
    let few = partition_bands(&basis, &xi, &two_type_team(1, 3)).unwrap();
    let many = partition_bands(&basis, &xi, &two_type_team(3, 1)).unwrap();
    assert!(few.thresholds[0] <= many.thresholds[0]);
    assert!(few.bands[0].len() <= many.bands[0].len());
}
