//! Spectral band allocation for heterogeneous teams.
//!
//! The nonzero basis indices are ordered by frequency magnitude `|k|` and cut
//! into contiguous bands, one per agent type. Types with wider sensor
//! footprints receive lower-frequency bands. Cuts are placed so that the
//! share of the map's weighted spectral energy `sum alpha_k xi_k^2` in each
//! band tracks that type's share of the agents.
//!
//! Each type then plans against its own target distribution: the constant
//! term plus its band, reconstructed, clipped at zero and renormalized.

use std::collections::BTreeMap;

use crate::agents::AgentSpec;
use crate::error::{Error, Result};
use crate::maps::GridMap;
use crate::spectral::{map_coefficients, reconstruct_map, BasisSpec, CoefficientVector};

/// Maximum number of agent types that can share a spectrum.
pub const MAX_TYPES: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct BandPartition {
    /// Agent types in band order (widest sensor first).
    pub type_ids: Vec<u32>,
    /// Agents per type, in band order.
    pub counts: Vec<usize>,
    /// Flat basis positions per band. Position 0 (the constant) is listed
    /// in band 0 only.
    pub bands: Vec<Vec<usize>>,
    /// `M - 1` increasing cut values of `|k|`; band `m` holds the indices
    /// with `thresholds[m-1] < |k| <= thresholds[m]`.
    pub thresholds: Vec<f64>,
}

impl BandPartition {
    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn band_of_type(&self, type_id: u32) -> Option<usize> {
        self.type_ids.iter().position(|t| *t == type_id)
    }
}

/// Distinct agent types with their counts and sensor spreads, sorted widest
/// footprint first (ties by type id).
pub fn team_types(specs: &[AgentSpec]) -> Result<Vec<(u32, usize, f64)>> {
    let mut types: BTreeMap<u32, (usize, f64)> = BTreeMap::new();
    for s in specs {
        let entry = types.entry(s.type_id).or_insert((0, s.sensor.sigma));
        if entry.1 != s.sensor.sigma {
            return Err(Error::Config(format!(
                "agents of type {} disagree on sensor sigma",
                s.type_id
            )));
        }
        entry.0 += 1;
    }
    let mut out: Vec<(u32, usize, f64)> = types.into_iter().map(|(t, (n, s))| (t, n, s)).collect();
    out.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    Ok(out)
}

/// Splits the basis indices into one frequency band per agent type.
pub fn partition_bands(
    basis: &BasisSpec,
    xi: &CoefficientVector,
    specs: &[AgentSpec],
) -> Result<BandPartition> {
    if xi.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: xi.len(),
        });
    }
    let types = team_types(specs)?;
    let m = types.len();
    if m == 0 {
        return Err(Error::Config("team has no agents".into()));
    }
    if m > MAX_TYPES {
        return Err(Error::Config(format!(
            "{m} agent types exceed the supported maximum of {MAX_TYPES}"
        )));
    }
    let type_ids: Vec<u32> = types.iter().map(|t| t.0).collect();
    let counts: Vec<usize> = types.iter().map(|t| t.1).collect();
    if m == 1 {
        return Ok(BandPartition {
            type_ids,
            counts,
            bands: vec![(0..basis.len()).collect()],
            thresholds: Vec::new(),
        });
    }

    // Group nonzero indices by squared integer norm.
    let mut levels: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pos, k) in basis.indices().iter().enumerate().skip(1) {
        levels.entry(k[0] * k[0] + k[1] * k[1]).or_default().push(pos);
    }
    let levels: Vec<(usize, Vec<usize>)> = levels.into_iter().collect();
    if levels.len() < m {
        return Err(Error::Config(format!(
            "{m} agent types need at least {m} frequency levels, basis has {}",
            levels.len()
        )));
    }
    let energy = |pos: usize| basis.weights()[pos] * xi[pos] * xi[pos];
    let mut level_mass: Vec<f64> = levels
        .iter()
        .map(|(_, ps)| ps.iter().map(|&p| energy(p)).sum())
        .collect();
    if !(level_mass.iter().sum::<f64>() > 0.0) {
        // flat map: split by index count instead
        level_mass = levels.iter().map(|(_, ps)| ps.len() as f64).collect();
    }
    let total: f64 = level_mass.iter().sum();
    let cumulative: Vec<f64> = level_mass
        .iter()
        .scan(0.0, |acc, e| {
            *acc += e;
            Some(*acc / total)
        })
        .collect();

    let agents: usize = counts.iter().sum();
    let mut cuts = Vec::with_capacity(m - 1);
    let mut share = 0.0;
    let mut lowest = 0;
    for (b, n) in counts.iter().enumerate().take(m - 1) {
        share += *n as f64 / agents as f64;
        // leave at least one level for each remaining band
        let highest = levels.len() - (m - b);
        let mut best = lowest;
        for l in lowest..=highest {
            if (cumulative[l] - share).abs() < (cumulative[best] - share).abs() {
                best = l;
            }
        }
        cuts.push(best);
        lowest = best + 1;
    }

    let mut bands = vec![vec![0usize]];
    let mut start = 0;
    for (b, &cut) in cuts.iter().chain(std::iter::once(&(levels.len() - 1))).enumerate() {
        if b > 0 {
            bands.push(Vec::new());
        }
        for (_, ps) in &levels[start..=cut] {
            bands[b].extend(ps);
        }
        start = cut + 1;
    }
    for band in &mut bands {
        band.sort_unstable();
    }
    let thresholds = cuts.iter().map(|&c| (levels[c].0 as f64).sqrt()).collect();
    Ok(BandPartition {
        type_ids,
        counts,
        bands,
        thresholds,
    })
}

fn check_partition(partition: &BandPartition, basis: &BasisSpec) -> Result<()> {
    let mut seen = vec![false; basis.len()];
    for band in &partition.bands {
        for &p in band {
            if p >= basis.len() || seen[p] {
                return Err(Error::Precondition(format!(
                    "partition does not match the basis (position {p})"
                )));
            }
            seen[p] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Precondition("partition does not cover the basis".into()));
    }
    Ok(())
}

fn band_coefficients(xi: &CoefficientVector, band: &[usize], basis: &BasisSpec, carrier: bool) -> CoefficientVector {
    let mut values = vec![0.0; basis.len()];
    if carrier {
        values[0] = xi[0];
    }
    for &p in band {
        values[p] = xi[p];
    }
    CoefficientVector::new(basis, values).expect("subset of finite coefficients")
}

/// Pre-clip reconstruction of every band on an `nx` by `ny` grid. The
/// constant term appears in band 0 only, so the maps sum to the
/// reconstruction of `xi`.
pub fn band_reconstructions(
    xi: &CoefficientVector,
    partition: &BandPartition,
    basis: &BasisSpec,
    nx: usize,
    ny: usize,
) -> Result<Vec<GridMap>> {
    check_partition(partition, basis)?;
    partition
        .bands
        .iter()
        .map(|band| reconstruct_map(&band_coefficients(xi, band, basis, false), basis, nx, ny))
        .collect()
}

/// Target coefficients per band, in band order.
///
/// With a single band the target is `xi` itself. Otherwise each band keeps
/// its own coefficients plus the constant term, and the reconstructed map is
/// clipped at zero, renormalized and transformed back.
pub fn band_targets(
    xi: &CoefficientVector,
    partition: &BandPartition,
    basis: &BasisSpec,
    nx: usize,
    ny: usize,
) -> Result<Vec<CoefficientVector>> {
    check_partition(partition, basis)?;
    if partition.len() == 1 {
        return Ok(vec![xi.clone()]);
    }
    partition
        .bands
        .iter()
        .enumerate()
        .map(|(b, band)| {
            let map = reconstruct_map(&band_coefficients(xi, band, basis, true), basis, nx, ny)?;
            let target = map.clipped().normalize().map_err(|_| Error::DegenerateBand {
                band: b,
                type_id: partition.type_ids[b],
            })?;
            map_coefficients(&target, basis)
        })
        .collect()
}
