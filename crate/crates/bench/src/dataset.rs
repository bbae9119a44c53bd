//! Benchmark map sets: synthetic mixtures or files on disk.

use std::path::Path;

use ergoplan::maps::{generate_gmm_map, random_gmm_spec, random_start_regions, GridMap, RegionLayout, StartRegionSet};
use ergoplan::{derive_seed, seeded_rng};

use crate::config::{ExperimentConfig, MapSource};
use crate::error::{BenchError, Result};

/// Grid resolution of generated maps, cells per side.
pub const DEFAULT_RESOLUTION: usize = 200;

#[derive(Clone, Debug)]
pub struct MapCase {
    pub name: String,
    pub map: GridMap,
    pub regions: StartRegionSet,
}

/// Map `index` of the synthetic set with the given seed. The mixture and the
/// regions draw from separate derived streams.
pub fn synthetic_case(
    seed: u64,
    index: usize,
    resolution: usize,
    lengths: [f64; 2],
    types: &[u32],
    layout: &RegionLayout,
) -> Result<MapCase> {
    let map_seed = derive_seed(seed, index as u64);
    let spec = random_gmm_spec(map_seed, lengths);
    let map = generate_gmm_map(&spec, resolution, resolution, lengths)?;
    let mut rng = seeded_rng(derive_seed(map_seed, 1));
    let regions = random_start_regions(&mut rng, lengths, types, layout)?;
    Ok(MapCase {
        name: format!("map_{index:03}"),
        map,
        regions,
    })
}

pub fn load_case(map_path: &Path, regions_path: &Path) -> Result<MapCase> {
    let input = |path: &Path, source| BenchError::Input {
        path: path.to_path_buf(),
        source,
    };
    // files may hold unnormalized densities
    let map = GridMap::load(map_path)
        .and_then(|m| m.normalize())
        .map_err(|e| input(map_path, e))?;
    let regions = StartRegionSet::load(regions_path).map_err(|e| input(regions_path, e))?;
    regions
        .check_within(map.lengths())
        .map_err(|e| input(regions_path, e))?;
    let name = map_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "map".to_string());
    Ok(MapCase { name, map, regions })
}

/// All maps named by the configuration, in order.
pub fn load_cases(config: &ExperimentConfig, base: &Path) -> Result<Vec<MapCase>> {
    match &config.maps {
        MapSource::Synthetic { count, seed, resolution } => (0..*count)
            .map(|i| {
                synthetic_case(
                    *seed,
                    i,
                    *resolution,
                    config.domain,
                    &config.type_ids(),
                    &config.region_layout,
                )
            })
            .collect(),
        MapSource::Files { files } => files
            .iter()
            .map(|f| load_case(&base.join(&f.map), &base.join(&f.regions)))
            .collect(),
    }
}

/// Writes `count` synthetic maps and region files into `out`.
pub fn write_cases(
    out: &Path,
    count: usize,
    seed: u64,
    resolution: usize,
    types: &[u32],
    layout: &RegionLayout,
) -> Result<Vec<MapCase>> {
    std::fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let case = synthetic_case(seed, i, resolution, [1.0, 1.0], types, layout)?;
        let map_path = out.join(format!("{}.ergmap", case.name));
        let regions_path = out.join(format!("{}.ergstart", case.name));
        std::fs::write(&map_path, case.map.to_text()).map_err(|e| BenchError::io(&map_path, e))?;
        std::fs::write(&regions_path, case.regions.to_text()).map_err(|e| BenchError::io(&regions_path, e))?;
        cases.push(case);
    }
    Ok(cases)
}
