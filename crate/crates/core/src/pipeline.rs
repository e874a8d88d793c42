//! Instance construction: check-in ingestion (TSV → bounding box → location
//! clusters → road graph) and seeded synthetic generators.

use std::collections::BTreeSet;
use std::io::Read;

use chrono::{DateTime, Utc};
use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobile::mobile_reduction_instance;
use crate::model::{Instance, SensingGraph, SocialGraph};
use crate::static_solver::vcp_reduction_instance;

/// Mean Earth radius in metres.
const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckIn {
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub latitude: f64,
    pub longitude: f64,
    pub location_id: String,
}

/// A line that could not be parsed, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedCheckins {
    pub records: Vec<CheckIn>,
    pub rejected: Vec<RejectedLine>,
}

fn parse_record(fields: &csv::StringRecord) -> std::result::Result<CheckIn, String> {
    if fields.len() != 5 {
        return Err(format!("expected 5 tab-separated fields, found {}", fields.len()));
    }
    let timestamp = DateTime::parse_from_rfc3339(fields[1].trim())
        .map_err(|e| format!("bad timestamp {:?}: {e}", &fields[1]))?
        .with_timezone(&Utc);
    let coord = |i: usize, name: &str, limit: f64| -> std::result::Result<f64, String> {
        let v: f64 = fields[i]
            .trim()
            .parse()
            .map_err(|_| format!("bad {name} {:?}", &fields[i]))?;
        if !v.is_finite() || v.abs() > limit {
            return Err(format!("{name} {v} outside [-{limit}, {limit}]"));
        }
        Ok(v)
    };
    Ok(CheckIn {
        user_id: fields[0].to_string(),
        timestamp,
        latitude: coord(2, "latitude", 90.0)?,
        longitude: coord(3, "longitude", 180.0)?,
        location_id: fields[4].trim().to_string(),
    })
}

/// Parses Gowalla-style check-ins: `user_id, timestamp, latitude, longitude,
/// location_id`, tab-separated, LF or CRLF. Malformed lines are collected in
/// `rejected` and parsing continues.
pub fn parse_checkins<R: Read>(reader: R) -> Result<ParsedCheckins> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        // Split on LF only: the CRLF terminator makes csv report the previous line number.
        .terminator(csv::Terminator::Any(b'\n'))
        .from_reader(reader);
    let mut out = ParsedCheckins::default();
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(line, |p| p.line());
                record.trim();
                if record.len() == 1 && record[0].is_empty() {
                    continue;
                }
                match parse_record(&record) {
                    Ok(c) => out.records.push(c),
                    Err(reason) => out.rejected.push(RejectedLine { line, reason }),
                }
            }
            Err(e) => match e.kind() {
                csv::ErrorKind::Utf8 { pos, err } => out.rejected.push(RejectedLine {
                    line: pos.as_ref().map_or(line, |p| p.line()),
                    reason: format!("invalid UTF-8: {err}"),
                }),
                _ => return Err(Error::input(format!("cannot read check-ins: {e}"))),
            },
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl BoundingBox {
    pub fn new(lat_min: f64, lat_max: f64, lon_min: f64, lon_max: f64) -> Result<Self> {
        if !(lat_min < lat_max && lon_min < lon_max) {
            return Err(Error::input(format!(
                "bounding box needs lat_min < lat_max and lon_min < lon_max, got [{lat_min}, {lat_max}] x [{lon_min}, {lon_max}]"
            )));
        }
        Ok(BoundingBox {
            lat_min,
            lat_max,
            lon_min,
            lon_max,
        })
    }

    /// 37°46′20″N–37°47′N, 122°26′30″W–122°25′30″W (San Francisco).
    pub fn study_area() -> Self {
        BoundingBox {
            lat_min: 37.0 + 46.0 / 60.0 + 20.0 / 3600.0,
            lat_max: 37.0 + 47.0 / 60.0,
            lon_min: -(122.0 + 26.0 / 60.0 + 30.0 / 3600.0),
            lon_max: -(122.0 + 25.0 / 60.0 + 30.0 / 3600.0),
        }
    }

    pub fn globe() -> Self {
        BoundingBox {
            lat_min: -90.0,
            lat_max: 90.0,
            lon_min: -180.0,
            lon_max: 180.0,
        }
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }
}

/// Check-ins inside `bbox`, boundary included.
pub fn filter_bbox(checkins: &[CheckIn], bbox: &BoundingBox) -> Vec<CheckIn> {
    checkins
        .iter()
        .filter(|c| bbox.contains(c.latitude, c.longitude))
        .cloned()
        .collect()
}

/// Great-circle distance in metres between two `(lat, lon)` points in degrees.
pub fn haversine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (la1, lo1) = (a.0.to_radians(), a.1.to_radians());
    let (la2, lo2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((la2 - la1) / 2.0).sin().powi(2) + la1.cos() * la2.cos() * ((lo2 - lo1) / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// `(lat, lon)` centroid of each cluster.
    pub centroids: Vec<(f64, f64)>,
    /// Cluster index of each input point.
    pub assignment: Vec<usize>,
}

/// Agglomerative centroid-linkage clustering by haversine distance, merging
/// the closest pair until exactly `target` clusters remain. Identical
/// coordinates start in one cluster. Clusters are numbered by their smallest
/// input index.
pub fn cluster_points(points: &[(f64, f64)], target: usize) -> Result<Clustering> {
    if target == 0 {
        return Err(Error::input("cluster target must be >= 1"));
    }
    // Seed clusters with distinct coordinates.
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    let mut weight: Vec<f64> = Vec::new();
    let mut seed_of = Vec::with_capacity(points.len());
    let mut index = std::collections::HashMap::new();
    for &(lat, lon) in points {
        let key = (lat.to_bits(), lon.to_bits());
        let s = *index.entry(key).or_insert_with(|| {
            seeds.push((lat, lon));
            weight.push(0.0);
            seeds.len() - 1
        });
        weight[s] += 1.0;
        seed_of.push(s);
    }
    let n = seeds.len();
    if target > n {
        return Err(Error::input(format!(
            "cluster target {target} exceeds the {n} distinct coordinates"
        )));
    }

    let mut centroid = seeds.clone();
    let mut alive = vec![true; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let nearest = |c: usize, centroid: &[(f64, f64)], alive: &[bool]| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for d in (0..centroid.len()).filter(|&d| d != c && alive[d]) {
            let dist = haversine(centroid[c], centroid[d]);
            if dist < best.1 {
                best = (d, dist);
            }
        }
        best
    };
    let mut nn: Vec<(usize, f64)> = (0..n).map(|c| nearest(c, &centroid, &alive)).collect();
    let mut count = n;
    while count > target {
        let a = (0..n)
            .filter(|&c| alive[c])
            .min_by(|&x, &y| nn[x].1.total_cmp(&nn[y].1).then(x.cmp(&y)))
            .expect("at least two clusters");
        let b = nn[a].0;
        let (keep, gone) = (a.min(b), a.max(b));
        let (wa, wb) = (weight[keep], weight[gone]);
        centroid[keep] = (
            (centroid[keep].0 * wa + centroid[gone].0 * wb) / (wa + wb),
            (centroid[keep].1 * wa + centroid[gone].1 * wb) / (wa + wb),
        );
        weight[keep] = wa + wb;
        alive[gone] = false;
        parent[gone] = keep;
        count -= 1;
        if count == 1 {
            break;
        }
        nn[keep] = nearest(keep, &centroid, &alive);
        for c in (0..n).filter(|&c| alive[c] && c != keep) {
            if nn[c].0 == keep || nn[c].0 == gone {
                nn[c] = nearest(c, &centroid, &alive);
            } else {
                let d = haversine(centroid[c], centroid[keep]);
                if d < nn[c].1 || (d == nn[c].1 && keep < nn[c].0) {
                    nn[c] = (keep, d);
                }
            }
        }
    }

    let root = |mut s: usize| {
        while parent[s] != s {
            s = parent[s];
        }
        s
    };
    let roots: Vec<usize> = (0..n).filter(|&c| alive[c]).collect();
    let label = |r: usize| roots.binary_search(&r).expect("root is alive");
    Ok(Clustering {
        centroids: roots.iter().map(|&r| centroid[r]).collect(),
        assignment: seed_of.iter().map(|&s| label(root(s))).collect(),
    })
}

pub fn cluster_locations(checkins: &[CheckIn], target: usize) -> Result<Clustering> {
    let pts: Vec<(f64, f64)> = checkins.iter().map(|c| (c.latitude, c.longitude)).collect();
    cluster_points(&pts, target)
}

/// Road proxy: each location links to its `knn` nearest others (an edge is
/// kept if either endpoint picks it), then the shortest cross-component
/// links are added until the graph is connected. Returns sorted `(u, v)`, `u < v`.
pub fn build_roads(locations: &[(f64, f64)], knn: usize) -> Result<Vec<(usize, usize)>> {
    let n = locations.len();
    if n < 2 {
        return Err(Error::input("road construction needs at least 2 locations"));
    }
    if knn == 0 {
        return Err(Error::input("knn must be >= 1"));
    }
    let dist = |a: usize, b: usize| haversine(locations[a], locations[b]);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for u in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&v| v != u).collect();
        others.sort_by(|&a, &b| dist(u, a).total_cmp(&dist(u, b)).then(a.cmp(&b)));
        for &v in others.iter().take(knn) {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let mut uf = UnionFind::<usize>::new(n);
    for &(u, v) in &edges {
        uf.union(u, v);
    }
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !uf.equiv(u, v))
        .map(|(u, v)| (dist(u, v), u, v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    for (_, u, v) in pairs {
        if uf.union(u, v) {
            edges.insert((u, v));
        }
    }
    Ok(edges.into_iter().collect())
}

/// Random social graph: degrees drawn from `Normal(mean, sigma)`, rounded and
/// clipped to `[0, m−1]`, then realized by random stub matching that drops
/// self-loops and repeated pairs.
pub fn synth_social(m: usize, degree_mean: f64, degree_sigma: f64, seed: u64) -> Result<SocialGraph> {
    if m == 0 {
        return Err(Error::input("social graph needs m >= 1"));
    }
    let normal = Normal::new(degree_mean, degree_sigma)
        .map_err(|e| Error::input(format!("bad degree distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = Vec::new();
    for u in 0..m {
        let d = normal.sample(&mut rng).round().clamp(0.0, (m - 1) as f64) as usize;
        stubs.extend(std::iter::repeat_n(u, d));
    }
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    // A few rematching rounds recover most stubs lost to collisions.
    for _ in 0..8 {
        if stubs.len() < 2 {
            break;
        }
        stubs.shuffle(&mut rng);
        let mut left = Vec::new();
        for pair in stubs.chunks(2) {
            match *pair {
                [a, b] if a != b && !edges.contains(&(a.min(b), a.max(b))) => {
                    edges.insert((a.min(b), a.max(b)));
                }
                _ => left.extend_from_slice(pair),
            }
        }
        stubs = left;
    }
    SocialGraph::new(m, edges.into_iter().collect())
}

/// Erdős–Rényi sensing graph `G(node_count, p)` whose first `user_count`
/// nodes are users.
pub fn synth_sensing(node_count: usize, user_count: usize, p: f64, rng: &mut impl Rng) -> Result<SensingGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("edge probability {p} outside [0, 1]")));
    }
    let mut edges = Vec::new();
    for u in 0..node_count {
        for v in (u + 1)..node_count {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    SensingGraph::new(node_count, user_count, edges)
}

/// Synthetic check-ins inside `bbox`, scattered around seeded hotspots.
pub fn synth_checkins(count: usize, hotspots: usize, bbox: &BoundingBox, seed: u64) -> Vec<CheckIn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hotspots = hotspots.max(1);
    let centres: Vec<(f64, f64)> = (0..hotspots)
        .map(|_| {
            (
                rng.random_range(bbox.lat_min..=bbox.lat_max),
                rng.random_range(bbox.lon_min..=bbox.lon_max),
            )
        })
        .collect();
    let spread_lat = (bbox.lat_max - bbox.lat_min) / 40.0;
    let spread_lon = (bbox.lon_max - bbox.lon_min) / 40.0;
    let jitter_lat = Normal::new(0.0, spread_lat).expect("positive spread");
    let jitter_lon = Normal::new(0.0, spread_lon).expect("positive spread");
    let base = DateTime::parse_from_rfc3339("2010-10-01T00:00:00Z")
        .expect("valid literal")
        .with_timezone(&Utc);
    (0..count)
        .map(|i| {
            let h = rng.random_range(0..hotspots);
            // Rounded to 1e-6 degrees like the public dumps.
            let round = |x: f64| (x * 1e6).round() / 1e6;
            let lat = round((centres[h].0 + jitter_lat.sample(&mut rng)).clamp(bbox.lat_min, bbox.lat_max));
            let lon = round((centres[h].1 + jitter_lon.sample(&mut rng)).clamp(bbox.lon_min, bbox.lon_max));
            CheckIn {
                user_id: format!("u{}", rng.random_range(0..count.max(1))),
                timestamp: base + chrono::Duration::seconds(i as i64 * 97),
                latitude: lat,
                longitude: lon,
                location_id: format!("h{h}"),
            }
        })
        .collect()
}

/// Parameters for turning check-ins into an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestParams {
    pub clusters: usize,
    pub knn: usize,
    pub social_mean: f64,
    pub social_sigma: f64,
    pub seed: u64,
}

impl Default for IngestParams {
    fn default() -> Self {
        IngestParams {
            clusters: 92,
            knn: 4,
            social_mean: 24.0,
            social_sigma: 8.0,
            seed: 0,
        }
    }
}

/// Clusters check-ins into locations, links them by road proxy edges and adds
/// a Gaussian social graph. Every location is a user node.
pub fn instance_from_checkins(checkins: &[CheckIn], params: &IngestParams) -> Result<Instance> {
    let clustering = cluster_locations(checkins, params.clusters)?;
    let roads = build_roads(&clustering.centroids, params.knn)?;
    let m = clustering.centroids.len();
    let sensing = SensingGraph::new(m, m, roads)?;
    let social = synth_social(m, params.social_mean, params.social_sigma, params.seed)?;
    Instance::simple(sensing, social)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReductionKind {
    /// Vertex-cover graph turned into a static instance.
    Vcp {
        node_count: usize,
        edges: Vec<(usize, usize)>,
    },
    /// Static instance from `base` turned into a mobile instance with `n`-hop tails.
    Mobile { base: Box<GenSpec>, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum GenSpec {
    SyntheticRandom {
        node_count: usize,
        user_count: usize,
        edge_probability: f64,
        social_mean: f64,
        social_sigma: f64,
        seed: u64,
    },
    GowallaLike {
        checkins: usize,
        hotspots: usize,
        #[serde(flatten)]
        params: IngestParams,
    },
    Reduction(ReductionKind),
}

impl GenSpec {
    pub fn gowalla_like(seed: u64) -> Self {
        GenSpec::GowallaLike {
            checkins: 2176,
            hotspots: 140,
            params: IngestParams {
                seed,
                ..IngestParams::default()
            },
        }
    }
}

/// Builds the instance described by `spec`; the same spec always yields the
/// same instance.
pub fn synth_instance(spec: &GenSpec) -> Result<Instance> {
    match spec {
        GenSpec::SyntheticRandom {
            node_count,
            user_count,
            edge_probability,
            social_mean,
            social_sigma,
            seed,
        } => {
            if *user_count == 0 || user_count > node_count {
                return Err(Error::input("need 1 <= user_count <= node_count"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let sensing = synth_sensing(*node_count, *user_count, *edge_probability, &mut rng)?;
            let social = synth_social(*user_count, *social_mean, *social_sigma, rng.random())?;
            Instance::simple(sensing, social)
        }
        GenSpec::GowallaLike {
            checkins,
            hotspots,
            params,
        } => {
            let bbox = BoundingBox::study_area();
            let records = synth_checkins(*checkins, *hotspots, &bbox, params.seed);
            instance_from_checkins(&filter_bbox(&records, &bbox), params)
        }
        GenSpec::Reduction(ReductionKind::Vcp { node_count, edges }) => {
            vcp_reduction_instance(*node_count, edges)
        }
        GenSpec::Reduction(ReductionKind::Mobile { base, n }) => {
            mobile_reduction_instance(&synth_instance(base)?, *n)
        }
    }
}
