//! Seeded random instance generation. Every instance is a pure function of
//! (seed, index): each index gets its own PCG stream and all draws are
//! integer rejection sampling, so outputs are identical across platforms.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;
use thiserror::Error;

use crate::instance::{Instance, LayerSpec};
use crate::sofaclap::{CableType, GraphLayer, LayerGraph, Point};

/// An exact nonnegative rational, parsed from decimal notation. Keeping
/// factors rational makes `floor(n / f)` exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0);
        Self { num, den }
    }

    /// Parses `"2"`, `"1.7"`, `"1.15"` and the like, exactly.
    pub fn parse_decimal(text: &str) -> Option<Self> {
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 9
        {
            return None;
        }
        let den = 10u64.pow(frac_part.len() as u32);
        let int: u64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
        let frac: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
        Some(Self { num: int.checked_mul(den)?.checked_add(frac)?, den })
    }

    /// `floor(value / self)`, exact in integers.
    pub fn div_floor(self, value: u64) -> u64 {
        ((value as u128 * self.den as u128) / self.num as u128) as u64
    }

    fn at_least_one(self) -> bool {
        self.num >= self.den
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Parameters of one generated family.
#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub lambda: usize,
    /// Inclusive range for the number of sources.
    pub sources: (u64, u64),
    /// Inclusive range for the shrink factor between adjacent layers.
    pub factor: (Ratio, Ratio),
    pub seed: u64,
    pub count: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("instance {index}: layer sizes kept collapsing to zero; factors too large")]
    Degenerate { index: u64 },
}

impl GenParams {
    fn validate(&self) -> Result<(), GenError> {
        if self.lambda == 0 {
            return Err(GenError::InvalidParams("lambda must be at least 1".into()));
        }
        if self.sources.0 < 1 || self.sources.0 > self.sources.1 {
            return Err(GenError::InvalidParams("empty source range".into()));
        }
        if !self.factor.0.at_least_one() {
            return Err(GenError::InvalidParams("factors below 1 grow layers".into()));
        }
        let (lo, hi) = (self.factor.0, self.factor.1);
        if (lo.num as u128) * (hi.den as u128) > (hi.num as u128) * (lo.den as u128) {
            return Err(GenError::InvalidParams("empty factor range".into()));
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn stream(seed: u64, index: u64) -> Pcg64Mcg {
    Pcg64Mcg::seed_from_u64(splitmix64(seed ^ splitmix64(index.wrapping_add(1))))
}

/// Uniform draw from `lo..=hi` by rejection; bias-free.
fn uniform(rng: &mut Pcg64Mcg, lo: u64, hi: u64) -> u64 {
    debug_assert!(lo <= hi);
    let span = hi - lo + 1;
    if span == 0 {
        // the full u64 range
        return rng.next_u64();
    }
    let cap = (u64::MAX / span) * span;
    loop {
        let x = rng.next_u64();
        if x < cap {
            return lo + x % span;
        }
    }
}

/// Uniform in `[0, 1)` from the top 53 bits.
fn unit(rng: &mut Pcg64Mcg) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn draw_instance(params: &GenParams, rng: &mut Pcg64Mcg) -> Option<Instance> {
    let n0 = uniform(rng, params.sources.0, params.sources.1);
    let mut counts = Vec::with_capacity(params.lambda);
    let mut prev = n0;
    for _ in 0..params.lambda {
        let lo = params.factor.1.div_floor(prev);
        let hi = params.factor.0.div_floor(prev);
        let n_i = uniform(rng, lo, hi);
        if n_i == 0 {
            return None;
        }
        counts.push(n_i);
        prev = n_i;
    }
    let mut layers = Vec::with_capacity(params.lambda);
    for &n_i in &counts {
        let base = n0.div_ceil(n_i);
        let cap_hi = uniform(rng, base, 2 * base);
        let cap_lo = uniform(rng, 0, 2 * cap_hi / 3).min(n0);
        layers.push(LayerSpec::new(n_i, cap_lo, cap_hi));
    }
    Some(Instance::new(n0, layers).expect("drawn instances are well formed"))
}

/// The instance at `index` of the family; identical for identical
/// `(seed, index)`. Zero-size layer draws redraw the whole instance, with
/// a retry cap.
pub fn generate_instance(params: &GenParams, index: u64) -> Result<Instance, GenError> {
    params.validate()?;
    let mut rng = stream(params.seed, index);
    for _ in 0..64 {
        if let Some(inst) = draw_instance(params, &mut rng) {
            return Ok(inst);
        }
    }
    Err(GenError::Degenerate { index })
}

/// Capacity skeleton plus geometry: positions drawn uniformly in a square
/// sized to the source count, and a cable catalog derived from the
/// capacity ladder with square-root cost growth. The geometry model is
/// this toolkit's own; only the capacity skeleton follows the CLT family.
pub fn generate_geometric(params: &GenParams, index: u64) -> Result<LayerGraph, GenError> {
    params.validate()?;
    let mut rng = stream(params.seed, index);
    let inst = loop {
        if let Some(inst) = draw_instance(params, &mut rng) {
            break inst;
        }
    };
    let side = (inst.sources() as f64).sqrt() * 10.0;
    let point = |rng: &mut Pcg64Mcg| Point(unit(rng) * side, unit(rng) * side);
    let sources: Vec<Point> = (0..inst.sources()).map(|_| point(&mut rng)).collect();
    let layers: Vec<GraphLayer> = (1..=inst.lambda())
        .map(|i| GraphLayer {
            cap_lo: inst.cap_lo(i),
            cap_hi: inst.cap_hi(i),
            positions: (0..inst.count(i)).map(|_| point(&mut rng)).collect(),
        })
        .collect();
    let mut loads: Vec<u64> = (1..=inst.lambda()).map(|i| inst.cap_hi(i)).collect();
    loads.push(inst.sources());
    loads.sort_unstable();
    loads.dedup();
    let cables: Vec<CableType> = loads
        .into_iter()
        .map(|load| CableType { max_load: load, cost_per_unit: (load as f64).sqrt() })
        .collect();
    Ok(LayerGraph::new(sources, layers, cables).expect("generated graphs are well formed"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: usize, sources: (u64, u64), f: (u64, u64, u64, u64), seed: u64) -> GenParams {
        GenParams {
            lambda,
            sources,
            factor: (Ratio::new(f.0, f.1), Ratio::new(f.2, f.3)),
            seed,
            count: 1,
        }
    }

    #[test]
    fn ratio_parses_decimals_exactly() {
        assert_eq!(Ratio::parse_decimal("2"), Some(Ratio::new(2, 1)));
        assert_eq!(Ratio::parse_decimal("1.7"), Some(Ratio::new(17, 10)));
        assert_eq!(Ratio::parse_decimal("1.15"), Some(Ratio::new(115, 100)));
        assert_eq!(Ratio::parse_decimal("x"), None);
        assert_eq!(Ratio::parse_decimal("1.7.0"), None);
    }

    #[test]
    fn ratio_floor_division() {
        assert_eq!(Ratio::new(2, 1).div_floor(10), 5);
        assert_eq!(Ratio::new(17, 10).div_floor(10), 5);
        assert_eq!(Ratio::new(23, 10).div_floor(10), 4);
    }

    #[test]
    fn draws_stay_in_declared_intervals() {
        let p = params(2, (10, 10), (2, 1, 2, 1), 7);
        for index in 0..1000 {
            let inst = generate_instance(&p, index).unwrap();
            assert_eq!(inst.sources(), 10);
            assert_eq!(inst.count(1), 5);
            assert_eq!(inst.count(2), 2);
            let u1 = inst.cap_hi(1);
            assert!((2..=4).contains(&u1), "u1 = {u1}");
            let u2 = inst.cap_hi(2);
            assert!((5..=10).contains(&u2), "u2 = {u2}");
            for i in 1..=2 {
                assert!(inst.cap_lo(i) <= 2 * inst.cap_hi(i) / 3);
                assert!(inst.cap_lo(i) <= inst.sources());
            }
        }
    }

    #[test]
    fn same_seed_and_index_reproduce() {
        let p = params(4, (50, 200), (17, 10, 23, 10), 99);
        for index in [0, 1, 17] {
            assert_eq!(
                generate_instance(&p, index).unwrap(),
                generate_instance(&p, index).unwrap()
            );
        }
        assert_ne!(
            generate_instance(&p, 0).unwrap(),
            generate_instance(&p, 1).unwrap()
        );
    }

    #[test]
    fn upper_capacity_draws_look_uniform() {
        // u_1 ranges over {2, 3, 4}; each bucket expects 10000/3 with
        // sigma = sqrt(n p (1-p)) ~ 47; demand 5 sigma
        let p = params(2, (10, 10), (2, 1, 2, 1), 1234);
        let mut buckets = [0u64; 3];
        for index in 0..10_000 {
            let inst = generate_instance(&p, index).unwrap();
            buckets[(inst.cap_hi(1) - 2) as usize] += 1;
        }
        for &b in &buckets {
            let dev = (b as f64 - 10_000.0 / 3.0).abs();
            assert!(dev < 5.0 * 47.2, "bucket count {b} deviates too far");
        }
    }

    #[test]
    fn rejects_bad_params() {
        let bad = params(2, (10, 5), (2, 1, 2, 1), 0);
        assert!(matches!(generate_instance(&bad, 0), Err(GenError::InvalidParams(_))));
        let below_one = params(2, (5, 10), (1, 2, 2, 1), 0);
        assert!(matches!(generate_instance(&below_one, 0), Err(GenError::InvalidParams(_))));
    }

    #[test]
    fn reports_degenerate_factor_regimes() {
        // factor far above the layer size forces n_i = 0 every draw
        let p = params(3, (2, 2), (1000, 1, 1000, 1), 5);
        assert_eq!(generate_instance(&p, 0), Err(GenError::Degenerate { index: 0 }));
    }

    #[test]
    fn geometric_instances_are_reproducible_and_consistent() {
        let p = params(3, (20, 40), (17, 10, 23, 10), 42);
        let g1 = generate_geometric(&p, 3).unwrap();
        let g2 = generate_geometric(&p, 3).unwrap();
        assert_eq!(g1, g2);
        let inst = g1.capacity_instance();
        assert_eq!(inst.sources() as usize, g1.sources().len());
        for (i, layer) in g1.layers().iter().enumerate() {
            assert_eq!(inst.count(i + 1) as usize, layer.positions.len());
        }
        assert!(g1.cables().last().unwrap().max_load >= inst.sources());
    }
}
