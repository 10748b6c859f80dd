//! Structured coalescent for three populations with two divergence events,
//! and stepwise mutation of microsatellite repeat counts along the tree.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SeedSpec;
use crate::stats::{MicrosatDataset, Statistic, N_POPULATIONS};

/// Which population the third one split from at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Pop3FromPop1,
    Pop3FromPop2,
}

impl Topology {
    fn source(self) -> usize {
        match self {
            Topology::Pop3FromPop1 => 0,
            Topology::Pop3FromPop2 => 1,
        }
    }
}

/// Demography shared by all loci. Times are in generations before present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopGenConfig {
    /// Effective diploid size of every population.
    #[serde(rename = "Ne")]
    pub ne: f64,
    /// First (older) divergence, between populations 1 and 2.
    pub t_prime: f64,
    /// Second divergence, population 3 from its source.
    pub t: f64,
    pub n_diploid: usize,
    pub n_loci: usize,
    pub topology: Topology,
}

impl PopGenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t < self.t_prime && self.t_prime.is_finite()) {
            return Err(Error::domain(format!(
                "divergence times need 0 < t < t_prime, got t={} t_prime={}",
                self.t, self.t_prime
            )));
        }
        if !(self.ne >= 1.0 && self.ne.is_finite()) {
            return Err(Error::domain(format!("Ne must be >= 1, got {}", self.ne)));
        }
        if self.n_diploid == 0 || self.n_loci == 0 {
            return Err(Error::domain("n_diploid and n_loci must be positive"));
        }
        Ok(())
    }

    pub fn copies_per_pop(&self) -> usize {
        2 * self.n_diploid
    }

    pub fn n_leaves(&self) -> usize {
        N_POPULATIONS * self.copies_per_pop()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenNode {
    /// Generations before present.
    pub time: f64,
    pub parent: Option<usize>,
}

/// Binary genealogy. Nodes `0..n_leaves` are the sampled copies, ordered
/// population by population; internal nodes follow in order of creation, so
/// every parent index exceeds its children's and the root is last.
#[derive(Debug, Clone, PartialEq)]
pub struct Genealogy {
    pub nodes: Vec<GenNode>,
    pub leaf_population: Vec<u8>,
}

impl Genealogy {
    pub fn n_leaves(&self) -> usize {
        self.leaf_population.len()
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `(child, parent, length)` for every branch.
    pub fn branches(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.map(|p| (i, p, self.nodes[p].time - n.time)))
    }

    pub fn total_branch_length(&self) -> f64 {
        self.branches().map(|(_, _, len)| len).sum()
    }

    /// Time of the most recent common ancestor of two nodes.
    pub fn coalescence_time(&self, a: usize, b: usize) -> f64 {
        let mut ancestors = Vec::new();
        let mut cur = Some(a);
        while let Some(i) = cur {
            ancestors.push(i);
            cur = self.nodes[i].parent;
        }
        let mut cur = Some(b);
        while let Some(i) = cur {
            if ancestors.contains(&i) {
                return self.nodes[i].time;
            }
            cur = self.nodes[i].parent;
        }
        unreachable!("genealogy has a single root")
    }
}

pub fn simulate_genealogy(cfg: &PopGenConfig, seed: SeedSpec) -> Result<Genealogy> {
    cfg.validate()?;
    Ok(genealogy_with(cfg, &mut seed.rng()))
}

/// Kingman coalescence within `lineages` from `start` until `end` or a single
/// lineage remains; each pair merges at rate `1 / (2 Ne)`.
fn coalesce_epoch<R: Rng + ?Sized>(
    lineages: &mut Vec<usize>,
    nodes: &mut Vec<GenNode>,
    start: f64,
    end: f64,
    two_ne: f64,
    rng: &mut R,
) {
    let mut now = start;
    while lineages.len() >= 2 {
        let k = lineages.len() as f64;
        let rate = 0.5 * k * (k - 1.0) / two_ne;
        let wait: f64 = Exp1.sample(rng);
        now += wait / rate;
        if now >= end {
            break;
        }
        let a = lineages.swap_remove(rng.random_range(0..lineages.len()));
        let b = lineages.swap_remove(rng.random_range(0..lineages.len()));
        let id = nodes.len();
        nodes.push(GenNode { time: now, parent: None });
        nodes[a].parent = Some(id);
        nodes[b].parent = Some(id);
        lineages.push(id);
    }
}

pub(crate) fn genealogy_with<R: Rng + ?Sized>(cfg: &PopGenConfig, rng: &mut R) -> Genealogy {
    let copies = cfg.copies_per_pop();
    let n_leaves = cfg.n_leaves();
    let two_ne = 2.0 * cfg.ne;
    let mut nodes: Vec<GenNode> = Vec::with_capacity(2 * n_leaves - 1);
    nodes.extend((0..n_leaves).map(|_| GenNode { time: 0.0, parent: None }));
    let leaf_population = (0..n_leaves).map(|i| (i / copies + 1) as u8).collect();

    let mut pops: Vec<Vec<usize>> = (0..N_POPULATIONS).map(|p| (p * copies..(p + 1) * copies).collect()).collect();
    for pop in pops.iter_mut() {
        coalesce_epoch(pop, &mut nodes, 0.0, cfg.t, two_ne, rng);
    }
    let third = pops.pop().expect("three populations");
    pops[cfg.topology.source()].extend(third);
    for pop in pops.iter_mut() {
        coalesce_epoch(pop, &mut nodes, cfg.t, cfg.t_prime, two_ne, rng);
    }
    let mut ancestral = pops.concat();
    coalesce_epoch(&mut ancestral, &mut nodes, cfg.t_prime, f64::INFINITY, two_ne, rng);
    debug_assert_eq!(nodes.len(), 2 * n_leaves - 1);

    Genealogy { nodes, leaf_population }
}

/// Stepwise mutation: root size 0, Poisson(θ ℓ) mutations on a branch of
/// length ℓ, each ±1 with equal probability. Returns leaf allele sizes.
pub fn drop_mutations(genealogy: &Genealogy, theta: f64, seed: SeedSpec) -> Result<Vec<i32>> {
    mutations_with(genealogy, theta, &mut seed.rng())
}

pub(crate) fn mutations_with<R: Rng + ?Sized>(genealogy: &Genealogy, theta: f64, rng: &mut R) -> Result<Vec<i32>> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!("mutation rate must be non-negative, got {theta}")));
    }
    let nodes = &genealogy.nodes;
    let mut size = vec![0i32; nodes.len()];
    for i in (0..nodes.len()).rev() {
        let Some(p) = nodes[i].parent else { continue };
        let mean = theta * (nodes[p].time - nodes[i].time);
        let mut s = size[p];
        if mean > 0.0 {
            let count: f64 = Poisson::new(mean).map_err(|e| Error::domain(e.to_string()))?.sample(rng);
            for _ in 0..count as u64 {
                s += if rng.random::<bool>() { 1 } else { -1 };
            }
        }
        size[i] = s;
    }
    size.truncate(genealogy.n_leaves());
    Ok(size)
}

/// Three-population divergence model; the only parameter is the
/// per-generation mutation rate, with a uniform prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopGenModel {
    pub config: PopGenConfig,
    pub prior_lo: f64,
    pub prior_hi: f64,
}

impl PopGenModel {
    pub fn new(config: PopGenConfig, prior_lo: f64, prior_hi: f64) -> Result<Self> {
        config.validate()?;
        if !(prior_lo > 0.0 && prior_lo < prior_hi && prior_hi.is_finite()) {
            return Err(Error::domain(format!(
                "mutation-rate prior needs 0 < lo < hi, got [{prior_lo}, {prior_hi}]"
            )));
        }
        Ok(Self {
            config,
            prior_lo,
            prior_hi,
        })
    }

    pub(crate) fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(self.prior_lo..self.prior_hi)
    }

    /// `n_loci` independent loci sharing the mutation rate.
    pub(crate) fn simulate<R: Rng + ?Sized>(&self, theta: f64, n_loci: usize, rng: &mut R) -> Result<MicrosatDataset> {
        let mut sizes = Vec::with_capacity(n_loci * self.config.n_leaves());
        for _ in 0..n_loci {
            let g = genealogy_with(&self.config, rng);
            sizes.extend(mutations_with(&g, theta, rng)?);
        }
        MicrosatDataset::new(n_loci, self.config.copies_per_pop(), sizes)
    }

    pub(crate) fn mean_map(&self, theta: f64, stat: Statistic) -> Option<f64> {
        let (old, young) = (2.0 * theta * self.config.t_prime, 2.0 * theta * self.config.t);
        let pair = match stat {
            Statistic::DeltaMuSq(a, b) => (a.min(b), a.max(b)),
            _ => return None,
        };
        Some(match (pair, self.config.topology) {
            ((1, 2), _) => old,
            ((1, 3), Topology::Pop3FromPop1) | ((2, 3), Topology::Pop3FromPop2) => young,
            ((1, 3), Topology::Pop3FromPop2) | ((2, 3), Topology::Pop3FromPop1) => old,
            _ => return None,
        })
    }
}
