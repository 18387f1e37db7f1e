//! The assembled tiling engine: one space, one planar template, one
//! semi-biorthogonal system per level, and one separated net per level.
//!
//! Construction is deterministic in `(space, template, epsilon, seed)`.
//! All queries on a built engine are pure.

use crate::error::{Error, Result};
use crate::lds;
use crate::planar::TemplateConstants;
use crate::semibeta::{self, SemiBiorthogonalSystem};
use crate::space::SpaceDescriptor;
use crate::voronoi::{DerivedConstants, NetHandle};

/// Frame-bound trials used to certify each system at build time.
const BUILD_FRAME_TRIALS: usize = 2000;

pub struct Tiling {
    pub(crate) space: SpaceDescriptor,
    pub(crate) template: TemplateConstants,
    pub(crate) epsilon: f64,
    pub(crate) seed: u64,
    /// Indexed by level; levels `1..dim` hold systems, level 0 never needs one.
    pub(crate) systems: Vec<Option<SemiBiorthogonalSystem>>,
    /// Indexed by level `0..dim`.
    pub(crate) nets: Vec<NetHandle>,
    pub(crate) constants: DerivedConstants,
}

impl Tiling {
    /// Builds systems for every quotient level and the per-level nets.
    pub fn build(
        space: SpaceDescriptor,
        template: TemplateConstants,
        epsilon: f64,
        seed: u64,
    ) -> Result<Tiling> {
        let systems = build_systems(&space, &template, epsilon, seed)?;
        Self::with_systems(space, template, epsilon, seed, systems)
    }

    /// Assembles the engine from prebuilt systems (e.g. a cache hit).
    pub fn with_systems(
        space: SpaceDescriptor,
        template: TemplateConstants,
        epsilon: f64,
        seed: u64,
        systems: Vec<Option<SemiBiorthogonalSystem>>,
    ) -> Result<Tiling> {
        space.validate()?;
        // Only structural constraints here: the engine operates on any
        // constants in range, and the verifier's corner checks are the
        // place where infeasible templates get flagged.
        if !(template.r > 0.0 && template.r < 1.0 && template.delta > 0.0 && template.delta < 1.0)
        {
            return Err(Error::Config(format!(
                "template needs r, delta in (0,1): r = {}, delta = {}",
                template.r, template.delta
            )));
        }
        if !(epsilon > 0.0 && epsilon < template.delta) {
            return Err(Error::Config(format!(
                "net epsilon must lie in (0, delta): epsilon = {epsilon}, delta = {}",
                template.delta
            )));
        }
        let dim = space.dim;
        if systems.len() != dim {
            return Err(Error::ConstructionFailed(format!(
                "expected {} system slots, got {}",
                dim,
                systems.len()
            )));
        }
        for level in 1..dim {
            if systems[level].is_none() {
                return Err(Error::ConstructionFailed(format!("missing system at level {level}")));
            }
        }
        let mut nets = Vec::with_capacity(dim);
        for level in 0..dim {
            nets.push(NetHandle::for_level(&space, level, template.r)?);
        }
        let delta_eff = template.delta - epsilon;
        let constants = DerivedConstants::from_template(&template, delta_eff);
        Ok(Tiling { space, template, epsilon, seed, systems, nets, constants })
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn template(&self) -> &TemplateConstants {
        &self.template
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Certified frame floor `delta - epsilon`.
    pub fn delta_eff(&self) -> f64 {
        self.template.delta - self.epsilon
    }

    /// Radii derived from the template at the effective frame bound.
    pub fn constants(&self) -> &DerivedConstants {
        &self.constants
    }

    pub fn system(&self, level: usize) -> Option<&SemiBiorthogonalSystem> {
        self.systems.get(level).and_then(|s| s.as_ref())
    }

    pub fn systems(&self) -> impl Iterator<Item = &SemiBiorthogonalSystem> {
        self.systems.iter().filter_map(|s| s.as_ref())
    }

    /// Replaces a level's greedy net with a cached copy, when the level
    /// uses one and the copy reaches at least as far.
    pub fn install_greedy_net(&self, net: crate::voronoi::GreedyNet) {
        if let Some(NetHandle::Greedy(lock)) = self.nets.get(net.level) {
            let mut current = lock.lock().expect("net lock poisoned");
            if net.rho >= current.rho {
                *current = net;
            }
        }
    }

    /// Snapshot of a level's greedy net, if that level uses one.
    pub fn greedy_net_snapshot(&self, level: usize) -> Option<crate::voronoi::GreedyNet> {
        match self.nets.get(level) {
            Some(NetHandle::Greedy(lock)) => Some(lock.lock().expect("net lock poisoned").clone()),
            _ => None,
        }
    }
}

fn build_systems(
    space: &SpaceDescriptor,
    template: &TemplateConstants,
    epsilon: f64,
    seed: u64,
) -> Result<Vec<Option<SemiBiorthogonalSystem>>> {
    let dim = space.dim;
    let mut systems: Vec<Option<SemiBiorthogonalSystem>> = vec![None; dim];
    for level in 1..dim {
        let net = semibeta::sphere_net(space, level, epsilon, lds::mix_seed(seed, level as u64))?;
        let mut sys = semibeta::greedy_system(space, &net, template.delta)?;
        semibeta::frame_bound(
            space,
            &mut sys,
            BUILD_FRAME_TRIALS,
            lds::mix_seed(seed, 0x4652414d45 ^ level as u64),
        )?;
        systems[level] = Some(sys);
    }
    Ok(systems)
}
