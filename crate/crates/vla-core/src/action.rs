//! Embodiments and the continuous vectors they exchange with the codec:
//! per-step action deltas and proprioceptive state readouts.

use serde::{Deserialize, Serialize};

use crate::vocab::BinSpec;

/// The three robot bodies the testbed supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Embodiment {
    /// One arm on a fixed base: action dims (dx, dy, dz, grip).
    SingleArm,
    /// Two arms on a fixed base: action dims per arm, left then right.
    Bimanual,
    /// Two arms on a driveable base; manipulation dims match [`Embodiment::Bimanual`].
    MobileBimanual,
}

impl Embodiment {
    /// Manipulation action dimensionality: 4 per arm (dx, dy, dz, grip).
    pub fn manip_dims(self) -> usize {
        match self {
            Embodiment::SingleArm => 4,
            Embodiment::Bimanual | Embodiment::MobileBimanual => 8,
        }
    }

    /// Proprioception dimensionality: per-gripper (x, y, z, aperture),
    /// plus (base x, base y, heading) for mobile bodies.
    pub fn proprio_dims(self) -> usize {
        match self {
            Embodiment::SingleArm => 4,
            Embodiment::Bimanual => 8,
            Embodiment::MobileBimanual => 11,
        }
    }

    pub fn arm_count(self) -> usize {
        match self {
            Embodiment::SingleArm => 1,
            Embodiment::Bimanual | Embodiment::MobileBimanual => 2,
        }
    }

    pub fn has_base(self) -> bool {
        matches!(self, Embodiment::MobileBimanual)
    }

    pub fn name(self) -> &'static str {
        match self {
            Embodiment::SingleArm => "single_arm",
            Embodiment::Bimanual => "bimanual",
            Embodiment::MobileBimanual => "mobile_bimanual",
        }
    }
}

/// One timestep of manipulation deltas. Gripper dims carry the open/close
/// command as a real in [-1, 1]; at execution, >= 0 means close.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionVector {
    pub embodiment: Embodiment,
    pub values: Vec<f64>,
}

impl ActionVector {
    /// Builds an action vector, checking the dimension contract.
    pub fn new(embodiment: Embodiment, values: Vec<f64>) -> Result<Self, DimensionError> {
        if values.len() != embodiment.manip_dims() {
            return Err(DimensionError {
                what: "action",
                expected: embodiment.manip_dims(),
                got: values.len(),
            });
        }
        Ok(Self { embodiment, values })
    }

    /// All-zero action (midpoint of every symmetric dimension).
    pub fn zeros(embodiment: Embodiment) -> Self {
        Self {
            embodiment,
            values: vec![0.0; embodiment.manip_dims()],
        }
    }
}

/// The robot's own state as the policy sees it: gripper positions in the
/// base frame plus apertures, and base pose (x, y, heading) when mobile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProprioState {
    pub embodiment: Embodiment,
    pub values: Vec<f64>,
}

impl ProprioState {
    pub fn new(embodiment: Embodiment, values: Vec<f64>) -> Result<Self, DimensionError> {
        if values.len() != embodiment.proprio_dims() {
            return Err(DimensionError {
                what: "proprio",
                expected: embodiment.proprio_dims(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DimensionError {
                what: "proprio (non-finite value)",
                expected: embodiment.proprio_dims(),
                got: values.len(),
            });
        }
        Ok(Self { embodiment, values })
    }

    pub fn zeros(embodiment: Embodiment) -> Self {
        Self {
            embodiment,
            values: vec![0.0; embodiment.proprio_dims()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{what} dimension mismatch: expected {expected}, got {got}")]
pub struct DimensionError {
    pub what: &'static str,
    pub expected: usize,
    pub got: usize,
}

/// Bin specs for manipulation actions: every dim is a delta in [-1, 1].
pub fn manip_bin_specs(embodiment: Embodiment, n_bins: usize) -> Vec<BinSpec> {
    vec![BinSpec::new(-1.0, 1.0, n_bins).expect("fixed manip range"); embodiment.manip_dims()]
}

/// Bin specs for proprioception. Grippers report base-frame position and
/// aperture; mobile bodies append world base pose.
pub fn proprio_bin_specs(embodiment: Embodiment, n_bins: usize) -> Vec<BinSpec> {
    let pos = BinSpec::new(-8.0, 8.0, n_bins).expect("fixed proprio range");
    let z = BinSpec::new(0.0, 4.0, n_bins).expect("fixed proprio range");
    let aperture = BinSpec::new(0.0, 1.0, n_bins).expect("fixed proprio range");
    let mut specs = Vec::with_capacity(embodiment.proprio_dims());
    for _ in 0..embodiment.arm_count() {
        specs.extend([pos.clone(), pos.clone(), z.clone(), aperture.clone()]);
    }
    if embodiment.has_base() {
        let base_xy = BinSpec::new(0.0, 16.0, n_bins).expect("fixed proprio range");
        let heading = BinSpec::new(-std::f64::consts::PI, std::f64::consts::PI, n_bins)
            .expect("fixed proprio range");
        specs.extend([base_xy.clone(), base_xy, heading]);
    }
    specs
}
