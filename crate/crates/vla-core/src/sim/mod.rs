//! Deterministic 2.5D mobile-manipulation micro-simulator.
//!
//! Planar base pose plus per-gripper (x, y, z) and a binary aperture; no
//! dynamics, no collision. Objects live in the world frame, grippers in the
//! base frame. Held objects move rigidly with their gripper. Every random
//! draw happens at reset time from a seeded stream, so a `(task, dr, seed,
//! action sequence)` tuple produces a bit-identical state trace on every run.

mod expert;
mod render;
mod scene;

pub use expert::scripted_expert;
pub use render::{render_views, FIXTURE_REMAP_POOL};
pub use scene::{single_arm_task_names, task_by_name, task_catalogue, vocabulary_words};

use serde::{Deserialize, Serialize};

use crate::action::Embodiment;
use crate::config::{DrConfig, NavConfig, SimConfig};
use crate::hybrid::{HybridStep, MoveDirection};

/// Maximum gripper height, world units.
pub const Z_MAX: f64 = 3.0;
/// Both grippers must be this close (xy) to a two-hand object to lift it.
pub const POT_GRIP_EPS: f64 = 0.8;
/// Hinges stop opening past this travel.
pub const HINGE_MAX: f64 = 1.2;
/// Stacking height added when an object is placed on another.
pub const STACK_DZ: f64 = 0.3;
/// Mobile navigation success zone radius around the task waypoint.
pub const NAV_ZONE: f64 = 1.0;

/// Symbolic palette cell ids used by the renderer.
pub mod palette {
    pub const BACKGROUND: u8 = 0;
    pub const TABLE: u8 = 1;
    pub const DRAWER: u8 = 2;
    pub const PAD: u8 = 3;
    pub const BASE: u8 = 4;
    pub const GRIPPER_OPEN: u8 = 5;
    pub const GRIPPER_CLOSED: u8 = 6;
    pub const BOWL: u8 = 7;
    pub const BOTTLE: u8 = 8;
    pub const VEGETABLE: u8 = 9;
    pub const CONTAINER: u8 = 10;
    pub const CAN: u8 = 11;
    pub const BELL: u8 = 12;
    pub const LAPTOP: u8 = 13;
    pub const POT: u8 = 14;
    pub const DISTRACTOR: u8 = 15;
    pub const COUNT: usize = 16;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectClass {
    Bowl,
    Bottle,
    Vegetable,
    Container,
    Can,
    Pad,
    Bell,
    Laptop,
    Pot,
    StorageBox,
    Drawer,
    Distractor,
}

impl ObjectClass {
    pub fn palette_id(self) -> u8 {
        match self {
            ObjectClass::Bowl => palette::BOWL,
            ObjectClass::Bottle => palette::BOTTLE,
            ObjectClass::Vegetable => palette::VEGETABLE,
            ObjectClass::Container | ObjectClass::StorageBox => palette::CONTAINER,
            ObjectClass::Can => palette::CAN,
            ObjectClass::Pad => palette::PAD,
            ObjectClass::Bell => palette::BELL,
            ObjectClass::Laptop => palette::LAPTOP,
            ObjectClass::Pot => palette::POT,
            ObjectClass::Drawer => palette::DRAWER,
            ObjectClass::Distractor => palette::DISTRACTOR,
        }
    }

    /// Classes a single gripper can pick up.
    pub fn graspable(self) -> bool {
        matches!(
            self,
            ObjectClass::Bowl
                | ObjectClass::Bottle
                | ObjectClass::Vegetable
                | ObjectClass::Can
                | ObjectClass::Distractor
        )
    }

    /// Classes that accept a released object as support.
    pub fn placement_target(self) -> bool {
        matches!(
            self,
            ObjectClass::Bowl | ObjectClass::Container | ObjectClass::StorageBox | ObjectClass::Pad
        )
    }

    pub fn pressable(self) -> bool {
        matches!(self, ObjectClass::Bell)
    }

    pub fn hinged(self) -> bool {
        matches!(self, ObjectClass::Laptop | ObjectClass::Drawer)
    }
}

/// What an object rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    Floor,
    Table,
    /// Carried by the gripper with this index.
    Held(usize),
    /// Resting on another object (index into the object list).
    On(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub name: String,
    pub class: ObjectClass,
    /// World-frame position.
    pub pos: [f64; 3],
    pub support: Support,
    /// Toppleables: false until placed down by a release.
    pub upright: bool,
    pub pressed: bool,
    /// Hinge travel so far, for hinged classes.
    pub open_amount: f64,
    /// Hinged classes: (closed handle xy, unit pull axis).
    pub hinge: Option<Hinge>,
    pub distractor: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hinge {
    pub anchor: [f64; 2],
    pub axis: [f64; 2],
    pub handle_z: f64,
}

impl SceneObject {
    pub fn handle_pos(&self) -> Option<[f64; 3]> {
        self.hinge.map(|h| {
            [
                h.anchor[0] + h.axis[0] * self.open_amount,
                h.anchor[1] + h.axis[1] * self.open_amount,
                h.handle_z,
            ]
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gripper {
    /// Mount point in the base frame.
    pub shoulder: [f64; 2],
    /// Position in the base frame.
    pub pos: [f64; 3],
    pub closed: bool,
    pub held: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Axis-aligned table surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub z: f64,
}

impl TableRect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

/// Full privileged simulator state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub t: usize,
    pub embodiment: Embodiment,
    pub base: BasePose,
    pub grippers: Vec<Gripper>,
    pub objects: Vec<SceneObject>,
    pub table: TableRect,
    pub arena_size: f64,
    /// Mobile tasks: world-frame navigation waypoint.
    pub nav_goal: Option<[f64; 2]>,
    /// Render-time remap of fixture palette ids (identity when DR is off).
    pub fixture_remap: [u8; 4],
    /// Seed of the reset stream that produced this state.
    pub stream_seed: u64,
}

/// Success predicates, one per task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Predicate {
    ClickBell,
    StackBowls,
    PlaceVegetable,
    RestoreBottle,
    MoveCan,
    OpenLaptop,
    LiftPot,
    PackBottles,
    MoveFetchBottle,
    MoveOpenDrawer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub embodiment: Embodiment,
    pub instruction: Vec<String>,
    pub mobile: bool,
    pub predicate: Predicate,
    pub horizon: usize,
}

/// Events raised while applying one step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepEvents {
    pub grasped: Vec<usize>,
    pub released: Vec<usize>,
    pub pressed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("motion step on fixed-base embodiment {0:?}")]
    MotionOnFixedBase(Embodiment),
    #[error("step embodiment {got:?} does not match world embodiment {world:?}")]
    EmbodimentMismatch { world: Embodiment, got: Embodiment },
    #[error("no solvable reset for task {task:?} within {attempts} attempts (dr enabled: {dr})")]
    UnsolvableReset {
        task: String,
        attempts: usize,
        dr: bool,
    },
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("unknown object {0:?}")]
    UnknownObject(String),
}

pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    } else if a <= -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}

impl WorldState {
    /// World-frame position of a gripper.
    pub fn gripper_world(&self, gi: usize) -> [f64; 3] {
        let g = &self.grippers[gi];
        let (s, c) = self.base.theta.sin_cos();
        [
            self.base.x + c * g.pos[0] - s * g.pos[1],
            self.base.y + s * g.pos[0] + c * g.pos[1],
            g.pos[2],
        ]
    }

    /// Maps a world point into the base frame.
    pub fn world_to_base(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.base.theta.sin_cos();
        let dx = p[0] - self.base.x;
        let dy = p[1] - self.base.y;
        [c * dx + s * dy, -s * dx + c * dy]
    }

    pub fn object_index(&self, name: &str) -> Result<usize, SimError> {
        self.objects
            .iter()
            .position(|o| o.name == name)
            .ok_or_else(|| SimError::UnknownObject(name.to_string()))
    }

    pub fn object(&self, name: &str) -> Result<&SceneObject, SimError> {
        Ok(&self.objects[self.object_index(name)?])
    }

    /// The robot's proprioceptive readout: per-gripper base-frame position
    /// and aperture, plus base pose when mobile.
    pub fn proprio(&self) -> crate::action::ProprioState {
        let mut values = Vec::with_capacity(self.embodiment.proprio_dims());
        for g in &self.grippers {
            values.extend([g.pos[0], g.pos[1], g.pos[2], if g.closed { 1.0 } else { 0.0 }]);
        }
        if self.embodiment.has_base() {
            values.extend([self.base.x, self.base.y, self.base.theta]);
        }
        crate::action::ProprioState::new(self.embodiment, values)
            .expect("state dims always match embodiment")
    }

    fn clamp_xy(&self, v: f64) -> f64 {
        v.clamp(0.0, self.arena_size)
    }

    /// True when both grippers are closed on the two-hand object.
    pub fn two_hand_gripped(&self, oi: usize) -> bool {
        if self.grippers.len() < 2 {
            return false;
        }
        let o = &self.objects[oi];
        self.grippers.iter().enumerate().all(|(gi, g)| {
            let gw = self.gripper_world(gi);
            let dx = gw[0] - o.pos[0];
            let dy = gw[1] - o.pos[1];
            g.closed && (dx * dx + dy * dy).sqrt() <= POT_GRIP_EPS
        })
    }
}

/// Applies one hybrid step. Forward translates the base along its heading,
/// turns rotate it, and stop applies manipulation deltas to the grippers:
/// a closing gripper grasps the nearest graspable object within `grasp_eps`
/// (and presses any pressable there), an opening gripper releases what it
/// holds onto the nearest placement target or the table. All motion clips to
/// the arena; `t` advances by one.
pub fn step(
    world: &mut WorldState,
    action: &HybridStep,
    cfg: &SimConfig,
    nav: &NavConfig,
) -> Result<StepEvents, SimError> {
    match action {
        HybridStep::Move { direction, value } => {
            if !world.embodiment.has_base() {
                return Err(SimError::MotionOnFixedBase(world.embodiment));
            }
            apply_base_motion(world, *direction, *value, nav);
            settle_world(world, StepEvents::default())
        }
        HybridStep::Manip(act) => {
            if act.embodiment != world.embodiment {
                return Err(SimError::EmbodimentMismatch {
                    world: world.embodiment,
                    got: act.embodiment,
                });
            }
            let events = apply_manipulation(world, &act.values, cfg);
            settle_world(world, events)
        }
    }
}

/// Value-only ablation transition: base translation, rotation, and
/// manipulation deltas applied in one step.
pub fn step_flat(
    world: &mut WorldState,
    flat: &crate::hybrid::FlatStep,
    cfg: &SimConfig,
    nav: &NavConfig,
) -> Result<StepEvents, SimError> {
    if !world.embodiment.has_base() {
        return Err(SimError::MotionOnFixedBase(world.embodiment));
    }
    if flat.manip.embodiment != world.embodiment {
        return Err(SimError::EmbodimentMismatch {
            world: world.embodiment,
            got: flat.manip.embodiment,
        });
    }
    apply_base_motion(world, MoveDirection::TurnLeft, flat.base_dtheta, nav);
    apply_base_motion(world, MoveDirection::Forward, flat.base_dx, nav);
    let events = apply_manipulation(world, &flat.manip.values, cfg);
    settle_world(world, events)
}

fn apply_base_motion(world: &mut WorldState, direction: MoveDirection, value: f64, nav: &NavConfig) {
    match direction {
        MoveDirection::Forward => {
            // Negative flat-step values drive backwards; the hybrid grammar
            // only ever encodes [0, d_max].
            let d = value.clamp(-nav.d_max, nav.d_max);
            let (s, c) = world.base.theta.sin_cos();
            world.base.x = world.clamp_xy(world.base.x + d * c);
            world.base.y = world.clamp_xy(world.base.y + d * s);
        }
        MoveDirection::TurnLeft => {
            let a = value.clamp(-nav.theta_max, nav.theta_max);
            world.base.theta = wrap_angle(world.base.theta + a);
        }
        MoveDirection::TurnRight => {
            let a = value.clamp(-nav.theta_max, nav.theta_max);
            world.base.theta = wrap_angle(world.base.theta - a);
        }
    }
}

fn apply_manipulation(world: &mut WorldState, values: &[f64], cfg: &SimConfig) -> StepEvents {
    let mut events = StepEvents::default();
    let reach = if world.embodiment.has_base() {
        cfg.reach_mobile
    } else {
        cfg.reach_fixed
    };
    let arms = world.grippers.len();
    for gi in 0..arms {
        let dims = &values[gi * 4..gi * 4 + 4];
        let old_world = world.gripper_world(gi);
        let was_closed = world.grippers[gi].closed;

        // Translate in the base frame, clamped per axis to one unit.
        {
            let g = &mut world.grippers[gi];
            g.pos[0] += dims[0].clamp(-1.0, 1.0);
            g.pos[1] += dims[1].clamp(-1.0, 1.0);
            g.pos[2] = (g.pos[2] + dims[2].clamp(-1.0, 1.0)).clamp(0.0, Z_MAX);
            // Reach limit around the shoulder.
            let rx = g.pos[0] - g.shoulder[0];
            let ry = g.pos[1] - g.shoulder[1];
            let r = (rx * rx + ry * ry).sqrt();
            if r > reach {
                let scale = reach / r;
                g.pos[0] = g.shoulder[0] + rx * scale;
                g.pos[1] = g.shoulder[1] + ry * scale;
            }
        }
        // Arena clip in the world frame.
        let gw = world.gripper_world(gi);
        let clipped = [world.clamp_xy(gw[0]), world.clamp_xy(gw[1])];
        if clipped != [gw[0], gw[1]] {
            let back = world.world_to_base([clipped[0], clipped[1]]);
            world.grippers[gi].pos[0] = back[0];
            world.grippers[gi].pos[1] = back[1];
        }
        let new_world = world.gripper_world(gi);

        // Hinge pulls: a gripper that stays closed and started at the handle
        // drags the hinge along its axis.
        if was_closed && dims[3] >= 0.0 {
            for oi in 0..world.objects.len() {
                if !world.objects[oi].class.hinged() {
                    continue;
                }
                let Some(handle) = world.objects[oi].handle_pos() else {
                    continue;
                };
                if dist3(old_world, handle) <= cfg.grasp_eps {
                    let axis = world.objects[oi].hinge.unwrap().axis;
                    let proj = (new_world[0] - old_world[0]) * axis[0]
                        + (new_world[1] - old_world[1]) * axis[1];
                    if proj > 0.0 {
                        let o = &mut world.objects[oi];
                        o.open_amount = (o.open_amount + proj).min(HINGE_MAX);
                    }
                }
            }
        }

        let cmd_close = dims[3] >= 0.0;
        if cmd_close && !was_closed {
            world.grippers[gi].closed = true;
            // Press every pressable within reach of the closing gripper.
            for oi in 0..world.objects.len() {
                if world.objects[oi].class.pressable()
                    && dist3(new_world, world.objects[oi].pos) <= cfg.grasp_eps
                    && !world.objects[oi].pressed
                {
                    world.objects[oi].pressed = true;
                    events.pressed.push(oi);
                }
            }
            // Grasp the nearest free graspable.
            if world.grippers[gi].held.is_none() {
                let mut best: Option<(usize, f64)> = None;
                for oi in 0..world.objects.len() {
                    let o = &world.objects[oi];
                    if !o.class.graspable() || matches!(o.support, Support::Held(_)) {
                        continue;
                    }
                    let d = dist3(new_world, o.pos);
                    if d <= cfg.grasp_eps && best.map_or(true, |(_, bd)| d < bd) {
                        best = Some((oi, d));
                    }
                }
                if let Some((oi, _)) = best {
                    world.grippers[gi].held = Some(oi);
                    world.objects[oi].support = Support::Held(gi);
                    events.grasped.push(oi);
                }
            }
        } else if !cmd_close && was_closed {
            world.grippers[gi].closed = false;
            if let Some(oi) = world.grippers[gi].held.take() {
                release_object(world, oi, new_world, cfg);
                events.released.push(oi);
            }
        }
    }
    events
}

fn release_object(world: &mut WorldState, oi: usize, at: [f64; 3], cfg: &SimConfig) {
    // Nearest placement target within place_eps takes the object; otherwise
    // it lands on the table or the floor under the release point.
    let mut best: Option<(usize, f64)> = None;
    for ti in 0..world.objects.len() {
        if ti == oi || !world.objects[ti].class.placement_target() {
            continue;
        }
        if matches!(world.objects[ti].support, Support::Held(_)) {
            continue;
        }
        let t = &world.objects[ti];
        let d = ((at[0] - t.pos[0]).powi(2) + (at[1] - t.pos[1]).powi(2)).sqrt();
        if d <= cfg.place_eps && best.map_or(true, |(_, bd)| d < bd) {
            best = Some((ti, d));
        }
    }
    let o_xy = [at[0], at[1]];
    let obj = &mut world.objects[oi];
    obj.pos[0] = o_xy[0];
    obj.pos[1] = o_xy[1];
    obj.upright = true;
    match best {
        Some((ti, _)) => {
            let tz = world.objects[ti].pos[2];
            let obj = &mut world.objects[oi];
            obj.support = Support::On(ti);
            obj.pos[2] = tz + STACK_DZ;
        }
        None if world.table.contains(o_xy[0], o_xy[1]) => {
            obj.support = Support::Table;
            obj.pos[2] = world.table.z;
        }
        None => {
            obj.support = Support::Floor;
            obj.pos[2] = 0.0;
        }
    }
}

/// Post-step bookkeeping shared by all transitions: held objects track their
/// gripper, two-hand objects track the pair of closed grippers, `t` advances.
fn settle_world(world: &mut WorldState, events: StepEvents) -> Result<StepEvents, SimError> {
    for gi in 0..world.grippers.len() {
        if let Some(oi) = world.grippers[gi].held {
            let gw = world.gripper_world(gi);
            world.objects[oi].pos = gw;
            world.objects[oi].support = Support::Held(gi);
        }
    }
    for oi in 0..world.objects.len() {
        if world.objects[oi].class == ObjectClass::Pot {
            if world.two_hand_gripped(oi) {
                let z = (world.grippers.iter().map(|g| g.pos[2]).sum::<f64>()
                    / world.grippers.len() as f64)
                    .max(world.table.z);
                world.objects[oi].pos[2] = z;
            } else {
                world.objects[oi].pos[2] = world.table.z;
            }
        }
    }
    world.t += 1;
    Ok(events)
}

pub fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Pure per-task success predicate.
pub fn success(world: &WorldState, task: &TaskSpec, cfg: &SimConfig) -> bool {
    let by_name = |name: &str| world.objects.iter().position(|o| o.name == name);
    let on = |a: &str, b: &str| -> bool {
        match (by_name(a), by_name(b)) {
            (Some(ai), Some(bi)) => world.objects[ai].support == Support::On(bi),
            _ => false,
        }
    };
    match task.predicate {
        Predicate::ClickBell => by_name("bell").is_some_and(|i| world.objects[i].pressed),
        Predicate::StackBowls => on("bowl_a", "bowl_b"),
        Predicate::PlaceVegetable => on("vegetable", "veg_container"),
        Predicate::RestoreBottle => by_name("bottle").is_some_and(|i| world.objects[i].upright),
        Predicate::MoveCan => on("can", "can_pad"),
        Predicate::OpenLaptop => by_name("laptop")
            .is_some_and(|i| world.objects[i].open_amount >= cfg.open_threshold),
        Predicate::LiftPot => by_name("pot").is_some_and(|i| {
            world.two_hand_gripped(i)
                && world.objects[i].pos[2] - world.table.z >= cfg.lift_threshold
        }),
        Predicate::PackBottles => on("bottle_l", "storage_box") && on("bottle_r", "storage_box"),
        Predicate::MoveFetchBottle => {
            let in_zone = world
                .nav_goal
                .is_some_and(|g| dist2([world.base.x, world.base.y], g) <= NAV_ZONE);
            let holding = by_name("bottle")
                .is_some_and(|i| matches!(world.objects[i].support, Support::Held(_)));
            in_zone && holding
        }
        Predicate::MoveOpenDrawer => by_name("drawer")
            .is_some_and(|i| world.objects[i].open_amount >= cfg.open_threshold),
    }
}

/// Deterministic reset: builds the task's scene from `(task, dr, seed)`,
/// resampling internally (bounded) until the scripted expert's reachability
/// and separation checks pass.
pub fn reset(
    task: &TaskSpec,
    dr: &DrConfig,
    seed: u64,
    cfg: &SimConfig,
) -> Result<WorldState, SimError> {
    scene::build_world(task, dr, seed, cfg)
}

#[cfg(test)]
mod tests;
