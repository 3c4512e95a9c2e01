//! Task catalogue and deterministic scene construction.
//!
//! All single-arm tasks share one playground scene (every task's objects are
//! always present), so sequential-goal chains and single-goal episodes see
//! the same distribution. Bimanual and mobile embodiments each have their own
//! scene template. Seen-setting resets use a fixed spot assignment with small
//! jitter; domain randomization shuffles the assignment, widens the jitter,
//! adds distractors, jitters the table height, and remaps fixture palette ids.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::Embodiment;
use crate::config::{DrConfig, SimConfig};

use super::{
    dist2, BasePose, Gripper, Hinge, ObjectClass, Predicate, SceneObject, SimError, Support,
    TableRect, TaskSpec, WorldState,
};

/// Minimum center distance between any two placed objects. Twice the default
/// grasp epsilon plus margin, so a grasp can never capture a neighbour.
const MIN_SEPARATION: f64 = 1.1;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Stable stream seed for a `(task, dr, seed)` reset.
pub fn stream_seed(task_name: &str, dr_enabled: bool, seed: u64) -> u64 {
    let mut h = fnv1a64(task_name.as_bytes());
    h ^= seed.wrapping_mul(0x9e3779b97f4a7c15);
    if dr_enabled {
        h = h.wrapping_mul(0x100000001b3) ^ 0x5851f42d4c957f2d;
    }
    h
}

/// The ten built-in tasks: eight fixed-base, two mobile.
pub fn task_catalogue(cfg: &SimConfig) -> Vec<TaskSpec> {
    let t = |name: &str,
             embodiment: Embodiment,
             instruction: &[&str],
             predicate: Predicate|
     -> TaskSpec {
        let mobile = embodiment.has_base();
        TaskSpec {
            name: name.to_string(),
            embodiment,
            instruction: instruction.iter().map(|w| w.to_string()).collect(),
            mobile,
            predicate,
            horizon: if mobile {
                cfg.horizon_mobile
            } else {
                cfg.horizon_fixed
            },
        }
    };
    vec![
        t(
            "click_bell",
            Embodiment::SingleArm,
            &["click", "the", "bell"],
            Predicate::ClickBell,
        ),
        t(
            "stack_bowls",
            Embodiment::SingleArm,
            &["stack", "the", "bowls"],
            Predicate::StackBowls,
        ),
        t(
            "place_vegetable",
            Embodiment::SingleArm,
            &["place", "the", "vegetable", "in", "the", "container"],
            Predicate::PlaceVegetable,
        ),
        t(
            "restore_bottle",
            Embodiment::SingleArm,
            &["restore", "the", "bottle"],
            Predicate::RestoreBottle,
        ),
        t(
            "move_can",
            Embodiment::SingleArm,
            &["move", "the", "can", "onto", "the", "pad"],
            Predicate::MoveCan,
        ),
        t(
            "open_laptop",
            Embodiment::SingleArm,
            &["open", "the", "laptop"],
            Predicate::OpenLaptop,
        ),
        t(
            "lift_pot",
            Embodiment::Bimanual,
            &["lift", "the", "pot"],
            Predicate::LiftPot,
        ),
        t(
            "pack_bottles",
            Embodiment::Bimanual,
            &["pack", "the", "bottles"],
            Predicate::PackBottles,
        ),
        t(
            "move_fetch_bottles",
            Embodiment::MobileBimanual,
            &["move", "and", "fetch", "bottles"],
            Predicate::MoveFetchBottle,
        ),
        t(
            "move_open_drawer",
            Embodiment::MobileBimanual,
            &["move", "and", "open", "the", "drawer"],
            Predicate::MoveOpenDrawer,
        ),
    ]
}

pub fn task_by_name(name: &str, cfg: &SimConfig) -> Result<TaskSpec, SimError> {
    task_catalogue(cfg)
        .into_iter()
        .find(|t| t.name == name)
        .ok_or_else(|| SimError::UnknownTask(name.to_string()))
}

/// Names of the six single-arm tasks, the pool chains draw from.
pub fn single_arm_task_names() -> Vec<&'static str> {
    vec![
        "click_bell",
        "stack_bowls",
        "place_vegetable",
        "restore_bottle",
        "move_can",
        "open_laptop",
    ]
}

/// Unique instruction words across the catalogue, in first-seen order.
pub fn vocabulary_words(cfg: &SimConfig) -> Vec<String> {
    let mut words = Vec::new();
    for task in task_catalogue(cfg) {
        for w in &task.instruction {
            if !words.contains(w) {
                words.push(w.clone());
            }
        }
    }
    words
}

struct Placed {
    name: &'static str,
    class: ObjectClass,
    xy: [f64; 2],
    upright: bool,
}

fn jitter(rng: &mut ChaCha8Rng, amount: f64) -> f64 {
    rng.gen_range(-amount..=amount)
}

pub fn build_world(
    task: &TaskSpec,
    dr: &DrConfig,
    seed: u64,
    cfg: &SimConfig,
) -> Result<WorldState, SimError> {
    let sseed = stream_seed(&task.name, dr.enabled, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(sseed);
    for _ in 0..cfg.max_reset_attempts {
        let world = match task.embodiment {
            Embodiment::SingleArm => single_arm_scene(task, dr, cfg, sseed, &mut rng),
            Embodiment::Bimanual => bimanual_scene(task, dr, cfg, sseed, &mut rng),
            Embodiment::MobileBimanual => mobile_scene(task, dr, cfg, sseed, &mut rng),
        };
        if validate(&world, task, cfg) {
            return Ok(world);
        }
    }
    Err(SimError::UnsolvableReset {
        task: task.name.clone(),
        attempts: cfg.max_reset_attempts,
        dr: dr.enabled,
    })
}

fn table_z(dr: &DrConfig, rng: &mut ChaCha8Rng) -> f64 {
    if dr.enabled {
        rng.gen_range(0.0..=dr.table_height_max)
    } else {
        0.0
    }
}

fn fixture_remap(dr: &DrConfig, rng: &mut ChaCha8Rng) -> [u8; 4] {
    if !(dr.enabled && dr.palette_remap) {
        return [
            super::palette::BACKGROUND,
            super::palette::TABLE,
            super::palette::DRAWER,
            super::palette::PAD,
        ];
    }
    let pool = super::render::FIXTURE_REMAP_POOL;
    // The background always changes (global lighting analogue); the other
    // fixtures draw freely from the pool (texture analogue).
    let bg = loop {
        let pick = pool[rng.gen_range(0..pool.len())];
        if pick != super::palette::BACKGROUND {
            break pick;
        }
    };
    [
        bg,
        pool[rng.gen_range(0..pool.len())],
        pool[rng.gen_range(0..pool.len())],
        pool[rng.gen_range(0..pool.len())],
    ]
}

fn place_objects(
    anchors: &[[f64; 2]],
    roles: &[(&'static str, ObjectClass, bool)],
    dr: &DrConfig,
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<Placed> {
    let jit = if dr.enabled {
        dr.layout_jitter
    } else {
        cfg.jitter_seen
    };
    let mut order: Vec<usize> = (0..anchors.len()).collect();
    if dr.enabled {
        order.shuffle(rng);
    }
    let mut placed: Vec<Placed> = roles
        .iter()
        .zip(&order)
        .map(|((name, class, upright), &ai)| Placed {
            name,
            class: *class,
            xy: [
                anchors[ai][0] + jitter(rng, jit),
                anchors[ai][1] + jitter(rng, jit),
            ],
            upright: *upright,
        })
        .collect();
    if dr.enabled {
        let free: Vec<usize> = order[roles.len()..].to_vec();
        let max_extra = free.len().min(dr.distractors_max);
        let lo = dr.distractors_min.min(max_extra);
        let n = rng.gen_range(lo..=max_extra);
        for (k, &ai) in free.iter().take(n).enumerate() {
            placed.push(Placed {
                name: if k == 0 {
                    "distractor_0"
                } else if k == 1 {
                    "distractor_1"
                } else {
                    "distractor_2"
                },
                class: ObjectClass::Distractor,
                xy: [
                    anchors[ai][0] + jitter(rng, jit),
                    anchors[ai][1] + jitter(rng, jit),
                ],
                upright: true,
            });
        }
    }
    placed
}

fn objects_from(placed: Vec<Placed>, z: f64) -> Vec<SceneObject> {
    placed
        .into_iter()
        .map(|p| SceneObject {
            name: p.name.to_string(),
            class: p.class,
            pos: [p.xy[0], p.xy[1], z],
            support: Support::Table,
            upright: p.upright,
            pressed: false,
            open_amount: 0.0,
            hinge: None,
            distractor: p.class == ObjectClass::Distractor,
        })
        .collect()
}

fn single_arm_scene(
    _task: &TaskSpec,
    dr: &DrConfig,
    cfg: &SimConfig,
    sseed: u64,
    rng: &mut ChaCha8Rng,
) -> WorldState {
    let tz = table_z(dr, rng);
    // 4 x 3 spot grid over the table; nine playground roles, the rest free
    // for distractors.
    let mut anchors = Vec::new();
    for &y in &[8.5, 10.5, 12.5] {
        for &x in &[4.0, 6.2, 8.4, 10.6] {
            anchors.push([x, y]);
        }
    }
    let roles: [(&'static str, ObjectClass, bool); 9] = [
        ("bell", ObjectClass::Bell, true),
        ("bowl_a", ObjectClass::Bowl, true),
        ("bowl_b", ObjectClass::Bowl, true),
        ("laptop", ObjectClass::Laptop, true),
        ("can_pad", ObjectClass::Pad, true),
        ("bottle", ObjectClass::Bottle, false), // starts toppled
        ("vegetable", ObjectClass::Vegetable, true),
        ("veg_container", ObjectClass::Container, true),
        ("can", ObjectClass::Can, true),
    ];
    let placed = place_objects(&anchors, &roles, dr, cfg, rng);
    let mut objects = objects_from(placed, tz);
    for o in objects.iter_mut() {
        if o.class == ObjectClass::Laptop {
            // Lid handle sits toward the robot and pulls further toward it.
            o.hinge = Some(Hinge {
                anchor: [o.pos[0], o.pos[1] - 0.5],
                axis: [0.0, -1.0],
                handle_z: tz + 0.2,
            });
        }
    }
    let remap = fixture_remap(dr, rng);
    let gripper = Gripper {
        shoulder: [0.0, 1.2],
        pos: [
            rng.gen_range(-1.5..=1.5),
            rng.gen_range(2.0..=4.5),
            rng.gen_range(0.5..=1.5),
        ],
        closed: false,
        held: None,
    };
    WorldState {
        t: 0,
        embodiment: Embodiment::SingleArm,
        base: BasePose {
            x: 7.4,
            y: 5.2,
            theta: 0.0,
        },
        grippers: vec![gripper],
        objects,
        table: TableRect {
            x0: 3.2,
            y0: 7.6,
            x1: 11.8,
            y1: 13.4,
            z: tz,
        },
        arena_size: cfg.arena_size,
        nav_goal: None,
        fixture_remap: remap,
        stream_seed: sseed,
    }
}

fn bimanual_scene(
    _task: &TaskSpec,
    dr: &DrConfig,
    cfg: &SimConfig,
    sseed: u64,
    rng: &mut ChaCha8Rng,
) -> WorldState {
    let tz = table_z(dr, rng);
    let mut anchors = Vec::new();
    for &y in &[9.0, 11.8] {
        for &x in &[4.6, 7.4, 10.2] {
            anchors.push([x, y]);
        }
    }
    // Seen layout: pot center-near, bottles flanking, box center-far.
    let roles: [(&'static str, ObjectClass, bool); 4] = [
        ("pot", ObjectClass::Pot, true),
        ("bottle_l", ObjectClass::Bottle, true),
        ("bottle_r", ObjectClass::Bottle, true),
        ("storage_box", ObjectClass::StorageBox, true),
    ];
    // Fixed seen assignment uses anchors 1 (pot), 3, 5 (bottles), 4 (box).
    let placed = if dr.enabled {
        place_objects(&anchors, &roles, dr, cfg, rng)
    } else {
        let jit = cfg.jitter_seen;
        let fixed = [1usize, 3, 5, 4];
        roles
            .iter()
            .zip(fixed)
            .map(|((name, class, upright), ai)| Placed {
                name,
                class: *class,
                xy: [
                    anchors[ai][0] + jitter(rng, jit),
                    anchors[ai][1] + jitter(rng, jit),
                ],
                upright: *upright,
            })
            .collect()
    };
    let objects = objects_from(placed, tz);
    let remap = fixture_remap(dr, rng);
    let grippers = vec![
        Gripper {
            shoulder: [-1.2, 1.0],
            pos: [
                rng.gen_range(-2.5..=-0.5),
                rng.gen_range(2.0..=4.0),
                rng.gen_range(0.5..=1.5),
            ],
            closed: false,
            held: None,
        },
        Gripper {
            shoulder: [1.2, 1.0],
            pos: [
                rng.gen_range(0.5..=2.5),
                rng.gen_range(2.0..=4.0),
                rng.gen_range(0.5..=1.5),
            ],
            closed: false,
            held: None,
        },
    ];
    WorldState {
        t: 0,
        embodiment: Embodiment::Bimanual,
        base: BasePose {
            x: 7.4,
            y: 5.2,
            theta: 0.0,
        },
        grippers,
        objects,
        table: TableRect {
            x0: 3.2,
            y0: 7.6,
            x1: 11.8,
            y1: 13.4,
            z: tz,
        },
        arena_size: cfg.arena_size,
        nav_goal: None,
        fixture_remap: remap,
        stream_seed: sseed,
    }
}

fn mobile_scene(
    task: &TaskSpec,
    dr: &DrConfig,
    cfg: &SimConfig,
    sseed: u64,
    rng: &mut ChaCha8Rng,
) -> WorldState {
    let tz = table_z(dr, rng);
    let jit = if dr.enabled {
        dr.layout_jitter
    } else {
        cfg.jitter_seen
    };
    let bottle_xy = [12.2 + jitter(rng, jit), 12.2 + jitter(rng, jit)];
    let mut objects = vec![
        SceneObject {
            name: "bottle".to_string(),
            class: ObjectClass::Bottle,
            pos: [bottle_xy[0], bottle_xy[1], tz],
            support: Support::Table,
            upright: true,
            pressed: false,
            open_amount: 0.0,
            hinge: None,
            distractor: false,
        },
        SceneObject {
            name: "drawer".to_string(),
            class: ObjectClass::Drawer,
            pos: [13.0, 3.0, 0.0],
            support: Support::Floor,
            upright: true,
            pressed: false,
            open_amount: 0.0,
            hinge: Some(Hinge {
                anchor: [11.8, 3.0],
                axis: [-1.0, 0.0],
                handle_z: 0.6,
            }),
            distractor: false,
        },
    ];
    if dr.enabled {
        let floor_anchors = [[6.0, 8.0], [8.5, 5.5], [5.0, 11.0]];
        let max_extra = floor_anchors.len().min(dr.distractors_max);
        let lo = dr.distractors_min.min(max_extra);
        let n = rng.gen_range(lo..=max_extra);
        for (k, anchor) in floor_anchors.iter().take(n).enumerate() {
            objects.push(SceneObject {
                name: format!("distractor_{k}"),
                class: ObjectClass::Distractor,
                pos: [
                    anchor[0] + jitter(rng, jit),
                    anchor[1] + jitter(rng, jit),
                    0.0,
                ],
                support: Support::Floor,
                upright: true,
                pressed: false,
                open_amount: 0.0,
                hinge: None,
                distractor: true,
            });
        }
    }
    let remap = fixture_remap(dr, rng);
    let base = BasePose {
        x: 3.0 + jitter(rng, 0.5),
        y: 3.0 + jitter(rng, 0.5),
        theta: 0.0,
    };
    let grippers = vec![
        Gripper {
            shoulder: [0.5, -0.7],
            pos: [1.2, -0.7, 0.8],
            closed: false,
            held: None,
        },
        Gripper {
            shoulder: [0.5, 0.7],
            pos: [1.2, 0.7, 0.8],
            closed: false,
            held: None,
        },
    ];
    let nav_goal = match task.predicate {
        Predicate::MoveFetchBottle => Some([bottle_xy[0] - 1.9, bottle_xy[1]]),
        Predicate::MoveOpenDrawer => Some([9.9, 3.0]),
        _ => Some([bottle_xy[0] - 1.9, bottle_xy[1]]),
    };
    WorldState {
        t: 0,
        embodiment: Embodiment::MobileBimanual,
        base,
        grippers,
        objects,
        table: TableRect {
            x0: 11.0,
            y0: 11.0,
            x1: 15.0,
            y1: 15.0,
            z: tz,
        },
        arena_size: cfg.arena_size,
        nav_goal,
        fixture_remap: remap,
        stream_seed: sseed,
    }
}

/// Solvability checks: pairwise separation and expert reachability.
fn validate(world: &WorldState, task: &TaskSpec, cfg: &SimConfig) -> bool {
    let objs = &world.objects;
    for i in 0..objs.len() {
        for j in i + 1..objs.len() {
            let a = [objs[i].pos[0], objs[i].pos[1]];
            let b = [objs[j].pos[0], objs[j].pos[1]];
            if dist2(a, b) < MIN_SEPARATION {
                return false;
            }
        }
    }
    match task.embodiment {
        Embodiment::SingleArm | Embodiment::Bimanual => {
            let reach = cfg.reach_fixed - 0.4;
            // Every shoulder must reach every non-distractor object.
            for gi in 0..world.grippers.len() {
                let g = &world.grippers[gi];
                let shoulder_world = [
                    world.base.x + g.shoulder[0],
                    world.base.y + g.shoulder[1],
                ];
                for o in objs.iter().filter(|o| !o.distractor) {
                    let target = o
                        .handle_pos()
                        .map(|h| [h[0], h[1]])
                        .unwrap_or([o.pos[0], o.pos[1]]);
                    if dist2(shoulder_world, target) > reach {
                        return false;
                    }
                }
            }
            true
        }
        Embodiment::MobileBimanual => {
            let Some(goal) = world.nav_goal else {
                return false;
            };
            if world.table.contains(goal[0], goal[1]) {
                return false;
            }
            let reach = cfg.reach_mobile - 0.2;
            // From the waypoint (heading +x), the lead shoulder must reach
            // the task target.
            let shoulder = [goal[0] + 0.5, goal[1] - 0.7];
            let target = match task.predicate {
                Predicate::MoveOpenDrawer => {
                    match world.object("drawer").ok().and_then(|d| d.handle_pos()) {
                        Some(h) => [h[0], h[1]],
                        None => return false,
                    }
                }
                _ => match world.object("bottle").ok() {
                    Some(b) if world.table.contains(b.pos[0], b.pos[1]) => [b.pos[0], b.pos[1]],
                    _ => return false,
                },
            };
            dist2(shoulder, target) <= reach
        }
    }
}
