//! Privileged closed-loop controllers: one per task, all pure functions of
//! the current world state. They both script demonstrations and serve as the
//! success oracle. Mobile tasks run a rotate-to-face / drive navigation phase
//! and then emit stop steps for manipulation; fixed-base tasks emit pure
//! manipulation steps and never a motion step.

use crate::action::{ActionVector, Embodiment};
use crate::config::{NavConfig, SimConfig};
use crate::hybrid::HybridStep;

use super::{dist2, dist3, wrap_angle, Predicate, SceneObject, SimError, TaskSpec, WorldState};

/// Distance below which the expert commits to a grasp or press.
fn grasp_commit(cfg: &SimConfig) -> f64 {
    cfg.grasp_eps * 0.6
}

/// Per-axis cruise speed of the expert's proportional controller. Well below
/// the unit action range, so approach phases span several steps and leave
/// headroom for the policy's quantization error.
const ARM_SPEED: f64 = 0.45;

#[derive(Clone, Copy, PartialEq)]
enum Grip {
    Close,
    Open,
    Keep,
}

fn grip_value(grip: Grip, closed: bool) -> f64 {
    match grip {
        Grip::Close => 1.0,
        Grip::Open => -1.0,
        Grip::Keep => {
            if closed {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Proportional move of one arm toward a world-frame target.
fn arm_toward(world: &WorldState, gi: usize, target: [f64; 3], grip: Grip) -> [f64; 4] {
    let bf = world.world_to_base([target[0], target[1]]);
    let g = &world.grippers[gi];
    [
        (bf[0] - g.pos[0]).clamp(-ARM_SPEED, ARM_SPEED),
        (bf[1] - g.pos[1]).clamp(-ARM_SPEED, ARM_SPEED),
        (target[2] - g.pos[2]).clamp(-ARM_SPEED, ARM_SPEED),
        grip_value(grip, g.closed),
    ]
}

fn arm_hold(world: &WorldState, gi: usize, grip: Grip) -> [f64; 4] {
    [0.0, 0.0, 0.0, grip_value(grip, world.grippers[gi].closed)]
}

/// Pick `target` and release it at `dest` (xy) from `drop_z`. Closed-loop:
/// every decision derives from the currently observed state. Once the target
/// already rests on `dest_oi` the arm idles instead of re-grasping it.
fn pick_place_arm(
    world: &WorldState,
    gi: usize,
    target_oi: usize,
    dest_oi: Option<usize>,
    dest: [f64; 2],
    drop_z: f64,
    cfg: &SimConfig,
) -> [f64; 4] {
    if let Some(di) = dest_oi {
        if world.objects[target_oi].support == super::Support::On(di) {
            return arm_hold(world, gi, Grip::Keep);
        }
    }
    let g = &world.grippers[gi];
    let gw = world.gripper_world(gi);
    match g.held {
        Some(held) if held == target_oi => {
            let over = dist2([gw[0], gw[1]], dest) <= 0.25 && (gw[2] - drop_z).abs() <= 0.35;
            if over {
                arm_hold(world, gi, Grip::Open)
            } else {
                arm_toward(world, gi, [dest[0], dest[1], drop_z], Grip::Keep)
            }
        }
        Some(_) => arm_hold(world, gi, Grip::Open),
        None => {
            let target = &world.objects[target_oi];
            if dist3(gw, target.pos) <= grasp_commit(cfg) && !g.closed {
                arm_hold(world, gi, Grip::Close)
            } else if g.closed {
                // Missed grasp: reopen in place, approach again next step.
                arm_hold(world, gi, Grip::Open)
            } else {
                arm_toward(world, gi, target.pos, Grip::Open)
            }
        }
    }
}

/// Approach a pressable and close on it.
fn press_arm(world: &WorldState, gi: usize, target: &SceneObject, cfg: &SimConfig) -> [f64; 4] {
    let g = &world.grippers[gi];
    let gw = world.gripper_world(gi);
    if dist3(gw, target.pos) <= grasp_commit(cfg) && !g.closed {
        arm_hold(world, gi, Grip::Close)
    } else if g.closed {
        arm_hold(world, gi, Grip::Open)
    } else {
        arm_toward(world, gi, target.pos, Grip::Open)
    }
}

/// Approach a hinge handle, close on it, then drag along the pull axis.
fn pull_arm(world: &WorldState, gi: usize, target: &SceneObject, cfg: &SimConfig) -> [f64; 4] {
    let g = &world.grippers[gi];
    let gw = world.gripper_world(gi);
    let handle = target.handle_pos().expect("hinged object");
    let axis = target.hinge.expect("hinged object").axis;
    if dist3(gw, handle) <= cfg.grasp_eps * 0.7 {
        if g.closed {
            let pull = [gw[0] + axis[0] * 0.9, gw[1] + axis[1] * 0.9, handle[2]];
            arm_toward(world, gi, pull, Grip::Keep)
        } else {
            arm_hold(world, gi, Grip::Close)
        }
    } else if g.closed {
        arm_hold(world, gi, Grip::Open)
    } else {
        arm_toward(world, gi, handle, Grip::Open)
    }
}

fn single_arm_action(
    world: &WorldState,
    task: &TaskSpec,
    cfg: &SimConfig,
) -> Result<Vec<f64>, SimError> {
    let arm = match task.predicate {
        Predicate::ClickBell => {
            let bell = world.object("bell")?;
            press_arm(world, 0, bell, cfg)
        }
        Predicate::StackBowls => {
            let a = world.object_index("bowl_a")?;
            let bi = world.object_index("bowl_b")?;
            let b = &world.objects[bi];
            pick_place_arm(
                world,
                0,
                a,
                Some(bi),
                [b.pos[0], b.pos[1]],
                b.pos[2] + super::STACK_DZ,
                cfg,
            )
        }
        Predicate::PlaceVegetable => {
            let v = world.object_index("vegetable")?;
            let ci = world.object_index("veg_container")?;
            let c = &world.objects[ci];
            pick_place_arm(world, 0, v, Some(ci), [c.pos[0], c.pos[1]], c.pos[2] + 0.45, cfg)
        }
        Predicate::RestoreBottle => {
            let bi = world.object_index("bottle")?;
            let g = &world.grippers[0];
            if g.held == Some(bi) {
                let gw = world.gripper_world(0);
                if gw[2] - world.table.z >= 0.8 {
                    arm_hold(world, 0, Grip::Open)
                } else {
                    let up = [gw[0], gw[1], world.table.z + 1.0];
                    arm_toward(world, 0, up, Grip::Keep)
                }
            } else {
                // Reuse the grasp phase of pick-and-place.
                let b = &world.objects[bi];
                let gw = world.gripper_world(0);
                if dist3(gw, b.pos) <= grasp_commit(cfg) && !g.closed {
                    arm_hold(world, 0, Grip::Close)
                } else if g.closed {
                    arm_hold(world, 0, Grip::Open)
                } else {
                    arm_toward(world, 0, b.pos, Grip::Open)
                }
            }
        }
        Predicate::MoveCan => {
            let c = world.object_index("can")?;
            let padi = world.object_index("can_pad")?;
            let pad = &world.objects[padi];
            pick_place_arm(
                world,
                0,
                c,
                Some(padi),
                [pad.pos[0], pad.pos[1]],
                pad.pos[2] + 0.45,
                cfg,
            )
        }
        Predicate::OpenLaptop => {
            let laptop = world.object("laptop")?;
            pull_arm(world, 0, laptop, cfg)
        }
        other => {
            return Err(SimError::UnknownTask(format!(
                "predicate {other:?} is not single-arm"
            )))
        }
    };
    Ok(arm.to_vec())
}

fn bimanual_action(
    world: &WorldState,
    task: &TaskSpec,
    cfg: &SimConfig,
) -> Result<Vec<f64>, SimError> {
    let mut values = Vec::with_capacity(8);
    match task.predicate {
        Predicate::LiftPot => {
            let pi = world.object_index("pot")?;
            let pot = &world.objects[pi];
            let gripped = world.two_hand_gripped(pi);
            for gi in 0..2 {
                let offset = if gi == 0 { -0.35 } else { 0.35 };
                let handle = [pot.pos[0] + offset, pot.pos[1], pot.pos[2]];
                let g = &world.grippers[gi];
                let gw = world.gripper_world(gi);
                let near = dist3(gw, handle) <= 0.45;
                let arm = if gripped {
                    // Both hands on: lift straight up together.
                    [0.0, 0.0, ARM_SPEED, 1.0]
                } else if near && !g.closed {
                    arm_hold(world, gi, Grip::Close)
                } else if near && g.closed {
                    arm_hold(world, gi, Grip::Keep)
                } else if g.closed {
                    arm_hold(world, gi, Grip::Open)
                } else {
                    arm_toward(world, gi, handle, Grip::Open)
                };
                values.extend(arm);
            }
        }
        Predicate::PackBottles => {
            let bl = world.object_index("bottle_l")?;
            let br = world.object_index("bottle_r")?;
            let bxi = world.object_index("storage_box")?;
            let bx = &world.objects[bxi];
            let (bxx, bxy, bxz) = (bx.pos[0], bx.pos[1], bx.pos[2]);
            values.extend(pick_place_arm(
                world,
                0,
                bl,
                Some(bxi),
                [bxx - 0.25, bxy],
                bxz + 0.45,
                cfg,
            ));
            values.extend(pick_place_arm(
                world,
                1,
                br,
                Some(bxi),
                [bxx + 0.25, bxy],
                bxz + 0.45,
                cfg,
            ));
        }
        other => {
            return Err(SimError::UnknownTask(format!(
                "predicate {other:?} is not bimanual"
            )))
        }
    }
    Ok(values)
}

fn mobile_manip_action(
    world: &WorldState,
    task: &TaskSpec,
    cfg: &SimConfig,
) -> Result<Vec<f64>, SimError> {
    let mut values = Vec::with_capacity(8);
    match task.predicate {
        Predicate::MoveFetchBottle => {
            let bi = world.object_index("bottle")?;
            let b = &world.objects[bi];
            let g = &world.grippers[0];
            let gw = world.gripper_world(0);
            let arm = if g.held == Some(bi) {
                arm_hold(world, 0, Grip::Keep)
            } else if dist3(gw, b.pos) <= grasp_commit(cfg) && !g.closed {
                arm_hold(world, 0, Grip::Close)
            } else if g.closed {
                arm_hold(world, 0, Grip::Open)
            } else {
                arm_toward(world, 0, b.pos, Grip::Open)
            };
            values.extend(arm);
            values.extend(arm_hold(world, 1, Grip::Keep));
        }
        Predicate::MoveOpenDrawer => {
            let drawer = world.object("drawer")?;
            values.extend(pull_arm(world, 0, drawer, cfg));
            values.extend(arm_hold(world, 1, Grip::Keep));
        }
        other => {
            return Err(SimError::UnknownTask(format!(
                "predicate {other:?} is not mobile"
            )))
        }
    }
    Ok(values)
}

/// One expert step for the current state. Errors only on a task/embodiment
/// mismatch; given a solvable reset it reaches success within the horizon.
pub fn scripted_expert(
    world: &WorldState,
    task: &TaskSpec,
    cfg: &SimConfig,
    nav: &NavConfig,
) -> Result<HybridStep, SimError> {
    match world.embodiment {
        Embodiment::SingleArm => {
            let values = single_arm_action(world, task, cfg)?;
            Ok(HybridStep::Manip(
                ActionVector::new(Embodiment::SingleArm, values).expect("arm dims"),
            ))
        }
        Embodiment::Bimanual => {
            let values = bimanual_action(world, task, cfg)?;
            Ok(HybridStep::Manip(
                ActionVector::new(Embodiment::Bimanual, values).expect("arm dims"),
            ))
        }
        Embodiment::MobileBimanual => {
            let goal = world.nav_goal.expect("mobile scenes always carry a goal");
            let here = [world.base.x, world.base.y];
            let dist = dist2(here, goal);
            if dist > 0.35 {
                let desired = (goal[1] - here[1]).atan2(goal[0] - here[0]);
                let err = wrap_angle(desired - world.base.theta);
                if err.abs() > 0.12 {
                    let turn = err.abs().min(nav.theta_max);
                    if err > 0.0 {
                        return Ok(HybridStep::turn_left(turn));
                    }
                    return Ok(HybridStep::turn_right(turn));
                }
                return Ok(HybridStep::forward(dist.min(nav.d_max)));
            }
            let values = mobile_manip_action(world, task, cfg)?;
            Ok(HybridStep::Manip(
                ActionVector::new(Embodiment::MobileBimanual, values).expect("arm dims"),
            ))
        }
    }
}
