//! Top-down symbolic rasterizer: an allocentric grid over the whole arena and
//! an egocentric window near the end effector (or ahead of a mobile base).
//! Deterministic function of the world state; domain randomization remaps the
//! fixture palette ids, never object geometry.

use crate::config::ObsConfig;
use crate::obs::{ViewGrid, ViewKind};

use super::{palette, WorldState};

/// Palette ids fixtures may be remapped to under domain randomization.
pub const FIXTURE_REMAP_POOL: [u8; 6] = [
    palette::BACKGROUND,
    palette::TABLE,
    palette::DRAWER,
    palette::PAD,
    palette::BASE,
    palette::DISTRACTOR,
];

fn remapped(world: &WorldState, class_id: u8) -> u8 {
    match class_id {
        palette::BACKGROUND => world.fixture_remap[0],
        palette::TABLE => world.fixture_remap[1],
        palette::DRAWER => world.fixture_remap[2],
        palette::PAD => world.fixture_remap[3],
        other => other,
    }
}

struct Raster {
    h: usize,
    w: usize,
    /// World coordinates of the grid origin (cell (0, 0) corner).
    origin: [f64; 2],
    /// World units per cell along x and y.
    scale: [f64; 2],
    cells: Vec<u8>,
}

impl Raster {
    fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let c = ((x - self.origin[0]) / self.scale[0]).floor();
        let r = ((y - self.origin[1]) / self.scale[1]).floor();
        if c >= 0.0 && r >= 0.0 && (c as usize) < self.w && (r as usize) < self.h {
            Some((r as usize, c as usize))
        } else {
            None
        }
    }

    fn paint(&mut self, x: f64, y: f64, id: u8) {
        if let Some((r, c)) = self.cell_of(x, y) {
            self.cells[r * self.w + c] = id;
        }
    }

    fn fill_region(&mut self, contains: impl Fn(f64, f64) -> bool, id: u8) {
        for r in 0..self.h {
            for c in 0..self.w {
                let x = self.origin[0] + (c as f64 + 0.5) * self.scale[0];
                let y = self.origin[1] + (r as f64 + 0.5) * self.scale[1];
                if contains(x, y) {
                    self.cells[r * self.w + c] = id;
                }
            }
        }
    }
}

fn paint_scene(world: &WorldState, raster: &mut Raster) {
    let table = world.table;
    raster.fill_region(|x, y| table.contains(x, y), remapped(world, palette::TABLE));
    // Base footprint before objects: end effectors and scene objects read
    // better than the chassis when they overlap.
    raster.paint(world.base.x, world.base.y, remapped(world, palette::BASE));
    for o in &world.objects {
        let id = remapped(world, o.class.palette_id());
        raster.paint(o.pos[0], o.pos[1], id);
        if o.class.hinged() {
            if let Some(h) = o.handle_pos() {
                raster.paint(h[0], h[1], id);
            }
        }
    }
    for gi in 0..world.grippers.len() {
        let gw = world.gripper_world(gi);
        let id = if world.grippers[gi].closed {
            palette::GRIPPER_CLOSED
        } else {
            palette::GRIPPER_OPEN
        };
        raster.paint(gw[0], gw[1], id);
    }
}

/// Renders the allocentric and egocentric views for the current state.
pub fn render_views(world: &WorldState, obs: &ObsConfig) -> (ViewGrid, ViewGrid) {
    let bg = remapped(world, palette::BACKGROUND);

    let mut alloc = Raster {
        h: obs.alloc_h,
        w: obs.alloc_w,
        origin: [0.0, 0.0],
        scale: [
            world.arena_size / obs.alloc_w as f64,
            world.arena_size / obs.alloc_h as f64,
        ],
        cells: vec![bg; obs.alloc_h * obs.alloc_w],
    };
    paint_scene(world, &mut alloc);

    // Egocentric window: centered on the active gripper for fixed bases,
    // ahead of the base along its heading when mobile. Axis-aligned.
    let center = if world.embodiment.has_base() {
        let (s, c) = world.base.theta.sin_cos();
        [world.base.x + 2.0 * c, world.base.y + 2.0 * s]
    } else {
        let gw = world.gripper_world(0);
        [gw[0], gw[1]]
    };
    let half_w = obs.ego_w as f64 * obs.ego_scale / 2.0;
    let half_h = obs.ego_h as f64 * obs.ego_scale / 2.0;
    let mut ego = Raster {
        h: obs.ego_h,
        w: obs.ego_w,
        origin: [center[0] - half_w, center[1] - half_h],
        scale: [obs.ego_scale, obs.ego_scale],
        cells: vec![bg; obs.ego_h * obs.ego_w],
    };
    paint_scene(world, &mut ego);

    let alloc_grid = ViewGrid::new(ViewKind::Allocentric, alloc.h, alloc.w, alloc.cells)
        .expect("config dims positive");
    let ego_grid =
        ViewGrid::new(ViewKind::Egocentric, ego.h, ego.w, ego.cells).expect("config dims positive");
    (alloc_grid, ego_grid)
}
