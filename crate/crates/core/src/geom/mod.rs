//! Low-dimensional geometry: points, segments, convex regions and clipping.

mod hull;
pub mod lp;
mod point;
mod primitives;
mod region;

pub use hull::{convex_hull, hull_2d};
pub use point::{Coords, Point, Vector};
pub use primitives::{
    clip_param_ball, clip_param_box_neighborhood, clip_param_cylinder, clip_param_halfspace, clip_segment_cylinder,
    clip_segment_halfspace, dist_point_box, project_onto_segment_line, segment_ball_intersection_extremes, Ball,
    Cylinder, Halfspace, Segment,
};
pub(crate) use primitives::convex_quadratic_sublevel;
pub use region::{clip_segment_convex, f_region, ConvexRegion};

/// Absolute tolerance for geometric predicates on unit-scale data.
pub const TOL: f64 = 1e-9;
