//! Exact scalars, points, lines, halfplanes, polygons and quadratic irrationals.

pub mod algebraic;
pub mod geometry;
pub mod point;
pub mod scalar;

pub use algebraic::{quadratic_roots, AlgPoint, QuadraticAlgebraic};
pub use geometry::{
    halfplane_intersection, intersections_in_slab, kth_intersection_in_slab, weighted_median,
    ConvexPolygon, Halfplane, Line, PolygonEdge, Side, VerticalSlab,
};
pub use point::{sq_dist, Point};
pub use scalar::{int, parse_scalar, rat, Scalar};
