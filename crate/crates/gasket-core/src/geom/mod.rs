//! Planar geometry: vectors, poses, polylines, polygons, enclosing
//! rectangles, and the channel/gasket shape definitions built on them.

pub mod channel;
pub mod gasket;
pub mod polygon;
pub mod polyline;
pub mod pose;
pub mod rect;
pub mod vec;

pub use channel::{
    in_workspace, make_channel, ChannelKind, ChannelSpec, PlacedChannel, SlotQuery, MM_PER_INCH,
    ROPE_LENGTH, SLOT_WIDTH, WORKSPACE,
};
pub use gasket::GasketSpec;
pub use polyline::Polyline;
pub use pose::Pose2D;
pub use rect::MinRect;
pub use vec::{seg_dist, vec2, vec3, Vec2, Vec3};
