//! Visual speech: phoneme transcripts to smoothed viseme morph weights, with
//! lip-closure forcing and expression blending.

mod closure;
mod morph;
mod smoothing;
mod table;
mod timeline;
mod transcript;

pub use closure::{force_labial_closure, ClosureParams, DEFAULT_CLOSURE_FRACTION};
pub use morph::{blend_expression, channel_names, MorphKind, MorphTargetRef, MorphWeights};
pub use smoothing::{epanechnikov, smooth_weights, VisemeTrack, DEFAULT_BANDWIDTH_SCALE};
pub use table::{map_phoneme_to_viseme, VisemeClass, VisemeTable, SILENCE_MARKER, VISEME_CLASS_COUNT};
pub use timeline::{
    preview_image, render_timeline, write_csv, write_jsonl, write_previews, ExpressionKey,
    RenderParams,
};
pub use transcript::{PhonemeSegment, Transcript};
