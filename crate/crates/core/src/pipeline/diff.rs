//! Unified diffs between the buggy and patched file.

use diffy::Patch;

pub fn unified_diff(original: &str, patched: &str) -> String {
    diffy::create_patch(original, patched).to_string()
}

/// Applies a diff produced by [`unified_diff`].
pub fn apply_diff(original: &str, diff: &str) -> Option<String> {
    let patch = Patch::from_str(diff).ok()?;
    diffy::apply(original, &patch).ok()
}
