//! Serialized plans are frozen: any drift in schedules, ordering, or
//! formatting shows up as a byte diff against the files in goldens/.
//!
//! Regenerate with UPDATE_GOLDENS=1 after an intentional change.

use gasket_core::geom::channel::ChannelKind;
use gasket_core::plan::{plan, Strategy};
use std::fs;
use std::path::PathBuf;

#[test]
fn plans_match_their_goldens() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/goldens");
    let update = std::env::var_os("UPDATE_GOLDENS").is_some();
    if update {
        fs::create_dir_all(&dir).unwrap();
    }
    for strategy in Strategy::ALL {
        for kind in ChannelKind::ALL {
            let text = plan(strategy, kind).to_text();
            let path = dir.join(format!("plan_{}_{}.txt", strategy.name(), kind.name()));
            if update {
                fs::write(&path, &text).unwrap();
                continue;
            }
            let golden = fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("missing golden {}: {e}", path.display()));
            assert_eq!(
                text,
                golden,
                "plan drift for {} {}",
                strategy.name(),
                kind.name()
            );
        }
    }
}
