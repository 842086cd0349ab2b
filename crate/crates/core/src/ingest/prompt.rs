//! Nested prompt-format emission: the whole hierarchy as one JSON object
//! where each node title is a key whose value is the sub-hierarchy, and
//! collection labels appear as keys wrapped in square brackets.

use crate::ontology::ActivitySnapshot;

/// Emit the snapshot as a nested JSON document keyed by titles.
///
/// Multiply-inherited nodes appear under each of their parents. Under a
/// parent, plain children come first sorted by title, then collection
/// groups sorted by label with their children sorted by title inside.
/// Output is compact and byte-deterministic.
pub fn emit_prompt_ontology(snapshot: &ActivitySnapshot) -> Vec<u8> {
    let mut out = String::new();
    out.push('{');
    if let Some(root) = snapshot.root_node() {
        let groups = snapshot.grouped_children();
        let root_idx = snapshot.require(&root.id).expect("root resolves");
        let mut on_path = vec![false; snapshot.len()];
        write_node(snapshot, &groups, root_idx, &mut on_path, &mut out);
    }
    out.push('}');
    out.into_bytes()
}

fn write_node(
    snapshot: &ActivitySnapshot,
    groups: &[crate::ontology::ChildGroups],
    idx: usize,
    on_path: &mut Vec<bool>,
    out: &mut String,
) {
    out.push_str(&json_key(&snapshot.node_at(idx).title));
    out.push_str(":{");
    // Guard against cycles in unvalidated input.
    if on_path[idx] {
        out.push('}');
        return;
    }
    on_path[idx] = true;

    let mut first = true;
    for &child in &groups[idx].plain {
        if !first {
            out.push(',');
        }
        first = false;
        write_node(snapshot, groups, child, on_path, out);
    }
    for (label, members) in &groups[idx].collections {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&json_key(&format!("[{label}]")));
        out.push_str(":{");
        let mut inner_first = true;
        for &child in members {
            if !inner_first {
                out.push(',');
            }
            inner_first = false;
            write_node(snapshot, groups, child, on_path, out);
        }
        out.push('}');
    }

    on_path[idx] = false;
    out.push('}');
}

fn json_key(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}
