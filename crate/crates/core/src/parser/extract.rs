/// Pull netlist text out of a free-form model reply.
///
/// Prefers the first fenced code block mentioning `module`; otherwise takes
/// the span from the first `module` keyword through the next `endmodule`.
/// Returns `None` when the reply contains no module at all.
pub fn extract_netlist_block(reply: &str) -> Option<String> {
    let mut in_fence = false;
    let mut block = String::new();
    for line in reply.lines() {
        if line.trim_start().starts_with("```") {
            if in_fence {
                if find_word(&block, "module").is_some() {
                    return Some(block);
                }
                block.clear();
            }
            in_fence = !in_fence;
            continue;
        }
        if in_fence {
            block.push_str(line);
            block.push('\n');
        }
    }
    // An unterminated fence still counts if it holds a module.
    if in_fence && find_word(&block, "module").is_some() {
        return Some(block);
    }

    let start = find_word(reply, "module")?;
    let rest = &reply[start..];
    let end = find_word(rest, "endmodule").map_or(rest.len(), |e| e + "endmodule".len());
    Some(rest[..end].to_owned())
}

/// Byte offset of `word` standing alone (not inside a longer identifier).
fn find_word(text: &str, word: &str) -> Option<usize> {
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '$';
    let mut from = 0;
    while let Some(off) = text[from..].find(word) {
        let at = from + off;
        let before = text[..at].chars().next_back();
        let after = text[at + word.len()..].chars().next();
        if !before.is_some_and(is_ident) && !after.is_some_and(is_ident) {
            return Some(at);
        }
        from = at + word.len();
    }
    None
}
