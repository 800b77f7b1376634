/// Lowercases `text` and splits it into word, clitic and punctuation tokens.
///
/// Runs of alphanumerics form words. An apostrophe starts a clitic that
/// swallows the alphanumerics after it (`don't` → `don`, `'t`); a bare
/// apostrophe is its own token. Every other non-space character is a
/// single-character token.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if !current.is_empty() {
            tokens.push(std::mem::take(current));
        }
    };
    for ch in lower.chars() {
        let ch = if ch == '\u{2019}' { '\'' } else { ch };
        if ch.is_whitespace() {
            flush(&mut current, &mut tokens);
        } else if ch.is_alphanumeric() {
            current.push(ch);
        } else if ch == '\'' {
            flush(&mut current, &mut tokens);
            current.push(ch);
        } else {
            flush(&mut current, &mut tokens);
            tokens.push(ch.to_string());
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}
