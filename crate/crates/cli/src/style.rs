// SPDX-License-Identifier: Apache-2.0

use std::io::IsTerminal;
use std::sync::OnceLock;

#[derive(Clone, Copy)]
pub enum Tone {
    Good,
    Bad,
    Warn,
}

/// `CVA_COLOR=1` forces colour, `CVA_COLOR=0` disables it; otherwise colour
/// follows whether stdout is a terminal.
fn enabled() -> bool {
    static ON: OnceLock<bool> = OnceLock::new();
    *ON.get_or_init(|| match std::env::var("CVA_COLOR").as_deref() {
        Ok("1") => true,
        Ok("0") => false,
        _ => std::io::stdout().is_terminal(),
    })
}

pub fn paint(text: &str, tone: Tone) -> String {
    if !enabled() {
        return text.to_string();
    }
    let code = match tone {
        Tone::Good => "32",
        Tone::Bad => "31",
        Tone::Warn => "33",
    };
    format!("\x1b[{code}m{text}\x1b[0m")
}
