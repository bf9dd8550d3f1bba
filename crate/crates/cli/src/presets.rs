//! Configurations for every reproduced figure, compiled into the binary.

pub const PRESETS: [(&str, &str); 6] = [
    ("fig2b", include_str!("../presets/fig2b.json")),
    ("figS1", include_str!("../presets/figS1.json")),
    ("rb87_mw", include_str!("../presets/rb87_mw.json")),
    ("zero_coupling", include_str!("../presets/zero_coupling.json")),
    ("fig3b", include_str!("../presets/fig3b.json")),
    ("fig3c", include_str!("../presets/fig3c.json")),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}
