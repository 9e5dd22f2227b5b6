//! Scenarios shipped with the binary.

pub const FIG1A: &str = include_str!("../scenarios/fig1a.scn");
pub const FIG1B: &str = include_str!("../scenarios/fig1b.scn");
pub const FIG1C: &str = include_str!("../scenarios/fig1c.scn");

pub const ALL: [(&str, &str); 3] = [("fig1a", FIG1A), ("fig1b", FIG1B), ("fig1c", FIG1C)];

pub fn lookup(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
