/// A parameter block shipped with the binary, usable as
/// `include = "preset:<name>"`.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal, $summary:literal) => {
        Preset {
            name: $name,
            summary: $summary,
            text: include_str!(concat!("../presets/", $name, ".toml")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!(
        "pn-set-a",
        "pole/zero phase-noise model, 30 GHz reference (pole_zero block)"
    ),
    preset!(
        "pn-set-b",
        "pole/zero phase-noise model, 60 GHz reference (pole_zero block)"
    ),
    preset!(
        "ta-access-1bit",
        "radio-access transmitarray, 20x20 cells, 1-bit (transmitarray block)"
    ),
    preset!(
        "ta-access-2bit",
        "radio-access transmitarray, 14x14 cells, 2-bit (transmitarray block)"
    ),
    preset!(
        "ta-backhaul-1bit",
        "backhaul transmitarray, 40x40 cells, 1-bit (transmitarray block)"
    ),
    preset!(
        "ta-backhaul-2bit",
        "backhaul transmitarray, 40x40 cells, 2-bit (transmitarray block)"
    ),
    preset!(
        "ta-backhaul-3bit",
        "backhaul transmitarray, 40x40 cells, 3-bit (transmitarray block)"
    ),
    preset!(
        "link-ptrs-100prb",
        "100-PRB 64QAM slot with 60 GHz phase noise (link-bler params)"
    ),
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
