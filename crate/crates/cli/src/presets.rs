//! Named parameter sets.

use crate::config::{Config, ConfigError, Origin};

/// Rb-like attractive van der Waals strength, 2.64e22 × 7/60 a.u.
const C6_ATTRACTIVE: &str = "-3.08e21";

pub const PRESETS: &[(&str, &[(&str, &str)])] = &[
    // Excitation fraction against laser intensity, 120 MHz bandwidth.
    (
        "fig1",
        &[
            ("command", "pexc"),
            ("pulse.shape", "gaussian"),
            ("pulse.bandwidth", "1.2e8"),
            ("kernel.s", "6"),
            ("kernel.c_au", C6_ATTRACTIVE),
            ("rho", "6.5e10"),
        ],
    ),
    // Saturated fraction against density up to the fig1 density.
    (
        "fig2",
        &[
            ("command", "density-sweep"),
            ("pulse.shape", "gaussian"),
            ("pulse.bandwidth", "1.2e8"),
            ("kernel.s", "6"),
            ("kernel.c_au", C6_ATTRACTIVE),
            ("rho", "6.5e10"),
        ],
    ),
    // Pair correlation for a 60 MHz envelope chirped out to wider bandwidths;
    // the last entry is chirped the other way.
    (
        "fig3a",
        &[
            ("command", "correlation"),
            ("pulse.shape", "gaussian"),
            ("pulse.bandwidth", "6e7"),
            ("kernel.s", "6"),
            ("kernel.c_au", C6_ATTRACTIVE),
            ("correlation.bandwidths", "6e7,8e7,1e8,1.2e8,1.2e8"),
            ("correlation.chirp_signs", "1,1,1,1,-1"),
        ],
    ),
    // Pair correlation for an unchirped 60 MHz pulse at several detunings.
    (
        "fig3b",
        &[
            ("command", "correlation"),
            ("pulse.shape", "gaussian"),
            ("pulse.bandwidth", "6e7"),
            ("kernel.s", "6"),
            ("kernel.c_au", C6_ATTRACTIVE),
            ("correlation.detunings_hz", "-1e7,-5e6,0,5e6,1e7"),
        ],
    ),
    ("table1", &[("command", "gamma-table")]),
    // 37.5 ns pulse at 2e9 cm^-3 with C6 = 4.97e22 a.u.
    (
        "singer-params",
        &[
            ("command", "saturation"),
            ("pulse.shape", "gaussian"),
            ("pulse.duration", "3.75e-8"),
            ("kernel.s", "6"),
            ("kernel.c_au", "4.97e22"),
            ("rho", "2e9"),
        ],
    ),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn apply(config: &mut Config, name: &str) -> Result<(), ConfigError> {
    let Some((_, entries)) = PRESETS.iter().find(|(n, _)| *n == name) else {
        return Err(ConfigError {
            origin: None,
            field: Some("--preset".into()),
            message: format!(
                "unknown preset `{name}`; available presets: {}",
                names().join(", ")
            ),
        });
    };
    for (k, v) in entries.iter() {
        config.set(k, v, Origin::Preset(name.to_string()))?;
    }
    Ok(())
}

/// A fresh config holding only defaults and the named preset.
pub fn config(name: &str) -> Result<Config, ConfigError> {
    let mut c = Config::default();
    apply(&mut c, name)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_use_known_keys() {
        for name in names() {
            config(name).unwrap();
        }
    }

    #[test]
    fn unknown_preset_lists_names() {
        let e = config("fig9").unwrap_err();
        assert!(e.message.contains("fig3a") && e.message.contains("singer-params"));
    }
}
