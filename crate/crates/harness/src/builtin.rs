//! Scenario files shipped with the harness.

use std::fs;
use std::path::Path;

use crate::error::ConfigError;

pub const BUILTINS: &[(&str, &str)] = &[
    ("fig5_multipath", include_str!("../scenarios/fig5_multipath.toml")),
    ("fig7_staggered", include_str!("../scenarios/fig7_staggered.toml")),
    ("fig7_failover", include_str!("../scenarios/fig7_failover.toml")),
    ("flash_crowd", include_str!("../scenarios/flash_crowd.toml")),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Reads `spec` as a file path, falling back to a built-in scenario name.
pub fn source(spec: &str) -> Result<String, ConfigError> {
    let path = Path::new(spec);
    if path.is_file() {
        return fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source });
    }
    builtin(spec).map(str::to_string).ok_or_else(|| ConfigError::UnknownScenario(spec.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_validates() {
        for (name, src) in BUILTINS {
            let r = crate::scenario::load(src, &[]).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&r.scenario.name, name);
        }
    }

    #[test]
    fn fig5_shape() {
        let r = crate::scenario::load(builtin("fig5_multipath").unwrap(), &[]).unwrap();
        let peers = r.topology.nodes().iter().filter(|n| n.name.starts_with("peer")).count();
        let routers = r.topology.nodes().len() - peers;
        assert_eq!((peers, routers), (5, 3));
        assert_eq!(r.shape.total_packets(), 10_240);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(source("no-such-scenario"), Err(ConfigError::UnknownScenario(_))));
    }
}
