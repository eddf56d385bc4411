//! Built-in networks and channels.

use crate::eval::{Channel, EvalError};
use crate::network::{MessageId, NetworkSpec};

pub const NETWORK_PRESETS: &[&str] = &["p2p", "classical-mac", "sw-mac", "ifc2cm"];

pub const CHANNEL_PRESETS: &[&str] = &[
    "bsc",
    "mac-adder",
    "mac-xor",
    "mac-parallel",
    "ifc-duplicated",
    "ifc-rx2-noise",
];

/// Crossover probability of the `bsc` preset.
pub const BSC_CROSSOVER: f64 = 0.11;

fn build(n_tx: usize, n_rx: usize, messages: &[(&[usize], &[usize])]) -> NetworkSpec {
    NetworkSpec::new(
        n_tx,
        n_rx,
        messages
            .iter()
            .map(|(tx, rx)| MessageId::new(tx.iter().copied(), rx.iter().copied()))
            .collect(),
    )
    .expect("preset is valid")
}

/// One transmitter, one receiver, one message.
pub fn p2p() -> NetworkSpec {
    build(1, 1, &[(&[1], &[1])])
}

/// Two private messages to one receiver.
pub fn classical_mac() -> NetworkSpec {
    build(2, 1, &[(&[1], &[1]), (&[2], &[1])])
}

/// Two private messages plus one known at both transmitters.
pub fn sw_mac() -> NetworkSpec {
    build(2, 1, &[(&[1], &[1]), (&[2], &[1]), (&[1, 2], &[1])])
}

/// Two-user interference channel where each transmitter also sends a message
/// to both receivers.
pub fn ifc2cm() -> NetworkSpec {
    build(
        2,
        2,
        &[(&[1], &[1]), (&[1], &[1, 2]), (&[2], &[1, 2]), (&[2], &[2])],
    )
}

pub fn network(name: &str) -> Option<NetworkSpec> {
    match name {
        "p2p" => Some(p2p()),
        "classical-mac" => Some(classical_mac()),
        "sw-mac" => Some(sw_mac()),
        "ifc2cm" => Some(ifc2cm()),
        _ => None,
    }
}

/// The channel a network preset is paired with when none is given.
pub fn default_channel(network: &str) -> Option<&'static str> {
    match network {
        "p2p" => Some("bsc"),
        "classical-mac" => Some("mac-adder"),
        "sw-mac" => Some("mac-xor"),
        "ifc2cm" => Some("ifc-duplicated"),
        _ => None,
    }
}

fn adder() -> Result<Channel, EvalError> {
    Channel::deterministic(vec![2, 2], vec![3], |x| vec![x[0] + x[1]])
}

pub fn channel(name: &str) -> Option<Channel> {
    let ch = match name {
        "bsc" => Channel::from_fn(vec![2], vec![2], |x, y| {
            if x[0] == y[0] {
                1.0 - BSC_CROSSOVER
            } else {
                BSC_CROSSOVER
            }
        }),
        "mac-adder" => adder(),
        "mac-xor" => Channel::deterministic(vec![2, 2], vec![2], |x| vec![x[0] ^ x[1]]),
        "mac-parallel" => Channel::deterministic(vec![2, 2], vec![4], |x| vec![2 * x[0] + x[1]]),
        "ifc-duplicated" => adder().and_then(|a| Channel::duplicated(&a, 2)),
        "ifc-rx2-noise" => Channel::from_fn(vec![2, 2], vec![3, 2], |x, y| {
            if y[0] == x[0] + x[1] {
                0.5
            } else {
                0.0
            }
        }),
        _ => return None,
    };
    Some(ch.expect("preset is valid"))
}
