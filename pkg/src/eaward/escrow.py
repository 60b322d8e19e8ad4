"""M-of-N escrow construction: redeem scripts and deposit addresses.

Key order is caller-supplied and preserved; the byte-exact redeem script is
what links the on-chain record back to the agreement, so no canonical
sorting is applied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .crypto import (
    Address,
    MAINNET,
    Network,
    PublicKey,
    TESTNET,
    hash160,
    network_by_name,
)
from .errors import EawardError
from .tx import OP_CHECKMULTISIG, Script, push_data

__all__ = [
    "EscrowPolicy", "PolicyInvalid", "build_redeem_script", "p2sh_address",
    "pubkey_to_address", "load_policy", "dump_policy",
    "Network", "MAINNET", "TESTNET", "network_by_name",
]


class PolicyInvalid(EawardError):
    pass


@dataclass(frozen=True)
class EscrowPolicy:
    """Quorum size and the ordered public keys of an escrow."""

    m: int
    pubkeys: tuple[PublicKey, ...]

    def __post_init__(self):
        n = len(self.pubkeys)
        if not 1 <= self.m <= n <= 15:
            raise PolicyInvalid(f"need 1 <= m <= n <= 15, got m={self.m}, n={n}")
        if len({k.data for k in self.pubkeys}) != n:
            raise PolicyInvalid("duplicate public keys in policy")

    @property
    def n(self) -> int:
        return len(self.pubkeys)


def build_redeem_script(policy: EscrowPolicy) -> Script:
    """OP_m <key>... OP_n OP_CHECKMULTISIG, keys in policy order."""
    out = bytearray([0x50 + policy.m])
    for key in policy.pubkeys:
        out += push_data(key.data)
    out += bytes([0x50 + policy.n, OP_CHECKMULTISIG])
    return Script(bytes(out))


def p2sh_address(script: Script, net: Network) -> Address:
    return Address.from_parts(net.p2sh_version, hash160(script.raw))


def pubkey_to_address(key: PublicKey, net: Network, compressed: bool = True) -> Address:
    return Address.from_parts(net.p2pkh_version, hash160(key.serialize(compressed)))


def load_policy(path: str | Path) -> tuple[EscrowPolicy, Network]:
    """Read a policy file: {"m": int, "network": name, "pubkeys": [hex, ...]}."""
    doc = json.loads(Path(path).read_text())
    try:
        policy = EscrowPolicy(int(doc["m"]),
                              tuple(PublicKey.from_hex(k) for k in doc["pubkeys"]))
        network = network_by_name(doc["network"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PolicyInvalid(f"bad policy file {path}: {exc}") from exc
    return policy, network


def dump_policy(policy: EscrowPolicy, network: Network) -> str:
    return json.dumps(
        {"m": policy.m, "network": network.name,
         "pubkeys": [k.hex() for k in policy.pubkeys]},
        indent=2,
    )
