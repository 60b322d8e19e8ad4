"""Wallet-controlled message signatures: sign, verify, fragment matching.

The digest preamble and header-byte convention follow the de-facto signed
message format used by node/wallet console tooling, pinned here so the
golden vectors reproduce. A malformed signature raises; a well-formed
signature that simply does not match returns False. Evidentiary reports
need to tell "unverifiable input" apart from "verified not-matching".
"""

from __future__ import annotations

import base64
import binascii
from dataclasses import dataclass

from .crypto import (
    Address,
    Network,
    PrivateKey,
    RecoverableSig,
    RecoveryFailed,
    hash160,
    hash256,
    ecdsa_recover,
    ecdsa_sign_recoverable,
)
from .errors import EawardError
from .metadata import FRAGMENT_LEN
from .tx import write_compact_size

MESSAGE_PREFIX = b"\x18Bitcoin Signed Message:\n"


class MsgAuthError(EawardError):
    pass


class MalformedSignature(MsgAuthError):
    pass


class BadFragmentLength(MsgAuthError):
    pass


@dataclass(frozen=True)
class SignedMessage:
    address: Address
    message: str
    signature_b64: str


def message_digest(message: str) -> bytes:
    body = message.encode("utf-8")
    return hash256(MESSAGE_PREFIX + write_compact_size(len(body)) + body)


def _decode_signature(signature_b64: str) -> RecoverableSig:
    try:
        raw = base64.b64decode(signature_b64, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise MalformedSignature(f"not valid base64: {exc}") from exc
    if len(raw) != 65:
        raise MalformedSignature(f"signature is {len(raw)} bytes, expected 65")
    try:
        return RecoverableSig.from_bytes(raw)
    except RecoveryFailed as exc:
        raise MalformedSignature(str(exc)) from exc


def sign_message(key: PrivateKey, message: str, net: Network) -> SignedMessage:
    sig = ecdsa_sign_recoverable(key, message_digest(message))
    pub = key.public_key()
    address = Address.from_parts(
        net.p2pkh_version, hash160(pub.serialize(key.compressed)))
    return SignedMessage(address, message, base64.b64encode(sig.to_bytes()).decode("ascii"))


def verify_message(address: Address | str, signature_b64: str, message: str) -> bool:
    """True iff the recovered key's P2PKH address equals the claimed one.

    Compression follows the signature header; the network version comes from
    the claimed address itself.
    """
    if isinstance(address, str):
        address = Address.from_text(address)
    sig = _decode_signature(signature_b64)
    try:
        pub = ecdsa_recover(sig, message_digest(message))
    except RecoveryFailed:
        return False
    return hash160(pub.serialize(sig.compressed)) == address.payload


def match_fragment(signature_b64: str, fragment: str) -> bool:
    """True iff fragment is the tail of the full base64 signature."""
    if len(fragment) != FRAGMENT_LEN:
        raise BadFragmentLength(
            f"fragment is {len(fragment)} characters, expected {FRAGMENT_LEN}")
    return signature_b64[-FRAGMENT_LEN:] == fragment


def signature_fragment(signature_b64: str) -> str:
    """The last 28 characters of a full 88-character base64 signature."""
    if len(signature_b64) != 88:
        raise MalformedSignature(
            f"full signature must be 88 base64 characters, got {len(signature_b64)}")
    return signature_b64[-FRAGMENT_LEN:]
