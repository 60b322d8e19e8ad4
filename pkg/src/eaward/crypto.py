"""Byte-level primitives: digests, base58check addresses, recoverable ECDSA.

Everything downstream (scripts, escrow addresses, signed messages, anchors)
reduces to these operations. All functions are pure; signing is deterministic
(RFC 6979 nonces) so golden vectors reproduce bit-for-bit across runs.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from ._ripemd160 import ripemd160
from .errors import EawardError

# --- secp256k1 domain parameters ---
_P = 2**256 - 2**32 - 977
_N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
_GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
_GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

CURVE_ORDER = _N

BASE58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"


class CryptoError(EawardError):
    pass


class ChecksumMismatch(CryptoError):
    pass


class InvalidCharacter(CryptoError):
    pass


class WrongLength(CryptoError):
    pass


class InvalidKey(CryptoError):
    pass


class RecoveryFailed(CryptoError):
    pass


# ---------------------------------------------------------------------------
# Digests
# ---------------------------------------------------------------------------

def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def hash256(data: bytes) -> bytes:
    """Double SHA-256, the transaction/checksum digest."""
    return sha256(sha256(data))


def hash160(data: bytes) -> bytes:
    """RIPEMD-160 of SHA-256, the 20-byte digest addresses commit to."""
    return ripemd160(sha256(data))


_DIGESTS = {"sha256": sha256, "hash256": hash256, "hash160": hash160}


def digest(algorithm: str, data: bytes) -> bytes:
    """Dispatch by algorithm name: sha256 | hash256 | hash160."""
    try:
        fn = _DIGESTS[algorithm]
    except KeyError:
        raise ValueError(f"unknown digest algorithm: {algorithm!r}") from None
    return fn(data)


# ---------------------------------------------------------------------------
# base58check
# ---------------------------------------------------------------------------

def base58check_encode(version: int, payload: bytes) -> str:
    raw = bytes([version]) + payload
    raw += hash256(raw)[:4]
    num = int.from_bytes(raw, "big")
    text = ""
    while num:
        num, rem = divmod(num, 58)
        text = BASE58_ALPHABET[rem] + text
    pad = len(raw) - len(raw.lstrip(b"\x00"))
    return "1" * pad + text


def base58check_decode(text: str) -> tuple[int, bytes]:
    """Inverse of encode; returns (version, 20-byte payload).

    Raises InvalidCharacter / WrongLength / ChecksumMismatch, in that
    checking order.
    """
    num = 0
    for ch in text:
        idx = BASE58_ALPHABET.find(ch)
        if idx < 0:
            raise InvalidCharacter(f"{ch!r} is not a base58 character")
        num = num * 58 + idx
    body = num.to_bytes((num.bit_length() + 7) // 8, "big")
    pad = len(text) - len(text.lstrip("1"))
    raw = b"\x00" * pad + body
    if len(raw) != 25:
        raise WrongLength(f"decoded to {len(raw)} bytes, expected 25")
    if hash256(raw[:-4])[:4] != raw[-4:]:
        raise ChecksumMismatch(f"bad checksum in {text!r}")
    return raw[0], raw[1:-4]


@dataclass(frozen=True)
class Address:
    """A base58check address: version byte + 20-byte payload + its text form."""

    version: int
    payload: bytes
    text: str

    @classmethod
    def from_parts(cls, version: int, payload: bytes) -> "Address":
        if len(payload) != 20:
            raise WrongLength("address payload must be 20 bytes")
        return cls(version, payload, base58check_encode(version, payload))

    @classmethod
    def from_text(cls, text: str) -> "Address":
        version, payload = base58check_decode(text)
        return cls(version, payload, text)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Network:
    """Address-version table for a chain."""

    name: str
    p2pkh_version: int
    p2sh_version: int


MAINNET = Network("mainnet", 0x00, 0x05)
TESTNET = Network("testnet", 0x6F, 0xC4)

_NETWORKS = {"mainnet": MAINNET, "testnet": TESTNET}


def network_by_name(name: str) -> Network:
    try:
        return _NETWORKS[name]
    except KeyError:
        raise ValueError(f"unknown network {name!r}") from None


# ---------------------------------------------------------------------------
# secp256k1 point arithmetic (Jacobian coordinates, a = 0)
# ---------------------------------------------------------------------------

_INFINITY = (0, 1, 0)


def _jac_double(pt):
    x, y, z = pt
    if not y or not z:
        return _INFINITY
    s = 4 * x * y * y % _P
    m = 3 * x * x % _P
    nx = (m * m - 2 * s) % _P
    ny = (m * (s - nx) - 8 * pow(y, 4, _P)) % _P
    nz = 2 * y * z % _P
    return nx, ny, nz


def _jac_add(p, q):
    if not p[2]:
        return q
    if not q[2]:
        return p
    x1, y1, z1 = p
    x2, y2, z2 = q
    z1s, z2s = z1 * z1 % _P, z2 * z2 % _P
    u1, u2 = x1 * z2s % _P, x2 * z1s % _P
    s1, s2 = y1 * z2s * z2 % _P, y2 * z1s * z1 % _P
    if u1 == u2:
        if s1 != s2:
            return _INFINITY
        return _jac_double(p)
    h = (u2 - u1) % _P
    r = (s2 - s1) % _P
    h2 = h * h % _P
    h3 = h * h2 % _P
    u1h2 = u1 * h2 % _P
    nx = (r * r - h3 - 2 * u1h2) % _P
    ny = (r * (u1h2 - nx) - s1 * h3) % _P
    nz = h * z1 * z2 % _P
    return nx, ny, nz


def _jac_from_affine(pt):
    return (pt[0], pt[1], 1)


def _jac_to_affine(pt):
    x, y, z = pt
    if not z:
        return None
    zinv = pow(z, -1, _P)
    zinv2 = zinv * zinv % _P
    return x * zinv2 % _P, y * zinv2 * zinv % _P


def _point_mul(k: int, affine_pt) -> tuple[int, int] | None:
    """k * P as an affine point, or None for the point at infinity."""
    acc = _INFINITY
    add = _jac_from_affine(affine_pt)
    while k:
        if k & 1:
            acc = _jac_add(acc, add)
        add = _jac_double(add)
        k >>= 1
    return _jac_to_affine(acc)


def _lift_x(x: int, odd: int) -> tuple[int, int]:
    if x >= _P:
        raise RecoveryFailed("x coordinate out of field range")
    y_sq = (pow(x, 3, _P) + 7) % _P
    y = pow(y_sq, (_P + 1) // 4, _P)
    if y * y % _P != y_sq:
        raise RecoveryFailed("no curve point for x coordinate")
    if (y & 1) != odd:
        y = _P - y
    return x, y


# ---------------------------------------------------------------------------
# Keys and signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PublicKey:
    """A curve point in 33-byte compressed SEC1 form (prefix 0x02/0x03).

    Third-party scripts may carry 65-byte uncompressed keys; those are
    handled as raw pushes by the script decoder and never become PublicKey
    instances.
    """

    data: bytes

    def __post_init__(self):
        if len(self.data) != 33 or self.data[0] not in (2, 3):
            raise InvalidKey("public key must be 33 bytes with 0x02/0x03 prefix")
        try:
            _lift_x(int.from_bytes(self.data[1:], "big"), self.data[0] & 1)
        except RecoveryFailed as exc:
            raise InvalidKey(f"not a curve point: {exc}") from exc

    @classmethod
    def from_point(cls, point: tuple[int, int]) -> "PublicKey":
        x, y = point
        return cls(bytes([2 + (y & 1)]) + x.to_bytes(32, "big"))

    @classmethod
    def from_hex(cls, text: str) -> "PublicKey":
        return cls(bytes.fromhex(text))

    def point(self) -> tuple[int, int]:
        return _lift_x(int.from_bytes(self.data[1:], "big"), self.data[0] & 1)

    def serialize(self, compressed: bool = True) -> bytes:
        if compressed:
            return self.data
        x, y = self.point()
        return b"\x04" + x.to_bytes(32, "big") + y.to_bytes(32, "big")

    def hex(self) -> str:
        return self.data.hex()


@dataclass(frozen=True)
class PrivateKey:
    scalar: int
    compressed: bool = True

    def __post_init__(self):
        if not 0 < self.scalar < _N:
            raise InvalidKey("private key scalar out of range")

    @classmethod
    def from_bytes(cls, raw: bytes, compressed: bool = True) -> "PrivateKey":
        if len(raw) != 32:
            raise InvalidKey("private key must be 32 bytes")
        return cls(int.from_bytes(raw, "big"), compressed)

    def public_key(self) -> PublicKey:
        return PublicKey.from_point(_point_mul(self.scalar, (_GX, _GY)))


@dataclass(frozen=True)
class RecoverableSig:
    """header(1) || r(32) || s(32); header 27..34 encodes recovery id and
    whether the signer's key serializes compressed."""

    header: int
    r: int
    s: int

    def __post_init__(self):
        if not 27 <= self.header <= 34:
            raise RecoveryFailed(f"header byte {self.header} out of range 27..34")

    @property
    def recovery_id(self) -> int:
        return (self.header - 27) & 3

    @property
    def compressed(self) -> bool:
        return self.header >= 31

    def to_bytes(self) -> bytes:
        return bytes([self.header]) + self.r.to_bytes(32, "big") + self.s.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, raw: bytes) -> "RecoverableSig":
        if len(raw) != 65:
            raise RecoveryFailed(f"recoverable signature must be 65 bytes, got {len(raw)}")
        return cls(raw[0], int.from_bytes(raw[1:33], "big"), int.from_bytes(raw[33:], "big"))


def _rfc6979_nonces(scalar: int, digest32: bytes):
    """Deterministic k candidates per RFC 6979 with HMAC-SHA256 (qlen = hlen = 256)."""
    h1 = (int.from_bytes(digest32, "big") % _N).to_bytes(32, "big")
    x = scalar.to_bytes(32, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        candidate = int.from_bytes(v, "big")
        if 0 < candidate < _N:
            yield candidate
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def ecdsa_sign_recoverable(key: PrivateKey, digest32: bytes) -> RecoverableSig:
    """Sign a 32-byte digest; deterministic, low-s normalized."""
    if len(digest32) != 32:
        raise WrongLength("digest must be 32 bytes")
    e = int.from_bytes(digest32, "big") % _N
    for k in _rfc6979_nonces(key.scalar, digest32):
        point = _point_mul(k, (_GX, _GY))
        if point is None:
            continue
        rx, ry = point
        r = rx % _N
        if r == 0:
            continue
        s = pow(k, -1, _N) * (e + r * key.scalar) % _N
        if s == 0:
            continue
        recid = (ry & 1) | (2 if rx >= _N else 0)
        if s > _N // 2:
            s = _N - s
            recid ^= 1
        header = 27 + recid + (4 if key.compressed else 0)
        return RecoverableSig(header, r, s)
    raise InvalidKey("nonce generation exhausted")  # pragma: no cover


def ecdsa_recover(sig: RecoverableSig, digest32: bytes) -> PublicKey:
    """The unique public key for which sig verifies over digest32.

    Raises RecoveryFailed when r/s are out of range or no curve solution
    exists; the caller decides whether that is an error or a clean "false".
    """
    if len(digest32) != 32:
        raise WrongLength("digest must be 32 bytes")
    if not 0 < sig.r < _N or not 0 < sig.s < _N:
        raise RecoveryFailed("r/s out of range")
    recid = sig.recovery_id
    big_r = _lift_x(sig.r + (recid >> 1) * _N, recid & 1)
    e = int.from_bytes(digest32, "big") % _N
    # Q = r^-1 * (s*R - e*G)
    acc = _INFINITY
    s_r = _point_mul(sig.s, big_r)
    if s_r is not None:
        acc = _jac_add(acc, _jac_from_affine(s_r))
    if e:
        neg_e_g = _point_mul(_N - e, (_GX, _GY))
        if neg_e_g is not None:
            acc = _jac_add(acc, _jac_from_affine(neg_e_g))
    combined = _jac_to_affine(acc)
    if combined is None:
        raise RecoveryFailed("recovered point at infinity")
    q = _point_mul(pow(sig.r, -1, _N), combined)
    if q is None:
        raise RecoveryFailed("recovered point at infinity")
    return PublicKey.from_point(q)
