"""The on-chain award metadata line.

Wire form, ASCII: "A-<name>-<sfx> C-<name>-<sfx> R-<name>-<sfx> <seat> <frag>"
where each suffix is the last five characters of that participant's address
and the final token is the last 28 characters of the arbitrator's full
base64 message signature. Space and '-' are structural and banned inside
fields; the whole line must fit the 80-byte nulldata payload.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .crypto import BASE58_ALPHABET
from .errors import EawardError
from .tx import PayloadTooLong

SUFFIX_LEN = 5
FRAGMENT_LEN = 28
PAYLOAD_LIMIT = 80


class MetadataError(EawardError):
    pass


class InvalidCharacter(MetadataError):
    pass


class BadTokenCount(MetadataError):
    pass


class UnknownRole(MetadataError):
    pass


class BadSuffixLength(MetadataError):
    pass


class DuplicateRole(MetadataError):
    pass


class RoleOrderViolation(MetadataError):
    pass


class Role(enum.Enum):
    ARBITRATOR = "A"
    CLAIMANT = "C"
    RESPONDENT = "R"

    @classmethod
    def from_letter(cls, letter: str) -> "Role":
        for role in cls:
            if role.value == letter:
                return role
        raise UnknownRole(f"role letter {letter!r} is not one of A/C/R")


ROLE_ORDER = (Role.ARBITRATOR, Role.CLAIMANT, Role.RESPONDENT)

_NAME_RE = re.compile(r"^[0-9A-Za-z]+$")
_SEAT_RE = re.compile(r"^[!-~]+$")  # printable ASCII, no spaces
_FRAGMENT_RE = re.compile(r"^[0-9A-Za-z+/=]+$")


@dataclass(frozen=True)
class ParticipantTag:
    role: Role
    display_name: str
    suffix: str

    def __post_init__(self):
        if not _NAME_RE.match(self.display_name):
            raise InvalidCharacter(
                f"display name {self.display_name!r} must be ASCII alphanumerics")
        if len(self.suffix) != SUFFIX_LEN:
            raise BadSuffixLength(
                f"suffix {self.suffix!r} must be exactly {SUFFIX_LEN} characters")
        if any(c not in BASE58_ALPHABET for c in self.suffix):
            raise InvalidCharacter(f"suffix {self.suffix!r} has non-base58 characters")

    def token(self) -> str:
        return f"{self.role.value}-{self.display_name}-{self.suffix}"


@dataclass(frozen=True)
class AwardMetadata:
    participants: tuple[ParticipantTag, ParticipantTag, ParticipantTag]
    seat: str
    sig_fragment: str

    def __post_init__(self):
        roles = tuple(p.role for p in self.participants)
        if len(set(roles)) != len(roles):
            raise DuplicateRole("one tag per role required")
        if roles != ROLE_ORDER:
            raise RoleOrderViolation("participants must appear in A, C, R order")
        if not _SEAT_RE.match(self.seat):
            raise InvalidCharacter(
                f"seat {self.seat!r} must be one space-free printable ASCII token")
        if len(self.sig_fragment) != FRAGMENT_LEN:
            raise MetadataError(
                f"signature fragment must be {FRAGMENT_LEN} characters")
        if not _FRAGMENT_RE.match(self.sig_fragment):
            raise InvalidCharacter("signature fragment has non-base64 characters")
        if len(self.text()) > PAYLOAD_LIMIT:
            raise PayloadTooLong(
                f"metadata line is {len(self.text())} bytes, limit {PAYLOAD_LIMIT}")

    def participant(self, role: Role) -> ParticipantTag:
        return self.participants[ROLE_ORDER.index(role)]

    def text(self) -> str:
        return " ".join([*(p.token() for p in self.participants),
                         self.seat, self.sig_fragment])


def encode_metadata(meta: AwardMetadata) -> bytes:
    """The ASCII payload carried by the award's nulldata output."""
    return meta.text().encode("ascii")


def attest_message(meta: AwardMetadata) -> str:
    """The exact string the arbitrator's wallet signs: the metadata line
    without the trailing signature fragment."""
    return " ".join([*(p.token() for p in meta.participants), meta.seat])


def decode_metadata(payload: bytes) -> AwardMetadata:
    """Inverse of encode_metadata, with field-level validation."""
    try:
        text = payload.decode("ascii")
    except UnicodeDecodeError as exc:
        raise InvalidCharacter(f"payload is not ASCII: {exc}") from exc
    tokens = text.split(" ")
    if len(tokens) != 5:
        raise BadTokenCount(f"expected 5 space-separated tokens, got {len(tokens)}")

    tags = []
    for token in tokens[:3]:
        parts = token.split("-")
        if len(parts) != 3:
            raise BadTokenCount(
                f"participant token {token!r} must be role-name-suffix")
        role = Role.from_letter(parts[0])
        tags.append(ParticipantTag(role, parts[1], parts[2]))

    roles = tuple(t.role for t in tags)
    if len(set(roles)) != 3:
        raise DuplicateRole(f"duplicate role letters in {tokens[:3]}")
    return AwardMetadata(tuple(tags), tokens[3], tokens[4])
