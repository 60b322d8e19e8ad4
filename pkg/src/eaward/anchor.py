"""Document hash anchoring and the local content-addressed store.

The chain carries only a 32-byte digest; the document itself (optionally
encrypted by the caller first) lives off-chain, addressed by the hash of
exactly the bytes stored. Anchoring therefore reveals nothing about the
document's content.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .crypto import sha256
from .errors import EawardError
from .tx import (
    Script,
    Transaction,
    Txid,
    build_nulldata_script,
    compute_txid,
    nulldata_payload,
)


class AnchorError(EawardError):
    pass


class EmptyDocument(AnchorError):
    pass


class NoAnchorFound(AnchorError):
    pass


class HashMismatch(AnchorError):
    pass


class NotFound(AnchorError):
    pass


class IntegrityFailure(AnchorError):
    pass


@dataclass(frozen=True)
class AwardDocument:
    data: bytes
    media_hint: str | None = None

    def __post_init__(self):
        if not self.data:
            raise EmptyDocument("award document is empty")

    @classmethod
    def from_file(cls, path: str | Path) -> "AwardDocument":
        p = Path(path)
        return cls(p.read_bytes(), media_hint=p.suffix.lstrip(".") or None)


@dataclass(frozen=True)
class AnchorProof:
    doc_hash: bytes
    txid: Txid
    vout_index: int
    block_time: datetime | None = None
    confirmations: int | None = None

    def to_report(self) -> dict:
        doc = {
            "docHash": self.doc_hash.hex(),
            "txid": self.txid.hex(),
            "vout": self.vout_index,
        }
        if self.block_time is not None:
            doc["blockTime"] = self.block_time.strftime("%Y-%m-%dT%H:%M:%SZ")
        if self.confirmations is not None:
            doc["confirmations"] = self.confirmations
        return doc


def checksum_award(doc: AwardDocument) -> bytes:
    return sha256(doc.data)


def build_anchor_payload(doc_hash: bytes) -> bytes:
    """The nulldata payload for an anchor: exactly the 32 digest bytes."""
    if len(doc_hash) != 32:
        raise AnchorError("anchor payload must be a 32-byte digest")
    return doc_hash


def build_anchor_script(doc_hash: bytes) -> Script:
    return build_nulldata_script(build_anchor_payload(doc_hash))


def verify_anchor(doc: AwardDocument, tx: Transaction) -> AnchorProof:
    """Locate the nulldata output committing to the document's digest."""
    want = checksum_award(doc)
    found_nulldata = False
    for n, txout in enumerate(tx.outputs):
        payload = nulldata_payload(txout.script_pubkey)
        if payload is None:
            continue
        found_nulldata = True
        if payload == want:
            return AnchorProof(want, compute_txid(tx), n)
    if not found_nulldata:
        raise NoAnchorFound("transaction has no nulldata output")
    raise HashMismatch(
        "nulldata present but no payload equals the document digest")


class ObjectStore:
    """One file per object under root, named by the hex sha256 of its bytes.

    Writers stage to a temp file and atomically rename, so concurrent
    readers never observe partial objects; the digest is re-checked on every
    fetch.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, content_id: bytes) -> Path:
        return self.root / content_id.hex()

    def store(self, data: bytes) -> bytes:
        if not data:
            raise EmptyDocument("refusing to store an empty object")
        content_id = sha256(data)
        path = self._path(content_id)
        if path.exists():
            return content_id
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".staging-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return content_id

    def fetch(self, content_id: bytes) -> bytes:
        path = self._path(content_id)
        if not path.exists():
            raise NotFound(f"no object {content_id.hex()}")
        data = path.read_bytes()
        if sha256(data) != content_id:
            raise IntegrityFailure(
                f"stored bytes for {content_id.hex()} no longer hash to it")
        return data
