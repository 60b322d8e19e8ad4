"""Transaction retrieval: explorer-style REST endpoint or offline fixtures.

Nothing a source returns is trusted as-is: fetched bytes are re-hashed and
must match the requested txid before they leave this module. Fixture mode is
fully deterministic and offline; the whole test suite runs on it.

Fixture layout: <root>/<txid>.hex (raw hex) and <root>/<txid>.status
(JSON: blockTime, confirmations, blockHash). Broadcasts land in the same
directory plus an append-only mempool.txt.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import requests

from .crypto import Network, TESTNET
from .errors import EawardError
from .tx import Transaction, Txid, TxError, compute_txid, parse_transaction


class ChainError(EawardError):
    pass


class NotFound(ChainError):
    pass


class TransportError(ChainError):
    pass


class TxidMismatch(ChainError):
    pass


class Rejected(ChainError):
    pass


DEFAULT_TIMEOUT = 10.0

_mempool_lock = threading.Lock()


def _http_get(url: str, timeout: float) -> tuple[int, bytes]:
    try:
        resp = requests.get(url, timeout=timeout)
    except requests.RequestException as exc:
        raise TransportError(f"GET {url}: {exc}") from exc
    return resp.status_code, resp.content


def _http_post(url: str, body: bytes, timeout: float) -> tuple[int, bytes]:
    try:
        resp = requests.post(url, data=body, timeout=timeout)
    except requests.RequestException as exc:
        raise TransportError(f"POST {url}: {exc}") from exc
    return resp.status_code, resp.content


@dataclass
class ChainSource:
    mode: str  # "live" | "fixture"
    network: Network = TESTNET
    endpoint: str | None = None
    fixture_root: Path | None = None
    timeout: float = DEFAULT_TIMEOUT
    # Injection seam for live-mode tests; production code leaves these alone.
    http_get: callable = field(default=_http_get, repr=False)
    http_post: callable = field(default=_http_post, repr=False)

    def __post_init__(self):
        if self.mode == "live":
            if not self.endpoint:
                raise ChainError("live source needs an endpoint URL")
            self.endpoint = self.endpoint.rstrip("/")
        elif self.mode == "fixture":
            if not self.fixture_root:
                raise ChainError("fixture source needs a fixture root directory")
            self.fixture_root = Path(self.fixture_root)
        else:
            raise ChainError(f"unknown source mode {self.mode!r}")


@dataclass(frozen=True)
class TxStatus:
    block_time: datetime | None
    confirmations: int
    block_hash: str | None = None

    def __post_init__(self):
        confirmed = self.confirmations > 0
        if confirmed != (self.block_time is not None):
            raise ChainError("block_time present iff confirmations > 0")


def _parse_time(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def format_time(when: datetime) -> str:
    return when.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def get_raw_transaction(src: ChainSource, txid: Txid) -> str:
    """Raw hex for txid, verified client-side to hash back to txid."""
    if src.mode == "fixture":
        path = src.fixture_root / f"{txid.hex()}.hex"
        if not path.exists():
            raise NotFound(f"no fixture for {txid.hex()}")
        hex_text = path.read_text().strip()
    else:
        status, body = src.http_get(f"{src.endpoint}/tx/{txid.hex()}/hex", src.timeout)
        if status == 404:
            raise NotFound(f"source has no transaction {txid.hex()}")
        if status != 200:
            raise TransportError(f"source returned HTTP {status}")
        hex_text = body.decode("ascii", errors="replace").strip()

    try:
        parsed = parse_transaction(hex_text)
    except TxError as exc:
        raise TxidMismatch(f"source returned unparseable bytes: {exc}") from exc
    actual = compute_txid(parsed)
    if actual.hash != txid.hash:
        raise TxidMismatch(
            f"requested {txid.hex()} but source bytes hash to {actual.hex()}")
    return hex_text


def get_transaction(src: ChainSource, txid: Txid) -> Transaction:
    return parse_transaction(get_raw_transaction(src, txid))


def get_tx_status(src: ChainSource, txid: Txid) -> TxStatus:
    if src.mode == "fixture":
        status_path = src.fixture_root / f"{txid.hex()}.status"
        if status_path.exists():
            doc = json.loads(status_path.read_text())
            block_time = doc.get("blockTime")
            return TxStatus(
                _parse_time(block_time) if block_time else None,
                int(doc.get("confirmations", 0)),
                doc.get("blockHash"),
            )
        if (src.fixture_root / f"{txid.hex()}.hex").exists():
            return TxStatus(None, 0)  # known but unconfirmed
        raise NotFound(f"no status fixture for {txid.hex()}")

    status, body = src.http_get(f"{src.endpoint}/tx/{txid.hex()}/status", src.timeout)
    if status == 404:
        raise NotFound(f"source has no transaction {txid.hex()}")
    if status != 200:
        raise TransportError(f"source returned HTTP {status}")
    try:
        doc = json.loads(body)
    except ValueError as exc:
        raise TransportError(f"unparseable status document: {exc}") from exc
    if not doc.get("confirmed"):
        return TxStatus(None, 0)
    tip_status, tip_body = src.http_get(f"{src.endpoint}/blocks/tip/height", src.timeout)
    if tip_status != 200:
        raise TransportError(f"tip height query returned HTTP {tip_status}")
    confirmations = int(tip_body) - int(doc["block_height"]) + 1
    block_time = datetime.fromtimestamp(int(doc["block_time"]), tz=timezone.utc)
    return TxStatus(block_time, max(confirmations, 1), doc.get("block_hash"))


def broadcast(src: ChainSource, hex_text: str) -> Txid:
    """Submit raw hex; malformed transactions are rejected before transport."""
    try:
        parsed = parse_transaction(hex_text)
    except TxError as exc:
        raise Rejected(f"unparseable transaction: {exc}") from exc
    txid = compute_txid(parsed)

    if src.mode == "fixture":
        src.fixture_root.mkdir(parents=True, exist_ok=True)
        path = src.fixture_root / f"{txid.hex()}.hex"
        with _mempool_lock:
            if not path.exists():
                path.write_text(hex_text.strip() + "\n")
                mempool = src.fixture_root / "mempool.txt"
                with mempool.open("a") as fh:
                    fh.write(txid.hex() + "\n")
        return txid

    status, body = src.http_post(f"{src.endpoint}/tx", hex_text.encode("ascii"),
                                 src.timeout)
    if status != 200:
        raise Rejected(f"source refused broadcast: HTTP {status} {body[:200]!r}")
    return txid
