"""Raw transaction model: parse, serialize, classify scripts, render asm.

The hex form of a transaction is the record of interest here, so parsing and
serialization are exact inverses: every byte of a valid input is accounted
for and reproduced. Txids are computed over the witness-stripped
serialization regardless of how the transaction arrived.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from io import BytesIO

from .crypto import Address, Network, hash160, hash256
from .errors import EawardError

MAX_MONEY = 21_000_000 * 100_000_000  # satoshi

# Script opcodes used by this artifact's standard-script surface.
OP_0 = 0x00
OP_PUSHDATA1 = 0x4C
OP_PUSHDATA2 = 0x4D
OP_PUSHDATA4 = 0x4E
OP_1NEGATE = 0x4F
OP_1 = 0x51
OP_16 = 0x60
OP_RETURN = 0x6A
OP_DUP = 0x76
OP_EQUAL = 0x87
OP_EQUALVERIFY = 0x88
OP_HASH160 = 0xA9
OP_CHECKSIG = 0xAC
OP_CHECKMULTISIG = 0xAE

_OPCODE_NAMES = {
    0x61: "OP_NOP", 0x63: "OP_IF", 0x64: "OP_NOTIF", 0x67: "OP_ELSE",
    0x68: "OP_ENDIF", 0x69: "OP_VERIFY", 0x6A: "OP_RETURN",
    0x6B: "OP_TOALTSTACK", 0x6C: "OP_FROMALTSTACK", 0x6D: "OP_2DROP",
    0x6E: "OP_2DUP", 0x6F: "OP_3DUP", 0x70: "OP_2OVER", 0x71: "OP_2ROT",
    0x72: "OP_2SWAP", 0x73: "OP_IFDUP", 0x74: "OP_DEPTH", 0x75: "OP_DROP",
    0x76: "OP_DUP", 0x77: "OP_NIP", 0x78: "OP_OVER", 0x79: "OP_PICK",
    0x7A: "OP_ROLL", 0x7B: "OP_ROT", 0x7C: "OP_SWAP", 0x7D: "OP_TUCK",
    0x7E: "OP_CAT", 0x7F: "OP_SUBSTR", 0x80: "OP_LEFT", 0x81: "OP_RIGHT",
    0x82: "OP_SIZE", 0x83: "OP_INVERT", 0x84: "OP_AND", 0x85: "OP_OR",
    0x86: "OP_XOR", 0x87: "OP_EQUAL", 0x88: "OP_EQUALVERIFY",
    0x8B: "OP_1ADD", 0x8C: "OP_1SUB", 0x8D: "OP_2MUL", 0x8E: "OP_2DIV",
    0x8F: "OP_NEGATE", 0x90: "OP_ABS", 0x91: "OP_NOT", 0x92: "OP_0NOTEQUAL",
    0x93: "OP_ADD", 0x94: "OP_SUB", 0x95: "OP_MUL", 0x96: "OP_DIV",
    0x97: "OP_MOD", 0x98: "OP_LSHIFT", 0x99: "OP_RSHIFT",
    0x9A: "OP_BOOLAND", 0x9B: "OP_BOOLOR", 0x9C: "OP_NUMEQUAL",
    0x9D: "OP_NUMEQUALVERIFY", 0x9E: "OP_NUMNOTEQUAL", 0x9F: "OP_LESSTHAN",
    0xA0: "OP_GREATERTHAN", 0xA1: "OP_LESSTHANOREQUAL",
    0xA2: "OP_GREATERTHANOREQUAL", 0xA3: "OP_MIN", 0xA4: "OP_MAX",
    0xA5: "OP_WITHIN", 0xA6: "OP_RIPEMD160", 0xA7: "OP_SHA1",
    0xA8: "OP_SHA256", 0xA9: "OP_HASH160", 0xAA: "OP_HASH256",
    0xAB: "OP_CODESEPARATOR", 0xAC: "OP_CHECKSIG", 0xAD: "OP_CHECKSIGVERIFY",
    0xAE: "OP_CHECKMULTISIG", 0xAF: "OP_CHECKMULTISIGVERIFY",
    0xB0: "OP_NOP1", 0xB1: "OP_CHECKLOCKTIMEVERIFY",
    0xB2: "OP_CHECKSEQUENCEVERIFY", 0xB3: "OP_NOP4", 0xB4: "OP_NOP5",
    0xB5: "OP_NOP6", 0xB6: "OP_NOP7", 0xB7: "OP_NOP8", 0xB8: "OP_NOP9",
    0xB9: "OP_NOP10",
}
_OPCODE_BY_NAME = {name: op for op, name in _OPCODE_NAMES.items()}


class TxError(EawardError):
    pass


class MalformedHex(TxError):
    pass


class TruncatedData(TxError):
    pass


class TrailingBytes(TxError):
    pass


class MalformedScript(TxError):
    pass


class PayloadTooLong(TxError):
    """A nulldata carrier was asked to hold more than 80 payload bytes."""


_HEX_RE = re.compile(r"^[0-9a-fA-F]*$")


def parse_hex(text: str) -> bytes:
    text = text.strip()
    if not _HEX_RE.match(text):
        raise MalformedHex("non-hex characters in input")
    if len(text) % 2:
        raise MalformedHex("odd-length hex input")
    return bytes.fromhex(text)


# ---------------------------------------------------------------------------
# Wire plumbing
# ---------------------------------------------------------------------------

class _Reader:
    def __init__(self, data: bytes):
        self._io = BytesIO(data)
        self._len = len(data)

    def read(self, n: int) -> bytes:
        out = self._io.read(n)
        if len(out) != n:
            raise TruncatedData(f"needed {n} bytes, got {len(out)}")
        return out

    def read_compact_size(self) -> int:
        # Canonical minimal encodings only, so parse is an exact inverse of
        # serialize and txids are well-defined over parsed values.
        first = self.read(1)[0]
        if first < 0xFD:
            return first
        if first == 0xFD:
            value = struct.unpack("<H", self.read(2))[0]
            floor = 0xFD
        elif first == 0xFE:
            value = struct.unpack("<I", self.read(4))[0]
            floor = 0x10000
        else:
            value = struct.unpack("<Q", self.read(8))[0]
            floor = 0x100000000
        if value < floor:
            raise TxError(f"non-canonical compact size encoding of {value}")
        return value

    @property
    def exhausted(self) -> bool:
        return self._io.tell() == self._len


def write_compact_size(n: int) -> bytes:
    if n < 0xFD:
        return struct.pack("<B", n)
    if n <= 0xFFFF:
        return b"\xfd" + struct.pack("<H", n)
    if n <= 0xFFFFFFFF:
        return b"\xfe" + struct.pack("<I", n)
    return b"\xff" + struct.pack("<Q", n)


# ---------------------------------------------------------------------------
# Txid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Txid:
    """hash256 of the stripped serialization; displayed byte-reversed."""

    hash: bytes

    def __post_init__(self):
        if len(self.hash) != 32:
            raise TxError("txid must wrap 32 bytes")

    @classmethod
    def from_hex(cls, text: str) -> "Txid":
        raw = parse_hex(text)
        if len(raw) != 32:
            raise TxError("txid hex must be 64 characters")
        return cls(raw[::-1])

    def hex(self) -> str:
        return self.hash[::-1].hex()

    def __str__(self) -> str:
        return self.hex()


# ---------------------------------------------------------------------------
# Scripts
# ---------------------------------------------------------------------------

def push_data(data: bytes) -> bytes:
    """Minimal push encoding for data (empty data becomes OP_0)."""
    n = len(data)
    if n == 0:
        return bytes([OP_0])
    if n <= 75:
        return bytes([n]) + data
    if n <= 0xFF:
        return bytes([OP_PUSHDATA1, n]) + data
    if n <= 0xFFFF:
        return bytes([OP_PUSHDATA2]) + struct.pack("<H", n) + data
    return bytes([OP_PUSHDATA4]) + struct.pack("<I", n) + data


@dataclass(frozen=True)
class ScriptOp:
    """One parsed script element: opcode plus pushed data when it is a push."""

    opcode: int
    data: bytes | None = None

    @property
    def is_push(self) -> bool:
        return self.data is not None


@dataclass(frozen=True)
class Script:
    raw: bytes

    @classmethod
    def from_hex(cls, text: str) -> "Script":
        return cls(parse_hex(text))

    def hex(self) -> str:
        return self.raw.hex()

    def ops(self) -> tuple[ScriptOp, ...]:
        """Parsed opcode/push sequence; raises MalformedScript on overruns."""
        out = []
        i = 0
        raw = self.raw
        while i < len(raw):
            op = raw[i]
            i += 1
            if op == OP_0:
                out.append(ScriptOp(op, b""))
            elif op <= 75:
                data = raw[i:i + op]
                if len(data) != op:
                    raise MalformedScript("push runs past end of script")
                out.append(ScriptOp(op, data))
                i += op
            elif op in (OP_PUSHDATA1, OP_PUSHDATA2, OP_PUSHDATA4):
                width = {OP_PUSHDATA1: 1, OP_PUSHDATA2: 2, OP_PUSHDATA4: 4}[op]
                if i + width > len(raw):
                    raise MalformedScript("pushdata length field truncated")
                n = int.from_bytes(raw[i:i + width], "little")
                i += width
                data = raw[i:i + n]
                if len(data) != n:
                    raise MalformedScript("pushdata runs past end of script")
                out.append(ScriptOp(op, data))
                i += n
            else:
                out.append(ScriptOp(op))
        return tuple(out)

    def pushes(self) -> tuple[bytes, ...]:
        return tuple(op.data for op in self.ops() if op.is_push)


def script_to_asm(script: Script) -> str:
    """Space-separated console rendering: pushes as hex, small ints as
    decimal, everything else as OP_* names."""
    tokens = []
    for op in script.ops():
        if op.opcode == OP_0:
            tokens.append("0")
        elif op.is_push:
            tokens.append(op.data.hex())
        elif op.opcode == OP_1NEGATE:
            tokens.append("-1")
        elif OP_1 <= op.opcode <= OP_16:
            tokens.append(str(op.opcode - 0x50))
        else:
            tokens.append(_OPCODE_NAMES.get(op.opcode, f"OP_UNKNOWN_0x{op.opcode:02x}"))
    return " ".join(tokens)


def asm_to_script(asm: str) -> Script:
    """Re-assemble an asm rendering into (minimally encoded) script bytes.

    Bare decimal tokens bind to the small-int opcodes, so one-byte pushes of
    0x10..0x16 are not representable; the renderer never emits them for the
    scripts this artifact builds.
    """
    out = bytearray()
    for token in asm.split():
        if token == "-1":
            out.append(OP_1NEGATE)
        elif token == "0":
            out.append(OP_0)
        elif token.isdigit() and str(int(token)) == token and 1 <= int(token) <= 16:
            # No leading zeros: "07" is a one-byte push, "7" is the opcode.
            out.append(0x50 + int(token))
        elif token.startswith("OP_"):
            if token not in _OPCODE_BY_NAME:
                raise MalformedScript(f"unknown opcode name {token}")
            out.append(_OPCODE_BY_NAME[token])
        else:
            if not _HEX_RE.match(token) or len(token) % 2:
                raise MalformedScript(f"token {token!r} is neither opcode nor hex push")
            out += push_data(bytes.fromhex(token))
    return Script(bytes(out))


# ---------------------------------------------------------------------------
# Script classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecodedScript:
    kind: str  # p2pkh | p2sh | multisig | nulldata | nonstandard
    script: Script
    req_sigs: int | None = None
    addresses: tuple[Address, ...] | None = None
    payload: bytes | None = None

    def to_report(self) -> dict:
        doc = {"asm": script_to_asm(self.script), "hex": self.script.hex(),
               "type": self.kind}
        if self.req_sigs is not None:
            doc["reqSigs"] = self.req_sigs
        if self.addresses is not None:
            doc["addresses"] = [a.text for a in self.addresses]
        return doc


def _looks_like_pubkey(data: bytes) -> bool:
    if len(data) == 33:
        return data[0] in (2, 3)
    if len(data) == 65:
        return data[0] == 4
    return False


def nulldata_payload(script: Script) -> bytes | None:
    """Concatenated push payload when the script is an OP_RETURN carrier."""
    try:
        ops = script.ops()
    except MalformedScript:
        return None
    if ops and ops[0].opcode == OP_RETURN and all(o.opcode <= OP_16 for o in ops[1:]):
        return b"".join(o.data for o in ops[1:] if o.data is not None)
    return None


def decode_script(script: Script | str, network: Network) -> DecodedScript:
    """Classify a script and derive its addresses for the given network."""
    if isinstance(script, str):
        script = Script.from_hex(script)
    ops = script.ops()

    if (len(ops) == 5 and ops[0].opcode == OP_DUP and ops[1].opcode == OP_HASH160
            and ops[2].is_push and len(ops[2].data) == 20
            and ops[3].opcode == OP_EQUALVERIFY and ops[4].opcode == OP_CHECKSIG):
        addr = Address.from_parts(network.p2pkh_version, ops[2].data)
        return DecodedScript("p2pkh", script, req_sigs=1, addresses=(addr,))

    if (len(ops) == 3 and ops[0].opcode == OP_HASH160 and ops[1].is_push
            and len(ops[1].data) == 20 and ops[2].opcode == OP_EQUAL):
        addr = Address.from_parts(network.p2sh_version, ops[1].data)
        return DecodedScript("p2sh", script, req_sigs=1, addresses=(addr,))

    if (len(ops) >= 4 and ops[-1].opcode == OP_CHECKMULTISIG
            and OP_1 <= ops[0].opcode <= OP_16 and OP_1 <= ops[-2].opcode <= OP_16):
        m = ops[0].opcode - 0x50
        n = ops[-2].opcode - 0x50
        keys = ops[1:-2]
        if (n == len(keys) and 1 <= m <= n <= 15
                and all(k.is_push and _looks_like_pubkey(k.data) for k in keys)):
            addresses = tuple(
                Address.from_parts(network.p2pkh_version, hash160(k.data)) for k in keys
            )
            return DecodedScript("multisig", script, req_sigs=m, addresses=addresses)

    payload = nulldata_payload(script)
    if payload is not None:
        return DecodedScript("nulldata", script, payload=payload)

    return DecodedScript("nonstandard", script)


def build_nulldata_script(payload: bytes) -> Script:
    """OP_RETURN carrier for payload; the 80-byte bound keeps the whole
    output script within the 83-byte relay limit."""
    if len(payload) > 80:
        raise PayloadTooLong(f"nulldata payload is {len(payload)} bytes, limit 80")
    return Script(bytes([OP_RETURN]) + push_data(payload))


# ---------------------------------------------------------------------------
# Transactions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TxInput:
    prev_txid: Txid
    prev_vout: int
    script_sig: Script
    sequence: int = 0xFFFFFFFF
    witness: tuple[bytes, ...] = ()


@dataclass(frozen=True)
class TxOutput:
    value: int  # satoshi
    script_pubkey: Script

    def __post_init__(self):
        if not 0 <= self.value <= MAX_MONEY:
            raise TxError(f"output value {self.value} outside 0..{MAX_MONEY}")

    def value_btc(self) -> str:
        return f"{self.value // 10**8}.{self.value % 10**8:08d}"


@dataclass(frozen=True)
class Transaction:
    version: int
    inputs: tuple[TxInput, ...]
    outputs: tuple[TxOutput, ...]
    locktime: int = 0
    segwit: bool = False

    def __post_init__(self):
        if not self.inputs or not self.outputs:
            raise TxError("transaction needs at least one input and one output")

    def serialize(self, include_witness: bool | None = None) -> bytes:
        if include_witness is None:
            include_witness = self.segwit
        out = bytearray(struct.pack("<i", self.version))
        if include_witness:
            out += b"\x00\x01"
        out += write_compact_size(len(self.inputs))
        for txin in self.inputs:
            out += txin.prev_txid.hash
            out += struct.pack("<I", txin.prev_vout)
            out += write_compact_size(len(txin.script_sig.raw))
            out += txin.script_sig.raw
            out += struct.pack("<I", txin.sequence)
        out += write_compact_size(len(self.outputs))
        for txout in self.outputs:
            out += struct.pack("<Q", txout.value)
            out += write_compact_size(len(txout.script_pubkey.raw))
            out += txout.script_pubkey.raw
        if include_witness:
            for txin in self.inputs:
                out += write_compact_size(len(txin.witness))
                for item in txin.witness:
                    out += write_compact_size(len(item))
                    out += item
        out += struct.pack("<I", self.locktime)
        return bytes(out)

    def to_hex(self) -> str:
        return self.serialize().hex()


def parse_transaction(hex_text: str) -> Transaction:
    """Parse a raw transaction from hex, witness-flagged or legacy."""
    raw = parse_hex(hex_text)
    reader = _Reader(raw)
    version = struct.unpack("<i", reader.read(4))[0]

    n_inputs = reader.read_compact_size()
    segwit = False
    if n_inputs == 0:
        # Marker byte: a legacy transaction cannot have zero inputs.
        if reader.read(1) != b"\x01":
            raise TxError("zero-input transaction with unknown flag byte")
        segwit = True
        n_inputs = reader.read_compact_size()

    inputs = []
    for _ in range(n_inputs):
        prev_hash = reader.read(32)
        prev_vout = struct.unpack("<I", reader.read(4))[0]
        script_len = reader.read_compact_size()
        script_sig = Script(reader.read(script_len))
        sequence = struct.unpack("<I", reader.read(4))[0]
        inputs.append(TxInput(Txid(prev_hash), prev_vout, script_sig, sequence))

    n_outputs = reader.read_compact_size()
    outputs = []
    for _ in range(n_outputs):
        value = struct.unpack("<Q", reader.read(8))[0]
        script_len = reader.read_compact_size()
        outputs.append(TxOutput(value, Script(reader.read(script_len))))

    if segwit:
        for i in range(n_inputs):
            n_items = reader.read_compact_size()
            items = tuple(reader.read(reader.read_compact_size()) for _ in range(n_items))
            inputs[i] = TxInput(inputs[i].prev_txid, inputs[i].prev_vout,
                                inputs[i].script_sig, inputs[i].sequence, items)

    locktime = struct.unpack("<I", reader.read(4))[0]
    if not reader.exhausted:
        raise TrailingBytes("extra bytes after transaction")
    return Transaction(version, tuple(inputs), tuple(outputs), locktime, segwit)


def compute_txid(tx: Transaction) -> Txid:
    return Txid(hash256(tx.serialize(include_witness=False)))


def extract_op_return(tx: Transaction) -> list[bytes]:
    """Payloads of every nulldata output, in output order."""
    payloads = (nulldata_payload(txout.script_pubkey) for txout in tx.outputs)
    return [p for p in payloads if p is not None]


def transaction_report(tx: Transaction, network: Network) -> dict:
    """Structured decode mirroring the console extraction paths
    (vin[].scriptSig.asm, vout[].scriptPubKey.{asm,type,reqSigs,addresses})."""
    doc = {
        "txid": compute_txid(tx).hex(),
        "version": tx.version,
        "size": len(tx.serialize()),
        "locktime": tx.locktime,
        "vin": [],
        "vout": [],
    }
    for txin in tx.inputs:
        entry = {
            "txid": txin.prev_txid.hex(),
            "vout": txin.prev_vout,
            "scriptSig": {
                "asm": script_to_asm(txin.script_sig),
                "hex": txin.script_sig.hex(),
            },
            "sequence": txin.sequence,
        }
        if txin.witness:
            entry["txinwitness"] = [item.hex() for item in txin.witness]
        doc["vin"].append(entry)
    for n, txout in enumerate(tx.outputs):
        decoded = decode_script(txout.script_pubkey, network)
        doc["vout"].append({
            "value": txout.value_btc(),
            "n": n,
            "scriptPubKey": decoded.to_report(),
        })
    return doc
