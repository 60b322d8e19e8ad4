"""Command surface for the escrow e-award workflow.

Exit codes triage outcomes for shell pipelines: 0 success, 1 a check that
ran and came back negative ("false"), 2 usage or data errors. Verification
subcommands print exactly "true" or "false" on stdout.

Private keys are never taken as positional arguments; `msg sign` reads them
from a file path or an env:NAME reference.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .anchor import (
    AnchorProof,
    AwardDocument,
    HashMismatch,
    NoAnchorFound,
    ObjectStore,
    build_anchor_script,
    checksum_award,
    verify_anchor,
)
from .attestation import (
    AttestationInvalid,
    LinkageFailed,
    MissingArbitratorAttestation,
    NoTimeEvidence,
    extract_metadata,
    issue_certificate,
    load_agreement,
    metadata_for_agreement,
    validate_agreement,
)
from .chain import ChainSource, NotFound, broadcast, get_tx_status, get_transaction
from .crypto import Network, PrivateKey, network_by_name
from .errors import EawardError
from .escrow import build_redeem_script, load_policy, p2sh_address
from .metadata import Role, attest_message, decode_metadata, encode_metadata
from .msgauth import SignedMessage, sign_message, verify_message
from .tx import Txid, decode_script, parse_hex, parse_transaction, transaction_report

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_ERROR = 2


class UsageError(Exception):
    """Configuration problems surfaced as exit code 2."""


def _emit(args, doc: dict, human_lines: list[str]):
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        for line in human_lines:
            print(line)


def _network(args, fallback: Network | None = None) -> Network:
    if args.network:
        return network_by_name(args.network)
    return fallback or network_by_name("testnet")


def _source(args) -> ChainSource:
    mode = args.source
    endpoint = args.endpoint or os.environ.get("EAWARD_ENDPOINT")
    fixture_root = args.fixture_root or os.environ.get("EAWARD_FIXTURE_ROOT")
    if mode == "live":
        if not endpoint:
            raise UsageError("live source needs --endpoint or EAWARD_ENDPOINT")
        return ChainSource("live", _network(args), endpoint=endpoint,
                           timeout=args.timeout)
    if not fixture_root:
        raise UsageError("fixture source needs --fixture-root or EAWARD_FIXTURE_ROOT")
    return ChainSource("fixture", _network(args), fixture_root=Path(fixture_root))


def _store_root(args) -> Path:
    root = args.store_root or os.environ.get("EAWARD_STORE_ROOT")
    if not root:
        raise UsageError("object store needs --store-root or EAWARD_STORE_ROOT")
    return Path(root)


def _read_private_key(ref: str) -> PrivateKey:
    if ref.startswith("env:"):
        name = ref[4:]
        text = os.environ.get(name)
        if text is None:
            raise UsageError(f"environment variable {name} is not set")
    else:
        path = Path(ref)
        if not path.exists():
            raise UsageError(f"key file {ref} does not exist")
        text = path.read_text()
    return PrivateKey.from_bytes(parse_hex(text.strip()))


def _fetch_transaction(args, txid_text: str):
    return get_transaction(_source(args), Txid.from_hex(txid_text))


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_agreement_validate(args) -> int:
    agreement = load_agreement(args.file)
    review = validate_agreement(agreement)
    doc = {"ok": review.ok,
           "violations": list(review.violations),
           "warnings": list(review.warnings)}
    lines = [f"violation: {v}" for v in review.violations]
    lines += [f"warning: {w}" for w in review.warnings]
    lines.append("ok" if review.ok else "invalid")
    _emit(args, doc, lines)
    return EXIT_OK if review.ok else EXIT_FALSE


def cmd_escrow_address(args) -> int:
    policy, file_net = load_policy(args.policy_file)
    net = _network(args, fallback=file_net)
    redeem = build_redeem_script(policy)
    address = p2sh_address(redeem, net)
    doc = {"address": address.text, "redeemScript": redeem.hex(),
           "m": policy.m, "n": policy.n, "network": net.name}
    _emit(args, doc, [f"address: {address.text}", f"redeemScript: {redeem.hex()}"])
    return EXIT_OK


def cmd_meta_encode(args) -> int:
    agreement = load_agreement(args.agreement)
    meta = metadata_for_agreement(agreement, args.sig)
    payload = encode_metadata(meta)
    doc = {"text": meta.text(), "payloadHex": payload.hex(),
           "attestMessage": attest_message(meta),
           "payloadBytes": len(payload)}
    _emit(args, doc, [payload.hex(), meta.text()])
    return EXIT_OK


def cmd_meta_decode(args) -> int:
    meta = decode_metadata(parse_hex(args.hex))
    doc = {
        "participants": [
            {"role": p.role.value, "name": p.display_name, "suffix": p.suffix}
            for p in meta.participants
        ],
        "seat": meta.seat,
        "sigFragment": meta.sig_fragment,
        "text": meta.text(),
    }
    lines = [p.token() for p in meta.participants]
    lines += [f"seat: {meta.seat}", f"fragment: {meta.sig_fragment}"]
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_script_decode(args) -> int:
    net = _network(args)
    decoded = decode_script(args.hex, net)
    doc = decoded.to_report()
    doc["p2sh"] = p2sh_address(decoded.script, net).text
    if decoded.payload is not None:
        doc["payloadHex"] = decoded.payload.hex()
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_tx_decode(args) -> int:
    net = _network(args)
    text = args.tx.strip()
    if len(text) == 64:
        tx = _fetch_transaction(args, text)
    else:
        tx = parse_transaction(text)
    print(json.dumps(transaction_report(tx, net), indent=2))
    return EXIT_OK


def cmd_tx_broadcast(args) -> int:
    txid = broadcast(_source(args), args.hex)
    _emit(args, {"txid": txid.hex()}, [txid.hex()])
    return EXIT_OK


def cmd_msg_sign(args) -> int:
    key = _read_private_key(args.key_ref)
    if args.uncompressed:
        key = PrivateKey(key.scalar, compressed=False)
    signed = sign_message(key, args.message, _network(args))
    doc = {"address": signed.address.text, "signature": signed.signature_b64,
           "message": signed.message}
    _emit(args, doc, [signed.signature_b64])
    return EXIT_OK


def cmd_msg_verify(args) -> int:
    ok = verify_message(args.address, args.signature, args.message)
    print("true" if ok else "false")
    return EXIT_OK if ok else EXIT_FALSE


def cmd_anchor_create(args) -> int:
    doc_file = AwardDocument.from_file(args.file)
    digest = checksum_award(doc_file)
    script = build_anchor_script(digest)
    doc = {"docHash": digest.hex(), "opReturnScript": script.hex()}
    lines = [f"docHash: {digest.hex()}", f"opReturnScript: {script.hex()}"]
    if args.store:
        store = ObjectStore(_store_root(args))
        content_id = store.store(doc_file.data)
        doc["contentId"] = content_id.hex()
        lines.append(f"contentId: {content_id.hex()}")
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_anchor_verify(args) -> int:
    doc_file = AwardDocument.from_file(args.file)
    tx = _fetch_transaction(args, args.txid)
    try:
        proof = verify_anchor(doc_file, tx)
    except (NoAnchorFound, HashMismatch) as exc:
        print("false")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FALSE
    try:
        status = get_tx_status(_source(args), proof.txid)
        proof = AnchorProof(proof.doc_hash, proof.txid, proof.vout_index,
                            status.block_time, status.confirmations)
    except NotFound:
        pass
    doc = proof.to_report()
    _emit(args, doc, [f"{k}: {v}" for k, v in doc.items()])
    return EXIT_OK


def cmd_certify(args) -> int:
    agreement = load_agreement(args.agreement)
    source = _source(args)
    txid = Txid.from_hex(args.txid)
    tx = get_transaction(source, txid)
    status = get_tx_status(source, txid)
    meta = extract_metadata(tx)
    arbitrator = agreement.party(Role.ARBITRATOR)
    attestation = SignedMessage(
        address=arbitrator.address,
        message=attest_message(meta),
        signature_b64=args.attestation,
    )
    try:
        certificate = issue_certificate(
            agreement, tx, status, [attestation], args.certifier)
    except (LinkageFailed, AttestationInvalid, MissingArbitratorAttestation,
            NoTimeEvidence) as exc:
        print("false")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FALSE
    report = certificate.to_report()
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    _emit(args, report, [certificate.statement])
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eaward",
        description="Multisig escrow e-award toolkit",
    )
    parser.add_argument("--version", action="version", version=f"eaward {__version__}")
    parser.add_argument("--network", choices=["mainnet", "testnet"],
                        help="address network (default: testnet or policy file value)")
    parser.add_argument("--source", choices=["live", "fixture"], default="fixture",
                        help="where transactions come from (default: fixture)")
    parser.add_argument("--endpoint", help="explorer REST endpoint for --source live")
    parser.add_argument("--fixture-root", help="directory of <txid>.hex/.status files")
    parser.add_argument("--store-root", help="content-addressed object store directory")
    parser.add_argument("--timeout", type=float, default=10.0,
                        help="live request timeout in seconds (default 10)")
    parser.add_argument("--json", action="store_true", help="machine-readable output")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("agreement", help="arbitration agreement operations")
    psub = p.add_subparsers(dest="subcommand", required=True)
    v = psub.add_parser("validate", help="check an agreement file")
    v.add_argument("file")
    v.set_defaults(func=cmd_agreement_validate)

    p = sub.add_parser("escrow", help="escrow script and address derivation")
    psub = p.add_subparsers(dest="subcommand", required=True)
    a = psub.add_parser("address", help="P2SH deposit address for a policy file")
    a.add_argument("policy_file")
    a.set_defaults(func=cmd_escrow_address)

    p = sub.add_parser("meta", help="award metadata codec")
    psub = p.add_subparsers(dest="subcommand", required=True)
    e = psub.add_parser("encode", help="build the metadata payload for an agreement")
    e.add_argument("agreement")
    e.add_argument("--sig", required=True,
                   help="full 88-character base64 attestation signature")
    e.set_defaults(func=cmd_meta_encode)
    d = psub.add_parser("decode", help="decode a metadata payload from hex")
    d.add_argument("hex")
    d.set_defaults(func=cmd_meta_decode)

    p = sub.add_parser("script", help="script classification")
    psub = p.add_subparsers(dest="subcommand", required=True)
    d = psub.add_parser("decode", help="classify script hex")
    d.add_argument("hex")
    d.set_defaults(func=cmd_script_decode)

    p = sub.add_parser("tx", help="transaction operations")
    psub = p.add_subparsers(dest="subcommand", required=True)
    d = psub.add_parser("decode", help="decode raw hex or fetch+decode a txid")
    d.add_argument("tx", metavar="hex|txid")
    d.set_defaults(func=cmd_tx_decode)
    b = psub.add_parser("broadcast", help="submit raw transaction hex")
    b.add_argument("hex")
    b.set_defaults(func=cmd_tx_broadcast)

    p = sub.add_parser("msg", help="wallet message attestation")
    psub = p.add_subparsers(dest="subcommand", required=True)
    s = psub.add_parser("sign", help="sign a message with a wallet key")
    s.add_argument("key_ref", metavar="key-file|env:NAME")
    s.add_argument("message")
    s.add_argument("--uncompressed", action="store_true",
                   help="derive the legacy uncompressed-key address")
    s.set_defaults(func=cmd_msg_sign)
    v = psub.add_parser("verify", help="verify an address/signature/message triple")
    v.add_argument("address")
    v.add_argument("signature")
    v.add_argument("message")
    v.set_defaults(func=cmd_msg_verify)

    p = sub.add_parser("anchor", help="award document hash anchoring")
    psub = p.add_subparsers(dest="subcommand", required=True)
    c = psub.add_parser("create", help="digest a document and build its carrier script")
    c.add_argument("file")
    c.add_argument("--store", action="store_true",
                   help="also store the document in the object store")
    c.set_defaults(func=cmd_anchor_create)
    v = psub.add_parser("verify", help="check a transaction anchors a document")
    v.add_argument("file")
    v.add_argument("txid")
    v.set_defaults(func=cmd_anchor_verify)

    p = sub.add_parser("certify", help="issue an authentication certificate")
    p.add_argument("agreement")
    p.add_argument("txid")
    p.add_argument("--attestation", required=True,
                   help="arbitrator's full base64 message signature")
    p.add_argument("--certifier", required=True)
    p.add_argument("--out", help="also write the certificate JSON to a file")
    p.set_defaults(func=cmd_certify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except EawardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except json.JSONDecodeError as exc:
        print(f"error: unparseable JSON input: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
