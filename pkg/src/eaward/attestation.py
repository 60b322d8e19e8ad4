"""Agreement records, transaction linkage, and authentication certificates.

The agreement binds legal names and roles to wallet addresses up front; the
linkage report checks, item by item, that an on-chain record matches that
binding; the certificate bundles the three authentication facts an
enforcement reviewer needs (where the record came from, when it was
committed, and that it was intended to take legal effect) and refuses to
exist unless all three are established.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .chain import TxStatus, format_time
from .crypto import Address, Network, MAINNET, PublicKey, TESTNET
from .errors import EawardError
from .escrow import EscrowPolicy, PolicyInvalid, pubkey_to_address
from .metadata import (
    AwardMetadata,
    MetadataError,
    ParticipantTag,
    Role,
    ROLE_ORDER,
    SUFFIX_LEN,
    attest_message,
    decode_metadata,
)
from .msgauth import (
    MalformedSignature,
    SignedMessage,
    match_fragment,
    signature_fragment,
    verify_message,
)
from .tx import (
    Script,
    Transaction,
    Txid,
    compute_txid,
    decode_script,
    extract_op_return,
)

SEAT_JURISDICTIONS = ("England", "Switzerland", "other")


class AttestationError(EawardError):
    pass


class NoRedeemScript(AttestationError):
    pass


class NoMetadata(AttestationError):
    pass


class MetadataUnparseable(AttestationError):
    pass


class LinkageFailed(AttestationError):
    pass


class AttestationInvalid(AttestationError):
    pass


class MissingArbitratorAttestation(AttestationError):
    pass


class NoTimeEvidence(AttestationError):
    pass


@dataclass(frozen=True)
class Party:
    role: Role
    legal_name: str
    display_name: str
    address: Address


@dataclass(frozen=True)
class ArbitrationAgreement:
    parties: tuple[Party, ...]
    seat: str
    seat_jurisdiction: str
    reasoned_award_opt_out: bool
    policy: EscrowPolicy
    agreement_text_hash: bytes | None = None

    def party(self, role: Role) -> Party:
        for p in self.parties:
            if p.role == role:
                return p
        raise AttestationError(f"agreement has no {role.name} party")

    def network(self) -> Network:
        if not self.parties:
            raise AttestationError("agreement names no parties")
        version = self.parties[0].address.version
        for net in (MAINNET, TESTNET):
            if version == net.p2pkh_version:
                return net
        raise AttestationError(f"address version {version:#04x} matches no known network")


@dataclass(frozen=True)
class AgreementReview:
    violations: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_agreement(agreement: ArbitrationAgreement) -> AgreementReview:
    """Invariant check; violations block use, warnings flag recognizability
    risks (seat outside England/Switzerland, no reasoned-award opt-out)."""
    violations = []
    warnings = []

    roles = [p.role for p in agreement.parties]
    if sorted(r.value for r in roles) != [r.value for r in ROLE_ORDER]:
        violations.append("agreement must name exactly one party per role A/C/R")

    addresses = [p.address.text for p in agreement.parties]
    if len(set(addresses)) != len(addresses):
        violations.append("two parties share a wallet address")

    versions = {p.address.version for p in agreement.parties}
    if len(versions) > 1:
        violations.append("party addresses mix network version bytes")
    elif versions and not any(
            v == net.p2pkh_version for net in (MAINNET, TESTNET) for v in versions):
        violations.append("party addresses are not P2PKH on a known network")

    for p in agreement.parties:
        try:
            ParticipantTag(p.role, p.display_name, p.address.text[-SUFFIX_LEN:])
        except MetadataError as exc:
            violations.append(f"{p.role.name} display name unusable in metadata: {exc}")

    try:
        net = agreement.network()
        policy_addresses = {
            pubkey_to_address(k, net).text for k in agreement.policy.pubkeys}
        if policy_addresses != set(addresses):
            violations.append(
                "escrow policy keys do not correspond 1:1 to party addresses")
    except (AttestationError, PolicyInvalid) as exc:
        violations.append(str(exc))

    if not agreement.seat:
        violations.append("agreement names no seat")
    if agreement.seat_jurisdiction not in SEAT_JURISDICTIONS:
        violations.append(
            f"seat_jurisdiction must be one of {SEAT_JURISDICTIONS}")
    elif agreement.seat_jurisdiction == "other":
        warnings.append(
            "seat outside England/Switzerland: award-form freedom not assured")
    if not agreement.reasoned_award_opt_out:
        warnings.append(
            "no reasoned-award opt-out: a compact on-chain record may not satisfy "
            "the applicable form rules")

    return AgreementReview(tuple(violations), tuple(warnings))


# ---------------------------------------------------------------------------
# Linkage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PartyLinkage:
    role: Role
    suffix_match: bool
    address_in_script: bool


@dataclass(frozen=True)
class LinkageReport:
    txid: Txid
    metadata: AwardMetadata
    per_party: tuple[PartyLinkage, ...]
    seat_match: bool

    @property
    def overall(self) -> bool:
        return self.seat_match and all(
            p.suffix_match and p.address_in_script for p in self.per_party)

    def to_report(self) -> dict:
        return {
            "txid": self.txid.hex(),
            "seatMatch": self.seat_match,
            "parties": [
                {"role": p.role.value, "suffixMatch": p.suffix_match,
                 "addressInScript": p.address_in_script}
                for p in self.per_party
            ],
            "overall": self.overall,
        }


def extract_redeem_script(tx: Transaction, network: Network):
    """The escrow redeem script: final push of the first input's scriptSig.

    Spends with several inputs are accepted only when every input reveals
    the same script.
    """
    scripts = []
    for txin in tx.inputs:
        pushes = txin.script_sig.pushes()
        if not pushes:
            raise NoRedeemScript("input scriptSig reveals no redeem script")
        scripts.append(pushes[-1])
    if len(set(scripts)) != 1:
        raise NoRedeemScript("inputs reveal different redeem scripts")
    decoded = decode_script(Script(scripts[0]), network)
    if decoded.kind != "multisig":
        raise NoRedeemScript(f"revealed script is {decoded.kind}, not multisig")
    return decoded


def extract_metadata(tx: Transaction) -> AwardMetadata:
    """The award metadata line among the transaction's nulldata payloads."""
    payloads = extract_op_return(tx)
    if not payloads:
        raise NoMetadata("transaction carries no nulldata output")
    last_error = None
    for payload in payloads:
        try:
            return decode_metadata(payload)
        except MetadataError as exc:
            last_error = exc
    raise MetadataUnparseable(
        f"no nulldata payload parses as award metadata: {last_error}")


def match_transaction(agreement: ArbitrationAgreement, tx: Transaction) -> LinkageReport:
    """Per-party suffix and script-membership checks plus the seat check."""
    network = agreement.network()
    decoded = extract_redeem_script(tx, network)
    script_addresses = {a.text for a in decoded.addresses}
    meta = extract_metadata(tx)

    per_party = []
    for role in ROLE_ORDER:
        party = agreement.party(role)
        tag = meta.participant(role)
        per_party.append(PartyLinkage(
            role=role,
            suffix_match=(tag.suffix == party.address.text[-SUFFIX_LEN:]),
            address_in_script=(party.address.text in script_addresses),
        ))
    return LinkageReport(
        txid=compute_txid(tx),
        metadata=meta,
        per_party=tuple(per_party),
        seat_match=(meta.seat == agreement.seat),
    )


# ---------------------------------------------------------------------------
# Certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AuthenticationCertificate:
    txid: Txid
    origin_evidence: dict
    time_evidence: dict
    intent_evidence: dict
    certifier: str
    findings: tuple[str, ...]
    statement: str
    issued_at: datetime

    def to_report(self) -> dict:
        return {
            "txid": self.txid.hex(),
            "certifier": self.certifier,
            "issuedAt": format_time(self.issued_at),
            "originEvidence": self.origin_evidence,
            "timeEvidence": self.time_evidence,
            "intentEvidence": self.intent_evidence,
            "findings": list(self.findings),
            "statement": self.statement,
        }


def _btc_amount(tx: Transaction) -> str:
    total = sum(out.value for out in tx.outputs)
    text = f"{total // 10**8}.{total % 10**8:08d}".rstrip("0").rstrip(".")
    return text or "0"


def issue_certificate(
    agreement: ArbitrationAgreement,
    tx: Transaction,
    status: TxStatus | None,
    attestations: list[SignedMessage],
    certifier: str,
    issued_at: datetime | None = None,
) -> AuthenticationCertificate:
    """Assemble the evidence bundle; raises instead of issuing a weak one.

    Origin: verified wallet signatures plus the full linkage report.
    Time: block timestamp and confirmation count from the chain source.
    Intent: the agreement reference, its opt-out flag, and the signed line.
    """
    report = match_transaction(agreement, tx)
    if not report.overall:
        failed = [f"{p.role.value}:suffix={p.suffix_match},script={p.address_in_script}"
                  for p in report.per_party]
        raise LinkageFailed(
            f"agreement does not match transaction "
            f"(seat={report.seat_match}, parties={failed})")

    if status is None or status.block_time is None or status.confirmations <= 0:
        raise NoTimeEvidence("no confirmed block time for the transaction")

    party_by_address = {p.address.text: p for p in agreement.parties}
    verified = []
    for att in attestations:
        if att.address.text not in party_by_address:
            raise AttestationInvalid(
                f"signer {att.address.text} is not a party to the agreement")
        try:
            ok = verify_message(att.address, att.signature_b64, att.message)
        except MalformedSignature as exc:
            raise AttestationInvalid(f"unverifiable signature: {exc}") from exc
        if not ok:
            raise AttestationInvalid(
                f"signature does not verify for {att.address.text}")
        verified.append(att)

    arbitrator = agreement.party(Role.ARBITRATOR)
    arb_attestation = next(
        (a for a in verified if a.address.text == arbitrator.address.text), None)
    if arb_attestation is None:
        raise MissingArbitratorAttestation(
            "no verified attestation from the arbitrator's wallet")
    if not match_fragment(arb_attestation.signature_b64, report.metadata.sig_fragment):
        raise AttestationInvalid(
            "embedded signature fragment does not match the arbitrator attestation")
    expected_message = attest_message(report.metadata)
    if arb_attestation.message != expected_message:
        raise AttestationInvalid(
            "arbitrator attestation signs a different line than the metadata")

    txid = report.txid
    when = status.block_time
    findings = [
        f"Transaction id {txid.hex()} was completed on "
        f"{when.strftime('%d %B %Y')} at {when.strftime('%H:%M:%S')} UTC",
        f"The transaction amount was {_btc_amount(tx)} BTC",
    ]
    for role in ROLE_ORDER:
        tag = report.metadata.participant(role)
        findings.append(
            f"\"{tag.token()}\" relates to {agreement.party(role).address.text}")
    findings.append(f"The transaction makes reference to {agreement.seat}.")
    findings.append(
        f"{arbitrator.legal_name}'s wallet digitally signed the embedded data.")
    findings.append(
        f"The record is unaltered given {status.confirmations} network confirmations.")

    issued_at = issued_at or datetime.now(timezone.utc).replace(microsecond=0)
    statement_lines = [
        f"Certification by {certifier}.",
        "The transaction data identified above was examined together with the "
        "arbitration agreement on record.",
        *(" - " + line for line in findings),
        "Origin, time, and intended legal effect are each established by the "
        "evidence itemized in this certificate.",
        "Note: the date and time stated are the miner-reported block header "
        "time; median-time-past rules bound its accuracy.",
    ]

    return AuthenticationCertificate(
        txid=txid,
        origin_evidence={
            "attestations": [
                {"address": a.address.text, "message": a.message,
                 "signature": a.signature_b64}
                for a in verified
            ],
            "linkage": report.to_report(),
        },
        time_evidence={
            "blockTime": format_time(when),
            "confirmations": status.confirmations,
            "blockHash": status.block_hash,
        },
        intent_evidence={
            "seat": agreement.seat,
            "seatJurisdiction": agreement.seat_jurisdiction,
            "reasonedAwardOptOut": agreement.reasoned_award_opt_out,
            "attestedMessage": expected_message,
            "agreementTextHash": (
                agreement.agreement_text_hash.hex()
                if agreement.agreement_text_hash else None),
        },
        certifier=certifier,
        findings=tuple(findings),
        statement="\n".join(statement_lines),
        issued_at=issued_at,
    )


# ---------------------------------------------------------------------------
# Agreement files and helpers
# ---------------------------------------------------------------------------

def metadata_for_agreement(agreement: ArbitrationAgreement,
                           signature_b64: str) -> AwardMetadata:
    """Build the metadata line for an agreement from the arbitrator's full
    attestation signature."""
    tags = tuple(
        ParticipantTag(role, agreement.party(role).display_name,
                       agreement.party(role).address.text[-SUFFIX_LEN:])
        for role in ROLE_ORDER
    )
    return AwardMetadata(tags, agreement.seat, signature_fragment(signature_b64))


def load_agreement(path: str | Path) -> ArbitrationAgreement:
    doc = json.loads(Path(path).read_text())
    return agreement_from_dict(doc)


def agreement_from_dict(doc: dict) -> ArbitrationAgreement:
    try:
        parties = tuple(
            Party(
                role=Role.from_letter(p["role"]),
                legal_name=p["legalName"],
                display_name=p["displayName"],
                address=Address.from_text(p["address"]),
            )
            for p in doc["parties"]
        )
        policy = EscrowPolicy(
            int(doc["policy"]["m"]),
            tuple(PublicKey.from_hex(k) for k in doc["policy"]["pubkeys"]),
        )
        text_hash = doc.get("agreementTextHash")
        return ArbitrationAgreement(
            parties=parties,
            seat=doc["seat"],
            seat_jurisdiction=doc["seatJurisdiction"],
            reasoned_award_opt_out=bool(doc["reasonedAwardOptOut"]),
            policy=policy,
            agreement_text_hash=bytes.fromhex(text_hash) if text_hash else None,
        )
    except (KeyError, TypeError) as exc:
        raise AttestationError(f"bad agreement document: {exc}") from exc


def agreement_to_dict(agreement: ArbitrationAgreement) -> dict:
    return {
        "parties": [
            {"role": p.role.value, "legalName": p.legal_name,
             "displayName": p.display_name, "address": p.address.text}
            for p in agreement.parties
        ],
        "seat": agreement.seat,
        "seatJurisdiction": agreement.seat_jurisdiction,
        "reasonedAwardOptOut": agreement.reasoned_award_opt_out,
        "policy": {
            "m": agreement.policy.m,
            "pubkeys": [k.hex() for k in agreement.policy.pubkeys],
        },
        "agreementTextHash": (
            agreement.agreement_text_hash.hex()
            if agreement.agreement_text_hash else None),
    }
