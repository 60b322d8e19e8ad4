from datetime import datetime, timezone

import pytest

from eaward.attestation import (
    ArbitrationAgreement,
    AttestationInvalid,
    LinkageFailed,
    MissingArbitratorAttestation,
    NoMetadata,
    NoRedeemScript,
    NoTimeEvidence,
    MetadataUnparseable,
    Party,
    agreement_to_dict,
    extract_metadata,
    extract_redeem_script,
    issue_certificate,
    load_agreement,
    match_transaction,
    metadata_for_agreement,
    validate_agreement,
)
from eaward.chain import TxStatus
from eaward.crypto import Address, PrivateKey, TESTNET, sha256
from eaward.escrow import EscrowPolicy
from eaward.metadata import Role, attest_message
from eaward.msgauth import SignedMessage, match_fragment, sign_message
from eaward.tx import (
    Script,
    Transaction,
    TxInput,
    TxOutput,
    build_nulldata_script,
)

from conftest import (
    ADDR_A,
    ADDR_C,
    ADDR_R,
    ATTEST_MESSAGE,
    FRAGMENT,
    SIGNATURE_B64,
    ZERO_PAYLOAD_ADDR,
    golden_policy,
)

ISSUED_AT = datetime(2026, 8, 9, 12, 0, 0, tzinfo=timezone.utc)


def _with_payload(tx: Transaction, payload: bytes) -> Transaction:
    """The demo transaction with its metadata payload replaced."""
    outputs = (TxOutput(tx.outputs[0].value, build_nulldata_script(payload)),
               *tx.outputs[1:])
    return Transaction(tx.version, tx.inputs, outputs, tx.locktime, tx.segwit)


def _agreement_with(agreement, **overrides) -> ArbitrationAgreement:
    base = dict(
        parties=agreement.parties,
        seat=agreement.seat,
        seat_jurisdiction=agreement.seat_jurisdiction,
        reasoned_award_opt_out=agreement.reasoned_award_opt_out,
        policy=agreement.policy,
        agreement_text_hash=agreement.agreement_text_hash,
    )
    base.update(overrides)
    return ArbitrationAgreement(**base)


# ---------------------------------------------------------------------------
# Agreement validation
# ---------------------------------------------------------------------------

def test_golden_agreement_validates_clean(golden_agreement):
    review = validate_agreement(golden_agreement)
    assert review.ok
    assert review.violations == ()
    assert review.warnings == ()


def test_shared_address_is_violation(golden_agreement):
    parties = list(golden_agreement.parties)
    parties[2] = Party(Role.RESPONDENT, parties[2].legal_name,
                       parties[2].display_name, parties[0].address)
    review = validate_agreement(_agreement_with(golden_agreement,
                                                parties=tuple(parties)))
    assert not review.ok
    assert any("share" in v for v in review.violations)


def test_missing_role_is_violation(golden_agreement):
    parties = golden_agreement.parties[:2]
    review = validate_agreement(_agreement_with(golden_agreement, parties=parties))
    assert any("one party per role" in v for v in review.violations)


def test_policy_key_mismatch_is_violation(golden_agreement):
    other_key = PrivateKey.from_bytes(sha256(b"unrelated")).public_key()
    policy = EscrowPolicy(2, (*golden_policy().pubkeys[:2], other_key))
    review = validate_agreement(_agreement_with(golden_agreement, policy=policy))
    assert any("1:1" in v for v in review.violations)


def test_opt_out_false_is_warning_not_violation(golden_agreement):
    review = validate_agreement(
        _agreement_with(golden_agreement, reasoned_award_opt_out=False))
    assert review.ok
    assert any("opt-out" in w for w in review.warnings)


def test_other_jurisdiction_is_warning(golden_agreement):
    review = validate_agreement(
        _agreement_with(golden_agreement, seat="Singapore",
                        seat_jurisdiction="other"))
    assert review.ok
    assert any("England/Switzerland" in w for w in review.warnings)


def test_unknown_jurisdiction_is_violation(golden_agreement):
    review = validate_agreement(
        _agreement_with(golden_agreement, seat_jurisdiction="Atlantis"))
    assert not review.ok


def test_agreement_file_roundtrip(golden_agreement, tmp_path):
    import json
    path = tmp_path / "agreement.json"
    path.write_text(json.dumps(agreement_to_dict(golden_agreement)))
    assert load_agreement(path) == golden_agreement


# ---------------------------------------------------------------------------
# Linkage
# ---------------------------------------------------------------------------

def test_golden_linkage_all_true(golden_agreement, demo_tx):
    report = match_transaction(golden_agreement, demo_tx)
    assert report.overall
    assert report.seat_match
    for p in report.per_party:
        assert p.suffix_match and p.address_in_script
    assert report.metadata.seat == "London"


def test_extract_redeem_script_golden(demo_tx):
    decoded = extract_redeem_script(demo_tx, TESTNET)
    assert decoded.req_sigs == 2
    assert [a.text for a in decoded.addresses] == [ADDR_A, ADDR_C, ADDR_R]


def test_wrong_seat_fails_seat_match(golden_agreement, demo_tx):
    report = match_transaction(
        _agreement_with(golden_agreement, seat="Paris"), demo_tx)
    assert not report.seat_match
    assert not report.overall
    assert all(p.suffix_match for p in report.per_party)


def test_replaced_address_fails_script_membership(golden_agreement, demo_tx):
    parties = list(golden_agreement.parties)
    decoy = Address.from_text(ZERO_PAYLOAD_ADDR)
    parties[2] = Party(Role.RESPONDENT, "Baker", "Baker", decoy)
    report = match_transaction(
        _agreement_with(golden_agreement, parties=tuple(parties)), demo_tx)
    linkage_r = report.per_party[2]
    assert not linkage_r.address_in_script
    assert not linkage_r.suffix_match
    assert not report.overall
    # The untouched parties still link.
    assert report.per_party[0].address_in_script and report.per_party[0].suffix_match


def demo_prev():
    from eaward.tx import Txid
    return Txid(bytes(32))


def test_no_redeem_script(golden_agreement):
    tx = Transaction(
        2,
        (TxInput(demo_prev(), 0, Script(b"")),),
        (TxOutput(0, build_nulldata_script(b"A-a-11111 C-b-22222 R-c-33333 X " + b"Q" * 28)),),
    )
    with pytest.raises(NoRedeemScript):
        match_transaction(golden_agreement, tx)


def test_no_metadata(golden_agreement, demo_tx):
    tx = Transaction(
        demo_tx.version, demo_tx.inputs,
        (TxOutput(500_000, Script(b"\x76\xa9\x14" + bytes(20) + b"\x88\xac")),),
        demo_tx.locktime)
    with pytest.raises(NoMetadata):
        match_transaction(golden_agreement, tx)


def test_metadata_unparseable(golden_agreement, demo_tx):
    tx = _with_payload(demo_tx, b"\x00" * 32)  # an anchor digest, not metadata
    with pytest.raises(MetadataUnparseable):
        match_transaction(golden_agreement, tx)


def test_anchor_plus_metadata_coexist(golden_agreement, demo_tx):
    extra = TxOutput(0, build_nulldata_script(sha256(b"anchored award")))
    tx = Transaction(demo_tx.version, demo_tx.inputs,
                     (extra, *demo_tx.outputs), demo_tx.locktime)
    report = match_transaction(golden_agreement, tx)
    assert report.overall


def test_multi_input_same_redeem_ok(golden_agreement, demo_tx):
    tx = Transaction(demo_tx.version, demo_tx.inputs * 2, demo_tx.outputs)
    assert match_transaction(golden_agreement, tx).overall


def test_multi_input_differing_redeem_rejected(golden_agreement, demo_tx):
    other = TxInput(demo_prev(), 0, Script(b"\x51"), 0xFFFFFFFF)
    tx = Transaction(demo_tx.version, (*demo_tx.inputs, other), demo_tx.outputs)
    with pytest.raises(NoRedeemScript):
        match_transaction(golden_agreement, tx)


# ---------------------------------------------------------------------------
# Certificate
# ---------------------------------------------------------------------------

def test_certificate_golden_findings(golden_agreement, demo_tx,
                                     golden_attestation, golden_status):
    cert = issue_certificate(golden_agreement, demo_tx, golden_status,
                             [golden_attestation], "Expert Witness", ISSUED_AT)
    from eaward.tx import compute_txid
    txid_hex = compute_txid(demo_tx).hex()
    assert cert.findings == (
        f"Transaction id {txid_hex} was completed on 28 March 2019 at 15:46:53 UTC",
        "The transaction amount was 0.005 BTC",
        '"A-JohnSmith-KkjJX" relates to mzV1dsMdDjtLSfRa2rPrE2oJpRtynKkjJX',
        '"C-Acme-fZN8L" relates to mpGZniUmoCemQzRbazvdgzGkmjUQ3fZN8L',
        '"R-Baker-NBSvH" relates to n2dSPmt5cv2hFNfQqoZtvRJ6bZmypNBSvH',
        "The transaction makes reference to London.",
        "John Smith's wallet digitally signed the embedded data.",
        "The record is unaltered given 1000 network confirmations.",
    )
    assert cert.certifier == "Expert Witness"
    assert "median-time-past" in cert.statement


def test_certificate_deterministic(golden_agreement, demo_tx,
                                   golden_attestation, golden_status):
    one = issue_certificate(golden_agreement, demo_tx, golden_status,
                            [golden_attestation], "W", ISSUED_AT)
    two = issue_certificate(golden_agreement, demo_tx, golden_status,
                            [golden_attestation], "W", ISSUED_AT)
    assert one == two


def test_certificate_reports_time_and_linkage(golden_agreement, demo_tx,
                                              golden_attestation, golden_status):
    cert = issue_certificate(golden_agreement, demo_tx, golden_status,
                             [golden_attestation], "W", ISSUED_AT)
    report = cert.to_report()
    assert report["timeEvidence"]["blockTime"] == "2019-03-28T15:46:53Z"
    assert report["timeEvidence"]["confirmations"] == 1000
    assert report["originEvidence"]["linkage"]["overall"] is True
    assert report["intentEvidence"]["reasonedAwardOptOut"] is True
    assert report["intentEvidence"]["attestedMessage"] == ATTEST_MESSAGE


def test_certificate_requires_linkage(golden_agreement, demo_tx,
                                      golden_attestation, golden_status):
    wrong_seat = _agreement_with(golden_agreement, seat="Paris")
    with pytest.raises(LinkageFailed):
        issue_certificate(wrong_seat, demo_tx, golden_status,
                          [golden_attestation], "W", ISSUED_AT)


def test_certificate_requires_time_evidence(golden_agreement, demo_tx,
                                            golden_attestation):
    with pytest.raises(NoTimeEvidence):
        issue_certificate(golden_agreement, demo_tx, None,
                          [golden_attestation], "W", ISSUED_AT)
    with pytest.raises(NoTimeEvidence):
        issue_certificate(golden_agreement, demo_tx, TxStatus(None, 0),
                          [golden_attestation], "W", ISSUED_AT)


def test_certificate_requires_arbitrator_attestation(golden_agreement, demo_tx,
                                                     golden_status):
    with pytest.raises(MissingArbitratorAttestation):
        issue_certificate(golden_agreement, demo_tx, golden_status, [], "W",
                          ISSUED_AT)


def test_corrupted_signature_is_invalid(golden_agreement, demo_tx,
                                        golden_attestation, golden_status):
    corrupted = SignedMessage(
        golden_attestation.address,
        golden_attestation.message,
        "IO0vDf3Zqf" + ("S" if SIGNATURE_B64[10] != "S" else "T") + SIGNATURE_B64[11:],
    )
    with pytest.raises(AttestationInvalid):
        issue_certificate(golden_agreement, demo_tx, golden_status,
                          [corrupted], "W", ISSUED_AT)


def test_tampered_fragment_is_invalid(golden_agreement, demo_tx,
                                      golden_attestation, golden_status):
    tampered_line = ATTEST_MESSAGE + " " + "X" + FRAGMENT[1:]
    tx = _with_payload(demo_tx, tampered_line.encode())
    with pytest.raises(AttestationInvalid):
        issue_certificate(golden_agreement, tx, golden_status,
                          [golden_attestation], "W", ISSUED_AT)


def test_non_party_signer_is_invalid(golden_agreement, demo_tx,
                                     golden_attestation, golden_status):
    stranger_key = PrivateKey.from_bytes(sha256(b"stranger"))
    stranger = sign_message(stranger_key, ATTEST_MESSAGE, TESTNET)
    with pytest.raises(AttestationInvalid):
        issue_certificate(golden_agreement, demo_tx, golden_status,
                          [golden_attestation, stranger], "W", ISSUED_AT)


def test_single_fault_mutations_never_issue(golden_agreement, demo_tx,
                                            golden_attestation, golden_status):
    """No certificate exists under any of the single-fault mutations."""
    faults = []

    def attempt(agreement=golden_agreement, tx=demo_tx, status=golden_status,
                attestations=None):
        issue_certificate(agreement, tx, status,
                          attestations if attestations is not None
                          else [golden_attestation], "W", ISSUED_AT)

    with pytest.raises(LinkageFailed):
        attempt(agreement=_agreement_with(golden_agreement, seat="Paris"))
    faults.append("seat")

    parties = list(golden_agreement.parties)
    parties[1] = Party(Role.CLAIMANT, "Acme", "Acme",
                       Address.from_text(ZERO_PAYLOAD_ADDR))
    with pytest.raises(LinkageFailed):
        attempt(agreement=_agreement_with(golden_agreement, parties=tuple(parties)))
    faults.append("address")

    with pytest.raises(AttestationInvalid):
        tampered = ATTEST_MESSAGE + " Y" + FRAGMENT[1:]
        attempt(tx=_with_payload(demo_tx, tampered.encode()))
    faults.append("fragment")

    with pytest.raises(LinkageFailed):
        altered = ATTEST_MESSAGE.replace("KkjJX", "KkjJY") + " " + FRAGMENT
        attempt(tx=_with_payload(demo_tx, altered.encode()))
    faults.append("payload")

    with pytest.raises(NoTimeEvidence):
        attempt(status=None)
    faults.append("status")

    with pytest.raises(AttestationInvalid):
        broken = SignedMessage(golden_attestation.address, ATTEST_MESSAGE,
                               SIGNATURE_B64[:20] +
                               ("A" if SIGNATURE_B64[20] != "A" else "B") +
                               SIGNATURE_B64[21:])
        attempt(attestations=[broken])
    faults.append("signature")

    assert faults == ["seat", "address", "fragment", "payload", "status", "signature"]


# ---------------------------------------------------------------------------
# Fully self-signed synthetic escrow
# ---------------------------------------------------------------------------

def test_synthetic_case_full_pipeline(synthetic_case):
    case = synthetic_case
    review = validate_agreement(case.agreement)
    assert review.ok
    assert any("England/Switzerland" in w for w in review.warnings)

    report = match_transaction(case.agreement, case.tx)
    assert report.overall

    cert = issue_certificate(case.agreement, case.tx, case.status,
                             [case.attestation], "Self Certifier", ISSUED_AT)
    assert "Party A's wallet digitally signed the embedded data." in cert.findings
    assert any("0.005 BTC" in line for line in cert.findings)


def test_synthetic_fragment_invariant(synthetic_case):
    meta = extract_metadata(synthetic_case.tx)
    assert match_fragment(synthetic_case.attestation.signature_b64,
                          meta.sig_fragment)
    assert synthetic_case.attestation.message == attest_message(meta)


def test_synthetic_party_attestations_accepted(synthetic_case):
    case = synthetic_case
    meta = extract_metadata(case.tx)
    line = attest_message(meta)
    extra = [
        sign_message(case.keys[Role.CLAIMANT], line, TESTNET),
        sign_message(case.keys[Role.RESPONDENT], line, TESTNET),
    ]
    cert = issue_certificate(case.agreement, case.tx, case.status,
                             [case.attestation, *extra], "W", ISSUED_AT)
    assert len(cert.origin_evidence["attestations"]) == 3


def test_metadata_for_agreement_suffix_invariant(synthetic_case):
    meta = metadata_for_agreement(synthetic_case.agreement,
                                  synthetic_case.attestation.signature_b64)
    for role in Role:
        address = synthetic_case.agreement.party(role).address.text
        assert meta.participant(role).suffix == address[-5:]


def test_linkage_overall_is_conjunction(golden_agreement, demo_tx):
    report = match_transaction(golden_agreement, demo_tx)
    from eaward.attestation import PartyLinkage, LinkageReport
    assert report.overall
    weakened = LinkageReport(
        report.txid, report.metadata,
        (PartyLinkage(Role.ARBITRATOR, True, False), *report.per_party[1:]),
        report.seat_match)
    assert not weakened.overall
    no_seat = LinkageReport(report.txid, report.metadata, report.per_party, False)
    assert not no_seat.overall