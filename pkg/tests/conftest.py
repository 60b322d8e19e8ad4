"""Shared golden vectors and fixtures.

Vector provenance: published worked-example constants (redeem script,
addresses, payload, attestation signature, block time, amount) plus values
frozen after computing them with an independent oracle (affine-math point
recovery and reference digests cross-checked against officially published
test vectors).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import pytest

from eaward.attestation import ArbitrationAgreement, Party
from eaward.chain import ChainSource, TxStatus
from eaward.crypto import PrivateKey, PublicKey, TESTNET, hash256, sha256
from eaward.escrow import EscrowPolicy, build_redeem_script, pubkey_to_address
from eaward.metadata import Role
from eaward.msgauth import SignedMessage, sign_message
from eaward.tx import (
    Script,
    Transaction,
    TxInput,
    TxOutput,
    Txid,
    build_nulldata_script,
    parse_transaction,
    push_data,
)

FIXTURES = Path(__file__).parent / "fixtures"
CHAIN_DIR = FIXTURES / "chain"

# --- published worked-example constants ---
PK1_HEX = "0279aac3e06ee2e54ab5952a75fe742883d5ecaa2da33dfeb60a6940a435ed5399"
PK2_HEX = "02f90212cad84ab0875ef34d17c09e5fecff34f25786f99ddb5f4bdca5c599707b"
PK3_HEX = "03d3009499b501c7be0f4f7d3d8f45af4d2dd9104070e7dfedb5e57949a10a09af"

REDEEM_HEX = f"5221{PK1_HEX}21{PK2_HEX}21{PK3_HEX}53ae"

ADDR_A = "mzV1dsMdDjtLSfRa2rPrE2oJpRtynKkjJX"
ADDR_C = "mpGZniUmoCemQzRbazvdgzGkmjUQ3fZN8L"
ADDR_R = "n2dSPmt5cv2hFNfQqoZtvRJ6bZmypNBSvH"
GOLDEN_ADDRESSES = [ADDR_A, ADDR_C, ADDR_R]

PAYLOAD_HEX = (
    "412d4a6f686e536d6974682d4b6b6a4a5820432d41636d652d665a4e384c20522d42616b"
    "65722d4e42537648204c6f6e646f6e20436661376a6168445444566a5a774b55706b3777"
    "317970786738733d"
)
METADATA_TEXT = "A-JohnSmith-KkjJX C-Acme-fZN8L R-Baker-NBSvH London Cfa7jahDTDVjZwKUpk7w1ypxg8s="
ATTEST_MESSAGE = "A-JohnSmith-KkjJX C-Acme-fZN8L R-Baker-NBSvH London"
SIGNATURE_B64 = "IO0vDf3ZqfRZ8FGGsnzzkMc65YQWIWb2+YqcQ9j/APK2QN1E2TTV/3xPkThhCfa7jahDTDVjZwKUpk7w1ypxg8s="
FRAGMENT = "Cfa7jahDTDVjZwKUpk7w1ypxg8s="

REAL_TXID = "fa65bc5fa0ee39e012282701a4ce378474183a330487e839cd1b65b398d7646e"
BLOCK_TIME_TEXT = "2019-03-28T15:46:53Z"
BLOCK_TIME = datetime(2019, 3, 28, 15, 46, 53, tzinfo=timezone.utc)
AMOUNT_SAT = 500_000

# --- values frozen from the independent oracle ---
P2SH_TESTNET = "2N6CGWKdxuvxNV8BkhWSyc52DSp16Ex9Jqd"
P2SH_MAINNET = "3Ee4SahwJUT2HLZD2Nq6z82xETnvSmPgwk"
ZERO_PAYLOAD_ADDR = "mfWxJ45yp2SFn7UciZyNpvDKrzbhyfKrY8"
ADDR_C_HASH160 = "6000858c20c2876baa9ce534740827f1d796ff2e"
AWARD_SHA256 = "a91185bd4c5f95a29ebddffffccb15011125b2c785e491345829e07886a54143"

# --- frozen synthetic twin (see scripts/build_demo_fixture.py) ---
DEMO_TXID = "98cef737a188c6a2f6645b2af052ca38d4b40b42f4032454826e7a98a5c5806e"

REAL_TX_FIXTURE = CHAIN_DIR / f"{REAL_TXID}.hex"

requires_real_transaction = pytest.mark.skipif(
    not REAL_TX_FIXTURE.exists(),
    reason=(
        "the original testnet transaction bytes are not bundled (no network "
        f"egress here); drop the explorer hex into {REAL_TX_FIXTURE} to enable"
    ),
)


def golden_pubkeys() -> tuple[PublicKey, PublicKey, PublicKey]:
    return tuple(PublicKey.from_hex(h) for h in (PK1_HEX, PK2_HEX, PK3_HEX))


def golden_policy() -> EscrowPolicy:
    return EscrowPolicy(2, golden_pubkeys())


@pytest.fixture(scope="session")
def demo_tx() -> Transaction:
    hex_text = (CHAIN_DIR / f"{DEMO_TXID}.hex").read_text().strip()
    return parse_transaction(hex_text)


@pytest.fixture(scope="session")
def demo_tx_hex() -> str:
    return (CHAIN_DIR / f"{DEMO_TXID}.hex").read_text().strip()


@pytest.fixture()
def fixture_source() -> ChainSource:
    return ChainSource("fixture", TESTNET, fixture_root=CHAIN_DIR)


@pytest.fixture(scope="session")
def golden_agreement() -> ArbitrationAgreement:
    from eaward.attestation import load_agreement
    return load_agreement(FIXTURES / "agreement.json")


@pytest.fixture(scope="session")
def golden_attestation() -> SignedMessage:
    from eaward.crypto import Address
    return SignedMessage(Address.from_text(ADDR_A), ATTEST_MESSAGE, SIGNATURE_B64)


@pytest.fixture(scope="session")
def golden_status() -> TxStatus:
    return TxStatus(BLOCK_TIME, 1000, sha256(b"demo block hash").hex())


# ---------------------------------------------------------------------------
# Fully self-signed synthetic escrow (fresh keys, genuine signatures all round)
# ---------------------------------------------------------------------------

@dataclass
class SyntheticCase:
    keys: dict
    agreement: ArbitrationAgreement
    attestation: SignedMessage
    metadata_payload: bytes
    tx: Transaction
    status: TxStatus


def build_synthetic_case(seed: str = "synthetic escrow",
                         seat: str = "TheHague",
                         jurisdiction: str = "other") -> SyntheticCase:
    from eaward.attestation import metadata_for_agreement
    from eaward.metadata import encode_metadata

    keys = {
        role: PrivateKey.from_bytes(sha256(f"{seed} {role.value}".encode()))
        for role in Role
    }
    pubs = tuple(keys[r].public_key() for r in Role)
    policy = EscrowPolicy(2, pubs)
    parties = tuple(
        Party(role, f"Party {role.value}", f"Name{role.value}",
              pubkey_to_address(keys[role].public_key(), TESTNET))
        for role in Role
    )
    agreement = ArbitrationAgreement(
        parties=parties, seat=seat, seat_jurisdiction=jurisdiction,
        reasoned_award_opt_out=True, policy=policy,
    )

    tags_line = " ".join(
        f"{r.value}-Name{r.value}-{agreement.party(r).address.text[-5:]}" for r in Role
    )
    attestation = sign_message(keys[Role.ARBITRATOR], f"{tags_line} {seat}", TESTNET)
    meta = metadata_for_agreement(agreement, attestation.signature_b64)
    payload = encode_metadata(meta)

    redeem = build_redeem_script(policy)
    script_sig = Script(
        push_data(b"")
        + push_data(sha256(f"{seed} placeholder sig 1".encode()) + b"\x01")
        + push_data(sha256(f"{seed} placeholder sig 2".encode()) + b"\x01")
        + push_data(redeem.raw)
    )
    tx = Transaction(
        version=2,
        inputs=(TxInput(Txid(hash256(f"{seed} funding".encode())), 1, script_sig),),
        outputs=(
            TxOutput(0, build_nulldata_script(payload)),
            TxOutput(AMOUNT_SAT, Script.from_hex(
                "76a914" + "00" * 20 + "88ac")),  # throwaway p2pkh payout
        ),
    )
    status = TxStatus(datetime(2020, 7, 1, 12, 0, 0, tzinfo=timezone.utc), 42,
                      sha256(f"{seed} block".encode()).hex())
    return SyntheticCase(keys, agreement, attestation, payload, tx, status)


@pytest.fixture(scope="session")
def synthetic_case() -> SyntheticCase:
    return build_synthetic_case()
