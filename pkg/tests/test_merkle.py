from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimtrail.evidence.hashing import ContentHash, HashAlgorithm
from claimtrail.ledger import merkle

from tests.oracles import oracle_fold, oracle_proof, oracle_root


def _payloads(n: int, seed: int = 0) -> list[bytes]:
    rng = random.Random(seed)
    return [rng.randbytes(rng.randint(1, 64)) for _ in range(n)]


def test_single_leaf_root_is_leaf_hash():
    payload = b"only leaf"
    root = merkle.merkle_root([merkle.leaf_hash(payload)])
    assert root.digest == merkle.leaf_hash(payload)
    proof = merkle.build_proof([merkle.leaf_hash(payload)], 0, block_height=0)
    assert proof.steps == ()
    assert merkle.verify_inclusion(payload, proof, root)


def test_four_leaves_match_hand_built_tree():
    payloads = [b"a", b"b", b"c", b"d"]
    leaves = [merkle.leaf_hash(p) for p in payloads]
    left = merkle.node_hash(leaves[0], leaves[1])
    right = merkle.node_hash(leaves[2], leaves[3])
    expected = merkle.node_hash(left, right)
    assert merkle.merkle_root(leaves).digest == expected


def test_roots_match_oracle_for_sizes_1_to_32():
    for size in range(1, 33):
        payloads = _payloads(size, seed=size)
        leaves = [merkle.leaf_hash(p) for p in payloads]
        assert merkle.merkle_root(leaves).digest == oracle_root(payloads), f"size {size}"


def test_all_proofs_match_oracle_for_sizes_1_to_32():
    for size in range(1, 33):
        payloads = _payloads(size, seed=100 + size)
        leaves = [merkle.leaf_hash(p) for p in payloads]
        root = merkle.merkle_root(leaves)
        for index in range(size):
            proof = merkle.build_proof(leaves, index, block_height=0)
            expected_path = oracle_proof(payloads, index)
            assert [(s.digest, s.side.value) for s in proof.steps] == expected_path
            assert merkle.verify_inclusion(payloads[index], proof, root)
            assert oracle_fold(payloads[index], expected_path) == root.digest


def test_bit_flipped_sibling_fails_verification():
    payloads = _payloads(7, seed=3)
    leaves = [merkle.leaf_hash(p) for p in payloads]
    root = merkle.merkle_root(leaves)
    proof = merkle.build_proof(leaves, 4, block_height=0)
    bad_digest = bytearray(proof.steps[0].digest)
    bad_digest[0] ^= 0x01
    bad_steps = (merkle.ProofStep(bytes(bad_digest), proof.steps[0].side),) + proof.steps[1:]
    bad_proof = merkle.MerkleProof(proof.leaf_index, proof.block_height, bad_steps)
    assert not merkle.verify_inclusion(payloads[4], bad_proof, root)


def test_proof_against_wrong_root_fails():
    payloads_a = _payloads(5, seed=4)
    payloads_b = _payloads(5, seed=5)
    leaves_a = [merkle.leaf_hash(p) for p in payloads_a]
    leaves_b = [merkle.leaf_hash(p) for p in payloads_b]
    proof = merkle.build_proof(leaves_a, 2, block_height=0)
    assert merkle.verify_inclusion(payloads_a[2], proof, merkle.merkle_root(leaves_a))
    assert not merkle.verify_inclusion(payloads_a[2], proof, merkle.merkle_root(leaves_b))


def test_proof_json_round_trip():
    payloads = _payloads(6, seed=6)
    leaves = [merkle.leaf_hash(p) for p in payloads]
    proof = merkle.build_proof(leaves, 3, block_height=9)
    restored = merkle.MerkleProof.from_json_dict(proof.to_json_dict())
    assert restored == proof


def test_out_of_range_index_rejected():
    leaves = [merkle.leaf_hash(b"x")]
    with pytest.raises(ValueError):
        merkle.build_proof(leaves, 1, block_height=0)


@settings(max_examples=60, deadline=None)
@given(data=st.data(), size=st.integers(min_value=1, max_value=40))
def test_random_trees_agree_with_oracle(data, size):
    payloads = [data.draw(st.binary(min_size=0, max_size=32)) for _ in range(size)]
    leaves = [merkle.leaf_hash(p) for p in payloads]
    assert merkle.merkle_root(leaves).digest == oracle_root(payloads)
    index = data.draw(st.integers(min_value=0, max_value=size - 1))
    proof = merkle.build_proof(leaves, index, block_height=0)
    assert merkle.verify_inclusion(payloads[index], proof, merkle.merkle_root(leaves))
