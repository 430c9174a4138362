"""On-disk cache round-trips, validation, and corruption detection."""

import hashlib
from fractions import Fraction

import numpy as np
import pytest

from vircut import verma
from vircut.store import (
    CacheError,
    gram_cache_path,
    load_gram,
    load_or_build_gram,
    load_or_build_rep,
    load_rep,
    rep_cache_path,
    save_gram,
    save_rep,
)

C, H = Fraction(1, 2), Fraction(0)


def _blocks_equal(a, b) -> bool:
    if set(a.blocks) != set(b.blocks):
        return False
    for key, blk in a.blocks.items():
        other = b.blocks[key]
        if blk.shape != other.shape:
            return False
        if not all(x == y for x, y in zip(np.ravel(blk), np.ravel(other))):
            return False
    return True


# ---------------------------------------------------------------------------
# gram matrices


def test_gram_round_trip(tmp_path):
    gram = verma.gram_matrix(C, H, 4)
    path = save_gram(tmp_path, gram)
    assert path == gram_cache_path(tmp_path, C, H, 4)
    loaded = load_gram(tmp_path, C, H, 4)
    assert loaded is not None
    assert loaded.c == C and loaded.h == H and loaded.level == 4
    assert all(x == y for x, y in
               zip(np.ravel(loaded.entries), np.ravel(gram.entries)))
    assert all(isinstance(x, Fraction) for x in np.ravel(loaded.entries))


def test_gram_cache_miss_returns_none(tmp_path):
    assert load_gram(tmp_path, C, H, 3) is None


def test_load_or_build_gram_uses_the_cache(tmp_path):
    first = load_or_build_gram(tmp_path, C, H, 3)
    assert gram_cache_path(tmp_path, C, H, 3).exists()
    again = load_or_build_gram(tmp_path, C, H, 3)
    assert all(x == y for x, y in
               zip(np.ravel(first.entries), np.ravel(again.entries)))


def test_load_or_build_gram_without_root():
    gram = load_or_build_gram(None, C, H, 2)
    assert gram.level == 2


# ---------------------------------------------------------------------------
# representations


def test_exact_rep_round_trip(tmp_path, ising8):
    save_rep(tmp_path, ising8)
    loaded = load_rep(tmp_path, C, H, 8)
    assert loaded is not None
    assert loaded.level_dims == ising8.level_dims
    assert loaded.c == C and loaded.mode == "exact"
    assert _blocks_equal(loaded, ising8)
    for k in range(9):
        if loaded.dim(k):
            assert loaded.norms(k) == ising8.norms(k)


def test_float_rep_round_trip_is_bit_exact(tmp_path, ising8_float):
    save_rep(tmp_path, ising8_float, c=C, h=H)
    loaded = load_rep(tmp_path, C, H, 8, mode="float")
    assert loaded is not None
    assert loaded.level_dims == ising8_float.level_dims
    for key, blk in ising8_float.blocks.items():
        assert np.array_equal(loaded.blocks[key], blk)


def test_float_rep_needs_its_exact_key(tmp_path, ising8_float):
    with pytest.raises(CacheError, match="exact .c, h. key"):
        save_rep(tmp_path, ising8_float)


def test_float_rep_key_must_match(tmp_path, ising8_float):
    with pytest.raises(CacheError, match="does not match"):
        save_rep(tmp_path, ising8_float, c=Fraction(3, 4), h=H)


def test_monomial_rep_round_trip(tmp_path):
    rep = verma.truncated_rep(C, Fraction(1, 2), 4, basis="monomial")
    save_rep(tmp_path, rep)
    loaded = load_rep(tmp_path, C, Fraction(1, 2), 4, basis="monomial")
    assert loaded is not None
    assert loaded.basis == "monomial"
    assert loaded.basis_norms is None
    assert _blocks_equal(loaded, rep)


def test_tensor_rep_is_not_cacheable(tmp_path, ising8):
    pair = verma.tensor_rep(ising8, ising8, 4)
    with pytest.raises(CacheError, match="not cacheable"):
        save_rep(tmp_path, pair)


def test_load_or_build_rep_reports_its_source(tmp_path):
    rep, source = load_or_build_rep(tmp_path, C, H, 4)
    assert source == "built"
    assert rep_cache_path(tmp_path, C, H, 4, "exact", "quotient").exists()
    again, source = load_or_build_rep(tmp_path, C, H, 4)
    assert source == "cache"
    assert _blocks_equal(rep, again)


# ---------------------------------------------------------------------------
# corruption and mismatches


def test_tampered_file_is_rejected(tmp_path):
    gram = verma.gram_matrix(C, H, 3)
    path = save_gram(tmp_path, gram)
    text = path.read_text()
    assert "9" in text  # something to flip, in an entry or the digest
    path.write_text(text.replace("9", "8", 1))
    with pytest.raises(CacheError, match="digest"):
        load_gram(tmp_path, C, H, 3)


def test_truncated_file_is_rejected(tmp_path):
    gram = verma.gram_matrix(C, H, 3)
    path = save_gram(tmp_path, gram)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-2]) + "\n")
    with pytest.raises(CacheError):
        load_gram(tmp_path, C, H, 3)


def test_garbage_file_is_rejected(tmp_path):
    path = gram_cache_path(tmp_path, C, H, 2)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("not a cache at all\n")
    with pytest.raises(CacheError, match="not a cache file"):
        load_gram(tmp_path, C, H, 2)


def test_kind_mismatch_is_rejected(tmp_path):
    gram = verma.gram_matrix(C, H, 2)
    gram_path = save_gram(tmp_path, gram)
    rep_path = rep_cache_path(tmp_path, C, H, 2, "exact", "quotient")
    rep_path.write_text(gram_path.read_text())
    with pytest.raises(CacheError, match="kind"):
        load_rep(tmp_path, C, H, 2)


def test_stale_schema_rebuilds(tmp_path):
    gram = verma.gram_matrix(C, H, 2)
    path = save_gram(tmp_path, gram)
    text = path.read_text().replace("vircut-cache 1 gram", "vircut-cache 0 gram", 1)
    # restamp the digest so only the schema version looks old
    body = [ln for ln in text.splitlines() if not ln.startswith("digest ")]
    digest = hashlib.sha256(("\n".join(body) + "\n").encode()).hexdigest()
    path.write_text("\n".join(body) + f"\ndigest {digest}\n")
    assert load_gram(tmp_path, C, H, 2) is None
    rebuilt = load_or_build_gram(tmp_path, C, H, 2)
    assert rebuilt.level == 2
    assert load_gram(tmp_path, C, H, 2) is not None  # rewritten fresh


def test_header_mismatch_is_rejected(tmp_path):
    gram = verma.gram_matrix(C, H, 2)
    path = save_gram(tmp_path, gram)
    target = gram_cache_path(tmp_path, C, Fraction(1, 2), 2)
    target.write_text(path.read_text())
    with pytest.raises(CacheError, match="header"):
        load_gram(tmp_path, C, Fraction(1, 2), 2)
