"""
结果文件与Fourier场容器测试
"""
import struct

import numpy as np
import pytest

from hpw.database.artifacts import (
    FIELD_MAGIC,
    atomic_write_text,
    decode_field,
    encode_field,
    field_from_json,
    field_to_json,
    load_field,
    read_csv,
    read_json_sidecar,
    read_jsonl,
    save_field,
    write_csv,
    write_json_sidecar,
    write_jsonl,
)
from hpw.services.group_fourier import fourier_field
from hpw.utils.response import SidecarError

from hpw.tests.conftest import SMALL_CUTOFF


@pytest.fixture(scope="module")
def tiny_field(gaussian, heisenberg, small_grid, small_quad):
    return fourier_field(gaussian, heisenberg, small_grid, SMALL_CUTOFF, small_quad)


def _assert_same_field(a, b):
    assert a.size == b.size
    assert a.descriptor_hash == b.descriptor_hash
    assert a.grid_spec == b.grid_spec
    assert np.array_equal(a.weights, b.weights)
    for sa, sb, oa, ob in zip(a.nodes, b.nodes, a.ops, b.ops):
        assert sa.lam == sb.lam and sa.eta == sb.eta and sa.orientation == sb.orientation
        assert np.array_equal(oa.entries, ob.entries)
        assert oa.meta == ob.meta


def test_atomic_write_creates_parents_and_leaves_no_temp_files(tmp_path):
    target = tmp_path / "nested" / "out.txt"
    atomic_write_text(target, "first")
    atomic_write_text(target, "second")
    assert target.read_text(encoding="utf-8") == "second"
    assert [p.name for p in target.parent.iterdir()] == ["out.txt"]


def test_jsonl_records_are_deterministic(tmp_path):
    records = [{"b": 1, "a": [0.5, None]}, {"name": "检查", "value": float("inf")}]
    path = write_jsonl(tmp_path / "r.jsonl", records)
    first = path.read_bytes()
    write_jsonl(path, records)
    assert path.read_bytes() == first
    loaded = read_jsonl(path)
    assert loaded[0] == {"a": [0.5, None], "b": 1}
    assert first.splitlines()[0].startswith(b'{"a"')


def test_csv_round_trip_keeps_column_order(tmp_path):
    rows = [{"p": 1.5, "beta": 2.0, "meta": {"x": 1}}, {"p": 1.0, "beta": None, "meta": [1, 2]}]
    path = write_csv(tmp_path / "t.csv", rows)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "p,beta,meta"
    loaded = read_csv(path)
    assert loaded[0]["p"] == "1.5" and loaded[1]["beta"] == ""
    write_csv(tmp_path / "empty.csv", [], columns=["r", "ratio"])
    assert read_csv(tmp_path / "empty.csv") == []


def test_json_sidecar_errors(tmp_path):
    path = write_json_sidecar(tmp_path / "s.json", {"c": 1.0, "kappa": 2.0})
    assert read_json_sidecar(path, required=["c"]) == {"c": 1.0, "kappa": 2.0}
    with pytest.raises(SidecarError):
        read_json_sidecar(tmp_path / "missing.json")
    with pytest.raises(SidecarError):
        read_json_sidecar(path, required=["descriptor_hash"])
    (tmp_path / "bad.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(SidecarError):
        read_json_sidecar(tmp_path / "bad.json")
    (tmp_path / "list.json").write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(SidecarError):
        read_json_sidecar(tmp_path / "list.json")


def test_field_container_round_trip(tmp_path, tiny_field):
    path = save_field(tmp_path / "field.bin", tiny_field)
    assert path.read_bytes()[:4] == FIELD_MAGIC
    _assert_same_field(load_field(path), tiny_field)
    assert encode_field(tiny_field) == path.read_bytes()


def test_field_json_round_trip(tiny_field):
    _assert_same_field(field_from_json(field_to_json(tiny_field)), tiny_field)
    with pytest.raises(SidecarError):
        field_from_json('{"entries": []}')


def test_corrupt_field_container_is_rejected(tmp_path, tiny_field):
    data = encode_field(tiny_field)
    with pytest.raises(SidecarError):
        decode_field(b"XXXX" + data[4:])
    with pytest.raises(SidecarError):
        decode_field(data[:-16])
    with pytest.raises(SidecarError):
        decode_field(data[:6])
    bumped = data[:4] + struct.pack("<I", 99) + data[8:]
    with pytest.raises(SidecarError):
        decode_field(bumped)
    with pytest.raises(SidecarError):
        load_field(tmp_path / "absent.bin")
