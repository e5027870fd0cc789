import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirrorbench.algos import brickwork_u3_cz, qft_circuit
from mirrorbench.sim import ShotTable
from mirrorbench.storage import (
    Manifest,
    SchemaError,
    circuit_from_json,
    circuit_to_json,
    read_circuits,
    read_manifest,
    read_shot_tables,
    write_circuits,
    write_manifest,
    write_shot_tables,
)

from tests.test_circuits import random_native_circuit

SAMPLING = {"m1": 10, "m2": 10, "m3": 10, "shots": 1000, "seed": 0}


class TestCircuitJsonl:
    def test_round_trip(self):
        cs = [qft_circuit(3), brickwork_u3_cz(4, 5, 1)]
        buf = io.StringIO()
        assert write_circuits(buf, cs) == 2
        buf.seek(0)
        back = list(read_circuits(buf))
        for a, b in zip(cs, back):
            assert a.id == b.id and a.n == b.n and a.layers == b.layers

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_angles_bit_faithful(self, seed):
        rng = np.random.default_rng(seed)
        c = random_native_circuit(rng, 4, 20)
        back = circuit_from_json(circuit_to_json(c))
        assert back.layers == c.layers  # exact float equality

    def test_error_carries_json_path(self):
        line = json.dumps({"id": "x", "n": 2,
                           "layers": [[{"kind": "CZ", "params": [],
                                        "qubits": [0, 5]}]]})
        with pytest.raises(SchemaError) as e:
            circuit_from_json(line)
        assert "layers[0][0]" in str(e.value)

    def test_invalid_json(self):
        with pytest.raises(SchemaError):
            circuit_from_json("{nope")

    def test_missing_key(self):
        with pytest.raises(SchemaError):
            circuit_from_json('{"id": "a", "n": 1}')


class TestShotTables:
    def test_round_trip(self):
        buf = io.StringIO()
        write_shot_tables(buf, [ShotTable("a", {"00": 5, "11": 3}, 2)])
        buf.seek(0)
        t = next(read_shot_tables(buf))
        assert t.circuit_id == "a" and t.counts == {"00": 5, "11": 3}

    def test_bad_record(self):
        buf = io.StringIO('{"circuit_id": "a"}\n')
        with pytest.raises(SchemaError) as e:
            list(read_shot_tables(buf))
        assert "$[0]" in str(e.value)


class TestManifest:
    def test_minimal_m3_round_trip(self, tmp_path):
        m = Manifest("low_level", dict(SAMPLING),
                     [{"id": "b", "kind": "benchmark", "width": 2, "depth": 1},
                      {"id": "b.m3.0", "kind": "M3", "parent_id": "b",
                       "target_bitstring": "01", "width": 2, "depth": 3}])
        path = tmp_path / "manifest.json"
        write_manifest(str(path), m)
        m2 = read_manifest(str(path))
        assert m2.to_dict() == m.to_dict()

    def test_full_suite_round_trip(self, tmp_path):
        records = [{"id": "b", "kind": "benchmark", "width": 3, "depth": 4}]
        for kind in ("M1", "M2", "M3"):
            for i in range(10):
                records.append({"id": f"b.{kind.lower()}.{i}", "kind": kind,
                                "parent_id": "b", "target_bitstring": "010",
                                "width": 3, "depth": 9})
        m = Manifest("low_level", dict(SAMPLING), records)
        path = tmp_path / "m.json"
        write_manifest(str(path), m)
        assert read_manifest(str(path)).to_dict() == m.to_dict()

    def test_unknown_fields_preserved(self, tmp_path):
        m = Manifest("subcircuit", dict(SAMPLING),
                     [{"id": "b", "kind": "benchmark", "custom": [1, 2]}],
                     extra={"note": "hello"})
        path = tmp_path / "m.json"
        write_manifest(str(path), m)
        m2 = read_manifest(str(path))
        assert m2.records[0]["custom"] == [1, 2]
        assert m2.extra["note"] == "hello"

    def test_target_length_mismatch(self):
        with pytest.raises(SchemaError) as e:
            Manifest("low_level", dict(SAMPLING),
                     [{"id": "b", "kind": "benchmark"},
                      {"id": "m", "kind": "M1", "parent_id": "b",
                       "target_bitstring": "0101", "width": 3}])
        assert "target_bitstring" in e.value.path

    def test_duplicate_ids(self):
        with pytest.raises(SchemaError):
            Manifest("low_level", dict(SAMPLING),
                     [{"id": "b", "kind": "benchmark"},
                      {"id": "b", "kind": "benchmark"}])

    def test_orphan_mirror(self):
        with pytest.raises(SchemaError) as e:
            Manifest("low_level", dict(SAMPLING),
                     [{"id": "m", "kind": "M2", "parent_id": "nope",
                       "target_bitstring": "0", "width": 1}])
        assert "parent" in str(e.value)

    def test_bad_benchmark_type(self):
        with pytest.raises(SchemaError) as e:
            Manifest("bogus", dict(SAMPLING), [])
        assert e.value.path == "$.benchmark_type"

    def test_missing_sampling_key(self):
        with pytest.raises(SchemaError) as e:
            Manifest("low_level", {"m1": 1}, [])
        assert "sampling" in e.value.path
